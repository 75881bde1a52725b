import type { MatrixRow } from './types.js';

const WIDTH = 640;
const HEIGHT = 360;
const MARGIN = 48;

/** Beyond this many records the scatter aggregates by (true, predicted) pair. */
export const SCATTER_POINT_LIMIT = 2000;

const SVG_NS = 'http://www.w3.org/2000/svg';

function axisPositions(values: string[], span: number): Map<string, number> {
  const unique = [...new Set(values)].sort();
  const step = unique.length > 1 ? span / (unique.length - 1) : 0;
  const out = new Map<string, number>();
  unique.forEach((v, i) => out.set(v, MARGIN + (unique.length > 1 ? i * step : span / 2)));
  return out;
}

function hoverText(row: MatrixRow): string {
  const attrs = Object.entries(row.attributes)
    .map(([k, v]) => `${k}: ${v}`)
    .join('\n');
  return `${row.record_id}\n${attrs}`;
}

/**
 * Membership scatter: records plotted by true cluster (x) against predicted
 * cluster (y), covering every predicted cluster that intersects the focal
 * true cluster, so both error directions stay visible. Hover reveals the
 * record's attributes. Large inputs render as aggregated cells with counts.
 */
export function renderScatter(container: HTMLElement, rows: MatrixRow[], focalLabel = 'this cluster'): SVGSVGElement {
  container.textContent = '';
  const svg = document.createElementNS(SVG_NS, 'svg');
  svg.setAttribute('viewBox', `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute('class', 'membership-scatter');

  const xs = axisPositions(
    rows.map((r) => r.true_cluster || '(other true clusters)'),
    WIDTH - 2 * MARGIN,
  );
  const ys = axisPositions(
    rows.map((r) => r.predicted_cluster),
    HEIGHT - 2 * MARGIN,
  );

  const xAxis = document.createElementNS(SVG_NS, 'text');
  xAxis.setAttribute('x', String(WIDTH / 2));
  xAxis.setAttribute('y', String(HEIGHT - 8));
  xAxis.setAttribute('class', 'axis-label');
  xAxis.textContent = `true cluster (focal: ${focalLabel})`;
  svg.appendChild(xAxis);
  const yAxis = document.createElementNS(SVG_NS, 'text');
  yAxis.setAttribute('x', '12');
  yAxis.setAttribute('y', '16');
  yAxis.setAttribute('class', 'axis-label');
  yAxis.textContent = 'predicted cluster';
  svg.appendChild(yAxis);

  if (rows.length <= SCATTER_POINT_LIMIT) {
    const jitter = new Map<string, number>();
    for (const row of rows) {
      const xKey = row.true_cluster || '(other true clusters)';
      const cellKey = `${xKey}|${row.predicted_cluster}`;
      const n = jitter.get(cellKey) ?? 0;
      jitter.set(cellKey, n + 1);
      const circle = document.createElementNS(SVG_NS, 'circle');
      circle.setAttribute('cx', String((xs.get(xKey) ?? MARGIN) + (n % 7) * 4));
      circle.setAttribute('cy', String((ys.get(row.predicted_cluster) ?? MARGIN) + Math.floor(n / 7) * 4));
      circle.setAttribute('r', '4');
      circle.setAttribute(
        'class',
        row.true_cluster ? 'scatter-point focal' : 'scatter-point other',
      );
      circle.dataset.recordId = row.record_id;
      const title = document.createElementNS(SVG_NS, 'title');
      title.textContent = hoverText(row);
      circle.appendChild(title);
      svg.appendChild(circle);
    }
  } else {
    const counts = new Map<string, { x: string; y: string; n: number }>();
    for (const row of rows) {
      const xKey = row.true_cluster || '(other true clusters)';
      const key = `${xKey}|${row.predicted_cluster}`;
      const cell = counts.get(key) ?? { x: xKey, y: row.predicted_cluster, n: 0 };
      cell.n += 1;
      counts.set(key, cell);
    }
    for (const cell of counts.values()) {
      const g = document.createElementNS(SVG_NS, 'g');
      g.setAttribute('class', 'scatter-cell');
      g.dataset.count = String(cell.n);
      const rect = document.createElementNS(SVG_NS, 'rect');
      const cx = xs.get(cell.x) ?? MARGIN;
      const cy = ys.get(cell.y) ?? MARGIN;
      const side = 10 + 4 * Math.log10(cell.n);
      rect.setAttribute('x', String(cx - side / 2));
      rect.setAttribute('y', String(cy - side / 2));
      rect.setAttribute('width', String(side));
      rect.setAttribute('height', String(side));
      const label = document.createElementNS(SVG_NS, 'text');
      label.setAttribute('x', String(cx));
      label.setAttribute('y', String(cy + 4));
      label.setAttribute('class', 'cell-count');
      label.textContent = String(cell.n);
      const title = document.createElementNS(SVG_NS, 'title');
      title.textContent = `${cell.n} records\ntrue: ${cell.x}\npredicted: ${cell.y}`;
      g.append(rect, label, title);
      svg.appendChild(g);
    }
  }

  container.appendChild(svg);
  return svg;
}
