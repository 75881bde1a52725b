import type { ReleaseEstimates } from './types.js';

const WIDTH = 560;
const ROW_H = 26;
const LEFT = 150;

const SVG_NS = 'http://www.w3.org/2000/svg';

/**
 * Estimates dashboard: for every metric, one interval marker per release,
 * drawn as point +/- 2 estimated standard deviations on a shared [0, 1]
 * axis (values can leave the band; the ratio estimator is unclamped).
 */
export function renderDashboard(container: HTMLElement, releases: ReleaseEstimates[]): SVGSVGElement {
  container.textContent = '';
  const metrics = [...new Set(releases.flatMap((r) => r.estimates.map((e) => e.metric)))];
  const height = ROW_H * (metrics.length + 1) + 20;
  const svg = document.createElementNS(SVG_NS, 'svg');
  svg.setAttribute('viewBox', `0 0 ${WIDTH} ${height}`);
  svg.setAttribute('class', 'estimates-dashboard');

  const min = -0.05;
  const max = 1.05;
  const scale = (v: number) => LEFT + ((v - min) / (max - min)) * (WIDTH - LEFT - 20);
  const releaseOffset = (i: number) => (i - (releases.length - 1) / 2) * 6;

  metrics.forEach((metric, row) => {
    const y = ROW_H * (row + 1);
    const name = document.createElementNS(SVG_NS, 'text');
    name.setAttribute('x', '4');
    name.setAttribute('y', String(y + 4));
    name.setAttribute('class', 'metric-name');
    name.textContent = metric;
    svg.appendChild(name);

    releases.forEach((release, i) => {
      const est = release.estimates.find((e) => e.metric === metric);
      if (!est) return;
      const cy = y + releaseOffset(i);
      const lo = scale(est.point - 2 * est.std);
      const hi = scale(est.point + 2 * est.std);
      const g = document.createElementNS(SVG_NS, 'g');
      g.setAttribute('class', 'interval-marker');
      g.dataset.metric = metric;
      g.dataset.release = release.release;
      const line = document.createElementNS(SVG_NS, 'line');
      line.setAttribute('x1', String(lo));
      line.setAttribute('x2', String(hi));
      line.setAttribute('y1', String(cy));
      line.setAttribute('y2', String(cy));
      const dot = document.createElementNS(SVG_NS, 'circle');
      dot.setAttribute('cx', String(scale(est.point)));
      dot.setAttribute('cy', String(cy));
      dot.setAttribute('r', '3');
      const title = document.createElementNS(SVG_NS, 'title');
      title.textContent =
        `${metric} @ ${release.release}: ${est.point.toFixed(4)} ± ${(2 * est.std).toFixed(4)}` +
        ` (k=${est.k}${est.flags.length ? `, ${est.flags.join(',')}` : ''})`;
      g.append(line, dot, title);
      svg.appendChild(g);
    });
  });

  container.appendChild(svg);
  return svg;
}
