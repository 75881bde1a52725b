import { describe, expect, it } from 'vitest';

import { renderDashboard } from '../src/dashboard.js';
import type { Estimate, ReleaseEstimates } from '../src/types.js';

function estimate(metric: string, point: number, std = 0.02): Estimate {
  return { v: 1, metric, point, std, k: 400, design: 'pps_record', flags: [] };
}

describe('estimates dashboard', () => {
  it('draws one interval marker per metric per release', () => {
    const releases: ReleaseEstimates[] = ['2021-12', '2022-06', '2022-12'].map((release, i) => ({
      release,
      estimates: [
        estimate('pairwise_precision', 0.8 + 0.03 * i),
        estimate('pairwise_recall', 0.9 - 0.02 * i),
      ],
    }));
    const container = document.createElement('div');
    const svg = renderDashboard(container, releases);

    const markers = [...svg.querySelectorAll('g.interval-marker')] as SVGGElement[];
    expect(markers.length).toBe(6);
    for (const metric of ['pairwise_precision', 'pairwise_recall']) {
      expect(markers.filter((m) => m.dataset.metric === metric).length).toBe(3);
    }
    // each marker carries the point ± 2·std interval
    const first = markers[0];
    const line = first.querySelector('line')!;
    const dot = first.querySelector('circle')!;
    const lo = Number(line.getAttribute('x1'));
    const hi = Number(line.getAttribute('x2'));
    const mid = Number(dot.getAttribute('cx'));
    expect(lo).toBeLessThan(mid);
    expect(mid).toBeLessThan(hi);
    expect(first.querySelector('title')?.textContent).toContain('±');
  });

  it('handles releases missing a metric', () => {
    const releases: ReleaseEstimates[] = [
      { release: 'a', estimates: [estimate('bcubed_recall', 0.95)] },
      { release: 'b', estimates: [] },
    ];
    const container = document.createElement('div');
    const svg = renderDashboard(container, releases);
    expect(svg.querySelectorAll('g.interval-marker').length).toBe(1);
  });
});
