import { beforeEach, describe, expect, it, vi } from 'vitest';

import { ApiClient } from '../src/api.js';
import { ClusterEditor } from '../src/editor.js';
import type { TaskView } from '../src/types.js';

function task(partial: Partial<TaskView> = {}): TaskView {
  return {
    v: 1,
    id: 's1:t0001',
    session_id: 's1',
    task_id: 't0001',
    seed_record: 'r3',
    predicted_cluster: ['r3', 'r4', 'r5'],
    a_r: [],
    b_r: [],
    resolved: ['r3', 'r4', 'r5'],
    status: 'in_progress',
    labeler: 'ann',
    lease_expires: null,
    p_c: null,
    records: [
      { record_id: 'r3', label: 'Lutgard C. De Jonghe' },
      { record_id: 'r4', label: 'Stuart Lindsay' },
      { record_id: 'r5', label: 'Stuart Lindsay' },
    ],
    ...partial,
  };
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

describe('ClusterEditor', () => {
  let container: HTMLElement;

  beforeEach(() => {
    container = document.createElement('div');
    document.body.replaceChildren(container);
  });

  it('removing a row posts the edit and shows the removal chip', async () => {
    const confirmed = task({ a_r: ['r4'], resolved: ['r3', 'r5'] });
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(confirmed));
    vi.stubGlobal('fetch', fetchMock);

    const editor = new ClusterEditor(new ApiClient('http://svc'), 'ann');
    editor.load(task(), container);
    const row = container.querySelector('tr[data-record-id="r4"] button.remove-btn') as HTMLButtonElement;
    row.click();
    // the chip appears optimistically, then the server view is confirmed
    expect(container.querySelector('.chip-removal[data-record-id="r4"]')).toBeTruthy();
    await vi.waitFor(() => {
      expect(editor.current()?.a_r).toEqual(['r4']);
    });
    expect(container.querySelector('.chip-removal[data-record-id="r4"]')).toBeTruthy();

    expect(fetchMock).toHaveBeenCalledOnce();
    const [url, init] = fetchMock.mock.calls[0];
    expect(String(url)).toBe('http://svc/api/tasks/s1:t0001/edits');
    expect(JSON.parse((init as RequestInit).body as string)).toEqual({
      op: 'remove',
      record: 'r4',
      labeler: 'ann',
    });
  });

  it('rolls the optimistic chip back when the service rejects the edit', async () => {
    const fetchMock = vi
      .fn()
      .mockResolvedValue(jsonResponse({ detail: 'seed record is immovable' }, 422));
    vi.stubGlobal('fetch', fetchMock);

    const editor = new ClusterEditor(new ApiClient('http://svc'), 'ann');
    editor.load(task(), container);
    await editor.remove('r4');

    expect(editor.current()?.a_r).toEqual([]); // rolled back
    expect(container.querySelector('.chip-removal[data-record-id="r4"]')).toBeNull();
    const banner = container.querySelector('.error-banner');
    expect(banner?.textContent).toContain('seed record is immovable');
  });

  it('409 lease conflicts also roll back and surface the message', async () => {
    const fetchMock = vi
      .fn()
      .mockResolvedValue(jsonResponse({ detail: "task t0001 is leased to 'bo'" }, 409));
    vi.stubGlobal('fetch', fetchMock);

    const editor = new ClusterEditor(new ApiClient('http://svc'), 'ann');
    editor.load(task(), container);
    await editor.add('r9');

    expect(editor.current()?.b_r).toEqual([]);
    expect(container.querySelector('.error-banner')?.textContent).toContain('leased to');
  });

  it('search panel offers add buttons for outside records only', async () => {
    const hits = {
      v: 1,
      results: [
        { record_id: 'r1', score: 2, label: 'Lutgard De Jonghe' },
        { record_id: 'r4', score: 1, label: 'Stuart Lindsay' },
      ],
    };
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(hits));
    vi.stubGlobal('fetch', fetchMock);

    const editor = new ClusterEditor(new ApiClient('http://svc'), 'ann');
    editor.load(task(), container);
    await editor.runSearch('de jonghe');

    const r1 = container.querySelector('li[data-record-id="r1"] button.add-btn');
    const r4 = container.querySelector('li[data-record-id="r4"] button.add-btn');
    expect(r1).toBeTruthy();
    expect(r4).toBeNull(); // already inside the predicted cluster
  });

  it('filter narrows and header click sorts the record table', () => {
    vi.stubGlobal('fetch', vi.fn());
    const editor = new ClusterEditor(new ApiClient('http://svc'), 'ann');
    editor.load(task(), container);

    const filter = container.querySelector('input.row-filter') as HTMLInputElement;
    filter.value = 'lindsay';
    filter.dispatchEvent(new Event('input'));
    expect(container.querySelectorAll('tbody tr').length).toBe(2);

    filter.value = '';
    filter.dispatchEvent(new Event('input'));
    const header = container.querySelector('thead th') as HTMLElement;
    header.click(); // toggle record_id descending
    const ids = [...container.querySelectorAll('tbody tr')].map(
      (tr) => (tr as HTMLElement).dataset.recordId,
    );
    expect(ids).toEqual(['r5', 'r4', 'r3']);
  });

  it('finalize blocked by the service keeps the task editable', async () => {
    const fetchMock = vi
      .fn()
      .mockResolvedValue(jsonResponse({ detail: 'task t0001 has hard QC violations: x' }, 422));
    vi.stubGlobal('fetch', fetchMock);
    const editor = new ClusterEditor(new ApiClient('http://svc'), 'ann');
    editor.load(task(), container);
    await editor.finalize();
    expect(editor.current()?.status).toBe('in_progress');
    expect(container.querySelector('.error-banner')?.textContent).toContain('hard QC violations');
  });
});
