import { ApiClient, ApiError } from './api.js';
import type { RecordRow, SearchHit, TaskView } from './types.js';

/**
 * Cluster editor: the frozen predicted cluster as an explorable table,
 * removal/addition chips, a search panel for candidate matches, and
 * finalize.
 *
 * Edits are optimistic: the chip appears immediately, the edit is POSTed,
 * and on 409/422 the local state rolls back to the last server-confirmed
 * task view, so the screen never keeps state the journal did not accept.
 */
export class ClusterEditor {
  private task: TaskView | null = null;
  private container: HTMLElement | null = null;
  private filter = '';
  private sortKey = 'record_id';
  private sortAsc = true;
  private searchHits: SearchHit[] = [];
  private error = '';
  onFinalized: ((task: TaskView) => void) | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly labeler: string,
  ) {}

  load(task: TaskView, container: HTMLElement): void {
    this.task = task;
    this.container = container;
    this.filter = '';
    this.searchHits = [];
    this.error = '';
    this.render();
  }

  current(): TaskView | null {
    return this.task;
  }

  private async mutate(action: () => Promise<TaskView>): Promise<void> {
    if (!this.task) return;
    const confirmed = this.task;
    try {
      this.task = await action();
      this.error = '';
    } catch (err) {
      this.task = confirmed; // roll back the optimistic change
      this.error = err instanceof ApiError ? err.detail : String(err);
    }
    this.render();
  }

  async remove(recordId: string): Promise<void> {
    if (!this.task) return;
    const optimistic = { ...this.task, a_r: [...this.task.a_r, recordId] };
    const confirmed = this.task;
    this.task = optimistic;
    this.render();
    this.task = confirmed;
    await this.mutate(() => this.api.applyEdit(confirmed.id, 'remove', recordId, this.labeler));
  }

  async add(recordId: string): Promise<void> {
    if (!this.task) return;
    const optimistic = { ...this.task, b_r: [...this.task.b_r, recordId] };
    const confirmed = this.task;
    this.task = optimistic;
    this.render();
    this.task = confirmed;
    await this.mutate(() => this.api.applyEdit(confirmed.id, 'add', recordId, this.labeler));
  }

  async revert(op: 'unadd' | 'unremove', recordId: string): Promise<void> {
    if (!this.task) return;
    const confirmed = this.task;
    await this.mutate(() => this.api.applyEdit(confirmed.id, op, recordId, this.labeler));
  }

  async finalize(): Promise<void> {
    if (!this.task) return;
    const confirmed = this.task;
    await this.mutate(async () => {
      const task = await this.api.finalize(confirmed.id, this.labeler);
      if (this.onFinalized) this.onFinalized(task);
      return task;
    });
  }

  async runSearch(query: string): Promise<void> {
    if (!query.trim()) return;
    try {
      const resp = await this.api.search(query);
      this.searchHits = resp.results;
      this.error = '';
    } catch (err) {
      this.searchHits = [];
      this.error = err instanceof ApiError ? err.detail : String(err);
    }
    this.render();
  }

  private attributeColumns(): string[] {
    if (!this.task) return [];
    const cols = new Set<string>();
    for (const row of this.task.records) {
      for (const key of Object.keys(row)) {
        if (key !== 'record_id') cols.add(key);
      }
    }
    return ['record_id', ...cols];
  }

  private visibleRows(): RecordRow[] {
    if (!this.task) return [];
    const needle = this.filter.toLowerCase();
    let rows = this.task.records;
    if (needle) {
      rows = rows.filter((r) =>
        Object.values(r).some((v) => String(v ?? '').toLowerCase().includes(needle)),
      );
    }
    const key = this.sortKey;
    const sign = this.sortAsc ? 1 : -1;
    return [...rows].sort((a, b) => {
      const av = String(a[key] ?? '');
      const bv = String(b[key] ?? '');
      return av < bv ? -sign : av > bv ? sign : 0;
    });
  }

  render(): void {
    const root = this.container;
    const task = this.task;
    if (!root || !task) return;
    root.textContent = '';

    const head = document.createElement('div');
    head.className = 'editor-head';
    const seed = document.createElement('div');
    seed.className = 'seed-card';
    const seedRow = task.records.find((r) => r.record_id === task.seed_record);
    seed.innerHTML = `<strong>Seed</strong> <code>${task.seed_record}</code> ${
      seedRow?.label ? `&mdash; ${String(seedRow.label)}` : ''
    } <span class="status">[${task.status}]</span>`;
    head.appendChild(seed);

    if (this.error) {
      const banner = document.createElement('div');
      banner.className = 'error-banner';
      banner.setAttribute('role', 'alert');
      banner.textContent = this.error;
      const retry = document.createElement('button');
      retry.className = 'dismiss';
      retry.textContent = 'dismiss';
      retry.addEventListener('click', () => {
        this.error = '';
        this.render();
      });
      banner.appendChild(retry);
      head.appendChild(banner);
    }
    root.appendChild(head);

    root.appendChild(this.chipRow('Removals', task.a_r, 'chip-removal', 'unremove'));
    root.appendChild(this.chipRow('Additions', task.b_r, 'chip-addition', 'unadd'));

    // explorable raw-attribute table of the predicted cluster (plus additions)
    const controls = document.createElement('div');
    controls.className = 'table-controls';
    const filter = document.createElement('input');
    filter.placeholder = 'filter rows';
    filter.className = 'row-filter';
    filter.value = this.filter;
    filter.addEventListener('input', () => {
      this.filter = filter.value;
      this.render();
    });
    controls.appendChild(filter);
    root.appendChild(controls);

    const table = document.createElement('table');
    table.className = 'record-table';
    const thead = document.createElement('thead');
    const headerRow = document.createElement('tr');
    for (const col of this.attributeColumns()) {
      const th = document.createElement('th');
      th.textContent = col + (this.sortKey === col ? (this.sortAsc ? ' ▲' : ' ▼') : '');
      th.addEventListener('click', () => {
        if (this.sortKey === col) this.sortAsc = !this.sortAsc;
        else {
          this.sortKey = col;
          this.sortAsc = true;
        }
        this.render();
      });
      headerRow.appendChild(th);
    }
    headerRow.appendChild(document.createElement('th'));
    thead.appendChild(headerRow);
    table.appendChild(thead);

    const tbody = document.createElement('tbody');
    const columns = this.attributeColumns();
    for (const row of this.visibleRows()) {
      const tr = document.createElement('tr');
      tr.dataset.recordId = row.record_id;
      const removed = task.a_r.includes(row.record_id);
      const added = task.b_r.includes(row.record_id);
      if (removed) tr.className = 'removed';
      if (added) tr.className = 'added';
      for (const col of columns) {
        const td = document.createElement('td');
        td.textContent = String(row[col] ?? '');
        tr.appendChild(td);
      }
      const actions = document.createElement('td');
      if (row.record_id !== task.seed_record && !added && task.status !== 'finalized') {
        const btn = document.createElement('button');
        btn.className = 'remove-btn';
        btn.textContent = removed ? 'removed' : 'remove';
        btn.disabled = removed;
        btn.addEventListener('click', () => void this.remove(row.record_id));
        actions.appendChild(btn);
      }
      tr.appendChild(actions);
      tbody.appendChild(tr);
    }
    table.appendChild(tbody);
    root.appendChild(table);

    root.appendChild(this.searchPanel(task));

    const finalize = document.createElement('button');
    finalize.className = 'finalize-btn';
    finalize.textContent = task.status === 'finalized' ? 'finalized' : 'finalize cluster';
    finalize.disabled = task.status === 'finalized';
    finalize.addEventListener('click', () => void this.finalize());
    root.appendChild(finalize);
  }

  private chipRow(
    title: string,
    records: string[],
    chipClass: string,
    revertOp: 'unadd' | 'unremove',
  ): HTMLElement {
    const wrap = document.createElement('div');
    wrap.className = 'chip-row';
    const label = document.createElement('span');
    label.className = 'chip-title';
    label.textContent = `${title} (${records.length})`;
    wrap.appendChild(label);
    for (const rid of [...records].sort()) {
      const chip = document.createElement('span');
      chip.className = `chip ${chipClass}`;
      chip.dataset.recordId = rid;
      chip.textContent = rid;
      if (this.task?.status !== 'finalized') {
        const x = document.createElement('button');
        x.className = 'chip-x';
        x.textContent = '×';
        x.addEventListener('click', () => void this.revert(revertOp, rid));
        chip.appendChild(x);
      }
      wrap.appendChild(chip);
    }
    return wrap;
  }

  private searchPanel(task: TaskView): HTMLElement {
    const panel = document.createElement('div');
    panel.className = 'search-panel';
    const input = document.createElement('input');
    input.placeholder = 'search candidate matches (typo tolerant)';
    input.className = 'search-input';
    const go = document.createElement('button');
    go.textContent = 'search';
    go.className = 'search-btn';
    go.addEventListener('click', () => void this.runSearch(input.value));
    input.addEventListener('keydown', (ev) => {
      if ((ev as KeyboardEvent).key === 'Enter') void this.runSearch(input.value);
    });
    panel.append(input, go);

    const results = document.createElement('ul');
    results.className = 'search-results';
    for (const hit of this.searchHits) {
      const li = document.createElement('li');
      li.dataset.recordId = hit.record_id;
      const inCluster = task.predicted_cluster.includes(hit.record_id) || task.b_r.includes(hit.record_id);
      li.textContent = `${hit.record_id} ${hit.label ?? ''} `;
      if (!inCluster && task.status !== 'finalized') {
        const btn = document.createElement('button');
        btn.className = 'add-btn';
        btn.textContent = 'add';
        btn.addEventListener('click', () => void this.add(hit.record_id));
        li.appendChild(btn);
      }
      results.appendChild(li);
    }
    panel.appendChild(results);
    return panel;
  }
}
