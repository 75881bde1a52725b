import { ApiClient, ApiError } from './api.js';
import { DEFAULT_TAG_LABELS, TAG_DIRECTIONS } from './types.js';

/** Audit-tag entry form for a finalized cluster under review. */
export class TagForm {
  private status = '';

  constructor(
    private readonly api: ApiClient,
    private readonly handle: string,
  ) {}

  render(container: HTMLElement): void {
    container.textContent = '';
    const form = document.createElement('form');
    form.className = 'tag-form';

    const direction = document.createElement('select');
    direction.className = 'tag-direction';
    for (const d of TAG_DIRECTIONS) {
      const opt = document.createElement('option');
      opt.value = d;
      opt.textContent = d;
      direction.appendChild(opt);
    }

    const label = document.createElement('input');
    label.className = 'tag-label';
    label.placeholder = 'error cause';
    label.setAttribute('list', 'tag-taxonomy');
    const taxonomy = document.createElement('datalist');
    taxonomy.id = 'tag-taxonomy';
    for (const t of DEFAULT_TAG_LABELS) {
      const opt = document.createElement('option');
      opt.value = t;
      taxonomy.appendChild(opt);
    }

    const note = document.createElement('input');
    note.className = 'tag-note';
    note.placeholder = 'note (optional)';

    const submit = document.createElement('button');
    submit.textContent = 'record tag';
    submit.className = 'tag-submit';

    const statusLine = document.createElement('div');
    statusLine.className = 'tag-status';
    statusLine.textContent = this.status;

    form.append(direction, label, taxonomy, note, submit, statusLine);
    form.addEventListener('submit', (ev) => {
      ev.preventDefault();
      void this.submit(direction.value, label.value, note.value, statusLine);
    });
    container.appendChild(form);
  }

  private async submit(direction: string, label: string, note: string, statusLine: HTMLElement): Promise<void> {
    try {
      await this.api.recordTag(this.handle, direction, label, note);
      this.status = `tagged ${direction}: ${label}`;
    } catch (err) {
      this.status = err instanceof ApiError ? err.detail : String(err);
    }
    statusLine.textContent = this.status;
  }
}
