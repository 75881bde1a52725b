import { ApiClient, ApiError } from './api.js';
import type { SessionView, TaskView } from './types.js';

/** Session list with per-session progress and a claim-next-task action. */
export class TaskQueue {
  private sessions: SessionView[] = [];
  private error = '';
  onTaskClaimed: ((task: TaskView) => void) | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly labeler: string,
  ) {}

  async refresh(container: HTMLElement): Promise<void> {
    try {
      const resp = await this.api.listSessions();
      this.sessions = resp.sessions;
      this.error = '';
    } catch (err) {
      this.error = err instanceof ApiError ? err.detail : String(err);
    }
    this.render(container);
  }

  render(container: HTMLElement): void {
    container.textContent = '';
    if (this.error) {
      const banner = document.createElement('div');
      banner.className = 'error-banner';
      banner.textContent = this.error;
      container.appendChild(banner);
    }
    const list = document.createElement('ul');
    list.className = 'session-list';
    for (const session of this.sessions) {
      const li = document.createElement('li');
      li.dataset.sessionId = session.session_id;
      li.textContent = `${session.session_id} — ${session.design}, ${session.n_finalized}/${session.n_tasks} finalized `;
      const next = document.createElement('button');
      next.className = 'next-task-btn';
      next.textContent = 'next task';
      next.disabled = session.n_finalized >= session.n_tasks;
      next.addEventListener('click', () => void this.claimNext(session.session_id, container));
      li.appendChild(next);
      list.appendChild(li);
    }
    container.appendChild(list);
  }

  private async claimNext(sessionId: string, container: HTMLElement): Promise<void> {
    try {
      const task = await this.api.nextTask(sessionId, this.labeler);
      if (this.onTaskClaimed) this.onTaskClaimed(task);
    } catch (err) {
      this.error = err instanceof ApiError ? err.detail : String(err);
      this.render(container);
    }
  }
}
