import { ApiClient } from './api.js';
import { ClusterEditor } from './editor.js';
import { renderDashboard } from './dashboard.js';
import { renderScatter } from './scatter.js';
import { TagForm } from './tags.js';
import { TaskQueue } from './taskQueue.js';
import type { ReleaseEstimates, TaskView } from './types.js';

export interface AppConfig {
  baseUrl: string;
  token?: string;
  labeler?: string;
}

const SCREENS = ['queue', 'editor', 'scatter', 'tags', 'dashboard'] as const;
type Screen = (typeof SCREENS)[number];

/**
 * Single-page review app over the evaluation service: claim sampled tasks,
 * edit clusters, inspect the membership scatter, tag error causes, and
 * read the estimate dashboard. The service journal is the single source of
 * truth; the app re-renders from confirmed server state after every call.
 */
export class App {
  readonly api: ApiClient;
  readonly labeler: string;
  readonly queue: TaskQueue;
  readonly editor: ClusterEditor;
  private panes = new Map<Screen, HTMLElement>();
  private currentTask: TaskView | null = null;

  constructor(
    private readonly root: HTMLElement,
    config: AppConfig,
  ) {
    this.api = new ApiClient(config.baseUrl, config.token);
    this.labeler = config.labeler ?? 'reviewer';
    this.queue = new TaskQueue(this.api, this.labeler);
    this.editor = new ClusterEditor(this.api, this.labeler);
    this.buildShell();
    this.queue.onTaskClaimed = (task) => void this.openTask(task);
    this.editor.onFinalized = () => void this.showQueue();
  }

  private buildShell(): void {
    this.root.textContent = '';
    const nav = document.createElement('nav');
    nav.className = 'app-nav';
    for (const screen of SCREENS) {
      const btn = document.createElement('button');
      btn.textContent = screen;
      btn.dataset.screen = screen;
      btn.addEventListener('click', () => void this.show(screen));
      nav.appendChild(btn);
    }
    this.root.appendChild(nav);
    for (const screen of SCREENS) {
      const pane = document.createElement('section');
      pane.dataset.pane = screen;
      pane.hidden = screen !== 'queue';
      this.root.appendChild(pane);
      this.panes.set(screen, pane);
    }
  }

  pane(screen: Screen): HTMLElement {
    const pane = this.panes.get(screen);
    if (!pane) throw new Error(`no pane for ${screen}`);
    return pane;
  }

  private setVisible(screen: Screen): void {
    for (const [name, pane] of this.panes) pane.hidden = name !== screen;
  }

  async show(screen: Screen): Promise<void> {
    this.setVisible(screen);
    if (screen === 'queue') await this.queue.refresh(this.pane('queue'));
    if (screen === 'scatter') await this.refreshScatter();
    if (screen === 'dashboard') await this.refreshDashboard();
    if (screen === 'tags') this.refreshTags();
  }

  async showQueue(): Promise<void> {
    await this.show('queue');
  }

  async openTask(task: TaskView): Promise<void> {
    this.currentTask = task;
    this.setVisible('editor');
    this.editor.load(task, this.pane('editor'));
  }

  async refreshScatter(): Promise<void> {
    const task = this.editor.current() ?? this.currentTask;
    const pane = this.pane('scatter');
    if (!task) {
      pane.textContent = 'claim a task first';
      return;
    }
    const matrix = await this.api.membershipMatrix(task.id);
    renderScatter(pane, matrix.rows, task.id);
  }

  refreshTags(): void {
    const task = this.editor.current() ?? this.currentTask;
    const pane = this.pane('tags');
    if (!task) {
      pane.textContent = 'claim a task first';
      return;
    }
    new TagForm(this.api, task.id).render(pane);
  }

  async refreshDashboard(): Promise<void> {
    const pane = this.pane('dashboard');
    const sessions = await this.api.listSessions();
    const releases: ReleaseEstimates[] = [];
    for (const session of sessions.sessions) {
      if (session.n_finalized < session.n_tasks || session.n_tasks === 0) continue;
      try {
        releases.push({
          release: session.session_id,
          estimates: await this.api.estimates(session.session_id),
        });
      } catch {
        // sessions that cannot be exported (conflicts) simply stay off the board
      }
    }
    if (!releases.length) {
      pane.textContent = 'no finalized sessions yet';
      return;
    }
    renderDashboard(pane, releases);
  }
}

export function init(root: HTMLElement, config: AppConfig): App {
  return new App(root, config);
}

// browser entry point: mount on #app when served as a static asset
if (typeof document !== 'undefined') {
  const mount = document.getElementById('app');
  if (mount) {
    const app = init(mount, {
      baseUrl: '',
      labeler: new URLSearchParams(window.location.search).get('labeler') ?? 'reviewer',
    });
    void app.showQueue();
  }
}
