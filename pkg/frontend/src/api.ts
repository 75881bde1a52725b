import type {
  BenchmarkExport,
  Estimate,
  MembershipMatrix,
  QCFlag,
  SearchHit,
  SessionView,
  TaskView,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

/** Thin fetch wrapper over the service endpoints; throws ApiError on non-2xx. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly token?: string,
  ) {}

  private headers(hasBody: boolean): Record<string, string> {
    const h: Record<string, string> = {};
    if (hasBody) h['Content-Type'] = 'application/json';
    if (this.token) h['Authorization'] = `Bearer ${this.token}`;
    return h;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method,
      headers: this.headers(body !== undefined),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const payload = (await resp.json()) as { detail?: string };
        if (payload.detail) detail = payload.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  listSessions(limit = 100, offset = 0): Promise<{ v: number; total: number; sessions: SessionView[] }> {
    return this.request('GET', `/api/sessions?limit=${limit}&offset=${offset}`);
  }

  createSession(design: string, k: number, seed?: number): Promise<SessionView> {
    return this.request('POST', '/api/sessions', { design, k, seed });
  }

  listTasks(sessionId: string, limit = 100, offset = 0): Promise<{ v: number; total: number; tasks: TaskView[] }> {
    return this.request('GET', `/api/sessions/${sessionId}/tasks?limit=${limit}&offset=${offset}`);
  }

  nextTask(sessionId: string, labeler: string): Promise<TaskView> {
    return this.request('GET', `/api/sessions/${sessionId}/tasks/next?labeler=${encodeURIComponent(labeler)}`);
  }

  applyEdit(handle: string, op: 'add' | 'remove' | 'unadd' | 'unremove', record: string, labeler: string): Promise<TaskView> {
    return this.request('POST', `/api/tasks/${handle}/edits`, { op, record, labeler });
  }

  finalize(handle: string, labeler: string): Promise<TaskView> {
    return this.request('POST', `/api/tasks/${handle}/finalize`, { labeler });
  }

  search(q: string, limit = 20): Promise<{ v: number; results: SearchHit[] }> {
    return this.request('GET', `/api/search?q=${encodeURIComponent(q)}&limit=${limit}`);
  }

  membershipMatrix(handle: string, limit = 5000): Promise<MembershipMatrix> {
    return this.request('GET', `/api/clusters/${handle}/membership-matrix?limit=${limit}`);
  }

  recordTag(handle: string, direction: string, label: string, note = ''): Promise<unknown> {
    return this.request('POST', `/api/clusters/${handle}/tags`, { direction, label, note });
  }

  estimates(sessionId: string, metrics?: string): Promise<Estimate[]> {
    const extra = metrics ? `&metrics=${encodeURIComponent(metrics)}` : '';
    return this.request('GET', `/api/estimates?session=${sessionId}${extra}`);
  }

  benchmark(sessionId: string): Promise<BenchmarkExport> {
    return this.request('GET', `/api/sessions/${sessionId}/benchmark`);
  }

  qcFlags(sessionId: string): Promise<{ v: number; flags: QCFlag[] }> {
    return this.request('GET', `/api/sessions/${sessionId}/qc`);
  }

  summaryStats(): Promise<Record<string, unknown>> {
    return this.request('GET', '/api/summary-stats');
  }
}
