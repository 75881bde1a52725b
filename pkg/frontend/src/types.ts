/** Payload shapes of the evaluation service's JSON API (all carry v: 1). */

export interface SessionView {
  v: number;
  session_id: string;
  design: string;
  rng_seed: number | null;
  n_tasks: number;
  n_finalized: number;
  created_at: number;
  prediction_snapshot: string | null;
}

export interface RecordRow {
  record_id: string;
  label?: string;
  [attr: string]: unknown;
}

export interface TaskView {
  v: number;
  /** global handle "<session>:<task>" used in task-scoped endpoints */
  id: string;
  session_id: string;
  task_id: string;
  seed_record: string;
  predicted_cluster: string[];
  a_r: string[];
  b_r: string[];
  resolved: string[];
  status: 'pending' | 'in_progress' | 'finalized';
  labeler: string | null;
  lease_expires: number | null;
  p_c: number | null;
  records: RecordRow[];
}

export interface SearchHit {
  record_id: string;
  score: number;
  label?: string;
  predicted_cluster?: string | null;
  [attr: string]: unknown;
}

export interface MatrixRow {
  record_id: string;
  true_cluster: string;
  predicted_cluster: string;
  attributes: Record<string, string>;
}

export interface MembershipMatrix {
  v: number;
  total: number;
  rows: MatrixRow[];
}

export interface Estimate {
  v: number;
  metric: string;
  point: number;
  std: number;
  k: number;
  design: string;
  flags: string[];
}

export interface BenchmarkDraw {
  seed_record: string | null;
  members: string[];
  p_c: number;
  finalized_at: number;
  labeler: string | null;
}

export interface BenchmarkExport {
  v: number;
  design: string;
  draws: BenchmarkDraw[];
}

export interface QCFlag {
  task_id: string;
  severity: 'hard' | 'soft';
  kind: string;
  record: string | null;
  message: string;
}

/** One release worth of estimates on the dashboard timeline. */
export interface ReleaseEstimates {
  release: string;
  estimates: Estimate[];
}

export const TAG_DIRECTIONS = ['overclustering', 'underclustering'] as const;

/** Editable default taxonomy for audit tags; free text stays allowed. */
export const DEFAULT_TAG_LABELS = [
  'same name',
  'middle name',
  'nickname',
  'last name order',
  'typo in name',
  'invalid character',
  'topic dissimilarity',
  'assignee typo',
  'labeling error',
  'unknown',
];
