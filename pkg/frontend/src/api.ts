// Typed client for the annotation campaign HTTP API.
// The UI never aggregates judgments itself; the server is the single
// source of truth.

export interface ContextPanel {
  kind: 'use' | 'sense';
  node_id: string;
  tokens?: string[];
  target_index?: number | null;
  gloss?: string | null;
}

export interface QueueItem {
  campaign: string;
  word: string;
  round: number;
  pair: string[];
  left: ContextPanel;
  right: ContextPanel;
  scale: number[];
  judged: number;
  assigned: number;
}

export interface WordStatus {
  word: string;
  round: number;
  status: string;
  assigned: number;
  judged: number;
}

export interface CampaignStatus {
  id: string;
  words: WordStatus[];
}

export interface ScoresView {
  word: string;
  status: string;
  binary?: number | null;
  graded?: number | null;
  k?: number | null;
  n?: number | null;
  done_reason?: string | null;
}

export interface AdvanceResult {
  word: string;
  outcome: 'plan' | 'done';
  round: number;
  n_pairs: number;
  done_reason?: string | null;
  scores?: ScoresView | null;
}

export interface GraphView {
  word: string;
  round: number;
  nodes: { id: string; kind: string; corpus: string | null; cluster: number | null }[];
  edges: { pair: string[]; weight: number; shifted_weight: number; n_judgments: number }[];
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

export class ApiClient {
  constructor(private baseUrl: string, private token: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, '');
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await fetch(this.baseUrl + path, {
      method,
      headers: {
        Authorization: `Bearer ${this.token}`,
        ...(body !== undefined ? { 'Content-Type': 'application/json' } : {}),
      },
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const payload = await res.json().catch(() => ({}));
    if (!res.ok) {
      throw new ApiError(res.status, (payload as { detail?: string }).detail ?? res.statusText);
    }
    return payload as T;
  }

  createCampaign(spec: unknown): Promise<CampaignStatus> {
    return this.request('POST', '/campaigns', spec);
  }

  campaignStatus(campaign: string): Promise<CampaignStatus> {
    return this.request('GET', `/campaigns/${campaign}`);
  }

  async nextItem(campaign: string, annotator: string): Promise<QueueItem | null> {
    const res = await this.request<{ item: QueueItem | null }>(
      'GET', `/campaigns/${campaign}/annotators/${annotator}/next`);
    return res.item;
  }

  submitJudgment(campaign: string, pair: string[], value: number): Promise<unknown> {
    return this.request('POST', `/campaigns/${campaign}/judgments`, { pair, value });
  }

  advance(campaign: string, word: string): Promise<AdvanceResult> {
    return this.request('POST', `/campaigns/${campaign}/words/${word}/advance`);
  }

  scores(campaign: string, word: string): Promise<ScoresView> {
    return this.request('GET', `/campaigns/${campaign}/words/${word}/scores`);
  }

  graph(campaign: string, word: string): Promise<GraphView> {
    return this.request('GET', `/campaigns/${campaign}/words/${word}/graph`);
  }

  reassign(campaign: string, word: string, pair: string[],
           fromAnnotator: string, toAnnotator: string): Promise<unknown> {
    return this.request('POST', `/campaigns/${campaign}/reassign`, {
      word,
      pair,
      from_annotator: fromAnnotator,
      to_annotator: toAnnotator,
    });
  }
}
