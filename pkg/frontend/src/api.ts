// Typed client for the session service. All GA math happens server-side;
// the UI only ever displays what these endpoints return.

export interface IndividualDoc {
  id: string;
  votes: number;
  image_ref: string | null;
  image_url: string | null;
  prompt: string;
  token_trace: [string, string][];
  seed: number;
  degraded: boolean;
  chromosome: unknown;
}

export interface GenerationDoc {
  session: string;
  index: number;
  individuals: IndividualDoc[];
}

export interface BarDoc {
  mean: number;
  var: number;
  hist: number[];
}

export interface StatsRecordDoc {
  iteration: number;
  radar: Record<string, Record<string, number>>;
  bars: Record<string, BarDoc>;
  votes_total: number;
}

export interface StatsDoc {
  session: string;
  iterations: StatsRecordDoc[];
  stream: Record<string, number[]>;
}

export interface VoteResponseDoc {
  session: string;
  generation: GenerationDoc;
  stats: StatsRecordDoc;
}

export interface FinalizeDoc {
  session: string;
  model: unknown;
  yaml: string;
}

export interface SampleDoc {
  prompt: string;
  seed: number;
  image_url: string | null;
  degraded: boolean;
  chromosome: unknown;
}

export interface SessionConfigBody {
  n?: number;
  mutation_rate?: number;
  backend?: string;
  backend_params?: Record<string, unknown>;
  master_seed?: number;
  width?: number;
  height?: number;
}

export interface CreateSessionDoc {
  session: string;
  config: unknown;
  generation: GenerationDoc;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    detail: string,
  ) {
    super(detail);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Api {
  constructor(
    private readonly base = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) {
      let code = "http_error";
      let detail = `${resp.status}`;
      try {
        const problem = (await resp.json()) as { code?: string; detail?: string };
        code = problem.code ?? code;
        detail = problem.detail ?? detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, code, detail);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  createSession(config: SessionConfigBody = {}): Promise<CreateSessionDoc> {
    return this.post("/sessions", config);
  }

  population(session: string): Promise<GenerationDoc> {
    return this.request(`/sessions/${session}/population`);
  }

  submitVotes(
    session: string,
    ballot: Record<string, number>,
    nonce: string,
  ): Promise<VoteResponseDoc> {
    return this.post(`/sessions/${session}/votes`, { ballot, nonce });
  }

  stats(session: string): Promise<StatsDoc> {
    return this.request(`/sessions/${session}/stats`);
  }

  finalize(session: string): Promise<FinalizeDoc> {
    return this.post(`/sessions/${session}/finalize`, {});
  }

  sample(session: string, count: number): Promise<{ session: string; samples: SampleDoc[] }> {
    return this.post(`/sessions/${session}/sample`, { count });
  }
}
