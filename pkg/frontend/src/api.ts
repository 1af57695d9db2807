// Typed client for the analysis service.  The UI owns no rules logic:
// every position question goes to the server.

export interface MoveStat {
  move: string;
  visits: number;
  q: number;
  prior: number;
}

export interface SearchStats {
  root_alpha: number;
  root_beta: number;
  root_winrate: number;
  root_xbar: number;
  chosen: string;
  moves: MoveStat[];
}

export interface LambdaInfo {
  lam: number;
  xbar: number;
  move: string;
}

export interface AnalyzeResponse {
  alpha: number;
  beta: number;
  winrate: number;
  to_move: "b" | "w";
  board: string[]; // server-side rows, 'x'/'o'/'.' (captures applied)
  move_number: number;
  winrate_curve: [number, number][];
  policy_top: { move: string; prior: number }[];
  search_stats: SearchStats;
  lambda_info: LambdaInfo[];
}

export interface GenmoveResponse {
  move: string;
  stats: SearchStats;
}

export interface PositionRequest {
  moves: string[];
  komi: number;
  size: number;
}

export class ServiceError extends Error {
  constructor(
    message: string,
    public status: number,
    public failingIndex?: number,
  ) {
    super(message);
  }
}

async function throwFrom(response: Response): Promise<never> {
  let message = `${response.status}`;
  let index: number | undefined;
  try {
    const body = await response.json();
    if (typeof body.detail === "string") message = body.detail;
    else if (body.detail) {
      message = body.detail.error ?? JSON.stringify(body.detail);
      index = body.detail.index;
    }
  } catch {
    /* non-JSON error body */
  }
  throw new ServiceError(message, response.status, index);
}

export class ApiClient {
  constructor(private base: string = "") {}

  async analyze(
    position: PositionRequest,
    options: { visits: number; lambdas: number[]; curveRange: number; seed?: number },
    signal?: AbortSignal,
  ): Promise<AnalyzeResponse> {
    const response = await fetch(`${this.base}/analyze`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      signal,
      body: JSON.stringify({
        ...position,
        visits: options.visits,
        lambdas: options.lambdas,
        curve_range: options.curveRange,
        seed: options.seed ?? 0,
      }),
    });
    if (!response.ok) await throwFrom(response);
    return response.json();
  }

  async genmove(
    position: PositionRequest,
    options: { visits: number; lam: number; seed?: number },
    signal?: AbortSignal,
  ): Promise<GenmoveResponse> {
    const response = await fetch(`${this.base}/genmove`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      signal,
      body: JSON.stringify({
        ...position,
        visits: options.visits,
        lam: options.lam,
        seed: options.seed ?? 0,
      }),
    });
    if (!response.ok) await throwFrom(response);
    return response.json();
  }

  async nets(): Promise<{ active: string | null }> {
    const response = await fetch(`${this.base}/nets`);
    if (!response.ok) await throwFrom(response);
    return response.json();
  }
}
