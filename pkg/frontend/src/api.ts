/** Types mirroring the JSON API, plus a small client with single-flight submits. */

export type CashflowSign = "contribute" | "withdraw";
export type CashflowFrequency = 1 | 4 | 12;

export interface CashflowInput {
  amount: number;
  sign: CashflowSign;
  growth_rate: number;
  frequency: CashflowFrequency;
}

export interface FactorOverrides {
  vol?: number;
  rate?: number;
  spread?: number;
  valuation?: number;
}

export interface SimulateRequest {
  initial_wealth: number;
  horizon: number;
  stock_share_start: number;
  stock_share_end: number;
  domestic_share: number;
  cashflow: CashflowInput;
  n_paths: number;
  master_seed?: number;
  factor_overrides?: FactorOverrides;
  allow_nonstationary?: boolean;
}

export interface WealthPoint {
  year: number;
  wealth: number;
}

export interface PercentilePath {
  path_index: number;
  ruin_year: number | null;
  wealth: WealthPoint[];
}

export interface EchoedConfig extends SimulateRequest {
  master_seed: number;
  allow_nonstationary: boolean;
}

export interface SimulateResponse {
  config: EchoedConfig;
  n_paths: number;
  horizon: number;
  master_seed: number;
  ruin_probability: number;
  mean_ruin_year: number | null;
  mean_final_wealth: number;
  p90_final_wealth: number;
  percentile_paths: Record<string, PercentilePath>;
  model_version: string;
  elapsed_ms: number;
}

export interface FactorRange {
  min: number;
  max: number;
}

export interface Defaults {
  initial_factors: { year: number; vol: number; rate: number; spread: number; valuation: number };
  factor_ranges: Record<"vol" | "rate" | "spread" | "valuation", FactorRange>;
  horizon: { min: number; max: number };
  share_range: { min: number; max: number };
  n_paths: { default: number; min: number; max: number };
  cashflow_frequencies: number[];
  stationary: boolean;
}

export interface ApiFieldError {
  field: string;
  message: string;
}

export class ApiError extends Error {
  readonly status: number;
  readonly errors: ApiFieldError[];

  constructor(status: number, errors: ApiFieldError[]) {
    super(errors.map((e) => `${e.field}: ${e.message}`).join("; ") || `request failed (${status})`);
    this.status = status;
    this.errors = errors;
  }
}

async function parseErrors(response: Response): Promise<ApiFieldError[]> {
  try {
    const body = await response.json();
    if (Array.isArray(body?.errors)) return body.errors as ApiFieldError[];
  } catch {
    /* non-JSON error body */
  }
  return [{ field: "request", message: `server answered ${response.status}` }];
}

export async function fetchDefaults(fetcher: typeof fetch = fetch): Promise<Defaults> {
  const response = await fetcher("/api/defaults");
  if (!response.ok) throw new ApiError(response.status, await parseErrors(response));
  return (await response.json()) as Defaults;
}

export async function postSimulate(
  request: SimulateRequest,
  fetcher: typeof fetch = fetch,
  signal?: AbortSignal,
): Promise<SimulateResponse> {
  const response = await fetcher("/api/simulate", {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(request),
    signal,
  });
  if (!response.ok) throw new ApiError(response.status, await parseErrors(response));
  return (await response.json()) as SimulateResponse;
}

/** Serializes submits: a new one aborts whatever is still in flight. */
export class SimulationClient {
  private controller: AbortController | null = null;

  constructor(private readonly fetcher: typeof fetch = fetch) {}

  get busy(): boolean {
    return this.controller !== null;
  }

  async simulate(request: SimulateRequest): Promise<SimulateResponse> {
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    try {
      return await postSimulate(request, this.fetcher, controller.signal);
    } finally {
      if (this.controller === controller) this.controller = null;
    }
  }
}
