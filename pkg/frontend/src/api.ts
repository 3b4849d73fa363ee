import type { Health, Limits, TransferRequest, TransferResponse } from "./types.js";

export const SCHEMA_VERSION = 1;

/** Error carrying the service's machine-readable code. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    detail?: string,
  ) {
    super(detail ? `${code}: ${detail}` : code);
    this.name = "ApiError";
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let code = `HTTP${resp.status}`;
  let detail: string | undefined;
  try {
    const body = await resp.json();
    if (body && typeof body.error === "string") {
      code = body.error;
      detail = typeof body.detail === "string" ? body.detail : undefined;
    }
  } catch {
    // non-JSON error body: keep the status code
  }
  return new ApiError(resp.status, code, detail);
}

/** Thin typed client for the tsb inference service. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`);
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  health(): Promise<Health> {
    return this.get<Health>("/v1/health");
  }

  limits(): Promise<Limits> {
    return this.get<Limits>("/v1/limits");
  }

  async transfer(
    req: Omit<TransferRequest, "schema_version">,
    signal?: AbortSignal,
  ): Promise<TransferResponse> {
    const body: TransferRequest = { schema_version: SCHEMA_VERSION, ...req };
    const resp = await this.fetchFn(`${this.baseUrl}/v1/transfer`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as TransferResponse;
  }
}
