// Typed client for the cyclesim service. Every error carries the HTTP
// status and the server's diagnostics so the UI can render them inline.

import type {
  DesignResponse,
  DofReport,
  JobStatus,
  ModelFile,
  PaletteEntry,
  SimulateResponse,
  SweepResponse,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public diagnostics: string[] = [],
    public body: unknown = null,
  ) {
    super(message);
  }
}

export class Client {
  constructor(public baseUrl: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, {
        method,
        headers: body === undefined ? undefined : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    const payload = await response.json().catch(() => null);
    if (!response.ok) {
      const record = (payload ?? {}) as Record<string, unknown>;
      const message = typeof record["error"] === "string"
        ? (record["error"] as string)
        : `request failed (${response.status})`;
      const diagnostics = Array.isArray(record["diagnostics"])
        ? (record["diagnostics"] as string[])
        : [];
      throw new ApiError(response.status, message, diagnostics, payload);
    }
    return payload as T;
  }

  components(): Promise<PaletteEntry[]> {
    return this.request("GET", "/api/v1/components");
  }

  examples(): Promise<{ name: string; description: string }[]> {
    return this.request("GET", "/api/v1/examples");
  }

  example(name: string): Promise<ModelFile> {
    return this.request("GET", `/api/v1/examples/${name}`);
  }

  /** Resolves with the report for 200 and 422 alike; throws otherwise. */
  async validate(model: ModelFile): Promise<DofReport> {
    try {
      return await this.request<DofReport>("POST", "/api/v1/models/validate", { model });
    } catch (err) {
      if (err instanceof ApiError && err.status === 422 && err.body) {
        return err.body as DofReport;
      }
      throw err;
    }
  }

  design(model: ModelFile, specs?: Record<string, number>): Promise<DesignResponse> {
    return this.request("POST", "/api/v1/design", { model, specs });
  }

  simulate(model: ModelFile, overrides?: Record<string, number>): Promise<SimulateResponse> {
    return this.request("POST", "/api/v1/simulate", { model, overrides });
  }

  sweep(model: ModelFile, param: string, values: number[],
        free?: string): Promise<SweepResponse> {
    return this.request("POST", "/api/v1/sweep", { model, param, values, free });
  }

  sweepAsync(model: ModelFile, param: string, values: number[],
             free?: string): Promise<{ job_id: string; total: number }> {
    return this.request("POST", "/api/v1/sweep",
      { model, param, values, free, async: true });
  }

  job(id: string): Promise<JobStatus> {
    return this.request("GET", `/api/v1/jobs/${id}`);
  }
}
