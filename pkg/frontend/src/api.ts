/** Typed client for the investigation service. All verdict logic lives on
 * the server; this file only moves JSON. */

import type {
  FactDoc,
  JobDoc,
  QueryDoc,
  SessionSummary,
  TraceWindow,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }

  get busy(): boolean {
    return this.status === 409;
  }

  get solverUnavailable(): boolean {
    return this.status === 503;
  }
}

async function parseError(res: Response): Promise<never> {
  let message = `${res.status}`;
  try {
    const body = (await res.json()) as { error?: string };
    if (body.error) message = body.error;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(res.status, message);
}

export class Client {
  constructor(readonly base: string) {}

  private async get<T>(path: string): Promise<T> {
    const res = await fetch(this.base + path);
    if (!res.ok) await parseError(res);
    return (await res.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const res = await fetch(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) await parseError(res);
    return (await res.json()) as T;
  }

  uploadProgram(name: string, text: string): Promise<{ id: string }> {
    return this.post("/api/programs", { name, text });
  }

  uploadTrace(programId: string, name: string, log: string): Promise<{ id: string }> {
    return this.post("/api/traces", { program_id: programId, name, log });
  }

  createSession(programId: string, traceId: string, name: string): Promise<{ id: string }> {
    return this.post("/api/sessions", {
      program_id: programId,
      trace_id: traceId,
      name,
    });
  }

  session(id: string): Promise<SessionSummary> {
    return this.get(`/api/sessions/${id}`);
  }

  traceWindow(traceId: string, start?: number, end?: number): Promise<TraceWindow> {
    const params = new URLSearchParams();
    if (start !== undefined) params.set("start", String(start));
    if (end !== undefined) params.set("end", String(end));
    const suffix = params.size ? `?${params}` : "";
    return this.get(`/api/traces/${traceId}/window${suffix}`);
  }

  postQuery(sessionId: string, doc: QueryDoc): Promise<{ job_id: string }> {
    return this.post(`/api/sessions/${sessionId}/queries`, doc);
  }

  job(jobId: string): Promise<JobDoc> {
    return this.get(`/api/jobs/${jobId}`);
  }

  ledger(sessionId: string): Promise<{ facts: FactDoc[] }> {
    return this.get(`/api/sessions/${sessionId}/ledger`);
  }

  factBasis(sessionId: string, factId: number): Promise<{ constraints: Record<string, unknown> }> {
    return this.post(`/api/sessions/${sessionId}/facts/${factId}/basis`, {});
  }

  keyframeBasis(sessionId: string, t: number): Promise<{ constraints: Record<string, unknown> }> {
    return this.get(`/api/sessions/${sessionId}/keyframes/${t}/basis`);
  }

  downloadSession(sessionId: string): Promise<unknown> {
    return this.get(`/api/sessions/${sessionId}/download`);
  }

  /** Poll a query job until it settles. */
  async pollJob(
    jobId: string,
    options?: { intervalMs?: number; timeoutMs?: number },
  ): Promise<JobDoc> {
    const intervalMs = options?.intervalMs ?? 150;
    const timeoutMs = options?.timeoutMs ?? 120_000;
    const start = Date.now();
    for (;;) {
      const job = await this.job(jobId);
      if (job.status !== "pending") return job;
      if (Date.now() - start >= timeoutMs) {
        throw new ApiError(408, `job ${jobId} did not settle in ${timeoutMs}ms`);
      }
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }
}
