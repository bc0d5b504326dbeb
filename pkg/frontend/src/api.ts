/** Thin typed client over the service's HTTP routes, plus the NDJSON stream. */

import type {
  ChangeNotice,
  ChangeResult,
  EventRecord,
  KernelDefinition,
  Project,
  Snapshot,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Reassembles newline-delimited JSON lines from arbitrary chunk boundaries. */
export class NdjsonBuffer {
  private partial = "";

  push(chunk: string): string[] {
    this.partial += chunk;
    const pieces = this.partial.split("\n");
    this.partial = pieces.pop() ?? "";
    return pieces.filter((line) => line.trim().length > 0);
  }

  /** Whatever is left without a closing newline; empty on clean stream end. */
  remainder(): string {
    return this.partial;
  }
}

export interface SubscribeHandlers {
  onNotice: (notice: ChangeNotice) => void;
  /** Stream dropped; fired before each reconnect attempt settles. */
  onDrop?: () => void;
  /** A reconnect succeeded; re-fetch the snapshot to resync. */
  onReconnect?: () => void;
}

export interface Subscription {
  close(): void;
}

const RECONNECT_DELAY_MS = 1000;

export class ApiClient {
  token: string | null = null;

  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private headers(withBody: boolean): Record<string, string> {
    const headers: Record<string, string> = {};
    if (withBody) headers["content-type"] = "application/json";
    if (this.token) headers["authorization"] = `Bearer ${this.token}`;
    return headers;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: this.headers(body !== undefined),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      throw new ApiError(response.status, await describeFailure(response));
    }
    if (response.status === 204) return undefined as T;
    return (await response.json()) as T;
  }

  register(email: string, password: string): Promise<{ id: string; email: string }> {
    return this.request("POST", "/api/register", { email, password });
  }

  login(email: string, password: string): Promise<{ token: string; expires_at: string }> {
    return this.request("POST", "/api/login", { email, password });
  }

  kernel(): Promise<KernelDefinition> {
    return this.request("GET", "/api/kernel");
  }

  listProjects(): Promise<Project[]> {
    return this.request("GET", "/api/projects");
  }

  createProject(name: string, description = ""): Promise<Project> {
    return this.request("POST", "/api/projects", { name, description });
  }

  getProject(projectId: string): Promise<Project> {
    return this.request("GET", `/api/projects/${encodeURIComponent(projectId)}`);
  }

  patchProject(
    projectId: string,
    patch: { name?: string; description?: string },
  ): Promise<Project> {
    return this.request("PATCH", `/api/projects/${encodeURIComponent(projectId)}`, patch);
  }

  deleteProject(projectId: string): Promise<void> {
    return this.request("DELETE", `/api/projects/${encodeURIComponent(projectId)}`);
  }

  changeState(
    projectId: string,
    alphaId: string,
    stateId: string | null,
  ): Promise<ChangeResult> {
    const path =
      `/api/projects/${encodeURIComponent(projectId)}` +
      `/alphas/${encodeURIComponent(alphaId)}/state`;
    return this.request("POST", path, { state_id: stateId });
  }

  snapshot(projectId: string): Promise<Snapshot> {
    return this.request("GET", `/api/projects/${encodeURIComponent(projectId)}/snapshot`);
  }

  events(projectId: string): Promise<EventRecord[]> {
    return this.request("GET", `/api/projects/${encodeURIComponent(projectId)}/events`);
  }

  csvUrl(projectId: string): string {
    return `${this.baseUrl}/api/projects/${encodeURIComponent(projectId)}/events.csv`;
  }

  async fetchCsv(projectId: string): Promise<string> {
    const response = await this.fetchFn(this.csvUrl(projectId), {
      headers: this.headers(false),
    });
    if (!response.ok) {
      throw new ApiError(response.status, await describeFailure(response));
    }
    return response.text();
  }

  /**
   * Open the live change stream for one project.
   *
   * Keeps reading until closed; on any drop it waits briefly, reconnects, and
   * fires onReconnect so the owner can re-fetch the snapshot it may have
   * missed notices for.
   */
  subscribe(projectId: string, handlers: SubscribeHandlers): Subscription {
    let closed = false;
    let controller: AbortController | null = null;

    const run = async (): Promise<void> => {
      let first = true;
      while (!closed) {
        controller = new AbortController();
        try {
          const response = await this.fetchFn(
            `${this.baseUrl}/api/projects/${encodeURIComponent(projectId)}/subscribe`,
            { headers: this.headers(false), signal: controller.signal },
          );
          if (!response.ok || !response.body) {
            throw new ApiError(response.status, "subscription refused");
          }
          if (!first) handlers.onReconnect?.();
          first = false;
          const reader = response.body.getReader();
          const decoder = new TextDecoder();
          const buffer = new NdjsonBuffer();
          for (;;) {
            const { done, value } = await reader.read();
            if (done) break;
            for (const line of buffer.push(decoder.decode(value, { stream: true }))) {
              handlers.onNotice(JSON.parse(line) as ChangeNotice);
            }
          }
        } catch {
          // Drop through to the shared reconnect path below.
        }
        if (closed) return;
        handlers.onDrop?.();
        await delay(RECONNECT_DELAY_MS);
      }
    };

    void run();
    return {
      close() {
        closed = true;
        controller?.abort();
      },
    };
  }
}

async function describeFailure(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
  } catch {
    // Non-JSON error body; fall back to the status line.
  }
  return `request failed with status ${response.status}`;
}

function delay(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
