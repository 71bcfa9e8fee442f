/**
 * Typed client for the csx workspace service.
 *
 * Every method maps to exactly one route; no state is kept here beyond the
 * base URL, so the client is safe to share between views. Non-2xx responses
 * become ApiError with the service's detail message attached.
 */

export type Value = number | boolean;

export interface DefinitionSummary {
  kind: "type" | "action" | "device";
  name: string;
  inhabitance: "inhabited" | "uninhabited" | "unknown" | "skipped";
}

export interface ScenarioSummary {
  name: string;
  device: string;
}

export interface WorkspaceSummary {
  id: string;
  revision: number;
  ok: boolean;
  diagnostics: string[];
  definitions: DefinitionSummary[];
  scenarios: ScenarioSummary[];
}

export interface LeafSchema {
  name: string;
  path: string[];
  sort: "int" | "bool";
}

export interface ComponentSchema {
  name: string;
  action: string;
  params: { name: string; sort: "int" | "bool" }[];
}

export interface DeviceSchema {
  name: string;
  tainted: boolean;
  locations?: { name: string; type: string }[];
  components?: ComponentSchema[];
  leaves?: LeafSchema[];
}

export interface DevicesResponse {
  revision: number;
  devices: DeviceSchema[];
}

export interface Binding {
  path: string;
  value: Value;
}

export interface SolveRequest {
  device: string;
  bindings: Binding[];
  constraints?: string[];
  objective?: { sense: "minimize" | "maximize"; expr: string };
  intMin?: number;
  intMax?: number;
  budgetNodes?: number;
  budgetMs?: number;
  revision?: number;
}

/** A value tree: leaf values at the bottom, nesting mirrors the device. */
export type TreeValue = Value | { [name: string]: TreeValue };

export interface Configuration {
  flat: Record<string, Value>;
  tree: Record<string, TreeValue>;
}

export type SolveStatus = "found" | "empty" | "exhausted";

export interface SolveResponse {
  revision: number;
  status: SolveStatus;
  objective: number | null;
  configuration: Configuration | null;
}

export interface EvalResponse {
  revision: number;
  value: Value;
  sort: "int" | "bool";
}

export interface ScenarioRunResponse {
  revision: number;
  report: {
    scenario: string;
    device: string;
    status: string;
    objective: number | null;
    expectations: {
      text: string;
      passed: boolean | null;
      message: string;
    }[];
  };
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly diagnostics: string[] = [],
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class CsxClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const res = await this.fetchImpl(this.base + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!res.ok) {
      let message = `${method} ${path} failed with ${res.status}`;
      let diagnostics: string[] = [];
      try {
        const doc = await res.json();
        const detail = doc?.detail;
        if (typeof detail?.message === "string") message = detail.message;
        if (Array.isArray(detail?.diagnostics)) diagnostics = detail.diagnostics;
      } catch {
        // non-JSON error body, keep the generic message
      }
      throw new ApiError(res.status, message, diagnostics);
    }
    return res.json() as Promise<T>;
  }

  putWorkspace(
    files: Record<string, string>,
    id?: string,
  ): Promise<WorkspaceSummary> {
    return this.request("PUT", "/workspace", id ? { files, id } : { files });
  }

  getWorkspace(id: string): Promise<WorkspaceSummary> {
    return this.request("GET", `/workspace/${id}`);
  }

  getDevices(id: string): Promise<DevicesResponse> {
    return this.request("GET", `/workspace/${id}/devices`);
  }

  runScenario(id: string, name: string): Promise<ScenarioRunResponse> {
    return this.request("POST", `/workspace/${id}/scenarios/${name}/run`);
  }

  solve(id: string, req: SolveRequest): Promise<SolveResponse> {
    return this.request("POST", `/workspace/${id}/solve`, req);
  }

  evalExpr(
    id: string,
    device: string,
    expr: string,
    flat?: Record<string, Value>,
  ): Promise<EvalResponse> {
    return this.request("POST", `/workspace/${id}/eval`, {
      device,
      expr,
      ...(flat === undefined ? {} : { flat }),
    });
  }

  async exportModel(id: string, device: string): Promise<string> {
    const res = await this.fetchImpl(
      `${this.base}/workspace/${id}/export/${device}`,
    );
    if (!res.ok) {
      throw new ApiError(res.status, `export of ${device} failed`);
    }
    return res.text();
  }
}
