// Typed client for the workbench service. Every state change goes
// through here; the UI never computes validation results itself.

import type {
  ApiError,
  Fragment,
  MethodIndexEntry,
  MethodResponse,
  MigrationType,
  TailoringAction,
} from "./types.js";

export class ServiceError extends Error {
  readonly code: string;
  readonly subjects: string[];
  readonly status: number;

  constructor(status: number, body: ApiError) {
    super(body.message);
    this.status = status;
    this.code = body.code;
    this.subjects = body.subjects ?? [];
  }
}

async function throwFailure(response: Response): Promise<never> {
  let body: ApiError = { code: "UNKNOWN", message: response.statusText, subjects: [] };
  try {
    body = (await response.json()) as ApiError;
  } catch {
    // non-JSON failure body; keep the status text
  }
  throw new ServiceError(response.status, body);
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(this.base + path);
    if (!response.ok) await throwFailure(response);
    return (await response.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body ?? {}),
    });
    if (!response.ok) await throwFailure(response);
    return (await response.json()) as T;
  }

  catalogFragments(): Promise<{ fragments: Fragment[] }> {
    return this.getJson("/catalog/fragments");
  }

  listMethods(): Promise<{ methods: MethodIndexEntry[] }> {
    return this.getJson("/methods");
  }

  getMethod(id: string): Promise<MethodResponse> {
    return this.getJson(`/methods/${encodeURIComponent(id)}`);
  }

  createMethod(input: {
    name: string;
    description?: string;
    migration_types: MigrationType[];
    phases: string[];
  }): Promise<MethodResponse> {
    return this.postJson("/methods", input);
  }

  applyAction(methodId: string, action: TailoringAction): Promise<MethodResponse> {
    return this.postJson(`/methods/${encodeURIComponent(methodId)}/actions`, action);
  }

  validate(methodId: string): Promise<{ issues: MethodResponse["issues"] }> {
    return this.postJson(`/methods/${encodeURIComponent(methodId)}/validate`, {});
  }

  async exportXml(methodId: string): Promise<string> {
    const response = await fetch(`${this.base}/methods/${encodeURIComponent(methodId)}/export.xml`);
    if (!response.ok) await throwFailure(response);
    return await response.text();
  }

  async importXml(document: string): Promise<MethodResponse> {
    const response = await fetch(`${this.base}/methods/import`, {
      method: "POST",
      headers: { "Content-Type": "application/xml" },
      body: document,
    });
    if (!response.ok) await throwFailure(response);
    return (await response.json()) as MethodResponse;
  }

  createInstance(
    methodId: string,
    chosen: { task: string; technique: string }[],
    notes: string,
  ): Promise<{ instance: unknown }> {
    return this.postJson(`/methods/${encodeURIComponent(methodId)}/instances`, {
      chosen_techniques: chosen,
      enactment_notes: notes,
    });
  }

  async ping(): Promise<boolean> {
    try {
      const response = await fetch(`${this.base}/catalog/rules`);
      return response.ok;
    } catch {
      return false;
    }
  }
}
