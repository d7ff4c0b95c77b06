// Typed client for the basrelief serve API. JSON for control, raw bytes for
// image payloads; every method resolves only after the server acknowledged.

export type ArtifactMap = Record<string, string>;

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export class SolveBusyError extends ApiError {
  constructor(message: string) {
    super(409, message);
    this.name = "SolveBusyError";
  }
}

async function errorDetail(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
    return JSON.stringify(body);
  } catch {
    return `HTTP ${res.status}`;
  }
}

export class Client {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/+$/, "") + path;
  }

  private async checked(res: Response): Promise<Response> {
    if (res.ok) return res;
    const detail = await errorDetail(res);
    if (res.status === 409) throw new SolveBusyError(detail);
    throw new ApiError(res.status, detail);
  }

  async createSession(): Promise<string> {
    const res = await this.checked(await this.fetchFn(this.url("/sessions"), { method: "POST" }));
    const body = (await res.json()) as { id: string };
    return body.id;
  }

  async uploadInput(sid: string, name: string, data: Blob | ArrayBuffer | Uint8Array): Promise<void> {
    const payload = data instanceof Uint8Array
      ? data.slice().buffer
      : data;
    await this.checked(
      await this.fetchFn(this.url(`/sessions/${sid}/inputs/${name}`), {
        method: "PUT",
        headers: { "Content-Type": "image/png" },
        body: payload as BodyInit,
      }),
    );
  }

  async runOp(sid: string, op: string, body: Record<string, unknown>): Promise<ArtifactMap> {
    const res = await this.checked(
      await this.fetchFn(this.url(`/sessions/${sid}/${op}`), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      }),
    );
    const parsed = (await res.json()) as { artifacts: ArtifactMap };
    return parsed.artifacts;
  }

  artifactUrl(sid: string, name: string): string {
    return this.url(`/sessions/${sid}/artifacts/${name}`);
  }

  async fetchArtifact(sid: string, name: string): Promise<Blob> {
    const res = await this.checked(await this.fetchFn(this.artifactUrl(sid, name)));
    return res.blob();
  }

  async describeSession(sid: string): Promise<{ inputs: string[]; artifacts: string[] }> {
    const res = await this.checked(await this.fetchFn(this.url(`/sessions/${sid}`)));
    const body = (await res.json()) as { inputs: string[]; artifacts: string[] };
    return { inputs: body.inputs, artifacts: body.artifacts };
  }
}
