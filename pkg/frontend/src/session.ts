// Editor session state: mirrors the server session and serializes mutations
// so every acknowledged change lands in local state before the next request.

import { ArtifactMap, Client, SolveBusyError } from "./api.js";
import { defaults, validateParam } from "./params.js";

export class EditorSession {
  id = "";
  readonly inputs = new Set<string>();
  readonly artifacts = new Set<string>();
  readonly params: Record<string, number> = defaults();

  private solvePending = false;
  private queue: Promise<unknown> = Promise.resolve();
  private listeners: Array<() => void> = [];

  constructor(readonly client: Client) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  get isSolvePending(): boolean {
    return this.solvePending;
  }

  get connected(): boolean {
    return this.id !== "";
  }

  async connect(): Promise<string> {
    this.id = await this.client.createSession();
    this.inputs.clear();
    this.artifacts.clear();
    this.emit();
    return this.id;
  }

  setParam(name: string, value: number): void {
    const problem = validateParam(name, value);
    if (problem) throw new Error(problem);
    this.params[name] = value;
    this.emit();
  }

  // single-writer: one mutation at a time, state updated before resolving
  private enqueue<T>(job: () => Promise<T>): Promise<T> {
    const next = this.queue.then(job);
    this.queue = next.catch(() => undefined);
    return next;
  }

  upload(name: string, data: Blob | ArrayBuffer | Uint8Array): Promise<void> {
    return this.enqueue(async () => {
      await this.client.uploadInput(this.id, name, data);
      this.inputs.add(name);
      this.emit();
    });
  }

  run(op: string, body: Record<string, unknown>): Promise<ArtifactMap> {
    return this.enqueue(async () => {
      const produced = await this.client.runOp(this.id, op, body);
      for (const file of Object.values(produced)) this.artifacts.add(file);
      this.emit();
      return produced;
    });
  }

  // mirrors the server's 409: at most one outstanding solve per session
  solve(body: Record<string, unknown>): Promise<ArtifactMap> {
    if (this.solvePending) {
      return Promise.reject(new SolveBusyError("a solve is already running in this session"));
    }
    this.solvePending = true;
    this.emit();
    return this.enqueue(async () => {
      try {
        const produced = await this.client.runOp(this.id, "solve", body);
        for (const file of Object.values(produced)) this.artifacts.add(file);
        return produced;
      } finally {
        this.solvePending = false;
        this.emit();
      }
    });
  }
}
