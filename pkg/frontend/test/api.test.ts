import { describe, expect, it, vi } from "vitest";

import { ApiError, Client, SolveBusyError } from "../src/api.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("Client", () => {
  it("creates sessions and returns the id", async () => {
    const fetchFn = vi.fn(async () => jsonResponse(201, { id: "abc123" }));
    const client = new Client("http://host:1/", fetchFn as unknown as typeof fetch);
    expect(await client.createSession()).toBe("abc123");
    expect(fetchFn).toHaveBeenCalledWith("http://host:1/sessions", { method: "POST" });
  });

  it("posts op bodies as JSON and parses artifacts", async () => {
    const fetchFn = vi.fn(async () =>
      jsonResponse(200, { artifacts: { detail: "detail.png", base: "base.png" } }),
    );
    const client = new Client("http://host:1", fetchFn as unknown as typeof fetch);
    const artifacts = await client.runOp("s1", "decompose", { input: "normal", sigma_c: 3 });
    expect(artifacts).toEqual({ detail: "detail.png", base: "base.png" });
    const [url, init] = fetchFn.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe("http://host:1/sessions/s1/decompose");
    expect(JSON.parse(init.body as string)).toEqual({ input: "normal", sigma_c: 3 });
  });

  it("uploads raw bytes with the png content type", async () => {
    const fetchFn = vi.fn(async () => jsonResponse(200, { name: "normal", bytes: 4 }));
    const client = new Client("http://host:1", fetchFn as unknown as typeof fetch);
    await client.uploadInput("s1", "normal", new Uint8Array([1, 2, 3, 4]));
    const [url, init] = fetchFn.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe("http://host:1/sessions/s1/inputs/normal");
    expect(init.method).toBe("PUT");
    expect((init.headers as Record<string, string>)["Content-Type"]).toBe("image/png");
  });

  it("maps 409 to SolveBusyError and other failures to ApiError with detail", async () => {
    const busy = new Client(
      "http://h",
      (async () => jsonResponse(409, { detail: "a solve is already running" })) as typeof fetch,
    );
    await expect(busy.runOp("s", "solve", {})).rejects.toBeInstanceOf(SolveBusyError);

    const bad = new Client(
      "http://h",
      (async () => jsonResponse(400, { detail: "sigma_c must be > 0" })) as typeof fetch,
    );
    const err = await bad.runOp("s", "decompose", {}).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(400);
    expect(err.message).toContain("sigma_c");
  });

  it("builds artifact urls without double slashes", () => {
    const client = new Client("http://host:1/");
    expect(client.artifactUrl("s1", "height.png")).toBe(
      "http://host:1/sessions/s1/artifacts/height.png",
    );
  });
});
