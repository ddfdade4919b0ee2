// Thin typed client for the session service.  Every displayed state is a
// response from here; the UI never edits trees locally.

import type { Command, ScriptResult, SessionTrace, View } from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

async function request<T>(
  base: string,
  method: string,
  path: string,
  body?: unknown,
): Promise<T> {
  const response = await fetch(base + path, {
    method,
    headers: body === undefined ? {} : { "content-type": "application/json" },
    body: body === undefined ? undefined : JSON.stringify(body),
  });
  const text = await response.text();
  if (!response.ok) {
    let detail = text;
    try {
      detail = JSON.parse(text).detail ?? text;
    } catch {
      /* plain text error */
    }
    throw new ApiError(response.status, detail);
  }
  return JSON.parse(text) as T;
}

export class Client {
  constructor(readonly base: string) {}

  createSession(spec: string, rootSort: string): Promise<View> {
    return request(this.base, "POST", "/sessions", { spec, rootSort });
  }

  getSession(id: string): Promise<View> {
    return request(this.base, "GET", `/sessions/${id}`);
  }

  command(id: string, cmd: Command): Promise<View> {
    return request(this.base, "POST", `/sessions/${id}/command`, cmd);
  }

  runScript(id: string, text: string, fuel = 10_000): Promise<ScriptResult> {
    return request(this.base, "POST", `/sessions/${id}/script`, { text, fuel });
  }

  query(id: string, phi: string): Promise<{ phi: string; result: boolean }> {
    return request(this.base, "POST", `/sessions/${id}/query`, { phi });
  }

  trace(id: string): Promise<SessionTrace> {
    return request(this.base, "GET", `/sessions/${id}/trace`);
  }
}
