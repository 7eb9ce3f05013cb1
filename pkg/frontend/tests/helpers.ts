import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { vi } from "vitest";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

export interface RecordedRequest {
  url: string;
  method: string;
  body: unknown;
}

export interface MockRoute {
  method?: string;
  url: string | RegExp;
  status?: number;
  payload: unknown;
}

// fetch stub backed by the recorded payloads; captures every request so
// contract tests can assert exact bodies.
export function installMockApi(routes: MockRoute[]): RecordedRequest[] {
  const captured: RecordedRequest[] = [];
  vi.stubGlobal(
    "fetch",
    vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
      const url = String(input);
      const method = init?.method ?? "GET";
      captured.push({
        url,
        method,
        body: init?.body ? JSON.parse(String(init.body)) : undefined,
      });
      const route = routes.find(
        (r) =>
          (r.method ?? "GET") === method &&
          (typeof r.url === "string" ? url.endsWith(r.url) : r.url.test(url)),
      );
      if (!route) {
        return new Response(JSON.stringify({ error: "not found" }), { status: 404 });
      }
      return new Response(JSON.stringify(route.payload), {
        status: route.status ?? 200,
        headers: { "Content-Type": "application/json" },
      });
    }),
  );
  return captured;
}

export function tokenizeLikeServer(paragraphs: string[]): string[] {
  const tokens: string[] = [];
  for (const paragraph of paragraphs) {
    for (const match of paragraph.toLowerCase().matchAll(/[a-z0-9]+/g)) {
      tokens.push(match[0]);
    }
  }
  return tokens;
}
