/** Test plumbing: fixture loading and a programmable fake fetch. */

import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import type { FetchLike } from '../src/api';

const here = dirname(fileURLToPath(import.meta.url));

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, '..', 'fixtures', name), 'utf-8')) as T;
}

export interface RecordedCall {
  path: string;
  body: unknown;
}

/**
 * Fake fetch that replays canned responses per path and records every
 * request body, so tests can diff what the UI displayed against exactly
 * what the "service" returned.
 */
export function fakeFetch(
  routes: Record<string, unknown | ((body: unknown, call: number) => unknown)>,
): { fetchImpl: FetchLike; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const counts = new Map<string, number>();
  const fetchImpl: FetchLike = async (input, init) => {
    const path = new URL(input, 'http://service.test').pathname;
    const body = init?.body ? JSON.parse(init.body as string) : null;
    calls.push({ path, body });
    const route = routes[path];
    if (route === undefined) {
      return new Response(JSON.stringify({ error: 'domain', code: 'invalid_input', message: 'no route' }), {
        status: 422,
        headers: { 'content-type': 'application/json' },
      });
    }
    const n = counts.get(path) ?? 0;
    counts.set(path, n + 1);
    const payload = typeof route === 'function' ? (route as (b: unknown, c: number) => unknown)(body, n) : route;
    if (payload instanceof Response) {
      return payload;
    }
    return new Response(JSON.stringify(payload), {
      status: 200,
      headers: { 'content-type': 'application/json' },
    });
  };
  return { fetchImpl, calls };
}

/** Every numeric leaf of a JSON payload, with its JSON-serialized form. */
export function numericLeaves(value: unknown, path = ''): Map<string, string> {
  const out = new Map<string, string>();
  if (typeof value === 'number') {
    out.set(path, JSON.stringify(value));
  } else if (Array.isArray(value)) {
    value.forEach((v, i) => {
      for (const [p, s] of numericLeaves(v, `${path}/${i}`)) {
        out.set(p, s);
      }
    });
  } else if (value !== null && typeof value === 'object') {
    for (const [k, v] of Object.entries(value)) {
      for (const [p, s] of numericLeaves(v, `${path}/${k}`)) {
        out.set(p, s);
      }
    }
  }
  return out;
}
