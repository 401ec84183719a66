import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { expect } from "vitest";

import { QpProblemInput } from "../src/problem.js";
import { SolverSettings } from "../src/runner.js";

const HERE = dirname(fileURLToPath(import.meta.url));
export const REPO_ROOT = join(HERE, "..", "..");
export const FIXTURES = JSON.parse(
  readFileSync(join(HERE, "..", "fixtures", "parity.json"), "utf-8")
);

interface JsonCsc {
  nrows: number;
  ncols: number;
  colPtr: number[];
  rowIdx: number[];
  values: number[];
}

export interface JsonResult {
  status: string;
  iterations: number;
  x: number[];
  y: number[];
  z: number[];
  s: number[];
  primal_res: number;
  dual_res: number;
  duality_gap: number;
  objective: number;
}

/** Rebuild a problem-input object from its JSON fixture form. */
export function problemFromJson(data: {
  P: JsonCsc;
  c: number[];
  A: JsonCsc;
  b: number[];
  G: JsonCsc;
  h: number[];
  l: (number | null)[] | null;
  u: (number | null)[] | null;
}): QpProblemInput {
  return {
    P: data.P,
    c: data.c,
    A: data.A.nrows > 0 ? data.A : undefined,
    b: data.A.nrows > 0 ? data.b : undefined,
    G: data.G.nrows > 0 ? data.G : undefined,
    h: data.G.nrows > 0 ? data.h : undefined,
    l: data.l ?? undefined,
    u: data.u ?? undefined,
  };
}

export function settingsFromJson(opts: Record<string, unknown>): SolverSettings {
  return opts as SolverSettings;
}

/** Assert two float vectors are identical, bit for bit. */
export function expectSameVector(got: number[], want: number[], label: string): void {
  expect(got.length, `${label} length`).toBe(want.length);
  for (let i = 0; i < want.length; i++) {
    expect(Object.is(got[i], want[i]), `${label}[${i}]: ${got[i]} !== ${want[i]}`).toBe(true);
  }
}
