/**
 * Problem container and boundary validation.
 *
 * minimize 0.5 x'Px + c'x subject to Ax = b, Gx <= h, l <= x <= u.
 * Every shape error names the offending field.
 */

import { CscMatrix, MatrixInput, cloneCsc, toCsc } from "./matrix.js";

export interface QpProblemInput {
  /** Quadratic cost, symmetric; dense input keeps the upper triangle. */
  P: MatrixInput;
  c: number[];
  A?: MatrixInput;
  b?: number[];
  G?: MatrixInput;
  h?: number[];
  /** Lower bounds; null/undefined entries and -Infinity mean unbounded. */
  l?: (number | null)[];
  u?: (number | null)[];
}

export interface QpProblem {
  readonly P: CscMatrix;
  readonly c: number[];
  readonly A: CscMatrix;
  readonly b: number[];
  readonly G: CscMatrix;
  readonly h: number[];
  readonly l: number[] | null;
  readonly u: number[] | null;
}

function checkVector(v: number[], length: number, name: string): number[] {
  if (v.length !== length) {
    throw new Error(`${name}: length ${v.length} does not match expected ${length}`);
  }
  for (const x of v) {
    if (typeof x !== "number" || !Number.isFinite(x)) {
      throw new Error(`${name}: entries must be finite numbers`);
    }
  }
  return [...v];
}

function checkBound(
  v: (number | null)[] | undefined,
  n: number,
  name: string,
  fill: number
): number[] | null {
  if (v === undefined) {
    return null;
  }
  if (v.length !== n) {
    throw new Error(`${name}: length ${v.length} does not match variable count ${n}`);
  }
  return v.map((x) => {
    if (x === null) return fill;
    if (typeof x !== "number" || Number.isNaN(x)) {
      throw new Error(`${name}: entries must be numbers or null`);
    }
    return x;
  });
}

const EMPTY = (ncols: number): CscMatrix => ({
  nrows: 0,
  ncols,
  colPtr: new Array(ncols + 1).fill(0),
  rowIdx: [],
  values: [],
});

/** Validate and normalize host input into owned CSC/array storage. */
export function buildProblem(input: QpProblemInput): QpProblem {
  const P = toCsc(input.P, "P", true);
  if (P.nrows !== P.ncols) {
    throw new Error("P: must be square");
  }
  const n = P.ncols;
  const c = checkVector(input.c, n, "c");
  const A = input.A !== undefined ? toCsc(input.A, "A") : EMPTY(n);
  const G = input.G !== undefined ? toCsc(input.G, "G") : EMPTY(n);
  if (A.ncols !== n) {
    throw new Error(`A: has ${A.ncols} columns, expected ${n}`);
  }
  if (G.ncols !== n) {
    throw new Error(`G: has ${G.ncols} columns, expected ${n}`);
  }
  const b = checkVector(input.b ?? [], A.nrows, "b");
  const h = checkVector(input.h ?? [], G.nrows, "h");
  const l = checkBound(input.l, n, "l", -Infinity);
  const u = checkBound(input.u, n, "u", Infinity);
  if (l && u) {
    for (let i = 0; i < n; i++) {
      if (Number.isFinite(l[i]) && Number.isFinite(u[i]) && l[i] > u[i]) {
        throw new Error(`l: lower bound exceeds upper bound at index ${i}`);
      }
    }
  }
  return { P, c, A, b, G, h, l, u };
}

export function cloneProblem(p: QpProblem): QpProblem {
  return {
    P: cloneCsc(p.P),
    c: [...p.c],
    A: cloneCsc(p.A),
    b: [...p.b],
    G: cloneCsc(p.G),
    h: [...p.h],
    l: p.l ? [...p.l] : null,
    u: p.u ? [...p.u] : null,
  };
}
