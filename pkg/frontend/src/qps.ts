/**
 * Emit a problem as QPS text the solver core parses back bit-exactly.
 *
 * Number.prototype.toString produces the shortest decimal that round-trips
 * to the same IEEE double, and the core parses literals to the nearest
 * double, so values survive the text crossing unchanged. Every variable is
 * declared through an explicit objective coefficient (zeros included) to pin
 * the column ordering, and variables without box bounds are declared free so
 * the MPS default lower bound of zero does not leak in.
 */

import { entries } from "./matrix.js";
import { QpProblem } from "./problem.js";

function num(v: number): string {
  if (!Number.isFinite(v)) {
    throw new Error(`cannot emit non-finite value ${v}`);
  }
  return Object.is(v, -0) ? "0" : v.toString();
}

export function emitQps(problem: QpProblem, name = "PROBLEM"): string {
  const n = problem.P.ncols;
  const p = problem.A.nrows;
  const m = problem.G.nrows;
  const colName = (j: number) => `X${j}`;
  const lines: string[] = [`NAME          ${name}`, "ROWS", " N  OBJ"];
  for (let i = 0; i < p; i++) lines.push(` E  E${i}`);
  for (let i = 0; i < m; i++) lines.push(` L  L${i}`);

  // gather per-column constraint entries
  const colEntries: Array<Array<[string, number]>> = Array.from({ length: n }, () => []);
  for (const [i, j, v] of entries(problem.A)) colEntries[j].push([`E${i}`, v]);
  for (const [i, j, v] of entries(problem.G)) colEntries[j].push([`L${i}`, v]);

  lines.push("COLUMNS");
  for (let j = 0; j < n; j++) {
    lines.push(`    ${colName(j)}  OBJ  ${num(problem.c[j])}`);
    for (const [row, v] of colEntries[j]) {
      lines.push(`    ${colName(j)}  ${row}  ${num(v)}`);
    }
  }

  lines.push("RHS");
  problem.b.forEach((v, i) => {
    if (v !== 0) lines.push(`    RHS  E${i}  ${num(v)}`);
  });
  problem.h.forEach((v, i) => {
    if (v !== 0) lines.push(`    RHS  L${i}  ${num(v)}`);
  });

  lines.push("BOUNDS");
  for (let j = 0; j < n; j++) {
    const lo = problem.l ? problem.l[j] : -Infinity;
    const hi = problem.u ? problem.u[j] : Infinity;
    if (lo === -Infinity && hi === Infinity) {
      lines.push(` FR BND  ${colName(j)}`);
    } else {
      if (lo === -Infinity) {
        lines.push(` MI BND  ${colName(j)}`);
      } else {
        lines.push(` LO BND  ${colName(j)}  ${num(lo)}`);
      }
      if (hi !== Infinity) {
        lines.push(` UP BND  ${colName(j)}  ${num(hi)}`);
      }
    }
  }

  lines.push("QUADOBJ");
  for (const [i, j, v] of entries(problem.P)) {
    lines.push(`    ${colName(i)}  ${colName(j)}  ${num(v)}`);
  }
  lines.push("ENDATA");
  return lines.join("\n") + "\n";
}
