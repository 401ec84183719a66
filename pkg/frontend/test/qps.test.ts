/** Structural checks of the QPS emitter. */

import { describe, expect, it } from "vitest";

import { buildProblem } from "../src/problem.js";
import { emitQps } from "../src/qps.js";

describe("emitQps", () => {
  it("declares every section in order with all variables present", () => {
    const text = emitQps(
      buildProblem({
        P: [
          [2.0, 0.0],
          [0.0, 0.0],
        ],
        c: [0.0, 1.0],
        A: [[1.0, 0.0]],
        b: [3.0],
        G: [[0.0, -1.0]],
        h: [0.0],
      }),
      "T1"
    );
    const sections = text
      .split("\n")
      .filter((line) => line && !line.startsWith(" ") && !line.startsWith("    "));
    expect(sections).toEqual(["NAME          T1", "ROWS", "COLUMNS", "RHS", "BOUNDS", "QUADOBJ", "ENDATA"]);
    // zero objective coefficients still declare their column
    expect(text).toContain("X0  OBJ  0");
    expect(text).toContain("X1  OBJ  1");
    // unbounded variables are declared free
    expect(text).toContain(" FR BND  X0");
    expect(text).toContain(" FR BND  X1");
    // zero rhs entries are omitted
    expect(text).toContain("RHS  E0  3");
    expect(text).not.toContain("RHS  L0");
  });

  it("writes finite bounds and keeps exact decimal round-trip forms", () => {
    const text = emitQps(
      buildProblem({
        P: [[1.0]],
        c: [0.1],
        l: [1e-7],
        u: [null],
      })
    );
    expect(text).toContain("OBJ  0.1");
    expect(text).toContain(" LO BND  X0  1e-7");
    expect(text).not.toContain("UP BND");
  });

  it("refuses non-finite matrix values at the boundary", () => {
    expect(() =>
      emitQps({
        P: { nrows: 1, ncols: 1, colPtr: [0, 1], rowIdx: [0], values: [Infinity] },
        c: [0],
        A: { nrows: 0, ncols: 1, colPtr: [0, 0], rowIdx: [], values: [] },
        b: [],
        G: { nrows: 0, ncols: 1, colPtr: [0, 0], rowIdx: [], values: [] },
        h: [],
        l: null,
        u: null,
      })
    ).toThrow(/non-finite/);
  });
});
