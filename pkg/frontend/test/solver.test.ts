/** Lifecycle behavior and boundary validation of the client. */

import { describe, expect, it } from "vitest";

import { fromDense } from "../src/matrix.js";
import { Solver } from "../src/solver.js";
import { expectSameVector } from "./helpers.js";

describe("setup and solve", () => {
  it("solves a one-variable unconstrained problem", () => {
    const solver = new Solver({ P: [[1.0]], c: [0.0] });
    const result = solver.solve();
    expect(result.status).toBe("Solved");
    expect(result.x.length).toBe(1);
    expect(result.x[0] === 0).toBe(true); // tolerate IEEE negative zero
  });

  it("gives identical results for sparse and dense input of the same P", () => {
    const dense = [
      [2.0, 0.5],
      [0.5, 1.0],
    ];
    const a = new Solver({ P: dense, c: [1.0, -1.0] }).solve();
    const b = new Solver({ P: fromDense(dense, true), c: [1.0, -1.0] }).solve();
    expect(a.status).toBe(b.status);
    expect(a.iterations).toBe(b.iterations);
    expectSameVector(a.x, b.x, "x");
  });

  it("solves the equality-constrained oracle problem", () => {
    const solver = new Solver({
      P: [
        [1.0, 0.0],
        [0.0, 1.0],
      ],
      c: [0.0, 0.0],
      A: [[1.0, 1.0]],
      b: [1.0],
    });
    const result = solver.solve();
    expect(result.status).toBe("Solved");
    expect(Math.abs(result.x[0] - 0.5)).toBeLessThan(1e-8);
    expect(Math.abs(result.x[1] - 0.5)).toBeLessThan(1e-8);
  });

  it("reports non-negative timings and a status from the core enumeration", () => {
    const result = new Solver({ P: [[1.0]], c: [1.0] }).solve();
    expect(result.setupTime).toBeGreaterThanOrEqual(0);
    expect(result.solveTime).toBeGreaterThanOrEqual(0);
    expect(["Solved", "IterationLimit", "TimeLimit", "NumericalError"]).toContain(result.status);
  });

  it("honors iteration limits through settings", () => {
    const result = new Solver(
      {
        P: [
          [1.0, 0.0],
          [0.0, 1.0],
        ],
        c: [0.0, 0.0],
        G: [[-1.0, 0.0]],
        h: [-1.0],
      },
      { maxIter: 1, epsAbs: 1e-13 }
    ).solve();
    expect(result.status).toBe("IterationLimit");
  });
});

describe("boundary validation names the offending field", () => {
  it("rejects a mismatched b length", () => {
    expect(() =>
      new Solver({ P: [[1.0]], c: [0.0], A: [[1.0]], b: [1.0, 2.0] })
    ).toThrow(/^b:/);
  });

  it("rejects a mismatched c length", () => {
    expect(() => new Solver({ P: [[1.0]], c: [0.0, 1.0] })).toThrow(/^c:/);
  });

  it("rejects a non-square P", () => {
    expect(() => new Solver({ P: [[1.0, 0.0]], c: [0.0] })).toThrow(/^P:/);
  });

  it("rejects inconsistent box bounds", () => {
    expect(() =>
      new Solver({ P: [[1.0]], c: [0.0], l: [2.0], u: [1.0] })
    ).toThrow(/^l:/);
  });

  it("rejects non-finite data", () => {
    expect(() => new Solver({ P: [[NaN]], c: [0.0] })).toThrow(/^P:/);
    expect(() => new Solver({ P: [[1.0]], c: [Infinity] })).toThrow(/^c:/);
  });
});

describe("update", () => {
  it("no-op update returns the identical next result", () => {
    const solver = new Solver({
      P: [
        [1.0, 0.0],
        [0.0, 1.0],
      ],
      c: [1.0, -1.0],
      A: [[1.0, 1.0]],
      b: [1.0],
    });
    const first = solver.solve();
    solver.update({});
    const second = solver.solve();
    expect(second.iterations).toBe(first.iterations);
    expectSameVector(second.x, first.x, "x");
    expectSameVector(second.y, first.y, "y");
  });

  it("accepts bare value arrays matching the setup pattern", () => {
    const solver = new Solver({ P: [[2.0]], c: [1.0] });
    solver.update({ P: [4.0], c: [2.0] });
    const result = solver.solve();
    expect(result.status).toBe("Solved");
    expect(Math.abs(result.x[0] + 0.5)).toBeLessThan(1e-8);
  });

  it("rejects an added nonzero (pattern change)", () => {
    const solver = new Solver({
      P: [
        [1.0, 0.0],
        [0.0, 1.0],
      ],
      c: [0.0, 0.0],
    });
    expect(() =>
      solver.update({
        P: [
          [1.0, 0.5],
          [0.5, 1.0],
        ],
      })
    ).toThrow(/^P: sparsity pattern/);
    expect(() => solver.update({ c: [1.0, 2.0, 3.0] })).toThrow(/^c:/);
  });

  it("rejects a bound update with a changed finiteness pattern", () => {
    const solver = new Solver({ P: [[1.0]], c: [0.0], l: [0.0], u: [null] });
    expect(() => solver.update({ l: [null] })).toThrow(/^l: finiteness/);
    solver.update({ l: [0.5] });
    const result = solver.solve();
    expect(Math.abs(result.x[0] - 0.5)).toBeLessThan(1e-7);
  });
});

describe("input immutability", () => {
  it("never mutates host-owned arrays", () => {
    const P = [
      [1.0, 0.0],
      [0.0, 1.0],
    ];
    const c = [1.0, 2.0];
    const b = [1.0];
    const A = [[1.0, 1.0]];
    const solver = new Solver({ P, c, A, b });
    solver.solve();
    solver.update({ c: [0.0, 0.0] });
    solver.solve();
    expect(P).toEqual([
      [1.0, 0.0],
      [0.0, 1.0],
    ]);
    expect(c).toEqual([1.0, 2.0]);
    expect(b).toEqual([1.0]);
    expect(A).toEqual([[1.0, 1.0]]);
  });
});
