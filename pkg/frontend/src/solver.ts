/**
 * The setup / update / solve lifecycle against the solver core.
 *
 * `setup` validates and snapshots the problem, `update` swaps in new values
 * under the sparsity pattern fixed at setup, and `solve` runs the core and
 * returns a result object with host-native arrays. Handles are single-caller
 * objects; distinct handles are fully independent.
 */

import { CscMatrix, MatrixInput, samePattern, toCsc } from "./matrix.js";
import { QpProblem, QpProblemInput, buildProblem } from "./problem.js";
import { emitQps } from "./qps.js";
import { SolveResultPayload, SolverSettings, solveQpsText } from "./runner.js";

export type Status = "Solved" | "IterationLimit" | "TimeLimit" | "NumericalError";

export interface SolveResult {
  status: Status;
  x: number[];
  y: number[];
  z: number[];
  s: number[];
  iterations: number;
  primalRes: number;
  dualRes: number;
  dualityGap: number;
  objective: number;
  setupTime: number;
  solveTime: number;
}

export interface UpdateInput {
  P?: MatrixInput | number[];
  c?: number[];
  A?: MatrixInput | number[];
  b?: number[];
  G?: MatrixInput | number[];
  h?: number[];
  l?: (number | null)[];
  u?: (number | null)[];
}

export class Solver {
  private problem: QpProblem;
  private readonly settings: SolverSettings;
  private readonly name: string;

  constructor(input: QpProblemInput, settings: SolverSettings = {}, name = "PROBLEM") {
    this.problem = buildProblem(input);
    this.settings = { ...settings };
    this.name = name;
  }

  /** Number of decision variables. */
  get numVars(): number {
    return this.problem.P.ncols;
  }

  /**
   * Replace problem values. Sparsity patterns (and the finiteness pattern of
   * box bounds) must match setup; matrix updates may pass either a CSC
   * matrix with the identical pattern or a bare value array of matching
   * length. Validation happens before any state changes.
   */
  update(values: UpdateInput): void {
    const next = { ...this.problem };
    if (values.P !== undefined) next.P = this.checkMatrix(values.P, this.problem.P, "P", true);
    if (values.A !== undefined) next.A = this.checkMatrix(values.A, this.problem.A, "A", false);
    if (values.G !== undefined) next.G = this.checkMatrix(values.G, this.problem.G, "G", false);
    if (values.c !== undefined) next.c = this.checkVector(values.c, this.problem.c.length, "c");
    if (values.b !== undefined) next.b = this.checkVector(values.b, this.problem.b.length, "b");
    if (values.h !== undefined) next.h = this.checkVector(values.h, this.problem.h.length, "h");
    if (values.l !== undefined) next.l = this.checkBound(values.l, this.problem.l, "l");
    if (values.u !== undefined) next.u = this.checkBound(values.u, this.problem.u, "u");
    this.problem = next;
  }

  /** Run the core solver on the current data. */
  solve(): SolveResult {
    const payload = solveQpsText(emitQps(this.problem, this.name), this.settings);
    return fromPayload(payload);
  }

  private checkMatrix(
    input: MatrixInput | number[],
    ref: CscMatrix,
    name: string,
    keepUpper: boolean
  ): CscMatrix {
    if (Array.isArray(input) && input.length > 0 && typeof input[0] === "number") {
      const vals = input as number[];
      if (vals.length !== ref.values.length) {
        throw new Error(
          `${name}: expected ${ref.values.length} values for the setup pattern, got ${vals.length}`
        );
      }
      for (const v of vals) {
        if (!Number.isFinite(v)) throw new Error(`${name}: values must be finite`);
      }
      return { ...ref, values: [...vals] };
    }
    const mat = toCsc(input as MatrixInput, name, keepUpper);
    if (!samePattern(mat, ref)) {
      throw new Error(`${name}: sparsity pattern differs from setup`);
    }
    return mat;
  }

  private checkVector(v: number[], length: number, name: string): number[] {
    if (v.length !== length) {
      throw new Error(`${name}: length ${v.length} does not match setup length ${length}`);
    }
    for (const x of v) {
      if (!Number.isFinite(x)) throw new Error(`${name}: entries must be finite`);
    }
    return [...v];
  }

  private checkBound(
    v: (number | null)[],
    ref: number[] | null,
    name: string
  ): number[] {
    if (ref === null) {
      throw new Error(`${name}: problem was set up without this bound`);
    }
    if (v.length !== ref.length) {
      throw new Error(`${name}: length ${v.length} does not match setup length ${ref.length}`);
    }
    const out = v.map((x) => (x === null ? (name === "l" ? -Infinity : Infinity) : x));
    for (let i = 0; i < out.length; i++) {
      if (Number.isFinite(out[i]) !== Number.isFinite(ref[i])) {
        throw new Error(`${name}: finiteness pattern must match setup`);
      }
    }
    return out;
  }
}

function fromPayload(payload: SolveResultPayload): SolveResult {
  return {
    status: payload.status as Status,
    x: payload.x,
    y: payload.y,
    z: payload.z,
    s: payload.s,
    iterations: payload.iterations,
    primalRes: payload.primal_res,
    dualRes: payload.dual_res,
    dualityGap: payload.duality_gap,
    objective: payload.objective,
    setupTime: payload.setup_time,
    solveTime: payload.solve_time,
  };
}

/** One-shot convenience mirroring the core's setup-then-solve. */
export function setup(
  input: QpProblemInput,
  settings: SolverSettings = {},
  name = "PROBLEM"
): Solver {
  return new Solver(input, settings, name);
}
