export { CscMatrix, MatrixInput, fromDense, toCsc, samePattern } from "./matrix.js";
export { QpProblem, QpProblemInput, buildProblem } from "./problem.js";
export { emitQps } from "./qps.js";
export {
  SolverSettings,
  SolveResultPayload,
  solveQpsFile,
  solveQpsText,
  settingsFlags,
} from "./runner.js";
export { Solver, SolveResult, Status, UpdateInput, setup } from "./solver.js";
