/**
 * Subprocess bridge to the solver CLI.
 *
 * The core is consumed strictly through its public surfaces: QPS problem
 * files in, `proxip solve --json` result payloads out. The Python
 * interpreter is resolved from PROXIP_PYTHON (default "python3").
 */

import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface SolverSettings {
  epsAbs?: number;
  epsRel?: number;
  maxIter?: number;
  timeLimit?: number;
  /** disable data equilibration */
  noRuiz?: boolean;
  /** shortcut for epsAbs=1e-3, epsRel=1e-4 */
  lowAccuracy?: boolean;
}

export interface SolveResultPayload {
  problem: string;
  status: string;
  iterations: number;
  setup_time: number;
  solve_time: number;
  primal_res: number;
  dual_res: number;
  duality_gap: number;
  objective: number;
  x: number[];
  y: number[];
  z: number[];
  s: number[];
}

export function settingsFlags(settings: SolverSettings): string[] {
  const flags: string[] = [];
  if (settings.lowAccuracy) flags.push("--low-accuracy");
  if (settings.epsAbs !== undefined) flags.push("--eps-abs", settings.epsAbs.toString());
  if (settings.epsRel !== undefined) flags.push("--eps-rel", settings.epsRel.toString());
  if (settings.maxIter !== undefined) flags.push("--max-iter", settings.maxIter.toString());
  if (settings.timeLimit !== undefined) flags.push("--time-limit", settings.timeLimit.toString());
  if (settings.noRuiz) flags.push("--no-ruiz");
  return flags;
}

export function pythonInterpreter(): string {
  return process.env.PROXIP_PYTHON ?? "python3";
}

/** Run `proxip solve` on a QPS file and return the parsed result payload. */
export function solveQpsFile(path: string, settings: SolverSettings): SolveResultPayload {
  const outDir = mkdtempSync(join(tmpdir(), "proxip-out-"));
  const outPath = join(outDir, "result.json");
  try {
    const args = ["-m", "proxip.cli", "solve", path, "--json", outPath, ...settingsFlags(settings)];
    try {
      execFileSync(pythonInterpreter(), args, { stdio: ["ignore", "pipe", "pipe"] });
    } catch (err: unknown) {
      // nonzero exit just means the status is not Solved; the payload is
      // still written unless the process really failed
      const e = err as { status?: number; stderr?: Buffer };
      if (e.status === undefined || e.status > 1 || !tryRead(outPath)) {
        const detail = e.stderr ? e.stderr.toString() : String(err);
        throw new Error(`solver invocation failed: ${detail}`);
      }
    }
    return JSON.parse(readFileSync(outPath, "utf-8")) as SolveResultPayload;
  } finally {
    rmSync(outDir, { recursive: true, force: true });
  }
}

function tryRead(path: string): boolean {
  try {
    readFileSync(path);
    return true;
  } catch {
    return false;
  }
}

/** Write QPS text to a temp file, solve it, clean up. */
export function solveQpsText(text: string, settings: SolverSettings): SolveResultPayload {
  const dir = mkdtempSync(join(tmpdir(), "proxip-in-"));
  const path = join(dir, "problem.qps");
  try {
    writeFileSync(path, text);
    return solveQpsFile(path, settings);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}
