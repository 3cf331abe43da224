/**
 * Thin wrapper over the palmqp solver: build a problem from native arrays,
 * run a solve through the CLI's problem-file interface, return the parsed
 * result record. Solver outcomes (including iteration and time limits) map
 * to the `status` field, never to exceptions; only malformed inputs throw.
 */

import { execFileSync } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { MatrixInput, toTriplets, toUpperTriplets } from "./matrix";
import { ProblemData, ResultDocument, parseResult, serializeProblem } from "./problemFile";

export { MatrixInput, TripletMatrix, CscMatrix } from "./matrix";
export { ResultDocument } from "./problemFile";

/** Solver settings; keys mirror the solver's own setting names. */
export interface SolveSettings {
  eps_abs?: number;
  eps_rel?: number;
  delta_abs0?: number;
  delta_rel0?: number;
  rho?: number;
  theta?: number;
  delta?: number;
  sigma_init?: number;
  sigma_max?: number;
  gamma_init?: number;
  gamma_upd?: number;
  gamma_max?: number;
  scaling_iters?: number;
  eps_pinf?: number;
  eps_dinf?: number;
  max_rank_update?: number;
  max_rank_update_fraction?: number;
  nonconvex?: boolean;
  linsys?: "auto" | "kkt" | "schur";
  max_outer_iter?: number;
  max_total_newton_iter?: number;
  inner_max_iter?: number;
  time_limit_seconds?: number;
  warm_start?: boolean;
}

const SETTING_FLAGS: Record<string, string | null> = {
  eps_abs: "--eps-abs",
  eps_rel: "--eps-rel",
  delta_abs0: "--delta-abs0",
  delta_rel0: "--delta-rel0",
  rho: "--rho",
  theta: "--theta",
  delta: "--delta",
  sigma_init: "--sigma-init",
  sigma_max: "--sigma-max",
  gamma_init: "--gamma-init",
  gamma_upd: "--gamma-upd",
  gamma_max: "--gamma-max",
  scaling_iters: "--scaling",
  eps_pinf: "--eps-pinf",
  eps_dinf: "--eps-dinf",
  max_rank_update: "--max-rank-update",
  max_rank_update_fraction: "--max-rank-update-fraction",
  nonconvex: "--nonconvex",
  linsys: "--linsys",
  max_outer_iter: "--max-iter",
  max_total_newton_iter: "--max-newton-iter",
  inner_max_iter: "--inner-max-iter",
  time_limit_seconds: "--time-limit",
  warm_start: "--no-warm-start",
};

/** Name of the solver executable; override with the PALMQP_BIN variable. */
export function solverBinary(): string {
  return process.env.PALMQP_BIN ?? "palmqp";
}

export function settingsToFlags(settings: SolveSettings): string[] {
  const flags: string[] = [];
  for (const [key, value] of Object.entries(settings)) {
    if (!(key in SETTING_FLAGS)) {
      throw new Error(`unknown settings key: ${key}`);
    }
    if (value === undefined) continue;
    const flag = SETTING_FLAGS[key]!;
    if (key === "nonconvex") {
      if (value) flags.push(flag);
    } else if (key === "warm_start") {
      if (!value) flags.push(flag);
    } else {
      flags.push(flag, String(value));
    }
  }
  return flags;
}

export interface SolveArgs {
  Q: MatrixInput;
  q: ArrayLike<number>;
  A: MatrixInput;
  l: ArrayLike<number>;
  u: ArrayLike<number>;
  warm?: { x: ArrayLike<number>; y: ArrayLike<number> };
}

export function buildProblem(args: SolveArgs): ProblemData {
  const Q = toUpperTriplets(args.Q, "Q");
  const A = toTriplets(args.A, "A");
  const n = Q.nrows;
  const m = A.nrows;
  if (A.ncols !== n) {
    throw new Error(`A has ${A.ncols} columns, expected ${n}`);
  }
  if (args.q.length !== n) {
    throw new Error(`q has length ${args.q.length}, expected ${n}`);
  }
  if (args.l.length !== m || args.u.length !== m) {
    throw new Error(`bounds must have length ${m}`);
  }
  for (let i = 0; i < n; i++) {
    if (!Number.isFinite(args.q[i])) throw new Error(`q[${i}] is not finite`);
  }
  for (let i = 0; i < m; i++) {
    if (args.l[i] > args.u[i]) throw new Error(`l[${i}] > u[${i}]`);
    if (args.l[i] === Infinity || args.u[i] === -Infinity) {
      throw new Error(`bounds at row ${i} leave an empty interval`);
    }
  }
  if (args.warm) {
    if (args.warm.x.length !== n || args.warm.y.length !== m) {
      throw new Error("warm start dimension mismatch");
    }
  }
  return { n, m, Q, q: args.q, A, l: args.l, u: args.u, warm: args.warm };
}

/** Run the solver on a serialized problem file with extra CLI flags. */
export function runSolverOnFile(path: string, flags: string[]): ResultDocument {
  let stdout: string;
  try {
    stdout = execFileSync(solverBinary(), ["solve", path, ...flags], {
      encoding: "utf8",
      maxBuffer: 1 << 28,
    });
  } catch (err) {
    const e = err as { status?: number; stdout?: string; stderr?: string };
    // Exit code 2 still carries a full result document (limit statuses).
    if (e.status === 2 && e.stdout) {
      stdout = e.stdout;
    } else {
      throw new Error(`solver invocation failed: ${e.stderr ?? String(err)}`);
    }
  }
  return parseResult(stdout);
}

/**
 * Solve min 0.5 x'Qx + q'x s.t. l <= Ax <= u.
 *
 * Matrices may be triplet or CSC views; the quadratic term may be given as
 * its upper triangle or as a full symmetric matrix. Unknown settings keys
 * throw by name.
 */
export function solve(
  Q: MatrixInput,
  q: ArrayLike<number>,
  A: MatrixInput,
  l: ArrayLike<number>,
  u: ArrayLike<number>,
  settings: SolveSettings = {},
  warm?: { x: ArrayLike<number>; y: ArrayLike<number> },
): ResultDocument {
  const flags = settingsToFlags(settings);
  const problem = buildProblem({ Q, q, A, l, u, warm });
  const dir = mkdtempSync(join(tmpdir(), "palmqp-"));
  try {
    const path = join(dir, "problem.qp");
    writeFileSync(path, serializeProblem(problem));
    return runSolverOnFile(path, flags);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}
