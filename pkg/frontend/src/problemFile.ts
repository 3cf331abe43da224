/**
 * Serialization for the solver's line-oriented problem files and parsing of
 * its result documents. Values are written in shortest round-trip decimal
 * form, which both sides read back to the identical binary64.
 */

import type { Triplets } from "./matrix";

export function formatValue(v: number): string {
  if (v === Infinity) return "inf";
  if (v === -Infinity) return "-inf";
  if (Number.isNaN(v)) throw new Error("cannot serialize NaN");
  return String(v);
}

export interface ProblemData {
  n: number;
  m: number;
  Q: Triplets;
  q: ArrayLike<number>;
  A: Triplets;
  l: ArrayLike<number>;
  u: ArrayLike<number>;
  warm?: { x: ArrayLike<number>; y: ArrayLike<number> };
}

export function serializeProblem(p: ProblemData): string {
  const lines: string[] = ["palmqp problem 1", `n ${p.n}`, `m ${p.m}`];
  lines.push(`Q ${p.Q.values.length}`);
  for (let k = 0; k < p.Q.values.length; k++) {
    lines.push(`${p.Q.rows[k]} ${p.Q.cols[k]} ${formatValue(p.Q.values[k])}`);
  }
  lines.push("q");
  for (let i = 0; i < p.n; i++) lines.push(formatValue(p.q[i]));
  lines.push(`A ${p.A.values.length}`);
  for (let k = 0; k < p.A.values.length; k++) {
    lines.push(`${p.A.rows[k]} ${p.A.cols[k]} ${formatValue(p.A.values[k])}`);
  }
  lines.push("l");
  for (let i = 0; i < p.m; i++) lines.push(formatValue(p.l[i]));
  lines.push("u");
  for (let i = 0; i < p.m; i++) lines.push(formatValue(p.u[i]));
  if (p.warm) {
    lines.push("warm_x");
    for (let i = 0; i < p.n; i++) lines.push(formatValue(p.warm.x[i]));
    lines.push("warm_y");
    for (let i = 0; i < p.m; i++) lines.push(formatValue(p.warm.y[i]));
  }
  return lines.join("\n") + "\n";
}

/** Parsed result document. */
export interface ResultDocument {
  status: string;
  objective: number;
  primRes: number;
  dualRes: number;
  outerIterations: number;
  newtonIterations: number;
  factorizations: number;
  rankUpdates: number;
  runtime: number;
  linsys: string;
  x: number[];
  y: number[];
  certificate?: number[];
}

function parseNumber(tok: string): number {
  if (tok === "inf") return Infinity;
  if (tok === "-inf") return -Infinity;
  const v = Number(tok);
  if (Number.isNaN(v) && tok !== "nan") {
    throw new Error(`bad numeric token: ${tok}`);
  }
  return v;
}

export function parseResult(text: string): ResultDocument {
  const lines = text.split("\n").filter((ln) => ln.trim().length > 0);
  if (lines.length === 0 || !lines[0].startsWith("palmqp result")) {
    throw new Error("not a solver result document");
  }
  const fields = new Map<string, string>();
  for (const ln of lines.slice(1)) {
    const sp = ln.indexOf(" ");
    const key = sp < 0 ? ln : ln.slice(0, sp);
    fields.set(key, sp < 0 ? "" : ln.slice(sp + 1));
  }
  const need = (key: string): string => {
    const v = fields.get(key);
    if (v === undefined) throw new Error(`result document missing ${key}`);
    return v;
  };
  const vector = (key: string): number[] => {
    const raw = fields.get(key);
    if (raw === undefined || raw.trim() === "") return [];
    return raw.trim().split(/\s+/).map(parseNumber);
  };
  const doc: ResultDocument = {
    status: need("status"),
    objective: parseNumber(need("objective")),
    primRes: parseNumber(need("prim_res")),
    dualRes: parseNumber(need("dual_res")),
    outerIterations: Number(need("outer_iterations")),
    newtonIterations: Number(need("newton_iterations")),
    factorizations: Number(need("factorizations")),
    rankUpdates: Number(need("rank_updates")),
    runtime: parseNumber(need("runtime")),
    linsys: need("linsys"),
    x: vector("x"),
    y: vector("y"),
  };
  if (fields.has("certificate")) {
    doc.certificate = vector("certificate");
  }
  return doc;
}
