import assert from "node:assert/strict";
import { test } from "node:test";

import { buildProblem, settingsToFlags, solve } from "../src/index";
import { toUpperTriplets } from "../src/matrix";
import { parseResult, serializeProblem } from "../src/problemFile";

const tiny = {
  // min 0.5 x^2 - 2x s.t. 0 <= x <= 1  ->  x = 1
  Q: { nrows: 1, ncols: 1, rows: [0], cols: [0], values: [1.0] },
  q: [-2.0],
  A: { nrows: 1, ncols: 1, rows: [0], cols: [0], values: [1.0] },
  l: [0.0],
  u: [1.0],
};

test("tiny clamped problem solves to x = 1", () => {
  const r = solve(tiny.Q, tiny.q, tiny.A, tiny.l, tiny.u,
    { eps_abs: 1e-7, eps_rel: 1e-7 });
  assert.equal(r.status, "solved");
  assert.ok(Math.abs(r.x[0] - 1.0) <= 1e-6);
  assert.ok(Math.abs(r.objective - -1.5) <= 1e-5);
  assert.ok(r.newtonIterations >= 1);
});

test("csc input gives the same answer as triplets", () => {
  const qCsc = { nrows: 1, ncols: 1, colptr: [0, 1], rowidx: [0], values: [1.0] };
  const aCsc = { nrows: 1, ncols: 1, colptr: [0, 1], rowidx: [0], values: [1.0] };
  const r1 = solve(tiny.Q, tiny.q, tiny.A, tiny.l, tiny.u);
  const r2 = solve(qCsc, tiny.q, aCsc, tiny.l, tiny.u);
  assert.equal(r1.status, r2.status);
  assert.deepEqual(r1.x, r2.x);
  assert.deepEqual(r1.y, r2.y);
});

test("unknown settings key throws by name", () => {
  assert.throws(
    () => settingsToFlags({ eps_abs: 1e-6, bogus_key: 1 } as never),
    /unknown settings key: bogus_key/);
});

test("dimension errors are descriptive", () => {
  assert.throws(() => buildProblem({ ...tiny, q: [1.0, 2.0] }), /q has length 2/);
  assert.throws(() => buildProblem({ ...tiny, l: [] }), /bounds must have length 1/);
  assert.throws(
    () => buildProblem({ ...tiny, A: { ...tiny.A, ncols: 2, nrows: 1 } }),
    /out of range|expected/);
  assert.throws(() => buildProblem({ ...tiny, l: [2.0] }), /l\[0\] > u\[0\]/);
});

test("asymmetric quadratic input is rejected", () => {
  const bad = { nrows: 2, ncols: 2, rows: [0, 1], cols: [1, 0], values: [1.0, 2.0] };
  assert.throws(() => toUpperTriplets(bad, "Q"), /must be symmetric/);
});

test("full symmetric quadratic input folds to the upper triangle", () => {
  const full = { nrows: 2, ncols: 2, rows: [0, 0, 1, 1], cols: [0, 1, 0, 1],
    values: [2.0, 0.5, 0.5, 3.0] };
  const t = toUpperTriplets(full, "Q");
  assert.equal(t.values.length, 3);
  const r = solve(full, [0.0, 0.0],
    { nrows: 2, ncols: 2, rows: [0, 1], cols: [0, 1], values: [1.0, 1.0] },
    [1.0, -5.0], [5.0, 5.0], { eps_abs: 1e-8, eps_rel: 1e-8 });
  assert.equal(r.status, "solved");
  // KKT by hand: x0 pinned at 1, x1 = -0.5*x0/3
  assert.ok(Math.abs(r.x[0] - 1.0) <= 1e-6);
  assert.ok(Math.abs(r.x[1] - (-1 / 6)) <= 1e-6);
});

test("limit statuses come back as fields, not exceptions", () => {
  const r = solve(tiny.Q, tiny.q, tiny.A, tiny.l, tiny.u,
    { eps_abs: 1e-300, eps_rel: 0, max_outer_iter: 1, inner_max_iter: 1 });
  assert.equal(r.status, "max_iter");
});

test("infeasible problems return certificates", () => {
  const A = { nrows: 2, ncols: 1, rows: [0, 1], cols: [0, 0], values: [1.0, 1.0] };
  const r = solve(tiny.Q, [0.0], A, [-Infinity, 1.0], [-1.0, Infinity]);
  assert.equal(r.status, "primal_infeasible");
  assert.ok(r.certificate && r.certificate.length === 2);
});

test("infinite bounds serialize as inf literals", () => {
  const p = buildProblem({
    ...tiny, l: [-Infinity], u: [Infinity],
  });
  const text = serializeProblem(p);
  assert.match(text, /\n-inf\n/);
  assert.match(text, /\ninf\n/);
});

test("warm start round trip", () => {
  const first = solve(tiny.Q, tiny.q, tiny.A, tiny.l, tiny.u);
  const second = solve(tiny.Q, tiny.q, tiny.A, tiny.l, tiny.u, {},
    { x: first.x, y: first.y });
  assert.equal(second.status, "solved");
  assert.ok(second.outerIterations <= 2);
});

test("result parser rejects garbage", () => {
  assert.throws(() => parseResult("hello world\n"), /not a solver result/);
});
