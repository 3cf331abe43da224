/**
 * Sparse matrix views accepted by the solver wrapper.
 *
 * Inputs are borrowed: validation and format normalization never copy more
 * than the index/value arrays needed to emit triplets.
 */

/** COO triplets; duplicate entries are summed by the solver. */
export interface TripletMatrix {
  nrows: number;
  ncols: number;
  rows: ArrayLike<number>;
  cols: ArrayLike<number>;
  values: ArrayLike<number>;
}

/** Compressed sparse column storage. */
export interface CscMatrix {
  nrows: number;
  ncols: number;
  colptr: ArrayLike<number>;
  rowidx: ArrayLike<number>;
  values: ArrayLike<number>;
}

export type MatrixInput = TripletMatrix | CscMatrix;

export interface Triplets {
  nrows: number;
  ncols: number;
  rows: number[];
  cols: number[];
  values: number[];
}

function isCsc(m: MatrixInput): m is CscMatrix {
  return (m as CscMatrix).colptr !== undefined;
}

/** Normalize either input format to triplets, validating the structure. */
export function toTriplets(m: MatrixInput, what: string): Triplets {
  if (!Number.isInteger(m.nrows) || !Number.isInteger(m.ncols)
      || m.nrows < 0 || m.ncols < 0) {
    throw new Error(`${what}: nrows/ncols must be nonnegative integers`);
  }
  const rows: number[] = [];
  const cols: number[] = [];
  const values: number[] = [];
  if (isCsc(m)) {
    if (m.colptr.length !== m.ncols + 1) {
      throw new Error(`${what}: colptr must have length ncols+1`);
    }
    if (m.colptr[0] !== 0 || m.colptr[m.ncols] !== m.values.length) {
      throw new Error(`${what}: colptr endpoints inconsistent with values`);
    }
    if (m.rowidx.length !== m.values.length) {
      throw new Error(`${what}: rowidx and values lengths differ`);
    }
    for (let j = 0; j < m.ncols; j++) {
      const lo = m.colptr[j];
      const hi = m.colptr[j + 1];
      if (hi < lo) {
        throw new Error(`${what}: colptr must be nondecreasing`);
      }
      for (let k = lo; k < hi; k++) {
        rows.push(m.rowidx[k]);
        cols.push(j);
        values.push(m.values[k]);
      }
    }
  } else {
    if (m.rows.length !== m.values.length || m.cols.length !== m.values.length) {
      throw new Error(`${what}: triplet arrays must have equal lengths`);
    }
    for (let k = 0; k < m.values.length; k++) {
      rows.push(m.rows[k]);
      cols.push(m.cols[k]);
      values.push(m.values[k]);
    }
  }
  for (let k = 0; k < values.length; k++) {
    const r = rows[k];
    const c = cols[k];
    if (!Number.isInteger(r) || !Number.isInteger(c)
        || r < 0 || r >= m.nrows || c < 0 || c >= m.ncols) {
      throw new Error(`${what}: index (${r}, ${c}) out of range for `
        + `${m.nrows}x${m.ncols}`);
    }
    if (!Number.isFinite(values[k])) {
      throw new Error(`${what}: entry (${r}, ${c}) is not finite`);
    }
  }
  return { nrows: m.nrows, ncols: m.ncols, rows, cols, values };
}

/** Fold a square matrix into upper-triangle storage for the quadratic term.
 *
 * Duplicates at the same position are summed first; entries may then be
 * given in the upper triangle only, or as a full symmetric matrix whose
 * mirrored pairs must agree.
 */
export function toUpperTriplets(m: MatrixInput, what: string): Triplets {
  const t = toTriplets(m, what);
  if (t.nrows !== t.ncols) {
    throw new Error(`${what}: quadratic term must be square`);
  }
  const summed = new Map<string, number>();
  for (let k = 0; k < t.values.length; k++) {
    const key = `${t.rows[k]},${t.cols[k]}`;
    summed.set(key, (summed.get(key) ?? 0) + t.values[k]);
  }
  const upper = new Map<string, number>();
  for (const [key, v] of summed) {
    const [r, c] = key.split(",").map(Number);
    if (r <= c) {
      upper.set(key, v);
    }
  }
  for (const [key, v] of summed) {
    const [r, c] = key.split(",").map(Number);
    if (r > c) {
      const mirror = upper.get(`${c},${r}`);
      if (mirror === undefined) {
        upper.set(`${c},${r}`, v);
      } else if (mirror !== v) {
        throw new Error(`${what}: entry (${r}, ${c}) disagrees with its `
          + `mirror; the quadratic term must be symmetric`);
      }
    }
  }
  const rows: number[] = [];
  const cols: number[] = [];
  const values: number[] = [];
  for (const [key, v] of upper) {
    const [r, c] = key.split(",").map(Number);
    rows.push(r);
    cols.push(c);
    values.push(v);
  }
  return { nrows: t.nrows, ncols: t.ncols, rows, cols, values };
}
