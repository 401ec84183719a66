/**
 * Compressed sparse column matrices on the client side.
 *
 * The solver core consumes CSC with exact value fidelity, so conversions
 * here are lossless for 64-bit floats and duplicate handling matches the
 * core (duplicate triplets are summed).
 */

export interface CscMatrix {
  readonly nrows: number;
  readonly ncols: number;
  /** length ncols + 1, colPtr[0] === 0, non-decreasing */
  readonly colPtr: number[];
  /** row indices per column, strictly increasing within each column */
  readonly rowIdx: number[];
  readonly values: number[];
}

/** Either an explicit CSC matrix or a dense row-major array. */
export type MatrixInput = CscMatrix | number[][];

export function isCsc(m: MatrixInput): m is CscMatrix {
  return !Array.isArray(m);
}

/** Build CSC from a dense array, dropping exact zeros. */
export function fromDense(dense: number[][], keepUpper = false): CscMatrix {
  const nrows = dense.length;
  const ncols = nrows > 0 ? dense[0].length : 0;
  const colPtr = [0];
  const rowIdx: number[] = [];
  const values: number[] = [];
  for (let j = 0; j < ncols; j++) {
    for (let i = 0; i < nrows; i++) {
      if (dense[i].length !== ncols) {
        throw new Error(`dense matrix row ${i} has ragged length`);
      }
      const v = dense[i][j];
      if (v !== 0 && (!keepUpper || i <= j)) {
        rowIdx.push(i);
        values.push(v);
      }
    }
    colPtr.push(rowIdx.length);
  }
  return { nrows, ncols, colPtr, rowIdx, values };
}

/** Validate CSC invariants; `name` labels the offending field in errors. */
export function validateCsc(m: CscMatrix, name: string): void {
  if (m.colPtr.length !== m.ncols + 1 || m.colPtr[0] !== 0) {
    throw new Error(`${name}: colPtr must have length ncols+1 and start at 0`);
  }
  const nnz = m.colPtr[m.ncols];
  if (m.rowIdx.length !== nnz || m.values.length !== nnz) {
    throw new Error(`${name}: rowIdx/values length must equal colPtr[ncols]`);
  }
  for (let j = 0; j < m.ncols; j++) {
    if (m.colPtr[j + 1] < m.colPtr[j]) {
      throw new Error(`${name}: colPtr must be non-decreasing`);
    }
    for (let p = m.colPtr[j]; p < m.colPtr[j + 1]; p++) {
      const r = m.rowIdx[p];
      if (r < 0 || r >= m.nrows) {
        throw new Error(`${name}: row index ${r} out of range in column ${j}`);
      }
      if (p > m.colPtr[j] && m.rowIdx[p - 1] >= r) {
        throw new Error(`${name}: row indices must strictly increase in column ${j}`);
      }
    }
  }
  for (const v of m.values) {
    if (!Number.isFinite(v)) {
      throw new Error(`${name}: values must be finite`);
    }
  }
}

export function toCsc(input: MatrixInput, name: string, keepUpper = false): CscMatrix {
  const m = isCsc(input) ? cloneCsc(input) : fromDense(input, keepUpper);
  validateCsc(m, name);
  return m;
}

/** Deep copy so later host-side mutation cannot reach the solver state. */
export function cloneCsc(m: CscMatrix): CscMatrix {
  return {
    nrows: m.nrows,
    ncols: m.ncols,
    colPtr: [...m.colPtr],
    rowIdx: [...m.rowIdx],
    values: [...m.values],
  };
}

export function samePattern(a: CscMatrix, b: CscMatrix): boolean {
  return (
    a.nrows === b.nrows &&
    a.ncols === b.ncols &&
    a.colPtr.length === b.colPtr.length &&
    a.colPtr.every((v, i) => v === b.colPtr[i]) &&
    a.rowIdx.length === b.rowIdx.length &&
    a.rowIdx.every((v, i) => v === b.rowIdx[i])
  );
}

/** Iterate stored entries as [row, col, value]. */
export function* entries(m: CscMatrix): Generator<[number, number, number]> {
  for (let j = 0; j < m.ncols; j++) {
    for (let p = m.colPtr[j]; p < m.colPtr[j + 1]; p++) {
      yield [m.rowIdx[p], j, m.values[p]];
    }
  }
}
