/**
 * Structural equality for canonical output values, matching the
 * verification semantics of the translation pipeline:
 *  - booleans equate to 1/0,
 *  - a string equals the array of its single-character strings,
 *  - [] equals any empty array regardless of nesting,
 *  - numbers compare within |a-b| <= max(absTol, relTol*|b|),
 *  - a one-element array equals its sole element (APL scalar display).
 */

export type Value = boolean | number | string | Value[] | null;

export interface Tolerances {
  relTol?: number;
  absTol?: number;
}

const DEFAULTS = { relTol: 1e-6, absTol: 1e-9 };

function isEmpty(x: Value): boolean {
  if (Array.isArray(x)) return x.length === 0 || x.every(isEmpty);
  if (typeof x === "string") return x.length === 0;
  return false;
}

function normalize(x: Value): Value {
  if (x === true) return 1;
  if (x === false) return 0;
  if (Array.isArray(x) && x.length === 1) return normalize(x[0]);
  return x;
}

export function outputsEqual(actual: Value, expected: Value, tol: Tolerances = {}): boolean {
  const { relTol, absTol } = { ...DEFAULTS, ...tol };
  const a = normalize(actual);
  const b = normalize(expected);
  if (Array.isArray(a) && Array.isArray(b)) {
    if (isEmpty(a) && isEmpty(b)) return true;
    if (a.length !== b.length) return false;
    return a.every((x, i) => outputsEqual(x, b[i], tol));
  }
  if (typeof a === "string" && Array.isArray(b)) return outputsEqual([...a], b, tol);
  if (Array.isArray(a) && typeof b === "string") return outputsEqual(a, [...b], tol);
  if (typeof a === "string" || typeof b === "string") return a === b;
  if (typeof a === "number" && typeof b === "number") {
    return Math.abs(a - b) <= Math.max(absTol, relTol * Math.abs(b));
  }
  if (Array.isArray(a) !== Array.isArray(b)) return isEmpty(a) && isEmpty(b);
  return a === b;
}
