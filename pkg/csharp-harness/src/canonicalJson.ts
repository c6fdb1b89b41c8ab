/**
 * Canonical output JSON, mirroring the C# serializer embedded in the
 * harness template: booleans as true/false, bare numeric scalars,
 * strings with only `"` `\` and newline escaped, flat arrays for rank 1
 * and row-major nested arrays for rank 2.
 */

export type Canonical = boolean | number | string | Canonical[];

export function canonicalJson(value: Canonical): string {
  if (typeof value === "boolean") return value ? "true" : "false";
  if (typeof value === "number") {
    if (!Number.isFinite(value)) throw new Error(`non-finite number: ${value}`);
    return String(value);
  }
  if (typeof value === "string") return quote(value);
  if (Array.isArray(value)) return `[${value.map(canonicalJson).join(",")}]`;
  throw new Error(`unsupported value kind: ${typeof value}`);
}

function quote(s: string): string {
  let out = '"';
  for (const ch of s) {
    if (ch === '"' || ch === "\\") out += "\\" + ch;
    else if (ch === "\n") out += "\\n";
    else out += ch;
  }
  return out + '"';
}
