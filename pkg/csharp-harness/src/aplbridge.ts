import { execFileSync } from "node:child_process";
import fs from "node:fs";
import os from "node:os";
import path from "node:path";
import type { Value } from "./compare.js";

/** Thin wrapper over the `aplbridge` CLI, the oracle's public surface. */

const CLI = process.env.APLBRIDGE_CLI ?? "aplbridge";

function run(args: string[]): string {
  return execFileSync(CLI, args, { encoding: "utf8" });
}

export function evalExpr(expr: string): Value {
  return JSON.parse(run(["eval", "--expr", expr]));
}

export function runIoCase(aplSource: string, right: string, left?: string): Value {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "aplbridge-"));
  const fnPath = path.join(dir, "fn.apl");
  try {
    fs.writeFileSync(fnPath, aplSource, "utf8");
    const args = ["run-io", "--fn", fnPath, "--right", right];
    if (left !== undefined) args.push("--left", left);
    return JSON.parse(run(args));
  } finally {
    fs.rmSync(dir, { recursive: true, force: true });
  }
}

export interface ParsedHeader {
  name: string;
  valence: "monadic" | "dyadic";
  types: { left: string | null; right: string; result: string };
  csharp_signature: string;
}

export function parseHeaders(aplSource: string): ParsedHeader[] {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "aplbridge-"));
  const fnPath = path.join(dir, "fn.apl");
  try {
    fs.writeFileSync(fnPath, aplSource, "utf8");
    const out = run(["parse-headers", "--in", fnPath]);
    return out
      .split("\n")
      .filter((line) => line.trim().length > 0)
      .map((line) => JSON.parse(line) as ParsedHeader);
  } finally {
    fs.rmSync(dir, { recursive: true, force: true });
  }
}
