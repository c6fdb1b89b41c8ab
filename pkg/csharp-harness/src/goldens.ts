import fs from "node:fs";
import path from "node:path";
import { fileURLToPath } from "node:url";

const __dirname = path.dirname(fileURLToPath(import.meta.url));
const GOLDEN_DIR = path.resolve(__dirname, "../golden");

export type Output = boolean | number | string | Output[];

export interface IoCase {
  method_name: string;
  AplLeftArg?: string;
  AplRightArg: string;
  CSharpArg: string;
  Output: Output;
}

export interface GoldenPair {
  id: string;
  apl: string;
  csharp: string;
  io: IoCase[];
  nl_description: string;
  /** true when the APL source lies inside the oracle interpreter's subset */
  oracle: boolean;
}

export function loadGoldens(): GoldenPair[] {
  const ids = fs
    .readdirSync(GOLDEN_DIR)
    .filter((name) => fs.statSync(path.join(GOLDEN_DIR, name)).isDirectory())
    .sort();
  return ids.map((id) => {
    const dir = path.join(GOLDEN_DIR, id);
    const point = JSON.parse(fs.readFileSync(path.join(dir, "datapoint.json"), "utf8"));
    const csharp = fs.readFileSync(path.join(dir, "reference.cs"), "utf8");
    return { id, csharp, ...point } as GoldenPair;
  });
}
