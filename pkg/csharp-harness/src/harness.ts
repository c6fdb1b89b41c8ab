import fs from "node:fs";
import path from "node:path";
import { fileURLToPath } from "node:url";
import type { IoCase } from "./goldens.js";

const __dirname = path.dirname(fileURLToPath(import.meta.url));
const TEMPLATE_PATH = path.resolve(__dirname, "../templates/harness.cs");

export function loadTemplate(): string {
  return fs.readFileSync(TEMPLATE_PATH, "utf8");
}

/**
 * Fill the harness template into one compilable C# program: the
 * candidate code verbatim plus one guarded invocation per io case.
 * Each test prints exactly one line: `TEST<i>:<canonical json>` on
 * success or `TEST<i>:ERROR:<exception type>:<message>` on a throw, so
 * one crashing test never hides the others.
 */
export function generateHarness(candidate: string, ioCases: IoCase[], template?: string): string {
  if (ioCases.length === 0) throw new Error("io cases must be non-empty");
  const tpl = template ?? loadTemplate();
  const invocations = ioCases
    .map((io, idx) => {
      const i = idx + 1;
      return [
        `        try {`,
        `            var __r${i} = ${io.method_name}Util.${io.method_name}(${io.CSharpArg});`,
        `            Console.WriteLine("TEST${i}:" + __AplBridgeSerializer.Serialize(__r${i}));`,
        `        } catch (Exception __e${i}) {`,
        `            Console.WriteLine("TEST${i}:ERROR:" + __e${i}.GetType().Name + ":" + __e${i}.Message);`,
        `        }`,
      ].join("\n");
    })
    .join("\n");
  return tpl.replace("{CANDIDATE_CODE}", candidate).replace("{TEST_INVOCATIONS}", invocations);
}
