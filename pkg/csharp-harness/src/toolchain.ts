import { execFileSync, spawnSync } from "node:child_process";
import fs from "node:fs";
import os from "node:os";
import path from "node:path";
import { outputsEqual, type Value } from "./compare.js";
import type { IoCase } from "./goldens.js";

export interface Toolchain {
  name: "dotnet" | "csc" | "mcs";
  compile(srcDir: string, program: string): { ok: boolean; diagnostics: string };
  run(srcDir: string): { exitCode: number; stdout: string; stderr: string };
}

function exists(cmd: string): boolean {
  const probe = spawnSync(cmd, ["--version"], { encoding: "utf8" });
  return probe.error === undefined;
}

/** First available C# toolchain on PATH, or null when none is installed. */
export function findToolchain(): Toolchain | null {
  if (exists("dotnet")) return dotnetToolchain();
  for (const compiler of ["csc", "mcs"] as const) {
    if (exists(compiler)) return monoStyleToolchain(compiler);
  }
  return null;
}

function dotnetToolchain(): Toolchain {
  return {
    name: "dotnet",
    compile(srcDir, program) {
      const proj = [
        `<Project Sdk="Microsoft.NET.Sdk">`,
        `  <PropertyGroup>`,
        `    <OutputType>Exe</OutputType>`,
        `    <TargetFramework>net${dotnetMajor()}.0</TargetFramework>`,
        `    <Nullable>disable</Nullable>`,
        `    <ImplicitUsings>disable</ImplicitUsings>`,
        `  </PropertyGroup>`,
        `</Project>`,
      ].join("\n");
      fs.writeFileSync(path.join(srcDir, "Harness.csproj"), proj);
      fs.writeFileSync(path.join(srcDir, "Program.cs"), program);
      const built = spawnSync("dotnet", ["build", "-nologo", "-v", "q"], {
        cwd: srcDir,
        encoding: "utf8",
        timeout: 120_000,
      });
      return { ok: built.status === 0, diagnostics: `${built.stdout}${built.stderr}` };
    },
    run(srcDir) {
      const ran = spawnSync("dotnet", ["run", "--no-build"], {
        cwd: srcDir,
        encoding: "utf8",
        timeout: 30_000,
      });
      return { exitCode: ran.status ?? -1, stdout: ran.stdout, stderr: ran.stderr };
    },
  };
}

function dotnetMajor(): string {
  const version = execFileSync("dotnet", ["--version"], { encoding: "utf8" }).trim();
  return version.split(".")[0] ?? "8";
}

function monoStyleToolchain(compiler: "csc" | "mcs"): Toolchain {
  return {
    name: compiler,
    compile(srcDir, program) {
      fs.writeFileSync(path.join(srcDir, "Program.cs"), program);
      const built = spawnSync(compiler, ["-out:harness.exe", "Program.cs"], {
        cwd: srcDir,
        encoding: "utf8",
        timeout: 60_000,
      });
      return { ok: built.status === 0, diagnostics: `${built.stdout}${built.stderr}` };
    },
    run(srcDir) {
      const runner = exists("mono") ? "mono" : path.join(srcDir, "harness.exe");
      const args = runner === "mono" ? ["harness.exe"] : [];
      const ran = spawnSync(runner, args, { cwd: srcDir, encoding: "utf8", timeout: 30_000 });
      return { exitCode: ran.status ?? -1, stdout: ran.stdout, stderr: ran.stderr };
    },
  };
}

export type Classification = "pass" | "Compilation" | "Runtime" | "Functional";

export interface ExecutionOutcome {
  classification: Classification;
  diagnostics: string;
  perTest: ("pass" | "runtime-failure" | "output-mismatch" | "not-compiled")[];
}

/** Compile and run one harness program, then classify like the pipeline:
 * Compilation < Runtime < Functional < pass. */
export function executeAndClassify(
  toolchain: Toolchain,
  program: string,
  ioCases: IoCase[],
): ExecutionOutcome {
  const srcDir = fs.mkdtempSync(path.join(os.tmpdir(), "csharp-harness-"));
  try {
    const compiled = toolchain.compile(srcDir, program);
    if (!compiled.ok) {
      return {
        classification: "Compilation",
        diagnostics: compiled.diagnostics,
        perTest: ioCases.map(() => "not-compiled"),
      };
    }
    const ran = toolchain.run(srcDir);
    const lines = new Map<number, string>();
    for (const line of ran.stdout.split("\n")) {
      const match = /^TEST(\d+):(.*)$/.exec(line);
      if (match) lines.set(Number(match[1]), match[2]);
    }
    const perTest = ioCases.map((io, idx) => {
      const payload = lines.get(idx + 1);
      if (payload === undefined || payload.startsWith("ERROR:")) return "runtime-failure" as const;
      let actual: Value;
      try {
        actual = JSON.parse(payload);
      } catch {
        return "runtime-failure" as const;
      }
      return outputsEqual(actual, io.Output) ? ("pass" as const) : ("output-mismatch" as const);
    });
    const classification: Classification = perTest.every((t) => t === "pass")
      ? "pass"
      : perTest.some((t) => t === "runtime-failure")
        ? "Runtime"
        : "Functional";
    return { classification, diagnostics: ran.stderr, perTest };
  } finally {
    fs.rmSync(srcDir, { recursive: true, force: true });
  }
}
