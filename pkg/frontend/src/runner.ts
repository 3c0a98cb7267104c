/**
 * Out-of-process execution of the native pipeline CLI.
 *
 * The native side is reached exclusively through its command-line
 * surface and binary file formats; `PSEKIT_BIN` overrides the binary
 * name when the CLI is not on PATH.
 */

import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export class PipelineError extends Error {}

export function pipelineBinary(): string {
  return process.env.PSEKIT_BIN ?? "psekit";
}

export function runPipeline(args: string[]): Buffer {
  try {
    return execFileSync(pipelineBinary(), args, {
      stdio: ["ignore", "pipe", "pipe"],
      maxBuffer: 256 * 1024 * 1024,
    });
  } catch (err) {
    const stderr = (err as { stderr?: Buffer }).stderr?.toString() ?? String(err);
    throw new PipelineError(`psekit ${args[0]} failed: ${stderr.trim()}`);
  }
}

export interface Workspace {
  dir: string;
  path(name: string): string;
  write(name: string, bytes: Uint8Array): string;
  read(name: string): Buffer;
  dispose(): void;
}

export function workspace(): Workspace {
  const dir = mkdtempSync(join(tmpdir(), "psekit-"));
  return {
    dir,
    path: (name) => join(dir, name),
    write(name, bytes) {
      const target = join(dir, name);
      writeFileSync(target, bytes);
      return target;
    },
    read: (name) => readFileSync(join(dir, name)),
    dispose: () => rmSync(dir, { recursive: true, force: true }),
  };
}
