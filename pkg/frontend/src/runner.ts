import { spawnSync } from "node:child_process";

// Exit code 2: bad input or config (argument-level error).
export class CliUsageError extends Error {}

// Exit code 3: internal invariant violation inside the pipeline.
export class CliInternalError extends Error {}

export interface RunResult {
  stdout: string;
  stderr: string;
}

export interface RunOpts {
  cwd?: string;
  env?: Record<string, string>;
}

// Override with GRASPLANDS_BIN when the CLI is not on PATH.
export function cliCommand(): string {
  return process.env.GRASPLANDS_BIN || "grasplands";
}

export function runCli(args: string[], opts: RunOpts = {}): RunResult {
  const res = spawnSync(cliCommand(), args, {
    cwd: opts.cwd,
    env: { ...process.env, ...opts.env },
    encoding: "utf8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (res.error) {
    throw new Error(`failed to launch '${cliCommand()}': ${res.error.message}`);
  }
  const detail = (res.stderr || "").trim() || `exit code ${res.status}`;
  if (res.status === 2) throw new CliUsageError(detail);
  if (res.status === 3) throw new CliInternalError(detail);
  if (res.status !== 0) throw new Error(`grasplands failed: ${detail}`);
  return { stdout: res.stdout, stderr: res.stderr };
}
