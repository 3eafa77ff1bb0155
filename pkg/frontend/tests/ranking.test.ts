import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, describe, expect, it } from "vitest";

import { writeAsciiPly } from "../src/formats";
import { DEFAULT_RANK_BINS, rankScores, rankingError } from "../src/ranking";
import { runCli } from "../src/runner";

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

describe("rankScores", () => {
  it("bins scores with floor and clamps the edges", () => {
    expect(Array.from(rankScores([0.14, 0.26, 0.0, 1.0, -0.5, 2.0]))).toEqual([
      2, 5, 0, 19, 0, 19,
    ]);
    expect(Array.from(rankScores([0.5], 4))).toEqual([2]);
    expect(DEFAULT_RANK_BINS).toBe(20);
  });

  it("rejects non-positive bin counts", () => {
    expect(() => rankScores([0.5], 0)).toThrow(/bins/);
  });
});

describe("rankingError", () => {
  it("is zero against itself", () => {
    const rng = mulberry32(7);
    const v = Array.from({ length: 257 }, () => rng());
    expect(rankingError(v, v)).toBe(0);
  });

  it("scores the one-point 0.14 vs 0.26 case as exactly 0.15", () => {
    expect(rankingError([0.14], [0.26])).toBe(0.15);
    expect(rankingError([0.26], [0.14])).toBe(0.15);
  });

  it("stays within [0, (bins-1)/bins] and is symmetric", () => {
    const rng = mulberry32(12345);
    for (let trial = 0; trial < 1000; trial++) {
      const a = [rng()], b = [rng()];
      const e = rankingError(a, b);
      expect(e).toBeGreaterThanOrEqual(0);
      expect(e).toBeLessThanOrEqual(19 / 20);
      expect(rankingError(b, a)).toBe(e);
    }
    expect(rankingError([0.0], [1.0])).toBe(19 / 20);
  });

  it("validates shapes", () => {
    expect(() => rankingError([0.1], [0.1, 0.2])).toThrow(/identical shape/);
    expect(() => rankingError([], [])).toThrow(/at least one value/);
  });
});

describe("rankingError against the CLI", () => {
  const dir = mkdtempSync(join(tmpdir(), "grasplands-eval-"));
  afterAll(() => rmSync(dir, { recursive: true, force: true }));

  function cliError(pred: number[], label: number[]): number {
    const n = pred.length;
    const rng = mulberry32(n);
    const positions = Array.from({ length: 3 * n }, () => rng());
    const predPath = join(dir, `pred${n}.ply`);
    const labelPath = join(dir, `label${n}.ply`);
    writeFileSync(predPath, writeAsciiPly({ positions, graspness: pred }));
    writeFileSync(labelPath, writeAsciiPly({ positions, graspness: label }));
    const { stdout } = runCli(["eval", "--pred", predPath, "--label", labelPath]);
    const m = stdout.match(/^ranking_error (\S+)$/m);
    expect(m).not.toBeNull();
    return Number(m![1]);
  }

  it("matches bit-for-bit on the one-point case and on random fields", () => {
    expect(cliError([0.14], [0.26])).toBe(0.15);

    const rng = mulberry32(99);
    const pred = Array.from({ length: 64 }, () => rng());
    const label = Array.from({ length: 64 }, () => rng());
    // the CLI reads the float32-quantized file contents
    const local = rankingError(pred.map(Math.fround), label.map(Math.fround));
    expect(cliError(pred, label)).toBe(local);
  });

  it("reports zero for label vs label", () => {
    const rng = mulberry32(5);
    const v = Array.from({ length: 32 }, () => rng());
    expect(cliError(v, v)).toBe(0);
  });
});
