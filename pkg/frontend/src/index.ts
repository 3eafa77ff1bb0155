// High-level entry points over the grasplands CLI.  Scenes and configs
// are marshaled to the CLI's file formats, the pipeline runs in a
// scratch directory, and the artifacts are parsed back into typed
// arrays.  Only the CLI surface is consumed; nothing reaches into the
// pipeline's internals.

import {
  existsSync,
  mkdirSync,
  mkdtempSync,
  readFileSync,
  rmSync,
  writeFileSync,
} from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { configToToml, ConfigSpec } from "./config";
import { Cloud, Grasp, ViewScores, parseGraspCsv, parsePly, parseViewScores } from "./formats";
import { runCli } from "./runner";
import { SceneSpec, sceneToJson } from "./scene";

export { ConfigSpec, configToToml } from "./config";
export {
  Cloud,
  Grasp,
  ViewScores,
  GRASP_CSV_HEADER,
  parseGraspCsv,
  parsePly,
  parseViewScores,
  writeAsciiPly,
} from "./formats";
export { plotLandscape, graspnessColor, encodePng, PlotInput, PlotOptions } from "./plot";
export { rankingError, rankScores, DEFAULT_RANK_BINS } from "./ranking";
export { CliInternalError, CliUsageError, runCli, cliCommand } from "./runner";
export {
  CameraSpec,
  ObjectSpec,
  PoseSpec,
  SceneSpec,
  ShapeSpec,
  identityPose,
  sceneToJson,
} from "./scene";

export interface BoundLandscape {
  count: number;
  positions: Float64Array; // xyz interleaved, length 3*count
  normals: Float64Array | null;
  objectness: Uint8Array | null;
  objectId: Int32Array | null;
  pointGraspness: Float64Array;
  viewGraspness: ViewScores; // rows === count
}

export interface PipelineOptions {
  config?: ConfigSpec;
  configPath?: string;
  seed?: number;
  jobs?: number;
  // Persist scene/config/artifact files here instead of a scratch dir.
  workdir?: string;
}

export interface GraspnessOptions extends PipelineOptions {
  level?: "scene" | "object";
  // Return the landscape over the full model cloud instead of the
  // landscape projected onto the rendered view.
  model?: boolean;
}

export interface SampleOptions extends PipelineOptions {
  nmsTranslation?: number;
  nmsRotation?: number; // degrees
  keepColliding?: boolean;
}

interface Staged {
  dir: string;
  scenePath: string;
  flags: string[];
  cleanup: () => void;
}

function stage(scene: SceneSpec | string, opts: PipelineOptions): Staged {
  const ephemeral = opts.workdir === undefined;
  let dir: string;
  if (opts.workdir === undefined) {
    dir = mkdtempSync(join(tmpdir(), "grasplands-"));
  } else {
    mkdirSync(opts.workdir, { recursive: true });
    dir = opts.workdir;
  }
  let scenePath: string;
  if (typeof scene === "string") {
    scenePath = scene;
  } else {
    scenePath = join(dir, "scene.json");
    writeFileSync(scenePath, sceneToJson(scene));
  }
  const flags: string[] = [];
  if (opts.config !== undefined && opts.configPath !== undefined)
    throw new Error("pass either config or configPath, not both");
  if (opts.config !== undefined) {
    const configPath = join(dir, "config.toml");
    writeFileSync(configPath, configToToml(opts.config));
    flags.push("--config", configPath);
  } else if (opts.configPath !== undefined) {
    flags.push("--config", opts.configPath);
  }
  if (opts.seed !== undefined) flags.push("--seed", String(opts.seed));
  if (opts.jobs !== undefined) flags.push("--jobs", String(opts.jobs));
  return {
    dir,
    scenePath,
    flags,
    cleanup: () => {
      if (ephemeral) rmSync(dir, { recursive: true, force: true });
    },
  };
}

function sidecarPath(plyPath: string): string {
  return plyPath.replace(/\.ply$/, "") + ".gsv";
}

function boundLandscape(cloud: Cloud, views: ViewScores): BoundLandscape {
  if (cloud.graspness === null)
    throw new Error("landscape output lacks a graspness channel");
  if (views.rows !== cloud.count)
    throw new Error(
      `sidecar rows (${views.rows}) disagree with cloud size (${cloud.count})`,
    );
  return {
    count: cloud.count,
    positions: cloud.positions,
    normals: cloud.normals,
    objectness: cloud.objectness,
    objectId: cloud.objectId,
    pointGraspness: cloud.graspness,
    viewGraspness: views,
  };
}

// Runs the landscape pipeline (assemble, score, render, project) on a
// scene given as a spec object or a scene-file path, and returns the
// parsed landscape.
export function computeGraspness(
  scene: SceneSpec | string,
  opts: GraspnessOptions = {},
): BoundLandscape {
  const staged = stage(scene, opts);
  try {
    const out = join(staged.dir, "landscape.ply");
    const args = ["graspness", staged.scenePath, "--output", out, ...staged.flags];
    if (opts.level !== undefined) args.push("--level", opts.level);
    const modelOut = join(staged.dir, "model.ply");
    if (opts.model) args.push("--model-output", modelOut);
    runCli(args);
    const target = opts.model ? modelOut : out;
    const cloud = parsePly(readFileSync(target));
    const views = parseViewScores(readFileSync(sidecarPath(target)));
    return boundLandscape(cloud, views);
  } finally {
    staged.cleanup();
  }
}

// Extracts, de-duplicates and (unless keepColliding) collision-filters
// grasps; rows come back sorted by descending score.
export function sampleGrasps(
  scene: SceneSpec | string,
  opts: SampleOptions = {},
): Grasp[] {
  const staged = stage(scene, opts);
  try {
    const out = join(staged.dir, "grasps.csv");
    const args = ["sample", staged.scenePath, "--output", out, ...staged.flags];
    if (opts.nmsTranslation !== undefined)
      args.push("--nms-translation", String(opts.nmsTranslation));
    if (opts.nmsRotation !== undefined)
      args.push("--nms-rotation", String(opts.nmsRotation));
    if (opts.keepColliding) args.push("--keep-colliding");
    runCli(args);
    if (!existsSync(out)) throw new Error("sample wrote no grasp file");
    return parseGraspCsv(readFileSync(out, "ascii"));
  } finally {
    staged.cleanup();
  }
}
