// Config serialization.  The object mirrors the TOML file the CLI
// accepts; unknown sections and keys are passed through verbatim so the
// CLI remains the single validator.

export interface ConfigSpec {
  seed?: number;
  grid?: { views?: number; angles?: number; depths?: number[] };
  gripper?: {
    max_width?: number;
    finger_length?: number;
    finger_thickness?: number;
    finger_height?: number;
    palm_depth?: number;
  };
  quality?: { mu_min?: number; mu_max?: number; score_threshold_c?: number };
  sampling?: {
    point_strategy?: string;
    view_strategy?: string;
    count?: number;
    graspness_threshold?: number;
    rng_seed?: number;
  };
  engine?: {
    aggregation?: string;
    projection_cutoff?: number;
    voxel_size?: number;
    spacing?: number;
    group_radius?: number;
    group_height?: [number, number];
    group_count?: number;
  };
  [section: string]: unknown;
}

// Fields the pipeline declares as floats; integral values still need a
// decimal point so the TOML parser does not hand the config an int.
const FLOAT_KEYS = new Set([
  "grid.depths",
  "gripper.max_width",
  "gripper.finger_length",
  "gripper.finger_thickness",
  "gripper.finger_height",
  "gripper.palm_depth",
  "quality.mu_min",
  "quality.mu_max",
  "quality.score_threshold_c",
  "sampling.graspness_threshold",
  "engine.projection_cutoff",
  "engine.voxel_size",
  "engine.spacing",
  "engine.group_radius",
  "engine.group_height",
]);

function tomlScalar(v: unknown, float: boolean): string {
  if (typeof v === "number") {
    if (!Number.isFinite(v)) throw new Error(`non-finite config value ${v}`);
    return float && Number.isInteger(v) ? v.toFixed(1) : String(v);
  }
  if (typeof v === "string") return JSON.stringify(v);
  if (typeof v === "boolean") return String(v);
  throw new Error(`unsupported config value ${String(v)}`);
}

function tomlValue(v: unknown, float: boolean): string {
  if (Array.isArray(v)) return `[${v.map((x) => tomlScalar(x, float)).join(", ")}]`;
  return tomlScalar(v, float);
}

export function configToToml(cfg: ConfigSpec): string {
  const lines: string[] = [];
  if (cfg.seed !== undefined) lines.push(`seed = ${tomlValue(cfg.seed, false)}`);
  for (const [section, body] of Object.entries(cfg)) {
    if (section === "seed" || body === undefined) continue;
    if (typeof body !== "object" || body === null || Array.isArray(body))
      throw new Error(`config section '${section}' must be a table`);
    if (lines.length) lines.push("");
    lines.push(`[${section}]`);
    for (const [key, value] of Object.entries(body)) {
      if (value === undefined) continue;
      lines.push(`${key} = ${tomlValue(value, FLOAT_KEYS.has(`${section}.${key}`))}`);
    }
  }
  return lines.join("\n") + "\n";
}
