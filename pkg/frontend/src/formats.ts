// Codecs for the pipeline's artifact formats: PLY point clouds (binary
// little-endian or ASCII), the GSNV1 per-view score sidecar, and the
// grasp CSV.  Layouts mirror the producer exactly; parsers reject
// anything the producer would not write.

export interface Cloud {
  count: number;
  positions: Float64Array; // xyz interleaved, length 3*count
  normals: Float64Array | null;
  objectness: Uint8Array | null;
  objectId: Int32Array | null;
  graspness: Float64Array | null;
}

export interface ViewScores {
  rows: number;
  cols: number;
  data: Float64Array; // row-major, length rows*cols
}

export interface Grasp {
  center: [number, number, number];
  view: [number, number, number];
  angle: number;
  depth: number;
  width: number;
  score: number;
}

export const GRASP_CSV_HEADER =
  "center_x,center_y,center_z,view_x,view_y,view_z,angle,depth,width,score";

const PROPERTY_TYPES: Record<string, "float" | "uchar" | "int"> = {
  x: "float",
  y: "float",
  z: "float",
  nx: "float",
  ny: "float",
  nz: "float",
  objectness: "uchar",
  object_id: "int",
  graspness: "float",
};

const TYPE_SIZE = { float: 4, uchar: 1, int: 4 } as const;

interface Header {
  binary: boolean;
  count: number;
  props: string[];
  bodyOffset: number;
}

function parsePlyHeader(buf: Buffer): Header {
  const end = buf.indexOf("end_header\n");
  if (end < 0) throw new Error("truncated PLY header");
  const bodyOffset = end + "end_header\n".length;
  const lines = buf.toString("ascii", 0, end).split("\n");
  if (lines[0].trim() !== "ply") throw new Error("not a PLY file");

  let binary: boolean | null = null;
  let count: number | null = null;
  const props: string[] = [];
  for (const line of lines.slice(1)) {
    const parts = line.trim().split(/\s+/);
    if (parts[0] === "" || parts[0] === "comment") continue;
    if (parts[0] === "format") {
      if (parts[1] === "binary_little_endian") binary = true;
      else if (parts[1] === "ascii") binary = false;
      else throw new Error(`unsupported PLY format '${parts[1]}'`);
    } else if (parts[0] === "element") {
      if (parts[1] !== "vertex" || count !== null)
        throw new Error("only a single vertex element is supported");
      count = parseInt(parts[2], 10);
    } else if (parts[0] === "property") {
      const name = parts[2];
      if (parts.length !== 3 || !(name in PROPERTY_TYPES))
        throw new Error(`unsupported property '${parts.slice(1).join(" ")}'`);
      if (PROPERTY_TYPES[name] !== parts[1])
        throw new Error(`property ${name} must be ${PROPERTY_TYPES[name]}`);
      props.push(name);
    } else {
      throw new Error(`unsupported header line '${parts[0]}'`);
    }
  }
  if (binary === null || count === null || !Number.isFinite(count))
    throw new Error("PLY header lacks format or vertex element");
  if (props[0] !== "x" || props[1] !== "y" || props[2] !== "z")
    throw new Error("PLY must start with x, y, z properties");
  return { binary, count, props, bodyOffset };
}

export function parsePly(buf: Buffer): Cloud {
  const { binary, count, props, bodyOffset } = parsePlyHeader(buf);
  const columns: Record<string, Float64Array> = {};
  for (const p of props) columns[p] = new Float64Array(count);

  if (binary) {
    const rowSize = props.reduce((s, p) => s + TYPE_SIZE[PROPERTY_TYPES[p]], 0);
    if (buf.length - bodyOffset < rowSize * count)
      throw new Error("truncated PLY payload");
    const view = new DataView(buf.buffer, buf.byteOffset + bodyOffset);
    let off = 0;
    for (let i = 0; i < count; i++) {
      for (const p of props) {
        const t = PROPERTY_TYPES[p];
        if (t === "float") {
          columns[p][i] = view.getFloat32(off, true);
          off += 4;
        } else if (t === "uchar") {
          columns[p][i] = view.getUint8(off);
          off += 1;
        } else {
          columns[p][i] = view.getInt32(off, true);
          off += 4;
        }
      }
    }
  } else {
    const lines = buf.toString("ascii", bodyOffset).split("\n");
    for (let i = 0; i < count; i++) {
      const cells = (lines[i] ?? "").trim().split(/\s+/);
      if (cells.length !== props.length || cells[0] === "")
        throw new Error(`ASCII vertex row ${i} malformed`);
      for (let j = 0; j < props.length; j++) {
        const v = parseFloat(cells[j]);
        if (Number.isNaN(v) && cells[j].toLowerCase() !== "nan")
          throw new Error(`ASCII vertex row ${i} malformed`);
        // non-float columns store what float32 storage would have kept
        columns[props[j]][i] =
          PROPERTY_TYPES[props[j]] === "float" ? Math.fround(v) : Math.trunc(v);
      }
    }
  }

  const positions = new Float64Array(3 * count);
  for (let i = 0; i < count; i++) {
    positions[3 * i] = columns.x[i];
    positions[3 * i + 1] = columns.y[i];
    positions[3 * i + 2] = columns.z[i];
  }
  let normals: Float64Array | null = null;
  if ("nx" in columns) {
    normals = new Float64Array(3 * count);
    for (let i = 0; i < count; i++) {
      normals[3 * i] = columns.nx[i];
      normals[3 * i + 1] = columns.ny[i];
      normals[3 * i + 2] = columns.nz[i];
    }
  }
  return {
    count,
    positions,
    normals,
    objectness: "objectness" in columns ? Uint8Array.from(columns.objectness) : null,
    objectId: "object_id" in columns ? Int32Array.from(columns.object_id) : null,
    graspness: "graspness" in columns ? columns.graspness : null,
  };
}

// Writes an ASCII PLY the pipeline's reader accepts; used to feed
// hand-built score fields into `eval`.  Float cells keep full float64
// precision (the reader re-quantizes to float32 storage on its side).
export function writeAsciiPly(cloud: {
  positions: ArrayLike<number>;
  graspness?: ArrayLike<number>;
}): string {
  const n = cloud.positions.length / 3;
  if (!Number.isInteger(n)) throw new Error("positions length must be 3*N");
  const props = ["x", "y", "z"];
  if (cloud.graspness) {
    if (cloud.graspness.length !== n)
      throw new Error("graspness length must match point count");
    props.push("graspness");
  }
  const lines = ["ply", "format ascii 1.0", `element vertex ${n}`];
  for (const p of props) lines.push(`property ${PROPERTY_TYPES[p]} ${p}`);
  lines.push("end_header");
  for (let i = 0; i < n; i++) {
    const cells = [
      String(cloud.positions[3 * i]),
      String(cloud.positions[3 * i + 1]),
      String(cloud.positions[3 * i + 2]),
    ];
    if (cloud.graspness) cells.push(String(cloud.graspness[i]));
    lines.push(cells.join(" "));
  }
  return lines.join("\n") + "\n";
}

const SIDECAR_MAGIC = "GSNV1";

export function parseViewScores(buf: Buffer): ViewScores {
  if (buf.length < 13 || buf.toString("ascii", 0, 5) !== SIDECAR_MAGIC)
    throw new Error("bad sidecar magic");
  const rows = buf.readUInt32LE(5);
  const cols = buf.readUInt32LE(9);
  if (buf.length - 13 < 4 * rows * cols)
    throw new Error("truncated sidecar payload");
  const raw = new Float32Array(rows * cols);
  for (let i = 0; i < raw.length; i++) raw[i] = buf.readFloatLE(13 + 4 * i);
  return { rows, cols, data: Float64Array.from(raw) };
}

export function parseGraspCsv(text: string): Grasp[] {
  const lines = text.split("\n");
  if (lines[0].trim() !== GRASP_CSV_HEADER)
    throw new Error("unexpected grasp CSV header");
  const out: Grasp[] = [];
  for (const line of lines.slice(1)) {
    if (line.trim() === "") continue;
    const vals = line.split(",").map(Number);
    if (vals.length !== 10 || vals.some(Number.isNaN))
      throw new Error("grasp CSV row must have 10 columns");
    out.push({
      center: [vals[0], vals[1], vals[2]],
      view: [vals[3], vals[4], vals[5]],
      angle: vals[6],
      depth: vals[7],
      width: vals[8],
      score: vals[9],
    });
  }
  return out;
}
