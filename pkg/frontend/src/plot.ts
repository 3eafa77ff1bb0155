// Landscape scatter plots.  Points are projected top-down (x right,
// y up), painted far-to-near by height, and colored by graspness with a
// two-stop colormap whose brightness rises monotonically with the score
// (brighter = more graspable).  Output is an 8-bit RGB PNG written
// without external dependencies.

import { writeFileSync } from "node:fs";
import { deflateSync } from "node:zlib";

export interface PlotInput {
  count: number;
  positions: ArrayLike<number>; // xyz interleaved
  pointGraspness: ArrayLike<number>;
}

export interface PlotOptions {
  size?: number; // image is size x size pixels
  pointRadius?: number;
  background?: [number, number, number];
}

const LOW: [number, number, number] = [18, 22, 96];
const HIGH: [number, number, number] = [255, 233, 69];

export function graspnessColor(s: number): [number, number, number] {
  const t = Math.min(1, Math.max(0, s));
  return [
    Math.round(LOW[0] + t * (HIGH[0] - LOW[0])),
    Math.round(LOW[1] + t * (HIGH[1] - LOW[1])),
    Math.round(LOW[2] + t * (HIGH[2] - LOW[2])),
  ];
}

// --- minimal PNG encoder (truecolor, no interlace, filter 0) ---

const CRC_TABLE = new Uint32Array(256);
for (let n = 0; n < 256; n++) {
  let c = n;
  for (let k = 0; k < 8; k++) c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
  CRC_TABLE[n] = c >>> 0;
}

function crc32(data: Uint8Array): number {
  let c = 0xffffffff;
  for (let i = 0; i < data.length; i++)
    c = CRC_TABLE[(c ^ data[i]) & 0xff] ^ (c >>> 8);
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Uint8Array): Buffer {
  const out = Buffer.alloc(12 + data.length);
  out.writeUInt32BE(data.length, 0);
  out.write(type, 4, "ascii");
  out.set(data, 8);
  out.writeUInt32BE(crc32(out.subarray(4, 8 + data.length)), 8 + data.length);
  return out;
}

export function encodePng(width: number, height: number, rgb: Uint8Array): Buffer {
  if (rgb.length !== 3 * width * height)
    throw new Error("rgb buffer must hold 3*width*height bytes");
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 2; // truecolor
  const raw = Buffer.alloc(height * (1 + 3 * width));
  for (let y = 0; y < height; y++) {
    const rowStart = y * (1 + 3 * width);
    raw[rowStart] = 0; // filter: none
    raw.set(rgb.subarray(3 * width * y, 3 * width * (y + 1)), rowStart + 1);
  }
  return Buffer.concat([
    Buffer.from([137, 80, 78, 71, 13, 10, 26, 10]),
    chunk("IHDR", ihdr),
    chunk("IDAT", deflateSync(raw)),
    chunk("IEND", new Uint8Array(0)),
  ]);
}

export function plotLandscape(
  land: PlotInput,
  path: string,
  opts: PlotOptions = {},
): void {
  const n = land.count;
  if (n === 0) throw new Error("cannot plot an empty landscape");
  if (land.positions.length !== 3 * n || land.pointGraspness.length !== n)
    throw new Error("landscape arrays disagree with the point count");
  const size = opts.size ?? 640;
  const radius = opts.pointRadius ?? 2;
  const bg = opts.background ?? [30, 30, 34];

  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (let i = 0; i < n; i++) {
    const x = land.positions[3 * i];
    const y = land.positions[3 * i + 1];
    if (x < minX) minX = x;
    if (x > maxX) maxX = x;
    if (y < minY) minY = y;
    if (y > maxY) maxY = y;
  }
  const margin = Math.ceil(0.05 * size) + radius;
  const span = Math.max(maxX - minX, maxY - minY, 1e-12);
  const scale = (size - 2 * margin) / span;
  const offX = (size - scale * (maxX - minX)) / 2;
  const offY = (size - scale * (maxY - minY)) / 2;

  const rgb = new Uint8Array(3 * size * size);
  for (let p = 0; p < size * size; p++) rgb.set(bg, 3 * p);

  const order = Array.from({ length: n }, (_, i) => i);
  order.sort((a, b) => land.positions[3 * a + 2] - land.positions[3 * b + 2]);

  for (const i of order) {
    const u = Math.round(offX + scale * (land.positions[3 * i] - minX));
    const v = Math.round(size - offY - scale * (land.positions[3 * i + 1] - minY));
    const color = graspnessColor(land.pointGraspness[i]);
    for (let dy = -radius; dy <= radius; dy++) {
      for (let dx = -radius; dx <= radius; dx++) {
        if (dx * dx + dy * dy > radius * radius) continue;
        const px = u + dx;
        const py = v + dy;
        if (px < 0 || px >= size || py < 0 || py >= size) continue;
        rgb.set(color, 3 * (py * size + px));
      }
    }
  }
  writeFileSync(path, encodePng(size, size, rgb));
}
