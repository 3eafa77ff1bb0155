export const DEFAULT_RANK_BINS = 20;

// Discretize scores in [0, 1] into `bins` ranks; exact 1.0 clamps to the
// top rank.
export function rankScores(
  values: ArrayLike<number>,
  bins: number = DEFAULT_RANK_BINS,
): Int32Array {
  if (bins < 1) throw new Error("bins must be >= 1");
  const out = new Int32Array(values.length);
  for (let i = 0; i < values.length; i++) {
    out[i] = Math.min(bins - 1, Math.max(0, Math.floor(values[i] * bins)));
  }
  return out;
}

// Mean absolute rank distance between two score fields, scaled by 1/bins.
// Symmetric, zero iff both sides land in the same bin everywhere, at most
// (bins - 1) / bins.
export function rankingError(
  pred: ArrayLike<number>,
  label: ArrayLike<number>,
  bins: number = DEFAULT_RANK_BINS,
): number {
  if (pred.length !== label.length)
    throw new Error("pred and label must have identical shape");
  if (pred.length === 0) throw new Error("rankingError needs at least one value");
  const rp = rankScores(pred, bins);
  const rl = rankScores(label, bins);
  let sum = 0;
  for (let i = 0; i < rp.length; i++) sum += Math.abs(rp[i] - rl[i]);
  return sum / rp.length / bins;
}
