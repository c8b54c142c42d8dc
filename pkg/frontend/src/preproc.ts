// Pre-send token preview only. The numbers shown on finished turn cards come
// from the server transcript; this mirror of the tiling arithmetic exists so
// the composer can show a cost estimate before uploading anything.

export interface TileGrid {
  cols: number;
  rows: number;
  thumbnail: boolean;
}

const TILE_PX = 448;
const TOKENS_PER_TILE = 64;

export function selectTileGrid(
  widthPx: number,
  heightPx: number,
  minTiles = 1,
  maxTiles = 12,
): TileGrid {
  if (widthPx < 1 || heightPx < 1) throw new Error("image dimensions must be positive");
  const target = Math.log(widthPx / heightPx);
  // Grids sharing an aspect ratio collapse to their smallest member.
  const reps = new Map<string, [number, number]>();
  for (let cols = 1; cols <= maxTiles; cols++) {
    for (let rows = 1; rows <= maxTiles; rows++) {
      const n = cols * rows;
      if (n < minTiles || n > maxTiles) continue;
      const g = gcd(cols, rows);
      const key = `${cols / g}/${rows / g}`;
      const prev = reps.get(key);
      if (!prev || n < prev[0] * prev[1]) reps.set(key, [cols, rows]);
    }
  }
  let best: [number, number] | null = null;
  let bestKey: [number, number, number] | null = null;
  for (const [cols, rows] of reps.values()) {
    const key: [number, number, number] = [
      Math.abs(Math.log(cols / rows) - target),
      -(cols * rows),
      cols,
    ];
    if (!bestKey || lexLess(key, bestKey)) {
      bestKey = key;
      best = [cols, rows];
    }
  }
  const [cols, rows] = best!;
  return { cols, rows, thumbnail: cols * rows > 1 };
}

export function tileCount(grid: TileGrid): number {
  return grid.cols * grid.rows + (grid.thumbnail ? 1 : 0);
}

export function visualTokenCount(grid: TileGrid): number {
  return tileCount(grid) * TOKENS_PER_TILE;
}

export function imageTokenEstimate(widthPx: number, heightPx: number): number {
  return visualTokenCount(selectTileGrid(widthPx, heightPx));
}

export const TILE_SIZE_PX = TILE_PX;

function gcd(a: number, b: number): number {
  while (b) [a, b] = [b, a % b];
  return a;
}

function lexLess(a: [number, number, number], b: [number, number, number]): boolean {
  for (let i = 0; i < 3; i++) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}
