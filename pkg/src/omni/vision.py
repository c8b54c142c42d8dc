"""Dynamic-resolution image tiling and visual-token accounting.

Images are cut into a grid of fixed 448x448 tiles. The grid is chosen by
aspect ratio under a tile-count budget, and each tile costs a fixed number
of tokens after patchification and a 16x token-reduction shuffle (64 tokens
per tile with the defaults).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from PIL import Image

from .errors import ConfigError, InputError

TILE_PX = 448
DEFAULT_PATCH_PX = 14
DEFAULT_SHUFFLE_FACTOR = 16
DEFAULT_MIN_TILES = 1
DEFAULT_MAX_TILES = 12


@dataclass(frozen=True)
class ImageMeta:
    """Pixel dimensions of a source image."""

    width_px: int
    height_px: int

    def __post_init__(self) -> None:
        if self.width_px < 1 or self.height_px < 1:
            raise InputError(
                f"image dimensions must be positive, got {self.width_px}x{self.height_px}"
            )


@dataclass(frozen=True)
class GridSpec:
    """A cols x rows tiling, plus whether a whole-image thumbnail tile is appended."""

    cols: int
    rows: int
    use_thumbnail: bool

    @property
    def tile_count(self) -> int:
        return self.cols * self.rows + (1 if self.use_thumbnail else 0)


@dataclass(frozen=True)
class TileBatch:
    tiles: list[Image.Image]
    grid: GridSpec


def _candidate_grids(min_tiles: int, max_tiles: int) -> list[tuple[int, int]]:
    grids = set()
    for cols in range(1, max_tiles + 1):
        for rows in range(1, max_tiles + 1):
            if min_tiles <= cols * rows <= max_tiles:
                grids.add((cols, rows))
    return sorted(grids)


def select_tile_grid(
    meta: ImageMeta,
    min_tiles: int = DEFAULT_MIN_TILES,
    max_tiles: int = DEFAULT_MAX_TILES,
    thumbnail: bool = True,
) -> GridSpec:
    """Pick the tile grid whose aspect ratio best matches the image.

    Candidates are all (cols, rows) with min_tiles <= cols*rows <= max_tiles;
    grids sharing an aspect ratio collapse to the one with the fewest tiles
    (so a square image costs one tile, not nine). The winner minimizes
    |log(cols/rows) - log(w/h)|; exact ties across distinct ratios go to the
    larger tile count, then the smaller column count. A thumbnail tile is
    added for multi-tile grids unless ``thumbnail`` is False.
    """
    if not (1 <= min_tiles <= max_tiles):
        raise InputError(f"need 1 <= min_tiles <= max_tiles, got {min_tiles}..{max_tiles}")
    target = math.log(meta.width_px / meta.height_px)
    reps: dict[tuple[int, int], tuple[int, int]] = {}
    for cols, rows in _candidate_grids(min_tiles, max_tiles):
        g = math.gcd(cols, rows)
        ratio = (cols // g, rows // g)
        if ratio not in reps or cols * rows < reps[ratio][0] * reps[ratio][1]:
            reps[ratio] = (cols, rows)
    cols, rows = min(
        reps.values(),
        key=lambda cr: (abs(math.log(cr[0] / cr[1]) - target), -cr[0] * cr[1], cr[0]),
    )
    return GridSpec(cols=cols, rows=rows, use_thumbnail=thumbnail and cols * rows > 1)


def tile_image(image: Image.Image, grid: GridSpec) -> TileBatch:
    """Resize to the grid's pixel extent and slice row-major into 448x448 tiles.

    When the grid calls for a thumbnail, a whole-image 448x448 resize is
    appended after the slices.
    """
    if image.width < 1 or image.height < 1:
        raise InputError("cannot tile an empty image")
    target_w = grid.cols * TILE_PX
    target_h = grid.rows * TILE_PX
    resized = image.resize((target_w, target_h), resample=Image.Resampling.BILINEAR)
    tiles = []
    for row in range(grid.rows):
        for col in range(grid.cols):
            box = (col * TILE_PX, row * TILE_PX, (col + 1) * TILE_PX, (row + 1) * TILE_PX)
            tiles.append(resized.crop(box))
    if grid.use_thumbnail:
        tiles.append(image.resize((TILE_PX, TILE_PX), resample=Image.Resampling.BILINEAR))
    return TileBatch(tiles=tiles, grid=grid)


def visual_token_count(
    grid: GridSpec,
    patch_px: int = DEFAULT_PATCH_PX,
    shuffle_factor: int = DEFAULT_SHUFFLE_FACTOR,
) -> int:
    """Token cost of a tiled image: tiles * (448/patch)^2 / shuffle_factor.

    64 tokens per tile with the default 14px patches and 16x shuffle.
    """
    if patch_px < 1 or TILE_PX % patch_px != 0:
        raise ConfigError(f"tile size {TILE_PX} not divisible by patch size {patch_px}")
    patches = (TILE_PX // patch_px) ** 2
    if shuffle_factor < 1 or patches % shuffle_factor != 0:
        raise ConfigError(
            f"{patches} patches per tile not divisible by shuffle factor {shuffle_factor}"
        )
    return grid.tile_count * (patches // shuffle_factor)


def image_token_count(
    meta: ImageMeta,
    min_tiles: int = DEFAULT_MIN_TILES,
    max_tiles: int = DEFAULT_MAX_TILES,
    thumbnail: bool = True,
) -> int:
    """Convenience: grid selection plus token accounting for one image."""
    return visual_token_count(select_tile_grid(meta, min_tiles, max_tiles, thumbnail))
