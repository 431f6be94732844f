"""Planar array geometry: element grids, domino tiles, subarrays.

All positions are expressed in units of the design wavelength, so a
half-wavelength lattice has spacing 0.5.  Element indices are (column, row)
with the origin at the grid corner; the flat index of column ``i``, row ``j``
is ``j * nx + i``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

GOLDEN_RATIO = 1.618


@dataclass(frozen=True)
class ElementGrid:
    """Rectangular lattice of antenna elements."""

    nx: int
    ny: int
    spacing: float = 0.5

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid must have at least one element per axis")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")

    @property
    def n_elements(self) -> int:
        return self.nx * self.ny

    def positions(self) -> np.ndarray:
        """(N, 2) element coordinates in wavelengths, row-major flat order."""
        ii, jj = np.meshgrid(np.arange(self.nx), np.arange(self.ny))
        return np.column_stack([ii.ravel(), jj.ravel()]) * self.spacing

    def flat_index(self, i: int, j: int) -> int:
        return j * self.nx + i


@dataclass
class DominoTiling:
    """Perfect cover of an element grid by 2x1 dominoes.

    ``tiles`` is an integer array of shape (T, 2); each row holds the flat
    indices of the two grid-adjacent elements a domino covers.
    """

    grid: ElementGrid
    tiles: np.ndarray

    def __post_init__(self):
        self.tiles = np.asarray(self.tiles, dtype=int)
        validate_tiling(self)

    @property
    def n_tiles(self) -> int:
        return len(self.tiles)

    def phase_centers(self) -> np.ndarray:
        """(T, 2) mean element position of every domino."""
        pos = self.grid.positions()
        return pos[self.tiles].mean(axis=1)


def validate_tiling(tiling: DominoTiling) -> None:
    """Raise ValueError unless the tiles form a perfect domino cover."""
    grid, tiles = tiling.grid, tiling.tiles
    n = grid.n_elements
    if n % 2 != 0:
        raise ValueError("grid with an odd number of elements cannot be tiled")
    if tiles.shape != (n // 2, 2):
        raise ValueError("tile array must cover every element exactly once")
    covered = tiles.ravel()
    if covered.min(initial=0) < 0 or covered.max(initial=-1) >= n:
        raise ValueError("tile indices out of range")
    if len(np.unique(covered)) != n:
        raise ValueError("tiles overlap or leave gaps")
    ia, ja = tiles[:, 0] % grid.nx, tiles[:, 0] // grid.nx
    ib, jb = tiles[:, 1] % grid.nx, tiles[:, 1] // grid.nx
    adjacent = np.abs(ia - ib) + np.abs(ja - jb) == 1
    if not np.all(adjacent):
        raise ValueError("every domino must cover two grid-adjacent elements")


@dataclass
class ArrayGeometry:
    """A concrete aperture: elements plus the tile grouping used for phasing.

    Untiled arrays (one phase shifter per element) are represented with
    singleton tiles.  ``subarray_of_tile`` maps each tile to a rigid subarray
    when the geometry was produced by sparsification; otherwise it is None.
    """

    elements: np.ndarray
    tiles: list[tuple[int, ...]]
    design_frequency_hz: float = 28e9
    subarray_of_tile: np.ndarray | None = None

    def __post_init__(self):
        self.elements = np.asarray(self.elements, dtype=float)
        if self.elements.ndim != 2 or self.elements.shape[1] != 2:
            raise ValueError("elements must be an (N, 2) array")
        covered = sorted(i for t in self.tiles for i in t)
        if covered != list(range(len(self.elements))):
            raise ValueError("tiles must partition the element set")
        if self.subarray_of_tile is not None:
            self.subarray_of_tile = np.asarray(self.subarray_of_tile, dtype=int)
            if len(self.subarray_of_tile) != len(self.tiles):
                raise ValueError("subarray_of_tile must have one entry per tile")

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_tiles(self) -> int:
        return len(self.tiles)

    @property
    def phase_centers(self) -> np.ndarray:
        """(T, 2) phase-shifter positions (mean element position per tile)."""
        return np.array([self.elements[list(t)].mean(axis=0) for t in self.tiles])

    @property
    def tile_of_element(self) -> np.ndarray:
        out = np.empty(self.n_elements, dtype=int)
        for t, members in enumerate(self.tiles):
            out[list(members)] = t
        return out

    def centroid(self) -> np.ndarray:
        return self.elements.mean(axis=0)


def make_uniform_grid(nx: int, ny: int, spacing: float = 0.5,
                      design_frequency_hz: float = 28e9) -> ArrayGeometry:
    """Conventional uniform planar array: no tiling, per-element phasing."""
    grid = ElementGrid(nx, ny, spacing)
    tiles = [(n,) for n in range(grid.n_elements)]
    return ArrayGeometry(grid.positions(), tiles, design_frequency_hz)


def geometry_from_tiling(tiling: DominoTiling,
                         design_frequency_hz: float = 28e9) -> ArrayGeometry:
    """Fully tiled aperture with one phase shifter per domino."""
    tiles = [tuple(pair) for pair in tiling.tiles.tolist()]
    return ArrayGeometry(tiling.grid.positions(), tiles, design_frequency_hz)


def sunflower_centers(pitch: float, count: int, angle_ratio: float = GOLDEN_RATIO,
                      center: np.ndarray | None = None) -> np.ndarray:
    """Vogel sunflower lattice: point m at radius pitch*sqrt(m/pi), angle 2*pi*m*angle_ratio.

    Points are indexed m = 1..count, so the lattice has no point at its
    center.  ``center`` shifts the whole lattice (default: origin).
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if pitch <= 0:
        raise ValueError("pitch must be positive")
    m = np.arange(1, count + 1)
    rho = pitch * np.sqrt(m / np.pi)
    psi = 2.0 * np.pi * m * angle_ratio
    pts = np.column_stack([rho * np.cos(psi), rho * np.sin(psi)])
    if center is not None:
        pts = pts + np.asarray(center, dtype=float)
    return pts


def sunflower_count_for_radius(pitch: float, radius: float) -> int:
    """Number of sunflower points with radius <= the given radius."""
    if radius < pitch / np.sqrt(np.pi):
        return 0
    return int(np.floor(np.pi * (radius / pitch) ** 2))


def min_inter_subarray_tile_distance(geometry: ArrayGeometry) -> float:
    """Smallest phase-center distance between tiles of different subarrays."""
    if geometry.subarray_of_tile is None:
        raise ValueError("geometry has no subarray assignment")
    centers = geometry.phase_centers
    labels = geometry.subarray_of_tile
    diff = centers[:, None, :] - centers[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    cross = labels[:, None] != labels[None, :]
    if not cross.any():
        raise ValueError("need at least two subarrays")
    return float(dist[cross].min())


def beams_overlap(beam_a: tuple[float, float], beam_b: tuple[float, float],
                  r_b: float) -> bool:
    """True when two beam centers in (u, v)-space are closer than r_b."""
    du = beam_a[0] - beam_b[0]
    dv = beam_a[1] - beam_b[1]
    return du * du + dv * dv < r_b * r_b


@dataclass
class SubarrayLayout:
    """Rigidly movable subarrays: every tile keeps its offset from the center.

    ``tile_offsets[s]`` holds (T_s, 2) phase-center offsets and
    ``element_offsets[s]`` the matching (2*T_s, 2) element offsets, both
    relative to ``centers[s]``.
    """

    centers: np.ndarray
    tile_offsets: list[np.ndarray]
    element_offsets: list[np.ndarray]
    design_frequency_hz: float = 28e9
    design_wavelength: float = 1.0

    def __post_init__(self):
        self.centers = np.asarray(self.centers, dtype=float)
        if len(self.tile_offsets) != len(self.centers):
            raise ValueError("one tile-offset block per subarray required")
        if len(self.element_offsets) != len(self.centers):
            raise ValueError("one element-offset block per subarray required")

    @property
    def n_subarrays(self) -> int:
        return len(self.centers)

    @property
    def n_tiles(self) -> int:
        return sum(len(t) for t in self.tile_offsets)

    @property
    def n_elements(self) -> int:
        return sum(len(e) for e in self.element_offsets)

    def tile_positions(self) -> np.ndarray:
        """(T, 2) absolute phase-center positions, subarray-major order."""
        return np.vstack([self.centers[s] + self.tile_offsets[s]
                          for s in range(self.n_subarrays)])

    def element_positions(self) -> np.ndarray:
        """(N, 2) absolute element positions, subarray-major order."""
        return np.vstack([self.centers[s] + self.element_offsets[s]
                          for s in range(self.n_subarrays)])

    def shifted(self, shifts: np.ndarray) -> "SubarrayLayout":
        """New layout with per-subarray (dx, dy) added to the centers."""
        shifts = np.asarray(shifts, dtype=float)
        if shifts.shape != self.centers.shape:
            raise ValueError("shifts must be (S, 2)")
        return SubarrayLayout(self.centers + shifts,
                              [t.copy() for t in self.tile_offsets],
                              [e.copy() for e in self.element_offsets],
                              self.design_frequency_hz,
                              self.design_wavelength)

    def to_geometry(self) -> ArrayGeometry:
        """Flatten to an ArrayGeometry with per-tile subarray labels."""
        elements = self.element_positions()
        tiles = []
        labels = []
        offset = 0
        for s in range(self.n_subarrays):
            n_t = len(self.tile_offsets[s])
            for t in range(n_t):
                tiles.append((offset + 2 * t, offset + 2 * t + 1))
                labels.append(s)
            offset += 2 * n_t
        return ArrayGeometry(elements, tiles, self.design_frequency_hz,
                             subarray_of_tile=np.array(labels))


def layout_from_geometry(geometry: ArrayGeometry,
                         centers: np.ndarray) -> SubarrayLayout:
    """Group a subarray-labelled geometry around the given centers."""
    if geometry.subarray_of_tile is None:
        raise ValueError("geometry has no subarray assignment")
    centers = np.asarray(centers, dtype=float)
    labels = geometry.subarray_of_tile
    pc = geometry.phase_centers
    tile_offsets, element_offsets = [], []
    for s in range(len(centers)):
        tile_ids = np.flatnonzero(labels == s)
        if len(tile_ids) == 0:
            raise ValueError("every subarray must own at least one tile")
        tile_offsets.append(pc[tile_ids] - centers[s])
        members = [i for t in tile_ids for i in geometry.tiles[t]]
        element_offsets.append(geometry.elements[members] - centers[s])
    return SubarrayLayout(centers, tile_offsets, element_offsets,
                          geometry.design_frequency_hz)


def save_geometry(geometry: ArrayGeometry, path: str,
                  metadata: dict | None = None) -> None:
    """Write the JSON interchange form of a geometry."""
    subarrays = None
    if geometry.subarray_of_tile is not None:
        n_sub = int(geometry.subarray_of_tile.max()) + 1
        subarrays = [[int(t) for t in np.flatnonzero(geometry.subarray_of_tile == s)]
                     for s in range(n_sub)]
    doc = {
        "elements": [[float(x), float(y)] for x, y in geometry.elements],
        "tiles": [list(map(int, t)) for t in geometry.tiles],
        "subarrays": subarrays,
        "design_frequency_hz": geometry.design_frequency_hz,
    }
    if metadata:
        doc["_meta"] = metadata
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_geometry(path: str) -> ArrayGeometry:
    """Read a geometry written by :func:`save_geometry`."""
    with open(path) as fh:
        doc = json.load(fh)
    tiles = [tuple(t) for t in doc["tiles"]]
    subarray_of_tile = None
    if doc.get("subarrays"):
        subarray_of_tile = np.empty(len(tiles), dtype=int)
        for s, members in enumerate(doc["subarrays"]):
            subarray_of_tile[members] = s
    return ArrayGeometry(np.array(doc["elements"], dtype=float), tiles,
                         float(doc["design_frequency_hz"]), subarray_of_tile)
