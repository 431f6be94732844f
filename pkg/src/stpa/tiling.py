"""Maximum-entropy domino tiling of rectangular element grids.

The quality of a tiling is scored by the Shannon entropy of its phase-center
histogram: centers are binned per axis on the half-spacing lattice (2*nx - 1
x-bins, 2*ny - 1 y-bins) and the two axis entropies are added.  A simulated
annealer explores the space of perfect tilings with the elementary 2x2 flip
move (two parallel adjacent dominoes rotated by 90 degrees), which connects
all perfect tilings of a simply connected region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import DominoTiling, ElementGrid


@dataclass(frozen=True)
class EntropyScore:
    """Per-axis phase-center entropies, in nats."""

    h_x: float
    h_y: float

    @property
    def total(self) -> float:
        return self.h_x + self.h_y


@dataclass(frozen=True)
class AnnealConfig:
    """Simulated-annealing schedule for :func:`maximize_entropy_tiling`.

    Every iteration proposes one 2x2 block; geometric cooling multiplies the
    temperature by ``cooling`` after each proposal.
    """

    iterations: int = 200_000
    initial_temperature: float = 0.5
    cooling: float = 0.99996

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if self.initial_temperature <= 0:
            raise ValueError("initial temperature must be positive")
        if not 0 < self.cooling <= 1:
            raise ValueError("cooling factor must be in (0, 1]")


def _center_bins(tiling: DominoTiling) -> tuple[np.ndarray, np.ndarray]:
    """Integer bin index per tile and axis: the sum of the two element coords."""
    nx = tiling.grid.nx
    ia, ja = tiling.tiles[:, 0] % nx, tiling.tiles[:, 0] // nx
    ib, jb = tiling.tiles[:, 1] % nx, tiling.tiles[:, 1] // nx
    return ia + ib, ja + jb


def _entropy(counts: np.ndarray, n_tiles: int) -> float:
    p = counts[counts > 0] / n_tiles
    return float(-(p * np.log(p)).sum())


def tiling_entropy(tiling: DominoTiling) -> EntropyScore:
    """Phase-center histogram entropy of a tiling, per axis."""
    bx, by = _center_bins(tiling)
    t = tiling.n_tiles
    cx = np.bincount(bx, minlength=2 * tiling.grid.nx - 1)
    cy = np.bincount(by, minlength=2 * tiling.grid.ny - 1)
    return EntropyScore(_entropy(cx, t), _entropy(cy, t))


def _brick_partner(grid: ElementGrid) -> np.ndarray:
    """Partner array of a brick-pattern tiling (horizontal if nx is even)."""
    nx, ny = grid.nx, grid.ny
    partner = np.empty(grid.n_elements, dtype=np.int64)
    if nx % 2 == 0:
        for j in range(ny):
            base = j * nx
            for i in range(0, nx, 2):
                partner[base + i] = base + i + 1
                partner[base + i + 1] = base + i
    elif ny % 2 == 0:
        for j in range(0, ny, 2):
            for i in range(nx):
                a, b = j * nx + i, (j + 1) * nx + i
                partner[a], partner[b] = b, a
    else:
        raise ValueError("grid with an odd number of elements cannot be tiled")
    return partner


def _partner_to_tiling(grid: ElementGrid, partner: np.ndarray) -> DominoTiling:
    cells = np.arange(grid.n_elements)
    first = cells < partner
    tiles = np.column_stack([cells[first], partner[first]])
    return DominoTiling(grid, tiles)


class _FlipState:
    """Mutable tiling state with O(1) flip moves and entropy bookkeeping."""

    def __init__(self, grid: ElementGrid, partner: np.ndarray):
        self.grid = grid
        self.nx, self.ny = grid.nx, grid.ny
        self.partner = partner.copy()
        self.n_tiles = grid.n_elements // 2
        self.counts_x = np.zeros(2 * grid.nx - 1, dtype=np.int64)
        self.counts_y = np.zeros(2 * grid.ny - 1, dtype=np.int64)
        tiling = _partner_to_tiling(grid, partner)
        bx, by = _center_bins(tiling)
        np.add.at(self.counts_x, bx, 1)
        np.add.at(self.counts_y, by, 1)
        # running sums of c*ln(c); entropy = ln(T) - s/T
        self.s_x = float(sum(c * math.log(c) for c in self.counts_x if c > 0))
        self.s_y = float(sum(c * math.log(c) for c in self.counts_y if c > 0))

    def entropy(self) -> float:
        log_t = math.log(self.n_tiles)
        return 2.0 * log_t - (self.s_x + self.s_y) / self.n_tiles

    def score(self) -> EntropyScore:
        log_t = math.log(self.n_tiles)
        return EntropyScore(log_t - self.s_x / self.n_tiles,
                            log_t - self.s_y / self.n_tiles)

    def flip_kind(self, i: int, j: int) -> int:
        """0: not flippable, 1: two horizontal dominoes, 2: two vertical."""
        nx = self.nx
        a = j * nx + i
        b, c, d = a + 1, a + nx, a + nx + 1
        partner = self.partner
        if partner[a] == b and partner[c] == d:
            return 1
        if partner[a] == c and partner[b] == d:
            return 2
        return 0

    def flip_delta(self, i: int, j: int, kind: int) -> tuple[float, float]:
        """(ds_x, ds_y) the flip would add to the c*ln(c) sums."""
        if kind == 1:  # horizontal pair -> vertical pair
            removed_x, added_x = (2 * i + 1, 2 * i + 1), (2 * i, 2 * i + 2)
            removed_y, added_y = (2 * j, 2 * j + 2), (2 * j + 1, 2 * j + 1)
        else:          # vertical pair -> horizontal pair
            removed_x, added_x = (2 * i, 2 * i + 2), (2 * i + 1, 2 * i + 1)
            removed_y, added_y = (2 * j + 1, 2 * j + 1), (2 * j, 2 * j + 2)
        return (_delta_s(self.counts_x, removed_x, added_x),
                _delta_s(self.counts_y, removed_y, added_y))

    def apply_flip(self, i: int, j: int, kind: int,
                   ds_x: float, ds_y: float) -> None:
        nx = self.nx
        a = j * nx + i
        b, c, d = a + 1, a + nx, a + nx + 1
        partner = self.partner
        if kind == 1:
            partner[a], partner[c] = c, a
            partner[b], partner[d] = d, b
            removed_x, added_x = (2 * i + 1, 2 * i + 1), (2 * i, 2 * i + 2)
            removed_y, added_y = (2 * j, 2 * j + 2), (2 * j + 1, 2 * j + 1)
        else:
            partner[a], partner[b] = b, a
            partner[c], partner[d] = d, c
            removed_x, added_x = (2 * i, 2 * i + 2), (2 * i + 1, 2 * i + 1)
            removed_y, added_y = (2 * j + 1, 2 * j + 1), (2 * j, 2 * j + 2)
        for bin_ in removed_x:
            self.counts_x[bin_] -= 1
        for bin_ in added_x:
            self.counts_x[bin_] += 1
        for bin_ in removed_y:
            self.counts_y[bin_] -= 1
        for bin_ in added_y:
            self.counts_y[bin_] += 1
        self.s_x += ds_x
        self.s_y += ds_y


def _delta_s(counts: np.ndarray, removed: tuple[int, int],
             added: tuple[int, int]) -> float:
    """Change of sum(c*ln(c)) when two bins lose and two bins gain a count."""
    delta = {}
    for bin_ in removed:
        delta[bin_] = delta.get(bin_, 0) - 1
    for bin_ in added:
        delta[bin_] = delta.get(bin_, 0) + 1
    ds = 0.0
    for bin_, change in delta.items():
        if change == 0:
            continue
        c_old = int(counts[bin_])
        c_new = c_old + change
        if c_old > 0:
            ds -= c_old * math.log(c_old)
        if c_new > 0:
            ds += c_new * math.log(c_new)
    return ds


def random_perfect_tiling(grid: ElementGrid, seed: int | None = 0,
                          n_moves: int | None = None) -> DominoTiling:
    """Approximately uniform perfect tiling: brick start plus random flips.

    ``n_moves`` flip proposals are made at infinite temperature (every
    flippable proposal accepted); the default is 20 per grid cell.
    """
    rng = np.random.default_rng(seed)
    state = _FlipState(grid, _brick_partner(grid))
    if grid.nx < 2 or grid.ny < 2:
        return _partner_to_tiling(grid, state.partner)
    if n_moves is None:
        n_moves = 20 * grid.n_elements
    anchors_i = rng.integers(0, grid.nx - 1, size=n_moves)
    anchors_j = rng.integers(0, grid.ny - 1, size=n_moves)
    for i, j in zip(anchors_i, anchors_j):
        kind = state.flip_kind(i, j)
        if kind:
            ds_x, ds_y = state.flip_delta(i, j, kind)
            state.apply_flip(i, j, kind, ds_x, ds_y)
    return _partner_to_tiling(grid, state.partner)


def maximize_entropy_tiling(grid: ElementGrid,
                            config: AnnealConfig = AnnealConfig(),
                            seed: int | None = 0
                            ) -> tuple[DominoTiling, EntropyScore]:
    """Anneal toward the maximum-entropy tiling of a grid.

    Deterministic for a given seed; the best state seen is returned, so the
    result never scores below the random initial tiling.
    """
    if grid.n_elements % 2 != 0:
        raise ValueError("grid with an odd number of elements cannot be tiled")
    rng = np.random.default_rng(seed)
    start = random_perfect_tiling(grid, seed=rng.integers(2**63))
    partner = np.empty(grid.n_elements, dtype=np.int64)
    partner[start.tiles[:, 0]] = start.tiles[:, 1]
    partner[start.tiles[:, 1]] = start.tiles[:, 0]
    state = _FlipState(grid, partner)
    if grid.nx < 2 or grid.ny < 2 or config.iterations == 0:
        return _partner_to_tiling(grid, state.partner), state.score()

    best_partner = state.partner.copy()
    best_entropy = state.entropy()
    temperature = config.initial_temperature
    n_tiles = state.n_tiles
    chunk = 65536
    done = 0
    while done < config.iterations:
        size = min(chunk, config.iterations - done)
        anchors_i = rng.integers(0, grid.nx - 1, size=size)
        anchors_j = rng.integers(0, grid.ny - 1, size=size)
        uniforms = rng.random(size=size)
        for i, j, u in zip(anchors_i, anchors_j, uniforms):
            kind = state.flip_kind(i, j)
            if kind:
                ds_x, ds_y = state.flip_delta(i, j, kind)
                dh = -(ds_x + ds_y) / n_tiles
                if dh >= 0 or u < math.exp(dh / temperature):
                    state.apply_flip(i, j, kind, ds_x, ds_y)
                    if dh > 0:
                        entropy = state.entropy()
                        if entropy > best_entropy:
                            best_entropy = entropy
                            best_partner[:] = state.partner
            temperature *= config.cooling
        done += size

    best = _FlipState(grid, best_partner)
    return _partner_to_tiling(grid, best_partner), best.score()
