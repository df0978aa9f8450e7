"""Lattice definitions, sublattice splits, and the hard-core constraint checker.

Five lattices are supported.  Each is k-partite; the sublattices are named
after the fill-in order circle -> dot -> triangle -> diamond.  Sites are plain
tuples:

* SQUARE, SQUARE_MOORE, TRIANGULAR: ``(x, y)`` integer coordinates.
* HONEYCOMB, KAGOME: ``(x, y, t)`` where ``(x, y)`` indexes a unit cell and
  ``t`` the site within the cell (honeycomb: 2 sites, kagome: 3 sites).

TRIANGULAR uses axial coordinates with neighbor offsets
(+-1,0), (0,+-1), (1,-1), (-1,1); the three sublattices are (x - y) mod 3.
KAGOME is the line graph of the honeycomb: site (x, y, t) is kagome vertex
t of cell (x, y); every site lies in exactly two triangles and has four
neighbors.  SQUARE_MOORE is the square lattice with the 8-site Chebyshev
neighborhood; its four sublattices are the parity classes (x mod 2, y mod 2).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class LatticeKind(enum.Enum):
    SQUARE = "square"
    HONEYCOMB = "honeycomb"
    TRIANGULAR = "triangular"
    KAGOME = "kagome"
    SQUARE_MOORE = "square_moore"


@dataclass(frozen=True)
class LatticeSpec:
    """Static description of one lattice.

    neighborhood_exponents[i] is the number of already-filled neighbors a
    stage-i site has; that site is unforced iff all of them carry 0.
    """

    kind: LatticeKind
    coordination: int
    partite_count: int
    fill_order: tuple[str, ...]
    neighborhood_exponents: tuple[int, ...]


_SPECS = {
    LatticeKind.SQUARE: LatticeSpec(
        LatticeKind.SQUARE, 4, 2, ("circle", "dot"), (0, 4)),
    LatticeKind.HONEYCOMB: LatticeSpec(
        LatticeKind.HONEYCOMB, 3, 2, ("circle", "dot"), (0, 3)),
    LatticeKind.TRIANGULAR: LatticeSpec(
        LatticeKind.TRIANGULAR, 6, 3, ("circle", "dot", "triangle"), (0, 3, 6)),
    LatticeKind.KAGOME: LatticeSpec(
        LatticeKind.KAGOME, 4, 3, ("circle", "dot", "triangle"), (0, 2, 4)),
    LatticeKind.SQUARE_MOORE: LatticeSpec(
        LatticeKind.SQUARE_MOORE, 8, 4,
        ("circle", "dot", "triangle", "diamond"), (0, 2, 6, 8)),
}


def build_lattice(kind: LatticeKind) -> LatticeSpec:
    return _SPECS[kind]


# Neighbor offsets.  For cell-based lattices each entry maps a site index t
# to a list of (dx, dy, t2) triples.

_TRI_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))

# Honeycomb: t=0 (A) connects to the three B sites of cells (x,y), (x-1,y),
# (x,y-1); t=1 (B) is the mirror image.
_HONEY_NBRS = {
    0: ((0, 0, 1), (-1, 0, 1), (0, -1, 1)),
    1: ((0, 0, 0), (1, 0, 0), (0, 1, 0)),
}

# Kagome via the honeycomb line graph: kagome vertex (x,y,t) = honeycomb edge
# e_t of cell (x,y) where e0 = A(x,y)-B(x,y), e1 = A(x,y)-B(x-1,y),
# e2 = A(x,y)-B(x,y-1).  Two vertices are adjacent iff their edges share a
# honeycomb endpoint, which yields one "A triangle" per cell {e0,e1,e2} and
# one "B triangle" per cell {e0(x,y), e1(x+1,y), e2(x,y+1)}.
_KAGOME_NBRS = {
    0: ((0, 0, 1), (0, 0, 2), (1, 0, 1), (0, 1, 2)),
    1: ((0, 0, 0), (0, 0, 2), (-1, 0, 0), (-1, 1, 2)),
    2: ((0, 0, 0), (0, 0, 1), (0, -1, 0), (1, -1, 1)),
}


def _validate_dims(kind: LatticeKind, dims) -> tuple[int, int]:
    w, h = int(dims[0]), int(dims[1])
    if w < 2 or h < 2:
        raise ValueError(f"torus dimensions must be at least 2x2, got {w}x{h}")
    if kind in (LatticeKind.SQUARE, LatticeKind.SQUARE_MOORE):
        if w % 2 or h % 2:
            raise ValueError(
                f"{kind.value} torus needs even side lengths for a consistent "
                f"2-coloring, got {w}x{h}")
    elif kind is LatticeKind.TRIANGULAR:
        if w % 3 or h % 3:
            raise ValueError(
                f"triangular torus needs side lengths divisible by 3, got {w}x{h}")
    return w, h


def _site_in_range(kind: LatticeKind, dims, site) -> bool:
    w, h = dims
    if kind in (LatticeKind.HONEYCOMB, LatticeKind.KAGOME):
        if len(site) != 3:
            return False
        x, y, t = site
        tmax = 2 if kind is LatticeKind.HONEYCOMB else 3
        return 0 <= x < w and 0 <= y < h and 0 <= t < tmax
    if len(site) != 2:
        return False
    x, y = site
    return 0 <= x < w and 0 <= y < h


def neighbor_sites(spec: LatticeSpec, config_dims, site) -> list:
    """All nearest neighbors of `site` on the torus, as a list of sites.

    Returns exactly spec.coordination entries; on very small tori some may
    coincide (parallel edges), but a site is never its own neighbor.
    """
    kind = spec.kind
    w, h = _validate_dims(kind, config_dims)
    if not _site_in_range(kind, (w, h), site):
        raise ValueError(f"site {site!r} out of range for {kind.value} {w}x{h}")
    if kind is LatticeKind.SQUARE:
        x, y = site
        return [((x + 1) % w, y), ((x - 1) % w, y),
                (x, (y + 1) % h), (x, (y - 1) % h)]
    if kind is LatticeKind.SQUARE_MOORE:
        x, y = site
        return [((x + dx) % w, (y + dy) % h)
                for dx in (-1, 0, 1) for dy in (-1, 0, 1)
                if (dx, dy) != (0, 0)]
    if kind is LatticeKind.TRIANGULAR:
        x, y = site
        return [((x + dx) % w, (y + dy) % h) for dx, dy in _TRI_OFFSETS]
    if kind is LatticeKind.HONEYCOMB:
        x, y, t = site
        return [((x + dx) % w, (y + dy) % h, t2) for dx, dy, t2 in _HONEY_NBRS[t]]
    x, y, t = site
    return [((x + dx) % w, (y + dy) % h, t2) for dx, dy, t2 in _KAGOME_NBRS[t]]


def sublattice_of(spec: LatticeSpec, site) -> str:
    """Sublattice label of a site (a pure function of its coordinates)."""
    kind = spec.kind
    if kind is LatticeKind.SQUARE:
        x, y = site
        return spec.fill_order[(x + y) % 2]
    if kind is LatticeKind.SQUARE_MOORE:
        x, y = site
        return spec.fill_order[(x % 2) + 2 * (y % 2)]
    if kind is LatticeKind.TRIANGULAR:
        x, y = site
        return spec.fill_order[(x - y) % 3]
    return spec.fill_order[site[2]]


@dataclass
class TorusConfiguration:
    """A periodic 0/1 configuration on a finite torus.

    `values` has shape (height, width) for the point lattices and
    (height, width, sites_per_cell) for honeycomb/kagome, indexed
    values[y, x] / values[y, x, t].
    """

    kind: LatticeKind
    dims: tuple[int, int]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        w, h = _validate_dims(self.kind, self.dims)
        self.dims = (w, h)
        expect = self._shape(self.kind, w, h)
        v = np.asarray(self.values, dtype=np.int8)
        if v.shape != expect:
            raise ValueError(f"values shape {v.shape} != expected {expect}")
        if not np.isin(v, (0, 1)).all():
            raise ValueError("values must be 0/1")
        self.values = v

    @staticmethod
    def _shape(kind, w, h):
        if kind is LatticeKind.HONEYCOMB:
            return (h, w, 2)
        if kind is LatticeKind.KAGOME:
            return (h, w, 3)
        return (h, w)

    @classmethod
    def empty(cls, kind: LatticeKind, dims) -> "TorusConfiguration":
        w, h = _validate_dims(kind, dims)
        return cls(kind, (w, h), np.zeros(cls._shape(kind, w, h), dtype=np.int8))

    def sites(self):
        w, h = self.dims
        if self.kind in (LatticeKind.HONEYCOMB, LatticeKind.KAGOME):
            tmax = self.values.shape[2]
            for y in range(h):
                for x in range(w):
                    for t in range(tmax):
                        yield (x, y, t)
        else:
            for y in range(h):
                for x in range(w):
                    yield (x, y)

    def __getitem__(self, site):
        if len(site) == 3:
            x, y, t = site
            return int(self.values[y, x, t])
        x, y = site
        return int(self.values[y, x])

    def __setitem__(self, site, value):
        if len(site) == 3:
            x, y, t = site
            self.values[y, x, t] = value
        else:
            x, y = site
            self.values[y, x] = value


def _edge_overlaps(config: TorusConfiguration):
    """One boolean array per edge direction: both endpoints carry 1."""
    g = config.values
    kind = config.kind
    if kind is LatticeKind.SQUARE:
        return [g & np.roll(g, -1, axis=1), g & np.roll(g, -1, axis=0)]
    if kind is LatticeKind.SQUARE_MOORE:
        down = np.roll(g, -1, axis=0)
        return [g & np.roll(g, -1, axis=1), g & down,
                g & np.roll(down, -1, axis=1), g & np.roll(down, 1, axis=1)]
    if kind is LatticeKind.TRIANGULAR:
        return [g & np.roll(g, -1, axis=1), g & np.roll(g, -1, axis=0),
                g & np.roll(np.roll(g, -1, axis=1), 1, axis=0)]
    if kind is LatticeKind.HONEYCOMB:
        a, b = g[..., 0], g[..., 1]
        return [a & b, a & np.roll(b, 1, axis=1), a & np.roll(b, 1, axis=0)]
    t0, t1, t2 = g[..., 0], g[..., 1], g[..., 2]
    t1r = np.roll(t1, -1, axis=1)   # t1 of cell (x+1, y)
    t2r = np.roll(t2, -1, axis=0)   # t2 of cell (x, y+1)
    return [t0 & t1, t0 & t2, t1 & t2, t0 & t1r, t0 & t2r, t1r & t2r]


def verify_hard_core(config: TorusConfiguration) -> bool:
    """True iff no two adjacent sites both carry 1."""
    return not any(e.any() for e in _edge_overlaps(config))


def sublattice_mask(config: TorusConfiguration, label: str) -> np.ndarray:
    """Boolean mask over config.values selecting one sublattice."""
    spec = build_lattice(config.kind)
    if label not in spec.fill_order:
        raise ValueError(f"unknown sublattice {label!r} for {config.kind.value}")
    stage = spec.fill_order.index(label)
    w, h = config.dims
    yy, xx = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    kind = config.kind
    if kind is LatticeKind.SQUARE:
        return (xx + yy) % 2 == stage
    if kind is LatticeKind.SQUARE_MOORE:
        return (xx % 2) + 2 * (yy % 2) == stage
    if kind is LatticeKind.TRIANGULAR:
        return (xx - yy) % 3 == stage
    mask = np.zeros(config.values.shape, dtype=bool)
    mask[..., stage] = True
    return mask


def sublattice_density(config: TorusConfiguration, label: str) -> float:
    """Fraction of 1's among the sites of one sublattice."""
    mask = sublattice_mask(config, label)
    return float(config.values[mask].mean())
