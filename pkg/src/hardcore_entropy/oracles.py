"""Independent verification machinery.

Nothing here reuses the bound formulas: transfer matrices, Monte Carlo
fill-in, exhaustive window enumeration, and exact rational blocking-share
arithmetic each provide a second route to numbers the rest of the package
computes analytically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import bisect

from .bounds import LN2, entropy_bernoulli
from .lattices import (
    LatticeKind,
    TorusConfiguration,
    _HONEY_NBRS,
    _KAGOME_NBRS,
    _TRI_OFFSETS,
    build_lattice,
    neighbor_sites,
    sublattice_of,
)

MAX_STRIP_WIDTH = 14
MAX_WINDOW_SITES = 24


# ---------------------------------------------------------------- strips

def entropy_1d() -> float:
    """Per-site entropy of the 1-D chain: largest eigenvalue of [[1,1],[1,0]]."""
    lam = float(np.linalg.eigvalsh(np.array([[1.0, 1.0], [1.0, 0.0]]))[-1])
    return math.log(lam)


@dataclass(frozen=True)
class StripSpec:
    width: int
    boundary: str = "free"

    def __post_init__(self):
        if not 1 <= self.width <= MAX_STRIP_WIDTH:
            raise ValueError(
                f"strip width {self.width} outside the supported range "
                f"1..{MAX_STRIP_WIDTH} (transfer matrix grows as a Fibonacci "
                f"number of the width)")
        if self.boundary not in ("free", "periodic"):
            raise ValueError(f"boundary must be free or periodic, "
                             f"got {self.boundary!r}")


def legal_columns(width: int, boundary: str = "free") -> np.ndarray:
    """All 0/1 columns of the given height with no two adjacent 1s."""
    masks = np.arange(1 << width, dtype=np.int64)
    ok = (masks & (masks >> 1)) == 0
    if boundary == "periodic" and width > 1:
        ok &= ~((masks & 1).astype(bool) & (masks >> (width - 1) & 1).astype(bool))
    return masks[ok]


def strip_entropy(spec, boundary: str = "free") -> float:
    """Entropy per site of an infinite strip of the given width.

    Accepts a StripSpec or a bare width.  Dominant transfer-matrix
    eigenvalue by power iteration to relative tolerance 1e-13.
    """
    if not isinstance(spec, StripSpec):
        spec = StripSpec(int(spec), boundary)
    cols = legal_columns(spec.width, spec.boundary)
    t = ((cols[:, None] & cols[None, :]) == 0).astype(float)
    v = np.full(len(cols), 1.0 / math.sqrt(len(cols)))
    lam = 0.0
    for _ in range(100000):
        w = t @ v
        lam_new = float(v @ w)
        v = w / np.linalg.norm(w)
        if abs(lam_new - lam) <= 1e-13 * max(lam_new, 1.0):
            lam = lam_new
            break
        lam = lam_new
    return math.log(lam) / spec.width


# ---------------------------------------------------------------- sampler

def _stage_probabilities(kind: LatticeKind, params) -> tuple[float, ...]:
    spec = build_lattice(kind)
    k = spec.partite_count
    probs = tuple(float(p) for p in params)
    if len(probs) == k - 1:
        probs = probs + (0.5,)
    elif len(probs) != k:
        raise ValueError(
            f"{kind.value} takes {k - 1} stage probabilities (final stage "
            f"1/2) or {k} explicit ones, got {len(probs)}")
    for p in probs:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"stage probability {p} outside [0, 1]")
    return probs


def stage_unforced_analytic(kind: LatticeKind, params) -> tuple[float, ...]:
    """Expected fraction of each stage's sites left unforced, given all
    earlier stages were filled with their Bernoulli parameters."""
    probs = _stage_probabilities(kind, params)
    p = probs[0]
    if kind is LatticeKind.SQUARE:
        return (1.0, (1 - p) ** 4)
    if kind is LatticeKind.HONEYCOMB:
        return (1.0, (1 - p) ** 3)
    q = probs[1]
    s = 1 - (1 - p) * q
    if kind is LatticeKind.TRIANGULAR:
        return (1.0, (1 - p) ** 3, (1 - p) ** 3 * s ** 3)
    if kind is LatticeKind.KAGOME:
        return (1.0, (1 - p) ** 2, (1 - p) ** 2 * s ** 2)
    r = probs[2]
    return (1.0, (1 - p) ** 2, (1 - p) ** 2 * s ** 4,
            (1 - p) ** 4 * (1 - q) ** 2 * (1 - s ** 2 * r) ** 2)


def _stage_masks(kind: LatticeKind, shape) -> list[np.ndarray]:
    if kind in (LatticeKind.HONEYCOMB, LatticeKind.KAGOME):
        h, w, tmax = shape
        return [np.arange(tmax)[None, None, :] == t for t in range(tmax)]
    h, w = shape
    x = np.arange(w)[None, :]
    y = np.arange(h)[:, None]
    if kind is LatticeKind.SQUARE:
        s = (x + y) % 2
        return [s == 0, s == 1]
    if kind is LatticeKind.SQUARE_MOORE:
        s = (x % 2) + 2 * (y % 2)
        return [s == i for i in range(4)]
    s = (x - y) % 3
    return [s == i for i in range(3)]


def _shift(plane: np.ndarray, dx: int, dy: int) -> np.ndarray:
    # result[y, x] = plane[(y + dy) % h, (x + dx) % w]
    return np.roll(np.roll(plane, -dy, axis=0), -dx, axis=1)


def _occupied_neighbor(kind: LatticeKind, g: np.ndarray) -> np.ndarray:
    """Boolean array: some neighbor of this site currently carries a 1."""
    if kind is LatticeKind.SQUARE:
        offs = ((1, 0), (-1, 0), (0, 1), (0, -1))
    elif kind is LatticeKind.SQUARE_MOORE:
        offs = tuple((dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)
                     if (dx, dy) != (0, 0))
    elif kind is LatticeKind.TRIANGULAR:
        offs = _TRI_OFFSETS
    else:
        nbrs = _HONEY_NBRS if kind is LatticeKind.HONEYCOMB else _KAGOME_NBRS
        out = np.zeros(g.shape, dtype=bool)
        for t, entries in nbrs.items():
            acc = np.zeros(g.shape[:2], dtype=bool)
            for dx, dy, t2 in entries:
                acc |= _shift(g[..., t2], dx, dy).astype(bool)
            out[..., t] = acc
        return out
    blocked = np.zeros(g.shape, dtype=bool)
    for dx, dy in offs:
        blocked |= _shift(g, dx, dy).astype(bool)
    return blocked


def _tile_stderr(indicator: np.ndarray, where: np.ndarray,
                 tile: int = 8) -> float:
    """Standard error of the mean of indicator over `where` sites, from the
    spread of per-tile means (captures short-range correlation)."""
    h, w = indicator.shape[:2]
    vals = indicator.reshape(h, w, -1).astype(float)
    sel = where.reshape(h, w, -1) if where.shape == indicator.shape else \
        np.broadcast_to(where.reshape(h, w, -1), vals.shape)
    if h % tile or w % tile:
        n = sel.sum()
        m = float((vals * sel).sum() / n)
        return math.sqrt(max(m * (1 - m), 0.0) / n)
    a = (vals * sel).reshape(h // tile, tile, w // tile, tile, -1)
    c = sel.reshape(h // tile, tile, w // tile, tile, -1)
    sums = a.sum(axis=(1, 3, 4))
    counts = c.sum(axis=(1, 3, 4))
    means = sums / counts
    ntiles = means.size
    return float(means.std(ddof=1)) / math.sqrt(ntiles)


@dataclass(frozen=True)
class StageStats:
    """Per-stage sampler statistics: unforced fraction and 1-density,
    empirical vs analytic, with tile-based standard errors."""

    stage: str
    probability: float
    n_sites: int
    unforced_analytic: float
    unforced_empirical: float
    unforced_stderr: float
    density_analytic: float
    density_empirical: float
    density_stderr: float

    def rows(self) -> list[dict]:
        common = {"stage": self.stage, "probability": self.probability,
                  "n_sites": self.n_sites}
        return [
            {**common, "metric": "unforced", "analytic": self.unforced_analytic,
             "empirical": self.unforced_empirical,
             "stderr": self.unforced_stderr},
            {**common, "metric": "density", "analytic": self.density_analytic,
             "empirical": self.density_empirical,
             "stderr": self.density_stderr},
        ]


def fill_in_sample(kind: LatticeKind, params, dims, seed: int):
    """Fill a torus sublattice by sublattice with the given stage
    probabilities; a site receives a 1 with its stage probability iff no
    already-placed neighbor carries a 1.

    Returns (TorusConfiguration, [StageStats per stage]).  The seed is
    split into one independent stream per stage, so stage s draws are
    unaffected by how many earlier stages exist.
    """
    spec = build_lattice(kind)
    probs = _stage_probabilities(kind, params)
    config = TorusConfiguration.empty(kind, dims)
    g = config.values
    masks = _stage_masks(kind, g.shape)
    analytic = stage_unforced_analytic(kind, probs)
    streams = [np.random.default_rng(s)
               for s in np.random.SeedSequence(seed).spawn(len(probs))]
    stats = []
    for s, label in enumerate(spec.fill_order):
        mask = np.broadcast_to(masks[s], g.shape)
        blocked = _occupied_neighbor(kind, g) if s else \
            np.zeros(g.shape, dtype=bool)
        unforced = mask & ~blocked
        draws = streams[s].random(g.shape) < probs[s]
        g[unforced & draws] = 1
        n_sites = int(mask.sum())
        stats.append(StageStats(
            stage=label, probability=probs[s], n_sites=n_sites,
            unforced_analytic=analytic[s],
            unforced_empirical=float(unforced.sum() / n_sites),
            unforced_stderr=_tile_stderr(unforced, mask),
            density_analytic=probs[s] * analytic[s],
            density_empirical=float(g[mask].mean()),
            density_stderr=_tile_stderr(g == 1, mask)))
    return config, stats


# ------------------------------------------------------- window enumeration

_REFERENCE_DIMS = {
    LatticeKind.SQUARE: (12, 12),
    LatticeKind.SQUARE_MOORE: (12, 12),
    LatticeKind.TRIANGULAR: (12, 12),
    LatticeKind.HONEYCOMB: (8, 8),
    LatticeKind.KAGOME: (8, 8),
}


def _stage_of(spec, site) -> int:
    return spec.fill_order.index(sublattice_of(spec, site))


def _target_site(spec, dims, stage: int):
    w, h = dims
    cx, cy = w // 2, h // 2
    candidates = ([(x, y) for y in range(cy, h) for x in range(cx, w)]
                  if spec.kind in (LatticeKind.SQUARE, LatticeKind.SQUARE_MOORE,
                                   LatticeKind.TRIANGULAR)
                  else [(cx, cy, t) for t in range(spec.partite_count + 1)])
    for site in candidates:
        try:
            if _stage_of(spec, site) == stage:
                return site
        except (ValueError, IndexError):
            continue
    raise ValueError(f"no stage-{stage} site found")


def influence_window(kind: LatticeKind, stage: int) -> tuple:
    """The earlier-stage sites whose values determine whether a stage-`stage`
    site is unforced: its earlier neighbors, closed under taking earlier
    neighbors of everything added."""
    spec = build_lattice(kind)
    if not 1 <= stage < spec.partite_count:
        raise ValueError(f"stage must be in 1..{spec.partite_count - 1}")
    dims = _REFERENCE_DIMS[kind]
    target = _target_site(spec, dims, stage)
    window = []
    frontier = [target]
    seen = {target}
    while frontier:
        site = frontier.pop()
        s = _stage_of(spec, site)
        for nb in neighbor_sites(spec, dims, site):
            if _stage_of(spec, nb) < s and nb not in seen:
                seen.add(nb)
                window.append(nb)
                frontier.append(nb)
    return target, tuple(window)


def window_probability_exhaustive(kind: LatticeKind, params, stage: int,
                                  window=None) -> float:
    """P(a stage-`stage` site is unforced), by exact enumeration of every
    assignment of its influence window under the sequential measure.

    The window must be dependency-closed (every non-initial-stage member
    has all its earlier neighbors inside), which makes the restricted
    measure the exact marginal.  window=None uses the canonical closure.
    """
    spec = build_lattice(kind)
    probs = _stage_probabilities(kind, params)
    dims = _REFERENCE_DIMS[kind]
    if window is None:
        target, window = influence_window(kind, stage)
    else:
        target = _target_site(spec, dims, stage)
        window = tuple(tuple(s) for s in window)
    m = len(window)
    if m > MAX_WINDOW_SITES:
        raise ValueError(f"window of {m} sites exceeds the exhaustive "
                         f"enumeration cap {MAX_WINDOW_SITES}")
    order = sorted(window, key=lambda s: _stage_of(spec, s))
    pos = {site: j for j, site in enumerate(order)}

    def earlier_neighbors(site, s):
        out = []
        for nb in set(neighbor_sites(spec, dims, site)):
            if _stage_of(spec, nb) < s:
                if nb not in pos:
                    raise ValueError(
                        f"window is not dependency-closed: {site} needs {nb}")
                out.append(pos[nb])
        return out

    idx = np.arange(1 << m, dtype=np.int64)
    bits = [(idx >> j) & 1 for j in range(m)]
    weights = np.ones(1 << m)
    for j, site in enumerate(order):
        s = _stage_of(spec, site)
        p = probs[s]
        b = bits[j]
        if s == 0:
            weights *= np.where(b == 1, p, 1 - p)
            continue
        forced = np.zeros(1 << m, dtype=bool)
        for jj in earlier_neighbors(site, s):
            forced |= bits[jj] == 1
        weights *= np.where(forced, np.where(b == 1, 0.0, 1.0),
                            np.where(b == 1, p, 1 - p))
    ok = np.ones(1 << m, dtype=bool)
    for jj in earlier_neighbors(target, stage):
        ok &= bits[jj] == 0
    return float(weights[ok].sum())


# ------------------------------------------------------- blocking constants

def _blocking_geometry():
    center = (0, 0)
    odd_sites = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    triples = []
    ring = []
    for o in odd_sites:
        others = []
        for d in [(1, 0), (-1, 0), (0, 1), (0, -1)]:
            e = (o[0] + d[0], o[1] + d[1])
            if e != center:
                if e not in ring:
                    ring.append(e)
                others.append(e)
        triples.append(others)
    return ring, triples


def blocking_constant_lower() -> Fraction:
    """Expected number of odd sites a single even 1 blocks exclusively,
    crediting 1/(1+k) for an odd neighbor also blocked by k other even 1s;
    the eight surrounding even sites are enumerated under B(1/2)."""
    ring, triples = _blocking_geometry()
    index = {e: i for i, e in enumerate(ring)}
    total = Fraction(0)
    for bits in range(1 << len(ring)):
        credit = Fraction(0)
        for others in triples:
            k = sum((bits >> index[e]) & 1 for e in others)
            credit += Fraction(1, 1 + k)
        total += credit
    return total / (1 << len(ring))


def blocking_share_per_odd_site() -> Fraction:
    """E[1/(1+Binomial(3,1/2))] = 15/32, one odd neighbor's share."""
    return blocking_constant_lower() / 4


def density_upper_from_blocking(c: Fraction | None = None) -> Fraction:
    """Even-sublattice density upper bound 1/(2+c) implied by a blocking
    constant lower bound c (default: the exact 15/8)."""
    if c is None:
        c = blocking_constant_lower()
    return 1 / (2 + Fraction(c))


def blocking_constant_upper(h_ref: float = 0.4075) -> tuple[float, float]:
    """Largest blocking constant consistent with a reference entropy.

    Solves 1/2 [ h_B(rho) + 2 rho ln 2 ] = h_ref for rho = 1/(2+c) by
    bisection on c in [0, 20]; returns (c_max, rho_min).
    """
    if not 0.0 < h_ref < LN2:
        raise ValueError(f"reference entropy {h_ref} outside (0, ln 2)")

    def gap(c):
        rho = 1.0 / (2.0 + c)
        return 0.5 * (entropy_bernoulli(rho) + 2 * rho * LN2) - h_ref

    lo, hi = 0.0, 20.0
    if gap(lo) * gap(hi) > 0:
        raise ValueError(f"no root in [{lo}, {hi}] for h_ref={h_ref}")
    c_max = float(bisect(gap, lo, hi, xtol=1e-8))
    return c_max, 1.0 / (2.0 + c_max)


# ------------------------------------------------------ reference constants

@dataclass(frozen=True)
class ReferenceConstants:
    """Literature values used as near-truth anchors, not as bounds."""

    entropy: float
    density: float


REFERENCE_CONSTANTS = {
    LatticeKind.SQUARE: ReferenceConstants(0.4075, 0.2266),
    LatticeKind.HONEYCOMB: ReferenceConstants(0.4360, 0.2424),
    LatticeKind.TRIANGULAR: ReferenceConstants(0.3332, 0.1624),
}
