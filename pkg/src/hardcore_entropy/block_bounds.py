"""Entropy lower bounds from n x n block distributions on the square lattice.

The even sublattice is tiled by independent n x n blocks drawn from a
class-symmetric distribution; odd sites are then filled with fair coins
wherever no neighboring 1 forces a 0.  The per-site entropy of the resulting
measure is

    value = 1/2 [ block_entropy_term + unforced_odd_density * ln 2 ]

and both terms are exact polynomials in the class probabilities, so the
bound can be maximized with analytic gradients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import optimize
from .blocks import (
    BlockFamily,
    _marginal_counts,
    boundary_marginals,
    check_class_distribution,
    inclusion_pairs,
    reduce_family,
)
from .bounds import LN2, BoundReport

SIMPLEX_TOL = 1e-10


@dataclass(frozen=True)
class BlockDistribution:
    """Per-class arrangement probabilities over a block family.

    probs[c] is the probability of one specific member of class c, so the
    normalization is sum(multiplicity * probs) = 1.
    """

    family: BlockFamily
    probs: np.ndarray

    def __post_init__(self):
        p = check_class_distribution(self.family, self.probs, tol=SIMPLEX_TOL)
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @property
    def n(self) -> int:
        return self.family.n

    def even_density(self) -> float:
        """Expected fraction of 1s on the even sublattice."""
        pops = _population_counts(self.family)
        return float(pops @ self.probs) / self.n ** 2

    def mask_probabilities(self) -> np.ndarray:
        """Per-arrangement probability of every raw mask."""
        return self.probs[self.family.class_of]


def _population_counts(family: BlockFamily) -> np.ndarray:
    cached = getattr(family, "_population_cache", None)
    if cached is None:
        cached = family.population_counts()
        family._population_cache = cached
    return cached


def uniform_distribution(family: BlockFamily) -> BlockDistribution:
    total = 1 << (family.n * family.n)
    return BlockDistribution(family, np.full(family.class_count, 1.0 / total))


def block_entropy_term(dist: BlockDistribution) -> float:
    """Entropy of the block distribution in nats per even site:
    -(1/n^2) sum multiplicity * p * ln p, with 0 ln 0 = 0."""
    p = dist.probs
    plogp = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    return float(-(dist.family.multiplicities @ plogp)) / dist.n ** 2


def unforced_odd_density(dist: BlockDistribution) -> float:
    """Expected fraction of odd sites left unforced by the block tiling.

    Interior odd sites see one block; boundary odd sites see two blocks
    (independent, so the all-zero probability squares) and corner odd sites
    see four.  Each boundary site is shared by two blocks and each corner
    by four, hence the 1/2 and 1/4 census weights.  The squared and fourth
    powers pair marginals of positions that are D4 images of each other,
    which is exact because class probabilities are D4-invariant.
    """
    bm = boundary_marginals(dist.family, dist.probs)
    s = (bm.interior.sum()
         + 0.5 * (bm.dominoes ** 2).sum()
         + 0.25 * (bm.corners ** 4).sum())
    return float(s) / dist.n ** 2


def bound_value(dist: BlockDistribution) -> float:
    return 0.5 * (block_entropy_term(dist) + unforced_odd_density(dist) * LN2)


def value_and_gradient(family: BlockFamily, probs: np.ndarray):
    """Bound value and its gradient in the class probabilities."""
    n2 = family.n ** 2
    w = family.multiplicities.astype(float)
    a_int, a_dom, a_cor = _marginal_counts(family)
    p = np.asarray(probs, dtype=float)
    logp = np.log(np.maximum(p, 1e-300))
    h = -float(w @ (p * logp)) / n2
    p_int = a_int @ p
    p_dom = a_dom @ p
    p_cor = a_cor @ p
    u = float(p_int.sum() + 0.5 * (p_dom ** 2).sum()
              + 0.25 * (p_cor ** 4).sum()) / n2
    value = 0.5 * (h + u * LN2)
    dh = -w * (logp + 1.0) / n2
    du = (a_int.sum(axis=0) + a_dom.T @ p_dom + a_cor.T @ p_cor ** 3) / n2
    return value, 0.5 * (dh + LN2 * du)


def block_bound(dist: BlockDistribution) -> BoundReport:
    """Assemble the bound report for a given block distribution."""
    u = unforced_odd_density(dist)
    value = 0.5 * (block_entropy_term(dist) + u * LN2)
    return BoundReport(
        lattice="square", scheme="block", value=value, n=dist.n,
        params={"class_probabilities": [float(x) for x in dist.probs]},
        densities=(dist.even_density(), u / 2))


def optimize_block_bound(family: BlockFamily, *, seed: int = 0,
                         starts: int = 8, x0=None, tol: float = 1e-10,
                         max_iter: int = 2000, callback=None,
                         track_history: bool = False):
    """Maximize the block bound over the class simplex.

    x0 (a BlockDistribution or raw class probabilities) seeds the first
    start.  Returns (distribution, report); the report carries optimizer
    metadata.
    """
    if isinstance(x0, BlockDistribution):
        x0 = x0.probs
    domain = optimize.Domain(
        [optimize.Simplex(tuple(float(m) for m in family.multiplicities))])

    def objective(x):
        return value_and_gradient(family, x)[0]

    def gradient(x):
        return value_and_gradient(family, x)[1]

    res = optimize.maximize(objective, domain, gradient=gradient, tol=tol,
                            max_iter=max_iter, seed=seed, starts=starts,
                            x0=x0, callback=callback,
                            track_history=track_history)
    dist = BlockDistribution(family, res.argmax)
    report = block_bound(dist)
    meta = {"iterations": res.iterations, "starts": res.starts_used,
            "converged": res.converged,
            "gradient_norm": res.gradient_norm_at_solution}
    if track_history:
        meta["history"] = res.history
    report = BoundReport(lattice=report.lattice, scheme=report.scheme,
                         value=report.value, params=report.params,
                         densities=report.densities, n=report.n, meta=meta)
    return dist, report


def check_monotonicity(dist: BlockDistribution, tol: float = 1e-6,
                       pairs=None) -> list[tuple[int, int, str, float, float]]:
    """Inclusion-monotonicity violations of an optimizer output.

    At an optimum, adding 1s to a block can only lower its probability:
    strict pairs need p[small] > p[big] - tol; equal-tagged pairs (weak-site
    differences) need |p[small] - p[big]| <= tol, which holds structurally
    when the family already merges weak classes.  Returns
    (small_class, big_class, tag, p_small, p_big) per violation.
    """
    if pairs is None:
        pairs = inclusion_pairs(dist.family)
    p = dist.probs
    out = []
    for cs, cb, tag in pairs:
        ps, pb = float(p[cs]), float(p[cb])
        bad = (abs(ps - pb) > tol) if tag == "equal" else (ps <= pb - tol)
        if bad:
            out.append((cs, cb, tag, ps, pb))
    return out


@dataclass(frozen=True)
class DensityProfile:
    """Occupancy distribution of an n x n window of even sites.

    occupancy_probs[k] = P(window holds exactly k ones), k = 0..n^2.
    generator labels the block measure the window statistics came from.
    """

    n: int
    occupancy_probs: np.ndarray
    generator: str

    def __post_init__(self):
        q = np.asarray(self.occupancy_probs, dtype=float)
        if q.shape != (self.n ** 2 + 1,):
            raise ValueError(f"profile needs {self.n ** 2 + 1} entries")
        if (q < -1e-12).any() or abs(q.sum() - 1.0) > 1e-10:
            raise ValueError("occupancy probabilities are not a distribution")
        q = np.clip(q, 0.0, None)
        q.flags.writeable = False
        object.__setattr__(self, "occupancy_probs", q)

    def mean(self) -> float:
        k = np.arange(len(self.occupancy_probs))
        return float(k @ self.occupancy_probs)

    def variance(self) -> float:
        k = np.arange(len(self.occupancy_probs))
        m = self.mean()
        return float((k - m) ** 2 @ self.occupancy_probs)


def _popcounts_upto(nbits: int) -> np.ndarray:
    masks = np.arange(1 << nbits, dtype=np.int64)
    out = np.zeros(len(masks), dtype=np.int64)
    for i in range(nbits):
        out += (masks >> i) & 1
    return out


def _region_pmf(dist: BlockDistribution, region: int) -> np.ndarray:
    """Popcount distribution of mask & region under the block measure."""
    m = dist.n
    masks = np.arange(1 << (m * m), dtype=np.int64)
    pop = np.zeros(len(masks), dtype=np.int64)
    size = 0
    for i in range(m * m):
        if (region >> i) & 1:
            pop += (masks >> i) & 1
            size += 1
    return np.bincount(pop, weights=dist.mask_probabilities(),
                       minlength=size + 1)


def _axis_segments(window: int, m: int, offset: int):
    """Split a window of length `window` over blocks of length m, the first
    block entered at `offset`.  Yields (start within block, length)."""
    first = min(window, m - offset)
    segs = [(offset, first)]
    rem = window - first
    while rem >= m:
        segs.append((0, m))
        rem -= m
    if rem:
        segs.append((0, rem))
    return segs


def density_profile(n: int, generator: BlockDistribution) -> DensityProfile:
    """Occupancy distribution of an n x n even-site window.

    generator of the same side: class probabilities aggregated by 1-count.
    Smaller generator m < n: the window is laid over a fresh tiling of
    independent m x m blocks; the window splits into rectangular pieces from
    distinct blocks, the piece popcount laws convolve, and the m^2 possible
    window offsets are averaged uniformly.
    """
    if generator is None:
        raise ValueError("density_profile needs an optimized distribution")
    m = generator.n
    if m > n:
        raise ValueError(f"generator side {m} exceeds window side {n}")
    label = f"{m}x{m}"
    if m == n:
        pops = _popcounts_upto(m * m)
        pmf = np.bincount(pops, weights=generator.mask_probabilities(),
                          minlength=n * n + 1)
        return DensityProfile(n, pmf, label)

    cache: dict[int, np.ndarray] = {}

    def region_pmf(region):
        if region not in cache:
            cache[region] = _region_pmf(generator, region)
        return cache[region]

    acc = np.zeros(n * n + 1)
    for ox in range(m):
        for oy in range(m):
            pmf = np.ones(1)
            for x0, w in _axis_segments(n, m, ox):
                for y0, h in _axis_segments(n, m, oy):
                    region = 0
                    for y in range(y0, y0 + h):
                        for x in range(x0, x0 + w):
                            region |= 1 << (y * m + x)
                    pmf = np.convolve(pmf, region_pmf(region))
            acc += pmf
    return DensityProfile(n, acc / m ** 2, label)


def extend_distribution(opt: BlockDistribution,
                        target_family: BlockFamily | None = None
                        ) -> BlockDistribution:
    """Seed an (n+1) x (n+1) distribution from an n x n optimum.

    The big block keeps the optimal law on its lower-left n x n subblock and
    fills the added half frame (2n+1 sites) with independent Bernoulli(p)
    entries, p being the optimum's even-sublattice density; the mask-level
    product law is then averaged within each class of the target family.
    """
    n = opt.n
    big = n + 1
    if target_family is None:
        target_family = reduce_family(big, use_weak=opt.family.use_weak)
    if target_family.n != big:
        raise ValueError(f"target family side {target_family.n}, need {big}")
    p = opt.even_density()
    masks = np.arange(1 << (big * big), dtype=np.int64)
    sub = np.zeros(len(masks), dtype=np.int64)
    for y in range(n):
        for x in range(n):
            sub |= ((masks >> (y * big + x)) & 1) << (y * n + x)
    frame_bits = [(x, n) for x in range(big)] + [(n, y) for y in range(n)]
    frame_pop = np.zeros(len(masks), dtype=np.int64)
    for x, y in frame_bits:
        frame_pop += (masks >> (y * big + x)) & 1
    k = len(frame_bits)  # 2n + 1
    mask_prob = (opt.probs[opt.family.class_of[sub]]
                 * p ** frame_pop * (1.0 - p) ** (k - frame_pop))
    class_tot = np.bincount(target_family.class_of, weights=mask_prob,
                            minlength=target_family.class_count)
    return BlockDistribution(target_family,
                             class_tot / target_family.multiplicities)


def equalized_unit_generator(family: BlockFamily | None = None, *,
                             seed: int = 0,
                             starts: int = 8) -> BlockDistribution:
    """Single-site generator at the density-equalized square-lattice optimum.

    The raw single-site optimum puts more mass on the odd sublattice than
    the even one, so occupancy profiles built from it are not comparable
    with the larger block optima (whose two densities nearly agree).  The
    fair flat reference is the two-stage scheme whose final coin is chosen
    to equalize the sublattice densities.
    """
    from .bounds import optimize_equalized
    if family is None:
        family = reduce_family(1)
    if family.n != 1:
        raise ValueError("unit generator needs the 1x1 family")
    p = optimize_equalized("square", seed=seed, starts=starts).densities[0]
    return BlockDistribution(family, np.array([1.0 - p, p]))
