"""Deterministic multistart maximization over products of boxes and
weighted probability simplices.

Constrained components are mapped to unconstrained coordinates so a
quasi-Newton method applies directly:

* Box(lo, hi): x = lo + (hi - lo) * sigmoid(t).
* Simplex(weights w): x_i = exp(t_i) / sum_j w_j exp(t_j), which satisfies
  sum_i w_i x_i = 1 with x_i > 0.  The weights are class multiplicities
  when the simplex ranges over per-arrangement block probabilities.

Multistart initial points come from a scrambled Sobol sequence seeded from
`seed`, with the first start always at the domain center (t = 0), so results
are reproducible bit-for-bit for a fixed (objective, domain, settings, seed).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

BOX_EPS = 1e-12


@dataclass(frozen=True)
class Box:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"box needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def size(self) -> int:
        return 1


@dataclass(frozen=True)
class Simplex:
    """Points x >= 0 with sum_i weights_i * x_i = 1."""

    weights: tuple

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if len(w) < 1 or any(v <= 0 for v in w):
            raise ValueError("simplex weights must be positive")
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class Domain:
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("empty domain")
        for c in comps:
            if not isinstance(c, (Box, Simplex)):
                raise TypeError(f"unsupported component {c!r}")
        object.__setattr__(self, "components", comps)

    @property
    def size(self) -> int:
        return sum(c.size for c in self.components)

    def split(self, x):
        out, i = [], 0
        for c in self.components:
            out.append(np.asarray(x[i:i + c.size]))
            i += c.size
        return out

    def to_interior(self, t: np.ndarray) -> np.ndarray:
        """Map unconstrained coordinates to a feasible interior point."""
        x = np.empty_like(t, dtype=float)
        i = 0
        for c in self.components:
            ti = t[i:i + c.size]
            if isinstance(c, Box):
                s = 1.0 / (1.0 + np.exp(-ti[0]))
                x[i] = np.clip(c.lo + (c.hi - c.lo) * s,
                               c.lo + BOX_EPS, c.hi - BOX_EPS)
            else:
                w = np.asarray(c.weights)
                e = np.exp(ti - ti.max())
                x[i:i + c.size] = e / (w @ e)
            i += c.size
        return x

    def from_interior(self, x) -> np.ndarray:
        """Unconstrained coordinates mapping back to the interior point x.

        Right inverse of to_interior for feasible x (up to the simplex
        shift degeneracy), used to seed warm starts.
        """
        x = np.asarray(x, dtype=float)
        t = np.empty_like(x)
        i = 0
        for c in self.components:
            xi = x[i:i + c.size]
            if isinstance(c, Box):
                u = (xi[0] - c.lo) / (c.hi - c.lo)
                u = min(max(u, BOX_EPS), 1.0 - BOX_EPS)
                t[i] = math.log(u / (1.0 - u))
            else:
                t[i:i + c.size] = np.log(np.clip(xi, BOX_EPS, None))
            i += c.size
        return t

    def chain_gradient(self, t, x, g):
        """d f/d t from d f/d x at x = to_interior(t)."""
        gt = np.empty_like(g, dtype=float)
        i = 0
        for c in self.components:
            if isinstance(c, Box):
                gt[i] = g[i] * (x[i] - c.lo) * (c.hi - x[i]) / (c.hi - c.lo)
            else:
                w = np.asarray(c.weights)
                p = x[i:i + c.size]
                gi = g[i:i + c.size]
                gt[i:i + c.size] = p * (gi - w * (gi @ p))
            i += c.size
        return gt

    def feasible(self, x, tol: float = 1e-10) -> bool:
        i = 0
        for c in self.components:
            xi = x[i:i + c.size]
            if isinstance(c, Box):
                if not (c.lo - tol <= xi[0] <= c.hi + tol):
                    return False
            else:
                w = np.asarray(c.weights)
                if (xi < -tol).any() or abs(w @ xi - 1.0) > tol:
                    return False
            i += c.size
        return True

    def projected_gradient(self, x, g) -> np.ndarray:
        """Gradient projected onto the feasible directions at an interior x."""
        pg = np.array(g, dtype=float)
        i = 0
        for c in self.components:
            if isinstance(c, Simplex):
                w = np.asarray(c.weights)
                gi = pg[i:i + c.size]
                pg[i:i + c.size] = gi - w * (gi @ w) / (w @ w)
            i += c.size
        return pg


@dataclass
class OptimizationResult:
    argmax: np.ndarray
    value: float
    iterations: int
    starts_used: int
    converged: bool
    gradient_norm_at_solution: float
    history: list = field(default_factory=list, repr=False)


def _finite_difference(objective, x, h):
    g = np.empty(len(x))
    for i in range(len(x)):
        e = np.zeros(len(x))
        e[i] = h
        g[i] = (objective(x + e) - objective(x - e)) / (2 * h)
    return g


def finite_difference_gradient_check(objective, gradient, point, h=1e-6) -> float:
    """Max relative error between `gradient(point)` and central differences."""
    point = np.asarray(point, dtype=float)
    g_an = np.asarray(gradient(point), dtype=float)
    g_fd = _finite_difference(objective, point, h)
    scale = np.maximum(1.0, np.abs(g_fd))
    return float(np.max(np.abs(g_an - g_fd) / scale))


def _sobol_starts(dim, starts, seed, spread=2.5):
    pts = [np.zeros(dim)]
    if starts > 1:
        n = starts - 1
        sob = qmc.Sobol(d=dim, scramble=True, seed=seed)
        # draw a power-of-two batch to keep the sequence balanced
        raw = sob.random_base2(max(1, math.ceil(math.log2(n))))[:n]
        pts.extend(spread * (2.0 * raw - 1.0))
    return pts


def maximize(objective, domain: Domain, *, gradient=None, tol: float = 1e-10,
             max_iter: int = 2000, seed: int = 0, starts: int = 16,
             x0=None, callback=None,
             track_history: bool = False) -> OptimizationResult:
    """Maximize `objective` over `domain`.

    objective takes the concatenated component vector; gradient, when
    given, returns d objective/d x at that vector (finite differences are
    used in the reparameterized space otherwise).  `callback(x, value)`
    fires once per quasi-Newton iteration.  Multistart winner is the best
    value, ties broken by lowest start index.  x0, a feasible interior
    point, replaces the default center start.
    """
    dim = domain.size

    def neg(t):
        x = domain.to_interior(t)
        v = objective(x)
        if not math.isfinite(v):
            raise ValueError(f"objective returned non-finite value {v} at {x}")
        if gradient is None:
            return -v
        g = np.asarray(gradient(x), dtype=float)
        return -v, -domain.chain_gradient(t, x, g)

    history = []
    best = None
    nit_total = 0
    start_points = _sobol_starts(dim, starts, seed)
    if x0 is not None:
        start_points[0] = domain.from_interior(x0)
    for idx, t0 in enumerate(start_points):
        def _cb(tk):
            xk = domain.to_interior(tk)
            vk = objective(xk)
            if track_history:
                history.append(vk)
            if callback is not None:
                callback(xk, vk)

        res = minimize(neg, t0, jac=(None if gradient is None else True),
                       method="L-BFGS-B",
                       callback=_cb if (track_history or callback) else None,
                       options={"maxiter": max_iter, "ftol": tol,
                                "gtol": 1e-7, "maxcor": 20})
        nit_total += res.nit
        val = -res.fun
        if best is None or val > best[0] + 1e-15:
            best = (val, res.x.copy(), bool(res.success))

    val, t_best, success = best

    def _grad_norm(t):
        x = domain.to_interior(t)
        if gradient is not None:
            g = np.asarray(gradient(x), dtype=float)
        else:
            g = _finite_difference(objective, x, 1e-6)
        return x, float(np.linalg.norm(domain.projected_gradient(x, g)))

    x_best, gnorm = _grad_norm(t_best)
    if not success or gnorm > 1e-5:
        # Nelder-Mead fallback for non-smooth corners the quasi-Newton
        # iteration stalled on
        res_nm = minimize(lambda t: -objective(domain.to_interior(t)), t_best,
                          method="Nelder-Mead",
                          options={"maxiter": 200 * dim, "fatol": tol,
                                   "xatol": 1e-10})
        nit_total += res_nm.nit
        if -res_nm.fun > val:
            val, t_best = -res_nm.fun, res_nm.x
            success = success or bool(res_nm.success)
            x_best, gnorm = _grad_norm(t_best)
    converged = bool(success) and gnorm <= 1e-4
    return OptimizationResult(
        argmax=x_best, value=float(val), iterations=int(nit_total),
        starts_used=starts, converged=converged,
        gradient_norm_at_solution=gnorm, history=history)
