"""n x n block calculus on the square lattice's even sublattice.

A block is an n x n patch of even sites, encoded as an integer mask with bit
(x, y) at position y*n + x.  All 2^(n^2) masks are legal (even sites are never
lattice-adjacent).  Blocks tile the even sublattice; the odd sites a block
interacts with are the plaquette centers (i + 1/2, j + 1/2) for
i, j in [-1, n), indexed here by (i, j).  An odd site is adjacent to the even
positions {i, i+1} x {j, j+1} that fall inside the block; odd sites on the
block boundary are shared with neighboring blocks.

Two reductions shrink the 2^(n^2) variables:

* D4: masks related by the dihedral symmetries of the square are identified
  (the maximal-entropy measure is isotropic).
* Weak sites: position s is weak in mask b when every odd site adjacent to s
  is already adjacent to some 1 of b other than s, so b[s] has no effect on
  which odd sites the block forces.  Toggling a weak site preserves the
  forced set; masks connected by chains of weak toggles are identified.
  Corner positions have an odd neighbor touching no other position, hence
  are never weak.

The quotient family keeps one probability variable per class, stored per
arrangement: the probability of one specific member, entering normalization
as multiplicity * prob.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

CACHE_VERSION = 1
MAX_N = 5


def _check_n(n: int, cap: int = MAX_N) -> int:
    n = int(n)
    if not 1 <= n <= cap:
        raise ValueError(f"block side must be in [1, {cap}], got {n}")
    return n


def enumerate_blocks(n: int):
    """Yield every n x n mask exactly once."""
    n = _check_n(n)
    return iter(range(1 << (n * n)))


@lru_cache(maxsize=None)
def d4_position_maps(n: int) -> tuple:
    """The 8 dihedral symmetries as position permutations.

    maps[k][i] is the destination bit of source bit i under symmetry k;
    maps[0] is the identity.
    """
    n = _check_n(n)
    maps = []
    for flip in (False, True):
        for rot in range(4):
            perm = []
            for y in range(n):
                for x in range(n):
                    xx, yy = x, y
                    if flip:
                        xx = n - 1 - xx
                    for _ in range(rot):
                        xx, yy = yy, n - 1 - xx
                    perm.append(yy * n + xx)
            maps.append(tuple(perm))
    maps.sort()  # identity first
    return tuple(maps)


def d4_images(n: int, mask: int) -> list[int]:
    """All 8 dihedral images of a mask (with repeats for symmetric masks)."""
    out = []
    for perm in d4_position_maps(n):
        img = 0
        for i, dest in enumerate(perm):
            if (mask >> i) & 1:
                img |= 1 << dest
        out.append(img)
    return out


def d4_canonical(n: int, mask: int) -> int:
    """Lexicographically smallest dihedral image."""
    return min(d4_images(n, mask))


@lru_cache(maxsize=None)
def _odd_geometry(n: int):
    """Odd-site indexing and per-position adjacency.

    Returns (odd_count, odd_mask_of_position) where odd_mask_of_position[s]
    has bit k set iff odd site k is adjacent to even position s.
    """
    ids = {}
    k = 0
    for i in range(-1, n):
        for j in range(-1, n):
            ids[(i, j)] = k
            k += 1
    per_pos = []
    for y in range(n):
        for x in range(n):
            om = 0
            for i in (x - 1, x):
                for j in (y - 1, y):
                    om |= 1 << ids[(i, j)]
            per_pos.append(om)
    return k, tuple(per_pos)


def corner_positions(n: int) -> frozenset[int]:
    return frozenset({0, n - 1, (n - 1) * n, n * n - 1})


def forced_odd_sites(n: int, mask: int) -> int:
    """Bitmask of odd sites forced to 0 by the block's 1s."""
    _, per_pos = _odd_geometry(n)
    forced = 0
    for s in range(n * n):
        if (mask >> s) & 1:
            forced |= per_pos[s]
    return forced


def weak_sites(n: int, mask: int) -> set[int]:
    """Positions whose value cannot change the forced odd set.

    Position s qualifies when every odd neighbor of s is adjacent to a 1 of
    the mask at some position other than s.  Weakness is independent of
    mask[s] by construction.  Corners never qualify: each corner has an odd
    neighbor it alone touches.
    """
    n = _check_n(n)
    _, per_pos = _odd_geometry(n)
    corners = corner_positions(n)
    out = set()
    for s in range(n * n):
        if s in corners:
            continue
        forced_wo = 0
        for t in range(n * n):
            if t != s and (mask >> t) & 1:
                forced_wo |= per_pos[t]
        if per_pos[s] & ~forced_wo == 0:
            out.add(s)
    return out


@dataclass(frozen=True)
class BlockClass:
    representative: int           # lexicographically smallest member
    members: tuple
    multiplicity: int
    weak_core: int                # member with fewest 1s (lex-min tiebreak)

    def __post_init__(self):
        assert self.multiplicity == len(self.members)


@dataclass
class BlockFamily:
    """Partition of all n x n masks into equivalence classes."""

    n: int
    use_weak: bool
    class_of: np.ndarray          # mask -> class id, shape 2^(n^2)
    representatives: np.ndarray   # class id -> canonical mask
    multiplicities: np.ndarray    # class id -> member count

    def __post_init__(self):
        self._classes = None
        total = 1 << (self.n * self.n)
        if len(self.class_of) != total:
            raise ValueError("class index length mismatch")
        if int(self.multiplicities.sum()) != total:
            raise ValueError("class multiplicities do not partition the masks")

    @property
    def class_count(self) -> int:
        return len(self.representatives)

    @property
    def free_variables(self) -> int:
        """Independent optimization variables: one per class, minus the
        normalization constraint."""
        return self.class_count - 1

    @property
    def index(self) -> np.ndarray:
        return self.class_of

    def members_of(self, cid: int) -> np.ndarray:
        return np.nonzero(self.class_of == cid)[0]

    @property
    def classes(self) -> list[BlockClass]:
        if self._classes is None:
            order = np.argsort(self.class_of, kind="stable")
            bounds = np.searchsorted(self.class_of[order],
                                     np.arange(self.class_count + 1))
            out = []
            for cid in range(self.class_count):
                mem = order[bounds[cid]:bounds[cid + 1]]
                pops = np.array([bin(int(m)).count("1") for m in mem])
                core = mem[np.lexsort((mem, pops))[0]]
                out.append(BlockClass(int(self.representatives[cid]),
                                      tuple(int(m) for m in mem),
                                      int(self.multiplicities[cid]),
                                      int(core)))
            self._classes = out
        return self._classes

    def population_counts(self) -> np.ndarray:
        """Total number of 1s over each class's members."""
        masks = np.arange(1 << (self.n * self.n), dtype=np.int64)
        pops = _popcount(masks, self.n * self.n)
        return np.bincount(self.class_of, weights=pops,
                           minlength=self.class_count)


def _popcount(masks: np.ndarray, nbits: int) -> np.ndarray:
    out = np.zeros(len(masks), dtype=np.int64)
    for i in range(nbits):
        out += (masks >> i) & 1
    return out


def _union_pairs(parent: np.ndarray, a: np.ndarray, b: np.ndarray) -> None:
    # sequential union-find with path halving; union by smaller root so the
    # final root of each class is its lexicographically smallest member
    for x, y in zip(a.tolist(), b.tolist()):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        while parent[y] != y:
            parent[y] = parent[parent[y]]
            y = parent[y]
        if x != y:
            if x < y:
                parent[y] = x
            else:
                parent[x] = y


def reduce_family(n: int, use_weak: bool = True) -> BlockFamily:
    """Build the D4 (and optionally weak-site) quotient of all n x n masks."""
    n = _check_n(n, cap=4)  # 2^25 masks at n=5 exceed the supported budget
    N = n * n
    total = 1 << N
    masks = np.arange(total, dtype=np.int64)
    bits = [(masks >> i) & 1 for i in range(N)]
    parent = np.arange(total, dtype=np.int64)

    for perm in d4_position_maps(n)[1:]:
        img = np.zeros(total, dtype=np.int64)
        for i in range(N):
            img |= bits[i] << perm[i]
        _union_pairs(parent, masks, img)

    if use_weak:
        _, per_pos = _odd_geometry(n)
        corners = corner_positions(n)
        for s in range(N):
            if s in corners:
                continue
            forced_wo = np.zeros(total, dtype=np.int64)
            for t in range(N):
                if t != s:
                    forced_wo |= bits[t] * per_pos[t]
            is_weak = (per_pos[s] & ~forced_wo) == 0
            idx = masks[is_weak]
            _union_pairs(parent, idx, idx ^ (1 << s))

    # resolve roots to fixpoint
    roots = parent[masks]
    while True:
        nxt = parent[roots]
        if (nxt == roots).all():
            break
        roots = nxt
    reps, class_of, mult = np.unique(roots, return_inverse=True,
                                     return_counts=True)
    return BlockFamily(n, use_weak, class_of.astype(np.int32),
                       reps.astype(np.int64), mult.astype(np.int64))


def save_family(family: BlockFamily, path) -> None:
    """Serialize to the versioned cache layout."""
    np.savez(path,
             version=np.array([CACHE_VERSION]),
             n=np.array([family.n]),
             use_weak=np.array([int(family.use_weak)]),
             class_of=family.class_of,
             representatives=family.representatives,
             multiplicities=family.multiplicities)


def load_family(path) -> BlockFamily:
    """Load a cached family; raises ValueError on any inconsistency."""
    path = Path(path)
    try:
        with np.load(path) as z:
            if int(z["version"][0]) != CACHE_VERSION:
                raise ValueError(f"cache version {z['version'][0]} unsupported")
            fam = BlockFamily(int(z["n"][0]), bool(z["use_weak"][0]),
                              z["class_of"].astype(np.int32),
                              z["representatives"].astype(np.int64),
                              z["multiplicities"].astype(np.int64))
    except (OSError, KeyError, ValueError) as exc:
        raise ValueError(f"unusable family cache {path}: {exc}") from exc
    if (fam.class_of[fam.representatives]
            != np.arange(fam.class_count)).any():
        raise ValueError(f"unusable family cache {path}: index mismatch")
    return fam


def load_or_build_family(n: int, use_weak: bool = True,
                         cache_dir=None) -> BlockFamily:
    """reduce_family with a transparent on-disk cache."""
    if cache_dir is None:
        return reduce_family(n, use_weak)
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    tag = "weak" if use_weak else "d4"
    path = cache_dir / f"blocks_n{n}_{tag}_v{CACHE_VERSION}.npz"
    if path.exists():
        try:
            return load_family(path)
        except ValueError as exc:
            warnings.warn(f"rebuilding block family: {exc}")
    fam = reduce_family(n, use_weak)
    save_family(fam, path)
    return fam


@dataclass(frozen=True)
class BoundaryMarginals:
    """All-zero probabilities of the positions visible to neighbor blocks.

    interior[k]: P(the 4 even sites around interior odd site k are all 0),
    row-major over (n-1)^2 interior odd sites.
    dominoes[k]: P(both sites of boundary domino k are 0); 4(n-1) dominoes
    ordered bottom, top, left, right, each side left-to-right/bottom-to-top.
    corners[k]: P(corner site k is 0), order (0,0), (n-1,0), (0,n-1), (n-1,n-1).
    """

    interior: np.ndarray
    dominoes: np.ndarray
    corners: np.ndarray


@lru_cache(maxsize=None)
def _marginal_position_masks(n: int):
    def bit(x, y):
        return 1 << (y * n + x)

    interior = [bit(i, j) | bit(i + 1, j) | bit(i, j + 1) | bit(i + 1, j + 1)
                for j in range(n - 1) for i in range(n - 1)]
    dominoes = []
    dominoes += [bit(i, 0) | bit(i + 1, 0) for i in range(n - 1)]          # bottom
    dominoes += [bit(i, n - 1) | bit(i + 1, n - 1) for i in range(n - 1)]  # top
    dominoes += [bit(0, j) | bit(0, j + 1) for j in range(n - 1)]          # left
    dominoes += [bit(n - 1, j) | bit(n - 1, j + 1) for j in range(n - 1)]  # right
    corners = [bit(0, 0), bit(n - 1, 0), bit(0, n - 1), bit(n - 1, n - 1)]
    return tuple(interior), tuple(dominoes), tuple(corners)


def _zero_count_matrix(family: BlockFamily, position_masks) -> np.ndarray:
    """A[r, c] = number of class-c members with no 1 on position mask r."""
    masks = np.arange(1 << (family.n * family.n), dtype=np.int64)
    rows = []
    for pm in position_masks:
        sel = (masks & pm) == 0
        rows.append(np.bincount(family.class_of[sel],
                                minlength=family.class_count))
    if not rows:
        return np.zeros((0, family.class_count))
    return np.stack(rows).astype(float)


def _marginal_counts(family: BlockFamily):
    cached = getattr(family, "_marginal_count_cache", None)
    if cached is None:
        pos = _marginal_position_masks(family.n)
        cached = tuple(_zero_count_matrix(family, pm) for pm in pos)
        family._marginal_count_cache = cached
    return cached


def check_class_distribution(family: BlockFamily, probs,
                             tol: float = 1e-8) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    if probs.shape != (family.class_count,):
        raise ValueError(f"need {family.class_count} class probabilities")
    if (probs < -1e-12).any():
        raise ValueError("negative class probability")
    total = float(family.multiplicities @ probs)
    if abs(total - 1.0) > tol:
        raise ValueError(f"class probabilities sum to {total}, not 1")
    return np.clip(probs, 0.0, None)


def boundary_marginals(family: BlockFamily, probs) -> BoundaryMarginals:
    """Exact all-zero marginals of one block under per-class probabilities."""
    probs = check_class_distribution(family, probs)
    a_int, a_dom, a_cor = _marginal_counts(family)
    return BoundaryMarginals(a_int @ probs, a_dom @ probs, a_cor @ probs)


def _submasks(mask: int):
    """All proper submasks of mask, including 0 (for mask != 0)."""
    s = mask
    while True:
        s = (s - 1) & mask
        yield s
        if s == 0:
            return


def inclusion_pairs(family: BlockFamily) -> list[tuple[int, int, str]]:
    """Ordered class pairs (small, big, tag) with 1-set inclusion between
    some members.

    Tag "equal" when a witness pair differs only on weak sites (the two
    masks then share a weak-equivalence class and their optimal
    probabilities coincide); "strict" otherwise, predicting
    p[small] > p[big] at any optimum.  Cost grows as 3^(n^2); intended for
    n <= 3.
    """
    weak_cls = (family.class_of if family.use_weak
                else reduce_family(family.n, use_weak=True).class_of)
    tags: dict[tuple[int, int], bool] = {}
    for m in range(1, 1 << (family.n * family.n)):
        cb = int(family.class_of[m])
        wb = int(weak_cls[m])
        for s in _submasks(m):
            cs = int(family.class_of[s])
            if cs == cb:
                continue
            key = (cs, cb)
            equal = wb == int(weak_cls[s])
            tags[key] = tags.get(key, False) or equal
    return [(cs, cb, "equal" if eq else "strict")
            for (cs, cb), eq in sorted(tags.items())]
