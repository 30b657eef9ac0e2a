"""Orbits of integer matrix semigroups on the torus R^d / Z^d.

Rational points are handled exactly in ``(Z/qZ)^d``.  Irrational points
are carried in 64-bit fixed point: a coordinate ``x`` in ``[0, 1)`` is
stored as ``floor(x * 2**64)`` in a ``uint64``, and an integer matrix acts
on those words with wrap-around arithmetic, which is exactly the action
mod 1.  The only error is the initial rounding of ``x``, amplified by at
most the operator norm of the word.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np

from .exceptions import BudgetExceeded, NoApproach, PrecisionExceeded, SearchFailed, ZeroVector
from .matrix import as_matrix, eigen_dominant, is_expanding
from .semigroup import enumerate_words, escape_from_ball

FIXED_BITS = 64
FIXED_ONE = 1 << FIXED_BITS
MACHINE_EPS = float(np.finfo(float).eps)
PRECISION_TARGET = 1e-6
DEDUP_BITS = 12


def torus_norm(v):
    """l2 distance from ``v`` to the nearest point of ``Z^d``."""
    v = np.asarray(v, dtype=float)
    return float(np.linalg.norm(v - np.round(v)))


def _nearest_lift(v):
    """Representative of ``v`` mod 1 closest to 0 (exact for fractions)."""
    return [x - round(x) for x in v]


def _torus_norm2(v):
    return sum(x * x for x in _nearest_lift(v))


@dataclass(frozen=True)
class RationalTorusPoint:
    """The point ``(n_1/q, ..., n_d/q) + Z^d`` with ``0 <= n_i < q``."""

    denominator: int
    numerators: tuple

    def __post_init__(self):
        q = int(self.denominator)
        if q < 1:
            raise ValueError("denominator must be positive")
        object.__setattr__(self, "denominator", q)
        object.__setattr__(self, "numerators", tuple(int(n) % q for n in self.numerators))

    @classmethod
    def from_fractions(cls, values):
        fr = [Fraction(v) for v in values]
        q = math.lcm(*(f.denominator for f in fr)) if fr else 1
        return cls(q, tuple(f.numerator * (q // f.denominator) for f in fr))

    @property
    def dim(self):
        return len(self.numerators)

    def to_fractions(self):
        return [Fraction(n, self.denominator) for n in self.numerators]

    def is_zero(self):
        return not any(self.numerators)


class CoverageGrid:
    """Boolean occupancy of the ``r^d`` cells ``floor(r x)`` of ``[0, 1)^d``."""

    def __init__(self, resolution, dim):
        if resolution < 1:
            raise ValueError("resolution must be positive")
        self.resolution = int(resolution)
        self.dim = int(dim)
        self.hit = np.zeros((self.resolution,) * self.dim, dtype=bool)
        self.points_seen = 0

    def add_cells(self, cells):
        cells = np.asarray(cells, dtype=np.int64).reshape(-1, self.dim)
        self.hit[tuple(cells.T)] = True
        self.points_seen += len(cells)

    def add_points(self, X):
        X = np.asarray(X, dtype=float).reshape(-1, self.dim) % 1.0
        cells = np.minimum(np.floor(X * self.resolution).astype(np.int64), self.resolution - 1)
        self.add_cells(cells)

    @property
    def cells_hit(self):
        return int(self.hit.sum())

    @property
    def coverage_fraction(self):
        return self.cells_hit / self.hit.size


@dataclass
class OrbitReport:
    finite: bool
    orbit_size: int = None
    coverage_fraction: float = None
    word_budget: int = 0
    resolution: int = None
    points: np.ndarray = field(default=None, repr=False)
    words_visited: int = 0
    truncated: bool = False
    grid: CoverageGrid = field(default=None, repr=False)

    def to_dict(self):
        return {
            "finite": self.finite,
            "orbit_size": self.orbit_size,
            "coverage_fraction": self.coverage_fraction,
            "word_budget": self.word_budget,
            "resolution": self.resolution,
        }


def _require_integer(S):
    if not S.integer_flag:
        raise ValueError("torus orbits need integer generators")


# ---------------------------------------------------------------------------
# rational orbits


def _encode(P, q):
    key = np.zeros(len(P), dtype=object if q ** P.shape[1] >= 2 ** 63 else np.int64)
    for i in range(P.shape[1]):
        key = key * q + P[:, i]
    return key


def orbit_rational(S, x, resolution=None):
    """Exact orbit of a rational point: breadth-first closure in ``(Z/qZ)^d``.

    The returned report has ``finite=True``; closure under every generator
    is re-checked before returning.  ``points`` holds the numerators in
    discovery order.
    """
    _require_integer(S)
    if not isinstance(x, RationalTorusPoint):
        x = RationalTorusPoint.from_fractions(x)
    if x.dim != S.dim:
        raise ValueError("point has wrong dimension")
    q = x.denominator
    if q ** S.dim >= 2 ** 62 or q >= 2 ** 31:
        raise ValueError("denominator too large for exact enumeration")
    gens = [np.array(g.mod(q), dtype=np.int64) for g in S]
    start = np.array([x.numerators], dtype=np.int64)
    visited = np.sort(_encode(start, q))
    found = [start]
    frontier = start
    applied = 0
    while len(frontier):
        children = np.concatenate([(frontier @ g.T) % q for g in gens])
        applied += len(children)
        keys = _encode(children, q)
        keys, first = np.unique(keys, return_index=True)
        order = np.argsort(first, kind="stable")
        keys, first = keys[order], first[order]
        fresh = ~np.isin(keys, visited)
        frontier = children[first[fresh]]
        visited = np.union1d(visited, keys[fresh])
        found.append(frontier)
    orbit = np.concatenate(found)
    for g in gens:
        if not np.all(np.isin(_encode((orbit @ g.T) % q, q), visited)):
            raise AssertionError("orbit closure verification failed")
    coverage = None
    if resolution is not None:
        cells = (orbit * resolution) // q
        coverage = len(np.unique(_encode(cells, resolution))) / resolution ** S.dim
    return OrbitReport(True, len(orbit), coverage, applied, resolution, orbit, applied)


# ---------------------------------------------------------------------------
# fixed-point float orbits


def _to_fixed(value):
    """``(word, resolution)`` for one coordinate.

    Fractions, integers and decimal strings are converted exactly and then
    truncated to 64 bits; Python/numpy floats are trusted only to machine
    epsilon.
    """
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise ValueError("non-finite coordinate")
        frac, res = Fraction(float(value)), MACHINE_EPS
    elif isinstance(value, str):
        text = value.strip()
        frac = Fraction(text)
        digits = len(text.split(".", 1)[1]) if "." in text and "/" not in text else None
        res = 2.0 ** -FIXED_BITS if digits is None else max(2.0 ** -FIXED_BITS, 10.0 ** -digits)
    else:
        frac, res = Fraction(value), 2.0 ** -FIXED_BITS
    frac -= math.floor(frac)
    return math.floor(frac * FIXED_ONE), res


def precision_cap(S, resolution):
    """Largest word length ``L`` with ``max_norm**L * resolution < 1e-6``."""
    C = S.max_norm
    if C <= 1:
        return None
    return math.floor(math.log(PRECISION_TARGET / resolution) / math.log(C) - 1e-12)


def _fixed_cells(U, r):
    """``floor(r * U / 2**64)`` computed exactly in 64-bit arithmetic (``r < 2**32``)."""
    hi = U >> np.uint64(32)
    lo = U & np.uint64(0xFFFFFFFF)
    rr = np.uint64(r)
    return ((rr * hi + ((rr * lo) >> np.uint64(32))) >> np.uint64(32)).astype(np.int64)


def _dedup_keys(U, bits):
    key = np.zeros(len(U), dtype=np.uint64)
    shift = np.uint64(FIXED_BITS - bits)
    for i in range(U.shape[1]):
        key = (key << np.uint64(bits)) | (U[:, i] >> shift)
    return key


def orbit_float(S, x0, max_len, budget=None, resolution=50, truncate=False, keep_points=True):
    """Breadth-first orbit cloud of an irrational point up to word length ``max_len``.

    Children of a level are produced generator by generator and a point is
    kept only if its cell at ``2**12`` divisions per axis is new (coarser
    when ``d > 5``).  ``budget`` bounds the number of matrix applications;
    it defaults to the number of words of length ``<= max_len``.  Exceeding
    it raises :class:`BudgetExceeded` unless ``truncate`` is set.

    Raises :class:`PrecisionExceeded` when ``max_norm**max_len`` times the
    input resolution is not below ``1e-6``.
    """
    _require_integer(S)
    coords = list(x0)
    if len(coords) != S.dim:
        raise ValueError("point has wrong dimension")
    fixed = [_to_fixed(v) for v in coords]
    res = max(r for _, r in fixed)
    cap = precision_cap(S, res)
    if cap is not None and max_len > cap:
        raise PrecisionExceeded("max_len %d exceeds the precision cap %d for input resolution %.3g"
                                % (max_len, cap, res))
    k = len(S)
    full = max_len + 1 if k == 1 else (k ** (max_len + 1) - 1) // (k - 1)
    if budget is None:
        budget = full
    d = S.dim
    bits = min(DEDUP_BITS, 64 // d)
    gens = [np.array([[int(v) % FIXED_ONE for v in row] for row in g.entries], dtype=np.uint64)
            for g in S]
    grid = CoverageGrid(resolution, d)
    start = np.array([[w for w, _ in fixed]], dtype=np.uint64)
    visited = _dedup_keys(start, bits)
    found = [start]
    frontier = start
    applied = 0
    truncated = False
    for _ in range(max_len):
        if not len(frontier):
            break
        n_children = k * len(frontier)
        if applied + n_children > budget:
            if not truncate:
                raise BudgetExceeded("orbit needs more than %d matrix applications" % budget)
            truncated = True
            frontier = frontier[:max(0, (budget - applied) // k)]
            n_children = k * len(frontier)
        # uint64 products wrap mod 2**64, i.e. the exact action mod 1
        children = np.concatenate([_apply_fixed(g, frontier) for g in gens]) if n_children else \
            np.empty((0, d), dtype=np.uint64)
        applied += n_children
        keys = _dedup_keys(children, bits)
        keys, first = np.unique(keys, return_index=True)
        order = np.argsort(first, kind="stable")
        keys, first = keys[order], first[order]
        fresh = ~np.isin(keys, visited)
        frontier = children[first[fresh]]
        visited = np.union1d(visited, keys[fresh])
        found.append(frontier)
        if truncated:
            break
    cloud = np.concatenate(found)
    grid.add_cells(np.stack([_fixed_cells(cloud[:, i], resolution) for i in range(d)], axis=1))
    points = cloud.astype(np.float64) / float(FIXED_ONE) if keep_points else None
    if points is not None:
        points[points >= 1.0] = 0.0
    return OrbitReport(False, None, grid.coverage_fraction, int(budget), resolution, points,
                       applied, truncated, grid)


def _apply_fixed(g, U):
    out = np.zeros_like(U)
    for i in range(g.shape[0]):
        acc = np.zeros(len(U), dtype=np.uint64)
        for j in range(g.shape[1]):
            if g[i, j]:
                acc += g[i, j] * U[:, j]
        out[:, i] = acc
    return out


# ---------------------------------------------------------------------------
# escape from a neighbourhood of 0


@dataclass
class EscapeResult:
    success: bool
    word: object
    distance: float


def default_epsilon(S):
    """``1 / (2 C)`` with ``C`` the largest generator operator norm, as an exact fraction."""
    return Fraction(1) / (2 * Fraction(S.max_norm))


def epsilon_escape_check(S, x, epsilon=None, budget=10 ** 6):
    """Find a word ``g`` with ``|g x|_T > epsilon`` (torus distance to 0).

    For ``|x|_T <= epsilon <= 1/(2C)`` the nearest lift of ``x`` is pushed
    out of the ball of radius ``epsilon`` by :func:`escape_from_ball`; the
    image then has norm at most ``C epsilon <= 1/2``, so its lift is still
    the nearest one.  Larger ``epsilon`` falls back to a breadth-first
    search of the torus orbit.  The witness is re-verified from scratch.
    """
    _require_integer(S)
    exact = isinstance(x, RationalTorusPoint) or all(
        isinstance(v, (int, Fraction, np.integer)) for v in x)
    if isinstance(x, RationalTorusPoint):
        pt = x.to_fractions()
    else:
        pt = [Fraction(v) if exact else float(v) for v in x]
    if len(pt) != S.dim:
        raise ValueError("point has wrong dimension")
    if epsilon is None:
        epsilon = default_epsilon(S)
    if not 0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    if exact:
        epsilon = Fraction(epsilon)
    lift = _nearest_lift(pt)
    n2 = sum(v * v for v in lift)
    if n2 == 0:
        raise ZeroVector("x is the origin of the torus")
    eps2 = epsilon * epsilon
    if n2 > eps2:
        word = next(iter(enumerate_words(S, 0)))
    elif epsilon <= default_epsilon(S) or Fraction(epsilon) * Fraction(S.max_norm) <= Fraction(1, 2):
        word = escape_from_ball(S, [v / epsilon for v in lift], budget)
    else:
        word = _escape_search(S, pt, eps2, budget)
    image = word.product @ np.array(pt, dtype=object if exact else float)
    dist2 = _torus_norm2(list(image))
    if not dist2 > eps2:
        raise SearchFailed("witness %s does not leave the epsilon ball" % word)
    return EscapeResult(True, word, math.sqrt(float(dist2)))


def _escape_search(S, pt, eps2, budget):
    visited = 0
    for w in enumerate_words(S, 64, budget=math.inf):
        visited += 1
        if visited > budget:
            break
        if _torus_norm2(list(w.product @ np.array(pt, dtype=object))) > eps2:
            return w
    raise SearchFailed("no orbit point outside the epsilon ball within %d words" % budget)


# ---------------------------------------------------------------------------
# dominant-direction witnesses


def rgs_witness(S, gamma_word, x0, K, tol, max_len=12, approach_radius=0.01):
    """Exponents ``k`` in ``[-K, K]`` with ``gamma^k u0`` within ``tol`` of a lifted orbit point.

    ``u0`` is built from the lifted orbit point ``x_i`` of smallest norm
    below ``approach_radius``: with ``phi_1`` the coordinate along the
    dominant eigenline parallel to the other generalized eigenspaces and
    ``p`` the least integer with ``lambda^p |phi_1(x_i)| >= 1``,
    ``u0 = lambda^p phi_1(x_i) e_1``, so ``1 <= |u0| <= lambda``.
    Orbit points are the vectors ``w x0`` in ``R^d`` for words ``w`` of
    length ``<= max_len``.
    """
    g = as_matrix(getattr(gamma_word, "product", gamma_word))
    info = eigen_dominant(g)
    if not is_expanding(g):
        raise ValueError("gamma must be expanding")
    lam = info.eigenvalue
    e1 = info.dominant_vector.rep
    n = info.hyperplane_normal.rep
    x0 = np.asarray([float(v) for v in x0])
    orbit = np.array([w.product.to_float() @ x0 for w in enumerate_words(S, max_len)])
    norms = np.linalg.norm(orbit, axis=1)
    phis = orbit @ n / float(n @ e1)
    near = (norms < approach_radius) & (phis != 0)
    if not np.any(near):
        raise NoApproach("no orbit point within %g of 0 up to length %d" % (approach_radius, max_len))
    i = int(np.flatnonzero(near)[np.argmin(norms[near])])
    phi = float(phis[i])
    absl = abs(lam)
    p = math.ceil(-math.log(abs(phi)) / math.log(absl))
    while absl ** p * abs(phi) < 1:
        p += 1
    u0 = lam ** p * phi * e1
    hits = []
    for k in range(-K, K + 1):
        target = lam ** k * u0
        if float(np.min(np.linalg.norm(orbit - target, axis=1))) < tol:
            hits.append(k)
    return hits
