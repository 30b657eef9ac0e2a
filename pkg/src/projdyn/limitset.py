"""Finite-word approximations of the limit set, the spectrum and c-shells."""

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
import math
from typing import NamedTuple
import warnings

import numpy as np

from .exceptions import (
    DegenerateSpectrum,
    EmptyApprox,
    EmptyShell,
    InsufficientScales,
    NotProximal,
)
from .matrix import DEFAULT_TOL, _normalize_rows, eigen_dominant, wedge_norm
from .semigroup import DEFAULT_BUDGET, enumerate_words

DEFAULT_DEDUP_EPS = 1e-6


@dataclass
class LimitSetApprox:
    """Dominant directions of proximal words, deduplicated in the projective metric.

    ``points`` is an ``(n, d)`` array of sign-normalized unit vectors and
    ``words[i]`` is the word whose dominant eigenvector gave ``points[i]``.
    """

    points: np.ndarray
    words: list
    max_len: int
    dedup_eps: float

    def __len__(self):
        return len(self.points)

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def angles(self):
        """Angles in ``[0, pi)`` of the points (d = 2 only)."""
        if self.dim != 2:
            raise ValueError("angles are only defined for d = 2")
        return np.arctan2(self.points[:, 1], self.points[:, 0]) % math.pi

    def distance(self, X):
        """Projective distance from each row of ``X`` to the nearest point."""
        return nearest_distance(self.points, X)


def _circular_gap(theta, other):
    diff = abs(theta - other) % math.pi
    return min(diff, math.pi - diff)


def nearest_distance(points, X):
    """For each row of ``X``, the smallest projective distance to a row of ``points``."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    X = _normalize_rows(np.atleast_2d(np.asarray(X, dtype=float)))
    if P.shape[1] == 2:
        ang = np.sort(np.arctan2(P[:, 1], P[:, 0]) % math.pi)
        q = np.arctan2(X[:, 1], X[:, 0]) % math.pi
        pos = np.searchsorted(ang, q)
        left = ang[(pos - 1) % len(ang)]
        right = ang[pos % len(ang)]
        gap = np.minimum(_wrap_gap(q - left), _wrap_gap(q - right))
        return np.abs(np.sin(gap))
    out = np.empty(len(X))
    chunk = max(1, 2 ** 22 // max(1, len(P)))
    for start in range(0, len(X), chunk):
        block = X[start:start + chunk]
        # |u ^ v|^2 = 1 - <u, v>^2 for unit vectors; refine the winner with minors
        dots = np.abs(block @ P.T)
        best = np.argmax(dots, axis=1)
        out[start:start + chunk] = wedge_norm(block, P[best])
    return out


def _wrap_gap(diff):
    diff = np.abs(diff) % math.pi
    return np.minimum(diff, math.pi - diff)


def limit_set_approx(S, max_len=8, tol=DEFAULT_TOL, dedup_eps=DEFAULT_DEDUP_EPS,
                     budget=DEFAULT_BUDGET):
    """Dominant directions of all proximal words of length <= ``max_len``.

    Words are visited breadth first and lexicographically; a direction is
    kept only if it is at least ``dedup_eps`` away from every kept one, so
    shorter (then lexicographically smaller) words win ties.
    """
    kept, words = [], []
    sorted_angles = []
    d = S.dim
    for w in enumerate_words(S, max_len, budget):
        if not w.indices:
            continue
        try:
            info = eigen_dominant(w.product, tol)
        except NotProximal:
            continue
        u = info.dominant_vector.rep
        if d == 2:
            theta = math.atan2(u[1], u[0]) % math.pi
            if sorted_angles:
                pos = bisect.bisect_left(sorted_angles, theta)
                near = min(_circular_gap(theta, sorted_angles[pos % len(sorted_angles)]),
                           _circular_gap(theta, sorted_angles[pos - 1]))
                if math.sin(near) < dedup_eps:
                    continue
            bisect.insort(sorted_angles, theta)
        elif kept:
            if np.min(wedge_norm(np.array(kept), u[None, :])) < dedup_eps:
                continue
        kept.append(u)
        words.append(w)
    if not kept:
        raise EmptyApprox("no proximal word of length <= %d" % max_len)
    return LimitSetApprox(np.array(kept), words, max_len, dedup_eps)


# ---------------------------------------------------------------------------
# box counting


class BoxDimension(NamedTuple):
    dimension: float
    residual: float
    scales: np.ndarray
    counts: np.ndarray


def default_scales(angles, min_scale=DEFAULT_DEDUP_EPS, ratio=2.0):
    """Geometric scales inside the scaling region of an angle sample.

    Starts at half the angular diameter of the sample and stops before the
    count reaches half the number of points (finer scales only resolve the
    finite approximation, not the set).
    """
    ang = np.sort(np.asarray(angles, dtype=float) % math.pi)
    n = len(ang)
    if n < 2:
        return np.array([])
    diam = ang[-1] - ang[0]
    scales = []
    s = diam / 2.0
    while s >= min_scale:
        if len(np.unique(np.floor(ang / s))) > n / 2:
            break
        scales.append(s)
        s /= ratio
    return np.array(scales)


def box_counting_dimension(angles, scales, period=math.pi, min_scale=0.0):
    """Least-squares slope of ``log N(s)`` against ``log(1/s)``.

    ``N(s)`` is the number of intervals ``[k s, (k+1) s)`` of the angle
    circle that contain a point.  The residual is the root mean square of the
    fit residuals in natural-log units.
    """
    angles = np.asarray(angles, dtype=float) % period
    scales = np.asarray(sorted((float(s) for s in scales), reverse=True))
    usable = scales[(scales >= min_scale) & (scales < period)]
    if len(usable) < 3:
        raise InsufficientScales("need at least 3 usable scales, got %d" % len(usable))
    counts = np.array([len(np.unique(np.floor(angles / s).astype(np.int64))) for s in usable])
    x = np.log(1.0 / usable)
    y = np.log(counts)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return BoxDimension(float(slope), float(np.sqrt(np.mean(resid ** 2))), usable, counts)


def box_dimension(L, scales=None):
    """Box-counting dimension of a planar limit set approximation (angle coordinate)."""
    if L.dim != 2:
        raise ValueError("box dimension uses the angle parametrization, d = 2 only")
    if scales is None:
        if len(L) < 2:
            return BoxDimension(0.0, 0.0, np.array([]), np.array([]))
        scales = default_scales(L.angles, L.dedup_eps)
    return box_counting_dimension(L.angles, scales, min_scale=L.dedup_eps)


# ---------------------------------------------------------------------------
# spectrum and aperiodicity


@dataclass
class Spectrum:
    """``(word, log|lambda_word|)`` for the proximal words found."""

    entries: list = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    @property
    def values(self):
        return np.array([v for _, v in self.entries])

    def __iter__(self):
        return iter(self.entries)


def spectrum(S, max_len=6, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """Log dominant moduli of all proximal words of length <= ``max_len``."""
    entries = []
    for w in enumerate_words(S, max_len, budget):
        if not w.indices:
            continue
        try:
            info = eigen_dominant(w.product, tol)
        except NotProximal:
            continue
        entries.append((w, math.log(info.dominant_modulus)))
    return Spectrum(entries)


def _distinct(values, rel=1e-12):
    out = []
    for v in sorted(values):
        if not out or abs(v - out[-1]) > rel * max(1.0, abs(v)):
            out.append(v)
    return out


def aperiodicity_gap(spec, coeff_bound=500, max_entries=16):
    """Largest gap of ``{m_i s_i + m_j s_j mod s_1}`` on the circle ``R / s_1 Z``.

    ``s_1`` is the smallest positive absolute spectrum value and the
    coefficients range over ``|m| <= coeff_bound``.  Only the ``max_entries``
    smallest distinct values enter the two-term sums.  A small gap is
    evidence that the values generate a dense subgroup of the reals.  If all
    values are numerically rational multiples of ``s_1`` a
    :class:`DegenerateSpectrum` warning is issued.
    """
    raw = spec.values if isinstance(spec, Spectrum) else np.asarray(spec, dtype=float)
    vals = _distinct([abs(v) for v in raw if abs(v) > 0])
    if len(vals) < 2:
        raise ValueError("need at least two distinct nonzero spectrum values")
    vals = vals[:max_entries]
    s1 = vals[0]
    degenerate = True
    for v in vals[1:]:
        r = v / s1
        f = Fraction(r).limit_denominator(max(1, coeff_bound))
        if abs(r - float(f)) > 1e-12 * max(1.0, r):
            degenerate = False
            break
    if degenerate:
        warnings.warn("spectrum values are rational multiples of %.12g" % s1, DegenerateSpectrum,
                      stacklevel=2)
    m = np.arange(-coeff_bound, coeff_bound + 1, dtype=float)
    pts = [np.zeros(1)]
    others = vals[1:]
    for v in others:
        pts.append(np.mod(m * v, s1))
    for i in range(len(others)):
        for j in range(i + 1, len(others)):
            pts.append(np.mod((m[:, None] * others[i] + m[None, :] * others[j]).ravel(), s1))
    p = np.sort(np.concatenate(pts) % s1)
    gaps = np.diff(p)
    wrap = s1 - p[-1] + p[0]
    return float(max(np.max(gaps) if len(gaps) else 0.0, wrap))


# ---------------------------------------------------------------------------
# c-shells


@dataclass
class ShellSnapshot:
    """Orbit points with norm in ``[c^t, c^(t+1))`` rescaled by ``c^-t``.

    ``directions`` holds sign-normalized unit vectors and ``radii`` the
    rescaled norms, which lie in ``[1, c]``.
    """

    c: float
    t: int
    directions: np.ndarray
    radii: np.ndarray

    def __len__(self):
        return len(self.radii)


def shell_snapshot(points, c, t):
    """Select the points of the ``t``-th c-shell and rescale them into ``[1, c]``."""
    if not c > 1:
        raise ValueError("c must exceed 1")
    X = np.atleast_2d(np.asarray(points, dtype=float))
    norms = np.linalg.norm(X, axis=1)
    # compare logs so that huge t cannot overflow c ** t
    logn = np.log(np.where(norms > 0, norms, np.nan))
    lo, hi = t * math.log(c), (t + 1) * math.log(c)
    eps = 1e-12
    mask = (logn >= lo - eps) & (logn < hi - eps)
    if not np.any(mask):
        raise EmptyShell("no point with norm in [c^%d, c^%d)" % (t, t + 1))
    sel = X[mask]
    radii = np.exp(logn[mask] - lo)
    radii = np.clip(radii, 1.0, c)
    return ShellSnapshot(float(c), int(t), _normalize_rows(sel), radii)


def shell_hausdorff(snapshot, L):
    """One-sided Hausdorff distance from the snapshot to ``L x [1, c]``.

    The product metric is the projective distance plus the radial distance
    divided by ``c``; the radial part vanishes inside ``[1, c]``.
    """
    c = snapshot.c
    radial = np.maximum(0.0, np.maximum(1.0 - snapshot.radii, snapshot.radii - c)) / c
    base = L.distance(snapshot.directions) if isinstance(L, LimitSetApprox) \
        else nearest_distance(L, snapshot.directions)
    return float(np.max(base + radial))
