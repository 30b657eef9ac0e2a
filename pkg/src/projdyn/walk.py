"""Random walks on P(V) and P_c(V) driven by i.i.d. generator letters.

Letters come from numpy's PCG64 generator.  The stream of trial ``t`` under
seed ``s`` is ``PCG64(SeedSequence(s, spawn_key=(t, k)))`` where ``k``
separates independent uses inside one trial (0: letters, 1: probe points,
2: auxiliary vectors), so trials can run in any order or in parallel.

Left products ``S_n = g_n ... g_1`` drive the Markov chain; right products
``X_n = g_1 ... g_n`` are used only by :func:`dirac_concentration`.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math
from typing import NamedTuple

import numpy as np
from scipy import stats

from .exceptions import InvalidConfig
from .matrix import ProjectivePoint, _normalize_rows, as_matrix, project, wedge_norm

TWO_PI = 2.0 * math.pi

LETTERS, PROBES, AUX = 0, 1, 2


@dataclass(frozen=True)
class WalkConfig:
    """Law of the letters plus run lengths.

    ``weights`` is a probability vector over the generators.  Zero weights
    are accepted (the walk then lives on the sub-semigroup of the support).
    """

    weights: tuple
    seed: int = 0
    n_steps: int = 100_000
    burn_in: int = 1_000
    c: float = 2.0

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if not w or any(x < 0 or not math.isfinite(x) for x in w):
            raise InvalidConfig("weights must be finite and nonnegative")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise InvalidConfig("weights must sum to 1, got %r" % math.fsum(w))
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidConfig("seed must be an unsigned 64-bit integer")
        if self.n_steps < 0 or self.burn_in < 0:
            raise InvalidConfig("n_steps and burn_in must be nonnegative")
        if not self.c > 1:
            raise InvalidConfig("c must exceed 1")

    @classmethod
    def uniform(cls, k, **kwargs):
        return cls(weights=(1.0 / k,) * k, **kwargs)

    @property
    def alpha(self):
        """``2 pi / log c``."""
        return TWO_PI / math.log(self.c)

    @property
    def support(self):
        return tuple(i for i, w in enumerate(self.weights) if w > 0)


def rng_for(seed, trial=0, stream=LETTERS):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial, stream))))


def sample_letters(cfg, n, trial=0):
    """``n`` i.i.d. generator indices with law ``cfg.weights`` for one trial."""
    rng = rng_for(cfg.seed, trial, LETTERS)
    p = np.asarray(cfg.weights)
    return rng.choice(len(p), size=n, p=p / p.sum())


def _check_gens(S, cfg):
    if len(cfg.weights) != len(S):
        raise InvalidConfig("%d weights for %d generators" % (len(cfg.weights), len(S)))
    return S.float_stack


def _run_chunks(fn, trials, threads):
    """Apply ``fn(trial_indices)`` over chunks and concatenate in trial order."""
    idx = np.arange(trials)
    if threads is None or threads <= 1 or trials < 2:
        return fn(idx)
    chunks = np.array_split(idx, min(threads, trials))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(fn, chunks))
    return np.concatenate(parts)


def _mean_stderr(values):
    v = np.asarray(values, dtype=float)
    n = len(v)
    # centring on the first sample keeps a constant sample exact
    mean = float(v[0]) + math.fsum(v - v[0]) / n if np.all(np.isfinite(v)) else math.fsum(v) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


# ---------------------------------------------------------------------------
# P_c(V)


@dataclass(frozen=True)
class PcPoint:
    """A point ``(base, z)`` of ``P(V) x T_c``; ``z`` is an angle in ``[0, 2 pi)``."""

    base: ProjectivePoint
    z: float

    def __post_init__(self):
        object.__setattr__(self, "z", _wrap(self.z))

    @classmethod
    def from_vector(cls, v, c):
        v = np.asarray(v, dtype=float)
        return cls(project(v), TWO_PI * _frac(math.log(np.linalg.norm(v)) / math.log(c)))


def _frac(t):
    return t - math.floor(t)


def _wrap(z):
    z = math.fmod(z, TWO_PI)
    if z < 0:
        z += TWO_PI
    return 0.0 if z >= TWO_PI else z


def _is_scalar(g):
    a = g.entries
    d = g.dim
    return all(a[i, j] == 0 for i in range(d) for j in range(d) if i != j) and \
        all(a[i, i] == a[0, 0] for i in range(d))


def step_pc(g, v, c):
    """Action ``g.(v, z) = (g.v, z |g v|^(i alpha))`` with ``alpha = 2 pi / log c``.

    The circle coordinate advances by ``2 pi frac(log|g v| / log c)``, so the
    homothety ``c Id`` fixes every point exactly.
    """
    g = as_matrix(g)
    if _is_scalar(g):
        s = abs(float(g.entries[0, 0]))
        return PcPoint(v.base, v.z + TWO_PI * _frac(math.log(s) / math.log(c)))
    y = g.to_float() @ v.base.rep
    n = float(np.linalg.norm(y))
    return PcPoint(project(y), v.z + TWO_PI * _frac(math.log(n) / math.log(c)))


# ---------------------------------------------------------------------------
# occupation measures


@dataclass
class EmpiricalMeasure:
    """Equal-weight sample of points of P(V) (``z is None``) or of P_c(V)."""

    points: np.ndarray
    z: np.ndarray = None

    def __post_init__(self):
        if len(self.points) == 0:
            raise ValueError("an empirical measure needs at least one sample")

    @property
    def count(self):
        return len(self.points)

    @property
    def angles(self):
        if self.points.shape[1] != 2:
            raise ValueError("angles are only defined for d = 2")
        return np.arctan2(self.points[:, 1], self.points[:, 0]) % math.pi

    def z_ks_statistic(self):
        """Kolmogorov-Smirnov distance of the circle coordinate to the uniform law."""
        if self.z is None:
            raise ValueError("no circle coordinate recorded")
        return float(stats.kstest(self.z / TWO_PI, "uniform").statistic)


def run_chain(S, cfg, start, trial=0):
    """Trajectory ``v_n = g_n . v_(n-1)`` on P_c(V); returns the post-burn-in occupation measure."""
    mats = _check_gens(S, cfg)
    if cfg.n_steps <= cfg.burn_in:
        raise InvalidConfig("n_steps (%d) must exceed burn_in (%d)" % (cfg.n_steps, cfg.burn_in))
    letters = sample_letters(cfg, cfg.n_steps, trial)
    rows = [tuple(tuple(float(v) for v in row) for row in m) for m in mats]
    d = S.dim
    x = [float(v) for v in start.base.rep]
    turns = start.z / TWO_PI
    inv_logc = 1.0 / math.log(cfg.c)
    keep = cfg.n_steps - cfg.burn_in
    pts = np.empty((keep, d))
    zs = np.empty(keep)
    fsqrt, flog, ffloor = math.sqrt, math.log, math.floor
    for k, letter in enumerate(letters.tolist()):
        m = rows[letter]
        y = [sum(m[i][j] * x[j] for j in range(d)) for i in range(d)]
        n = fsqrt(sum(t * t for t in y))
        x = [t / n for t in y]
        turns += flog(n) * inv_logc
        turns -= ffloor(turns)
        j = k - cfg.burn_in
        if j >= 0:
            pts[j] = x
            zs[j] = turns
    zs = TWO_PI * zs
    zs[zs >= TWO_PI] = 0.0
    return EmpiricalMeasure(_normalize_rows(pts), zs)


def wasserstein_angle(m1, m2, period=math.pi):
    """Wasserstein-1 distance between the angle marginals on the circle ``R / period Z``.

    Uses ``W1 = min_m int |F - G - m|``, the minimum attained at a weighted
    median of ``F - G``.
    """
    a = np.sort(np.asarray(m1.angles if isinstance(m1, EmpiricalMeasure) else m1) % period)
    b = np.sort(np.asarray(m2.angles if isinstance(m2, EmpiricalMeasure) else m2) % period)
    grid = np.concatenate([[0.0], np.sort(np.concatenate([a, b])), [period]])
    lengths = np.diff(grid)
    mids = grid[:-1]
    F = np.searchsorted(a, mids, side="right") / len(a)
    G = np.searchsorted(b, mids, side="right") / len(b)
    h = F - G
    order = np.argsort(h, kind="stable")
    cum = np.cumsum(lengths[order])
    med = h[order][np.searchsorted(cum, cum[-1] / 2.0)]
    return float(np.sum(np.abs(h - med) * lengths))


def lipschitz_discrepancy(m1, m2, n_functions=64, seed=0):
    """Mean ``|E1 f - E2 f|`` over seeded test functions ``f(u) = |<a, u>|``, ``|a| = 1``.

    Each test function is 1-Lipschitz for the projective distance.  Used to
    compare measures when ``d >= 3``.
    """
    d = m1.points.shape[1]
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n_functions, d))
    A /= np.linalg.norm(A, axis=1, keepdims=True)
    e1 = np.mean(np.abs(m1.points @ A.T), axis=0)
    e2 = np.mean(np.abs(m2.points @ A.T), axis=0)
    return float(np.mean(np.abs(e1 - e2)))


# ---------------------------------------------------------------------------
# contraction diagnostics


class CurvePoint(NamedTuple):
    n: int
    mean_delta: float
    stderr: float


def _as_rep(x):
    return x.rep if isinstance(x, ProjectivePoint) else project(x).rep


def _contraction_deltas(mats, letters, x, y, checkpoints):
    """Per-trial ``delta(S_n x, S_n y)`` at each checkpoint, tracked in log scale.

    The pair is carried as an orthonormal frame ``(u, w)`` plus the
    coordinates ``(cos, delta)`` of ``y`` in it; re-orthonormalizing each step
    keeps the tiny distances accurate far below rounding of unit vectors.
    """
    T = letters.shape[0]
    d = len(x)
    delta0 = float(wedge_norm(x[None, :], y[None, :])[0])
    cos0 = float(np.dot(x, y))
    perp = y - cos0 * x
    if delta0 > 0:
        w0 = perp / np.linalg.norm(perp)
    else:
        w0 = np.linalg.svd(x[None, :])[2][-1]
    U = np.tile(x, (T, 1))
    W = np.tile(w0, (T, 1))
    logd = np.full(T, math.log(delta0) if delta0 > 0 else -np.inf)
    cs = np.full(T, cos0)
    out = {}
    if 0 in checkpoints:
        out[0] = np.full(T, delta0)
    nmax = max(checkpoints)
    with np.errstate(divide="ignore"):
        for k in range(nmax):
            M = mats[letters[:, k]]
            GU = np.einsum("tij,tj->ti", M, U)
            GW = np.einsum("tij,tj->ti", M, W)
            r11 = np.linalg.norm(GU, axis=1)
            q1 = GU / r11[:, None]
            r12 = np.einsum("ti,ti->t", q1, GW)
            v = GW - r12[:, None] * q1
            corr = np.einsum("ti,ti->t", q1, v)
            v -= corr[:, None] * q1
            r12 += corr
            r22 = np.linalg.norm(v, axis=1)
            q2 = v / r22[:, None]
            dl = np.exp(logd)
            a1 = r11 * cs + r12 * dl
            a2 = r22 * dl
            ngy = np.hypot(a1, a2)
            cs = a1 / ngy
            logd = logd + np.log(r22) - np.log(ngy)
            U, W = q1, q2
            if k + 1 in checkpoints:
                out[k + 1] = np.minimum(1.0, np.exp(logd))
    return [out[n] for n in checkpoints]


def contraction_curve(S, cfg, x, y, ns, trials=1000, threads=None):
    """Monte Carlo mean and standard error of ``delta(S_n x, S_n y)`` for each ``n`` in ``ns``."""
    mats = _check_gens(S, cfg)
    x, y = _as_rep(x), _as_rep(y)
    ns = sorted(set(int(n) for n in ns))
    nmax = max(ns)

    def run(idx):
        letters = np.array([sample_letters(cfg, nmax, int(t)) for t in idx]).reshape(len(idx), nmax)
        return np.stack(_contraction_deltas(mats, letters, x, y, ns), axis=1)

    table = _run_chunks(run, trials, threads)
    return [CurvePoint(n, *_mean_stderr(table[:, j])) for j, n in enumerate(ns)]


def contraction_stat(S, cfg, x, y, n, trials=1000, threads=None):
    """Monte Carlo estimate of ``E delta(S_n x, S_n y)``."""
    return contraction_curve(S, cfg, x, y, [n], trials, threads)[0].mean_delta


def _right_product(mats, letters):
    """``g_1 g_2 ... g_n`` as a float matrix rescaled to unit Frobenius norm."""
    d = mats.shape[1]
    P = np.eye(d)
    for letter in letters:
        P = P @ mats[letter]
        P /= np.linalg.norm(P)
    return P


def _left_product(mats, letters):
    """``g_n ... g_1`` rescaled to unit Frobenius norm, plus the log of the removed scale."""
    d = mats.shape[1]
    P = np.eye(d)
    logscale = 0.0
    for letter in letters:
        P = mats[letter] @ P
        s = np.linalg.norm(P)
        P /= s
        logscale += math.log(s)
    return P, logscale


class DiracConcentration(NamedTuple):
    center: ProjectivePoint
    diameter: float


def dirac_concentration(S, cfg, n, probe_count=100, trial=0):
    """Push ``probe_count`` uniformly distributed directions through ``X_n = g_1 ... g_n``.

    Returns the cloud point minimizing the largest distance to the others
    and the cloud diameter; a diameter near 0 shows ``X_n . m`` is close to
    a Dirac mass.
    """
    if probe_count < 2:
        raise ValueError("probe_count must be at least 2")
    mats = _check_gens(S, cfg)
    letters = sample_letters(cfg, n, trial)
    probes = rng_for(cfg.seed, trial, PROBES).standard_normal((probe_count, S.dim))
    P = _right_product(mats, letters)
    cloud = _normalize_rows(probes @ P.T)
    D = np.stack([wedge_norm(cloud, np.broadcast_to(u, cloud.shape)) for u in cloud])
    worst = D.max(axis=1)
    i = int(np.argmin(worst))
    return DiracConcentration(project(cloud[i]), float(min(1.0, D.max())))


class NormRatio(NamedTuple):
    ratio: float
    z_star: ProjectivePoint
    residual: float


def norm_ratio_limit(S, cfg, x, n, trial=0):
    """``|S_n x| / |S_n|`` for one trajectory, with ``z*`` from the transposed walk.

    ``z*`` is the direction of ``S_n^T u = g_1^T ... g_n^T u`` for an auxiliary
    random unit ``u``; ``residual = |ratio - |<z*, x>||``.
    """
    mats = _check_gens(S, cfg)
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > 1e-12:
        raise ValueError("x must be a unit vector")
    letters = sample_letters(cfg, n, trial)
    P, _ = _left_product(mats, letters)
    sigma1 = np.linalg.svd(P, compute_uv=False)[0]
    ratio = float(np.linalg.norm(P @ x) / sigma1)
    u = rng_for(cfg.seed, trial, AUX).standard_normal(S.dim)
    u /= np.linalg.norm(u)
    for letter in letters[::-1]:
        u = mats[letter].T @ u
        u /= np.linalg.norm(u)
    z_star = project(u)
    return NormRatio(ratio, z_star, abs(ratio - abs(float(z_star.rep @ x))))


def cocycle_residual(g, h, x):
    """Residual of the additive norm cocycle ``log|ghx| = log|g.(hx)| + log|hx|`` at unit ``x``."""
    gf = as_matrix(g).to_float()
    hf = as_matrix(h).to_float()
    xr = _as_rep(x)
    hx = hf @ xr
    nhx = np.linalg.norm(hx)
    lhs = math.log(np.linalg.norm((gf @ hf) @ xr))
    rhs = math.log(np.linalg.norm(gf @ (hx / nhx))) + math.log(nhx)
    return abs(lhs - rhs)


class LyapunovEstimate(NamedTuple):
    mean: float
    stderr: float


def lyapunov_top(S, cfg, n, trials=100, threads=None):
    """Mean of ``(1/n) log |S_n|`` over independent trials, with its standard error."""
    if n < 1:
        raise ValueError("n must be at least 1")
    mats = _check_gens(S, cfg)

    def run(idx):
        out = np.empty(len(idx))
        for j, t in enumerate(idx):
            P, logscale = _left_product(mats, sample_letters(cfg, n, int(t)))
            out[j] = (logscale + math.log(np.linalg.svd(P, compute_uv=False)[0])) / n
        return out

    return LyapunovEstimate(*_mean_stderr(_run_chunks(run, trials, threads)))


def walk_endpoints(S, cfg, starts, n, first_trial=0):
    """Base points ``S_n . x`` for one trajectory per start (trial ``first_trial + i``)."""
    mats = _check_gens(S, cfg)
    X = _normalize_rows(np.atleast_2d(np.asarray(starts, dtype=float)))
    T = len(X)
    if n == 0:
        return X
    letters = np.array([sample_letters(cfg, n, first_trial + i) for i in range(T)]).reshape(T, n)
    for k in range(n):
        X = np.einsum("tij,tj->ti", mats[letters[:, k]], X)
        X /= np.linalg.norm(X, axis=1, keepdims=True)
    return _normalize_rows(X)


def walk_limitset_distance(S, cfg, start, L, n, trial=0):
    """Projective distance from the base of ``S_n . start`` to the limit set approximation.

    The circle coordinate never matters because the lifted limit set is
    ``L x T_c``, full in ``z``.
    """
    base = start.base.rep if isinstance(start, PcPoint) else _as_rep(start)
    end = walk_endpoints(S, cfg, base[None, :], n, trial)
    return float(L.distance(end)[0])
