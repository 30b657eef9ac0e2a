"""The twelve acceptance criteria on the example pair a = [[2,1],[1,1]], b = [[3,2],[1,1]].

Each test records one PASS/FAIL line, printed in the terminal summary, and
then asserts.  Run alone with ``pytest tests/test_acceptance.py -v``.
"""

from fractions import Fraction
import math
import time

import numpy as np
import pytest

from projdyn import (
    GeneratorSet,
    Matrix,
    PcPoint,
    RationalTorusPoint,
    Status,
    WalkConfig,
    act,
    aperiodicity_gap,
    box_dimension,
    check_H0,
    check_H1,
    check_H2,
    cocycle_residual,
    congruence_words,
    contraction_curve,
    epsilon_escape_check,
    escape_from_ball,
    gl_order,
    limit_set_approx,
    orbit_float,
    orbit_points,
    orbit_rational,
    project,
    run_chain,
    shell_hausdorff,
    shell_snapshot,
    walk_limitset_distance,
    wasserstein_angle,
)
from projdyn.torus import default_epsilon

from conftest import ACCEPTANCE, A, B, LAMBDA_A, LOG_LAMBDA_A, LOG_LAMBDA_B, ROT

pytestmark = pytest.mark.acceptance


def record(n, title, ok, detail):
    ACCEPTANCE[n] = (title, bool(ok), detail)
    assert ok, detail


@pytest.fixture(scope="module")
def S():
    return GeneratorSet([A, B], "ab")


@pytest.fixture(scope="module")
def L12(S):
    return limit_set_approx(S, 12)


def test_01_hypotheses(S):
    t0 = time.perf_counter()
    verdicts = [check_H0(S), check_H1(S), check_H2(S)]
    rot = check_H0(GeneratorSet([ROT]))
    dt = time.perf_counter() - t0
    ok = (all(v.status is Status.SATISFIED and v.witness is not None for v in verdicts)
          and rot.status is Status.VIOLATED and dt < 1.0)
    record(1, "hypotheses", ok, "H0/H1/H2=%s, rotation H0=%s, %.2fs"
           % ("/".join(v.status.value for v in verdicts), rot.status.value, dt))


def test_02_contraction(S):
    cfg = WalkConfig((0.5, 0.5), seed=2024)
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst, monotone = 0.0, True
    for _ in range(10):
        x, y = rng.standard_normal(2), rng.standard_normal(2)
        curve = contraction_curve(S, cfg, x, y, [5, 10, 20, 30], trials=1000)
        means = [p.mean_delta for p in curve]
        monotone &= all(u > v for u, v in zip(means, means[1:]))
        worst = max(worst, means[-1])
    dt = time.perf_counter() - t0
    record(2, "contraction", worst < 1e-6 and monotone and dt < 5.0,
           "max mean at n=30 %.3g, strictly decreasing %s, %.2fs" % (worst, monotone, dt))


def test_03_unique_stationary_measure(S):
    t0 = time.perf_counter()
    m1 = run_chain(S, WalkConfig((0.5, 0.5), seed=1, n_steps=100_000, burn_in=1_000, c=LAMBDA_A),
                   PcPoint(project([1, 0]), 0.0))
    m2 = run_chain(S, WalkConfig((0.5, 0.5), seed=2, n_steps=100_000, burn_in=1_000, c=LAMBDA_A),
                   PcPoint(project([-1, 2]), 3.0))
    w1 = wasserstein_angle(m1, m2)
    dt = time.perf_counter() - t0
    record(3, "unique stationary measure", w1 < 0.01 and dt < 10.0, "W1 %.3g, %.2fs" % (w1, dt))


def test_04_circle_marginal_uniform(S):
    cfg = WalkConfig((0.5, 0.5), seed=4, n_steps=101_000, burn_in=1_000, c=LAMBDA_A)
    m = run_chain(S, cfg, PcPoint(project([1, 0]), 0.0))
    ks = m.z_ks_statistic()
    record(4, "circle marginal", m.count == 100_000 and ks < 0.01, "KS %.4f on %d samples"
           % (ks, m.count))


def test_05_support_is_limit_set(S):
    L = limit_set_approx(S, 8)
    cfg = WalkConfig((0.5, 0.5), seed=5)
    rng = np.random.default_rng(5)
    d = np.array([walk_limitset_distance(S, cfg, PcPoint(project(rng.standard_normal(2)),
                                                         rng.uniform(0, 2 * math.pi)), L, 50, t)
                  for t in range(1000)])
    frac = float(np.mean(d < 1e-3))
    record(5, "support", frac >= 0.99, "%.1f%% of 1000 trials within 1e-3 (max %.3g)"
           % (100 * frac, d.max()))


def test_06_aperiodicity():
    t0 = time.perf_counter()
    gap = aperiodicity_gap([LOG_LAMBDA_A, LOG_LAMBDA_B], 500)
    dt = time.perf_counter() - t0
    record(6, "aperiodicity", gap < 1e-2 * LOG_LAMBDA_A and dt < 1.0,
           "gap/log(lambda_a) %.4g, %.2fs" % (gap / LOG_LAMBDA_A, dt))


def test_07_limit_set_structure(S, L12):
    L14 = limit_set_approx(S, 14)
    worst = 0.0
    for g in S:
        imgs = np.array([act(g, p).rep for p in L12.points])
        worst = max(worst, float(np.max(L14.distance(imgs))))
    fit = box_dimension(L12)
    ok = worst <= L12.dedup_eps + 1e-6 and 0 < fit.dimension < 1 and fit.residual < 0.1
    record(7, "limit set", ok, "invariance defect %.3g, box dimension %.4f, residual %.3f"
           % (worst, fit.dimension, fit.residual))


def _closure(gens, x, q):
    seen = {tuple(x)}
    todo = [tuple(x)]
    while todo:
        p = todo.pop()
        for g in gens:
            img = tuple(int(v) % q for v in g.entries.dot(np.array(p, dtype=object)))
            if img not in seen:
                seen.add(img)
                todo.append(img)
    return seen


def test_08_torus_dichotomy(S):
    t0 = time.perf_counter()
    finite_ok, count = True, 0
    for q in range(1, 8):
        for n1 in range(q):
            for n2 in range(q):
                rep = orbit_rational(S, RationalTorusPoint(q, (n1, n2)))
                pts = {tuple(p) for p in rep.points.tolist()}
                finite_ok &= rep.finite and pts == _closure(S, (n1, n2), q)
                count += 1
    bits = 100
    x0 = [Fraction(math.isqrt(2 << (2 * bits)), 1 << bits) - 1,
          Fraction(math.isqrt(3 << (2 * bits)), 1 << bits) - 1]
    cov = orbit_float(S, x0, 22, resolution=50, keep_points=False).coverage_fraction
    dt = time.perf_counter() - t0
    record(8, "torus dichotomy", finite_ok and cov >= 0.99 and dt < 60.0,
           "%d rational points closed exactly, coverage %.4f, %.1fs" % (count, cov, dt))


def test_09_escape(S):
    C = S.max_norm
    rng = np.random.default_rng(9)
    ball_ok = True
    for _ in range(100):
        x = rng.standard_normal(2)
        x *= rng.uniform(1e-3, 1.0) / np.linalg.norm(x)
        w = escape_from_ball(S, x)
        n = float(np.linalg.norm(w.product.to_float() @ x))
        ball_ok &= 1 < n <= C
    eps = default_epsilon(S)
    torus_ok, tested = True, 0
    while tested < 100:
        q = int(rng.integers(2, 10 ** 6))
        x = RationalTorusPoint(q, tuple(int(v) for v in rng.integers(-30, 30, 2)))
        if x.is_zero():
            continue
        res = epsilon_escape_check(S, x, eps)
        img = res.word.product @ np.array(x.to_fractions(), dtype=object)
        torus_ok &= res.success and sum((v - round(v)) ** 2 for v in img) > eps * eps
        tested += 1
    record(9, "escape from balls", ball_ok and torus_ok,
           "ball escapes verified %s, torus escapes verified %s (epsilon %.4f)"
           % (ball_ok, torus_ok, float(eps)))


def test_10_congruence(S):
    details, ok = [], True
    for m in (2, 5):
        res = congruence_words(S, m, 10)
        ident = Matrix.identity(2).mod(m)
        nontrivial = [w for w in res.words if len(w)]
        ok &= bool(nontrivial) and all(w.product.mod(m) == ident for w in res.words)
        ok &= gl_order(2, m) % res.group_order == 0
        details.append("m=%d: %d words, |Gamma_m|=%d divides %d"
                       % (m, len(res.words), res.group_order, gl_order(2, m)))
    record(10, "congruence", ok, "; ".join(details))


def test_11_cocycle():
    rng = np.random.default_rng(11)
    worst, tested = 0.0, 0
    while tested < 10_000:
        g, h = rng.integers(-9, 10, (2, 2, 2))
        if round(np.linalg.det(g)) == 0 or round(np.linalg.det(h)) == 0:
            continue
        if np.linalg.cond(g) >= 1e6 or np.linalg.cond(h) >= 1e6:
            continue
        x = project(rng.standard_normal(2))
        worst = max(worst, cocycle_residual(Matrix(g), Matrix(h), x))
        tested += 1
    record(11, "cocycle", worst <= 1e-10, "max residual %.3g over %d triples" % (worst, tested))


def test_12_shell_convergence(S, L12):
    pts = orbit_points(S, np.array([1, 0]), 18)
    d4 = shell_hausdorff(shell_snapshot(pts, LAMBDA_A, 4), L12)
    d8 = shell_hausdorff(shell_snapshot(pts, LAMBDA_A, 8), L12)
    record(12, "shell convergence", d8 < d4, "t=4: %.3g, t=8: %.3g" % (d4, d8))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
