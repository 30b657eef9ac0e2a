import math

from hypothesis import assume, given, settings, strategies as st
import numpy as np
import pytest

from projdyn import (
    GeneratorSet,
    InvalidConfig,
    Matrix,
    PcPoint,
    WalkConfig,
    cocycle_residual,
    contraction_curve,
    contraction_stat,
    dirac_concentration,
    eigen_dominant,
    limit_set_approx,
    lyapunov_top,
    norm_ratio_limit,
    proj_distance,
    project,
    run_chain,
    sample_letters,
    step_pc,
    walk_limitset_distance,
    wasserstein_angle,
)
from projdyn.walk import EmpiricalMeasure, lipschitz_discrepancy, walk_endpoints

from conftest import A, LAMBDA_A, LAMBDA_B, LOG_LAMBDA_A, LOG_LAMBDA_B, ROT, SLOPE_A

TWO_PI = 2 * math.pi


def uniform(**kw):
    return WalkConfig((0.5, 0.5), **kw)


class TestConfig:
    def test_alpha(self):
        cfg = uniform(c=LAMBDA_A)
        assert abs(cfg.alpha * math.log(cfg.c) - TWO_PI) < 1e-12

    @pytest.mark.parametrize("kw", [
        dict(weights=(0.5, 0.6)),
        dict(weights=(-0.5, 1.5)),
        dict(weights=(0.5, 0.5), c=1.0),
        dict(weights=(0.5, 0.5), seed=-1),
        dict(weights=(0.5, 0.5), n_steps=-3),
    ])
    def test_invalid(self, kw):
        with pytest.raises(InvalidConfig):
            WalkConfig(**kw)

    def test_weight_count_checked(self, S):
        with pytest.raises(InvalidConfig):
            run_chain(S, WalkConfig((1.0,), n_steps=10, burn_in=1), PcPoint(project([1, 0]), 0))


class TestLetters:
    def test_degenerate(self):
        assert not sample_letters(WalkConfig((1, 0)), 1000).any()

    def test_frequency(self):
        freq = np.mean(sample_letters(uniform(seed=4), 10 ** 5) == 0)
        assert 0.495 <= freq <= 0.505

    def test_deterministic(self):
        cfg = uniform(seed=99)
        assert np.array_equal(sample_letters(cfg, 500, 3), sample_letters(cfg, 500, 3))
        assert not np.array_equal(sample_letters(cfg, 500, 3), sample_letters(cfg, 500, 4))

    def test_golden_prefix(self):
        # frozen output of PCG64(SeedSequence(seed, spawn_key=(trial, 0)))
        assert sample_letters(uniform(seed=0), 24).tolist() == [
            1, 1, 0, 1, 1, 1, 1, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 1, 0]
        assert sample_letters(uniform(seed=12345), 24, trial=7).tolist() == [
            1, 1, 0, 1, 1, 1, 0, 1, 1, 0, 0, 0, 0, 1, 1, 0, 0, 1, 0, 0, 1, 1, 1, 0]


class TestStep:
    def test_identity(self):
        v = PcPoint(project([0.3, 0.7]), 1.25)
        assert step_pc(Matrix.identity(2), v, 2.0) == v

    @pytest.mark.parametrize("c", [2.0, LAMBDA_A, 7.5])
    def test_homothety_exact(self, c):
        rng = np.random.default_rng(0)
        for _ in range(20):
            v = PcPoint(project(rng.standard_normal(2)), rng.uniform(0, TWO_PI))
            g = Matrix([[c, 0.0], [0.0, c]])
            assert step_pc(g, v, c) == v

    def test_shift_by_a(self):
        out = step_pc(A, PcPoint(project([1, 0]), 0.0), 2.0)
        assert out.base == project([2, 1])
        alpha = TWO_PI / math.log(2)
        assert out.z == pytest.approx((alpha * math.log(math.sqrt(5))) % TWO_PI, abs=1e-12)

    def test_wrap(self):
        assert PcPoint(project([1, 0]), TWO_PI).z == 0.0
        assert PcPoint(project([1, 0]), -0.5).z == pytest.approx(TWO_PI - 0.5)


class TestChain:
    def test_single_sample(self, S):
        m = run_chain(S, uniform(n_steps=11, burn_in=10), PcPoint(project([1, 0]), 0))
        assert m.count == 1

    def test_burn_in_too_long(self, S):
        with pytest.raises(InvalidConfig):
            run_chain(S, uniform(n_steps=10, burn_in=10), PcPoint(project([1, 0]), 0))

    def test_eigendirection_fixed(self, S):
        u = eigen_dominant(A).dominant_vector
        c = 2.0
        m = run_chain(S, WalkConfig((1, 0), n_steps=60, burn_in=0, c=c), PcPoint(u, 0.0))
        assert np.max(np.abs(m.points - u.rep)) < 1e-14
        step = (TWO_PI / math.log(c) * LOG_LAMBDA_A) % TWO_PI
        expected = (np.arange(1, 61) * step) % TWO_PI
        gap = np.abs(m.z - expected)
        assert np.max(np.minimum(gap, TWO_PI - gap)) < 1e-9

    def test_start_independence_and_uniform_z(self, S):
        cfg1 = uniform(seed=1, n_steps=30_000, c=LAMBDA_A)
        cfg2 = uniform(seed=2, n_steps=30_000, c=LAMBDA_A)
        m1 = run_chain(S, cfg1, PcPoint(project([1, 0]), 0.0))
        m2 = run_chain(S, cfg2, PcPoint(project([-1, 3]), 2.0))
        assert wasserstein_angle(m1, m2) < 0.01
        assert m1.z_ks_statistic() < 0.02
        # the stationary measure lives on the positive-quadrant Cantor set
        assert np.all(m1.points > 0)


class TestMeasureDistances:
    def test_point_masses(self):
        assert wasserstein_angle([0.3], [0.4]) == pytest.approx(0.1)
        assert wasserstein_angle([0.05], [math.pi - 0.05]) == pytest.approx(0.1)

    def test_identical(self):
        ang = np.random.default_rng(0).uniform(0, math.pi, 100)
        assert wasserstein_angle(ang, ang) == 0

    def test_uniform_vs_half(self):
        # uniform on [0, pi) against uniform on [0, pi/2): W1 on the circle is pi/8
        n = 4000
        u = (np.arange(n) + 0.5) * math.pi / n
        h = (np.arange(n) + 0.5) * math.pi / (2 * n)
        assert wasserstein_angle(u, h) == pytest.approx(math.pi / 8, rel=1e-3)

    def test_lipschitz_discrepancy(self):
        rng = np.random.default_rng(1)
        pts = rng.standard_normal((500, 3))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        m = EmpiricalMeasure(pts)
        assert lipschitz_discrepancy(m, m) == 0
        other = EmpiricalMeasure(np.tile([1.0, 0, 0], (10, 1)))
        assert lipschitz_discrepancy(m, other) > 0.1


class TestContraction:
    def test_same_point(self, S):
        assert contraction_stat(S, uniform(), [1, 2], [2, 4], 10, trials=20) == 0

    def test_zero_steps(self, S):
        x, y = [1, 0.3], [0.2, 1]
        assert contraction_stat(S, uniform(), x, y, 0, trials=5) == proj_distance(x, y)

    def test_decreasing(self, S):
        curve = contraction_curve(S, uniform(seed=5), [1, -2], [3, 1], [5, 10, 20, 30], 200)
        means = [p.mean_delta for p in curve]
        assert all(x > y for x, y in zip(means, means[1:]))
        assert means[-1] < 1e-8

    def test_matches_direct_computation_early(self, S):
        # for small n the frame recursion agrees with pushing both vectors
        cfg = uniform(seed=8)
        x, y = np.array([1.0, -2.0]), np.array([3.0, 1.0])
        direct = []
        for t in range(50):
            X = walk_endpoints(S, cfg, np.array([x]), 6, first_trial=t)[0]
            Y = walk_endpoints(S, cfg, np.array([y]), 6, first_trial=t)[0]
            direct.append(proj_distance(X, Y))
        assert contraction_stat(S, cfg, x, y, 6, trials=50) == pytest.approx(np.mean(direct),
                                                                            rel=1e-9)

    def test_threads_do_not_change_results(self, S):
        args = (S, uniform(seed=3), [1, 0], [0, 1], [5, 10])
        assert contraction_curve(*args, 64, threads=1) == contraction_curve(*args, 64, threads=3)


class TestDirac:
    def test_uniform_cloud(self, S):
        assert dirac_concentration(S, uniform(), 0, 100).diameter > 0.99

    def test_concentrates(self, S):
        assert dirac_concentration(S, uniform(seed=2), 30, 100).diameter < 1e-8

    def test_power_iteration(self, S):
        center, diam = dirac_concentration(S, WalkConfig((1, 0)), 60, 50)
        assert center.rep[1] / center.rep[0] == pytest.approx(SLOPE_A, rel=1e-12)
        assert diam < 1e-12

    def test_probe_count(self, S):
        with pytest.raises(ValueError):
            dirac_concentration(S, uniform(), 3, 1)


class TestNormRatio:
    def test_zero_steps(self, S):
        assert norm_ratio_limit(S, uniform(), np.array([0.6, 0.8]), 0).ratio == 1

    def test_symmetric_generator(self, S):
        u = eigen_dominant(A).dominant_vector.rep
        assert norm_ratio_limit(S, WalkConfig((1, 0)), u, 30).ratio == pytest.approx(1, abs=1e-12)

    def test_residual(self, S):
        for seed in range(5):
            res = norm_ratio_limit(S, uniform(seed=seed), np.array([0.6, -0.8]), 40)
            assert res.residual < 1e-6

    def test_requires_unit(self, S):
        with pytest.raises(ValueError):
            norm_ratio_limit(S, uniform(), np.array([1.0, 1.0]), 3)


class TestCocycle:
    def test_examples(self):
        e1 = project([1, 0])
        assert cocycle_residual(Matrix.identity(2), Matrix.identity(2), e1) == 0
        assert cocycle_residual(A, Matrix([[3, 2], [1, 1]]), e1) <= 1e-10
        assert cocycle_residual(ROT, A, e1) < 1e-15

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(-9, 9), min_size=8, max_size=8),
           st.floats(0, math.pi))
    def test_random_well_conditioned(self, entries, theta):
        g = np.reshape(entries[:4], (2, 2))
        h = np.reshape(entries[4:], (2, 2))
        assume(abs(np.linalg.det(g)) > 0 and abs(np.linalg.det(h)) > 0)
        assume(np.linalg.cond(g) < 1e6 and np.linalg.cond(h) < 1e6)
        x = project([math.cos(theta), math.sin(theta)])
        assert cocycle_residual(Matrix(g), Matrix(h), x) <= 1e-10


class TestLyapunov:
    def test_single_generator(self, S):
        est = lyapunov_top(S, WalkConfig((1, 0)), 200, 4)
        assert abs(est.mean - LOG_LAMBDA_A) <= 2 * est.stderr + 1e-2
        # (1/n) log ||a^n|| = log lambda_a exactly since a is symmetric
        assert est.mean == pytest.approx(LOG_LAMBDA_A, rel=1e-12)

    def test_rotation(self, S_rot):
        assert lyapunov_top(S_rot, WalkConfig((1.0,)), 50, 3).mean == pytest.approx(0, abs=1e-14)

    def test_uniform_between_rates(self, S):
        est = lyapunov_top(S, uniform(seed=3), 200, 50)
        assert LOG_LAMBDA_A <= est.mean <= LOG_LAMBDA_B

    def test_threads(self, S):
        assert lyapunov_top(S, uniform(), 50, 30, threads=4) == lyapunov_top(S, uniform(), 50, 30)

    def test_needs_steps(self, S):
        with pytest.raises(ValueError):
            lyapunov_top(S, uniform(), 0, 3)


class TestLimitSetDistance:
    def test_invariant_start(self, S):
        L = limit_set_approx(S, 4)
        start = PcPoint(project(L.points[0]), 0.0)
        assert str(L.words[0]) == "a"
        for n in (0, 5, 40):
            assert walk_limitset_distance(S, WalkConfig((1, 0)), start, L, n) < 1e-14

    def test_zero_steps(self, S):
        L = limit_set_approx(S, 4)
        start = PcPoint(project([-1, 1]), 0.0)
        assert walk_limitset_distance(S, uniform(), start, L, 0) == L.distance([[-1, 1]])[0]

    def test_converges(self, S):
        L = limit_set_approx(S, 8)
        d = [walk_limitset_distance(S, uniform(), PcPoint(project([-1, 1]), 0.0), L, 50, trial=t)
             for t in range(20)]
        assert max(d) < 1e-3
