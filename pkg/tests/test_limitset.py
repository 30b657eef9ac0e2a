import math
import warnings

import numpy as np
import pytest

from projdyn import (
    DegenerateSpectrum,
    EmptyApprox,
    EmptyShell,
    GeneratorSet,
    Matrix,
    act,
    aperiodicity_gap,
    box_dimension,
    limit_set_approx,
    orbit_points,
    shell_hausdorff,
    shell_snapshot,
    spectral_radius,
    spectrum,
)
from projdyn.exceptions import InsufficientScales
from projdyn.limitset import box_counting_dimension, nearest_distance

from conftest import A, LOG_LAMBDA_A, LOG_LAMBDA_B, ROT, SLOPE_A, SLOPE_B


@pytest.fixture(scope="module")
def L8():
    S = GeneratorSet([A, Matrix([[3, 2], [1, 1]])], "ab")
    return limit_set_approx(S, 8)


class TestLimitSet:
    def test_length_one(self, S):
        L = limit_set_approx(S, 1)
        slopes = sorted(p[1] / p[0] for p in L.points)
        assert slopes == pytest.approx([SLOPE_B, SLOPE_A], rel=1e-14)
        assert [str(w) for w in L.words] == ["a", "b"]

    @pytest.mark.parametrize("k", [1, 3, 6])
    def test_powers_share_direction(self, S_a, k):
        assert len(limit_set_approx(S_a, k)) == 1

    def test_positive_quadrant(self, L8):
        assert np.all(L8.points > 0)

    def test_dedup_separation(self, L8):
        P = L8.points
        for i in range(len(P)):
            others = np.delete(P, i, axis=0)
            assert nearest_distance(others, P[i:i + 1])[0] >= L8.dedup_eps / 2

    def test_points_are_eigenvectors(self, L8):
        for p, w in zip(L8.points, L8.words):
            g = w.product.to_float()
            img = g @ p
            assert abs(img[0] * p[1] - img[1] * p[0]) / np.linalg.norm(img) < 1e-9

    def test_forward_invariance(self, S):
        L6, L8 = limit_set_approx(S, 6), limit_set_approx(S, 8)
        for g in S:
            imgs = np.array([act(g, p).rep for p in L6.points])
            assert np.max(L8.distance(imgs)) <= L6.dedup_eps + 1e-6

    def test_stability(self, S):
        dists = []
        for L in (4, 6, 8):
            small, big = limit_set_approx(S, L), limit_set_approx(S, L + 2)
            dists.append(float(np.max(big.distance(small.points))))
        assert dists[0] >= dists[1] >= dists[2]

    def test_empty(self, S_rot):
        with pytest.raises(EmptyApprox):
            limit_set_approx(S_rot, 4)

    def test_nearest_distance_three_dim(self):
        P = np.eye(3)
        d = nearest_distance(P, [[1, 1, 0]])
        assert d[0] == pytest.approx(1 / math.sqrt(2))


class TestBoxDimension:
    def test_single_point(self, S_a):
        assert box_dimension(limit_set_approx(S_a, 3)).dimension == 0

    def test_full_interval(self):
        k = 12
        angles = np.arange(2 ** k) * math.pi / 2 ** k
        scales = [math.pi / 2 ** j for j in range(2, k + 1)]
        fit = box_counting_dimension(angles, scales)
        assert fit.dimension == pytest.approx(1.0, abs=0.05)

    def test_middle_thirds(self):
        pts = np.array([0.0])
        for _ in range(10):
            pts = np.concatenate([pts / 3, 2 / 3 + pts / 3])
        scales = [3.0 ** -j for j in range(1, 9)]
        fit = box_counting_dimension(pts * 0.999, scales, period=1.0)
        assert fit.dimension == pytest.approx(math.log(2) / math.log(3), abs=0.05)

    def test_example(self, L8):
        fit = box_dimension(L8)
        assert 0 < fit.dimension < 1 and fit.residual < 0.1

    def test_too_few_scales(self):
        with pytest.raises(InsufficientScales):
            box_counting_dimension([0.1, 0.2], [0.5, 0.25])


class TestSpectrum:
    def test_values(self, S):
        spec = dict((str(w), v) for w, v in spectrum(S, 2))
        assert spec["a"] == pytest.approx(LOG_LAMBDA_A, rel=1e-14)
        assert spec["b"] == pytest.approx(LOG_LAMBDA_B, rel=1e-14)
        assert spec["aa"] == pytest.approx(2 * LOG_LAMBDA_A, rel=1e-9)

    def test_matches_spectral_radius(self, S):
        for w, v in spectrum(S, 4):
            assert v == pytest.approx(math.log(spectral_radius(w.product)), rel=1e-9)

    def test_power_rule(self, S):
        spec = {str(w): v for w, v in spectrum(S, 4)}
        for base in ("a", "b", "ab"):
            for k in range(1, 4 // len(base) + 1):
                assert spec[base * k] == pytest.approx(k * spec[base], rel=1e-8)

    def test_rotation_has_none(self, S_rot):
        assert len(spectrum(S_rot, 4)) == 0


class TestAperiodicity:
    def test_lattice(self):
        s = 0.7
        with pytest.warns(DegenerateSpectrum):
            assert aperiodicity_gap([s, 2 * s], 50) == pytest.approx(s)

    def test_example(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            gap = aperiodicity_gap([LOG_LAMBDA_A, LOG_LAMBDA_B], 500)
        assert gap < 1e-2 * LOG_LAMBDA_A

    def test_single_entry(self):
        with pytest.raises(ValueError):
            aperiodicity_gap([LOG_LAMBDA_A], 10)

    def test_monotone_in_bound(self):
        gaps = [aperiodicity_gap([LOG_LAMBDA_A, LOG_LAMBDA_B], m) for m in (10, 50, 100, 500)]
        assert all(x >= y for x, y in zip(gaps, gaps[1:]))


class TestShell:
    def test_unit_points(self):
        snap = shell_snapshot([[1, 0], [0, 1], [0.6, 0.8]], 2, 0)
        assert len(snap) == 3 and np.all(snap.radii == 1)

    def test_rescaling(self):
        # norm 5 lies in [2^2, 2^3), so it belongs to shell t = 2 with radius 5/4
        assert shell_snapshot([[3, 4]], 2, 2).radii[0] == pytest.approx(1.25)
        assert shell_snapshot([[0, 3]], 2, 1).radii[0] == pytest.approx(1.5)
        with pytest.raises(EmptyShell):
            shell_snapshot([[3, 4]], 2, 1)

    def test_empty(self):
        with pytest.raises(EmptyShell):
            shell_snapshot([[1, 0]], 2, 3)

    def test_radii_in_range(self, S):
        pts = orbit_points(S, np.array([1, 0]), 12)
        snap = shell_snapshot(pts, math.exp(LOG_LAMBDA_A), 5)
        c = snap.c
        assert np.all((snap.radii >= 1 - 1e-12) & (snap.radii <= c + 1e-12))

    def test_convergence(self, S, L8):
        c = math.exp(LOG_LAMBDA_A)
        pts = orbit_points(S, np.array([1, 0]), 14)
        d4 = shell_hausdorff(shell_snapshot(pts, c, 4), L8)
        d8 = shell_hausdorff(shell_snapshot(pts, c, 8), L8)
        assert d8 < d4
