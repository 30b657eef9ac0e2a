"""scikit-learn style wrappers around the functional API.

Each estimator is fitted on a generator set.  Hyperparameters live in
``__init__`` (so ``get_params``/``set_params``/``clone`` work) and fitted
state in trailing-underscore attributes.  ``transform`` acts on point
arrays of shape ``(n, d)``.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import limitset, walk
from .matrix import DEFAULT_TOL
from .torus import orbit_float
from .validation import check_generators, check_int, check_points, check_real, check_weights


class LimitSetEstimator(TransformerMixin, BaseEstimator):
    """Approximate the limit set; ``transform`` gives distances to it.

    >>> from projdyn import GeneratorSet
    >>> est = LimitSetEstimator(max_len=4).fit(GeneratorSet([[[2, 1], [1, 1]], [[3, 2], [1, 1]]]))
    >>> est.transform([[0.85065081, 0.52573111]]).shape
    (1, 1)
    """

    def __init__(self, max_len=8, tol=DEFAULT_TOL, dedup_eps=limitset.DEFAULT_DEDUP_EPS):
        self.max_len = max_len
        self.tol = tol
        self.dedup_eps = dedup_eps

    def fit(self, X, y=None):
        S = check_generators(X)
        check_int(self.max_len, "max_len", 1)
        approx = limitset.limit_set_approx(S, self.max_len, self.tol, self.dedup_eps)
        self.approx_ = approx
        self.points_ = approx.points
        self.words_ = [str(w) for w in approx.words]
        self.n_features_in_ = S.dim
        if S.dim == 2:
            self.box_dimension_ = limitset.box_dimension(approx).dimension if len(approx) > 1 else 0.0
        return self

    def transform(self, X):
        check_is_fitted(self, "approx_")
        X = check_points(X, self.n_features_in_)
        return self.approx_.distance(X)[:, None]


class SpectrumEstimator(BaseEstimator):
    """Log dominant moduli of short proximal words and the aperiodicity gap."""

    def __init__(self, max_len=6, coeff_bound=500, tol=DEFAULT_TOL):
        self.max_len = max_len
        self.coeff_bound = coeff_bound
        self.tol = tol

    def fit(self, X, y=None):
        S = check_generators(X)
        check_int(self.max_len, "max_len", 1)
        spec = limitset.spectrum(S, self.max_len, self.tol)
        self.words_ = [str(w) for w, _ in spec]
        self.values_ = spec.values
        distinct = len(limitset._distinct(np.abs(self.values_[self.values_ != 0])))
        self.aperiodicity_gap_ = (limitset.aperiodicity_gap(spec, self.coeff_bound)
                                  if distinct >= 2 else None)
        return self


class StationaryMeasureEstimator(TransformerMixin, BaseEstimator):
    """Occupation measure of the random walk on P_c(V).

    ``transform`` pushes each row through ``n_transform_steps`` random
    letters and returns the resulting sign-normalized unit vectors.
    """

    def __init__(self, weights=None, c=2.0, n_steps=100_000, burn_in=1_000, seed=0,
                 n_transform_steps=50):
        self.weights = weights
        self.c = c
        self.n_steps = n_steps
        self.burn_in = burn_in
        self.seed = seed
        self.n_transform_steps = n_transform_steps

    def _config(self, S):
        return walk.WalkConfig(check_weights(self.weights, len(S)), self.seed,
                               check_int(self.n_steps, "n_steps", 1),
                               check_int(self.burn_in, "burn_in", 0),
                               check_real(self.c, "c", 1.0))

    def fit(self, X, y=None):
        S = check_generators(X)
        cfg = self._config(S)
        start = walk.PcPoint.from_vector(np.eye(S.dim)[0], cfg.c)
        self.generators_ = S
        self.config_ = cfg
        self.measure_ = walk.run_chain(S, cfg, start)
        self.z_ks_statistic_ = self.measure_.z_ks_statistic()
        self.n_features_in_ = S.dim
        return self

    def transform(self, X):
        check_is_fitted(self, "measure_")
        X = check_points(X, self.n_features_in_)
        return walk.walk_endpoints(self.generators_, self.config_, X, self.n_transform_steps)


class LyapunovEstimator(BaseEstimator):
    """Top Lyapunov exponent ``lim (1/n) log ||S_n||`` by Monte Carlo."""

    def __init__(self, weights=None, n=200, trials=100, seed=0, threads=None):
        self.weights = weights
        self.n = n
        self.trials = trials
        self.seed = seed
        self.threads = threads

    def fit(self, X, y=None):
        S = check_generators(X)
        cfg = walk.WalkConfig(check_weights(self.weights, len(S)), self.seed)
        est = walk.lyapunov_top(S, cfg, check_int(self.n, "n", 1),
                                check_int(self.trials, "trials", 1), self.threads)
        self.exponent_, self.stderr_ = est
        return self


class TorusOrbitEstimator(TransformerMixin, BaseEstimator):
    """Grid coverage of torus orbits; ``transform`` maps points to coverage fractions."""

    def __init__(self, max_len=12, resolution=50, truncate=False):
        self.max_len = max_len
        self.resolution = resolution
        self.truncate = truncate

    def fit(self, X, y=None):
        S = check_generators(X)
        if not S.integer_flag:
            raise ValueError("torus orbits need integer generators")
        self.generators_ = S
        self.n_features_in_ = S.dim
        return self

    def transform(self, X):
        check_is_fitted(self, "generators_")
        X = check_points(X, self.n_features_in_, nonzero=False)
        cov = [orbit_float(self.generators_, list(row), check_int(self.max_len, "max_len", 0),
                           resolution=check_int(self.resolution, "resolution", 1),
                           truncate=self.truncate, keep_points=False).coverage_fraction
               for row in X]
        return np.array(cov)[:, None]
