"""Argument checks shared by the estimator layer and the command line runner."""

import math
import numbers

import numpy as np

from .exceptions import InvalidConfig, ZeroVector
from .semigroup import GeneratorSet


def check_generators(S):
    """Return ``S`` as a :class:`GeneratorSet`.

    Accepts a generator set, a sequence of matrices or a ``(k, d, d)``
    integer array.
    """
    if isinstance(S, GeneratorSet):
        return S
    if isinstance(S, np.ndarray):
        if S.ndim != 3 or S.shape[1] != S.shape[2]:
            raise ValueError("expected a (k, d, d) array of generators, got shape %r" % (S.shape,))
        if not np.issubdtype(S.dtype, np.integer) and S.dtype != object:
            raise ValueError("generator arrays must be integer or object (exact) arrays")
        S = list(S)
    return GeneratorSet(S)


def check_int(value, name, minimum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise InvalidConfig("%s must be an integer, got %r" % (name, value))
    if minimum is not None and value < minimum:
        raise InvalidConfig("%s must be at least %d, got %d" % (name, minimum, value))
    return int(value)


def check_real(value, name, greater_than=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not math.isfinite(value):
        raise InvalidConfig("%s must be a finite real, got %r" % (name, value))
    if greater_than is not None and not value > greater_than:
        raise InvalidConfig("%s must exceed %g, got %g" % (name, greater_than, value))
    return float(value)


def check_weights(weights, k):
    """A probability vector of length ``k``; ``None`` means uniform."""
    if weights is None:
        return (1.0 / k,) * k
    w = np.asarray(weights, dtype=float).ravel()
    if len(w) != k:
        raise InvalidConfig("%d weights for %d generators" % (len(w), k))
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InvalidConfig("weights must be finite and nonnegative")
    if abs(math.fsum(w) - 1.0) > 1e-12:
        raise InvalidConfig("weights must sum to 1")
    return tuple(float(x) for x in w)


def check_points(X, dim, nonzero=True):
    """A float ``(n, dim)`` array; rows must be nonzero when ``nonzero``."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != dim:
        raise ValueError("expected points of dimension %d, got shape %r" % (dim, X.shape))
    if not np.all(np.isfinite(X)):
        raise ValueError("points contain non-finite values")
    if nonzero and np.any(np.linalg.norm(X, axis=1) == 0):
        raise ZeroVector("points must be nonzero")
    return X


def check_unit_vector(x, dim, tol=1e-12):
    x = check_points(x, dim)[0]
    if abs(np.linalg.norm(x) - 1.0) > tol:
        raise ValueError("expected a unit vector, got norm %r" % float(np.linalg.norm(x)))
    return x
