"""Matrices over exact and floating domains and their projective action.

Exact matrices hold Python ``int`` or :class:`fractions.Fraction` entries in
numpy object arrays, so products of long words never overflow.  Everything
that needs eigen or singular structure works on a float64 copy.
"""

from dataclasses import dataclass
from fractions import Fraction
import math
import numbers

import numpy as np

from .exceptions import NotProximal, NumericalFailure, ZeroVector

EXACT_INTEGER = "exact-integer"
EXACT_RATIONAL = "exact-rational"
FLOAT64 = "float64"

DEFAULT_TOL = 1e-9

_TINY = 1e-300


def _to_exact(value):
    if isinstance(value, bool):
        raise TypeError("boolean matrix entries are not supported")
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else value
    if isinstance(value, str):
        f = Fraction(value.strip())
        return f.numerator if f.denominator == 1 else f
    if isinstance(value, numbers.Rational):
        f = Fraction(value.numerator, value.denominator)
        return f.numerator if f.denominator == 1 else f
    raise TypeError("not an exact scalar: %r" % (value,))


def _readonly(arr):
    arr.flags.writeable = False
    return arr


class Matrix:
    """Square matrix with an exact (integer/rational) or float64 entry domain.

    Parameters
    ----------
    entries : array_like
        A square 2-D array.  Python or numpy integers, fractions and strings
        such as ``"3/4"`` give an exact matrix; floats give a float64 matrix.
    domain : str, optional
        Force a domain instead of inferring it.

    Examples
    --------
    >>> a = Matrix([[2, 1], [1, 1]])
    >>> a.domain, a.det
    ('exact-integer', 1)
    >>> (a @ a).entries.tolist()
    [[5, 3], [3, 2]]
    """

    __slots__ = ("_a", "domain", "_det", "_float")

    def __init__(self, entries, domain=None):
        if isinstance(entries, Matrix):
            if domain is None or domain == entries.domain:
                self._a = entries._a
                self.domain = entries.domain
                self._det = entries._det
                self._float = entries._float
                return
            entries = entries._a
        raw = np.asarray(entries, dtype=object if domain != FLOAT64 else float)
        if raw.ndim != 2 or raw.shape[0] != raw.shape[1] or raw.shape[0] < 1:
            raise ValueError("matrix must be square and non-empty, got shape %r" % (raw.shape,))
        forced = domain
        if domain is None:
            domain = self._infer_domain(raw)
        if domain == FLOAT64:
            arr = np.array(raw, dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                raise ValueError("matrix entries must be finite")
        elif domain in (EXACT_INTEGER, EXACT_RATIONAL):
            arr = np.empty(raw.shape, dtype=object)
            for idx, v in np.ndenumerate(raw):
                arr[idx] = _to_exact(v)
            is_int = all(isinstance(v, int) for v in arr.flat)
            if forced == EXACT_INTEGER and not is_int:
                raise ValueError("non-integer entry in exact-integer matrix")
            domain = EXACT_INTEGER if is_int else EXACT_RATIONAL
        else:
            raise ValueError("unknown domain %r" % (domain,))
        self._a = _readonly(arr)
        self.domain = domain
        self._det = None
        self._float = None

    @staticmethod
    def _infer_domain(raw):
        for v in raw.flat:
            if isinstance(v, (float, np.floating)) and not isinstance(v, Fraction):
                return FLOAT64
        return EXACT_INTEGER

    @classmethod
    def _wrap(cls, arr, domain):
        # trusted constructor for products of already validated matrices
        obj = cls.__new__(cls)
        obj._a = _readonly(arr)
        obj.domain = domain
        obj._det = None
        obj._float = None
        return obj

    @classmethod
    def identity(cls, dim, domain=EXACT_INTEGER):
        if domain == FLOAT64:
            return cls(np.eye(dim), FLOAT64)
        return cls([[1 if i == j else 0 for j in range(dim)] for i in range(dim)])

    @property
    def dim(self):
        return self._a.shape[0]

    @property
    def entries(self):
        """Read-only entry array (object dtype when exact)."""
        return self._a

    @property
    def is_exact(self):
        return self.domain != FLOAT64

    @property
    def is_integer(self):
        return self.domain == EXACT_INTEGER

    @property
    def T(self):
        return Matrix(self._a.T.copy(), self.domain)

    def to_float(self):
        """Float64 copy of the entries (cached, read-only)."""
        if self._float is None:
            if self.domain == FLOAT64:
                self._float = self._a
            else:
                self._float = _readonly(np.array([[float(v) for v in row] for row in self._a]))
        return self._float

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if other.dim != self.dim:
                raise ValueError("dimension mismatch")
            if self.is_exact and other.is_exact:
                dom = _join_domain(self.domain, other.domain)
                if dom == EXACT_RATIONAL:
                    return Matrix(self._a.dot(other._a))
                return Matrix._wrap(self._a.dot(other._a), dom)
            return Matrix(self.to_float() @ other.to_float(), FLOAT64)
        vec = np.asarray(other)
        if self.is_exact and vec.dtype == object:
            return self._a.dot(vec)
        return self.to_float() @ np.asarray(vec, dtype=float)

    def __mul__(self, scalar):
        if self.is_exact and isinstance(scalar, numbers.Rational):
            return Matrix(self._a * _to_exact(scalar))
        return Matrix(self.to_float() * float(scalar), FLOAT64)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.dim == other.dim and bool(np.all(self._a == other._a))

    def __hash__(self):
        return hash((self.dim, tuple(self._a.flat)))

    def __repr__(self):
        return "Matrix(%r)" % (self._a.tolist(),)

    @property
    def det(self):
        """Determinant: exact for exact matrices, float otherwise."""
        if self._det is None:
            if self.is_exact:
                self._det = _exact_det(self._a)
            else:
                self._det = float(np.linalg.det(self._a))
        return self._det

    @property
    def is_invertible(self):
        return self.det != 0

    def inverse(self):
        """Exact inverse (rational entries) or float inverse."""
        if not self.is_invertible:
            raise ZeroDivisionError("singular matrix")
        if not self.is_exact:
            return Matrix(np.linalg.inv(self._a), FLOAT64)
        d = self.dim
        aug = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(d)]
               for i, row in enumerate(self._a)]
        for col in range(d):
            piv = next(r for r in range(col, d) if aug[r][col] != 0)
            aug[col], aug[piv] = aug[piv], aug[col]
            p = aug[col][col]
            aug[col] = [v / p for v in aug[col]]
            for r in range(d):
                if r != col and aug[r][col] != 0:
                    f = aug[r][col]
                    aug[r] = [vr - f * vc for vr, vc in zip(aug[r], aug[col])]
        return Matrix([row[d:] for row in aug])

    def power(self, k):
        if k < 0:
            return self.inverse().power(-k)
        result = Matrix.identity(self.dim, self.domain if self.is_exact else FLOAT64)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def norm(self):
        """Operator (spectral) norm, i.e. the largest singular value."""
        return float(np.linalg.norm(self.to_float(), 2))

    def mod(self, m):
        """Entrywise reduction mod ``m`` as a tuple of tuples (integer matrices only)."""
        if not self.is_integer:
            raise ValueError("reduction mod m needs an integer matrix")
        return tuple(tuple(int(v) % m for v in row) for row in self._a)

    def is_orthogonal(self):
        """Exact test of g^T g = Id for exact matrices, 1e-12 tolerance for floats."""
        if self.is_exact:
            return bool(np.all(self._a.T.dot(self._a) == Matrix.identity(self.dim)._a))
        a = self._a
        return bool(np.allclose(a.T @ a, np.eye(self.dim), atol=1e-12, rtol=0))


def _join_domain(d1, d2):
    if d1 == EXACT_INTEGER and d2 == EXACT_INTEGER:
        return EXACT_INTEGER
    return EXACT_RATIONAL


def _exact_det(a):
    d = a.shape[0]
    if d == 1:
        return a[0, 0]
    if d == 2:
        return a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if all(isinstance(v, int) for v in a.flat):
        # Bareiss fraction-free elimination
        m = [list(row) for row in a]
        sign, prev = 1, 1
        for k in range(d - 1):
            if m[k][k] == 0:
                swap = next((r for r in range(k + 1, d) if m[r][k] != 0), None)
                if swap is None:
                    return 0
                m[k], m[swap] = m[swap], m[k]
                sign = -sign
            for i in range(k + 1, d):
                for j in range(k + 1, d):
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            prev = m[k][k]
        return sign * m[d - 1][d - 1]
    m = [[Fraction(v) for v in row] for row in a]
    det = Fraction(1)
    for k in range(d):
        piv = next((r for r in range(k, d) if m[r][k] != 0), None)
        if piv is None:
            return 0
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            det = -det
        det *= m[k][k]
        for i in range(k + 1, d):
            f = m[i][k] / m[k][k]
            if f:
                m[i] = [vi - f * vk for vi, vk in zip(m[i], m[k])]
    return det.numerator if det.denominator == 1 else det


def as_matrix(g):
    """Coerce ``g`` to :class:`Matrix` (no copy if it already is one)."""
    return g if isinstance(g, Matrix) else Matrix(g)


# ---------------------------------------------------------------------------
# projective points


def _sign_normalize(u):
    idx = int(np.argmax(np.abs(u)))
    if u[idx] < 0:
        u = -u
    return u


def _normalize_rows(X):
    """Sign-normalized unit rows of a 2-D float array (no zero check)."""
    X = X / np.linalg.norm(X, axis=1, keepdims=True)
    idx = np.argmax(np.abs(X), axis=1)
    sgn = np.sign(X[np.arange(len(X)), idx])
    sgn[sgn == 0] = 1.0
    return X * sgn[:, None]


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    """A line through the origin, stored as a sign-normalized unit vector.

    The first coordinate of largest absolute value is positive, which picks
    one of the two unit representatives ``±u`` deterministically.
    """

    rep: np.ndarray

    @property
    def dim(self):
        return self.rep.shape[0]

    @property
    def angle(self):
        """Angle in ``[0, pi)`` of the line (two-dimensional points only)."""
        if self.dim != 2:
            raise ValueError("angle is only defined for d = 2")
        return math.atan2(self.rep[1], self.rep[0]) % math.pi

    def __eq__(self, other):
        if not isinstance(other, ProjectivePoint):
            return NotImplemented
        return np.array_equal(self.rep, other.rep)

    def __hash__(self):
        return hash(self.rep.tobytes())

    def __repr__(self):
        return "ProjectivePoint(%s)" % np.array2string(self.rep, precision=6, separator=", ")


def project(v):
    """Sign-normalized unit representative of the line spanned by ``v``.

    The result is a fixed point of the normalization, so projecting an
    already projected representative returns bit-identical coordinates.

    >>> project([-1.0, -1.0]).rep.tolist() == [2 ** -0.5, 2 ** -0.5]
    True
    """
    if isinstance(v, ProjectivePoint):
        return v
    u = np.array([float(x) for x in np.ravel(v)], dtype=float)
    if u.size == 0:
        raise ZeroVector("empty vector")
    n = float(np.linalg.norm(u))
    if not n > _TINY or not math.isfinite(n):
        raise ZeroVector("cannot project vector of norm %r" % n)
    u = _sign_normalize(u)
    # Iterate u -> u / |u| until it repeats; on a rounding cycle pick the
    # smallest member so that projecting a projected point is bit-identical.
    seen = []
    while True:
        key = u.tobytes()
        if key in seen:
            cycle = seen[seen.index(key):]
            if len(cycle) > 1:
                u = min((np.frombuffer(k, dtype=float) for k in cycle), key=tuple).copy()
            break
        seen.append(key)
        u = u / float(np.linalg.norm(u))
    return ProjectivePoint(_readonly(u))


def proj_distance(x, y):
    """The projective distance ``|u ^ v|`` between unit representatives."""
    u = x.rep if isinstance(x, ProjectivePoint) else project(x).rep
    v = y.rep if isinstance(y, ProjectivePoint) else project(y).rep
    return float(min(1.0, wedge_norm(u[None, :], v[None, :])[0]))


def wedge_norm(U, V):
    """Row-wise ``|u ^ v|`` for two ``(n, d)`` arrays, computed from 2x2 minors."""
    U = np.atleast_2d(U)
    V = np.atleast_2d(V)
    d = U.shape[1]
    if d == 2:
        return np.abs(U[:, 0] * V[:, 1] - U[:, 1] * V[:, 0])
    total = np.zeros(np.broadcast_shapes(U.shape[:1], V.shape[:1]))
    for i in range(d):
        for j in range(i + 1, d):
            total += (U[:, i] * V[:, j] - U[:, j] * V[:, i]) ** 2
    return np.sqrt(total)


def act(g, x):
    """Projective action ``g.pi(x) = pi(g x)``."""
    g = as_matrix(g)
    rep = x.rep if isinstance(x, ProjectivePoint) else np.asarray(x, dtype=float)
    return project(g.to_float() @ rep)


# ---------------------------------------------------------------------------
# eigenstructure


@dataclass(frozen=True)
class EigenInfo:
    """Dominant eigen-data of a proximal matrix.

    ``eigenvalue`` is the signed real dominant eigenvalue; ``gap_ratio`` is
    the second largest modulus divided by ``dominant_modulus``.
    """

    dominant_modulus: float
    dominant_vector: ProjectivePoint
    gap_ratio: float
    hyperplane_normal: ProjectivePoint
    eigenvalue: float


def _moduli_2x2(a):
    """Sorted eigen-moduli and the (largest, smallest) real roots if real."""
    tr = a[0, 0] + a[1, 1]
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    disc = tr * tr - 4 * det
    if disc < 0:
        m = math.sqrt(abs(float(det)))
        return (m, m), None
    s = math.sqrt(float(disc))
    ftr = float(tr)
    if ftr >= 0:
        big = (ftr + s) / 2.0
    else:
        big = (ftr - s) / 2.0
    small = float(det) / big if big != 0 else 0.0
    return (abs(big), abs(small)), (big, small)


def _dominant_vector_2x2(af, lam_small):
    # Cayley-Hamilton: columns of (g - lambda_2 I) span the dominant eigenline
    m = af - lam_small * np.eye(2)
    c0, c1 = m[:, 0], m[:, 1]
    col = c0 if np.dot(c0, c0) >= np.dot(c1, c1) else c1
    return project(col)


def _null_vector(a, lam):
    _, _, vt = np.linalg.svd(a - lam * np.eye(a.shape[0]))
    return project(vt[-1])


def eigen_dominant(g, tol=DEFAULT_TOL):
    """Dominant eigenvalue/eigenvector of a proximal matrix.

    Raises :class:`NotProximal` unless ``g`` has a real eigenvalue whose
    modulus exceeds every other modulus by a relative margin larger than
    ``tol``.
    """
    g = as_matrix(g)
    if not 0 < tol <= 1e-3:
        raise ValueError("tol must lie in (0, 1e-3]")
    af = g.to_float()
    d = g.dim
    if d == 1:
        raise ValueError("d = 1 is not supported")
    if d == 2:
        moduli, roots = _moduli_2x2(g.entries)
        if roots is None or not moduli[0] - moduli[1] > tol * moduli[0]:
            raise NotProximal(moduli)
        lam, lam2 = roots
        vec = _dominant_vector_2x2(af, lam2)
        normal = _dominant_vector_2x2(af.T, lam2)
    else:
        try:
            w = np.linalg.eigvals(af)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(str(exc)) from exc
        order = np.argsort(-np.abs(w), kind="stable")
        w = w[order]
        moduli = (abs(w[0]), abs(w[1]))
        if not moduli[0] - moduli[1] > tol * moduli[0]:
            raise NotProximal(moduli)
        lam = float(w[0].real)
        vec = _null_vector(af, lam)
        normal = _null_vector(af.T, lam)
    mod = abs(lam)
    resid = np.linalg.norm(af @ vec.rep - lam * vec.rep)
    scale = _op_norm(af)
    if resid > max(tol, 1e-12) * scale:
        raise NumericalFailure("eigenvector residual %.3g too large" % resid)
    return EigenInfo(
        dominant_modulus=mod,
        dominant_vector=vec,
        gap_ratio=float(moduli[1] / moduli[0]),
        hyperplane_normal=normal,
        eigenvalue=lam,
    )


def _op_norm(af):
    if af.shape == (2, 2):
        fro2 = float(np.sum(af * af))
        det = float(af[0, 0] * af[1, 1] - af[0, 1] * af[1, 0])
        return math.sqrt((fro2 + math.sqrt(max(0.0, fro2 * fro2 - 4 * det * det))) / 2)
    return float(np.linalg.norm(af, 2))


def is_proximal(g, tol=DEFAULT_TOL):
    try:
        eigen_dominant(g, tol)
    except NotProximal:
        return False
    return True


def spectral_radius(g):
    """Largest modulus over all complex eigenvalues."""
    g = as_matrix(g)
    if g.dim == 2:
        return _moduli_2x2(g.entries)[0][0]
    return float(np.max(np.abs(np.linalg.eigvals(g.to_float()))))


def is_expanding(g, tol=DEFAULT_TOL):
    """True iff some eigenvalue has modulus larger than ``1 + tol``."""
    return spectral_radius(g) > 1.0 + tol


@dataclass(frozen=True)
class KAKFactorization:
    """``g = k @ diag(singular_values) @ k_prime`` with k, k_prime orthogonal."""

    k: np.ndarray
    singular_values: np.ndarray
    k_prime: np.ndarray

    def reconstruct(self):
        return self.k @ np.diag(self.singular_values) @ self.k_prime


def kak(g):
    """Polar-type ``K A+ K`` factorization via the singular value decomposition."""
    g = as_matrix(g)
    try:
        u, s, vt = np.linalg.svd(g.to_float())
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc
    return KAKFactorization(_readonly(u), _readonly(s), _readonly(vt))
