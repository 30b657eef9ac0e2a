"""Generator sets, words, and finite-budget checks of the standing hypotheses.

Words multiply left to right: the word ``(i1, i2, ..., ik)`` names the
product ``g_i1 @ g_i2 @ ... @ g_ik``, so its rightmost letter acts first on a
vector.
"""

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
import math
import numbers
from typing import NamedTuple

import numpy as np

from .exceptions import (
    BadModulus,
    BudgetExceeded,
    GeneratorFileError,
    NotProximal,
    SearchFailed,
    ZeroVector,
)
from .matrix import (
    DEFAULT_TOL,
    Matrix,
    as_matrix,
    eigen_dominant,
    project,
    wedge_norm,
)

DEFAULT_BUDGET = 2 ** 24
EMPTY_WORD = "ε"


class GeneratorSet:
    """A finite, nonempty list of invertible square matrices with labels.

    >>> S = GeneratorSet([[[2, 1], [1, 1]], [[3, 2], [1, 1]]], labels="ab")
    >>> len(S), S.dim, S.integer_flag, S.dets
    (2, 2, True, (1, 1))
    """

    def __init__(self, generators, labels=None):
        gens = tuple(as_matrix(g) for g in generators)
        if not gens:
            raise ValueError("a generator set needs at least one matrix")
        dim = gens[0].dim
        for i, g in enumerate(gens):
            if g.dim != dim:
                raise ValueError("generator %d has dimension %d, expected %d" % (i, g.dim, dim))
            if not g.is_exact:
                raise ValueError("generators must be exact (integer or rational)")
            if g.det == 0:
                raise ValueError("generator %d is singular" % i)
        if labels is None:
            labels = [chr(ord("a") + i) if i < 26 else "g%d" % i for i in range(len(gens))]
        labels = tuple(str(lab) for lab in labels)
        if len(labels) != len(gens) or len(set(labels)) != len(labels):
            raise ValueError("labels must be distinct and match the generators")
        self.generators = gens
        self.labels = labels
        self.dim = dim
        self.integer_flag = all(g.is_integer for g in gens)
        self.dets = tuple(g.det for g in gens)
        self._float = np.stack([g.to_float() for g in gens])
        self._float.flags.writeable = False

    def __len__(self):
        return len(self.generators)

    def __getitem__(self, i):
        return self.generators[i]

    def __iter__(self):
        return iter(self.generators)

    def __repr__(self):
        return "GeneratorSet(labels=%r, dim=%d)" % (self.labels, self.dim)

    @property
    def float_stack(self):
        """Generators as a read-only ``(k, d, d)`` float array."""
        return self._float

    @property
    def max_norm(self):
        """``C = max ||s||`` over generators (operator norm)."""
        return max(g.norm() for g in self.generators)

    def transpose(self):
        return GeneratorSet([g.T for g in self.generators], self.labels)

    def word(self, spec):
        """Build a :class:`Word` from a label string (or a sequence of labels/indices)."""
        if isinstance(spec, str):
            if spec in ("", EMPTY_WORD):
                seq = []
            elif all(len(lab) == 1 for lab in self.labels):
                seq = list(spec)
            else:
                seq = spec.split(".")
        else:
            seq = list(spec)
        idx = []
        for item in seq:
            if isinstance(item, numbers.Integral):
                idx.append(int(item))
            else:
                idx.append(self.labels.index(item))
        product = Matrix.identity(self.dim)
        for i in idx:
            product = product @ self.generators[i]
        return Word(tuple(idx), product, self.labels)

    # ------------------------------------------------------------------
    # plain-text format

    @classmethod
    def from_text(cls, text, path=None):
        """Parse the ``dim d`` / ``gen <label>`` block format."""
        dim = None
        labels, mats, gen_lines = [], [], []
        current = None
        lineno = 0
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            if tokens[0] == "dim":
                if dim is not None:
                    raise GeneratorFileError("duplicate dim line", lineno, path)
                if len(tokens) != 2:
                    raise GeneratorFileError("expected 'dim <d>'", lineno, path)
                try:
                    dim = int(tokens[1])
                except ValueError:
                    raise GeneratorFileError("dimension must be an integer", lineno, path) from None
                if dim < 2:
                    raise GeneratorFileError("dimension must be at least 2", lineno, path)
                continue
            if dim is None:
                raise GeneratorFileError("file must start with 'dim <d>'", lineno, path)
            if tokens[0] == "gen":
                if current is not None and len(current[1]) != dim:
                    raise GeneratorFileError(
                        "generator %r has %d rows, expected %d" % (current[0], len(current[1]), dim),
                        lineno, path)
                if len(tokens) != 2:
                    raise GeneratorFileError("expected 'gen <label>'", lineno, path)
                if tokens[1] in labels:
                    raise GeneratorFileError("duplicate generator label %r" % tokens[1], lineno, path)
                current = (tokens[1], [], lineno)
                gen_lines.append(lineno)
                labels.append(tokens[1])
                mats.append(current[1])
                continue
            if current is None:
                raise GeneratorFileError("matrix row before any 'gen' line", lineno, path)
            if len(current[1]) == dim:
                raise GeneratorFileError("too many rows for generator %r" % current[0], lineno, path)
            if len(tokens) != dim:
                raise GeneratorFileError("expected %d entries, got %d" % (dim, len(tokens)), lineno, path)
            try:
                row = [Fraction(t) for t in tokens]
            except (ValueError, ZeroDivisionError):
                raise GeneratorFileError("bad matrix entry in %r" % line, lineno, path) from None
            current[1].append(row)
        if dim is None:
            raise GeneratorFileError("empty generator file", 1, path)
        if not mats:
            raise GeneratorFileError("no generators given", lineno, path)
        if len(mats[-1]) != dim:
            raise GeneratorFileError("generator %r is incomplete" % labels[-1], gen_lines[-1], path)
        for lab, rows, ln in zip(labels, mats, gen_lines):
            if Matrix(rows).det == 0:
                raise GeneratorFileError("generator %r is singular" % lab, ln, path)
        return cls(mats, labels)

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read(), path=path)

    def to_text(self):
        lines = ["dim %d" % self.dim]
        for lab, g in zip(self.labels, self.generators):
            lines.append("gen %s" % lab)
            for row in g.entries:
                lines.append(" ".join(str(v) for v in row))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class Word:
    """A sequence of generator indices together with its exact product."""

    indices: tuple
    product: Matrix
    labels: tuple = field(default=(), repr=False)

    def __len__(self):
        return len(self.indices)

    def __str__(self):
        if not self.indices:
            return EMPTY_WORD
        names = [self.labels[i] if self.labels else str(i) for i in self.indices]
        sep = "" if all(len(n) == 1 for n in names) else "."
        return sep.join(names)

    @property
    def name(self):
        return str(self)

    def __eq__(self, other):
        if not isinstance(other, Word):
            return NotImplemented
        return self.indices == other.indices and self.product == other.product

    def __hash__(self):
        return hash(self.indices)

    def __add__(self, other):
        """Concatenation; the product is the matrix product in the same order."""
        return Word(self.indices + other.indices, self.product @ other.product,
                    self.labels or other.labels)


def enumerate_words(S, max_len, budget=DEFAULT_BUDGET):
    """Yield all words of length <= ``max_len``, breadth first and lexicographic.

    Products are built exactly as ``parent.product @ generator``.
    """
    if max_len < 0:
        raise ValueError("max_len must be nonnegative")
    k = len(S)
    total = max_len + 1 if k == 1 else (k ** (max_len + 1) - 1) // (k - 1)
    if total > budget:
        raise BudgetExceeded("%d words requested, budget is %d" % (total, budget))
    level = [Word((), Matrix.identity(S.dim), S.labels)]
    yield level[0]
    for _ in range(max_len):
        nxt = []
        for parent in level:
            for i, g in enumerate(S.generators):
                w = Word(parent.indices + (i,), parent.product @ g, S.labels)
                nxt.append(w)
                yield w
        level = nxt


def orbit_points(S, v, max_len):
    """The vectors ``w @ v`` for every word of length <= ``max_len``.

    Integer data stays in int64 while entries provably fit, otherwise the
    orbit is computed in float64.  Returns a ``(n, d)`` array in the
    breadth-first order of :func:`enumerate_words` up to a permutation
    within each level.
    """
    v = np.asarray(v)
    exact_ok = S.integer_flag and np.issubdtype(v.dtype, np.integer)
    if exact_ok:
        row_sum = max(int(np.max(np.sum(np.abs(g.to_float()), axis=1))) for g in S)
        bound = max(1, int(np.max(np.abs(v)))) * max(row_sum, 1) ** max_len
        exact_ok = bound < 2 ** 62
    if exact_ok:
        gens = [np.array(g.entries, dtype=np.int64) for g in S]
        level = v.astype(np.int64)[None, :]
    else:
        gens = list(S.float_stack)
        level = v.astype(float)[None, :]
    out = [level]
    for _ in range(max_len):
        level = np.concatenate([level @ g.T for g in gens])
        out.append(level)
    return np.concatenate(out)


# ---------------------------------------------------------------------------
# hypothesis verdicts


class Status(str, Enum):
    SATISFIED = "Satisfied"
    VIOLATED = "Violated"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self):
        return self.value


@dataclass
class HypothesisVerdict:
    """Three-valued outcome of a finite search for one of (H0), (H1), (H2)."""

    hypothesis: str
    status: Status
    witness: object = None
    search_depth: int = 0
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "hypothesis": self.hypothesis,
            "status": self.status.value,
            "witness": _witness_json(self.witness),
            "search_depth": self.search_depth,
            "detail": self.detail,
        }


def _witness_json(w):
    if w is None:
        return None
    if isinstance(w, Word):
        return str(w)
    if isinstance(w, (list, tuple)):
        return [_witness_json(x) for x in w]
    if isinstance(w, dict):
        return {k: _witness_json(v) for k, v in w.items()}
    if isinstance(w, np.ndarray):
        return w.tolist()
    if isinstance(w, (np.floating, np.integer)):
        return w.item()
    if isinstance(w, Fraction):
        return str(w)
    return w


def check_H2(S, max_len=6, tol=DEFAULT_TOL, budget=DEFAULT_BUDGET):
    """Search breadth first for a proximal word.

    The property is existential, so the verdict is never ``Violated``.
    """
    for w in enumerate_words(S, max_len, budget):
        if not w.indices:
            continue
        try:
            info = eigen_dominant(w.product, tol)
        except NotProximal:
            continue
        return HypothesisVerdict("H2", Status.SATISFIED, w, len(w),
                                 {"dominant_modulus": info.dominant_modulus,
                                  "gap_ratio": info.gap_ratio})
    return HypothesisVerdict("H2", Status.INCONCLUSIVE, None, max_len,
                             {"reason": "no proximal word up to length %d" % max_len})


def _greedy_growth(mats, v, horizon, threshold, exact=False):
    """Greedy path maximizing the norm; returns (indices applied in order, log10 norm)."""
    log_thr = math.log(threshold)
    if exact:
        y = list(v)
        applied = []
        for _ in range(horizon):
            best = None
            for i, m in enumerate(mats):
                z = [sum(m[r][c] * y[c] for c in range(len(y))) for r in range(len(y))]
                n2 = sum(t * t for t in z)
                if best is None or n2 > best[0]:
                    best = (n2, i, z)
            applied.append(best[1])
            y = best[2]
            if best[0] > 0 and 0.5 * math.log(best[0]) > log_thr:
                return applied, 0.5 * math.log(best[0]), True
        n2 = sum(t * t for t in y)
        return applied, 0.5 * math.log(n2) if n2 else -math.inf, False
    y = np.asarray(v, dtype=float)
    logn = math.log(np.linalg.norm(y))
    y = y / np.linalg.norm(y)
    applied = []
    for _ in range(horizon):
        z = mats @ y
        norms = np.linalg.norm(z, axis=1)
        i = int(np.argmax(norms))
        applied.append(i)
        logn += math.log(norms[i])
        y = z[i] / norms[i]
        if logn > log_thr:
            return applied, logn, True
    return applied, logn, False


def check_H0(S, trials=8, horizon=200, threshold=1e6, seed=0):
    """Heuristic check that every orbit ``Gamma v`` (v != 0) is unbounded.

    ``Satisfied`` when greedy norm growth from ``trials`` random unit vectors
    exceeds ``threshold``; ``Violated`` only if every generator is orthogonal
    (then the unit sphere is an invariant bounded set); else ``Inconclusive``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if all(g.is_orthogonal() for g in S):
        return HypothesisVerdict("H0", Status.VIOLATED,
                                 {"invariant_bounded_set": "unit sphere",
                                  "reason": "all generators orthogonal"}, 0)
    rng = np.random.default_rng(seed)
    mats = S.float_stack
    witnesses = []
    for t in range(trials):
        v = rng.standard_normal(S.dim)
        v /= np.linalg.norm(v)
        applied, logn, ok = _greedy_growth(mats, v, horizon, threshold)
        if not ok:
            return HypothesisVerdict("H0", Status.INCONCLUSIVE, None, horizon,
                                     {"trial": t, "vector": v.tolist(),
                                      "log_norm_reached": logn})
        word = S.word(list(reversed(applied)))
        witnesses.append({"vector": v.tolist(), "word": str(word),
                          "norm": float(np.linalg.norm(word.product @ v))})
    return HypothesisVerdict("H0", Status.SATISFIED, witnesses, horizon,
                             {"threshold": threshold, "trials": trials})


def dual_orbit_unbounded(S, chi, horizon=200, threshold=1e6):
    """Greedy growth of ``||gamma^T chi||`` over transposed generators."""
    chi = [int(c) for c in chi]
    if not S.integer_flag:
        raise ValueError("dual character orbits need integer generators")
    if len(chi) != S.dim:
        raise ValueError("character has wrong length")
    if not any(chi):
        raise ZeroVector("the trivial character has a bounded orbit")
    mats = [[[int(v) for v in row] for row in g.entries.T] for g in S]
    _, _, ok = _greedy_growth(mats, chi, horizon, threshold, exact=True)
    return ok


# -- (H1) ---------------------------------------------------------------


def _squarefree_split(n):
    """Return (k, D) with n = k^2 * D and D squarefree (n > 0)."""
    k, D = 1, 1
    p = 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        k *= p ** (e // 2)
        if e % 2:
            D *= p
        p += 1 if p == 2 else 2
    return k, D * n


class _Surd(NamedTuple):
    """``p + q*sqrt(D)`` with rational p, q."""

    p: Fraction
    q: Fraction


def _smul(a, b, D):
    return _Surd(a.p * b.p + a.q * b.q * D, a.p * b.q + a.q * b.p)


def _sadd(a, b):
    return _Surd(a.p + b.p, a.q + b.q)


def _sneg(a):
    return _Surd(-a.p, -a.q)


class _ExactLine:
    """A line in Q(sqrt D)^2, compared exactly via the cross product."""

    __slots__ = ("D", "x", "y")

    def __init__(self, D, x, y):
        self.D, self.x, self.y = D, x, y

    def apply(self, m):
        D = self.D
        e = [[_Surd(Fraction(v), Fraction(0)) for v in row] for row in m.entries]
        x = _sadd(_smul(e[0][0], self.x, D), _smul(e[0][1], self.y, D))
        y = _sadd(_smul(e[1][0], self.x, D), _smul(e[1][1], self.y, D))
        return _ExactLine(D, x, y)

    def same(self, other):
        if self.D != other.D:
            return False
        c = _sadd(_smul(self.x, other.y, self.D), _sneg(_smul(self.y, other.x, self.D)))
        return c.p == 0 and c.q == 0

    def to_float(self):
        r = math.sqrt(self.D)
        return project([float(self.x.p) + float(self.x.q) * r,
                        float(self.y.p) + float(self.y.q) * r])


def _exact_eigenlines(m):
    """Real eigenlines of an exact 2x2 matrix; ``None`` if it is scalar."""
    (p, q), (r, s) = [[Fraction(v) for v in row] for row in m.entries]
    if q == 0 and r == 0:
        if p == s:
            return None
        one, zero = Fraction(1), Fraction(0)
        return [_ExactLine(1, _Surd(one, zero), _Surd(zero, zero)),
                _ExactLine(1, _Surd(zero, zero), _Surd(one, zero))]
    tr = p + s
    disc = tr * tr - 4 * (p * s - q * r)
    if disc < 0:
        return []
    # sqrt(disc) = (k / den) * sqrt(D) with D squarefree
    num, den = disc.numerator * disc.denominator, disc.denominator
    k, D = _squarefree_split(num) if num else (0, 1)
    root = Fraction(k, den)
    if D == 1:
        roots = [_Surd(tr / 2 + root / 2, Fraction(0)), _Surd(tr / 2 - root / 2, Fraction(0))]
    else:
        roots = [_Surd(tr / 2, root / 2), _Surd(tr / 2, -root / 2)]
    lines = []
    for lam in roots:
        if q != 0:
            ln = _ExactLine(D, _Surd(q, Fraction(0)), _sadd(lam, _Surd(-p, Fraction(0))))
        else:
            ln = _ExactLine(D, _sadd(lam, _Surd(-s, Fraction(0))), _Surd(r, Fraction(0)))
        if not any(ln.same(o) for o in lines):
            lines.append(ln)
    return lines


def _closure(line, gens, bound):
    """Exact orbit of a line under the generators; ``None`` once it exceeds ``bound``."""
    found = [line]
    queue = deque([line])
    while queue:
        cur = queue.popleft()
        for g in gens:
            img = cur.apply(g)
            if not any(img.same(o) for o in found):
                found.append(img)
                if len(found) > bound:
                    return None
                queue.append(img)
    return found


def check_H1(S, depth=3, tol=DEFAULT_TOL, trials=16, seed=0):
    """Strong irreducibility check.

    For ``d = 2`` the check is exact: a finite invariant union of lines must
    consist of eigenlines of any proximal word, so it suffices to close the
    eigenlines of words up to ``depth`` under the generators with exact
    quadratic-surd arithmetic.  For ``d >= 3`` orbits of sampled lines are
    followed numerically and the verdict is ``Satisfied`` or ``Inconclusive``.
    """
    if S.dim == 2:
        return _check_H1_plane(S, depth, tol)
    return _check_H1_sampled(S, depth, tol, trials, seed)


def _check_H1_plane(S, depth, tol):
    bound = max(2, len(S) * depth)
    candidates = []
    proximal_word = None
    for w in enumerate_words(S, depth):
        if not w.indices:
            continue
        lines = _exact_eigenlines(w.product)
        if lines is None:
            continue
        if proximal_word is None:
            try:
                eigen_dominant(w.product, tol)
                proximal_word = w
            except NotProximal:
                pass
        for ln in lines:
            if not any(ln.same(c) for c in candidates):
                candidates.append(ln)
    if proximal_word is None:
        # no proximal word: also try coordinate axes and diagonals
        zero = Fraction(0)
        for x, y in ((1, 0), (0, 1), (1, 1), (1, -1)):
            ln = _ExactLine(1, _Surd(Fraction(x), zero), _Surd(Fraction(y), zero))
            if not any(ln.same(c) for c in candidates):
                candidates.append(ln)
    invariant = []
    for ln in candidates:
        orbit = _closure(ln, S.generators, bound)
        if orbit is None:
            continue
        for o in orbit:
            if not any(o.same(i) for i in invariant):
                invariant.append(o)
    if invariant:
        witness = [o.to_float().rep.tolist() for o in invariant]
        return HypothesisVerdict("H1", Status.VIOLATED, {"invariant_lines": witness}, depth,
                                 {"lines": len(invariant)})
    if proximal_word is not None:
        return HypothesisVerdict("H1", Status.SATISFIED, proximal_word, depth,
                                 {"candidates": len(candidates), "closure_bound": bound,
                                  "reason": "eigenlines of the witness escape every "
                                            "finite invariant set"})
    return HypothesisVerdict("H1", Status.INCONCLUSIVE, None, depth,
                             {"reason": "no proximal word up to depth %d" % depth})


def _check_H1_sampled(S, depth, tol, trials, seed, eps=1e-9):
    bound = max(2, len(S) * depth)
    rng = np.random.default_rng(seed)
    starts = [project(rng.standard_normal(S.dim)).rep for _ in range(trials)]
    for w in enumerate_words(S, depth):
        if not w.indices:
            continue
        try:
            starts.append(eigen_dominant(w.product, tol).dominant_vector.rep)
        except NotProximal:
            pass
    mats = S.float_stack
    for v in starts:
        found = [v]
        queue = deque([v])
        escaped = False
        while queue and not escaped:
            cur = queue.popleft()
            for m in mats:
                img = project(m @ cur).rep
                if np.min(wedge_norm(np.array(found), img[None, :])) > eps:
                    found.append(img)
                    queue.append(img)
                    if len(found) > bound:
                        escaped = True
                        break
        if not escaped:
            return HypothesisVerdict("H1", Status.INCONCLUSIVE,
                                     {"finite_line_orbit": [f.tolist() for f in found]}, depth,
                                     {"reason": "a sampled line has a small orbit"})
    return HypothesisVerdict("H1", Status.SATISFIED, None, depth,
                             {"sampled_lines": len(starts), "closure_bound": bound,
                              "heuristic": True})


# ---------------------------------------------------------------------------
# congruence sub-semigroups


def _is_prime(m):
    if m < 2:
        return False
    return all(m % p for p in range(2, math.isqrt(m) + 1))


def _mat_mod_mul(x, y, m):
    d = len(x)
    return tuple(tuple(sum(x[i][k] * y[k][j] for k in range(d)) % m for j in range(d))
                 for i in range(d))


def reduction_group_order(S, m):
    """Order of the group generated by the generators reduced mod ``m``."""
    gens = [g.mod(m) for g in S]
    ident = tuple(tuple(int(i == j) for j in range(S.dim)) for i in range(S.dim))
    seen = {ident}
    queue = deque([ident])
    while queue:
        cur = queue.popleft()
        for g in gens:
            nxt = _mat_mod_mul(g, cur, m)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return len(seen)


def gl_order(d, p):
    """``|GL(d, Z/pZ)|`` for a prime ``p``."""
    order = 1
    for i in range(d):
        order *= p ** d - p ** i
    return order


class CongruenceWords(NamedTuple):
    words: list
    group_order: int
    modulus: int


def congruence_words(S, m, max_len, budget=DEFAULT_BUDGET):
    """Words of length <= ``max_len`` whose product is the identity mod ``m``.

    Also returns the order of the finite reduction group generated by the
    generators mod ``m`` (a subgroup of ``GL(d, Z/mZ)`` because ``m`` does
    not divide any generator determinant).
    """
    if not S.integer_flag:
        raise ValueError("congruence words need integer generators")
    if not _is_prime(m):
        raise BadModulus("%d is not prime" % m)
    for lab, det in zip(S.labels, S.dets):
        if det % m == 0:
            raise BadModulus("%d divides det(%s) = %d" % (m, lab, det))
    ident = Matrix.identity(S.dim).mod(m)
    words = [w for w in enumerate_words(S, max_len, budget) if w.product.mod(m) == ident]
    return CongruenceWords(words, reduction_group_order(S, m), m)


# ---------------------------------------------------------------------------
# escape from the unit ball


def _is_exact_vector(x):
    return all(isinstance(v, (numbers.Rational, Fraction)) and not isinstance(v, bool)
               for v in x)


def escape_from_ball(S, x, budget=10 ** 6):
    """Find a word ``g`` with ``1 < ||g x|| <= C`` for ``0 < ||x|| <= 1``.

    Generators are applied while the norm stays at most one; the search is
    breadth first over such chains, so the returned word is the first
    crossing in lexicographic order.  ``C`` is the largest generator
    operator norm.  Exact vectors (ints/fractions) are handled exactly.
    """
    x = list(np.ravel(np.asarray(x, dtype=object)))
    exact = _is_exact_vector(x)
    if exact:
        x = [Fraction(v) for v in x]
        n2 = sum(v * v for v in x)
    else:
        x = np.array([float(v) for v in x])
        n2 = float(x @ x)
    if len(x) != S.dim:
        raise ValueError("vector has wrong dimension")
    if n2 == 0:
        raise ZeroVector("x must be nonzero")
    if n2 > 1:
        raise ValueError("x must lie in the closed unit ball")
    if exact:
        mats = [[[Fraction(v) for v in row] for row in g.entries] for g in S]

        def apply(i, y):
            m = mats[i]
            return [sum(m[r][c] * y[c] for c in range(len(y))) for r in range(len(y))]

        def norm2(y):
            return sum(v * v for v in y)
    else:
        fl = S.float_stack

        def apply(i, y):
            return fl[i] @ y

        def norm2(y):
            return float(y @ y)

    C = S.max_norm
    level = [((), x)]
    visited = 0
    while level:
        nxt = []
        for i in range(len(S)):
            for indices, y in level:
                z = apply(i, y)
                visited += 1
                w_idx = (i,) + indices
                if norm2(z) > 1:
                    word = S.word(w_idx)
                    _verify_escape(word, x, C, exact)
                    return word
                nxt.append((w_idx, z))
                if visited > budget:
                    raise SearchFailed("no escape from the unit ball within %d nodes" % budget)
        level = nxt
    raise SearchFailed("search frontier exhausted")


def _verify_escape(word, x, C, exact):
    if exact:
        y = word.product @ np.array(x, dtype=object)
        n = math.sqrt(float(sum(v * v for v in y)))
        ok = sum(v * v for v in y) > 1
    else:
        n = float(np.linalg.norm(word.product.to_float() @ x))
        ok = n > 1
    if not (ok and n <= C * (1 + 1e-12)):
        raise SearchFailed("escape postcondition failed: |gx| = %r, C = %r" % (n, C))
