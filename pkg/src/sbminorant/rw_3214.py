"""Random walks: the 3214 transform, its inverse, discrete stick-breaking,
and exhaustive enumeration oracles.

Integer and :class:`~fractions.Fraction` inputs are handled in exact
arithmetic, so enumerated laws compare with ``==`` and round trips are exact.
Float increments are converted through their decimal ``repr`` for the
oracles (``0.7`` becomes ``7/10``).
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import BadCutPoints, NotInvertible, TieDetected, TooLarge
from .pwl_convex import Face, PwlPath, evaluate, lower_convex_minorant_of_path, lower_hull_indices, merge_equal_slopes
from .rng import as_generator

__all__ = [
    "Walk",
    "FaceDistribution",
    "walk_path",
    "transform_3214",
    "cyclic_shift_above_chord",
    "qualifying_rotations",
    "has_subset_mean_ties",
    "face_containing",
    "invert_3214",
    "sample_discrete_sb_faces",
    "canonical_faces",
    "enumerate_minorant_distribution",
    "enumerate_sb_distribution",
    "total_variation",
    "prop_3214_laws",
    "MAX_ENUM_MINORANT",
    "MAX_ENUM_SB",
]

MAX_ENUM_MINORANT = 8
MAX_ENUM_SB = 6
MAX_TIE_CHECK = 20


def _exact(v):
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    return Fraction(repr(float(v)))


def _is_exact(*vals):
    return all(isinstance(v, (int, Fraction)) for v in vals)


@dataclass(frozen=True)
class Walk:
    increments: tuple
    horizon: object = 1
    perm: tuple = None  # 1-based images, identity when None

    def __post_init__(self):
        object.__setattr__(self, "increments", tuple(self.increments))
        n = len(self.increments)
        if n < 1:
            raise ValueError("a walk needs at least one increment")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        perm = tuple(range(1, n + 1)) if self.perm is None else tuple(self.perm)
        if sorted(perm) != list(range(1, n + 1)):
            raise ValueError("perm must be a bijection on 1..n")
        object.__setattr__(self, "perm", perm)

    @property
    def n(self):
        return len(self.increments)

    def permuted(self):
        return tuple(self.increments[p - 1] for p in self.perm)


def _grid(T, n):
    if _is_exact(T):
        return [Fraction(T) * k / n for k in range(n + 1)]
    return [float(T) * k / n for k in range(n + 1)]


def _partial_sums(xs):
    out = [0 * xs[0]]
    for x in xs:
        out.append(out[-1] + x)
    return out


def walk_path(w: Walk) -> PwlPath:
    """Linear interpolation of the permuted partial sums on the grid ``kT/n``."""
    xs = w.permuted()
    return PwlPath(_grid(w.horizon, w.n), _partial_sums(xs))


def transform_3214(f: PwlPath, g, u, d) -> PwlPath:
    """Reorder the pieces ``[u,d], [g,u], [0,g], [d,T]`` of ``f`` end to end.

    Each piece keeps its orientation and is shifted vertically so the result
    is continuous and starts at zero. On ``(d-g, d]`` the value is
    ``f(d) - f(g) + f(t - (d-g))``; beyond ``d`` the path is unchanged.
    """
    T = f.horizon
    if not (0 <= g <= u <= d <= T):
        raise BadCutPoints(f"need 0 <= g <= u <= d <= T, got g={g!r}, u={u!r}, d={d!r}")
    times, vals = [0 * T], [0 * T]
    start, base = 0 * T, 0 * T
    for a, b in ((u, d), (g, u), (0 * T, g), (d, T)):
        if not b > a:
            continue
        fa = evaluate(f, a)
        inner = [t for t in f.times if a < t < b]
        for t in inner + [b]:
            times.append(start + (t - a))
            vals.append(base + (evaluate(f, t) - fa))
        start = start + (b - a)
        base = vals[-1]
    times[-1] = T
    return PwlPath(times, vals)


def _tol(xs):
    if all(isinstance(x, (int, Fraction)) for x in xs):
        return 0
    return 1e-12 * max(1.0, math.fsum(abs(float(x)) for x in xs))


def _centred_partials(xs):
    n = len(xs)
    total = sum(xs, 0 * xs[0])
    mean = total / n
    acc, out = 0 * xs[0], []
    for x in xs:
        acc = acc + (x - mean)
        out.append(acc)
    return out


def cyclic_shift_above_chord(x: Sequence) -> int:
    """1-based ``k*`` such that ``(x_{k*+1}, ..., x_n, x_1, ..., x_{k*})`` stays above its chord.

    This is the position of the minimum of the centred walk; a second
    minimiser (within tolerance for floats) raises :class:`TieDetected`.
    """
    xs = list(x)
    if not xs:
        raise ValueError("need at least one value")
    c = _centred_partials(xs)
    m = min(c)
    tol = _tol(xs)
    hits = [k for k, v in enumerate(c, start=1) if v - m <= tol]
    if len(hits) > 1:
        raise TieDetected(f"rotations {hits} both stay above the chord")
    return hits[0]


def qualifying_rotations(x: Sequence) -> list:
    """All ``k`` whose rotation has every partial sum ``>= j/n * sum`` (brute force)."""
    xs = list(x)
    n = len(xs)
    total = sum(xs, 0 * xs[0])
    tol = _tol(xs)
    out = []
    for k in range(1, n + 1):
        rot = xs[k:] + xs[:k]
        acc, ok = 0 * xs[0], True
        for j, v in enumerate(rot, start=1):
            acc = acc + v
            if acc - total * j / n < -tol:
                ok = False
                break
        if ok:
            out.append(k)
    return out


def has_subset_mean_ties(x: Sequence, tol=1e-12) -> bool:
    """True when two distinct non-empty subsets of ``x`` share a mean.

    Exhaustive over all ``2^n - 1`` subsets, so limited to ``n <= 20``.
    """
    xs = np.asarray([float(v) for v in x])
    n = xs.size
    if n > MAX_TIE_CHECK:
        raise TooLarge(f"subset check limited to n <= {MAX_TIE_CHECK}")
    masks = np.arange(1, 2**n, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(n)) & 1
    means = (bits @ xs) / bits.sum(axis=1)
    means.sort()
    scale = max(1.0, float(np.max(np.abs(xs))))
    return bool(np.any(np.diff(means) <= tol * scale))


def face_containing(path: PwlPath, t):
    """``(G, D)``: the minorant face of ``path`` with ``G < t <= D``."""
    hull = lower_hull_indices(path.times, path.values)
    vt = [path.times[i] for i in hull]
    if not (vt[0] < t <= vt[-1]):
        raise ValueError("t must lie in (0, T]")
    for a, b in zip(vt, vt[1:]):
        if a < t <= b:
            return a, b
    raise AssertionError("unreachable")


def _grid_increments(path: PwlPath):
    n = len(path.times) - 1
    T = path.horizon
    grid = _grid(T, n)
    exact = _is_exact(*path.times)
    for a, b in zip(grid, path.times):
        if exact and a != b or not exact and abs(float(a) - float(b)) > 1e-12 * float(T):
            raise NotInvertible("path is not on a uniform grid")
    return list(path.increments()), n, T / n


def invert_3214(tf: PwlPath, d_minus_g):
    """Recover ``(g, u, d, f)`` from a 3214-transformed walk path.

    ``d - u`` comes from a cyclic shift of the first ``(d-g) n / T``
    increments; ``d`` is the right end of the last minorant face of ``tf`` on
    ``[d-g, T]`` with slope below ``tf(d-g) / (d-g)``.
    """
    inc, n, h = _grid_increments(tf)
    zero = 0 * tf.horizon
    if d_minus_g == 0:
        return zero, zero, zero, tf
    m_float = d_minus_g / h
    m = int(round(float(m_float)))
    if m < 1 or m > n or abs(float(m_float) - m) > 1e-9:
        raise NotInvertible("d - g is not a positive multiple of the mesh")
    try:
        k = cyclic_shift_above_chord(inc[:m])
    except TieDetected as exc:
        raise NotInvertible(str(exc)) from exc
    a = k % m  # (d - u) / h
    tail_t = tf.times[m:]
    tail_v = tf.values[m:]
    s_star = tail_v[0] / tf.times[m]
    hull = lower_hull_indices(tail_t, tail_v)
    dd = m  # d in grid cells
    for i, j in zip(hull, hull[1:]):
        if (tail_v[j] - tail_v[i]) / (tail_t[j] - tail_t[i]) < s_star:
            dd = m + j
    gg = dd - m
    uu = dd - a
    if not (0 <= gg < uu <= dd <= n):
        raise NotInvertible("recovered cut points are inconsistent")
    # pieces of tf in order: [u,d] (a), [g,u] (b), [0,g] (gg), [d,T]
    f_inc = inc[m : m + gg] + inc[a:m] + inc[:a] + inc[m + gg :]
    f = PwlPath(tf.times, _partial_sums(f_inc))
    g, u, d = tf.times[gg], tf.times[uu], tf.times[dd]
    check = transform_3214(f, g, u, d)
    if not _paths_close(check, tf):
        raise NotInvertible("reassembled path does not reproduce the input")
    return g, u, d, f


def _paths_close(p, q):
    if len(p.times) != len(q.times):
        return False
    if _is_exact(*p.values, *q.values):
        return p.values == q.values
    scale = max(1.0, max(abs(float(v)) for v in q.values))
    return all(abs(float(a) - float(b)) <= 1e-9 * scale for a, b in zip(p.values, q.values))


def sample_discrete_sb_faces(x: Sequence, rng=None, T=1):
    """Discrete stick-breaking faces of a uniformly permuted walk.

    Remainders live on the grid: ``L_k = floor(L_{k-1} V_k n / T) T / n``,
    and face ``k`` is ``(L_{k-1} - L_k, R(L_{k-1}) - R(L_k))``. Returns a list
    of ``(length, height)`` pairs.
    """
    xs = list(x)
    n = len(xs)
    if n < 1:
        raise ValueError("need at least one increment")
    gen = as_generator(rng)
    perm = gen.permutation(n)
    R = _partial_sums([xs[i] for i in perm])
    h = Fraction(T) / n if _is_exact(T) else float(T) / n
    faces, m = [], n
    while m > 0:
        j = int(math.floor(m * gen.random()))
        faces.append(((m - j) * h, R[m] - R[j]))
        m = j
    return faces


def canonical_faces(faces, tol=0) -> tuple:
    """Merge equal-slope faces and sort by slope."""
    return merge_equal_slopes([Face(ln, ht) for ln, ht in faces], tol=tol)


class FaceDistribution(dict):
    """Canonical face multiset -> exact probability."""

    def total(self):
        return sum(self.values(), Fraction(0))

    def add(self, key, p):
        self[key] = self.get(key, Fraction(0)) + p


def _check_size(xs, limit):
    if len(xs) < 1:
        raise ValueError("need at least one increment")
    if len(xs) > limit:
        raise TooLarge(f"enumeration limited to n <= {limit}, got {len(xs)}")


def enumerate_minorant_distribution(x: Sequence, T=1, tol=0) -> FaceDistribution:
    """Exact law of the minorant's faces under a uniform random permutation."""
    xs = [_exact(v) for v in x]
    _check_size(xs, MAX_ENUM_MINORANT)
    T = _exact(T)
    n = len(xs)
    grid = _grid(T, n)
    p = Fraction(1, math.factorial(n))
    out = FaceDistribution()
    for perm in itertools.permutations(xs):
        c = lower_convex_minorant_of_path(PwlPath(grid, _partial_sums(list(perm))))
        out.add(canonical_faces(zip(c.lengths, c.heights), tol), p)
    return out


def _sb_tree(R, h, m, memo):
    """List of ``(faces, prob)`` for discrete stick-breaking started at ``m`` cells."""
    if m == 0:
        return [((), Fraction(1))]
    if m in memo:
        return memo[m]
    res = []
    for j in range(m):
        face = ((m - j) * h, R[m] - R[j])
        for faces, p in _sb_tree(R, h, j, memo):
            res.append((faces + (face,), p / m))
    memo[m] = res
    return res


def enumerate_sb_distribution(x: Sequence, T=1, tol=0) -> FaceDistribution:
    """Exact law of the discrete stick-breaking faces (permutations crossed with the grid tree)."""
    xs = [_exact(v) for v in x]
    _check_size(xs, MAX_ENUM_SB)
    T = _exact(T)
    n = len(xs)
    h = T / n
    pn = Fraction(1, math.factorial(n))
    acc = defaultdict(Fraction)
    for perm in itertools.permutations(xs):
        R = _partial_sums(list(perm))
        for faces, p in _sb_tree(R, h, n, {}):
            acc[canonical_faces(faces, tol)] += p * pn
    return FaceDistribution(acc)


def total_variation(p: dict, q: dict):
    keys = set(p) | set(q)
    return sum((abs(p.get(k, 0) - q.get(k, 0)) for k in keys), Fraction(0)) / 2


def prop_3214_laws(x: Sequence, T=1):
    """The two finite laws that the 3214 transform identifies.

    ``lhs``: ``(U, R)`` with ``U`` uniform on ``{T/n, ..., T}`` and ``R`` the
    uniformly permuted walk. ``rhs``: ``(D - G, Theta_{G,U,D} R)`` where
    ``(G, D]`` is the minorant face of ``R`` containing ``U``. Keys are
    ``(time, path values)``.
    """
    xs = [_exact(v) for v in x]
    _check_size(xs, MAX_ENUM_MINORANT)
    T = _exact(T)
    n = len(xs)
    grid = _grid(T, n)
    p = Fraction(1, n * math.factorial(n))
    lhs, rhs = defaultdict(Fraction), defaultdict(Fraction)
    for perm in itertools.permutations(xs):
        R = PwlPath(grid, _partial_sums(list(perm)))
        for U in grid[1:]:
            G, D = face_containing(R, U)
            lhs[(U, R.values)] += p
            rhs[(D - G, transform_3214(R, G, U, D).values)] += p
    return dict(lhs), dict(rhs)
