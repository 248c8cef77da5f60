"""Piecewise linear functions anchored at the origin.

Two value types live here. :class:`PwlConvex` stores a convex function as a
sequence of faces in slope order; :class:`PwlPath` stores an arbitrary
continuous piecewise linear function by its breakpoints. Both work with any
ordered field supporting ``+ - * /`` (``float`` or :class:`fractions.Fraction`),
so the random-walk oracles can run in exact arithmetic through the same code.
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .errors import (
    HorizonMismatch,
    MismatchedLengths,
    NonFiniteInput,
    NonPositiveLength,
    OutOfDomain,
)

__all__ = [
    "Face",
    "PwlConvex",
    "PwlPath",
    "build_convex_from_faces",
    "face_offsets",
    "evaluate",
    "lower_convex_minorant_of_path",
    "sup_distance",
    "reordered_overlay",
    "merge_equal_slopes",
    "write_faces_csv",
    "read_faces_csv",
    "write_path_csv",
    "read_path_csv",
]

# relative slack when comparing horizons / clamping evaluation points
HORIZON_RTOL = 1e-12


def _check_finite(x, what):
    if not math.isfinite(float(x)):
        raise NonFiniteInput(f"{what} must be finite, got {x!r}")


@dataclass(frozen=True)
class Face:
    length: float
    height: float

    def __post_init__(self):
        _check_finite(self.length, "face length")
        _check_finite(self.height, "face height")
        if not self.length > 0:
            raise NonPositiveLength(f"face length must be positive, got {self.length!r}")

    @property
    def slope(self):
        return self.height / self.length


def _cumulate(items):
    out = [0 * items[0]] if items else []
    acc = out[0] if out else 0
    for x in items:
        acc = acc + x
        out.append(acc)
    return out


class _Piecewise:
    """Shared evaluation over a knot list ``(times, values)``."""

    times: tuple
    values: tuple

    @property
    def horizon(self):
        return self.times[-1]

    def __call__(self, t):
        return evaluate(self, t)

    def knots(self):
        return self.times, self.values


class PwlConvex(_Piecewise):
    """Convex piecewise linear function on ``[0, horizon]`` with ``F(0) = 0``.

    Faces are kept in non-decreasing slope order. Equal-slope faces are not
    merged, so face counts survive for the enumeration oracles.
    """

    def __init__(self, faces: Sequence[Face], horizon=None):
        faces = tuple(faces)
        if not faces:
            raise MismatchedLengths("a convex function needs at least one face")
        for a, b in zip(faces, faces[1:]):
            if b.slope < a.slope:
                raise ValueError("faces must be in non-decreasing slope order")
        times = _cumulate([f.length for f in faces])
        total = times[-1]
        if horizon is None:
            horizon = total
        elif abs(float(total - horizon)) > HORIZON_RTOL * abs(float(horizon)):
            raise HorizonMismatch(f"face lengths sum to {total!r}, horizon is {horizon!r}")
        times[-1] = horizon
        self.faces = faces
        self.times = tuple(times)
        self.values = tuple(_cumulate([f.height for f in faces]))

    @property
    def lengths(self):
        return tuple(f.length for f in self.faces)

    @property
    def heights(self):
        return tuple(f.height for f in self.faces)

    @property
    def slopes(self):
        return tuple(f.slope for f in self.faces)

    def minimum(self):
        return min(self.values)

    def __repr__(self):
        return f"PwlConvex(horizon={self.horizon!r}, n_faces={len(self.faces)})"


class PwlPath(_Piecewise):
    """Continuous piecewise linear path through ``(breakpoints[i], values[i])``."""

    def __init__(self, breakpoints: Sequence, values: Sequence):
        times = tuple(breakpoints)
        vals = tuple(values)
        if len(times) != len(vals):
            raise MismatchedLengths("breakpoints and values differ in length")
        if len(times) < 2:
            raise ValueError("a path needs at least two breakpoints")
        if times[0] != 0 or vals[0] != 0:
            raise ValueError("paths start at the origin (t=0, value=0)")
        for x in times + vals:
            _check_finite(x, "breakpoint data")
        for a, b in zip(times, times[1:]):
            if not b > a:
                raise ValueError("breakpoint times must be strictly increasing")
        self.times = times
        self.values = vals

    @property
    def breakpoints(self):
        return self.times

    def increments(self):
        return tuple(b - a for a, b in zip(self.values, self.values[1:]))

    def __eq__(self, other):
        if not isinstance(other, PwlPath):
            return NotImplemented
        return self.times == other.times and self.values == other.values

    def __hash__(self):
        return hash((self.times, self.values))

    def __repr__(self):
        return f"PwlPath(n_breakpoints={len(self.times)}, horizon={self.horizon!r})"


Pwl = Union[PwlConvex, PwlPath]


def _validate_faces(lengths, heights):
    lengths, heights = list(lengths), list(heights)
    if len(lengths) != len(heights):
        raise MismatchedLengths(f"{len(lengths)} lengths but {len(heights)} heights")
    if not lengths:
        raise MismatchedLengths("at least one face is required")
    for ln, h in zip(lengths, heights):
        _check_finite(ln, "length")
        _check_finite(h, "height")
        if not ln > 0:
            raise NonPositiveLength(f"lengths must be positive, got {ln!r}")
    return lengths, heights


def face_offsets(lengths, heights):
    """Left endpoints ``a_n`` of the linear pieces, by the direct double sum.

    ``a_n`` adds the lengths of all strictly shallower faces plus the lengths
    of earlier-indexed faces with an equal slope. Quadratic; the sort-based
    :func:`build_convex_from_faces` is the fast route and this is its check.
    """
    lengths, heights = _validate_faces(lengths, heights)
    slopes = [h / ln for ln, h in zip(lengths, heights)]
    zero = 0 * lengths[0]
    offsets = []
    for n, s_n in enumerate(slopes):
        a = zero
        for k, s_k in enumerate(slopes):
            if s_k < s_n or (s_k == s_n and k < n):
                a = a + lengths[k]
        offsets.append(a)
    return offsets


def build_convex_from_faces(lengths, heights, horizon=None) -> PwlConvex:
    """Compose faces into the unique convex function they determine.

    A stable sort by slope realises the tie rule: equal slopes keep their
    original index order.
    """
    lengths, heights = _validate_faces(lengths, heights)
    faces = [Face(ln, h) for ln, h in zip(lengths, heights)]
    order = sorted(range(len(faces)), key=lambda i: faces[i].slope)
    return PwlConvex([faces[i] for i in order], horizon=horizon)


def evaluate(f: Pwl, t):
    """Value of ``f`` at ``t`` by linear interpolation between knots."""
    times, values = f.times, f.values
    T = times[-1]
    slack = HORIZON_RTOL * abs(float(T))
    if t < 0 or t > T:
        if -slack <= float(t) < 0:
            t = 0 * T
        elif 0 < float(t - T) <= slack:
            t = T
        else:
            raise OutOfDomain(f"t={t!r} outside [0, {T!r}]")
    i = bisect.bisect_left(times, t)
    if times[i] == t:
        return values[i]
    t0, t1 = times[i - 1], times[i]
    v0, v1 = values[i - 1], values[i]
    return v0 + (v1 - v0) * ((t - t0) / (t1 - t0))


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def lower_hull_indices(times, values):
    """Indices of the lower convex hull vertices of points sorted by time."""
    hull: list[int] = []
    pts = list(zip(times, values))
    for i, p in enumerate(pts):
        while len(hull) >= 2 and _cross(pts[hull[-2]], pts[hull[-1]], p) <= 0:
            hull.pop()
        hull.append(i)
    return hull


def lower_convex_minorant_of_path(path: PwlPath) -> PwlConvex:
    """Greatest convex function below a piecewise linear path.

    Computed as the lower hull of the breakpoints (Andrew's monotone chain);
    collinear vertices are dropped so every returned face is maximal.
    """
    times, values = path.times, path.values
    hull = lower_hull_indices(times, values)
    faces = [
        Face(times[j] - times[i], values[j] - values[i]) for i, j in zip(hull, hull[1:])
    ]
    return PwlConvex(faces, horizon=times[-1])


def sup_distance(f: Pwl, g: Pwl):
    """Exact sup-norm of ``f - g``, scanned over the merged breakpoint set."""
    Tf, Tg = f.horizon, g.horizon
    if abs(float(Tf - Tg)) > HORIZON_RTOL * max(abs(float(Tf)), abs(float(Tg))):
        raise HorizonMismatch(f"horizons differ: {Tf!r} vs {Tg!r}")
    grid = sorted(set(f.times[:-1]) | set(g.times[:-1]))
    best = abs(f.values[-1] - g.values[-1])
    for t in grid:
        d = abs(evaluate(f, t) - evaluate(g, t))
        if d > best:
            best = d
    return best


def reordered_overlay(lengths, heights, heights2) -> PwlPath:
    """Lay ``heights`` over the intervals of linearity of the convex function
    built from ``(lengths, heights2)``.

    The result shares its intervals with ``build_convex_from_faces(lengths,
    heights2)`` but need not be convex.
    """
    lengths, heights = _validate_faces(lengths, heights)
    if len(heights2) != len(lengths):
        raise MismatchedLengths("heights2 must match lengths")
    _, heights2 = _validate_faces(lengths, heights2)
    order = sorted(range(len(lengths)), key=lambda i: heights2[i] / lengths[i])
    times = _cumulate([lengths[i] for i in order])
    values = _cumulate([heights[i] for i in order])
    return PwlPath(times, values)


def merge_equal_slopes(faces: Iterable[Face], tol=0.0) -> tuple:
    """Canonical face multiset: adjacent (in slope order) faces whose slopes
    agree within ``tol`` are fused, and the result is returned as a tuple of
    ``(length, height)`` pairs sorted by slope.
    """
    ordered = sorted(faces, key=lambda f: f.slope)
    merged: list[list] = []
    for f in ordered:
        if merged:
            ln, h = merged[-1]
            if abs(f.slope - h / ln) <= tol:
                merged[-1] = [ln + f.length, h + f.height]
                continue
        merged.append([f.length, f.height])
    return tuple((ln, h) for ln, h in merged)


def write_faces_csv(f: PwlConvex, fh, header=True):
    w = csv.writer(fh, lineterminator="\n")
    if header:
        w.writerow(["length", "height"])
    for face in f.faces:
        w.writerow([repr(float(face.length)), repr(float(face.height))])


def read_faces_csv(fh) -> PwlConvex:
    rows = list(csv.DictReader(fh))
    return build_convex_from_faces(
        [float(r["length"]) for r in rows], [float(r["height"]) for r in rows]
    )


def write_path_csv(p: PwlPath, fh, header=True):
    w = csv.writer(fh, lineterminator="\n")
    if header:
        w.writerow(["t", "value"])
    for t, v in zip(p.times, p.values):
        w.writerow([repr(float(t)), repr(float(v))])


def read_path_csv(fh) -> PwlPath:
    rows = list(csv.DictReader(fh))
    return PwlPath([float(r["t"]) for r in rows], [float(r["value"]) for r in rows])
