"""Stick-breaking samplers for extrema, convex minorants and the vertex process.

Each sampler breaks ``[0, T]`` into sticks and marks every stick with an
independent increment of the model over its length. After ``n_sticks`` sticks
the leftover remainder ``L_n`` becomes one residual stick, so the heights
always sum to an exact draw of ``X_T``; only the geometry of the tail faces is
truncated, with ``E L_n = T 2^-n``.

Scalar samplers return value objects. The ``*_batch`` functions work on
``(n_runs, n_faces)`` arrays, where a zero length marks an absent face.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidHorizon, UnsortedSlopes, ZeroCount
from .levy_models import LevyModel
from .pwl_convex import PwlConvex, build_convex_from_faces
from .rng import as_generator
from .stick_breaking import (
    DEFAULT_N_MAX,
    sample_exponential_horizon_sticks,
    sample_exponential_horizon_sticks_batch,
    sample_sticks,
    sample_sticks_batch,
)

__all__ = [
    "Triplet",
    "MinorantSample",
    "sample_extremal_triplet",
    "sample_minorant",
    "sample_minorant_exp_horizon",
    "vertex_process",
    "sample_multi_drift_infima",
    "sample_triplets_batch",
    "sample_faces_batch",
    "sample_exp_horizon_faces_batch",
    "vertex_process_batch",
    "triplets_from_faces",
    "write_triplets_csv",
    "write_minorant_faces_csv",
]

DEFAULT_N_STICKS = DEFAULT_N_MAX


@dataclass(frozen=True)
class Triplet:
    """``(X_T, sup X, argmax time)``; for a reflected model read it as the infimum triple."""

    final: float
    supremum: float
    argmax_time: float


@dataclass(frozen=True)
class MinorantSample:
    minorant: PwlConvex
    residual_remainder: float
    residual_face_included: bool
    stick_lengths: tuple = ()  # sampling order, residual last when included
    stick_heights: tuple = ()

    @property
    def horizon(self):
        return self.minorant.horizon

    @property
    def final(self):
        return self.minorant.values[-1]


def _check_T(T):
    if not (np.isfinite(T) and T > 0):
        raise InvalidHorizon(f"horizon must be positive and finite, got {T!r}")


def _marked_sticks(model, lengths, remainder, include_residual, gen):
    """Append the residual stick and draw one increment per (positive) stick."""
    lengths = list(lengths)
    if include_residual and remainder > 0:
        lengths.append(remainder)
    lengths = [ln for ln in lengths if ln > 0]
    heights = model.sample_increments(np.asarray(lengths, dtype=float), gen)
    return lengths, [float(h) for h in heights]


def _triplet(lengths, heights, T):
    final = math.fsum(heights)
    sup = math.fsum(max(h, 0.0) for h in heights)
    arg = math.fsum(ln for ln, h in zip(lengths, heights) if h > 0)
    return Triplet(final, sup, min(arg, T))


def sample_extremal_triplet(model: LevyModel, T, n_sticks=DEFAULT_N_STICKS, rng=None) -> Triplet:
    """Draw ``(X_T, sup_{t<=T} X_t, argmax)`` by stick-breaking."""
    _check_T(T)
    if n_sticks < 1:
        raise ZeroCount("n_sticks must be at least 1")
    gen = as_generator(rng)
    seq = sample_sticks(T, n_sticks, gen)
    lengths, heights = _marked_sticks(model, seq.lengths, seq.remainder, True, gen)
    return _triplet(lengths, heights, float(T))


def _minorant_sample(lengths, heights, T, remainder, included):
    f = build_convex_from_faces(lengths, heights, horizon=T)
    return MinorantSample(f, float(remainder), included, tuple(lengths), tuple(heights))


def sample_minorant(
    model: LevyModel, T, n_sticks=DEFAULT_N_STICKS, rng=None, *, include_residual=True
) -> MinorantSample:
    """Convex minorant of ``X`` on ``[0, T]``: faces ``(l_k, xi_k)`` put into slope order."""
    _check_T(T)
    if n_sticks < 1:
        raise ZeroCount("n_sticks must be at least 1")
    gen = as_generator(rng)
    seq = sample_sticks(T, n_sticks, gen)
    lengths, heights = _marked_sticks(model, seq.lengths, seq.remainder, include_residual, gen)
    horizon = float(T) if include_residual else math.fsum(lengths)
    return _minorant_sample(lengths, heights, horizon, seq.remainder, include_residual)


def sample_minorant_exp_horizon(
    model: LevyModel,
    theta,
    min_length=None,
    rng=None,
    *,
    n_max=DEFAULT_N_MAX,
    include_residual=True,
):
    """Convex minorant on an independent ``Exp(theta)`` horizon; returns ``(T, sample)``."""
    gen = as_generator(rng)
    seq = sample_exponential_horizon_sticks(theta, min_length, gen, n_max=n_max)
    lengths, heights = _marked_sticks(model, seq.lengths, seq.remainder, include_residual, gen)
    horizon = seq.horizon if include_residual else math.fsum(lengths)
    return seq.horizon, _minorant_sample(lengths, heights, horizon, seq.remainder, include_residual)


def _check_slopes(slopes):
    slopes = [float(s) for s in slopes]
    for a, b in zip(slopes, slopes[1:]):
        if not b > a:
            raise UnsortedSlopes("slopes must be strictly increasing")
    return slopes


def vertex_process(sample: MinorantSample, slopes):
    """``(sigma_s, eta_s)`` for each ``s``: total length and height of faces with slope ``<= s``.

    ``sigma_s`` is the last time the minorant's derivative is at most ``s`` and
    ``eta_s`` the minorant's value there.
    """
    slopes = _check_slopes(slopes)
    faces = sample.minorant.faces
    out = []
    for s in slopes:
        sel = [f for f in faces if f.slope <= s]
        out.append((math.fsum(f.length for f in sel), math.fsum(f.height for f in sel)))
    return out


def sample_multi_drift_infima(
    model: LevyModel, theta, slopes, min_length=None, rng=None, *, n_max=DEFAULT_N_MAX
):
    """``(argmin time, infimum)`` of ``X_t - s t`` on one ``Exp(theta)`` horizon, per slope."""
    slopes = _check_slopes(slopes)
    _, sample = sample_minorant_exp_horizon(model, theta, min_length, rng, n_max=n_max)
    return [(sig, eta - s * sig) for s, (sig, eta) in zip(slopes, vertex_process(sample, slopes))]


# ---------------------------------------------------------------------------
# vectorised kernels


def _mark_batch(model, lengths, gen):
    safe = np.where(lengths > 0, lengths, 1.0)
    xi = model.sample_increments(safe, gen)
    return np.where(lengths > 0, xi, 0.0)


def sample_faces_batch(model: LevyModel, T, n_runs, n_sticks=DEFAULT_N_STICKS, rng=None):
    """Face arrays ``(lengths, heights)`` of shape ``(n_runs, n_sticks + 1)``, residual last."""
    _check_T(T)
    gen = as_generator(rng)
    lengths, rem = sample_sticks_batch(T, n_runs, n_sticks, gen)
    lengths = np.concatenate([lengths, rem[:, -1:]], axis=1)
    return lengths, _mark_batch(model, lengths, gen)


def triplets_from_faces(lengths, heights, horizon=None):
    """``(final, sup, argmax)`` arrays from face arrays; ``horizon`` defaults to the length sums."""
    final = heights.sum(axis=1)
    sup = np.maximum(heights, 0.0).sum(axis=1)
    arg = np.where(heights > 0, lengths, 0.0).sum(axis=1)
    return final, sup, np.minimum(arg, lengths.sum(axis=1) if horizon is None else horizon)


def sample_triplets_batch(model: LevyModel, T, n_runs, n_sticks=DEFAULT_N_STICKS, rng=None):
    """``n_runs`` independent triplets as three arrays ``(final, sup, argmax)``."""
    lengths, heights = sample_faces_batch(model, T, n_runs, n_sticks, rng)
    return triplets_from_faces(lengths, heights, float(T))


def sample_exp_horizon_faces_batch(
    model: LevyModel,
    theta,
    n_runs,
    rng=None,
    *,
    min_length=None,
    n_max=DEFAULT_N_MAX,
    include_residual=True,
):
    """``(T, lengths, heights)`` for ``n_runs`` exponential-horizon minorants."""
    gen = as_generator(rng)
    T, lengths, rem = sample_exponential_horizon_sticks_batch(
        theta, n_runs, gen, min_length=min_length, n_max=n_max
    )
    if include_residual:
        lengths = np.concatenate([lengths, rem[:, None]], axis=1)
    return T, lengths, _mark_batch(model, lengths, gen)


def vertex_process_batch(lengths, heights, slopes):
    """``(sigma, eta)`` arrays of shape ``(n_runs, len(slopes))``."""
    slopes = np.asarray(_check_slopes(slopes))
    present = lengths > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        fs = np.where(present, heights / np.where(present, lengths, 1.0), np.inf)
    sel = fs[:, :, None] <= slopes[None, None, :]
    sigma = np.einsum("rf,rfs->rs", lengths, sel)
    eta = np.einsum("rf,rfs->rs", heights, sel)
    return sigma, eta


def write_triplets_csv(rows, fh, header=True):
    """Rows of ``(seed, Triplet)``."""
    w = csv.writer(fh, lineterminator="\n")
    if header:
        w.writerow(["seed", "final", "sup", "argmax"])
    for seed, t in rows:
        w.writerow([seed, repr(t.final), repr(t.supremum), repr(t.argmax_time)])


def write_minorant_faces_csv(samples, fh, header=True):
    """Face rows ``sample_id,length,height`` in slope order."""
    w = csv.writer(fh, lineterminator="\n")
    if header:
        w.writerow(["sample_id", "length", "height"])
    for sid, s in enumerate(samples):
        for f in s.minorant.faces:
            w.writerow([sid, repr(float(f.length)), repr(float(f.height))])
