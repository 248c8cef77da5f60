"""Uniform stick-breaking on fixed, dyadic and exponential horizons.

Scalar samplers return a :class:`StickSeq`; the ``*_batch`` variants return
``(lengths, remainders)`` arrays of shape ``(n_runs, n_max)`` for Monte Carlo
kernels, with unused slots set to zero.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidHorizon, InvalidRate, InvalidThreshold, ZeroCount
from .rng import as_generator

__all__ = [
    "StickSeq",
    "DEFAULT_N_MAX",
    "DEFAULT_REL_MIN_LENGTH",
    "sample_sticks",
    "sample_dyadic_sticks",
    "sample_exponential_horizon_sticks",
    "sample_sticks_batch",
    "sample_exponential_horizon_sticks_batch",
    "write_sticks_csv",
]

DEFAULT_N_MAX = 64
# E L_n = T 2^-n, so 2^-52 T is below double resolution relative to T
DEFAULT_REL_MIN_LENGTH = 2.0**-52


@dataclass(frozen=True)
class StickSeq:
    horizon: float
    lengths: tuple
    remainders: tuple  # remainder L_n after each stick

    def __post_init__(self):
        if len(self.lengths) != len(self.remainders):
            raise ValueError("lengths and remainders must align")
        prev = self.horizon
        for ln, rem in zip(self.lengths, self.remainders):
            if ln < 0 or ln > prev * (1 + 1e-12) or rem < 0:
                raise ValueError("sticks do not follow the stick-breaking recursion")
            prev = rem
        total = math.fsum(self.lengths) + self.remainder
        if abs(total - self.horizon) > 1e-12 * self.horizon:
            raise ValueError("sticks and remainder do not add up to the horizon")

    @property
    def count(self) -> int:
        return len(self.lengths)

    @property
    def remainder(self) -> float:
        return self.remainders[-1] if self.remainders else self.horizon


def _check_horizon(T):
    if not (np.isfinite(T) and T > 0):
        raise InvalidHorizon(f"horizon must be positive and finite, got {T!r}")


def _uniforms(rng, uniforms, n):
    if uniforms is not None:
        u = np.asarray(uniforms, dtype=float)
        if u.size < n:
            raise ValueError(f"need {n} injected uniforms, got {u.size}")
        return u[:n]
    return as_generator(rng).random(n)


def _stick_recursion(T, fractions):
    lengths, rems = [], []
    L = float(T)
    for v in fractions:
        ln = v * L
        L = L - ln
        lengths.append(ln)
        rems.append(L)
    return lengths, rems


def sample_sticks(T, n, rng=None, *, uniforms=None) -> StickSeq:
    """``n`` sticks of ``l_k = V_k L_{k-1}`` on ``[0, T]``.

    ``uniforms`` injects the ``V_k`` (for tests); otherwise they come from ``rng``.
    """
    _check_horizon(T)
    if n < 1:
        raise ZeroCount("at least one stick is required")
    v = _uniforms(rng, uniforms, n)
    lengths, rems = _stick_recursion(T, v)
    return StickSeq(float(T), tuple(lengths), tuple(rems))


def sample_dyadic_sticks(T, k, rng=None, *, uniforms=None) -> StickSeq:
    """Stick-breaking snapped to the grid ``T 2^-k``.

    ``L_{k,n} = floor(L_{k,n-1} U_n 2^k / T) T / 2^k`` with ``U_n`` the
    surviving fraction, stopping at the first zero remainder. At most ``2^k``
    sticks, all integer multiples of the mesh.
    """
    _check_horizon(T)
    if k < 0:
        raise ValueError("resolution exponent must be non-negative")
    cells = 2**k
    mesh = T / cells
    m = cells  # current remainder in grid cells
    lengths, rems = [], []
    injected = None if uniforms is None else list(np.asarray(uniforms, dtype=float))
    gen = None if injected is not None else as_generator(rng)
    idx = 0
    while m > 0:
        if injected is not None:
            if idx >= len(injected):
                raise ValueError("ran out of injected uniforms")
            u = injected[idx]
        else:
            u = gen.random()
        idx += 1
        m_next = min(int(math.floor(m * u)), m - 1) if u < 1 else m - 1
        lengths.append((m - m_next) * mesh)
        rems.append(m_next * mesh)
        m = m_next
    return StickSeq(float(T), tuple(lengths), tuple(rems))


def sample_exponential_horizon_sticks(
    theta, min_length=None, rng=None, *, n_max=DEFAULT_N_MAX
) -> StickSeq:
    """Stick-breaking on an independent ``Exp(theta)`` horizon.

    Sticks are produced until the remainder drops below ``min_length``
    (default ``T 2^-52`` for the drawn ``T``) or ``n_max`` sticks exist.
    """
    if not (np.isfinite(theta) and theta > 0):
        raise InvalidRate(f"theta must be positive, got {theta!r}")
    if min_length is not None and not min_length > 0:
        raise InvalidThreshold(f"min_length must be positive, got {min_length!r}")
    gen = as_generator(rng)
    T = gen.exponential(1.0 / theta)
    thr = T * DEFAULT_REL_MIN_LENGTH if min_length is None else min_length
    lengths, rems = [], []
    L = T
    while len(lengths) < n_max and L >= thr:
        ln = gen.random() * L
        L = L - ln
        lengths.append(ln)
        rems.append(L)
    return StickSeq(float(T), tuple(lengths), tuple(rems))


def sample_sticks_batch(T, n_runs, n_sticks=DEFAULT_N_MAX, rng=None):
    """Vectorised fixed-horizon sticks: ``(lengths, remainder)`` arrays.

    ``lengths`` has shape ``(n_runs, n_sticks)``; ``remainder`` is ``L_n``.
    """
    _check_horizon(T)
    if n_sticks < 1:
        raise ZeroCount("at least one stick is required")
    gen = as_generator(rng)
    v = gen.random((n_runs, n_sticks))
    return _batch_recursion(np.full(n_runs, float(T)), v)


def _batch_recursion(T, v):
    surv = np.cumprod(1.0 - v, axis=1)
    rem = T[:, None] * surv
    prev = np.concatenate([T[:, None], rem[:, :-1]], axis=1)
    lengths = v * prev
    return lengths, rem


def sample_exponential_horizon_sticks_batch(
    theta, n_runs, rng=None, *, min_length=None, n_max=DEFAULT_N_MAX
):
    """Vectorised exponential-horizon sticks.

    Returns ``(T, lengths, remainder)``: horizons of shape ``(n_runs,)``,
    lengths of shape ``(n_runs, n_max)`` with zeros after the stopping index,
    and the final remainder per run.
    """
    if not (np.isfinite(theta) and theta > 0):
        raise InvalidRate(f"theta must be positive, got {theta!r}")
    if min_length is not None and not min_length > 0:
        raise InvalidThreshold(f"min_length must be positive, got {min_length!r}")
    gen = as_generator(rng)
    T = gen.exponential(1.0 / theta, size=n_runs)
    v = gen.random((n_runs, n_max))
    lengths, rem = _batch_recursion(T, v)
    thr = T * DEFAULT_REL_MIN_LENGTH if min_length is None else np.full(n_runs, min_length)
    prev = np.concatenate([T[:, None], rem[:, :-1]], axis=1)
    active = prev >= thr[:, None]
    # a stick exists while the remainder before it is still above threshold
    active = np.logical_and.accumulate(active, axis=1)
    lengths = np.where(active, lengths, 0.0)
    n_active = active.sum(axis=1)
    final_rem = np.where(
        n_active > 0, rem[np.arange(n_runs), np.maximum(n_active - 1, 0)], T
    )
    return T, lengths, final_rem


def write_sticks_csv(seq: StickSeq, fh, header=True):
    w = csv.writer(fh, lineterminator="\n")
    if header:
        w.writerow(["index", "length", "remainder_after"])
    for i, (ln, rem) in enumerate(zip(seq.lengths, seq.remainders), start=1):
        w.writerow([i, repr(float(ln)), repr(float(rem))])
