"""Monte Carlo estimation and the hypothesis tests used by the acceptance suite."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from scipy import special

from .errors import DegenerateMarginal, TooFewSamples, ZeroMean
from .levy_models import Estimate
from .rng import RngStream

__all__ = [
    "Estimate",
    "TestReport",
    "estimate_mean",
    "estimate_from_samples",
    "ks_two_sample",
    "ks_one_sample",
    "poisson_dispersion",
    "independence_corr",
    "ALPHA",
]

ALPHA = 0.01
MIN_KS = 25
MIN_DISPERSION = 1000
MIN_CORR = 1000


def estimate_from_samples(x) -> Estimate:
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2:
        raise TooFewSamples("an estimate needs at least two draws")
    return Estimate(float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(n)), n)


def estimate_mean(sampler: Callable[[RngStream], float], n, seed, workers=1) -> Estimate:
    """Mean and standard error of ``sampler`` over ``n`` independent streams.

    Draw ``i`` always uses ``RngStream(seed, i)``, so the result does not
    depend on ``workers``; the reduction is numpy's pairwise summation.
    """
    if n < 2:
        raise TooFewSamples("an estimate needs at least two draws")
    streams = [RngStream(seed, i) for i in range(n)]
    if workers <= 1:
        vals = [sampler(s) for s in streams]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            vals = list(ex.map(sampler, streams, chunksize=max(1, n // (4 * workers))))
    return estimate_from_samples(vals)


def _kolmogorov_p(d, n_eff):
    if d <= 0:
        return 1.0
    return float(special.kolmogorov(d * math.sqrt(n_eff)))


def ks_two_sample(a, b):
    """``(D, p)`` with ``D = sup |F_a - F_b|`` and the asymptotic Kolmogorov p-value."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size < MIN_KS or b.size < MIN_KS:
        raise TooFewSamples(f"KS needs at least {MIN_KS} points per sample")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    d = float(np.max(np.abs(fa - fb)))
    n_eff = a.size * b.size / (a.size + b.size)
    return d, _kolmogorov_p(d, n_eff)


def ks_one_sample(a, cdf):
    """``(D, p)`` of a sample against a reference CDF (a vectorised callable)."""
    a = np.sort(np.asarray(a, dtype=float))
    n = a.size
    if n < MIN_KS:
        raise TooFewSamples(f"KS needs at least {MIN_KS} points")
    f = np.asarray(cdf(a), dtype=float)
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - f), np.max(f - (i - 1) / n), 0.0))
    return d, _kolmogorov_p(d, n)


def poisson_dispersion(counts):
    """``(variance / mean, z)`` with ``z = (index - 1) sqrt((n - 1) / 2)`` under the Poisson null."""
    c = np.asarray(counts, dtype=float)
    n = c.size
    if n < MIN_DISPERSION:
        raise TooFewSamples(f"dispersion test needs at least {MIN_DISPERSION} counts")
    m = float(np.mean(c))
    if m == 0:
        raise ZeroMean("all counts are zero")
    index = float(np.var(c, ddof=1)) / m
    return index, (index - 1.0) * math.sqrt((n - 1) / 2.0)


def independence_corr(pairs):
    """Pearson correlation and its Fisher-z score ``atanh(r) sqrt(n - 3)``."""
    p = np.asarray(pairs, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2:
        raise ValueError("pairs must have shape (n, 2)")
    n = p.shape[0]
    if n < MIN_CORR:
        raise TooFewSamples(f"correlation test needs at least {MIN_CORR} pairs")
    x, y = p[:, 0], p[:, 1]
    sx, sy = np.std(x), np.std(y)
    if sx == 0 or sy == 0:
        raise DegenerateMarginal("a marginal is constant")
    r = float(np.mean((x - x.mean()) * (y - y.mean())) / (sx * sy))
    r = max(-1.0, min(1.0, r))
    z = math.copysign(math.inf, r) if abs(r) == 1 else math.atanh(r) * math.sqrt(n - 3)
    return r, z


@dataclass(frozen=True)
class TestReport:
    test: str
    statistic: float
    p: float | None
    n: int
    seed: int | None
    verdict: str

    __test__ = False  # not a pytest class

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)
