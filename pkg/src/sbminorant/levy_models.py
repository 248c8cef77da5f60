"""Model zoo: Lévy processes with exact marginal sampling.

Every model exposes vectorised exact increment sampling plus whatever
analytic marginal functionals it has. Functionals a model cannot evaluate in
closed form raise :class:`NotImplementedError` from the method; the
module-level wrappers (:func:`prob_positive`, :func:`mean_positive_part`)
turn that into a Monte Carlo estimate with a reported standard error.

JSON schema (version 1)::

    {"type": "bm", "mu": 0.0, "sigma": 1.0}
    {"type": "cp", "rate": 1.0, "drift": 0.0,
     "jumps": {"law": "normal", "mean": 0.0, "sd": 1.0}
            | {"law": "exponential", "rate": 1.0, "sign": 1}
            | {"law": "twopoint", "p": 0.5, "up": 1.0, "down": -1.0}}
    {"type": "stable", "alpha": 1.5, "beta": 0.0, "scale": 1.0, "drift": 0.0,
     "parametrisation": "S1"}

An optional ``"schema": 1`` key is accepted and checked.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy import signal, special, stats

from .errors import HeavyTail, InvalidDt, InvalidModel, InvalidT, UnsupportedArgument
from .rng import RngStream, as_generator

__all__ = [
    "SCHEMA_VERSION",
    "LevyModel",
    "BrownianMotion",
    "CompoundPoissonDrift",
    "NormalJumps",
    "ExponentialJumps",
    "TwoPointJumps",
    "Stable",
    "Estimate",
    "sample_increment",
    "prob_positive",
    "mean_positive_part",
    "char_exponent",
    "parse_model",
    "model_to_dict",
    "model_from_dict",
    "PRESETS",
]

SCHEMA_VERSION = 1
DEFAULT_MC_DRAWS = 200_000
SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo estimate: sample mean, its standard error, sample size."""

    mean: float
    stderr: float
    n: int

    def __float__(self):
        return float(self.mean)

    def z(self, target) -> float:
        if self.stderr == 0:
            return 0.0 if self.mean == target else math.copysign(math.inf, self.mean - target)
        return (self.mean - target) / self.stderr


def _normal_restricted_mgf(w, m, s, region):
    """``E[exp(w Y); Y > 0]`` (``region='pos'``) or ``Y <= 0`` for ``Y ~ N(m, s^2)``.

    Written through ``erfcx`` on the tail branch, where
    ``exp(w m + w^2 s^2 / 2) * Phi(z)`` collapses to ``exp(-m^2/2s^2) erfcx(.)/2``.
    """
    w = np.asarray(w)
    m = np.asarray(m, dtype=float)
    s = np.asarray(s, dtype=float)
    cplx = np.iscomplexobj(w)
    sign = 1.0 if region == "pos" else -1.0
    with np.errstate(all="ignore"):
        s_safe = np.where(s > 0, s, 1.0)
        z = sign * (m + w * s_safe**2) / s_safe
        direct = np.exp(w * m + 0.5 * w**2 * s_safe**2) * special.ndtr(z)
        tail = 0.5 * np.exp(-0.5 * (m / s_safe) ** 2) * special.erfcx(-z / SQRT2)
        val = np.where(np.real(z) < 0, tail, direct)
        inside = (m > 0) if region == "pos" else (m <= 0)
        degenerate = np.where(inside, np.exp(w * m), 0.0)
        out = np.where(s > 0, val, degenerate)
    return out if cplx else np.real(out)


def _normal_mean_positive(m, s):
    m = np.asarray(m, dtype=float)
    s = np.asarray(s, dtype=float)
    with np.errstate(all="ignore"):
        s_safe = np.where(s > 0, s, 1.0)
        d = m / s_safe
        val = s_safe * stats.norm.pdf(d) + m * special.ndtr(d)
    return np.where(s > 0, val, np.maximum(m, 0.0))


def _check_dt(dt):
    dt = np.asarray(dt, dtype=float)
    if np.any(~np.isfinite(dt)) or np.any(dt <= 0):
        raise InvalidDt("time increments must be positive and finite")
    return dt


def _check_t(t):
    if not (np.isfinite(t) and t > 0):
        raise InvalidT(f"t must be positive and finite, got {t!r}")


class LevyModel:
    """Interface shared by the zoo. Subclasses are frozen dataclasses."""

    kind = "abstract"

    def sample_increments(self, dt, rng) -> np.ndarray:
        raise NotImplementedError

    def prob_positive(self, t) -> float:
        raise NotImplementedError

    def mean_positive_part(self, t) -> float:
        raise NotImplementedError

    def char_exponent(self, v) -> complex:
        raise NotImplementedError

    def restricted_mgf(self, t, w, region):
        """``E[exp(w X_t); X_t in region]`` with region ``'pos'`` (x > 0) or ``'nonpos'``."""
        raise NotImplementedError

    def prob_zero(self, t) -> float:
        """``P(X_t = 0)``."""
        return 0.0

    def mean(self) -> float:
        raise NotImplementedError

    def reflected(self) -> "LevyModel":
        raise NotImplementedError

    def shifted(self, s) -> "LevyModel":
        """The process ``X_t - s t``."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class BrownianMotion(LevyModel):
    mu: float = 0.0
    sigma: float = 1.0

    kind = "bm"

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise InvalidModel("parameters must be finite")
        if self.sigma < 0:
            raise InvalidModel("sigma must be non-negative")
        if self.sigma == 0 and self.mu == 0:
            raise InvalidModel("the zero process is excluded")

    def sample_increments(self, dt, rng):
        dt = _check_dt(dt)
        gen = as_generator(rng)
        z = gen.standard_normal(dt.shape)
        return self.mu * dt + self.sigma * np.sqrt(dt) * z

    def prob_positive(self, t):
        if self.sigma == 0:
            return 1.0 if self.mu > 0 else 0.0
        return float(special.ndtr(self.mu * math.sqrt(t) / self.sigma))

    def prob_zero(self, t):
        return 1.0 if (self.sigma == 0 and self.mu == 0) else 0.0

    def mean_positive_part(self, t):
        return float(_normal_mean_positive(self.mu * t, self.sigma * math.sqrt(t)))

    def char_exponent(self, v):
        return 0.5 * self.sigma**2 * v * v + self.mu * v

    def restricted_mgf(self, t, w, region):
        return _normal_restricted_mgf(w, self.mu * t, self.sigma * math.sqrt(t), region)[()]

    def mean(self):
        return self.mu

    def reflected(self):
        return BrownianMotion(-self.mu, self.sigma)

    def shifted(self, s):
        return BrownianMotion(self.mu - s, self.sigma)

    def to_dict(self):
        return {"type": "bm", "mu": self.mu, "sigma": self.sigma}


# ---------------------------------------------------------------------------
# compound Poisson


def _upper_gamma_q(k_max, z):
    """``Q(k, z) = exp(-z) sum_{j<k} z^j / j!`` for ``k = 0..k_max`` (complex ``z`` allowed)."""
    j = np.arange(max(k_max, 1))
    if np.iscomplexobj(z) and np.imag(z) != 0:
        with np.errstate(divide="ignore"):
            logz = np.log(complex(z)) if z != 0 else -np.inf
        terms = np.exp(-z + j * logz - special.gammaln(j + 1)) if z != 0 else (j == 0) * np.exp(-z)
        q = np.concatenate([[0.0], np.cumsum(terms)])
        return q[: k_max + 1]
    z = float(np.real(z))
    q = np.empty(k_max + 1)
    q[0] = 0.0
    if k_max >= 1:
        q[1:] = special.gammaincc(np.arange(1, k_max + 1), z) if z > 0 else 1.0
    return q


def _cast(x, w):
    return x if np.iscomplexobj(w) and np.imag(w) != 0 else np.real(x)


def _pois_window(lam):
    sd = math.sqrt(lam)
    lo = max(0, int(math.floor(lam - 12 * sd - 10)))
    hi = int(math.ceil(lam + 12 * sd + 40))
    j = np.arange(lo, hi + 1)
    return lo, hi, stats.poisson.pmf(j, lam)


def _overshoot_series(k, lam, rho):
    """``sum_{j<k} Pois(lam)_j rho^(k-j)``: ``E[e^{w(G-a)}; G > a]`` for ``G ~ Gamma(k, r)``,
    ``lam = r a`` and ``rho = r / (r - w)``. Stable for ``|rho| <= 1``."""
    k = np.asarray(k)
    lo, hi, p = _pois_window(lam)
    # S_{j+1} = rho (S_j + p_j), S_lo = 0 up to the negligible mass below the window
    s = np.concatenate([[0.0], signal.lfilter([rho], [1.0, -rho], p.astype(complex))])
    idx = k - lo
    inside = s[np.clip(idx, 0, p.size)]
    beyond = s[-1] * np.power(complex(rho), np.maximum(idx - p.size, 0))
    return np.where(idx <= 0, 0.0, np.where(idx <= p.size, inside, beyond))


def _undershoot_series(k, lam, kappa):
    """``sum_{j>=k} Pois(lam)_j kappa^(j-k)``: ``E[e^{-w(a-G)}; G <= a]`` for ``G ~ Gamma(k, r)``,
    ``lam = r a`` and ``kappa = 1 - w / r``. Stable for ``|kappa| <= 1``."""
    k = np.asarray(k)
    lo, hi, p = _pois_window(lam)
    # T_j = p_j + kappa T_{j+1}, run from the top of the window down
    t = signal.lfilter([1.0], [1.0, -kappa], p[::-1].astype(complex))[::-1]
    idx = k - lo
    inside = t[np.clip(idx, 0, p.size - 1)]
    below = t[0] * np.power(complex(kappa), np.maximum(-idx, 0))
    return np.where(idx > p.size - 1, 0.0, np.where(idx >= 0, inside, below))


@dataclass(frozen=True)
class NormalJumps:
    mean: float = 0.0
    sd: float = 1.0

    law = "normal"

    def __post_init__(self):
        if not self.sd > 0:
            raise InvalidModel("jump sd must be positive")

    def sample_sum(self, k, gen):
        k = np.asarray(k)
        return k * self.mean + np.sqrt(k) * self.sd * gen.standard_normal(k.shape)

    def mgf(self, v):
        return np.exp(v * self.mean + 0.5 * (v * self.sd) ** 2)

    def expectation(self):
        return self.mean

    def reflected(self):
        return NormalJumps(-self.mean, self.sd)

    def sum_restricted_mgf(self, k, w, c, region):
        k = np.asarray(k)
        return _normal_restricted_mgf(w, k * self.mean + c, np.sqrt(k) * self.sd, region)

    def sum_mean_positive(self, k, c):
        k = np.asarray(k)
        return _normal_mean_positive(k * self.mean + c, np.sqrt(k) * self.sd)

    def sum_prob_zero(self, k, c):
        k = np.asarray(k)
        return np.where(k == 0, float(c == 0), 0.0)

    def to_dict(self):
        return {"law": "normal", "mean": self.mean, "sd": self.sd}


@dataclass(frozen=True)
class ExponentialJumps:
    """Jumps ``sign * E`` with ``E ~ Exp(rate)``."""

    rate: float = 1.0
    sign: int = 1

    law = "exponential"

    def __post_init__(self):
        if not self.rate > 0:
            raise InvalidModel("jump rate must be positive")
        if self.sign not in (1, -1):
            raise InvalidModel("sign must be +1 or -1")

    def sample_sum(self, k, gen):
        k = np.asarray(k)
        g = gen.standard_gamma(np.where(k > 0, k, 1.0)) / self.rate
        return self.sign * np.where(k > 0, g, 0.0)

    def mgf(self, v):
        return self.rate / (self.rate - self.sign * v)

    def expectation(self):
        return self.sign / self.rate

    def reflected(self):
        return ExponentialJumps(self.rate, -self.sign)

    def _gamma_parts(self, k, v, a):
        """``(E[e^{vG}; G > a], E[e^{vG}; G <= a])`` for ``G ~ Gamma(k, rate)``."""
        k = np.asarray(k)
        kmax = int(k.max())
        r = self.rate
        ratio = r / (r - v)
        full = ratio ** k.astype(float)
        if a <= 0:
            upper = np.where(k > 0, full, float(0 > a))
        else:
            q = _upper_gamma_q(kmax, (r - v) * a)
            upper = np.where(k > 0, full * q[k], 0.0)
        lower = np.where(k > 0, full - upper, 1.0 - np.where(k > 0, 0.0, upper))
        return upper, lower

    def sum_restricted_mgf(self, k, w, c, region):
        # Y = c + sign*G. Past a level the Gamma sum splits into a Poisson
        # mixture of shorter sums, giving bounded series that avoid e^{wc}.
        r = self.rate
        k_arr = np.asarray(k)
        if self.sign == 1:
            over, level, wo = region == "pos", -c, w
        else:
            over, level, wo = region == "nonpos", c, -w
        if level > 0:
            if over:
                rho = r / (r - wo)
                if abs(rho) <= 1:
                    return _cast(_overshoot_series(k_arr, r * level, rho), w)
            else:
                kappa = 1 - wo / r
                if abs(kappa) <= 1:
                    return _cast(_undershoot_series(k_arr, r * level, kappa), w)
        return self._restricted_closed_form(k, w, c, region)

    def _restricted_closed_form(self, k, w, c, region):
        if self.sign == 1:
            up, low = self._gamma_parts(k, w, -c)  # G > -c is the positive region
            part = up if region == "pos" else low
        else:
            # Y > 0 <=> G < c ; evaluate with v = -w
            up, low = self._gamma_parts(k, -w, c)
            k_arr = np.asarray(k)
            # G <= c vs G < c differ only on null sets except k == 0
            if region == "pos":
                part = np.where(k_arr > 0, low, float(c > 0))
            else:
                part = np.where(k_arr > 0, up, float(c <= 0))
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(w * c) * part

    def sum_mean_positive(self, k, c):
        k = np.asarray(k)
        kf = np.where(k > 0, k, 1).astype(float)
        r = self.rate
        if self.sign == 1:
            if c >= 0:
                val = kf / r + c
            else:
                a = -c
                val = (kf / r) * special.gammaincc(kf + 1, r * a) - a * special.gammaincc(kf, r * a)
        else:
            if c <= 0:
                val = np.zeros_like(kf)
            else:
                val = c * special.gammainc(kf, r * c) - (kf / r) * special.gammainc(kf + 1, r * c)
        return np.where(k > 0, val, max(c, 0.0))

    def sum_prob_zero(self, k, c):
        k = np.asarray(k)
        return np.where(k == 0, float(c == 0), 0.0)

    def to_dict(self):
        return {"law": "exponential", "rate": self.rate, "sign": self.sign}


@dataclass(frozen=True)
class TwoPointJumps:
    """Jump ``up`` with probability ``p``, otherwise ``down``."""

    p: float = 0.5
    up: float = 1.0
    down: float = -1.0

    law = "twopoint"

    def __post_init__(self):
        if not (0 < self.p < 1):
            raise InvalidModel("p must lie in (0, 1)")
        if self.up == self.down:
            raise InvalidModel("the two jump values must differ")

    def sample_sum(self, k, gen):
        k = np.asarray(k)
        j = gen.binomial(k, self.p)
        return j * self.up + (k - j) * self.down

    def mgf(self, v):
        return self.p * np.exp(v * self.up) + (1 - self.p) * np.exp(v * self.down)

    def expectation(self):
        return self.p * self.up + (1 - self.p) * self.down

    def reflected(self):
        return TwoPointJumps(self.p, -self.up, -self.down)

    def _grid(self, k, c):
        """Values ``c + S_k`` and binomial weights on a ``(len(k), max k + 1)`` grid."""
        k = np.asarray(k).ravel()
        j = np.arange(int(k.max()) + 1 if k.size else 1)
        kk = k[:, None]
        y = c + j[None, :] * self.up + (kk - j[None, :]) * self.down
        pr = np.where(j[None, :] <= kk, stats.binom.pmf(j[None, :], kk, self.p), 0.0)
        return y, pr

    def sum_restricted_mgf(self, k, w, c, region):
        y, pr = self._grid(k, c)
        mask = (y > 0) if region == "pos" else (y <= 0)
        with np.errstate(over="ignore", invalid="ignore"):
            terms = np.where(mask & (pr > 0), pr * np.exp(w * np.where(mask, y, 0.0)), 0.0)
        return terms.sum(axis=1).reshape(np.shape(k))

    def sum_mean_positive(self, k, c):
        y, pr = self._grid(k, c)
        return (pr * np.maximum(y, 0.0)).sum(axis=1).reshape(np.shape(k))

    def sum_prob_zero(self, k, c):
        y, pr = self._grid(k, c)
        return (pr * (y == 0)).sum(axis=1).reshape(np.shape(k))

    def to_dict(self):
        return {"law": "twopoint", "p": self.p, "up": self.up, "down": self.down}


def _poisson_window(m):
    """Counts carrying all but ~1e-17 of the Poisson(m) mass, and their pmf."""
    sd = math.sqrt(m)
    lo = max(0, int(math.floor(m - 12 * sd - 10)))
    hi = int(math.ceil(m + 12 * sd + 40))
    k = np.arange(lo, hi + 1)
    return k, stats.poisson.pmf(k, m)


@dataclass(frozen=True)
class CompoundPoissonDrift(LevyModel):
    rate: float = 1.0
    jumps: object = ExponentialJumps()
    drift: float = 0.0

    kind = "cp"

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise InvalidModel("rate must be positive")
        if not math.isfinite(self.drift):
            raise InvalidModel("drift must be finite")

    @property
    def driftless(self):
        return self.drift == 0

    def sample_increments(self, dt, rng):
        dt = _check_dt(dt)
        gen = as_generator(rng)
        k = gen.poisson(self.rate * dt)
        return self.jumps.sample_sum(k, gen) + self.drift * dt

    def _series(self, t, fn):
        _check_t(t)
        k, pmf = _poisson_window(self.rate * t)
        terms = fn(k, self.drift * t)
        return np.sum(pmf * terms)

    def prob_positive(self, t):
        return float(np.real(self._series(t, lambda k, c: self.jumps.sum_restricted_mgf(k, 0.0, c, "pos"))))

    def prob_zero(self, t):
        return float(self._series(t, self.jumps.sum_prob_zero))

    def mean_positive_part(self, t):
        return float(self._series(t, self.jumps.sum_mean_positive))

    def restricted_mgf(self, t, w, region):
        return self._series(t, lambda k, c: self.jumps.sum_restricted_mgf(k, w, c, region))

    def char_exponent(self, v):
        return self.rate * (self.jumps.mgf(v) - 1.0) + self.drift * v

    def mean(self):
        return self.rate * self.jumps.expectation() + self.drift

    def reflected(self):
        return CompoundPoissonDrift(self.rate, self.jumps.reflected(), -self.drift)

    def shifted(self, s):
        return replace(self, drift=self.drift - s)

    def to_dict(self):
        return {"type": "cp", "rate": self.rate, "jumps": self.jumps.to_dict(), "drift": self.drift}


# ---------------------------------------------------------------------------
# stable


def cms_standard(alpha, beta, size, gen):
    """Chambers–Mallows–Stuck draws of ``S_alpha(1, beta, 0)`` (Samorodnitsky–Taqqu)."""
    V = gen.uniform(-0.5 * np.pi, 0.5 * np.pi, size)
    W = gen.standard_exponential(size)
    if alpha == 1:
        hb = 0.5 * np.pi + beta * V
        return (2 / np.pi) * (hb * np.tan(V) - beta * np.log((0.5 * np.pi * W * np.cos(V)) / hb))
    t = math.tan(0.5 * np.pi * alpha)
    B = math.atan(beta * t) / alpha
    S = (1 + (beta * t) ** 2) ** (1 / (2 * alpha))
    return (
        S
        * np.sin(alpha * (V + B))
        / np.cos(V) ** (1 / alpha)
        * (np.cos(V - alpha * (V + B)) / W) ** ((1 - alpha) / alpha)
    )


@dataclass(frozen=True)
class Stable(LevyModel):
    """Stable process with ``E exp(i z X_1) = exp(-c^a |z|^a (1 - i b sgn(z) tan(pi a/2)) + i d z)``.

    ``drift`` is the S1 location ``d`` (the mean when ``alpha > 1``). With
    ``parametrisation='S0'`` the given drift is read as the S0 location and
    converted. For ``alpha == 1`` the ``tan`` term is replaced by
    ``(2/pi) log|z|``, and increments carry the ``(2/pi) beta c t log(c t)``
    correction that keeps them exactly infinitely divisible in ``t``.
    """

    alpha: float = 1.5
    beta: float = 0.0
    scale: float = 1.0
    drift: float = 0.0
    parametrisation: str = "S1"

    kind = "stable"

    def __post_init__(self):
        if not (0 < self.alpha <= 2):
            raise InvalidModel("alpha must lie in (0, 2]")
        if not (-1 <= self.beta <= 1):
            raise InvalidModel("beta must lie in [-1, 1]")
        if not self.scale > 0:
            raise InvalidModel("scale must be positive")
        if self.parametrisation not in ("S0", "S1"):
            raise InvalidModel("parametrisation must be 'S0' or 'S1'")

    @property
    def d1(self):
        """Drift in the S1 parametrisation."""
        if self.parametrisation == "S1" or self.alpha == 2:
            return self.drift
        if self.alpha == 1:
            return self.drift - (2 / np.pi) * self.beta * self.scale * math.log(self.scale)
        return self.drift - self.beta * self.scale * math.tan(0.5 * np.pi * self.alpha)

    def _gaussian(self):
        return BrownianMotion(self.d1, self.scale * SQRT2)

    def sample_increments(self, dt, rng):
        dt = _check_dt(dt)
        gen = as_generator(rng)
        a, b, c = self.alpha, self.beta, self.scale
        z = cms_standard(a, b, dt.shape, gen)
        if a == 1:
            sc = c * dt
            return sc * z + (2 / np.pi) * b * sc * np.log(sc) + self.d1 * dt
        return c * dt ** (1 / a) * z + self.d1 * dt

    def prob_positive(self, t):
        a, b = self.alpha, self.beta
        if a == 2:
            return self._gaussian().prob_positive(t)
        if a == 1 and b == 0:
            return 0.5 + math.atan(self.d1 / self.scale) / np.pi
        if self.d1 == 0 and a != 1:
            return 0.5 + math.atan(b * math.tan(0.5 * np.pi * a)) / (np.pi * a)
        raise NotImplementedError("no closed form for P(X_t > 0)")

    def mean_positive_part(self, t):
        if self.alpha <= 1:
            raise HeavyTail(f"alpha={self.alpha} has no first moment")
        if self.alpha == 2:
            return self._gaussian().mean_positive_part(t)
        if self.beta == 0 and self.d1 == 0:
            return self.scale * t ** (1 / self.alpha) * math.gamma(1 - 1 / self.alpha) / np.pi
        raise NotImplementedError("no closed form for E max(X_t, 0)")

    def char_exponent(self, v):
        v = complex(v)
        if v.real != 0:
            if self.alpha == 2:
                return self._gaussian().char_exponent(v)
            raise UnsupportedArgument("stable exponent is only defined on the imaginary axis")
        z = v.imag
        if z == 0:
            return 0j
        a, b, c = self.alpha, self.beta, self.scale
        if a == 1:
            skew = 1 + 1j * b * (2 / np.pi) * np.sign(z) * math.log(abs(z))
        else:
            skew = 1 - 1j * b * np.sign(z) * math.tan(0.5 * np.pi * a)
        return -((c * abs(z)) ** a) * skew + 1j * self.d1 * z

    def restricted_mgf(self, t, w, region):
        if self.alpha == 2:
            return self._gaussian().restricted_mgf(t, w, region)
        raise NotImplementedError("no closed form for stable restricted transforms")

    def mean(self):
        if self.alpha <= 1:
            raise HeavyTail(f"alpha={self.alpha} has no first moment")
        return self.d1

    def reflected(self):
        return Stable(self.alpha, -self.beta, self.scale, -self.d1)

    def shifted(self, s):
        return Stable(self.alpha, self.beta, self.scale, self.d1 - s)

    def to_dict(self):
        return {
            "type": "stable",
            "alpha": self.alpha,
            "beta": self.beta,
            "scale": self.scale,
            "drift": self.drift,
            "parametrisation": self.parametrisation,
        }


# ---------------------------------------------------------------------------
# module-level operations


def sample_increment(model: LevyModel, dt, rng) -> float:
    """One exact draw of ``X_dt``."""
    if not (np.ndim(dt) == 0):
        raise InvalidDt("use model.sample_increments for arrays")
    return float(model.sample_increments(np.array([dt], dtype=float), rng)[0])


def _mc_mean(model, t, fn, n, rng):
    gen = as_generator(rng if rng is not None else RngStream(0))
    x = fn(model.sample_increments(np.full(n, float(t)), gen))
    return Estimate(float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(n)), n)


def prob_positive(model: LevyModel, t, rng=None, n_mc=DEFAULT_MC_DRAWS, force_mc=False):
    """``P(X_t > 0)``: a float when analytic, an :class:`Estimate` otherwise."""
    _check_t(t)
    if not force_mc:
        try:
            return model.prob_positive(t)
        except NotImplementedError:
            pass
    return _mc_mean(model, t, lambda x: (x > 0).astype(float), n_mc, rng)


def mean_positive_part(model: LevyModel, t, rng=None, n_mc=DEFAULT_MC_DRAWS, force_mc=False):
    """``E max(X_t, 0)``: a float when analytic, an :class:`Estimate` otherwise."""
    _check_t(t)
    if isinstance(model, Stable) and model.alpha <= 1:
        raise HeavyTail(f"alpha={model.alpha} has no first moment")
    if not force_mc:
        try:
            return model.mean_positive_part(t)
        except NotImplementedError:
            pass
    return _mc_mean(model, t, lambda x: np.maximum(x, 0.0), n_mc, rng)


def char_exponent(model: LevyModel, v) -> complex:
    """``Psi(v)`` with ``E exp(v X_1) = exp(Psi(v))``."""
    return complex(model.char_exponent(v))


def _jumps_from_dict(d):
    law = d.get("law")
    try:
        if law == "normal":
            return NormalJumps(float(d.get("mean", 0.0)), float(d.get("sd", 1.0)))
        if law == "exponential":
            return ExponentialJumps(float(d.get("rate", 1.0)), int(d.get("sign", 1)))
        if law == "twopoint":
            return TwoPointJumps(float(d.get("p", 0.5)), float(d.get("up", 1.0)), float(d.get("down", -1.0)))
    except (TypeError, ValueError) as exc:
        raise InvalidModel(str(exc)) from exc
    raise InvalidModel(f"unknown jump law {law!r}")


_KEYS = {
    "bm": {"mu", "sigma"},
    "cp": {"rate", "jumps", "drift"},
    "stable": {"alpha", "beta", "scale", "drift", "parametrisation"},
}


def model_from_dict(d: dict) -> LevyModel:
    if not isinstance(d, dict):
        raise InvalidModel("model config must be a JSON object")
    d = dict(d)
    schema = d.pop("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise InvalidModel(f"unsupported model schema {schema!r}")
    kind = d.pop("type", None)
    if kind not in _KEYS:
        raise InvalidModel(f"unknown model type {kind!r}")
    extra = set(d) - _KEYS[kind]
    if extra:
        raise InvalidModel(f"unexpected keys for {kind}: {sorted(extra)}")
    try:
        if kind == "bm":
            return BrownianMotion(float(d.get("mu", 0.0)), float(d.get("sigma", 1.0)))
        if kind == "cp":
            jumps = _jumps_from_dict(d.get("jumps", {"law": "exponential"}))
            return CompoundPoissonDrift(float(d.get("rate", 1.0)), jumps, float(d.get("drift", 0.0)))
        return Stable(
            float(d.get("alpha", 1.5)),
            float(d.get("beta", 0.0)),
            float(d.get("scale", 1.0)),
            float(d.get("drift", 0.0)),
            str(d.get("parametrisation", "S1")),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidModel):
            raise
        raise InvalidModel(str(exc)) from exc


def model_to_dict(model: LevyModel) -> dict:
    return {"schema": SCHEMA_VERSION, **model.to_dict()}


PRESETS = {
    "bm": {"type": "bm", "mu": 0.0, "sigma": 1.0},
    "bm-drift": {"type": "bm", "mu": 1.0, "sigma": 1.0},
    "cp-driftless": {"type": "cp", "rate": 1.0, "jumps": {"law": "exponential", "rate": 1.0}, "drift": 0.0},
    "cp-normal": {"type": "cp", "rate": 1.0, "jumps": {"law": "normal", "mean": 0.0, "sd": 1.0}, "drift": 0.0},
    "cauchy": {"type": "stable", "alpha": 1.0, "beta": 0.0, "scale": 1.0, "drift": 0.0},
    "cauchy-drift": {"type": "stable", "alpha": 1.0, "beta": 0.0, "scale": 1.0, "drift": 1.0},
}


def parse_model(spec) -> LevyModel:
    """Build a model from a preset name, a JSON string, or a dict."""
    if isinstance(spec, LevyModel):
        return spec
    if isinstance(spec, dict):
        return model_from_dict(spec)
    text = str(spec).strip()
    if text in PRESETS:
        return model_from_dict(PRESETS[text])
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidModel(f"not a preset or valid JSON: {text!r}") from exc
    return model_from_dict(d)


# dataclass asdict is not used for models with nested jump objects
del asdict
