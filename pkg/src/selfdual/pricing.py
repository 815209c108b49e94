"""Payoff algebra and Monte-Carlo pricing with standard errors.

Payoffs evaluate vectorised on a terminal-price matrix of shape
``(paths, assets)``.  Identities (parity, vanilla symmetry, binary/gap
symmetry, the power symmetry) are measured as residuals: closed forms
where the scalar log-normal model admits them, otherwise common-random-
number Monte Carlo so that only the variance of the difference matters.
Discounting is a scalar afterthought; every identity is stated and
tested undiscounted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dist import DiscreteAtoms, LogNormal, ScalarModel, VectorModel
from .errors import DomainError, GeometryViolation, MomentDiverges
from .geometry import lognormal_call
from .rng import RngStream
from .special import norm_cdf

__all__ = [
    "Payoff",
    "BasketCall",
    "BasketPut",
    "AffineCall",
    "MaxOption",
    "BinaryCall",
    "BinaryPut",
    "GapCall",
    "GapPut",
    "SpreadCall",
    "PowerCall",
    "CustomPayoff",
    "CompositePayoff",
    "PriceEstimate",
    "price",
    "parity_residual",
    "vanilla_symmetry_residual",
    "binary_gap_symmetry_residual",
    "power_symmetry_residual",
]

DEFAULT_SAMPLES = 200_000


class Payoff:
    """Base payoff; subclasses implement ``__call__`` on (paths, assets)."""

    n_assets: int | None = None  # None: any dimension

    def __call__(self, s: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _matrix(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if s.ndim == 1:
            s = s[:, None]
        if self.n_assets is not None and s.shape[1] != self.n_assets:
            raise DomainError(f"payoff expects {self.n_assets} assets, got {s.shape[1]}")
        return s

    def __add__(self, other):
        return CompositePayoff([(1.0, self), (1.0, other)])

    def __sub__(self, other):
        return CompositePayoff([(1.0, self), (-1.0, other)])

    def __rmul__(self, c: float):
        return CompositePayoff([(float(c), self)])


@dataclass
class BasketCall(Payoff):
    """(sum u_l S_l - k)_+; positively homogeneous in (u, k) jointly."""

    weights: tuple
    strike: float

    def __post_init__(self):
        self.weights = tuple(float(w) for w in np.atleast_1d(self.weights))
        if self.strike < 0:
            raise DomainError("strike must be nonnegative")
        self.n_assets = len(self.weights)

    def __call__(self, s):
        s = self._matrix(s)
        return np.maximum(s @ np.asarray(self.weights) - self.strike, 0.0)


@dataclass
class BasketPut(Payoff):
    weights: tuple
    strike: float

    def __post_init__(self):
        self.weights = tuple(float(w) for w in np.atleast_1d(self.weights))
        if self.strike < 0:
            raise DomainError("strike must be nonnegative")
        self.n_assets = len(self.weights)

    def __call__(self, s):
        s = self._matrix(s)
        return np.maximum(self.strike - s @ np.asarray(self.weights), 0.0)


@dataclass
class AffineCall(Payoff):
    """(sum w_l S_l + c)_+ with signed weights; the closure of basket
    calls/puts under numeraire reflection."""

    weights: tuple
    constant: float

    def __post_init__(self):
        self.weights = tuple(float(w) for w in np.atleast_1d(self.weights))
        self.n_assets = len(self.weights)

    def __call__(self, s):
        s = self._matrix(s)
        return np.maximum(s @ np.asarray(self.weights) + self.constant, 0.0)


@dataclass
class MaxOption(Payoff):
    """max(u0, max_l u_l S_l) for nonnegative weights."""

    u0: float
    weights: tuple

    def __post_init__(self):
        self.weights = tuple(float(w) for w in np.atleast_1d(self.weights))
        if self.u0 < 0 or any(w < 0 for w in self.weights):
            raise DomainError("max option requires nonnegative coordinates")
        self.n_assets = len(self.weights)

    def __call__(self, s):
        s = self._matrix(s)
        return np.maximum(self.u0, np.max(s * np.asarray(self.weights), axis=1))


@dataclass
class BinaryCall(Payoff):
    """1{S_j > k}: strict inequality, which matters only at atoms."""

    strike: float
    asset: int = 1

    def __call__(self, s):
        s = self._matrix(s)
        return (s[:, self.asset - 1] > self.strike).astype(float)


@dataclass
class BinaryPut(Payoff):
    strike: float
    asset: int = 1

    def __call__(self, s):
        s = self._matrix(s)
        return (s[:, self.asset - 1] < self.strike).astype(float)


@dataclass
class GapCall(Payoff):
    """S_j 1{S_j > k}."""

    strike: float
    asset: int = 1

    def __call__(self, s):
        s = self._matrix(s)
        sj = s[:, self.asset - 1]
        return sj * (sj > self.strike)


@dataclass
class GapPut(Payoff):
    strike: float
    asset: int = 1

    def __call__(self, s):
        s = self._matrix(s)
        sj = s[:, self.asset - 1]
        return sj * (sj < self.strike)


@dataclass
class SpreadCall(Payoff):
    """(sum long_l S_l - sum short_l S_l - k)_+ with nonnegative legs."""

    long_weights: tuple
    short_weights: tuple
    strike: float

    def __post_init__(self):
        self.long_weights = tuple(float(w) for w in np.atleast_1d(self.long_weights))
        self.short_weights = tuple(float(w) for w in np.atleast_1d(self.short_weights))
        if len(self.long_weights) != len(self.short_weights):
            raise DomainError("long/short weight lengths differ")
        if any(w < 0 for w in self.long_weights + self.short_weights):
            raise DomainError("leg weights must be nonnegative")
        if self.strike < 0:
            raise DomainError("strike must be nonnegative")
        self.n_assets = len(self.long_weights)

    @property
    def net_weights(self) -> np.ndarray:
        return np.asarray(self.long_weights) - np.asarray(self.short_weights)

    def __call__(self, s):
        s = self._matrix(s)
        return np.maximum(s @ self.net_weights - self.strike, 0.0)


@dataclass
class PowerCall(Payoff):
    """(sum u_l S_l - k)_+^alpha."""

    weights: tuple
    strike: float
    alpha: float

    def __post_init__(self):
        self.weights = tuple(float(w) for w in np.atleast_1d(self.weights))
        if self.strike < 0:
            raise DomainError("strike must be nonnegative")
        if self.alpha <= 0:
            raise DomainError("power must be positive")
        self.n_assets = len(self.weights)

    def __call__(self, s):
        s = self._matrix(s)
        return np.maximum(s @ np.asarray(self.weights) - self.strike, 0.0) ** self.alpha


class CustomPayoff(Payoff):
    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], n_assets: int | None = None):
        self.fn = fn
        self.n_assets = n_assets

    def __call__(self, s):
        return np.asarray(self.fn(self._matrix(s)), dtype=float)


class CompositePayoff(Payoff):
    """Linear combination of payoffs, evaluated termwise."""

    def __init__(self, terms: list[tuple[float, Payoff]]):
        self.terms = [(float(c), p) for c, p in terms]
        dims = {p.n_assets for _, p in self.terms if p.n_assets is not None}
        if len(dims) > 1:
            raise DomainError("mixed asset counts in composite payoff")
        self.n_assets = dims.pop() if dims else None

    def __call__(self, s):
        out = None
        for c, p in self.terms:
            v = c * p(s)
            out = v if out is None else out + v
        return out


# --------------------------------------------------------------------------- #
# Pricing
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class PriceEstimate:
    """Undiscounted value with standard error plus the discount factor."""

    value: float
    std_error: float
    n_samples: int
    discount_factor: float
    method: str

    @property
    def discounted(self) -> float:
        return self.discount_factor * self.value

    @property
    def discounted_std_error(self) -> float:
        return self.discount_factor * self.std_error


def _terminal_samples(model, n_samples: int, rng: RngStream, forward=None) -> np.ndarray:
    s = model.sample(int(n_samples), rng)
    s = s.reshape(int(n_samples), -1)
    if forward is not None:
        s = s * np.atleast_1d(np.asarray(forward, dtype=float))
    return s


def _closed_form_value(model, payoff: Payoff, forward: float) -> float | None:
    """Closed forms for the scalar log-normal and exact sums for atoms."""
    if isinstance(model, LogNormal):
        if isinstance(payoff, (BasketCall, PowerCall)) and getattr(payoff, "alpha", 1.0) == 1.0:
            (w,) = payoff.weights
            if w >= 0:
                return lognormal_call(model, payoff.strike, w * forward)
        if isinstance(payoff, BasketPut):
            (w,) = payoff.weights
            if w >= 0:
                call = lognormal_call(model, payoff.strike, w * forward)
                return call - w * forward * model.mean + payoff.strike
        if isinstance(payoff, BinaryCall):
            return 1.0 - float(model.cdf(payoff.strike / forward))
        if isinstance(payoff, BinaryPut):
            return float(model.cdf(payoff.strike / forward))
        if isinstance(payoff, GapCall):
            return forward * model.tail_mean(payoff.strike / forward)
        if isinstance(payoff, GapPut):
            return forward * (model.mean - model.tail_mean(payoff.strike / forward))
        if isinstance(payoff, MaxOption):
            (w,) = payoff.weights
            return lognormal_call(model, payoff.u0, w * forward) + payoff.u0
    if isinstance(model, DiscreteAtoms):
        vals = payoff(forward * model.values[:, None])
        return float(vals @ model.probs)
    return None


def price(
    model_or_samples,
    payoff: Payoff,
    r: float = 0.0,
    maturity: float = 1.0,
    rng: RngStream | None = None,
    n_samples: int = DEFAULT_SAMPLES,
    forward=1.0,
) -> PriceEstimate:
    """Expected payoff of ``payoff`` on terminal prices ``forward * eta``.

    Accepts a model (closed form where available, Monte Carlo otherwise)
    or a pre-simulated terminal sample matrix.  ``PowerCall`` verifies the
    required moment exists before sampling.
    """
    df = math.exp(-r * maturity)
    if isinstance(model_or_samples, np.ndarray):
        s = model_or_samples.reshape(model_or_samples.shape[0], -1)
        vals = payoff(s)
        se = float(np.std(vals, ddof=1) / math.sqrt(s.shape[0]))
        return PriceEstimate(float(np.mean(vals)), se, s.shape[0], df, "monte_carlo")

    model = model_or_samples
    if isinstance(payoff, PowerCall) and isinstance(model, ScalarModel):
        try:
            model.raw_moment(payoff.alpha)
        except MomentDiverges as exc:
            raise MomentDiverges(
                f"payoff of power {payoff.alpha} is not integrable: {exc}",
                critical_exponent=exc.critical_exponent,
            ) from None
    if isinstance(model, (LogNormal, DiscreteAtoms)) and np.ndim(forward) == 0:
        closed = _closed_form_value(model, payoff, float(forward))
        if closed is not None:
            return PriceEstimate(closed, 0.0, 0, df, "closed_form")
    if rng is None:
        raise DomainError("Monte-Carlo pricing requires an RngStream")
    s = _terminal_samples(model, n_samples, rng, forward)
    vals = payoff(s)
    se = float(np.std(vals, ddof=1) / math.sqrt(s.shape[0]))
    return PriceEstimate(float(np.mean(vals)), se, s.shape[0], df, "monte_carlo")


def _crn_residual(values: np.ndarray) -> tuple[float, float]:
    n = values.shape[0]
    return float(np.mean(values)), float(np.std(values, ddof=1) / math.sqrt(n))


def parity_residual(
    model,
    k: float,
    big_f: float,
    r: float = 0.0,
    maturity: float = 1.0,
    rng: RngStream | None = None,
    n_samples: int = DEFAULT_SAMPLES,
) -> tuple[float, float]:
    """Call-put parity defect e^{-rT} [ (F eta - k)_+ - (k - F eta)_+ - (F - k) ].

    Model free: zero for every integrable model up to the noise of the
    common-random-number estimator (identically zero on closed forms).
    """
    df = math.exp(-r * maturity)
    if isinstance(model, (LogNormal, DiscreteAtoms)):
        call = _closed_form_value(model, BasketCall((1.0,), k), big_f)
        put = _closed_form_value(model, BasketPut((1.0,), k), big_f)
        return df * (call - put - (big_f * model.mean - k)), 0.0
    if rng is None:
        raise DomainError("Monte-Carlo parity check requires an RngStream")
    s = _terminal_samples(model, n_samples, rng, big_f)[:, 0]
    vals = np.maximum(s - k, 0.0) - np.maximum(k - s, 0.0) - (s - k)
    mean, se = _crn_residual(vals)
    return df * mean, df * se


def vanilla_symmetry_residual(
    model,
    k: float,
    big_f: float,
    r: float = 0.0,
    maturity: float = 1.0,
    rng: RngStream | None = None,
    n_samples: int = DEFAULT_SAMPLES,
) -> dict:
    """Self-duality of vanilla prices: strike/forward exchange residuals.

    Returns the defects of ``e^{rT} c(k,F) + k = e^{rT} c(F,k) + F`` and
    of ``p(k,F) = c(F,k)`` with standard errors (zero on closed forms).
    """
    if isinstance(model, (LogNormal, DiscreteAtoms)):
        c_kf = _closed_form_value(model, BasketCall((1.0,), k), big_f)
        c_fk = _closed_form_value(model, BasketCall((1.0,), big_f), k)
        p_kf = _closed_form_value(model, BasketPut((1.0,), k), big_f)
        return {
            "call_swap": (c_kf + k - c_fk - big_f, 0.0),
            "put_call": (p_kf - c_fk, 0.0),
        }
    if rng is None:
        raise DomainError("Monte-Carlo symmetry check requires an RngStream")
    eta = _terminal_samples(model, n_samples, rng)[:, 0]
    call_swap = np.maximum(big_f * eta - k, 0.0) + k - np.maximum(k * eta - big_f, 0.0) - big_f
    put_call = np.maximum(k - big_f * eta, 0.0) - np.maximum(k * eta - big_f, 0.0)
    return {
        "call_swap": _crn_residual(call_swap),
        "put_call": _crn_residual(put_call),
    }


def binary_gap_symmetry_residual(
    model,
    k_c: float,
    k_p: float,
    rng: RngStream | None = None,
    n_samples: int = DEFAULT_SAMPLES,
) -> dict:
    """Binary/gap symmetry at the geometric-mean forward F = sqrt(k_c k_p).

    Residuals of ``sqrt(k_c) BC(k_c,F) = GP(k_p,F)/sqrt(k_p)`` and
    ``sqrt(k_p) BP(k_p,F) = GC(k_c,F)/sqrt(k_c)``.
    """
    if k_c <= 0 or k_p <= 0:
        raise GeometryViolation("strikes must be positive")
    big_f = math.sqrt(k_c * k_p)
    if isinstance(model, (LogNormal, DiscreteAtoms)):
        bc = _closed_form_value(model, BinaryCall(k_c), big_f)
        gp = _closed_form_value(model, GapPut(k_p), big_f)
        bp = _closed_form_value(model, BinaryPut(k_p), big_f)
        gc = _closed_form_value(model, GapCall(k_c), big_f)
        return {
            "forward": big_f,
            "binary_call_gap_put": (math.sqrt(k_c) * bc - gp / math.sqrt(k_p), 0.0),
            "binary_put_gap_call": (math.sqrt(k_p) * bp - gc / math.sqrt(k_c), 0.0),
        }
    if rng is None:
        raise DomainError("Monte-Carlo symmetry check requires an RngStream")
    s = _terminal_samples(model, n_samples, rng, big_f)[:, 0]
    d1 = math.sqrt(k_c) * (s > k_c) - s * (s < k_p) / math.sqrt(k_p)
    d2 = math.sqrt(k_p) * (s < k_p) - s * (s > k_c) / math.sqrt(k_c)
    return {
        "forward": big_f,
        "binary_call_gap_put": _crn_residual(d1),
        "binary_put_gap_call": _crn_residual(d2),
    }


def power_symmetry_residual(
    model: ScalarModel,
    a: float,
    alpha: float,
    big_f: float,
    k: float,
    rng: RngStream,
    n_samples: int = DEFAULT_SAMPLES,
) -> tuple[float, float]:
    """Power symmetry E (F eta - k)_+^alpha = a^-alpha E (F - k a^2 eta)_+^alpha.

    Holds for quasi-self-dual eta of order alpha with carry factor
    ``a = e^lambda``; estimated with common random numbers.
    """
    model.raw_moment(alpha)  # integrability gate
    eta = model.sample(int(n_samples), rng)
    lhs = np.maximum(big_f * eta - k, 0.0) ** alpha
    rhs = a ** (-alpha) * np.maximum(big_f - k * a * a * eta, 0.0) ** alpha
    return _crn_residual(lhs - rhs)
