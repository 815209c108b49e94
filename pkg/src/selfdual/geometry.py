"""Support functions of lift zonoids and lift max-zonoids.

A positive integrable random vector ``eta`` of dimension ``n`` is encoded
by two convex bodies in R^(n+1): the lift zonoid, whose support function
at ``(u0, u)`` is ``E (u0 + <u, eta>)_+``, and the lift max-zonoid, whose
support function on the first orthant is ``E max(u0, u_1 eta_1, ...)``.
Option-pricing identities become symmetry statements about these bodies;
this module evaluates the support functions (closed form where available,
Monte Carlo with standard errors otherwise), the Husler-Reiss norm, the
binary/gap boundary parametrisation, and the coordinate-swap reflection.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dist import DiscreteAtoms, LogNormal, ScalarModel, VectorModel
from .errors import AtomicModel, DomainError
from .quadrature import integrate_interval
from .rng import RngStream
from .special import norm_cdf

__all__ = [
    "LiftVector",
    "SupportEstimate",
    "support_lift_zonoid",
    "support_lift_max_zonoid",
    "husler_reiss_norm",
    "boundary_param",
    "boundary_polyline",
    "write_boundary_csv",
    "reflect_pi",
    "max_stable_cdf",
]

DEFAULT_SAMPLES = 200_000


@dataclass(frozen=True)
class LiftVector:
    """Weight vector (u0, u1..un); coordinate 0 is the riskless bond."""

    u0: float
    u: tuple[float, ...]

    def __post_init__(self):
        u = tuple(float(v) for v in np.atleast_1d(self.u))
        object.__setattr__(self, "u", u)
        if len(u) < 1:
            raise DomainError("lift vector needs at least one asset coordinate")
        if not (math.isfinite(self.u0) and all(math.isfinite(v) for v in u)):
            raise DomainError("lift vector entries must be finite")

    @property
    def dim(self) -> int:
        return len(self.u)

    def as_array(self) -> np.ndarray:
        return np.concatenate(([self.u0], self.u))


@dataclass(frozen=True)
class SupportEstimate:
    value: float
    std_error: float
    method: str  # closed_form | quadrature | monte_carlo

    def __post_init__(self):
        if (self.std_error == 0.0) == (self.method == "monte_carlo"):
            raise ValueError("std_error must be positive exactly for monte_carlo estimates")


def _exact(value: float, method: str = "closed_form") -> SupportEstimate:
    return SupportEstimate(float(value), 0.0, method)


# degenerate all-equal samples still count as a Monte-Carlo estimate
_SE_FLOOR = float(np.finfo(float).tiny)


def _mc(samples: np.ndarray) -> SupportEstimate:
    n = samples.shape[0]
    value = float(np.mean(samples))
    se = float(np.std(samples, ddof=1) / math.sqrt(n))
    return SupportEstimate(value, max(se, _SE_FLOOR), "monte_carlo")


def _model_dim(model) -> int:
    return model.dim if isinstance(model, VectorModel) else 1


def _model_means(model) -> np.ndarray:
    if isinstance(model, VectorModel):
        return np.asarray(model.means, dtype=float)
    return np.array([model.mean])


def lognormal_call(model: LogNormal, k: float, big_f: float) -> float:
    """E (F eta - k)_+ for a scalar log-normal model (undiscounted)."""
    if big_f <= 0:
        return 0.0
    if k <= 0:
        return big_f * model.mean - k
    d = (math.log(k / big_f) - model.mu) / model.sigma
    return big_f * model.mean * norm_cdf(model.sigma - d) - k * norm_cdf(-d)


def support_lift_zonoid(
    model,
    lv: LiftVector,
    rng: RngStream | None = None,
    n_samples: int = DEFAULT_SAMPLES,
) -> SupportEstimate:
    """Support function of the lift zonoid: E (u0 + <u, eta>)_+.

    Sign cases with an exact value short-circuit Monte Carlo: all
    coordinates nonnegative gives ``u0 + <u, E eta>``; all nonpositive
    gives zero.  The scalar log-normal model prices through the
    closed-form call/put; atoms sum exactly.
    """
    u = np.asarray(lv.u, dtype=float)
    if lv.dim != _model_dim(model):
        raise DomainError("lift vector dimension does not match the model")
    if lv.u0 >= 0 and np.all(u >= 0):
        return _exact(lv.u0 + float(u @ _model_means(model)))
    if lv.u0 <= 0 and np.all(u <= 0):
        return _exact(0.0)

    if isinstance(model, LogNormal):
        u1 = float(u[0])
        if u1 > 0:  # u0 < 0: call with strike -u0, forward weight u1
            return _exact(lognormal_call(model, -lv.u0, u1))
        # u1 < 0, u0 > 0: put via parity p = c - F m + k
        call = lognormal_call(model, lv.u0, -u1)
        return _exact(call - (-u1) * model.mean + lv.u0)
    if isinstance(model, DiscreteAtoms):
        payoff = np.maximum(lv.u0 + u[0] * model.values, 0.0)
        return _exact(float(payoff @ model.probs))

    if rng is None:
        raise DomainError("Monte-Carlo path requires an RngStream")
    draws = model.sample(n_samples, rng)
    draws = draws.reshape(n_samples, -1)
    return _mc(np.maximum(lv.u0 + draws @ u, 0.0))


def support_lift_max_zonoid(
    model,
    lv: LiftVector,
    rng: RngStream | None = None,
    n_samples: int = DEFAULT_SAMPLES,
) -> SupportEstimate:
    """Support function of the lift max-zonoid: E max(u0, u1 eta1, ...).

    Restricted to the first orthant; negative coordinates raise
    ``DomainError`` because the implicit 0 in the max already covers them.
    """
    u = np.asarray(lv.u, dtype=float)
    if lv.dim != _model_dim(model):
        raise DomainError("lift vector dimension does not match the model")
    if lv.u0 < 0 or np.any(u < 0):
        raise DomainError("lift max-zonoid support is defined for nonnegative coordinates")
    nonzero = np.flatnonzero(u)
    if nonzero.size == 0:
        return _exact(lv.u0)
    if lv.u0 == 0 and nonzero.size == 1:
        j = int(nonzero[0])
        return _exact(float(u[j] * _model_means(model)[j]))

    if isinstance(model, LogNormal):
        # E max(k, F eta) = E (F eta - k)_+ + k
        return _exact(lognormal_call(model, lv.u0, float(u[0])) + lv.u0)
    if isinstance(model, DiscreteAtoms):
        payoff = np.maximum(lv.u0, u[0] * model.values)
        return _exact(float(payoff @ model.probs))

    if rng is None:
        raise DomainError("Monte-Carlo path requires an RngStream")
    draws = model.sample(n_samples, rng)
    draws = draws.reshape(n_samples, -1)
    return _mc(np.maximum(lv.u0, np.max(draws * u, axis=1)))


def husler_reiss_norm(k: float, big_f: float, lambda_hr: float) -> float:
    """F Phi(lam + log(F/k)/(2 lam)) + k Phi(lam - log(F/k)/(2 lam)).

    The closed-form E max(F eta, k) for mean-one log-normal eta with
    ``lambda_hr = sigma sqrt(T) / 2``; symmetric in (k, F), which is the
    self-duality of the log-normal model.  Conventions at the boundary:
    k = 0 gives F and F = 0 gives k.
    """
    if lambda_hr <= 0:
        raise DomainError("lambda_hr must be positive")
    if k < 0 or big_f < 0:
        raise DomainError("k and F must be nonnegative")
    if k == 0 and big_f == 0:
        raise DomainError("k and F must not both vanish")
    if k == 0:
        return float(big_f)
    if big_f == 0:
        return float(k)
    half_log = math.log(big_f / k) / (2.0 * lambda_hr)
    return big_f * norm_cdf(lambda_hr + half_log) + k * norm_cdf(lambda_hr - half_log)


def boundary_param(model: ScalarModel, k: float) -> tuple[float, float]:
    """Gradient of the lift-zonoid support function at (-k, 1).

    Returns ``(P(eta > k), E[eta 1{eta > k}])`` -- the undiscounted
    binary-call and normalised gap-call values -- a point on the upper
    boundary of the lift zonoid.  Requires a non-atomic model, since the
    support function is continuously differentiable exactly when the
    distribution has no atoms.
    """
    if k <= 0:
        raise DomainError("strike must be positive")
    if not model.has_density:
        raise AtomicModel("boundary parametrisation requires a non-atomic model")
    bc = 1.0 - float(model.cdf(k))
    if isinstance(model, LogNormal):
        gc = model.tail_mean(k)
    else:
        gc = integrate_interval(lambda t: t * model.pdf(t), k, math.inf, what="E[eta 1{eta>k}]")
    return bc, gc


def boundary_polyline(
    model: ScalarModel,
    k_min: float = 1e-2,
    k_max: float = 1e2,
    n_points: int = 200,
) -> np.ndarray:
    """Upper lift-zonoid boundary sampled at log-spaced strikes.

    Rows are ``(k, bc, gc_over_f)`` with F = 1; this is the generalised
    Lorenz curve of the model.
    """
    ks = np.geomspace(k_min, k_max, n_points)
    rows = np.empty((n_points, 3))
    for idx, k in enumerate(ks):
        bc, gc = boundary_param(model, float(k))
        rows[idx] = (k, bc, gc)
    return rows


def write_boundary_csv(rows: np.ndarray, fh: io.TextIOBase) -> None:
    fh.write("k,bc,gc_over_f\n")
    for k, bc, gc in rows:
        fh.write(f"{k:.17g},{bc:.17g},{gc:.17g}\n")


def reflect_pi(lv: LiftVector, i: int) -> LiftVector:
    """Swap coordinate 0 with asset coordinate ``i`` (1-based).

    Reflection of R^(n+1) at the hyperplane {u0 = u_i}; an involution.
    """
    if not 1 <= i <= lv.dim:
        raise IndexError(f"asset index {i} out of range 1..{lv.dim}")
    u = list(lv.u)
    new_u0 = u[i - 1]
    u[i - 1] = lv.u0
    return LiftVector(new_u0, tuple(u))


def max_stable_cdf(norm: Callable[[float, float], float], u1: float, u2: float) -> float:
    """Bivariate max-stable CDF with unit Frechet marginals.

    ``P(xi1 <= 1/u1, xi2 <= 1/u2) = exp(-||(u1, u2)||)`` for the norm that
    encodes the dependence; ``u = (0, 0)`` is the empty constraint.
    """
    if u1 < 0 or u2 < 0:
        raise DomainError("coordinates must be nonnegative")
    if u1 == 0 and u2 == 0:
        return 1.0
    return math.exp(-float(norm(u1, u2)))
