"""Path simulation, barrier detection, and semi-static hedge evaluation.

Prices follow ``S_t = S_0 o exp(t lambda + xi_t)`` for a finite-activity
Levy log-driver whose exponential is a componentwise martingale.  A
barrier event is the first grid time at which the level lies on the
segment between the initial and the current price of the monitored
asset.  The semi-static hedge of a knock-in claim is the European claim
``(f(S_T) + (S_Ti/H)^alpha f(kappahat_i(S_T, H))) 1{H in segment}``;
when the payoff's support makes one summand vanish identically the
indicator is dropped and the hedge collapses to a plain basket/spread
claim.

Replication is verified by nested Monte Carlo: outer paths locate first
hits, inner simulations restarted from the hit state compare the
conditional values of the target and the hedge claims.  The identity is
an equality of conditional expectations given a hit state with
``S_i = H`` exactly, so for continuous drivers the detected state is
projected onto the barrier (the grid-crossing bias otherwise dominates
the comparison); with jumps the observed overshoot state is kept and the
verdict becomes one-sided super-replication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dist import MultiLogNormal
from .errors import DomainError, SymmetryPrereqFailed
from .levy import LevyTriplet, char_exponent, check_qsd_triplet, sample_increments
from .pricing import (
    AffineCall,
    BasketCall,
    BasketPut,
    CompositePayoff,
    CustomPayoff,
    Payoff,
    SpreadCall,
)
from .rng import RngStream

__all__ = [
    "PathConfig",
    "Barrier",
    "HitRecord",
    "HedgePlan",
    "HitGap",
    "HedgeReport",
    "TwoAssetMinCombo",
    "ReflectedClaim",
    "PowerWeightedAffine",
    "TerminalKnockIndicator",
    "simulate_paths",
    "detect_first_hit",
    "reflect_claim",
    "build_hedge",
    "evaluate_hedge",
    "two_asset_joint_hedges",
    "evaluate_joint_hedge",
    "JointHedgePlan",
]

SE_BAND = 3.0
# resolution floor for nested-MC conditional values; coarser than the
# distribution-level checks because inner simulations are the cost driver
SE_FLOOR = 5e-3


# --------------------------------------------------------------------------- #
# Configuration
# --------------------------------------------------------------------------- #


@dataclass
class PathConfig:
    """Market scenario: S_t = S0 o exp(t*carry + xi_t).

    ``driver`` is the unit-time generating triplet of xi (a
    :class:`MultiLogNormal` is accepted as the law of xi at the horizon
    and rescaled); every component of exp(xi_t) must be a martingale.
    """

    s0: Sequence[float]
    carry: Sequence[float]
    driver: LevyTriplet | MultiLogNormal
    horizon: float = 1.0
    steps: int = 250

    def __post_init__(self):
        self.s0 = np.atleast_1d(np.asarray(self.s0, dtype=float))
        self.carry = np.atleast_1d(np.asarray(self.carry, dtype=float))
        if np.any(self.s0 <= 0):
            raise DomainError("initial prices must be positive")
        if self.horizon <= 0 or self.steps < 1:
            raise DomainError("horizon must be positive and steps >= 1")
        if isinstance(self.driver, MultiLogNormal):
            self.driver = LevyTriplet(
                self.driver.cov / self.horizon, mu=self.driver.mu / self.horizon
            )
        n = self.driver.n
        if self.s0.shape != (n,) or self.carry.shape != (n,):
            raise DomainError("s0/carry length must match the driver dimension")
        for j in range(1, n + 1):
            e = np.zeros(n)
            e[j - 1] = -1.0
            resid = abs(char_exponent(self.driver, 1j * e))
            if resid > 1e-8:
                raise DomainError(
                    f"driver is not martingale-normalised in component {j} "
                    f"(|log E exp(xi_{j})| = {resid:.2e})"
                )

    @property
    def n(self) -> int:
        return self.driver.n

    @property
    def is_continuous(self) -> bool:
        return self.driver.nu.is_empty


@dataclass(frozen=True)
class Barrier:
    """Single barrier on one asset; ``direction`` fixes the crossing side.

    ``down`` requires the initial price above the level, ``up`` below;
    this is validated against the scenario before simulation.
    """

    asset: int
    level: float
    direction: str = "down"

    def __post_init__(self):
        if self.level <= 0:
            raise DomainError("barrier level must be positive")
        if self.direction not in ("down", "up"):
            raise DomainError("direction must be 'down' or 'up'")

    def validate(self, cfg: PathConfig) -> None:
        if not 1 <= self.asset <= cfg.n:
            raise DomainError(f"barrier asset {self.asset} out of range 1..{cfg.n}")
        s0 = float(cfg.s0[self.asset - 1])
        if s0 == self.level:
            raise DomainError("initial price must differ from the barrier level")
        want = "down" if s0 > self.level else "up"
        if want != self.direction:
            raise DomainError(
                f"barrier direction {self.direction!r} inconsistent with S0={s0} "
                f"and level={self.level}"
            )

    def crossed(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        return values <= self.level if self.direction == "down" else values >= self.level


@dataclass(frozen=True)
class HitRecord:
    step: int  # grid index of the hit (1-based into the path rows)
    time: float
    value: float  # monitored asset's price at the hit step
    overshoot: bool  # jump step with price strictly beyond the level


# --------------------------------------------------------------------------- #
# Simulation and hit detection
# --------------------------------------------------------------------------- #


def simulate_paths(
    cfg: PathConfig, n_paths: int, rng: RngStream, with_jumps: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate full price grids; returns (paths, jump_flags).

    ``paths`` has shape (n_paths, steps+1, n); log-prices accumulate
    exact Levy increments per step, so the scheme has no discretisation
    bias in distribution at the grid times.  ``jump_flags[p, k]`` marks a
    Poisson event inside step k of path p.
    """
    n_paths = int(n_paths)
    dt = cfg.horizon / cfg.steps
    logs = np.zeros((n_paths, cfg.steps + 1, cfg.n))
    jump_flags = np.zeros((n_paths, cfg.steps), dtype=bool)
    for k in range(cfg.steps):
        incr, counts = sample_increments(
            cfg.driver, dt, rng.child(k), n_paths, return_counts=True
        )
        logs[:, k + 1] = logs[:, k] + incr
        if with_jumps:
            jump_flags[:, k] = counts > 0
    times = np.linspace(0.0, cfg.horizon, cfg.steps + 1)
    paths = cfg.s0 * np.exp(times[None, :, None] * cfg.carry + logs)
    return paths, jump_flags


def detect_first_hit(
    path: np.ndarray,
    barrier: Barrier,
    horizon: float,
    jump_steps: np.ndarray | None = None,
) -> HitRecord | None:
    """First grid time whose segment from S0 contains the barrier level.

    With the segment rule, the hit condition at time t is simply that the
    current price sits at or beyond the level relative to the start; the
    overshoot flag is set when the hit step contained a jump and the
    price did not land exactly on the level.
    """
    values = np.asarray(path, dtype=float)
    if values.ndim == 2:
        values = values[:, barrier.asset - 1]
    crossed = barrier.crossed(values[1:])
    if not np.any(crossed):
        return None
    k = int(np.argmax(crossed)) + 1
    steps = values.shape[0] - 1
    value = float(values[k])
    had_jump = bool(jump_steps[k - 1]) if jump_steps is not None else False
    return HitRecord(
        step=k,
        time=horizon * k / steps,
        value=value,
        overshoot=had_jump and value != barrier.level,
    )


# --------------------------------------------------------------------------- #
# Claim constructions
# --------------------------------------------------------------------------- #


class ReflectedClaim(Payoff):
    """(S_i/H)^alpha f(kappahat_i(S, H)); exact for any payoff f.

    ``kappahat_i`` maps S to (H/S_i) (S_1, ..., H, ..., S_n), replacing
    the i-th coordinate by H^2/S_i; applying the map twice is the
    identity, so double reflection returns the original claim pointwise.
    """

    def __init__(self, base: Payoff, i: int, level: float, alpha: float):
        if level <= 0:
            raise DomainError("barrier level must be positive")
        self.base = base
        self.i = int(i)
        self.level = float(level)
        self.alpha = float(alpha)
        self.n_assets = base.n_assets

    def __call__(self, s):
        s = self._matrix(s)
        si = s[:, self.i - 1]
        scale = self.level / si
        refl = s * scale[:, None]
        refl[:, self.i - 1] = self.level * scale
        return (si / self.level) ** self.alpha * self.base(refl)


class PowerWeightedAffine(Payoff):
    """(S_i/H)^(alpha-1) (<w, S> + c)_+; the reflected affine claim.

    For alpha = 1 this is a plain basket/spread option.
    """

    def __init__(self, weights, constant: float, i: int, level: float, alpha: float):
        self.weights = tuple(float(w) for w in np.atleast_1d(weights))
        self.constant = float(constant)
        self.i = int(i)
        self.level = float(level)
        self.alpha = float(alpha)
        self.n_assets = len(self.weights)

    def __call__(self, s):
        s = self._matrix(s)
        inner = np.maximum(s @ np.asarray(self.weights) + self.constant, 0.0)
        if self.alpha == 1.0:
            return inner
        return (s[:, self.i - 1] / self.level) ** (self.alpha - 1.0) * inner


class TerminalKnockIndicator(Payoff):
    """1{H between S0_i and S_Ti}, i.e. terminal price at/beyond the level."""

    def __init__(self, barrier: Barrier, n_assets: int | None = None):
        self.barrier = barrier
        self.n_assets = n_assets

    def __call__(self, s):
        s = self._matrix(s)
        return self.barrier.crossed(s[:, self.barrier.asset - 1]).astype(float)


class TwoAssetMinCombo(Payoff):
    """(S1 - k) + min(S2, S1 - k); may be negative."""

    def __init__(self, strike: float):
        if strike <= 0:
            raise DomainError("strike must be positive")
        self.strike = float(strike)
        self.n_assets = 2

    def __call__(self, s):
        s = self._matrix(s)
        d = s[:, 0] - self.strike
        return d + np.minimum(s[:, 1], d)


def _affine_parts(payoff: Payoff) -> tuple[np.ndarray, float] | None:
    """Express basket/spread/affine calls as (<w, S> + c)_+."""
    if isinstance(payoff, BasketCall):
        return np.asarray(payoff.weights, dtype=float), -payoff.strike
    if isinstance(payoff, SpreadCall):
        return payoff.net_weights.astype(float), -payoff.strike
    if isinstance(payoff, AffineCall):
        return np.asarray(payoff.weights, dtype=float), payoff.constant
    return None


def reflect_claim(f: Payoff, i: int, level: float, alpha: float) -> Payoff:
    """Claim whose value at the barrier equals the value of ``f``.

    Affine calls reflect symbolically: the result is
    ``(S_i/H)^(alpha-1) (w_i H + (c/H) S_i + sum_{j != i} w_j S_j)_+``,
    a weighted spread/basket claim.  Anything else reflects through the
    generic wrapper.
    """
    parts = _affine_parts(f)
    if parts is None:
        return ReflectedClaim(f, i, level, alpha)
    w, c = parts
    new_w = w.copy()
    new_w[i - 1] = c / level
    new_c = w[i - 1] * level
    return PowerWeightedAffine(new_w, new_c, i, level, alpha)


@dataclass
class HedgePlan:
    """Semi-static plan: hold ``hedge`` statically, exchange at first hit."""

    target: Payoff
    barrier: Barrier
    alpha: float
    knock: str  # in | out | super
    hedge: Payoff
    simplification: str = "indicator"

    @property
    def indicator_free(self) -> bool:
        return self.simplification != "indicator"


def _try_simplify(target: Payoff, barrier: Barrier, alpha: float) -> tuple[Payoff, str] | None:
    """Indicator elimination when the payoff's support allows it.

    Pattern 1 (spread with a down barrier): target
    ``(a S_i - sum b_j S_j - k)_+`` with ``a > 0``, ``b_j >= 0`` and
    ``a H <= k`` pays nothing when knocked, and its reflection pays
    nothing when not knocked, so the hedge is the bare reflected claim.

    Pattern 2 (two-asset min combination with barrier at its strike):
    the indicator absorbs into ``target - (S1+S2-k)_+ + (k+S2-S1)_+``.
    """
    i = barrier.asset
    level = barrier.level
    if isinstance(target, TwoAssetMinCombo) and barrier.direction == "down":
        if i == 1 and abs(level - target.strike) <= 1e-12 * (1.0 + target.strike) and alpha == 1.0:
            k = target.strike
            combo = CompositePayoff(
                [
                    (1.0, target),
                    (-1.0, BasketCall((1.0, 1.0), k)),
                    (1.0, AffineCall((-1.0, 1.0), k)),
                ]
            )
            return combo, "min-combo indicator absorbed"
    parts = _affine_parts(target)
    if parts is not None and barrier.direction == "down":
        w, c = parts
        k = -c
        others = np.delete(w, i - 1)
        if w[i - 1] > 0 and np.all(others <= 0) and k >= 0 and w[i - 1] * level <= k:
            return reflect_claim(target, i, level, alpha), "spread-put form"
    return None


def build_hedge(target: Payoff, barrier: Barrier, alpha: float, knock: str = "in") -> HedgePlan:
    """Hedge claim for a knock-in/knock-out target, or the super-hedge.

    ``in``: the reflected construction, indicator-free when the payoff's
    support permits.  ``out``: long target, short the knock-in hedge.
    ``super``: the bare reflected basket claim whose value dominates the
    knock-in claim from above.
    """
    if knock not in ("in", "out", "super"):
        raise DomainError("knock must be 'in', 'out' or 'super'")
    i = barrier.asset
    if knock == "super":
        return HedgePlan(
            target, barrier, alpha, knock,
            reflect_claim(target, i, barrier.level, alpha), "super-hedge reflected claim",
        )
    simplified = _try_simplify(target, barrier, alpha)
    if simplified is not None:
        hedge, how = simplified
    else:
        reflected = reflect_claim(target, i, barrier.level, alpha)
        indicator = TerminalKnockIndicator(barrier, target.n_assets)
        both = CompositePayoff([(1.0, target), (1.0, reflected)])
        hedge = CustomPayoff(lambda s, _b=both, _ind=indicator: _ind(s) * _b(s), target.n_assets)
        how = "indicator"
    if knock == "in":
        return HedgePlan(target, barrier, alpha, knock, hedge, how)
    # knock-out: target minus the knock-in hedge
    out_hedge = CompositePayoff([(1.0, target), (-1.0, hedge)])
    return HedgePlan(target, barrier, alpha, knock, out_hedge, f"out = target - in ({how})")


# --------------------------------------------------------------------------- #
# Replication measurement
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class HitGap:
    path: int
    step: int
    time: float
    state: tuple
    target_value: float
    hedge_value: float
    gap: float
    std_error: float
    overshoot: bool

    @property
    def gap_in_se_units(self) -> float:
        return self.gap / self.std_error if self.std_error > 0 else 0.0


@dataclass
class HedgeReport:
    knock_in_fraction: float
    knock_in_se: float
    overshoot_fraction: float
    one_sided: bool
    hit_gaps: list[HitGap] = field(default_factory=list)
    terminal_max_mismatch: float = 0.0
    price_plain: tuple[float, float] = (0.0, 0.0)
    price_knock_in: tuple[float, float] = (0.0, 0.0)
    price_knock_out: tuple[float, float] = (0.0, 0.0)

    @property
    def max_gap_se_units(self) -> float:
        if self.one_sided:
            return max((-(g.gap) / g.std_error for g in self.hit_gaps if g.std_error > 0), default=0.0)
        return max((abs(g.gap) / g.std_error for g in self.hit_gaps if g.std_error > 0), default=0.0)

    @property
    def decomposition_residual(self) -> tuple[float, float]:
        r = self.price_knock_in[0] + self.price_knock_out[0] - self.price_plain[0]
        se = math.hypot(self.price_knock_in[1], self.price_knock_out[1], self.price_plain[1])
        return r, se

    @property
    def verdict(self) -> str:
        if self.terminal_max_mismatch > 1e-10:
            return "fail"
        statuses = []
        for g in self.hit_gaps:
            bad = (-g.gap if self.one_sided else abs(g.gap)) > SE_BAND * g.std_error
            if bad:
                return "fail"
            scale = max(1.0, abs(g.target_value))
            statuses.append("inconclusive" if g.std_error > SE_FLOOR * scale else "pass")
        r, se = self.decomposition_residual
        if abs(r) > SE_BAND * max(se, 1e-300):
            return "fail"
        return "inconclusive" if "inconclusive" in statuses else "pass"

    def one_line(self) -> str:
        return (
            f"verdict={self.verdict} hits={self.knock_in_fraction:.4f}"
            f"+-{self.knock_in_se:.4f} states={len(self.hit_gaps)} "
            f"max_gap_se={self.max_gap_se_units:.2f} overshoot={self.overshoot_fraction:.4f}"
        )

    def gaps_csv(self, fh) -> None:
        fh.write("path,step,time,target_value,hedge_value,gap,std_error,overshoot\n")
        for g in self.hit_gaps:
            fh.write(
                f"{g.path},{g.step},{g.time:.17g},{g.target_value:.17g},"
                f"{g.hedge_value:.17g},{g.gap:.17g},{g.std_error:.17g},{int(g.overshoot)}\n"
            )


def _conditional_gap(
    cfg: PathConfig,
    state: np.ndarray,
    tau: float,
    lhs: Payoff,
    rhs: Payoff,
    n_inner: int,
    rng: RngStream,
) -> tuple[float, float, float, float]:
    """Inner Monte Carlo from a stopping state; returns
    (lhs_value, rhs_value, gap, se_of_gap) with common random numbers."""
    remaining = cfg.horizon - tau
    if remaining <= 0:
        s_t = state[None, :]
        lv, rv = float(lhs(s_t)[0]), float(rhs(s_t)[0])
        return lv, rv, rv - lv, 0.0
    incr = sample_increments(cfg.driver, remaining, rng, int(n_inner))
    s_t = state * np.exp(remaining * cfg.carry + incr)
    lv = lhs(s_t)
    rv = rhs(s_t)
    d = rv - lv
    se = float(np.std(d, ddof=1) / math.sqrt(d.shape[0]))
    return float(np.mean(lv)), float(np.mean(rv)), float(np.mean(d)), max(se, 1e-300)


def evaluate_hedge(
    plan: HedgePlan,
    cfg: PathConfig,
    n_outer: int = 10_000,
    n_inner: int = 20_000,
    rng: RngStream | None = None,
    n_hit_states: int = 50,
    bridge_correction: bool | None = None,
) -> HedgeReport:
    """Measure the replication quality of a hedge plan by nested MC.

    Outer paths locate first hits; at up to ``n_hit_states`` of them the
    conditional values of the exchanged claims are compared by inner
    simulation restarted from the hit state.  For continuous drivers the
    hit state is projected onto the barrier (``bridge_correction``, on
    by default); jump drivers keep the overshoot state and the verdict
    is one-sided.  No-hit paths check the terminal indicator algebra
    pointwise, and knock-in/out/plain prices are taken from the same
    outer paths.
    """
    if rng is None:
        raise DomainError("evaluate_hedge requires an RngStream")
    plan.barrier.validate(cfg)
    if bridge_correction is None:
        bridge_correction = cfg.is_continuous
    paths, jump_flags = simulate_paths(cfg, n_outer, rng.child(0))
    terminal = paths[:, -1, :]

    hits: list[tuple[int, HitRecord]] = []
    knocked = np.zeros(n_outer, dtype=bool)
    overshoots = 0
    for p in range(n_outer):
        rec = detect_first_hit(paths[p], plan.barrier, cfg.horizon, jump_flags[p])
        if rec is not None:
            knocked[p] = True
            overshoots += int(rec.overshoot)
            hits.append((p, rec))
    frac = float(np.mean(knocked))
    frac_se = math.sqrt(max(frac * (1.0 - frac), 1e-300) / n_outer)
    n_knocked = int(knocked.sum())
    overshoot_fraction = overshoots / n_knocked if n_knocked else 0.0

    # pathwise indicator algebra on the same outer draws
    target_terminal = plan.target(terminal)
    chi = knocked.astype(float)
    plain = target_terminal
    ki = chi * target_terminal
    ko = (1.0 - chi) * target_terminal

    def _price(v):
        return float(np.mean(v)), float(np.std(v, ddof=1) / math.sqrt(n_outer))

    hedge_terminal = plan.hedge(terminal)
    if plan.knock == "in":
        no_hit_mismatch = float(np.max(np.abs(hedge_terminal[~knocked]))) if (~knocked).any() else 0.0
    elif plan.knock == "out":
        diff = hedge_terminal[~knocked] - target_terminal[~knocked]
        no_hit_mismatch = float(np.max(np.abs(diff))) if (~knocked).any() else 0.0
    else:
        no_hit_mismatch = 0.0  # super-hedge promises only domination

    gaps: list[HitGap] = []
    zero = CustomPayoff(lambda s: np.zeros(s.shape[0]), cfg.n)
    for idx, (p, rec) in enumerate(hits[: int(n_hit_states)]):
        state = paths[p, rec.step].copy()
        if bridge_correction and not rec.overshoot:
            state[plan.barrier.asset - 1] = plan.barrier.level
        if plan.knock == "in":
            lhs, rhs = plan.target, plan.hedge
        elif plan.knock == "out":
            lhs, rhs = zero, plan.hedge
        else:  # super: reflected claim must dominate the knocked-in target
            lhs, rhs = plan.target, plan.hedge
        tv, hv, gap, se = _conditional_gap(
            cfg, state, rec.time, lhs, rhs, n_inner, rng.child(1000 + idx)
        )
        gaps.append(
            HitGap(p, rec.step, rec.time, tuple(state), tv, hv, gap, se, rec.overshoot)
        )

    one_sided = (not cfg.is_continuous) or plan.knock == "super"
    return HedgeReport(
        knock_in_fraction=frac,
        knock_in_se=frac_se,
        overshoot_fraction=overshoot_fraction,
        one_sided=one_sided,
        hit_gaps=gaps,
        terminal_max_mismatch=no_hit_mismatch,
        price_plain=_price(plain),
        price_knock_in=_price(ki),
        price_knock_out=_price(ko),
    )


# --------------------------------------------------------------------------- #
# Joint two-asset hedges
# --------------------------------------------------------------------------- #


@dataclass
class JointHedgePlan:
    claim: str  # X | Y
    level: float
    alphas: tuple[float, float]
    legs: list[tuple[float, Payoff]]
    # conditional identities to verify: (asset index, lhs, rhs)
    exchanges: list[tuple[int, Payoff, Payoff]] = field(default_factory=list)


def two_asset_joint_hedges(
    cfg: PathConfig,
    claim: str,
    k_x: float | None = None,
    k_y: float | None = None,
    alphas: tuple[float, float] = (1.0, 1.0),
    carry=(0.0, 0.0),
) -> JointHedgePlan:
    """Semi-static hedges for the two-asset joint-barrier claims.

    ``X`` knocks in a spread on (first hitter minus the other) when either
    asset falls to ``k_x``; its hedge is one basket put struck at ``k_x``.
    ``Y`` is a basket-put position switched in sign by which asset first
    reaches ``k_y``; its hedge is a long/short pair of spread claims with
    the ``(k_y^-1 S_i)^(alpha_i - 1)`` weights when the orders differ from
    one.  Requires the driver to satisfy the symmetry for both numeraires.
    """
    if cfg.n != 2:
        raise DomainError("joint hedges are two-asset constructions")
    if claim not in ("X", "Y"):
        raise DomainError("claim must be 'X' or 'Y'")
    for i in (1, 2):
        rep = check_qsd_triplet(cfg.driver, i, np.asarray(carry, dtype=float), alphas[i - 1])
        if rep.verdict != "pass":
            raise SymmetryPrereqFailed(
                f"driver is not quasi-self-dual for numeraire {i}: {rep.one_line()}"
            )
    a1, a2 = alphas
    if claim == "X":
        if k_x is None or not (k_x < float(np.min(cfg.s0))):
            raise DomainError("need k_x below both initial prices")
        put = BasketPut((1.0, 1.0), k_x)
        spread1 = reflect_claim(put, 1, k_x, a1)
        spread2 = reflect_claim(put, 2, k_x, a2)
        return JointHedgePlan(
            "X", k_x, alphas, [(1.0, put)],
            exchanges=[(1, put, spread1), (2, put, spread2)],
        )
    if k_y is None or not (k_y > float(np.max(cfg.s0))):
        raise DomainError("need k_y above both initial prices")
    put = BasketPut((1.0, 1.0), k_y)
    long_leg = reflect_claim(put, 1, k_y, a1)  # (S1 - S2 - k_y)_+ weighted
    short_leg = reflect_claim(put, 2, k_y, a2)  # (S2 - S1 - k_y)_+ weighted
    return JointHedgePlan(
        "Y", k_y, alphas, [(1.0, long_leg), (-1.0, short_leg)],
        exchanges=[(1, put, long_leg), (2, put, short_leg)],
    )


def evaluate_joint_hedge(
    plan: JointHedgePlan,
    cfg: PathConfig,
    n_outer: int = 4_000,
    n_inner: int = 20_000,
    rng: RngStream | None = None,
    n_hit_states: int = 50,
) -> HedgeReport:
    """Verify the joint plan's conditional exchange identities by nested MC.

    First-hit states of each monitored asset at the plan's level are
    collected from outer paths (projected onto the barrier for continuous
    drivers) and each stated identity is checked there.
    """
    if rng is None:
        raise DomainError("evaluate_joint_hedge requires an RngStream")
    direction = "down" if plan.claim == "X" else "up"
    barriers = {
        i: Barrier(i, plan.level, direction) for i in (1, 2)
    }
    for b in barriers.values():
        b.validate(cfg)
    paths, jump_flags = simulate_paths(cfg, n_outer, rng.child(0))

    gaps: list[HitGap] = []
    knocked = np.zeros(n_outer, dtype=bool)
    overshoots = 0
    per_asset_quota = max(1, int(n_hit_states) // 2)
    counts = {1: 0, 2: 0}
    for p in range(n_outer):
        recs = {
            i: detect_first_hit(paths[p], barriers[i], cfg.horizon, jump_flags[p])
            for i in (1, 2)
        }
        live = {i: r for i, r in recs.items() if r is not None}
        if not live:
            continue
        knocked[p] = True
        first_asset = min(live, key=lambda i: live[i].step)
        rec = live[first_asset]
        overshoots += int(rec.overshoot)
        if counts[first_asset] >= per_asset_quota:
            continue
        counts[first_asset] += 1
        state = paths[p, rec.step].copy()
        if cfg.is_continuous and not rec.overshoot:
            state[first_asset - 1] = plan.level
        _, lhs, rhs = next(e for e in plan.exchanges if e[0] == first_asset)
        lv, rv, gap, se = _conditional_gap(
            cfg, state, rec.time, lhs, rhs, n_inner, rng.child(2000 + p)
        )
        gaps.append(HitGap(p, rec.step, rec.time, tuple(state), lv, rv, gap, se, rec.overshoot))

    frac = float(np.mean(knocked))
    frac_se = math.sqrt(max(frac * (1.0 - frac), 1e-300) / n_outer)
    n_knocked = int(knocked.sum())
    return HedgeReport(
        knock_in_fraction=frac,
        knock_in_se=frac_se,
        overshoot_fraction=overshoots / n_knocked if n_knocked else 0.0,
        one_sided=not cfg.is_continuous,
        hit_gaps=gaps,
    )
