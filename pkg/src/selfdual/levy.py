"""Levy generating triplets, Esscher transforms, and the carry-order solver.

A triplet ``(A, nu, drift)`` describes an infinitely divisible log-price
vector through its characteristic exponent.  Three drift conventions are
supported: ``mean`` (drift is the expectation of xi; jump integrand
compensated everywhere), ``truncated`` (compensation inside the unit
ball of the numeraire-adapted norm |||.|||), and ``truncated_euclidean``.
Jump measures are finite: weighted atoms plus an optional Gaussian
component (the exponential tilt of a numeraire-symmetric base), so every
integral against ``nu`` is an exact sum or a Gaussian closed form.
A triplet with a Gaussian jump component must use the ``mean``
convention, where no ball integrals over the Gaussian are needed.

The module verifies the triplet conditions for self-duality and
quasi-self-duality of ``exp(xi)`` and solves the fixed-point equation
tying the quasi-self-duality order ``alpha`` to the carrying cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .duality import KappaMaps, ReportPoint, SymmetryReport
from .errors import (
    AmbiguousRoot,
    DomainError,
    InfiniteActivity,
    NoBracket,
    PatternViolation,
)
from .rng import RngStream

__all__ = [
    "triple_norm",
    "GaussianPart",
    "JumpMeasure",
    "LevyTriplet",
    "AlphaSolution",
    "char_exponent",
    "esscher",
    "check_sd_triplet",
    "check_qsd_triplet",
    "solve_alpha",
    "lambert_w0",
    "martingale_drift",
    "martingale_normalized",
    "build_tilted_gaussian_measure",
    "convert_convention",
    "sample_increment",
    "sample_increments",
]

CONVENTIONS = ("mean", "truncated", "truncated_euclidean")


def triple_norm(u, i: int) -> float:
    """Numeraire-adapted norm: |||u|||^2 = (||u||^2 + ||K_i u||^2) / 2.

    Invariant under K_i by construction; reduces to the Euclidean norm
    in one dimension.
    """
    u = np.asarray(u, dtype=float)
    k = u - u[i - 1]
    k[i - 1] = -u[i - 1]
    return math.sqrt(0.5 * (float(u @ u) + float(k @ k)))


# --------------------------------------------------------------------------- #
# Jump measures
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class GaussianPart:
    """Finite Gaussian jump component: ``mass * N(mean, cov)``."""

    mean: np.ndarray
    cov: np.ndarray
    mass: float

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "cov", np.asarray(self.cov, dtype=float))
        if self.mass <= 0:
            raise DomainError("Gaussian jump mass must be positive")

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def exp_integral(self, w) -> complex:
        """integral of exp(<w, x>) against the component; w may be complex."""
        w = np.asarray(w)
        return self.mass * np.exp(w @ self.mean + 0.5 * (w @ self.cov @ w))

    def weighted_mean(self, w) -> np.ndarray:
        """integral of x exp(<w, x>) against the component."""
        w = np.asarray(w)
        return self.exp_integral(w) * (self.mean + self.cov @ w)


@dataclass(frozen=True)
class JumpMeasure:
    """Finite Levy measure: weighted atoms plus an optional Gaussian part."""

    atoms: tuple = ()
    gaussian: GaussianPart | None = None

    def __post_init__(self):
        cleaned = []
        for x, m in self.atoms:
            x = np.asarray(x, dtype=float).reshape(-1)
            if m <= 0:
                raise DomainError("atom masses must be positive")
            if float(np.max(np.abs(x))) == 0.0:
                raise DomainError("Levy measure must not charge the origin")
            cleaned.append((x, float(m)))
        object.__setattr__(self, "atoms", tuple(cleaned))
        dims = {x.shape[0] for x, _ in self.atoms}
        if self.gaussian is not None:
            dims.add(self.gaussian.dim)
        if len(dims) > 1:
            raise DomainError("inconsistent jump dimensions")

    @property
    def dim(self) -> int | None:
        if self.atoms:
            return self.atoms[0][0].shape[0]
        if self.gaussian is not None:
            return self.gaussian.dim
        return None

    @property
    def is_empty(self) -> bool:
        return not self.atoms and self.gaussian is None

    @property
    def total_mass(self) -> float:
        m = sum(m for _, m in self.atoms)
        if self.gaussian is not None:
            m += self.gaussian.mass
        return float(m)

    def exp_integral(self, w) -> complex:
        """integral of exp(<w, x>) d nu; exact for atoms, closed form Gaussian."""
        w = np.asarray(w)
        out = sum(m * np.exp(w @ x) for x, m in self.atoms)
        if self.gaussian is not None:
            out += self.gaussian.exp_integral(w)
        return out

    def mean_vector(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        for x, m in self.atoms:
            out += m * x
        if self.gaussian is not None:
            out += self.gaussian.mass * self.gaussian.mean
        return out

    def weighted_mean(self, w, n: int) -> np.ndarray:
        """integral of x exp(<w, x>) d nu."""
        w = np.asarray(w)
        out = np.zeros(n, dtype=complex)
        for x, m in self.atoms:
            out = out + m * x * np.exp(w @ x)
        if self.gaussian is not None:
            out = out + self.gaussian.weighted_mean(w)
        return out.real if np.allclose(out.imag, 0.0) else out

    def second_moment(self, n: int) -> np.ndarray:
        """integral of x x^T d nu (for increment cumulant checks)."""
        out = np.zeros((n, n))
        for x, m in self.atoms:
            out += m * np.outer(x, x)
        if self.gaussian is not None:
            g = self.gaussian
            out += g.mass * (g.cov + np.outer(g.mean, g.mean))
        return out

    def ball_mean(self, norm_kind: str, norm_index: int, n: int) -> np.ndarray:
        """integral of x over the unit ball; atoms only (exact indicator)."""
        if self.gaussian is not None:
            raise DomainError(
                "ball integrals over a Gaussian jump component are unsupported; "
                "use the mean drift convention"
            )
        out = np.zeros(n)
        for x, m in self.atoms:
            if _in_ball(x, norm_kind, norm_index):
                out += m * x
        return out


def _in_ball(x: np.ndarray, norm_kind: str, norm_index: int) -> bool:
    if norm_kind == "truncated":
        return triple_norm(x, norm_index) <= 1.0
    return float(np.linalg.norm(x)) <= 1.0


def build_tilted_gaussian_measure(b, alpha: float, mass: float, i: int) -> JumpMeasure:
    """Gaussian jump measure satisfying the order-``alpha`` reflection law.

    Starting from the K_i-invariant base ``N(0, B)`` (which requires the
    covariance pattern ``b_ij = b_ii / 2``), the density tilt
    ``exp(-alpha x_i / 2)`` shifts the mean to ``-(alpha/2) B e_i``.
    ``mass`` is the total mass of the resulting measure.
    """
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    if b.shape != (n, n) or not np.allclose(b, b.T, atol=1e-12):
        raise PatternViolation("covariance must be square symmetric")
    if not 1 <= i <= n:
        raise DomainError(f"numeraire index {i} out of range 1..{n}")
    col = b[:, i - 1]
    want = np.full(n, 0.5 * b[i - 1, i - 1])
    want[i - 1] = b[i - 1, i - 1]
    if np.max(np.abs(col - want)) > 1e-12 * (1.0 + abs(b[i - 1, i - 1])):
        raise PatternViolation(
            f"base covariance must satisfy b[j,{i}] = b[{i},{i}]/2 for K_{i}-invariance"
        )
    mean = -(alpha / 2.0) * col
    return JumpMeasure(gaussian=GaussianPart(mean=mean, cov=b, mass=mass))


# --------------------------------------------------------------------------- #
# Triplets
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class LevyTriplet:
    """Generating triplet of an n-dimensional infinitely divisible law.

    Exactly one of ``mu`` (mean convention) or ``gamma`` (truncated
    convention; ``norm_index`` fixes the |||.||| ball) is set; both may be
    omitted for a driftless shell fed to :func:`martingale_drift`.
    """

    a: np.ndarray
    nu: JumpMeasure = field(default_factory=JumpMeasure)
    mu: np.ndarray | None = None
    gamma: np.ndarray | None = None
    convention: str = "mean"
    norm_index: int = 1

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        object.__setattr__(self, "a", a)
        n = a.shape[0]
        if a.shape != (n, n):
            raise DomainError("A must be square")
        if not np.allclose(a, a.T, atol=1e-12):
            raise DomainError("A must be symmetric")
        if np.min(np.linalg.eigvalsh(a)) < -1e-12:
            raise DomainError("A must be positive semidefinite")
        if self.convention not in CONVENTIONS:
            raise DomainError(f"unknown drift convention {self.convention!r}")
        if self.mu is not None and self.gamma is not None:
            raise DomainError("give either mu or gamma, not both")
        if self.mu is not None:
            object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float))
            object.__setattr__(self, "convention", "mean")
        if self.gamma is not None:
            object.__setattr__(self, "gamma", np.asarray(self.gamma, dtype=float))
            if self.convention == "mean":
                raise DomainError("gamma drift requires a truncated convention")
        if self.nu.dim is not None and self.nu.dim != n:
            raise DomainError("jump dimension does not match A")
        if self.nu.gaussian is not None and self.convention != "mean":
            raise DomainError(
                "Gaussian jump components require the mean drift convention"
            )

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def drift(self) -> np.ndarray:
        d = self.mu if self.convention == "mean" else self.gamma
        if d is None:
            raise DomainError("triplet has no drift")
        return d

    def scaled(self, t: float) -> "LevyTriplet":
        """Triplet of xi_t for the Levy process: every part scales by t."""
        if t <= 0:
            raise DomainError("time scale must be positive")
        atoms = tuple((x, m * t) for x, m in self.nu.atoms)
        g = self.nu.gaussian
        gaussian = None if g is None else GaussianPart(g.mean, g.cov, g.mass * t)
        nu = JumpMeasure(atoms=atoms, gaussian=gaussian)
        mu = None if self.mu is None else self.mu * t
        gamma = None if self.gamma is None else self.gamma * t
        return LevyTriplet(
            self.a * t, nu, mu=mu, gamma=gamma, convention=self.convention,
            norm_index=self.norm_index,
        )


def convert_convention(t: LevyTriplet, to: str) -> LevyTriplet:
    """Re-express the drift under another truncation convention.

    A pure re-parametrisation: the characteristic exponent is unchanged.
    Requires an atomic jump measure unless converting to/from nothing,
    since ball integrals over a Gaussian part are not closed form.
    """
    if to not in CONVENTIONS:
        raise DomainError(f"unknown drift convention {to!r}")
    if to == t.convention:
        return t
    n = t.n
    if t.nu.is_empty:
        corr = {c: np.zeros(n) for c in CONVENTIONS}
    else:
        if t.nu.gaussian is not None:
            raise DomainError("convention conversion needs an atomic jump measure")
        full = t.nu.mean_vector(n)
        corr = {
            "mean": full,
            "truncated": t.nu.ball_mean("truncated", t.norm_index, n),
            "truncated_euclidean": t.nu.ball_mean("truncated_euclidean", t.norm_index, n),
        }
    # drift_c + integral of x (1 - 1_ball_c) d nu is convention independent
    base = t.drift + (corr["mean"] - corr[t.convention])
    new_drift = base - (corr["mean"] - corr[to])
    if to == "mean":
        return LevyTriplet(t.a, t.nu, mu=new_drift, norm_index=t.norm_index)
    return LevyTriplet(
        t.a, t.nu, gamma=new_drift, convention=to, norm_index=t.norm_index
    )


def char_exponent(t: LevyTriplet, u) -> complex:
    """log of the characteristic function at ``u`` (complex allowed).

    The finite jump measure has exponential moments of every order, so
    the exponent extends to arbitrary imaginary shifts; ``u = 0`` gives 0
    and ``u = -i e_j`` gives ``log E exp(xi_j)``.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (t.n,):
        raise DomainError(f"argument must have length {t.n}")
    drift = t.drift
    out = 1j * (u @ drift) - 0.5 * (u @ t.a @ u)
    if t.nu.is_empty:
        return complex(out)
    iu = 1j * u
    out += t.nu.exp_integral(iu) - t.nu.total_mass
    if t.convention == "mean":
        out -= iu @ t.nu.mean_vector(t.n)
    else:
        kind = "truncated" if t.convention == "truncated" else "truncated_euclidean"
        out -= iu @ t.nu.ball_mean(kind, t.norm_index, t.n)
    return complex(out)


def esscher(t: LevyTriplet, theta) -> LevyTriplet:
    """Exponential tilt by exp(<theta, xi>): A invariant, nu reweighted.

    The drift picks up ``A theta`` plus the compensated jump shift, so
    tilting by theta and then by -theta returns the original triplet.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (t.n,):
        raise DomainError(f"theta must have length {t.n}")
    atoms = tuple((x, m * math.exp(float(theta @ x))) for x, m in t.nu.atoms)
    g = t.nu.gaussian
    gaussian = None
    if g is not None:
        factor = float(g.exp_integral(theta).real) / g.mass
        gaussian = GaussianPart(g.mean + g.cov @ theta, g.cov, g.mass * factor)
    nu = JumpMeasure(atoms=atoms, gaussian=gaussian)

    if t.convention == "mean":
        jump_shift = (
            np.zeros(t.n)
            if t.nu.is_empty
            else np.real(nu.mean_vector(t.n) - t.nu.mean_vector(t.n))
        )
        return LevyTriplet(t.a, nu, mu=t.drift + t.a @ theta + jump_shift,
                           norm_index=t.norm_index)
    kind = "truncated" if t.convention == "truncated" else "truncated_euclidean"
    shift = np.zeros(t.n)
    for x, m in t.nu.atoms:
        if _in_ball(x, kind, t.norm_index):
            shift += m * (math.exp(float(theta @ x)) - 1.0) * x
    return LevyTriplet(
        t.a, nu, gamma=t.drift + t.a @ theta + shift,
        convention=t.convention, norm_index=t.norm_index,
    )


# --------------------------------------------------------------------------- #
# Martingale normalisation
# --------------------------------------------------------------------------- #


def _exp_compensator(t: LevyTriplet, j: int) -> float:
    """integral of (e^(x_j) - 1 - x_j [1_ball]) d nu under t's convention."""
    n = t.n
    e_j = np.zeros(n)
    e_j[j - 1] = 1.0
    if t.nu.is_empty:
        return 0.0
    val = float(np.real(t.nu.exp_integral(e_j))) - t.nu.total_mass
    if t.convention == "mean":
        val -= float(t.nu.mean_vector(n)[j - 1])
    else:
        kind = "truncated" if t.convention == "truncated" else "truncated_euclidean"
        val -= float(t.nu.ball_mean(kind, t.norm_index, n)[j - 1])
    return val


def martingale_drift(t: LevyTriplet, j: int) -> float:
    """Drift coordinate j making E exp(xi_j) = 1.

    Any drift already stored on the triplet is ignored; the value depends
    only on (A, nu) and the drift convention.
    """
    if not 1 <= j <= t.n:
        raise DomainError(f"component {j} out of range 1..{t.n}")
    return -_exp_compensator(t, j) - 0.5 * float(t.a[j - 1, j - 1])


def martingale_normalized(
    a,
    nu: JumpMeasure | None = None,
    convention: str = "mean",
    norm_index: int = 1,
) -> LevyTriplet:
    """Triplet with every component of exp(xi) normalised to mean one."""
    nu = nu if nu is not None else JumpMeasure()
    shell = LevyTriplet(
        a,
        nu,
        mu=None if convention != "mean" else np.zeros(np.asarray(a).shape[0]),
        gamma=None if convention == "mean" else np.zeros(np.asarray(a).shape[0]),
        convention=convention,
        norm_index=norm_index,
    )
    drift = np.array([martingale_drift(shell, j) for j in range(1, shell.n + 1)])
    if convention == "mean":
        return LevyTriplet(a, nu, mu=drift, norm_index=norm_index)
    return LevyTriplet(a, nu, gamma=drift, convention=convention, norm_index=norm_index)


# --------------------------------------------------------------------------- #
# Symmetry conditions on the triplet
# --------------------------------------------------------------------------- #


def check_qsd_triplet(
    t: LevyTriplet, i: int, lambda_cc, alpha: float, tol: float = 1e-10
) -> SymmetryReport:
    """Triplet conditions for exp(xi) quasi-self-dual of order alpha.

    (1) the Gaussian covariance has the half-diagonal pattern in row and
    column ``i``; (2) the jump measure satisfies
    ``d nu(x) = exp(-alpha x_i) d nu(K_i x)`` -- atoms are paired exactly
    with their reflections, a Gaussian part is matched against its
    closed-form reflected parameters; (3) the drift coordinate ``i``
    equals the compensator value shifted by the carrying cost.
    """
    if not 1 <= i <= t.n:
        raise DomainError(f"numeraire index {i} out of range 1..{t.n}")
    lam = np.atleast_1d(np.asarray(lambda_cc, dtype=float))
    lam_i = float(lam[0]) if lam.shape == (1,) else float(lam[i - 1])
    maps = KappaMaps(t.n, i)
    report = SymmetryReport(f"qsd_triplet[i={i},alpha={alpha:g}]")

    # (1) covariance pattern
    aii = float(t.a[i - 1, i - 1])
    for j in range(t.n):
        if j == i - 1:
            continue
        report.points.append(
            ReportPoint(
                f"(1) a[{j + 1},{i}] - a[{i},{i}]/2",
                float(t.a[j, i - 1] - 0.5 * aii),
                tol=tol * (1.0 + abs(aii)),
            )
        )

    # (2) jump measure reflection
    for idx, (x, m) in enumerate(t.nu.atoms):
        target = maps.K(x)
        want = m * math.exp(alpha * float(x[i - 1]))
        got = 0.0
        for y, my in t.nu.atoms:
            if float(np.max(np.abs(y - target))) <= 1e-12 * (1.0 + float(np.max(np.abs(target)))):
                got = my
                break
        report.points.append(
            ReportPoint(f"(2) atom[{idx}] reflection mass", got - want, tol=tol * (1.0 + want))
        )
    g = t.nu.gaussian
    if g is not None:
        b = g.cov
        bii = float(b[i - 1, i - 1])
        for j in range(t.n):
            if j == i - 1:
                continue
            report.points.append(
                ReportPoint(
                    f"(2) gaussian b[{j + 1},{i}] - b[{i},{i}]/2",
                    float(b[j, i - 1] - 0.5 * bii),
                    tol=tol * (1.0 + abs(bii)),
                )
            )
        # reflection law <=> mean = -(alpha/2) B e_i given the pattern
        want_mean = -(alpha / 2.0) * b[:, i - 1]
        report.points.append(
            ReportPoint(
                "(2) gaussian mean + (alpha/2) B e_i",
                float(np.max(np.abs(g.mean - want_mean))),
                tol=tol * (1.0 + abs(bii)),
            )
        )

    # (3) drift coordinate i
    n = t.n
    e_i = np.zeros(n)
    e_i[i - 1] = 1.0
    if t.nu.is_empty:
        integral = 0.0
    elif t.convention == "mean":
        integral = float(
            np.real(
                t.nu.mean_vector(n)[i - 1] - t.nu.weighted_mean(0.5 * alpha * e_i, n)[i - 1]
            )
        )
    else:
        kind = "truncated" if t.convention == "truncated" else "truncated_euclidean"
        integral = 0.0
        for x, m in t.nu.atoms:
            if _in_ball(x, kind, t.norm_index):
                xi = float(x[i - 1])
                integral += m * xi * (1.0 - math.exp(0.5 * alpha * xi))
    want = integral - 0.5 * alpha * aii - lam_i
    report.points.append(
        ReportPoint(
            "(3) drift[i] - compensator",
            float(t.drift[i - 1] - want),
            tol=tol * (1.0 + abs(aii)),
        )
    )
    return report


def check_sd_triplet(t: LevyTriplet, i: int, tol: float = 1e-10) -> SymmetryReport:
    """Self-duality conditions: the quasi case at alpha = 1, lambda = 0."""
    report = check_qsd_triplet(t, i, 0.0, 1.0, tol=tol)
    report.test_name = f"sd_triplet[i={i}]"
    return report


# --------------------------------------------------------------------------- #
# The order solver
# --------------------------------------------------------------------------- #


def lambert_w0(x: float) -> float:
    """Principal branch of w e^w = x for x >= -1/e.

    Halley iteration from a branch-point series or log-log start;
    residual below ``1e-14 (1 + |x|)``.
    """
    if x < -1.0 / math.e:
        raise DomainError(f"lambert_w0 requires x >= -1/e, got {x!r}")
    if x == 0.0:
        return 0.0
    if x < -1.0 / math.e + 0.25:
        # series around the branch point -1/e
        p = math.sqrt(2.0 * (math.e * x + 1.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 * p**3 / 72.0
    elif x < math.e:
        w = x / (1.0 + x)  # crude but inside the basin
    else:
        lg = math.log(x)
        w = lg - math.log(lg)
    for _ in range(60):
        ew = math.exp(w)
        f = w * ew - x
        if f == 0.0 or w == -1.0:  # exact root or the branch point itself
            break
        denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0)
        dw = f / denom
        w -= dw
        if abs(dw) <= 1e-16 * (2.0 + abs(w)):
            break
    # near the branch point the residual scale degrades like sqrt(e x + 1)
    slack = 1e-14 * (1.0 + abs(x)) + 1e-9 * max(0.0, 1e-6 - (math.e * x + 1.0))
    if abs(w * math.exp(w) - x) > slack:
        raise DomainError(f"lambert_w0 failed to converge at {x!r}")
    return w


@dataclass(frozen=True)
class AlphaSolution:
    alpha: float
    method: str  # closed_lognormal | closed_lambertw | closed_laplace | bracketed_root
    bracket: tuple[float, float] | None
    residual: float
    roots: tuple[float, ...] = ()  # every root the bracketed scan found


def _exp_safe(v: float) -> float:
    try:
        return math.exp(v)
    except OverflowError:
        return math.inf


def _marginal_jump_terms(t: LevyTriplet, i: int):
    """Callables for the i-th marginal integrals in the order equation."""
    atoms = [(float(x[i - 1]), m) for x, m in t.nu.atoms]
    g = t.nu.gaussian
    if g is not None:
        gm, gv, gmass = float(g.mean[i - 1]), float(g.cov[i - 1, i - 1]), g.mass
    exp_int = sum(m * math.exp(x) for x, m in atoms) + (
        gmass * math.exp(gm + 0.5 * gv) if g is not None else 0.0
    )
    mass = t.nu.total_mass

    def weighted(alpha: float) -> float:
        # overflow at extreme scan points degrades to +-inf, never raises
        s = 0.5 * alpha
        val = sum(m * x * _exp_safe(s * x) for x, m in atoms)
        if g is not None:
            val += gmass * (gm + s * gv) * _exp_safe(s * gm + 0.5 * s * s * gv)
        return val

    return exp_int, mass, weighted


def solve_alpha(t: LevyTriplet, i: int, lambda_i: float) -> AlphaSolution:
    """Order alpha of quasi-self-duality for carrying cost ``lambda_i``.

    Solves ``a_ii alpha = a_ii - 2 lambda_i
    + 2 integral (e^x - 1 - x e^(alpha x / 2)) d nu_i(x)`` over the
    marginal jump measure, assuming the triplet is martingale-normalised
    in coordinate ``i``.  Closed forms are dispatched when recognised
    (no jumps; a unit-mass Gaussian jump part with or without a diffusion
    component) and validated against the same equation; the bracketed
    scan on [-50, 50] reports every root it finds.
    """
    if not 1 <= i <= t.n:
        raise DomainError(f"numeraire index {i} out of range 1..{t.n}")
    aii = float(t.a[i - 1, i - 1])
    exp_int, mass, weighted = _marginal_jump_terms(t, i)

    def g_fun(alpha: float) -> float:
        return aii * alpha - aii + 2.0 * lambda_i - 2.0 * (exp_int - mass - weighted(alpha))

    scale = 1.0 + abs(aii)
    roots, bracket = _scan_roots(g_fun)

    closed = None
    method = "bracketed_root"
    gauss = t.nu.gaussian
    pure_gaussian_nu = gauss is not None and not t.nu.atoms
    if t.nu.is_empty:
        if aii <= 0:
            raise DomainError("no jumps and a_ii = 0: the order equation is degenerate")
        closed, method = 1.0 - 2.0 * lambda_i / aii, "closed_lognormal"
    elif pure_gaussian_nu and abs(gauss.mass - 1.0) <= 1e-12:
        beta2 = float(gauss.cov[i - 1, i - 1])
        if aii <= 1e-300:
            if 1.0 + lambda_i <= 0:
                raise DomainError("carrying cost below -1: no real order exists")
            cand, cand_method = 1.0 - 2.0 / beta2 * math.log1p(lambda_i), "closed_laplace"
        else:
            z = beta2 / aii * math.exp(beta2 * (lambda_i + 1.0) / aii)
            cand = 2.0 * lambert_w0(z) / beta2 + 1.0 - 2.0 * (lambda_i + 1.0) / aii
            cand_method = "closed_lambertw"
        # closed forms presume the self-consistent tilt; validate on the equation
        if abs(g_fun(cand)) <= 1e-10 * scale:
            closed, method = cand, cand_method

    if closed is not None:
        return AlphaSolution(closed, method, bracket, abs(g_fun(closed)), tuple(roots))
    if not roots:
        raise NoBracket("no sign change of the order equation found in [-50, 50]")
    if len(roots) > 1:
        raise AmbiguousRoot(
            f"order equation has {len(roots)} roots: {roots}", roots=roots
        )
    return AlphaSolution(roots[0], "bracketed_root", bracket, abs(g_fun(roots[0])), tuple(roots))


def _scan_roots(g_fun, lo: float = -50.0, hi: float = 50.0):
    """Sign-change scan on a symmetric geometric grid, then brentq."""
    pos = np.geomspace(1e-3, hi, 120)
    grid = np.concatenate([-pos[::-1], [0.0], pos])
    grid = grid[(grid >= lo) & (grid <= hi)]
    vals = np.array([g_fun(float(a)) for a in grid])
    roots: list[float] = []
    bracket = None
    for k in range(len(grid) - 1):
        va, vb = vals[k], vals[k + 1]
        if not (math.isfinite(va) and math.isfinite(vb)):
            continue  # overflow region; no reliable bracketing there
        if va == 0.0:
            roots.append(float(grid[k]))
            continue
        if va * vb < 0.0:
            r = float(
                optimize.brentq(
                    g_fun, float(grid[k]), float(grid[k + 1]), xtol=1e-15, rtol=8.9e-16
                )
            )
            roots.append(r)
            if bracket is None:
                bracket = (float(grid[k]), float(grid[k + 1]))
    if math.isfinite(vals[-1]) and vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    dedup: list[float] = []
    for r in roots:
        if not any(abs(r - q) <= 1e-9 * (1.0 + abs(q)) for q in dedup):
            dedup.append(r)
    return dedup, bracket


# --------------------------------------------------------------------------- #
# Simulation
# --------------------------------------------------------------------------- #


def sample_increments(
    t: LevyTriplet, dt: float, rng: RngStream, size: int, return_counts: bool = False
):
    """``size`` i.i.d. increments of the Levy process over time ``dt``.

    Exact in distribution: Gaussian part plus a compound Poisson draw
    from the normalised finite jump measure, with the linear coefficient
    chosen so the characteristic exponent is ``dt`` times the triplet's.
    With ``return_counts`` the per-increment Poisson jump counts are
    returned alongside.
    """
    if dt <= 0:
        raise DomainError("dt must be positive")
    if not math.isfinite(t.nu.total_mass):
        raise InfiniteActivity("jump measure must be finite")
    n, size = t.n, int(size)
    out = np.zeros((size, n))
    counts = np.zeros(size, dtype=np.int64)

    # linear coefficient absorbing the compensation used by the convention
    b = np.array(t.drift, dtype=float)
    if not t.nu.is_empty:
        if t.convention == "mean":
            b = b - t.nu.mean_vector(n)
        else:
            kind = "truncated" if t.convention == "truncated" else "truncated_euclidean"
            b = b - t.nu.ball_mean(kind, t.norm_index, n)
    out += b * dt

    if np.any(t.a):
        w, v = np.linalg.eigh(t.a * dt)
        root = v @ np.diag(np.sqrt(np.clip(w, 0.0, None)))
        out += rng.standard_normal((size, n)) @ root.T

    mass = t.nu.total_mass
    if mass > 0:
        counts = rng.poisson(mass * dt, size=size)
        total = int(counts.sum())
        if total > 0:
            weights = [m for _, m in t.nu.atoms]
            g = t.nu.gaussian
            if g is not None:
                weights = weights + [g.mass]
            weights = np.array(weights) / mass
            kinds = rng.choice(len(weights), size=total, p=weights)
            jumps = np.empty((total, n))
            for idx, (x, _) in enumerate(t.nu.atoms):
                jumps[kinds == idx] = x
            if g is not None:
                sel = kinds == len(weights) - 1
                m_g = int(sel.sum())
                if m_g:
                    jumps[sel] = rng.multivariate_normal(g.mean, g.cov, size=m_g)
            owner = np.repeat(np.arange(size), counts)
            np.add.at(out, owner, jumps)
    if return_counts:
        return out, counts
    return out


def sample_increment(t: LevyTriplet, dt: float, rng: RngStream) -> np.ndarray:
    return sample_increments(t, dt, rng, 1)[0]
