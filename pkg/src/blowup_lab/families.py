"""
Closed-form solution families.

The central object is the 4-d pressureless blowup family with viscosity
kappa * rho^(5/4):

    rho(t, r) = y(z)^4 / (T - C t)^4,   u(t, r) = -C r / (T - C t),
    z = r / (T - C t),

where y solves y'' + (3/z) y' + s * alpha(4) / (5 C kappa) * y^4 = 0 with
y(0) = alpha, y'(0) = 0 and s = +1 (gravity) or -1 (repulsive force).
C > 0 blows up at t = T/C, C < 0 exists for all t >= 0.

Also here: the Lane-Emden closed forms (n = 0, 1, 5), the gamma = 6/5
stationary star, and the pressured collapsing families for N >= 3 and
N = 2 at profile + scale-factor level.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .emden import (DEFAULT_MAX_STEP, DEFAULT_TOL, EmdenProblem, Nonlinearity, RadialProfile,
                    ScaleFactorState, integrate_profile, integrate_scale_factor)
from .errors import BlowupGuardError, ConfigError
from .model import BLOWUP_DIM, BLOWUP_THETA, ForceSign, ModelParams, alpha_constant

TIME_GUARD = 1e-8
# horizon of decaying profiles, in units of the natural length 1/sqrt(|k| alpha^3)
PROFILE_HORIZON = 10.0
# growing profiles stop once y reaches this multiple of alpha
GROWTH_CAP = 4.0


class Family(enum.Enum):
    BLOWUP4D = "blowup4d"
    GLOBAL4D = "global4d"
    REPULSIVE4D = "repulsive4d"


def classify(params: ModelParams) -> Family:
    if params.force_sign is ForceSign.REPULSIVE:
        return Family.REPULSIVE4D
    return Family.BLOWUP4D if params.big_c > 0 else Family.GLOBAL4D


def profile_coefficient(params: ModelParams) -> float:
    """Signed coefficient s * alpha(4) / (5 C kappa) of y^4 in the profile ODE."""
    return params.force_sign.sign * alpha_constant(BLOWUP_DIM) / (5.0 * params.big_c * params.kappa)


def natural_length(params: ModelParams) -> float:
    """z-scale on which the profile varies: y(z) = alpha w(z / L)."""
    return 1.0 / math.sqrt(abs(profile_coefficient(params)) * params.alpha0**3)


def blowup_problem(params: ModelParams, z_max: float | None = None) -> EmdenProblem:
    k = profile_coefficient(params)
    length = natural_length(params)
    z_max = PROFILE_HORIZON * length if z_max is None else z_max
    # k < 0 makes y increase towards a finite-z singularity
    cap = GROWTH_CAP * params.alpha0 if k < 0 else None
    return EmdenProblem(m=BLOWUP_DIM - 1, nonlinearity=Nonlinearity.power(k, 4), mu=0.0,
                        y0=params.alpha0, z_max=z_max, stop_at_first_zero=True, y_cap=cap)


@dataclass(frozen=True)
class SelfSimilarSolution:
    params: ModelParams
    profile: RadialProfile
    family: Family
    time_guard: float = TIME_GUARD

    @property
    def blowup_time(self) -> float | None:
        return self.params.blowup_time

    @property
    def support(self) -> float:
        return self.profile.support

    def tau(self, t: float) -> float:
        """T - C t, refusing values inside the blowup guard."""
        tau = self.params.collapse_scale(t)
        if not tau >= self.time_guard * self.params.big_t:
            raise BlowupGuardError(
                f"t={t!r} is at or past the guard around blowup time "
                f"T/C={self.blowup_time!r} (T - C t = {tau!r})")
        return tau

    def _profile_at(self, t, r):
        tau = self.tau(t)
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ConfigError("radius must be >= 0")
        z = r / tau
        zero = self.profile.first_zero
        inside = z < zero if zero is not None else np.ones_like(z, dtype=bool)
        if zero is None and np.any(z > self.profile.z_end):
            raise ConfigError(
                f"z = r/(T - C t) beyond profile horizon {self.profile.z_end:.17g}")
        y, dy = self.profile(np.where(inside, z, 0.0))
        return tau, z, np.where(inside, y, 0.0), np.where(inside, dy, 0.0)

    def density(self, t: float, r):
        _, _, y, _ = self._profile_at(t, r)
        tau = self.tau(t)
        rho = y**4 / tau**4
        return float(rho) if np.ndim(rho) == 0 else rho

    def velocity(self, t: float, r):
        tau = self.tau(t)
        u = -self.params.big_c * np.asarray(r, dtype=float) / tau
        return float(u) if np.ndim(u) == 0 else u

    def density_partials(self, t: float, r):
        """Exact (rho_t, rho_r) by the chain rule through z = r / (T - C t)."""
        tau, z, y, dy = self._profile_at(t, r)
        c = self.params.big_c
        y3 = y**3
        rho_t = 4.0 * c * (y3 * y + z * y3 * dy) / tau**5
        rho_r = 4.0 * y3 * dy / tau**5
        if np.ndim(rho_t) == 0:
            return float(rho_t), float(rho_r)
        return rho_t, rho_r

    def velocity_partials(self, t: float, r):
        """(u_t, u_r, u_rr); u is linear in r so u_rr = 0."""
        tau = self.tau(t)
        c = self.params.big_c
        r = np.asarray(r, dtype=float)
        u_t = -c * c * r / tau**2
        u_r = -c / tau * np.ones_like(r)
        if np.ndim(u_t) == 0:
            return float(u_t), float(u_r), 0.0
        return u_t, u_r, np.zeros_like(r)


def build_blowup_solution(params: ModelParams, tol: float = DEFAULT_TOL, *,
                          z_max: float | None = None,
                          max_step: float | None = None) -> SelfSimilarSolution:
    """Integrate the profile ODE and package the 4-d self-similar solution.

    The default horizon is PROFILE_HORIZON natural lengths for decaying
    profiles; growing profiles (repulsive force, or C < 0) stop when
    y = GROWTH_CAP * alpha.
    """
    if params.dim != BLOWUP_DIM or params.theta != BLOWUP_THETA:
        raise ConfigError(
            f"the blowup family needs dim=4 and theta=5/4, got dim={params.dim}, "
            f"theta={params.theta}")
    problem = blowup_problem(params, z_max)
    if max_step is None:
        max_step = DEFAULT_MAX_STEP * min(1.0, natural_length(params))
    profile = integrate_profile(problem, tol, max_step)
    return SelfSimilarSolution(params, profile, classify(params))


def lane_emden_analytic(n: int, z):
    """Closed-form Lane-Emden solutions with y(0) = 1 for n in {0, 1, 5}."""
    z = np.asarray(z, dtype=float)
    if n == 0:
        out = 1.0 - z**2 / 6.0
    elif n == 1:
        out = np.sinc(z / np.pi)
    elif n == 5:
        out = 1.0 / np.sqrt(1.0 + z**2 / 3.0)
    else:
        raise ConfigError(f"no closed form for n={n}; only n in {{0, 1, 5}}")
    return float(out) if out.ndim == 0 else out


def lane_emden_problem(n: float, z_max: float = 10.0, y0: float = 1.0) -> EmdenProblem:
    """y'' + (2/z) y' + y^n = 0; stops at the first zero."""
    return EmdenProblem(m=2, nonlinearity=Nonlinearity.power(1.0, n), mu=0.0, y0=y0,
                        z_max=z_max, stop_at_first_zero=True)


PRINTED_NUMERATOR = 3.0
BALANCED_NUMERATOR = 9.0


@dataclass(frozen=True)
class StationaryStar:
    """gamma = 6/5 stationary density (c K A^2 / 2 pi)^(5/4) (1 + A^2 r^2)^(-5/2).

    The default c = 3 is the classical closed form as usually quoted. With
    P = K rho^(6/5) and Delta Phi = 4 pi rho, hydrostatic balance actually
    requires c = 9 (the n = 5 Lane-Emden scaling); `numerator` selects
    which one to build.
    """

    big_k: float
    big_a: float
    dim: int = 3
    numerator: float = PRINTED_NUMERATOR

    def __post_init__(self):
        if not self.big_k > 0:
            raise ConfigError(f"K must be > 0, got {self.big_k}")
        if self.dim != 3:
            raise ConfigError("the stationary star is three-dimensional")
        if not self.numerator > 0:
            raise ConfigError("numerator must be > 0")

    @property
    def central_density(self) -> float:
        return (self.numerator * self.big_k * self.big_a**2 / (2.0 * math.pi)) ** 1.25

    def density(self, r):
        return self.central_density * (1.0 + self.big_a**2 * np.asarray(r, dtype=float) ** 2) ** -2.5

    def density_derivative(self, r):
        r = np.asarray(r, dtype=float)
        a2 = self.big_a**2
        return -5.0 * a2 * r * self.central_density * (1.0 + a2 * r**2) ** -3.5


def stationary_density(star: StationaryStar, r):
    out = star.density(r)
    return float(out) if np.ndim(out) == 0 else out


def polytropic_family_problem(dim: int, big_k: float, lambda_: float, y0: float,
                              z_max: float = 20.0) -> EmdenProblem:
    """Profile ODE of the N >= 3, gamma = (2N-2)/N collapsing family.

    y'' + (N-1)/z y' + alpha(N)/((2N-2) K) y^(N/(N-2)) = mu,
    mu = N (N-2) lambda / ((2N-2) K).
    """
    if dim < 3:
        raise ConfigError("the polytropic family needs dim >= 3")
    if not big_k > 0:
        raise ConfigError(f"K must be > 0, got {big_k}")
    denom = (2 * dim - 2) * big_k
    return EmdenProblem(m=dim - 1,
                        nonlinearity=Nonlinearity.power(alpha_constant(dim) / denom,
                                                        dim / (dim - 2)),
                        mu=dim * (dim - 2) * lambda_ / denom, y0=y0, z_max=z_max,
                        stop_at_first_zero=True)


def isothermal_family_problem(big_k: float, lambda_: float, y0: float,
                              z_max: float = 20.0, y_cap: float = 50.0) -> EmdenProblem:
    """Profile ODE of the N = 2, gamma = 1 family: y'' + y'/z + (2 pi / K) e^y = 2 lambda / K.

    Integration stops early (stop_reason "cap") if |y| reaches `y_cap`,
    which is how an unbounded profile is reported.
    """
    if not big_k > 0:
        raise ConfigError(f"K must be > 0, got {big_k}")
    return EmdenProblem(m=1, nonlinearity=Nonlinearity.exponential(2.0 * math.pi / big_k),
                        mu=2.0 * lambda_ / big_k, y0=y0, z_max=z_max,
                        stop_at_first_zero=False, y_cap=max(y_cap, abs(y0) + 1.0))


@dataclass(frozen=True)
class CollapsingFamily:
    """Pressured family rho = y(r/a)^(N/(N-2)) / a^N (N >= 3) or e^y(r/a) / a^2 (N = 2)."""

    dim: int
    big_k: float
    lambda_: float
    profile: RadialProfile
    scale: ScaleFactorState

    @property
    def bounded(self) -> bool:
        return self.profile.stop_reason != "cap"

    def density(self, t: float, r):
        a, _ = self.scale(t)
        z = np.asarray(r, dtype=float) / a
        if self.dim == 2:
            y, _ = self.profile(z)
            out = np.exp(y) / a**2
        else:
            zero = self.profile.support
            inside = z < zero
            y, _ = self.profile(np.where(inside, z, 0.0))
            out = np.where(inside, np.abs(y) ** (self.dim / (self.dim - 2)), 0.0) / a**self.dim
        return float(out) if np.ndim(out) == 0 else out

    def velocity(self, t: float, r):
        a, da = self.scale(t)
        out = da / a * np.asarray(r, dtype=float)
        return float(out) if np.ndim(out) == 0 else out


def build_collapsing_family(dim: int, big_k: float, lambda_: float, y0: float, a0: float,
                            a1: float, t_max: float, *, z_max: float = 20.0,
                            tol: float = DEFAULT_TOL) -> CollapsingFamily:
    if dim == 2:
        problem = isothermal_family_problem(big_k, lambda_, y0, z_max)
    else:
        problem = polytropic_family_problem(dim, big_k, lambda_, y0, z_max)
    profile = integrate_profile(problem, tol)
    scale = integrate_scale_factor(lambda_, dim, a0, a1, t_max, tol)
    return CollapsingFamily(dim, big_k, lambda_, profile, scale)
