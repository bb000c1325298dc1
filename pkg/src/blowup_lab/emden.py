"""
Singular Emden-type ODEs

    y'' + (m / z) y' + f(y) = mu,   y(0) = y0,  y'(0) = 0,

and the collapse scale-factor ODE a'' = -lambda / a^(N-1).

The profile equation is singular at z = 0. Integration starts at a small
z_start from the two-term origin series and proceeds with the adaptive
Dormand-Prince pair in `dopri`. Between accepted nodes the solution is
represented by a quintic Hermite interpolant built from (y, y', y'').
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import dopri
from .dense import hermite5
from .errors import ConfigError, IntegrationError

DEFAULT_TOL = 1e-10
DEFAULT_MAX_STEP = 0.01
DEFAULT_Z_START = 1e-6
DEFAULT_ZERO_TOL = 1e-12
DEFAULT_FLOOR_FRACTION = 1e-6


class NonlinearityKind(enum.Enum):
    POWER = "power"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class Nonlinearity:
    """f(y) = coeff * y**exponent or f(y) = coeff * exp(y).

    Non-integer powers use the odd extension sign(y) |y|**exponent so the
    right-hand side stays real if a trial step overshoots below zero.
    """

    kind: NonlinearityKind
    coeff: float
    exponent: float = 1.0

    @classmethod
    def power(cls, coeff: float, exponent: float) -> "Nonlinearity":
        return cls(NonlinearityKind.POWER, float(coeff), float(exponent))

    @classmethod
    def exponential(cls, coeff: float) -> "Nonlinearity":
        return cls(NonlinearityKind.EXPONENTIAL, float(coeff))

    def __call__(self, y):
        if self.kind is NonlinearityKind.EXPONENTIAL:
            return self.coeff * np.exp(y)
        p = self.exponent
        if p == int(p):
            return self.coeff * y ** int(p)
        return self.coeff * np.sign(y) * np.abs(y) ** p


@dataclass(frozen=True)
class EmdenProblem:
    """y'' + (m/z) y' + f(y) = mu with y(0) = y0, y'(0) = 0 on [0, z_max].

    `y_cap`, when set, ends the integration once |y| reaches it; this is
    how growing (repulsive-type) profiles are kept away from their
    finite-z singularity.
    """

    m: float
    nonlinearity: Nonlinearity
    mu: float = 0.0
    y0: float = 1.0
    z_max: float = 10.0
    stop_at_first_zero: bool = True
    y_cap: float | None = None

    def __post_init__(self):
        if not (self.m >= 0 and math.isfinite(self.m)):
            raise ConfigError(f"m must be >= 0, got {self.m}")
        if not (self.z_max > 0 and math.isfinite(self.z_max)):
            raise ConfigError(f"z_max must be > 0, got {self.z_max}")
        if not (math.isfinite(self.y0) and math.isfinite(self.mu)):
            raise ConfigError("y0 and mu must be finite")
        if self.y_cap is not None and not self.y_cap > abs(self.y0):
            raise ConfigError("y_cap must exceed |y0|")

    def origin_curvature(self) -> float:
        """y''(0), from balancing the equation as z -> 0."""
        return (self.mu - float(self.nonlinearity(self.y0))) / (self.m + 1.0)

    def rhs(self, z, state):
        y, dy = state
        return np.array([dy, self.mu - self.nonlinearity(y) - self.m * dy / z])


def _readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RadialProfile:
    """Sampled profile (z, y, y', y'') with grid[0] = 0.

    Calling the profile evaluates the dense interpolant: ``y, dy = p(z)``.
    """

    grid: np.ndarray
    y_values: np.ndarray
    dy_values: np.ndarray
    ddy_values: np.ndarray
    first_zero: float | None = None
    stop_reason: str = "horizon"

    def __post_init__(self):
        for name in ("grid", "y_values", "dy_values", "ddy_values"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        n = len(self.grid)
        if n < 2 or any(len(getattr(self, k)) != n
                        for k in ("y_values", "dy_values", "ddy_values")):
            raise ConfigError("profile arrays must have equal length >= 2")
        if self.grid[0] != 0.0 or np.any(np.diff(self.grid) <= 0):
            raise ConfigError("profile grid must start at 0 and increase strictly")

    @property
    def z_end(self) -> float:
        return float(self.grid[-1])

    @property
    def support(self) -> float:
        """First zero if there is one, otherwise the integration horizon."""
        return self.first_zero if self.first_zero is not None else self.z_end

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if np.any(z < 0) or np.any(z > self.z_end * (1 + 1e-12)):
            raise ConfigError(f"z outside profile range [0, {self.z_end:.17g}]")
        y, dy = hermite5(np.minimum(z, self.z_end), self.grid, self.y_values,
                         self.dy_values, self.ddy_values)
        if y.ndim == 0:
            return float(y), float(dy)
        return y, dy

    def scaled(self, factor: float) -> "RadialProfile":
        """Profile multiplied by a constant (used for negative controls)."""
        return RadialProfile(self.grid, factor * self.y_values, factor * self.dy_values,
                             factor * self.ddy_values, self.first_zero, self.stop_reason)


def taylor_start(problem: EmdenProblem, z_start: float) -> tuple[float, float]:
    """Two-term origin series (y, y') at z_start."""
    if not z_start > 0:
        raise ConfigError(f"z_start must be > 0, got {z_start}")
    c = problem.origin_curvature()
    return problem.y0 + 0.5 * c * z_start**2, c * z_start


def _bisect(fun, lo: float, hi: float, tol: float) -> float:
    f_lo = fun(lo)
    if f_lo == 0:
        return lo
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return mid
        f_mid = fun(mid)
        if abs(f_mid) <= tol:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid


def first_zero(profile: RadialProfile, zero_tol: float = DEFAULT_ZERO_TOL) -> float | None:
    """Smallest z with y(z) = 0, refined on the dense interpolant."""
    y = profile.y_values
    if y[0] == 0:
        return 0.0
    crossings = np.nonzero(np.sign(y[1:]) != np.sign(y[0]))[0]
    if len(crossings) == 0:
        return None
    i = int(crossings[0])
    lo, hi = float(profile.grid[i]), float(profile.grid[i + 1])
    return _bisect(lambda z: profile(z)[0], lo, hi, zero_tol)


def integrate_profile(problem: EmdenProblem, tol: float = DEFAULT_TOL,
                      max_step: float = DEFAULT_MAX_STEP, *,
                      z_start: float = DEFAULT_Z_START,
                      zero_tol: float = DEFAULT_ZERO_TOL,
                      fixed_step: float | None = None) -> RadialProfile:
    """Integrate an Emden-type problem from its regular origin.

    Raises IntegrationError (with `last_x`) on step-size underflow or
    non-finite values.
    """
    if not tol > 0:
        raise ConfigError(f"tol must be > 0, got {tol}")
    if not max_step > 0:
        raise ConfigError(f"max_step must be > 0, got {max_step}")
    if z_start >= problem.z_max:
        raise ConfigError("z_start must be below z_max")
    y_s, dy_s = taylor_start(problem, z_start)

    checks = []
    if problem.stop_at_first_zero and problem.y0 != 0:
        s0 = math.copysign(1.0, problem.y0)
        checks.append(lambda z, st: s0 * st[0])
    if problem.y_cap is not None:
        cap = problem.y_cap
        checks.append(lambda z, st: cap - abs(st[0]))
    event = (lambda z, st: min(c(z, st) for c in checks)) if checks else None

    traj = dopri.integrate(problem.rhs, z_start, [y_s, dy_s], problem.z_max, tol=tol,
                           max_step=max_step, fixed_step=fixed_step, event=event)
    grid = np.concatenate([[0.0], traj.x])
    y = np.concatenate([[problem.y0], traj.y[:, 0]])
    dy = np.concatenate([[0.0], traj.y[:, 1]])
    ddy = np.concatenate([[problem.origin_curvature()], traj.f[:, 1]])

    reason = "horizon"
    if traj.event:
        reason = "first_zero" if problem.stop_at_first_zero and y[-1] * problem.y0 <= 0 \
            else "cap"
    profile = RadialProfile(grid, y, dy, ddy, None, reason)
    zero = first_zero(profile, zero_tol)
    return RadialProfile(grid, y, dy, ddy, zero, reason)


def scale_factor_potential(lambda_: float, dim: int, a):
    """V(a) with V'(a) = lambda / a^(N-1), so E = a'^2/2 + V(a) is conserved."""
    if dim == 2:
        return lambda_ * np.log(a)
    return -lambda_ / ((dim - 2) * a ** (dim - 2))


@dataclass(frozen=True)
class ScaleFactorState:
    """Trajectory of a'' = -lambda / a^(N-1).

    `collapse_bracket` is (t_lo, t_hi) around the time a reaches 0 when the
    integration stopped at the collapse floor, else None.
    """

    lambda_: float
    dim: int
    a0: float
    a1: float
    t_grid: np.ndarray
    a_values: np.ndarray
    da_values: np.ndarray
    dda_values: np.ndarray
    collapse_bracket: tuple[float, float] | None = None
    energy_drift: float = field(default=0.0)

    def energy(self, a, da):
        return 0.5 * np.asarray(da) ** 2 + scale_factor_potential(self.lambda_, self.dim, a)

    def energy_drift_until(self, t_end: float) -> float:
        """max |E(t) - E(0)| / |E(0)| over nodes with t <= t_end."""
        keep = self.t_grid <= t_end
        e = self.energy(self.a_values[keep], self.da_values[keep])
        e0 = e[0]
        return float(np.max(np.abs(e - e0)) / (abs(e0) if e0 != 0 else 1.0))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t_grid[0]) or np.any(t > self.t_grid[-1]):
            raise ConfigError(f"t outside trajectory range [0, {self.t_grid[-1]:.17g}]")
        a, da = hermite5(t, self.t_grid, self.a_values, self.da_values, self.dda_values)
        if a.ndim == 0:
            return float(a), float(da)
        return a, da


def integrate_scale_factor(lambda_: float, dim: int, a0: float, a1: float, t_max: float,
                           tol: float = DEFAULT_TOL, *, a_floor: float | None = None,
                           max_step: float = math.inf) -> ScaleFactorState:
    """Integrate the scale-factor ODE up to t_max or collapse to a_floor.

    Reaching the floor is a terminal event, not an error: the crossing time
    is refined by bisection and the collapse time is bracketed using the
    conserved energy (for lambda >= 0 the inward speed only grows below the
    floor, so floor / |a'(floor)| bounds the remaining time).
    """
    if not isinstance(dim, (int, np.integer)) or dim < 2:
        raise ConfigError(f"scale-factor ODE needs dim >= 2, got {dim!r}")
    if not a0 > 0:
        raise ConfigError(f"a0 must be > 0, got {a0}")
    if not t_max > 0:
        raise ConfigError(f"t_max must be > 0, got {t_max}")
    if not tol > 0:
        raise ConfigError(f"tol must be > 0, got {tol}")
    floor = DEFAULT_FLOOR_FRACTION * a0 if a_floor is None else a_floor
    if not 0 < floor < a0:
        raise ConfigError("a_floor must lie in (0, a0)")
    p = dim - 1

    def rhs(t, state):
        return np.array([state[1], -lambda_ / state[0] ** p])

    traj = dopri.integrate(rhs, 0.0, [a0, a1], t_max, tol=tol, max_step=max_step,
                           event=lambda t, st: st[0] - floor)
    t = traj.x
    a, da, dda = traj.y[:, 0], traj.y[:, 1], traj.f[:, 1]
    bracket = None
    if traj.event:
        # partial Runge-Kutta step from the last node above the floor
        t_prev, state_prev, f_prev = float(t[-2]), traj.y[-2], traj.f[-2]

        def partial(dt):
            return dopri.step(rhs, t_prev, state_prev, f_prev, dt)[0]

        dt = _bisect(lambda d: partial(d)[0] - floor, 0.0, float(t[-1]) - t_prev,
                     1e-15 * floor)
        a_f, da_f = (float(v) for v in partial(dt))
        t_floor = t_prev + dt
        t = np.append(t[:-1], t_floor)
        a = np.append(a[:-1], a_f)
        da = np.append(da[:-1], da_f)
        dda = np.append(dda[:-1], -lambda_ / a_f**p)
        if lambda_ >= 0 and da_f < 0:
            bracket = (t_floor, t_floor + a_f / abs(da_f))
        else:
            bracket = (t_floor, math.inf)

    energy = 0.5 * da**2 + scale_factor_potential(lambda_, dim, a)
    e0 = energy[0]
    drift = float(np.max(np.abs(energy - e0)) / (abs(e0) if e0 != 0 else 1.0))
    return ScaleFactorState(lambda_, int(dim), a0, a1, _readonly(t), _readonly(a),
                            _readonly(da), _readonly(dda), bracket, drift)
