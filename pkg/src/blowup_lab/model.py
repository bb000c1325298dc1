"""
Physical constants, Green's functions and the radially reduced Poisson
equation for self-gravitating fluids in R^N.

Gravity enters every solution family only through the radial potential
gradient

    Phi_r(t, r) = alpha(N) / r^(N-1) * int_0^r rho(t, s) s^(N-1) ds,

with alpha(N) = N (N - 2) V(N) for N >= 3, alpha(1) = 2, alpha(2) = 2 pi.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, NumericalError

DEFAULT_QUAD_POINTS = 1024

# exact for the 4-d blowup family
BLOWUP_DIM = 4
BLOWUP_THETA = 5.0 / 4.0


class ForceSign(enum.Enum):
    ATTRACTIVE = "attractive"
    REPULSIVE = "repulsive"

    @property
    def sign(self) -> float:
        """+1 for self-gravity, -1 for the sign-flipped (repulsive) force."""
        return 1.0 if self is ForceSign.ATTRACTIVE else -1.0


@dataclass(frozen=True)
class ModelParams:
    """Constants of one self-similar solution instance.

    Attributes
    ----------
    dim : int
        Spatial dimension N.
    theta : float
        Exponent of the viscosity law mu(rho) = kappa * rho**theta.
    kappa : float
        Viscosity coefficient.
    big_c : float
        Similarity speed C; the collapse scale is T - C t.
    big_t : float
        Similarity time T.
    alpha0 : float
        Central profile value y(0).
    force_sign : ForceSign
    """

    dim: int = BLOWUP_DIM
    theta: float = BLOWUP_THETA
    kappa: float = 1.0
    big_c: float = 1.0
    big_t: float = 1.0
    alpha0: float = 1.0
    force_sign: ForceSign = ForceSign.ATTRACTIVE

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise ConfigError(f"dim must be a positive integer, got {self.dim!r}")
        for name in ("theta", "kappa", "big_c", "big_t", "alpha0"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if self.theta < 0:
            raise ConfigError(f"theta must be >= 0, got {self.theta}")
        if self.kappa <= 0:
            raise ConfigError(f"kappa must be > 0, got {self.kappa}")
        if self.big_c == 0:
            raise ConfigError("C must be nonzero")
        if self.big_t <= 0:
            raise ConfigError(f"T must be > 0, got {self.big_t}")
        if self.alpha0 <= 0:
            raise ConfigError(f"alpha (y(0)) must be > 0, got {self.alpha0}")
        if not isinstance(self.force_sign, ForceSign):
            object.__setattr__(self, "force_sign", ForceSign(self.force_sign))

    @property
    def blowup_time(self) -> float | None:
        """T/C when C > 0, otherwise None (no finite-time blowup)."""
        return self.big_t / self.big_c if self.big_c > 0 else None

    def collapse_scale(self, t: float) -> float:
        """T - C t."""
        return self.big_t - self.big_c * t


@dataclass(frozen=True)
class PressureLaw:
    """gamma-law pressure P = K rho**gamma; K = 0 is the pressureless case."""

    big_k: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.big_k < 0:
            raise ConfigError(f"K must be >= 0, got {self.big_k}")
        if self.gamma < 1:
            raise ConfigError(f"gamma must be >= 1, got {self.gamma}")

    @property
    def pressureless(self) -> bool:
        return self.big_k == 0

    def pressure(self, rho):
        return self.big_k * np.power(rho, self.gamma)


def _check_dim(dim) -> int:
    if not isinstance(dim, (int, np.integer)) or isinstance(dim, bool) or dim < 1:
        raise ConfigError(f"dimension must be a positive integer, got {dim!r}")
    return int(dim)


def gamma_half_integer(x: float) -> float:
    """Gamma function at a positive integer or half-integer argument.

    Uses Gamma(x + 1) = x Gamma(x) down to Gamma(1) = 1 or
    Gamma(1/2) = sqrt(pi), so the result carries only the rounding of the
    repeated products.
    """
    twice = 2.0 * x
    if x <= 0 or twice != round(twice):
        raise ConfigError(f"argument must be a positive half-integer, got {x}")
    n = int(round(twice))
    if n % 2 == 0:
        value, start = 1.0, 1.0
    else:
        value, start = math.sqrt(math.pi), 0.5
    k = start
    while k < x:
        value *= k
        k += 1.0
    return value


def unit_ball_volume(dim: int) -> float:
    """Volume pi^(N/2) / Gamma(N/2 + 1) of the unit ball in R^N."""
    dim = _check_dim(dim)
    return math.pi ** (dim / 2) / gamma_half_integer(dim / 2 + 1)


def alpha_constant(dim: int) -> float:
    """Coupling constant of the Poisson equation Delta Phi = alpha(N) rho."""
    dim = _check_dim(dim)
    if dim == 1:
        return 2.0
    if dim == 2:
        return 2.0 * math.pi
    return dim * (dim - 2) * unit_ball_volume(dim)


def green_function(dim: int, radius: float) -> float:
    """Radial Green's function G(|x|) of the N-dimensional Poisson equation."""
    dim = _check_dim(dim)
    if not radius > 0:
        raise ConfigError(f"Green's function is singular at radius {radius}")
    if dim == 1:
        return float(radius)
    if dim == 2:
        return math.log(radius)
    return -1.0 / radius ** (dim - 2)


def simpson_weights(panels: int) -> np.ndarray:
    """Composite Simpson weights (without the h/3 factor) for `panels` panels."""
    if panels < 2 or panels % 2:
        raise ConfigError(f"Simpson needs an even panel count >= 2, got {panels}")
    w = np.ones(panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w


def composite_simpson(func: Callable, a: float, b: float, panels: int) -> float:
    """Integrate a vectorized `func` over [a, b] with composite Simpson."""
    x = np.linspace(a, b, panels + 1)
    fx = np.asarray(func(x), dtype=float)
    if not np.all(np.isfinite(fx)):
        bad = x[~np.isfinite(fx)][0]
        raise NumericalError(f"non-finite integrand sample at s={bad:.17g}")
    h = (b - a) / panels
    return float(h / 3.0 * np.dot(simpson_weights(panels), fx))


DensityProfileFn = Callable[[float, np.ndarray], np.ndarray]


def potential_gradient(profile: DensityProfileFn, dim: int, t: float, r: float,
                       quad_points: int = DEFAULT_QUAD_POINTS) -> float:
    """Radial gravitational field Phi_r at (t, r) from the enclosed mass.

    Parameters
    ----------
    profile : callable
        ``profile(t, s)`` returning rho(t, s) for an array of radii s.
    dim : int
        Spatial dimension N.
    t, r : float
        Time and radius (r > 0).
    quad_points : int
        Number of Simpson panels on [0, r] (even).
    """
    dim = _check_dim(dim)
    if not r > 0:
        raise ConfigError(f"potential gradient needs r > 0, got {r}")
    p = dim - 1
    enclosed = composite_simpson(lambda s: profile(t, s) * s**p, 0.0, r, quad_points)
    return alpha_constant(dim) * enclosed / r**p
