"""
Numerical certification of the identities behind the 4-d blowup family.

Identity-grade checks (continuity, blowup rate, direct-vs-factorized
momentum) hold exactly, so their residuals measure rounding only.
Quadrature-grade checks (momentum, Q, hydrostatic balance) depend on the
Simpson panel count; their observed order is estimated from successive
differences R(n) - R(2n) across doubled resolutions, which cancels the
resolution-independent floor left by the ODE tolerance.

Relative residuals are always taken against the largest individual term
at each sample, since the sum itself is (ideally) zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .families import SelfSimilarSolution, StationaryStar
from .model import BLOWUP_DIM, ModelParams, alpha_constant, composite_simpson, potential_gradient
from .emden import RadialProfile

CONVERGENCE_POINTS = (256, 512, 1024, 2048)
N_TIMES = 8
N_RADII = 16
N_Q_SAMPLES = 64
R_MIN_FRACTION = 1e-6


@dataclass
class ResidualReport:
    name: str
    grid_spec: str
    values: np.ndarray
    max_abs: float
    max_rel: float
    scale: str = "largest term"
    quad_points: int | None = None
    convergence_order: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "grid_spec": self.grid_spec,
            "samples": int(len(self.values)),
            "max_abs": self.max_abs,
            "max_rel": self.max_rel,
            "scale": self.scale,
            "quad_points": self.quad_points,
            "convergence_order": self.convergence_order,
        }
        out.update(self.extra)
        return out


def _report(name, grid_spec, sums, terms, **kwargs) -> ResidualReport:
    """Build a report from residual sums and the matching per-sample term arrays."""
    sums = np.asarray(sums, dtype=float)
    biggest = np.max(np.abs(np.asarray(terms, dtype=float)), axis=0)
    rel = np.divide(np.abs(sums), biggest, out=np.zeros_like(sums), where=biggest > 0)
    return ResidualReport(name, grid_spec, sums, float(np.max(np.abs(sums))),
                          float(np.max(rel)), **kwargs)


def observed_order(results: Sequence[np.ndarray]) -> float:
    """Worst observed order from residual vectors at successively doubled resolutions."""
    if len(results) < 3:
        raise ConfigError("observed order needs at least three resolutions")
    diffs = [float(np.max(np.abs(results[i] - results[i + 1])))
             for i in range(len(results) - 1)]
    orders = []
    for coarse, fine in zip(diffs, diffs[1:]):
        if fine == 0.0:
            orders.append(math.inf)
        elif coarse == 0.0:
            orders.append(-math.inf)
        else:
            orders.append(math.log2(coarse / fine))
    return min(orders)


def default_times(sol: SelfSimilarSolution, count: int = N_TIMES) -> np.ndarray:
    """Times with T - C t geometric: down to 1e-6 T before blowup, up to 1e3 T otherwise."""
    p = sol.params
    if p.big_c > 0:
        tau = p.big_t * np.geomspace(1.0, 1e-6, count)
    else:
        tau = p.big_t * np.geomspace(1.0, 1e3, count)
    return (p.big_t - tau) / p.big_c


def default_z(sol_or_profile, count: int = N_RADII) -> np.ndarray:
    """Uniform similarity coordinates inside (0, Z)."""
    support = sol_or_profile.support
    return support * np.arange(1, count + 1) / (count + 1)


def sample_points(sol: SelfSimilarSolution, t_samples=None, r_samples=None, z_samples=None):
    """(t, r) pairs: r_samples in physical radius, else tau(t) * z for z in z_samples."""
    times = default_times(sol) if t_samples is None else np.asarray(t_samples, dtype=float)
    zs = default_z(sol) if z_samples is None else np.asarray(z_samples, dtype=float)
    points = []
    for t in times:
        tau = sol.tau(t)
        radii = tau * zs if r_samples is None else np.asarray(r_samples, dtype=float)
        r_min = R_MIN_FRACTION * tau * sol.support
        for r in radii:
            if r < r_min:
                raise ConfigError(f"radius {r!r} below r_min={r_min!r} at t={t!r}")
            points.append((float(t), float(r)))
    grid = "default" if t_samples is None and r_samples is None and z_samples is None else "user"
    return points, f"{grid}: {len(times)} times x {len(points) // max(len(times), 1)} radii"


def continuity_terms(sol: SelfSimilarSolution, t: float, r: float) -> np.ndarray:
    """[rho_t, u rho_r, rho u_r, (N-1)/r rho u]."""
    rho = sol.density(t, r)
    rho_t, rho_r = sol.density_partials(t, r)
    u = sol.velocity(t, r)
    _, u_r, _ = sol.velocity_partials(t, r)
    return np.array([rho_t, u * rho_r, rho * u_r, (BLOWUP_DIM - 1) / r * rho * u])


def continuity_residual(sol: SelfSimilarSolution, t_samples=None, r_samples=None, *,
                        z_samples=None) -> ResidualReport:
    points, grid = sample_points(sol, t_samples, r_samples, z_samples)
    terms = np.array([continuity_terms(sol, t, r) for t, r in points]).T
    return _report("continuity", grid, terms.sum(axis=0), terms)


def q_function(profile: RadialProfile, params: ModelParams, z: float,
               quad_points: int = 2048, coefficient: float | None = None) -> float:
    """Q(z) = 5 C kappa y'(z) + s alpha(4) z^-3 int_0^z y(x)^4 x^3 dx.

    `coefficient` replaces 5 C kappa (negative controls use 4 C kappa).
    """
    if not z > 0:
        raise ConfigError(f"Q needs z > 0, got {z}")
    if z > profile.z_end:
        raise ConfigError(f"z={z!r} beyond profile range {profile.z_end!r}")
    if coefficient is None:
        coefficient = 5.0 * params.big_c * params.kappa
    integral = composite_simpson(lambda x: profile(x)[0] ** 4 * x**3, 0.0, z, quad_points)
    _, dy = profile(z)
    return coefficient * dy + params.force_sign.sign * alpha_constant(BLOWUP_DIM) * integral / z**3


def q_identity_check(profile: RadialProfile, params: ModelParams, z_samples=None,
                     quad_points: int = 2048, coefficient: float | None = None) -> ResidualReport:
    """sup |Q| over (0, Z], relative to max 5 C kappa |y'| over the same samples."""
    if z_samples is None:
        z_samples = profile.support * np.arange(1, N_Q_SAMPLES + 1) / N_Q_SAMPLES
    z_samples = np.asarray(z_samples, dtype=float)
    q = np.array([q_function(profile, params, z, quad_points, coefficient) for z in z_samples])
    _, dy = profile(z_samples)
    scale = float(np.max(np.abs(5.0 * params.big_c * params.kappa * dy)))
    max_abs = float(np.max(np.abs(q)))
    return ResidualReport("q_identity", f"{len(z_samples)} z in (0, {z_samples[-1]:.17g}]",
                          q, max_abs, max_abs / scale, scale="max 5 C kappa |y'|",
                          quad_points=quad_points,
                          extra={"coefficient": coefficient if coefficient is not None
                                 else 5.0 * params.big_c * params.kappa})


def q_ode_check(profile: RadialProfile, params: ModelParams, z_samples=None,
                quad_points: int = 2048, coefficient: float | None = None) -> ResidualReport:
    """Compare a central difference of Q against -3 Q / z.

    The relative scale is the largest term of the analytic Q' expansion:
    5 C kappa |y''|, alpha(4) y^4 and 3 alpha(4) z^-4 int y^4 x^3.
    """
    support = profile.support
    if z_samples is None:
        z_samples = np.linspace(0.01 * support, 0.99 * support, N_RADII)
    alpha4 = alpha_constant(BLOWUP_DIM)
    visc = 5.0 * params.big_c * params.kappa
    sums, terms = [], []
    for z in np.asarray(z_samples, dtype=float):
        h = max(1e-5, 1e-4 * z)
        if z - h <= 0 or z + h > profile.z_end:
            raise ConfigError(f"z={z!r} too close to the ends of the profile for differencing")
        q_plus = q_function(profile, params, z + h, quad_points, coefficient)
        q_minus = q_function(profile, params, z - h, quad_points, coefficient)
        q_mid = q_function(profile, params, z, quad_points, coefficient)
        dq = (q_plus - q_minus) / (2.0 * h)
        rhs = -3.0 * q_mid / z
        y, _ = profile(z)
        integral = composite_simpson(lambda x: profile(x)[0] ** 4 * x**3, 0.0, z, quad_points)
        ddy = float(np.interp(z, profile.grid, profile.ddy_values))
        sums.append(dq - rhs)
        terms.append([visc * ddy, alpha4 * y**4, 3 * alpha4 * integral / z**4, dq, rhs])
    return _report("q_ode", f"{len(sums)} z in [{z_samples[0]:.6g}, {z_samples[-1]:.6g}]",
                   sums, np.array(terms).T, quad_points=quad_points)


def momentum_terms(sol: SelfSimilarSolution, t: float, r: float, quad_points: int) -> np.ndarray:
    """Momentum left-minus-right side, term by term.

    [rho u_t, rho u u_r, s rho Phi_r, -[kappa rho^theta]_r u_r,
     -kappa rho^theta (u_rr + 3/r u_r - 3/r^2 u)]
    """
    p = sol.params
    rho = sol.density(t, r)
    _, rho_r = sol.density_partials(t, r)
    u = sol.velocity(t, r)
    u_t, u_r, u_rr = sol.velocity_partials(t, r)
    phi_r = potential_gradient(sol.density, BLOWUP_DIM, t, r, quad_points)
    n1 = BLOWUP_DIM - 1
    laplacian = u_rr + n1 / r * u_r - n1 / r**2 * u
    visc_grad = p.kappa * p.theta * rho ** (p.theta - 1.0) * rho_r
    return np.array([
        rho * u_t,
        rho * u * u_r,
        p.force_sign.sign * rho * phi_r,
        -visc_grad * u_r,
        -p.kappa * rho**p.theta * laplacian,
    ])


def momentum_residual(sol: SelfSimilarSolution, t_samples=None, r_samples=None,
                      quad_points: int = 1024, *,
                      convergence_points: Sequence[int] | None = CONVERGENCE_POINTS,
                      coefficient: float | None = None, z_samples=None) -> ResidualReport:
    """Direct momentum residual plus the factorized form rho (T - C t)^-3 Q(z).

    `extra` carries the largest relative disagreement between the direct sum
    and the factorization ("factorization_max_rel").
    """
    points, grid = sample_points(sol, t_samples, r_samples, z_samples)

    def run(n):
        terms = np.array([momentum_terms(sol, t, r, n) for t, r in points]).T
        return terms.sum(axis=0), terms

    sums, terms = run(quad_points)
    report = _report("momentum", grid, sums, terms, quad_points=quad_points)

    biggest = np.max(np.abs(terms), axis=0)
    factor_dev = []
    for (t, r), direct, scale in zip(points, sums, biggest):
        tau = sol.tau(t)
        factored = sol.density(t, r) / tau**3 * q_function(sol.profile, sol.params, r / tau,
                                                          quad_points, coefficient)
        factor_dev.append(abs(direct - factored) / scale if scale > 0 else 0.0)
    report.extra["factorization_max_rel"] = float(max(factor_dev))

    if convergence_points:
        results = []
        for n in convergence_points:
            s, t_ = (sums, terms) if n == quad_points else run(n)
            results.append(s / np.max(np.abs(t_), axis=0))
        report.convergence_order = observed_order(results)
        report.extra["convergence_points"] = list(convergence_points)
    return report


def blowup_rate_check(sol: SelfSimilarSolution, t_sequence=None) -> ResidualReport:
    """rho(t, 0) (T - C t)^4 against alpha^4; values are the products themselves."""
    times = default_times(sol) if t_sequence is None else np.asarray(t_sequence, dtype=float)
    target = sol.params.alpha0**4
    values = np.array([sol.density(t, 0.0) * sol.tau(t) ** 4 for t in times])
    dev = np.abs(values - target)
    return ResidualReport("blowup_rate", f"{len(times)} times, min T-Ct="
                          f"{min(sol.tau(t) for t in times):.3g}",
                          values, float(np.max(dev)), float(np.max(dev) / target),
                          scale="alpha^4", extra={"alpha4": target})


def hydrostatic_terms(star: StationaryStar, r: float, quad_points: int) -> np.ndarray:
    """[d/dr (K rho^(6/5)), rho Phi_r]."""
    rho = star.density(r)
    dp = 1.2 * star.big_k * rho**0.2 * star.density_derivative(r)
    phi_r = potential_gradient(lambda _t, s: star.density(s), 3, 0.0, r, quad_points)
    return np.array([float(dp), float(rho * phi_r)])


def hydrostatic_check(star: StationaryStar, r_samples=None, quad_points: int = 2048, *,
                      convergence_points: Sequence[int] | None = CONVERGENCE_POINTS) -> ResidualReport:
    radii = np.linspace(0.1, 5.0, 50) if r_samples is None else np.asarray(r_samples, dtype=float)
    if np.any(radii <= 0):
        raise ConfigError("hydrostatic samples need r > 0")

    def run(n):
        terms = np.array([hydrostatic_terms(star, r, n) for r in radii]).T
        return terms.sum(axis=0), terms

    sums, terms = run(quad_points)
    report = _report("hydrostatic", f"{len(radii)} r in [{radii[0]:.6g}, {radii[-1]:.6g}]",
                     sums, terms, quad_points=quad_points)
    if convergence_points:
        results = []
        for n in convergence_points:
            s, t_ = (sums, terms) if n == quad_points else run(n)
            results.append(s / np.max(np.abs(t_), axis=0))
        report.convergence_order = observed_order(results)
        report.extra["convergence_points"] = list(convergence_points)
    return report


# pass thresholds: (field of the report dict, bound, "max" or "min")
THRESHOLDS = {
    "continuity": [("max_rel", 1e-12, "max")],
    "momentum": [("max_rel", 1e-6, "max"), ("convergence_order", 3.9, "min"),
                 ("factorization_max_rel", 1e-10, "max")],
    "q_identity": [("max_rel", 1e-8, "max")],
    "q_ode": [("max_rel", 1e-6, "max")],
    "blowup_rate": [("max_rel", 1e-12, "max")],
    "hydrostatic": [("max_rel", 1e-6, "max"), ("convergence_order", 3.9, "min")],
}

Q_QUAD_POINTS = 2048


def judge(entry: dict) -> dict:
    """Attach per-criterion verdicts and an overall `passed` flag to a report dict."""
    verdicts = []
    for key, bound, kind in THRESHOLDS.get(entry["name"], []):
        value = entry.get(key)
        if value is None:
            ok = False
        else:
            ok = value <= bound if kind == "max" else value >= bound
        verdicts.append({"field": key, "bound": bound, "kind": kind, "passed": bool(ok)})
    entry["criteria"] = verdicts
    entry["passed"] = all(v["passed"] for v in verdicts)
    return entry


def run_suite(sol: SelfSimilarSolution, *, quad_points: int = 1024,
              coefficient: float | None = None, star: StationaryStar | None = None,
              extra_z: np.ndarray | None = None) -> list[dict]:
    """Run every check on one solution and return judged report dicts.

    `extra_z` adds similarity coordinates to the default radial grid of the
    continuity and momentum checks.
    """
    zs = None
    if extra_z is not None and len(extra_z):
        zs = np.sort(np.concatenate([default_z(sol), np.asarray(extra_z, dtype=float)]))
    reports = [
        continuity_residual(sol, z_samples=zs),
        momentum_residual(sol, quad_points=quad_points, coefficient=coefficient, z_samples=zs),
        q_identity_check(sol.profile, sol.params, quad_points=Q_QUAD_POINTS,
                         coefficient=coefficient),
        q_ode_check(sol.profile, sol.params, quad_points=Q_QUAD_POINTS, coefficient=coefficient),
        blowup_rate_check(sol),
    ]
    if star is not None:
        reports.append(hydrostatic_check(star))
    return [judge(r.to_dict()) for r in reports]
