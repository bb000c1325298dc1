import math
from dataclasses import dataclass

import numpy as np
import pytest

from blowup_lab.emden import RadialProfile
from blowup_lab.errors import ConfigError
from blowup_lab.families import (BALANCED_NUMERATOR, Family, SelfSimilarSolution,
                                 StationaryStar)
from blowup_lab.model import ModelParams
from blowup_lab.verify import (R_MIN_FRACTION, blowup_rate_check, continuity_residual,
                               continuity_terms, default_times, default_z, hydrostatic_check,
                               hydrostatic_terms, judge, momentum_residual, momentum_terms,
                               observed_order, q_function, q_identity_check, q_ode_check,
                               run_suite)

UNIT_STAR_K = 2 * math.pi / 3


def attractive_keys(solutions):
    return [k for k in solutions if k[0] == "blowup"]


# -- plumbing ---------------------------------------------------------------------

def test_observed_order_recovers_power_law():
    h = np.array([1, 0.5, 0.25, 0.125])
    results = [np.array([3.0 * x**4 + 1e-3, -x**4]) for x in h]
    assert observed_order(results) == pytest.approx(4.0, abs=1e-12)


def test_observed_order_needs_three_runs():
    with pytest.raises(ConfigError):
        observed_order([np.zeros(2), np.zeros(2)])


def test_report_invariants(unit_solution):
    report = continuity_residual(unit_solution)
    assert report.max_abs == float(np.max(np.abs(report.values)))
    assert report.convergence_order is None
    assert len(report.values) == 8 * 16
    d = report.to_dict()
    assert d["samples"] == 128 and d["name"] == "continuity"


def test_default_grids(unit_solution, solutions):
    times = default_times(unit_solution)
    taus = 1 - times
    assert taus[0] == 1.0 and taus[-1] == pytest.approx(1e-6, rel=1e-9)
    assert np.allclose(taus[1:] / taus[:-1], taus[1] / taus[0])
    z = default_z(unit_solution)
    assert len(z) == 16 and 0 < z[0] and z[-1] < unit_solution.support
    assert np.all(np.diff(default_times(solutions["global"])) > 0)


def test_judge_flags_failures():
    entry = judge({"name": "momentum", "max_rel": 1e-7, "convergence_order": 3.0,
                   "factorization_max_rel": 0.0})
    assert not entry["passed"]
    assert [v["passed"] for v in entry["criteria"]] == [True, False, True]
    assert not judge({"name": "q_identity", "max_rel": None})["passed"]


# -- continuity --------------------------------------------------------------------

def test_continuity_all_sets(solutions):
    for sol in solutions.values():
        assert continuity_residual(sol).max_rel <= 1e-12


def test_continuity_near_axis(unit_solution):
    t = 0.3
    tau = 1 - t
    r = 1.0001 * R_MIN_FRACTION * tau * unit_solution.support
    terms = continuity_terms(unit_solution, t, r)
    # (3/r) rho u -> -3 C rho / tau
    assert terms[3] == pytest.approx(-3 * unit_solution.density(t, r) / tau, rel=1e-14)
    report = continuity_residual(unit_solution, [t], [r])
    assert report.max_rel <= 1e-12


def test_axis_samples_rejected(unit_solution):
    with pytest.raises(ConfigError):
        continuity_residual(unit_solution, [0.0], [0.0])


def vacuum_solution():
    grid = np.linspace(0, 10, 11)
    zero = np.zeros_like(grid)
    profile = RadialProfile(grid, zero, zero, zero)
    return SelfSimilarSolution(ModelParams(), profile, Family.BLOWUP4D)


def test_vacuum_residuals_exactly_zero():
    sol = vacuum_solution()
    assert continuity_residual(sol).max_abs == 0.0
    report = momentum_residual(sol, convergence_points=None)
    assert report.max_abs == 0.0


# -- Q -------------------------------------------------------------------------------

def test_q_vanishes_near_origin(unit_solution):
    # bounded by the ODE tolerance on y' (1e-10) times 5 C kappa, with margin
    for z in (1e-5, 1e-4, 1e-3):
        assert abs(q_function(unit_solution.profile, unit_solution.params, z)) <= 10 * 5 * 1e-10


def test_q_rejects_bad_z(unit_solution):
    with pytest.raises(ConfigError):
        q_function(unit_solution.profile, unit_solution.params, 0.0)
    with pytest.raises(ConfigError):
        q_function(unit_solution.profile, unit_solution.params, 2 * unit_solution.support)


def test_q_identity_and_negative_control(solutions):
    for sol in solutions.values():
        p = sol.params
        good = q_identity_check(sol.profile, p)
        bad = q_identity_check(sol.profile, p, coefficient=4 * p.big_c * p.kappa)
        assert good.max_rel <= 1e-8
        assert bad.max_abs >= 1e3 * good.max_abs
        assert bad.max_rel > 1e-2


def test_q_ode_relation(solutions):
    for sol in solutions.values():
        assert q_ode_check(sol.profile, sol.params).max_rel <= 1e-6


def test_q_ode_detects_perturbed_profile(unit_solution):
    good = q_ode_check(unit_solution.profile, unit_solution.params)
    bad = q_ode_check(unit_solution.profile.scaled(1.01), unit_solution.params)
    assert bad.max_rel >= 1e3 * good.max_rel
    assert np.all(np.isfinite(bad.values))


# -- momentum ------------------------------------------------------------------------

def test_viscous_laplacian_vanishes_for_linear_u(unit_solution):
    for t, r in [(0.0, 0.5), (0.9, 0.01), (0.5, 1.5)]:
        terms = momentum_terms(unit_solution, t, r, 64)
        scale = unit_solution.params.kappa * unit_solution.density(t, r) ** 1.25 * 3 / (r * (1 - t))
        assert abs(terms[4]) <= 4e-16 * scale


def test_momentum_all_sets(solutions):
    for sol in solutions.values():
        report = momentum_residual(sol)
        assert report.max_rel <= 1e-6
        assert report.convergence_order >= 3.9
        assert report.extra["factorization_max_rel"] <= 1e-10


def test_momentum_improves_with_resolution(unit_solution):
    coarse = momentum_residual(unit_solution, quad_points=64, convergence_points=None)
    fine = momentum_residual(unit_solution, quad_points=1024, convergence_points=None)
    assert fine.max_rel < coarse.max_rel / 100


def test_momentum_negative_control_wrong_coefficient(unit_solution):
    report = momentum_residual(unit_solution, coefficient=4.0, convergence_points=None)
    # the direct residual is still fine; the factorization with the wrong Q is not
    assert report.max_rel <= 1e-6
    assert report.extra["factorization_max_rel"] > 1e-3


def test_momentum_with_wrong_sign_fails(unit_solution):
    # attractive profile paired with a repulsive force
    params = ModelParams(force_sign=unit_solution.params.force_sign.__class__.REPULSIVE)
    mixed = SelfSimilarSolution(params, unit_solution.profile, Family.REPULSIVE4D)
    report = momentum_residual(mixed, convergence_points=None)
    assert report.max_rel > 1e-2


# -- blowup rate --------------------------------------------------------------------

def test_blowup_rate_examples(solutions, unit_solution):
    report = blowup_rate_check(unit_solution)
    assert np.all(report.values == pytest.approx(1.0, rel=1e-12))
    two = [sol for key, sol in solutions.items() if key[0] == "blowup" and key[4] == 1.5][0]
    assert blowup_rate_check(two).extra["alpha4"] == 1.5**4
    from blowup_lab import build_blowup_solution
    sol = build_blowup_solution(ModelParams(alpha0=2.0))
    times = 1 - np.geomspace(1, 1e-6, 25)
    report = blowup_rate_check(sol, times)
    assert np.all(np.abs(report.values - 16.0) <= 16.0 * 1e-12)
    assert np.ptp(report.values) <= 16.0 * 1e-12


# -- hydrostatic ---------------------------------------------------------------------

def test_hydrostatic_terms_vanish_at_axis():
    star = StationaryStar(UNIT_STAR_K, 1.0)
    small = hydrostatic_terms(star, 1e-6, 64)
    smaller = hydrostatic_terms(star, 1e-7, 64)
    # both terms are odd in r, so they vanish linearly
    assert np.allclose(small / smaller, 10.0, rtol=1e-6)
    assert np.all(np.abs(small) <= 20 * 1e-6)


def test_balanced_star_is_in_equilibrium():
    star = StationaryStar(UNIT_STAR_K, 1.0, numerator=BALANCED_NUMERATOR)
    report = hydrostatic_check(star)
    assert report.max_rel <= 1e-6
    assert report.convergence_order >= 3.9


def test_printed_star_residual_is_two_thirds():
    # documented prefactor: pressure gradient and gravity differ by a factor of 3
    report = hydrostatic_check(StationaryStar(UNIT_STAR_K, 1.0), convergence_points=None)
    assert report.max_rel == pytest.approx(2 / 3, rel=1e-6)


@dataclass(frozen=True)
class WrongExponentStar:
    """Balanced prefactor with (1 + A^2 r^2)^-2 instead of ^-5/2."""

    big_k: float
    big_a: float

    @property
    def central_density(self):
        return (BALANCED_NUMERATOR * self.big_k * self.big_a**2 / (2 * math.pi)) ** 1.25

    def density(self, r):
        return self.central_density * (1 + self.big_a**2 * np.asarray(r, dtype=float) ** 2) ** -2.0

    def density_derivative(self, r):
        r = np.asarray(r, dtype=float)
        return -4 * self.big_a**2 * r * self.central_density * (1 + self.big_a**2 * r**2) ** -3.0


def test_hydrostatic_wrong_exponent_control():
    report = hydrostatic_check(WrongExponentStar(UNIT_STAR_K, 1.0), convergence_points=None)
    assert report.max_rel > 0.1


def test_hydrostatic_rejects_axis():
    with pytest.raises(ConfigError):
        hydrostatic_check(StationaryStar(1.0, 1.0), [0.0, 1.0])


# -- suite ---------------------------------------------------------------------------

def test_run_suite_passes_on_correct_solution(unit_solution):
    reports = run_suite(unit_solution)
    assert [r["name"] for r in reports] == ["continuity", "momentum", "q_identity", "q_ode",
                                            "blowup_rate"]
    assert all(r["passed"] for r in reports)


def test_run_suite_flags_injected_error(unit_solution):
    reports = {r["name"]: r for r in run_suite(unit_solution, coefficient=4.0)}
    assert not reports["q_identity"]["passed"]
    assert not reports["momentum"]["passed"]
    assert reports["continuity"]["passed"]


def test_run_suite_extra_radii(unit_solution):
    reports = run_suite(unit_solution, extra_z=np.array([0.123, 2.5]))
    cont = reports[0]
    assert cont["samples"] == 8 * 18
