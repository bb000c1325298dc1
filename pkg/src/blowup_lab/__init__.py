"""Self-similar blowup solutions of the 4-d pressureless Navier-Stokes-Poisson
equations with density-dependent viscosity, and their numerical verification."""

__version__ = "0.1.0"

from .errors import (BlowupGuardError, BlowupLabError, ConfigError, IntegrationError,
                     NumericalError)
from .model import (ForceSign, ModelParams, PressureLaw, alpha_constant, green_function,
                    potential_gradient, unit_ball_volume)
from .emden import (EmdenProblem, Nonlinearity, RadialProfile, ScaleFactorState, first_zero,
                    integrate_profile, integrate_scale_factor, taylor_start)
from .families import (Family, SelfSimilarSolution, StationaryStar, build_blowup_solution,
                       lane_emden_analytic, stationary_density)
from .verify import (ResidualReport, blowup_rate_check, continuity_residual, hydrostatic_check,
                     momentum_residual, q_function, q_ode_check)
