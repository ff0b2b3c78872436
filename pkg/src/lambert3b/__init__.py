"""Closed-form Lambert-W trajectories of two escaping primaries and a light third body,
with a numerical N-body oracle to score them against."""

from .errors import *  # noqa: F401,F403
from .lambert_w import Branch, WResult, lambertw, lambertw_negexp, w_derivative, w_eval
from .two_body import (
    ScenarioConfig,
    DerivedConstants,
    ValidityReport,
    check_validity,
    derive_constants,
    r_of_t,
    r1_of_t,
    r2_of_t,
    theta1_of_t,
    theta2_of_t,
    fit_conic_constants,
    conic_radius,
)
from .third_body import f_functions, r3_of_t, theta3_of_t, third_body_trajectory
from .oracle import CartesianState, IntegratorConfig, Trajectory, integrate, integrate_two_body
from .compare import ComparisonSummary, ErrorSeries, run_comparison
from .scenario_io import load_scenario

__version__ = "0.1.0"
