"""Finite-range approximation of strategy-proof single-buyer mechanisms."""

from finrange.approx import (
    ConvergenceRow,
    SimpleFunction,
    build_finite_mechanism,
    convergence_run,
    eval_simple,
    simple_function,
)
from finrange.domain import (
    QUASILINEAR,
    Bundle,
    FamilyId,
    Ordering,
    Preference,
    PreferenceFamily,
    PreferenceInterval,
    compare,
    cuts_from_above,
    indiff_transfer,
    solve_indifferent_preference,
)
from finrange.measure import MeasureKind, ParamMeasure, expected_revenue
from finrange.mechanism import (
    AnalyticMechanism,
    StepMechanism,
    VerificationReport,
    evaluate,
    linear_raw,
    piecewise,
    posted_price,
    quadratic_sp,
    verify_ir,
    verify_monotone,
    verify_sp,
    zero_mechanism,
)
from finrange.optimize import MenuDesign, revenue_comparison, optimize_menu, revenue_of_menu

__version__ = "0.1.0"
