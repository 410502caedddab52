"""Optimal filtration/backwash synthesis for membrane fouling models."""

from .models import (FoulingModel, DerivedFunctions, HypothesisReport,
                     ModelError, build_model, check_hypotheses,
                     psi_closed_form_check, g_inverse)
from .synthesis import (SingularArc, SwitchingCurve, CurveSample, FeedbackLaw,
                        SynthesisError, find_singular_arc, switching_time,
                        sample_switching_curve, feedback, cost_difference_delta)
from .simulate import (Trajectory, Event, AuditReport, PiecewiseControl,
                       SimulationError, integrate_state, integrate_feedback,
                       integrate_backwash_then_feedback, integrate_adjoint,
                       pmp_audit)
from .oracle import (ValueGrid, ComparisonReport, GridError, solve_dp,
                     value_at, dp_refinement_tolerance, compare_feedback_vs_dp,
                     dispersal_equality_check, strategy_enumeration,
                     random_schedule)

__version__ = "0.1.0"
