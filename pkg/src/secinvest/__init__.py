"""Optimal security investment against a rational attacker."""

from .attacker import (AttackerParams, AttackerResponse, best_response, deterrence_threshold,
                       optimal_effort, peak_effort, price_of_deterrence)
from .baseline import GlBaselineSolution, compare_models, solve_gordon_loeb
from .defender import (Decision, DecisionInterval, DefenderParams, DefenderSolution, Scenario,
                       classify_gradient_shape, objective, solve_defender, stationary_points,
                       v_hat)
from .fixed_point import (FixedPointReport, critical_ratio, fixed_point_count_class1,
                          fixed_point_count_class2, solve_fpe)
from .model import (BreachModel, DomainError, Family, breach_probability, classify_gamma, effort,
                    validate_assumptions)

__version__ = "0.1.0"
