"""Heavy sets of circle rotations via continued-fraction renormalization.

A point ``x`` is *heavy* for rotation by ``theta`` when every initial stretch
of its orbit visits ``[0, 1/2]`` at least as often as ``(1/2, 1)``.  The
package builds certified covers of the heavy set and estimates its
dimension; a brute-force Birkhoff-sum oracle checks the construction.
"""

__version__ = "0.1.0"

from .cf import (BudgetExhausted, CFError, ContinuedFraction, NotPeriodic, RationalTerminated,
                 parse_theta)
from .dimension import (CEstimate, DimEstimate, PartialTrajectory, dim_estimate, estimate_c,
                        irregularity_check, pointwise_inequality_check, theta_for_dimension)
from .heavy import (Cover, Membership, build_levels, isolated_points, membership,
                    odd_even_criterion, strictly_heavy)
from .numbers import Ambiguous, QuadraticReal, RatInterval
from .oracle import (OrbitSum, VerificationReport, birkhoff, heavy_up_to, verify_always_infinite,
                     verify_levels, verify_renormalization, verify_reversal)
from .renorm import Branch, RenormTrajectory, delta, g_step, trajectory

__all__ = [
    "Ambiguous", "Branch", "BudgetExhausted", "CEstimate", "CFError", "ContinuedFraction", "Cover",
    "DimEstimate", "Membership", "NotPeriodic", "OrbitSum", "PartialTrajectory", "QuadraticReal",
    "RatInterval", "RationalTerminated", "RenormTrajectory", "VerificationReport", "birkhoff",
    "build_levels", "delta", "dim_estimate", "estimate_c", "g_step", "heavy_up_to",
    "irregularity_check", "isolated_points", "membership", "odd_even_criterion", "parse_theta",
    "pointwise_inequality_check", "strictly_heavy", "theta_for_dimension", "trajectory",
    "verify_always_infinite", "verify_levels", "verify_renormalization", "verify_reversal",
]
