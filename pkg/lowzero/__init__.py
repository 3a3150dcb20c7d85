"""
lowzero: numerical bounds on low-lying zeros of L-functions.

This package evaluates the centered-moment formulas of the n-level
statistic for even test functions, turns them into explicit bounds on the
first zero above the central point and on the share of forms with many
zeros near it, and checks the formulas against random orthogonal matrices.
"""

__version__ = "0.1.0"
__license__ = "Apache-2.0"

from lowzero.bounds import (
    BoundReport,
    omega_min_closed_form,
    omega_min_solver,
    percent_bound,
    percent_table,
)
from lowzero.numerics.moments import (
    MomentSpec,
    big_r,
    big_s,
    mean_so_even,
    rhs_limit,
    sigma_phi_sq,
)

__all__ = [
    "BoundReport",
    "MomentSpec",
    "big_r",
    "big_s",
    "mean_so_even",
    "omega_min_closed_form",
    "omega_min_solver",
    "percent_bound",
    "percent_table",
    "rhs_limit",
    "sigma_phi_sq",
]
