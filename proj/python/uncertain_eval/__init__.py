"""Rating-uncertainty evaluation.

Models each user rating as a probability density instead of a point, and
propagates that uncertainty analytically into evaluation metrics (RMSE, MSE),
pairwise ranking-error probabilities, and leaderboard audits. The heavy
lifting lives in the compiled `_core` extension; this package re-exports the
user-facing pieces and a `main()` wrapper around the command-line interface.
"""

import sys

from ._core import (
    Gaussian,
    RngStream,
    __version__,
    error_matrix,
    error_probability,
    fit_gaussian_ml,
    mse_distribution,
    point_rmse,
    rmse_distribution,
    run_cli,
    std_normal_cdf,
    std_normal_quantile,
)

__all__ = [
    "Gaussian",
    "RngStream",
    "__version__",
    "error_matrix",
    "error_probability",
    "fit_gaussian_ml",
    "main",
    "mse_distribution",
    "point_rmse",
    "rmse_distribution",
    "run_cli",
    "std_normal_cdf",
    "std_normal_quantile",
]


def main() -> int:
    """Console entry point: forwards ``sys.argv`` to the CLI."""
    return run_cli(["uncertain-eval", *sys.argv[1:]])
