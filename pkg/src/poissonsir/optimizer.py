"""Search for the intensity that maximizes throughput capacity.

A coarse log grid brackets the maximum, golden-section refines it, and the
result carries the concavity-set membership verdict at the maximizer along
with the bracket and evaluation count. A unimodality certificate guards the
golden-section step, with a noise allowance when the curve points carry
Monte Carlo errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytics import pi_lambda_membership, throughput_curve
from .errors import DomainError, NoInteriorMaximumError
from .models import NetworkModel

__all__ = [
    "OptimizationResult",
    "DEFAULT_BOUNDS",
    "certify_unimodal",
    "golden_section_maximize",
    "maximize_throughput",
]

DEFAULT_BOUNDS = (1e-6, 1e-1)
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizationResult:
    """Maximizer of the throughput capacity on the search interval."""

    lambda_star: float
    t_star: float
    in_pi_lambda: bool
    bracket: tuple[float, float]
    evaluations: int


def certify_unimodal(values, std_errors=None) -> tuple[bool, int]:
    """Check that a sampled curve rises to a single peak and then falls.

    Returns (True, peak index) on success and (False, first violation index)
    otherwise. When standard errors are supplied, steps against the expected
    direction are tolerated up to twice the combined standard error of the
    two points involved.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size < 5:
        raise DomainError("unimodality certification needs at least 5 grid points")
    if std_errors is not None:
        std_errors = np.asarray(std_errors, dtype=float)
        if std_errors.shape != values.shape:
            raise DomainError("std_errors must match the curve shape")

    def tolerance(i: int) -> float:
        if std_errors is None:
            return 0.0
        return 2.0 * math.hypot(std_errors[i], std_errors[i + 1])

    peak = int(np.argmax(values))
    for i in range(peak):
        if values[i + 1] < values[i] - tolerance(i):
            return False, i + 1
    for i in range(peak, values.size - 1):
        if values[i + 1] > values[i] + tolerance(i):
            return False, i + 1
    return True, peak


def golden_section_maximize(fn, lower: float, upper: float, rel_tol: float = 1e-4):
    """Golden-section maximization on a positive interval, in log coordinates.

    Returns (argmax, bracket, evaluations); the bracket is the final interval,
    which strictly contains the returned point.
    """
    if not (0.0 < lower < upper):
        raise DomainError(f"need 0 < lower < upper, got [{lower}, {upper}]")
    x_lo, x_hi = math.log(lower), math.log(upper)
    evaluations = 0

    def eval_log(x: float) -> float:
        nonlocal evaluations
        evaluations += 1
        return fn(math.exp(x))

    c = x_hi - _INV_PHI * (x_hi - x_lo)
    d = x_lo + _INV_PHI * (x_hi - x_lo)
    f_c, f_d = eval_log(c), eval_log(d)
    while (x_hi - x_lo) > rel_tol:
        if f_c > f_d:
            x_hi, d, f_d = d, c, f_c
            c = x_hi - _INV_PHI * (x_hi - x_lo)
            f_c = eval_log(c)
        else:
            x_lo, c, f_c = c, d, f_d
            d = x_lo + _INV_PHI * (x_hi - x_lo)
            f_d = eval_log(d)
    best = math.exp(0.5 * (x_lo + x_hi))
    return best, (math.exp(x_lo), math.exp(x_hi)), evaluations


def maximize_throughput(
    model: NetworkModel,
    theta: float,
    ccdf,
    bounds: tuple[float, float] | None = None,
    grid_points: int = 64,
    rel_tol: float = 1e-4,
) -> OptimizationResult:
    """Find the intensity maximizing T(lambda, theta) for the given CCDF source.

    A ``grid_points`` log grid over the bounds (intersected with the CCDF
    source's own intensity range, if it has one) locates the peak; if the
    argmax falls on a bound the curve is monotone there and a
    :class:`NoInteriorMaximumError` names the violated side. The surrounding
    grid cell is then refined by golden section to a relative intensity
    tolerance of ``rel_tol``.
    """
    lo, hi = bounds if bounds is not None else DEFAULT_BOUNDS
    source_range = getattr(ccdf, "lambda_range", None)
    if source_range is not None:
        lo, hi = max(lo, source_range[0]), min(hi, source_range[1])
    if not (0.0 < lo < hi):
        raise DomainError(f"empty search interval [{lo}, {hi}]")
    capacity = throughput_curve(model, theta, ccdf)
    grid = np.geomspace(lo, hi, int(grid_points))
    values = np.array([capacity(lam) for lam in grid])
    evaluations = int(grid.size)

    errors = None
    if isinstance(getattr(ccdf, "std_errors", None), np.ndarray):
        # propagate the source's per-point noise through T = lam * ccdf * log2(...)
        interp_err = np.interp(np.log(grid), np.log(ccdf.lambdas), ccdf.std_errors)
        ccdf_vals = np.array([ccdf(lam, theta) for lam in grid])
        scale = np.divide(
            values, ccdf_vals, out=np.zeros_like(values), where=ccdf_vals > 0.0
        )
        errors = interp_err * scale
    ok, index = certify_unimodal(values, errors)
    if not ok:
        raise DomainError(
            f"throughput curve is not unimodal on the search grid "
            f"(violation at index {index})"
        )
    if index == 0:
        raise NoInteriorMaximumError("lower")
    if index == grid.size - 1:
        raise NoInteriorMaximumError("upper")

    best, bracket, extra = golden_section_maximize(
        capacity, float(grid[index - 1]), float(grid[index + 1]), rel_tol
    )
    evaluations += extra
    t_star = capacity(best)
    evaluations += 1
    membership = pi_lambda_membership(model, theta, best, ccdf)
    return OptimizationResult(
        lambda_star=best,
        t_star=t_star,
        in_pi_lambda=membership.member,
        bracket=bracket,
        evaluations=evaluations,
    )
