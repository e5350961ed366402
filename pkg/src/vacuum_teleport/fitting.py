"""Least-squares fit of sinusoidal coincidence fringes."""

from __future__ import annotations

import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

MIN_POINTS = 5


class FitError(ValueError):
    """Fringe data cannot constrain the sinusoid."""


@dataclass(frozen=True)
class FitResult:
    """Parameters of ``mean * (1 + visibility * cos(phi + phase_offset))``."""

    visibility: float
    phase_offset: float
    mean: float
    residual_norm: float
    visibility_err: float
    phase_offset_err: float
    mean_err: float

    def as_dict(self) -> dict[str, float]:
        return {
            "visibility": self.visibility,
            "visibility_err": self.visibility_err,
            "phase_offset": self.phase_offset,
            "phase_offset_err": self.phase_offset_err,
            "mean": self.mean,
            "mean_err": self.mean_err,
            "residual_norm": self.residual_norm,
        }


def fringe_model(phi, mean, visibility, phase_offset):
    return mean * (1.0 + visibility * np.cos(phi + phase_offset))


def _check_coverage(phi: np.ndarray) -> None:
    distinct = np.unique(phi)
    if distinct.size < MIN_POINTS:
        raise FitError(f"need at least {MIN_POINTS} distinct phases, got {distinct.size}")
    span = distinct[-1] - distinct[0]
    # endpoint-exclusive grids cover a period once the mean spacing is added back
    if span + span / (distinct.size - 1) < 2.0 * math.pi * (1.0 - 1e-9):
        raise FitError(f"phases span {span:.4g} rad, less than one period")


def fit_visibility(
    phases: Sequence[float],
    values: Sequence[float],
    sigma: Sequence[float] | None = None,
) -> FitResult:
    """Fit a fringe to ``(phi, value)`` samples.

    The linear model ``c0 + c1 cos(phi) + c2 sin(phi)`` seeds a nonlinear
    least-squares refinement that supplies standard errors. With ``sigma``
    the errors are absolute; otherwise they are scaled by the residuals.
    """
    phi = np.asarray(phases, dtype=float)
    y = np.asarray(values, dtype=float)
    if phi.shape != y.shape or phi.ndim != 1:
        raise FitError("phases and values must be 1-D sequences of equal length")
    _check_coverage(phi)

    design = np.column_stack([np.ones_like(phi), np.cos(phi), np.sin(phi)])
    (c0, c1, c2), *_ = np.linalg.lstsq(design, y, rcond=None)
    if not c0 > 0:
        raise FitError(f"fringe mean must be positive, got {c0}")
    amp = math.hypot(c1, c2)
    p0 = (c0, amp / c0, math.atan2(-c2, c1))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OptimizeWarning)
        popt, pcov = curve_fit(
            fringe_model,
            phi,
            y,
            p0=p0,
            sigma=None if sigma is None else np.asarray(sigma, dtype=float),
            absolute_sigma=sigma is not None,
        )
    mean, vis, offset = (float(v) for v in popt)
    if vis < 0:
        vis, offset = -vis, offset + math.pi
    offset = math.remainder(offset, 2.0 * math.pi)
    errs = np.sqrt(np.clip(np.diag(pcov), 0.0, None)) if np.all(np.isfinite(pcov)) else np.full(3, np.nan)
    residual = float(np.linalg.norm(y - fringe_model(phi, mean, vis, offset)))
    return FitResult(
        visibility=vis,
        phase_offset=offset,
        mean=mean,
        residual_norm=residual,
        visibility_err=float(errs[1]),
        phase_offset_err=float(errs[2]),
        mean_err=float(errs[0]),
    )
