"""Straight-line fits of resonator loss against bridge count or added capacitance."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .reference import BRIDGE_COUNTS
from .resonator import PowerSweepResult

FF = 1e-15
POWER_CUTS = {"low": 1.0, "high": 1e6}


class DegenerateDesignError(DomainError):
    """The regressor does not take enough distinct values."""


@dataclass(frozen=True, eq=False)
class LossDataset:
    bridge_counts: np.ndarray
    losses: np.ndarray
    loss_errs: np.ndarray | None = None
    power_label: str = "low"

    def __post_init__(self):
        n = np.asarray(self.bridge_counts)
        y = np.asarray(self.losses, dtype=float)
        if n.ndim != 1 or n.shape != y.shape:
            raise DomainError("bridge_counts and losses must be 1-D of equal length")
        if not np.all(n == np.round(n)) or np.any(n < 0):
            raise DomainError("bridge counts must be non-negative integers")
        if np.any(~(y > 0)):
            raise DomainError("losses must be positive")
        if np.unique(n).size < 3:
            raise DegenerateDesignError("need at least 3 distinct bridge counts")
        if self.power_label not in POWER_CUTS:
            raise DomainError(f"power_label must be one of {sorted(POWER_CUTS)}")
        object.__setattr__(self, "bridge_counts", n.astype(int))
        object.__setattr__(self, "losses", y)
        if self.loss_errs is not None:
            e = np.asarray(self.loss_errs, dtype=float)
            if e.shape != y.shape or np.any(~(e > 0)):
                raise DomainError("loss_errs must be positive and match losses")
            object.__setattr__(self, "loss_errs", e)

    @property
    def points(self):
        errs = self.loss_errs if self.loss_errs is not None else [None] * self.losses.size
        return list(zip(self.bridge_counts.tolist(), self.losses.tolist(), list(errs)))


@dataclass(frozen=True)
class SlopeResult:
    intercept: float
    slope: float
    slope_stderr: float
    intercept_stderr: float
    r_squared: float
    n_points: int = 0

    def predict(self, x):
        return self.intercept + self.slope * np.asarray(x, dtype=float)


def ols_line(x: Sequence[float], y: Sequence[float],
             sigma: Sequence[float] | None = None,
             absolute_sigma: bool = True) -> SlopeResult:
    """Weighted or unweighted least-squares line through (x, y).

    Closed-form normal equations accumulated in extended precision, with
    points sorted by x first so the result does not depend on input order.
    Without ``sigma`` the standard errors are scaled by the residual
    variance. With ``sigma`` they are taken as known measurement errors
    unless ``absolute_sigma`` is False.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.ones_like(x) if sigma is None else 1.0 / np.asarray(sigma, dtype=float) ** 2
    if x.size < 2 or np.unique(x).size < 2:
        raise DegenerateDesignError("x takes a single value; slope is undefined")
    order = np.lexsort((w, y, x))
    x, y, w = (a[order].astype(np.longdouble) for a in (x, y, w))

    sw = np.sum(w)
    xbar = np.sum(w * x) / sw
    ybar = np.sum(w * y) / sw
    dx = x - xbar
    dy = y - ybar
    sxx = np.sum(w * dx * dx)
    sxy = np.sum(w * dx * dy)
    slope = sxy / sxx
    intercept = ybar - slope * xbar

    resid = y - intercept - slope * x
    ssr = np.sum(w * resid * resid)
    sst = np.sum(w * dy * dy)
    dof = x.size - 2
    if sigma is not None and absolute_sigma:
        s2 = np.longdouble(1)
    else:
        s2 = ssr / dof if dof > 0 else np.longdouble(0)
    slope_se = math.sqrt(float(s2 / sxx))
    intercept_se = math.sqrt(float(s2 * (1 / sw + xbar * xbar / sxx)))
    r2 = 1.0 if sst == 0 else float(1 - ssr / sst)
    return SlopeResult(
        intercept=float(intercept),
        slope=float(slope),
        slope_stderr=slope_se,
        intercept_stderr=intercept_se,
        r_squared=min(max(r2, 0.0), 1.0),
        n_points=int(x.size),
    )


def fit_loss_per_bridge(dataset: LossDataset) -> SlopeResult:
    """Added loss per bridge (slope) and bare loss (intercept)."""
    return ols_line(dataset.bridge_counts, dataset.losses, dataset.loss_errs)


def loss_per_capacitance(slope_per_bridge: float, bridge_cap: float) -> float:
    """Loss per farad of added capacitance. Divide by 1e15 for per-fF."""
    if not bridge_cap > 0:
        raise DomainError("bridge_cap must be positive")
    return slope_per_bridge / bridge_cap


def synthetic_dataset(intercept: float, slope: float,
                      bridge_counts: Sequence[int] = BRIDGE_COUNTS,
                      noise: float = 0.0, seed: int | None = None,
                      power_label: str = "low") -> LossDataset:
    """Straight-line loss data with optional Gaussian noise of std ``noise``."""
    n = np.asarray(bridge_counts, dtype=int)
    y = intercept + slope * n
    if noise > 0:
        rng = np.random.default_rng(seed)
        y = y + noise * rng.standard_normal(n.size)
    errs = np.full(n.size, noise) if noise > 0 else None
    # Noise can push a point negative when the line is close to zero.
    y = np.where(y > 0, y, np.finfo(float).tiny)
    return LossDataset(n, y, None if errs is None else errs, power_label)


def power_cut(sweep: PowerSweepResult, label: str) -> tuple[float, float | None]:
    """Loss and its error at the sweep point closest (in log n) to the cut."""
    if label not in POWER_CUTS:
        raise DomainError(f"unknown power cut {label!r}")
    i = int(np.argmin(np.abs(np.log10(sweep.photon_numbers / POWER_CUTS[label]))))
    qi = float(sweep.qi[i])
    err = None
    if sweep.qi_err is not None and sweep.qi_err[i] > 0:
        err = float(sweep.qi_err[i]) / qi ** 2
    return 1.0 / qi, err


def dataset_from_sweeps(sweeps: dict[int, PowerSweepResult], label: str) -> LossDataset:
    counts = sorted(sweeps)
    cuts = [power_cut(sweeps[n], label) for n in counts]
    losses = [c[0] for c in cuts]
    errs = [c[1] for c in cuts]
    return LossDataset(np.array(counts), np.array(losses),
                       None if any(e is None for e in errs) else np.array(errs), label)
