"""Log-log least-squares rate fits: value ~ constant * scale^exponent."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MIN_POINTS = 4


@dataclass(frozen=True)
class FitResult:
    exponent: float
    constant: float
    r_squared: float
    points: tuple[tuple[float, float], ...]

    def predict(self, scale: float) -> float:
        return self.constant * scale ** self.exponent

    def as_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "constant": self.constant,
            "r_squared": self.r_squared,
            "points": [list(p) for p in self.points],
        }


def fit_power_law(scales, values) -> FitResult:
    """Least squares on (log scale, log value); requires positive data and at least four points."""
    x = np.asarray(scales, dtype=np.float64)
    y = np.asarray(values, dtype=np.float64)
    if x.shape != y.shape or x.size < MIN_POINTS:
        raise ValueError(f"need at least {MIN_POINTS} matching points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("scales and values must be positive")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 if ss_tot == 0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return FitResult(float(slope), math.exp(float(intercept)), r2,
                     tuple((float(a), float(b)) for a, b in zip(x, y)))


def fit_geometric_decay(ns, values, lam: float) -> FitResult:
    """Fit values ~ C lam^(-chi n); the returned exponent is chi."""
    base = fit_power_law(np.power(float(lam), np.asarray(ns, dtype=np.float64)), values)
    return FitResult(-base.exponent, base.constant, base.r_squared,
                     tuple((float(n), v) for n, (_, v) in zip(ns, base.points)))
