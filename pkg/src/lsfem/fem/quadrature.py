"""Quadrature rules on the reference triangle {(0,0),(1,0),(0,1)} and the
unit interval. Triangle rules are collapsed Gauss products, so every weight
is positive at every supported degree.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_DEGREE = 20


@dataclass(frozen=True)
class QuadRule:
    """Points and positive weights; weights sum to the reference measure.

    Triangle points are stored barycentric, shape (n, 3); edge points are
    parametric in [0, 1], shape (n, 1). ``xy`` gives triangle points in
    reference coordinates.
    """

    points: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def xy(self) -> np.ndarray:
        if self.points.shape[1] == 3:
            return self.points[:, 1:]
        return self.points


def triangle_rule(degree: int) -> QuadRule:
    """Rule integrating all bivariate polynomials up to ``degree`` exactly."""
    if not 0 <= degree <= MAX_DEGREE:
        raise ValueError(f"triangle rule degree must be in 0..{MAX_DEGREE}, got {degree}")
    # the collapse map sends x^a y^b to xi^a (1-eta)^(a+1) eta^b: one extra
    # eta degree from the Jacobian, so cover degree+1 per direction
    t, w = _gauss01((degree + 3) // 2)
    # x = xi * (1 - eta), y = eta; Jacobian (1 - eta)
    xi, eta = np.meshgrid(t, t, indexing="ij")
    wx, weta = np.meshgrid(w, w, indexing="ij")
    x = (xi * (1.0 - eta)).ravel()
    y = eta.ravel()
    weights = (wx * weta * (1.0 - eta)).ravel()
    bary = np.column_stack([1.0 - x - y, x, y])
    return QuadRule(bary, weights, degree)


def edge_rule(degree: int) -> QuadRule:
    """Gauss rule on [0, 1] exact for all polynomials up to ``degree``."""
    if not 0 <= degree <= MAX_DEGREE:
        raise ValueError(f"edge rule degree must be in 0..{MAX_DEGREE}, got {degree}")
    t, w = _gauss01((degree + 2) // 2)
    return QuadRule(t[:, None], w, degree)


def _gauss01(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w
