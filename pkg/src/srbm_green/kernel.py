"""Kernel polynomials, algebraic branches and distinguished points of the ellipse."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams


def _c(z):
    # real inputs get a +0j imaginary part so the principal sqrt lands on the upper side
    return np.asarray(z, dtype=complex) if np.iscomplexobj(z) else np.asarray(z, dtype=float) + 0j


def _scalar(v):
    return v[()] if isinstance(v, np.ndarray) and v.ndim == 0 else v


def gamma(p: ModelParams, theta):
    t1, t2 = theta
    return (
        0.5 * (p.sigma11 * t1 * t1 + 2 * p.sigma12 * t1 * t2 + p.sigma22 * t2 * t2)
        + p.mu1 * t1
        + p.mu2 * t2
    )


def gamma1(p: ModelParams, theta):
    t1, t2 = theta
    return t1 + p.r21 * t2


def gamma2(p: ModelParams, theta):
    t1, t2 = theta
    return p.r12 * t1 + t2


def grad_gamma(p: ModelParams, theta):
    t1, t2 = theta
    return (
        p.sigma11 * t1 + p.sigma12 * t2 + p.mu1,
        p.sigma12 * t1 + p.sigma22 * t2 + p.mu2,
    )


@dataclass(frozen=True)
class KernelGeometry:
    theta1_minus: float
    theta1_plus: float
    theta2_minus: float
    theta2_plus: float
    theta_star: tuple
    theta_star_star: tuple
    beta: float
    star_degenerate: bool = False
    star_star_degenerate: bool = False

    def csv_row(self):
        vals = (
            self.theta1_minus,
            self.theta1_plus,
            self.theta2_minus,
            self.theta2_plus,
            self.theta_star[0],
            self.theta_star[1],
            self.theta_star_star[0],
            self.theta_star_star[1],
            self.beta,
        )
        return ",".join(repr(float(v)) for v in vals)


CSV_HEADER = "theta1_minus,theta1_plus,theta2_minus,theta2_plus,theta_star_1,theta_star_2,theta_ss_1,theta_ss_2,beta"


def _roots(q, mu_other, det):
    r = math.sqrt(q * q + mu_other * mu_other * det)
    lo, hi = (q - r) / det, (q + r) / det
    # recompute the small-magnitude root from the product to avoid cancellation
    prod = -mu_other * mu_other / det
    if abs(lo) < abs(hi) and hi != 0:
        lo = prod / hi
    elif lo != 0:
        hi = prod / lo
    return lo, hi


def beta_angle(p: ModelParams) -> float:
    c = -p.sigma12 / math.sqrt(p.sigma11 * p.sigma22)
    return math.acos(min(1.0, max(-1.0, c)))


def intersection_points(p: ModelParams):
    """Nonzero intersections of the ellipse with the lines ``gamma1 = 0`` and ``gamma2 = 0``.

    Returns ``(theta_star, theta_star_star, star_degenerate, star_star_degenerate)``.
    A degenerate flag means the line is tangent to the ellipse at the origin, in
    which case the origin is returned.
    """
    q1 = p.sigma11 * p.r21**2 - 2 * p.sigma12 * p.r21 + p.sigma22
    n1 = p.mu2 - p.r21 * p.mu1
    t2s = -2.0 * n1 / q1
    star = (-p.r21 * t2s + 0.0, t2s + 0.0)
    q2 = p.sigma11 - 2 * p.sigma12 * p.r12 + p.sigma22 * p.r12**2
    n2 = p.mu1 - p.r12 * p.mu2
    t1ss = -2.0 * n2 / q2
    sstar = (t1ss + 0.0, -p.r12 * t1ss + 0.0)
    return star, sstar, n1 == 0, n2 == 0


def branch_points(p: ModelParams) -> KernelGeometry:
    det = p.det_sigma
    t1m, t1p = _roots(p.mu2 * p.sigma12 - p.mu1 * p.sigma22, p.mu2, det)
    t2m, t2p = _roots(p.mu1 * p.sigma12 - p.mu2 * p.sigma11, p.mu1, det)
    star, sstar, d1, d2 = intersection_points(p)
    return KernelGeometry(t1m, t1p, t2m, t2p, star, sstar, beta_angle(p), d1, d2)


kernel_geometry = branch_points


def _sqrt_disc(A, lo, hi, t):
    # sqrt(A (t - lo)(t - hi)) with A < 0, cut on (-inf, lo] U [hi, inf)
    return math.sqrt(-A) * np.sqrt(t - lo) * np.sqrt(hi - t)


def _sign(sign):
    if sign in (1, "+", "plus"):
        return 1.0
    if sign in (-1, "-", "minus"):
        return -1.0
    raise ValueError(f"sign must be +1 or -1, got {sign!r}")


def theta2_branch(p: ModelParams, theta1, sign, k: KernelGeometry | None = None):
    """``Theta2^{+/-}(theta1)``: roots in ``theta2`` of ``gamma(theta1, theta2) = 0``."""
    k = k or branch_points(p)
    t = _c(theta1)
    s = _sign(sign) * _sqrt_disc(-p.det_sigma, k.theta1_minus, k.theta1_plus, t)
    return _scalar((-(p.sigma12 * t + p.mu2) + s) / p.sigma22)


def theta1_branch(p: ModelParams, theta2, sign, k: KernelGeometry | None = None):
    """``Theta1^{+/-}(theta2)``: roots in ``theta1`` of ``gamma(theta1, theta2) = 0``."""
    k = k or branch_points(p)
    t = _c(theta2)
    s = _sign(sign) * _sqrt_disc(-p.det_sigma, k.theta2_minus, k.theta2_plus, t)
    return _scalar((-(p.sigma12 * t + p.mu1) + s) / p.sigma11)


def theta2_branch_prime(p: ModelParams, theta1, sign, k: KernelGeometry | None = None):
    """Derivative of ``Theta2^{+/-}`` with respect to ``theta1``."""
    k = k or branch_points(p)
    t = _c(theta1)
    A = -p.det_sigma
    s = _sign(sign) * _sqrt_disc(A, k.theta1_minus, k.theta1_plus, t)
    dd = 2 * A * t + 2 * (p.sigma12 * p.mu2 - p.sigma22 * p.mu1)
    return _scalar((-p.sigma12 + dd / (2 * s)) / p.sigma22)


def theta1_branch_prime(p: ModelParams, theta2, sign, k: KernelGeometry | None = None):
    k = k or branch_points(p)
    t = _c(theta2)
    A = -p.det_sigma
    s = _sign(sign) * _sqrt_disc(A, k.theta2_minus, k.theta2_plus, t)
    dd = 2 * A * t + 2 * (p.sigma12 * p.mu1 - p.sigma11 * p.mu2)
    return _scalar((-p.sigma12 + dd / (2 * s)) / p.sigma11)
