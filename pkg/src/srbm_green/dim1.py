"""Reflected Brownian motion on the half-line: closed forms used as exact oracles."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import DomainError, PoleError


@dataclass(frozen=True)
class Dim1Params:
    sigma2: float = 1.0
    mu: float = 1.0
    x0: float = 0.0

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if not self.x0 >= 0:
            raise ValueError(f"x0 must be >= 0, got {self.x0}")

    @property
    def rate(self):
        """``2 mu / sigma^2``."""
        return 2.0 * self.mu / self.sigma2


def _require_transient(q):
    if not q.mu > 0:
        raise DomainError(f"mu={q.mu} <= 0: the process is not transient and g is infinite")


def green_1d(q: Dim1Params, x: float) -> float:
    """Green's density ``g(x0, x)``: ``exp(c (x - x0)) / mu`` below ``x0``, ``1/mu`` above."""
    _require_transient(q)
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    if x < q.x0:
        return math.exp(q.rate * (x - q.x0)) / q.mu
    return 1.0 / q.mu


def _exprel(z):
    # (e^z - 1)/z, stable near 0
    if abs(z) < 1e-5:
        return 1 + z / 2 + z * z / 6
    return (cmath.exp(z) - 1) / z


def psi_1d(q: Dim1Params, theta) -> complex:
    """``int_0^inf exp(theta x) g(x0, x) dx`` for ``Re theta < 0``.

    Evaluated as ``x0 e^{-c x0} exprel((theta + c) x0)/mu - e^{theta x0}/(mu theta)``,
    which equals ``-(e^{theta x0} + theta (s/2mu) e^{-c x0}) / (mu theta + s theta^2/2)``
    and stays finite at the removable point ``theta = -c``.
    """
    _require_transient(q)
    t = complex(theta)
    if not t.real < 0:
        raise DomainError(f"Re theta must be negative, got {t}")
    c, x0, mu = q.rate, q.x0, q.mu
    below = x0 * math.exp(-c * x0) * _exprel((t + c) * x0) / mu
    return below - cmath.exp(t * x0) / (mu * t)


def psi_1d_closed(q: Dim1Params, theta) -> complex:
    """The rational-exponential form; raises at its removable point and at ``theta = 0``."""
    _require_transient(q)
    t = complex(theta)
    if t == 0:
        raise PoleError("pole at theta = 0", location=0.0)
    den = q.mu * t + 0.5 * q.sigma2 * t * t
    if abs(den) < 1e-14 * abs(q.mu * t):
        raise PoleError(f"removable point theta = -2 mu/sigma^2; use psi_1d", location=-q.rate)
    num = cmath.exp(t * q.x0) + t * q.sigma2 / (2 * q.mu) * math.exp(-q.rate * q.x0)
    return -num / den


def expected_local_time_1d(q: Dim1Params) -> float:
    """``E L(inf) = (sigma^2 / 2 mu) exp(-2 mu x0 / sigma^2)``."""
    _require_transient(q)
    return q.sigma2 / (2 * q.mu) * math.exp(-q.rate * q.x0)


def pde_residual_1d(q: Dim1Params, x0: float | None, x: float, h: float) -> float:
    """Finite-difference residual of ``(s/2) g'' - mu g' = 0`` at ``x``.

    At ``x = 0`` the boundary condition ``s g'(0) - 2 mu g(0) = 0`` is checked
    instead, with a second-order one-sided difference. The stencil must not
    reach the source point ``x0``.
    """
    if x0 is not None and x0 != q.x0:
        q = Dim1Params(q.sigma2, q.mu, x0)
    g = lambda y: green_1d(q, y)  # noqa: E731
    if x == 0:
        if q.x0 <= 2 * h:
            raise ValueError("stencil reaches the source point")
        d = (-3 * g(0.0) + 4 * g(h) - g(2 * h)) / (2 * h)
        return q.sigma2 * d - 2 * q.mu * g(0.0)
    if x - h < 0:
        raise ValueError("stencil leaves the half-line")
    if abs(x - q.x0) <= h:
        raise ValueError("stencil reaches the source point")
    d1 = (g(x + h) - g(x - h)) / (2 * h)
    d2 = (g(x + h) - 2 * g(x) + g(x - h)) / (h * h)
    return 0.5 * q.sigma2 * d2 - q.mu * d1
