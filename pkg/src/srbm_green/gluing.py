"""Conformal gluing function ``w`` built from the generalized Chebyshev function."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PoleError
from .kernel import KernelGeometry, branch_points
from .model import ModelParams

# relative distance to the branch point below which a series replaces arccos
_SERIES_ZONE = 1e-8


@dataclass(frozen=True)
class GluingMap:
    exponent: float
    center: float
    halfwidth: float
    theta2_plus: float
    beta: float

    @classmethod
    def from_model(cls, p: ModelParams, k: KernelGeometry | None = None) -> "GluingMap":
        k = k or branch_points(p)
        return cls(
            exponent=math.pi / k.beta,
            center=0.5 * (k.theta2_plus + k.theta2_minus),
            halfwidth=0.5 * (k.theta2_plus - k.theta2_minus),
            theta2_plus=k.theta2_plus,
            beta=k.beta,
        )

    def to_x(self, theta2):
        return -(np.asarray(theta2, dtype=complex) - self.center) / self.halfwidth

    def phase(self, theta2):
        """``arccos`` of the normalized variable, with a series near the branch point."""
        x = self.to_x(theta2)
        phi = np.arccos(x)
        delta = x + 1.0
        near = np.abs(delta) < _SERIES_ZONE
        if np.any(near):
            d = delta[near] if phi.ndim else delta
            root = np.sqrt(2.0 * d)
            ser = math.pi - root * (1.0 + d / 12.0)
            if phi.ndim:
                phi[near] = ser
            else:
                phi = ser
        return phi

    def _check_cut(self, theta2):
        t = np.asarray(theta2, dtype=complex)
        on_cut = (t.imag == 0) & (t.real >= self.theta2_plus)
        if np.any(on_cut):
            bad = t[on_cut] if t.ndim else t
            raise DomainError(
                f"theta2 on the cut [{self.theta2_plus}, inf) of the gluing function: {np.ravel(bad)[:3]}"
            )

    def w(self, theta2):
        self._check_cut(theta2)
        return _out(np.cos(self.exponent * self.phase(theta2)))

    def w_prime(self, theta2):
        self._check_cut(theta2)
        phi = self.phase(theta2)
        a = self.exponent
        s = np.sin(phi)
        small = np.abs(phi) < 1e-6
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(small, a * a * (1 - (a * a - 1) * phi * phi / 6), a * np.sin(a * phi) / np.where(small, 1, s))
        return _out(-ratio / self.halfwidth)

    def W(self, theta2):
        wv = np.asarray(self.w(theta2))
        # rounding in arccos leaves |w| ~ 1e-16 at the zeros
        if np.any(np.abs(wv) <= 1e-12):
            raise PoleError("W has a pole where w = 0", location=self.pole())
        return _out((wv + 1) / wv)

    def pole(self) -> float:
        """The real point ``w^{-1}(0)`` chosen as the pole of ``W``."""
        return self.center - self.halfwidth * math.cos(self.beta / 2)

    def vertex(self) -> float:
        return self.center - self.halfwidth * math.cos(self.beta)


def _out(v):
    v = np.asarray(v)
    return v[()] if v.ndim == 0 else v


def chebyshev(a, x):
    """Generalized Chebyshev function ``cos(a arccos x)`` (principal arccos)."""
    return _out(np.cos(a * np.arccos(np.asarray(x, dtype=complex))))


def chebyshev_algebraic(a, x):
    """``((x + r)^a + (x - r)^a) / 2`` with ``r = sqrt(x - 1) sqrt(x + 1)``.

    Agrees with :func:`chebyshev` away from the real half-line ``x <= -1``.
    """
    x = np.asarray(x, dtype=complex)
    r = np.sqrt(x - 1) * np.sqrt(x + 1)
    return _out(0.5 * (np.exp(a * np.log(x + r)) + np.exp(a * np.log(x - r))))


def w(p: ModelParams, k: KernelGeometry | None, theta2):
    return GluingMap.from_model(p, k).w(theta2)


def w_prime(p: ModelParams, k: KernelGeometry | None, theta2):
    return GluingMap.from_model(p, k).w_prime(theta2)


def W(p: ModelParams, k: KernelGeometry | None, theta2):
    return GluingMap.from_model(p, k).W(theta2)
