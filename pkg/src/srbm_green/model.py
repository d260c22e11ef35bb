"""Model parameters and regime classification for SRBM in the quadrant."""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace

from .errors import DomainError, ParameterError


class ExistenceWarning(UserWarning):
    """The literal existence disjunction and the conjunctive reading disagree."""


class Regime(enum.Enum):
    TRANSIENT = "Transient"
    POSITIVE_RECURRENT = "PositiveRecurrent"
    NULL_RECURRENT = "NullRecurrent"


class DriftSignCase(enum.Enum):
    PP = "PP"
    PN = "PN"
    NP = "NP"
    NN = "NN"


@dataclass(frozen=True)
class ModelParams:
    """Covariance, drift, reflection and starting point of the SRBM.

    The reflection matrix is ``[[1, r12], [r21, 1]]``; its columns are the
    reflection vectors on the vertical (face 1) and horizontal (face 2) axes.
    """

    sigma11: float = 1.0
    sigma12: float = 0.0
    sigma22: float = 1.0
    mu1: float = 1.0
    mu2: float = 1.0
    r12: float = 0.0
    r21: float = 0.0
    x1: float = 0.0
    x2: float = 0.0

    def __post_init__(self):
        for name in ("sigma11", "sigma12", "sigma22", "mu1", "mu2", "r12", "r21", "x1", "x2"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ParameterError(f"{name} must be finite, got {v!r}")
        if self.sigma11 <= 0 or self.sigma22 <= 0 or self.det_sigma <= 0:
            raise ParameterError(
                "covariance matrix is not positive definite: "
                f"sigma11={self.sigma11}, sigma12={self.sigma12}, sigma22={self.sigma22}"
            )
        if self.x1 < 0 or self.x2 < 0:
            raise ParameterError(f"starting point must lie in the quadrant, got ({self.x1}, {self.x2})")

    @property
    def det_sigma(self):
        return self.sigma11 * self.sigma22 - self.sigma12**2

    @property
    def x(self):
        return (self.x1, self.x2)

    def swapped(self) -> "ModelParams":
        """The same process with the two coordinates exchanged."""
        return ModelParams(
            sigma11=self.sigma22,
            sigma12=self.sigma12,
            sigma22=self.sigma11,
            mu1=self.mu2,
            mu2=self.mu1,
            r12=self.r21,
            r21=self.r12,
            x1=self.x2,
            x2=self.x1,
        )

    def with_start(self, x1, x2) -> "ModelParams":
        return replace(self, x1=float(x1), x2=float(x2))

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class Classification:
    exists: bool
    regime: Regime | None
    drift_sign_case: DriftSignCase


@dataclass(frozen=True)
class ConvergenceDomain:
    """Abscissae of convergence of the transforms.

    ``psi1_max_re`` bounds ``Re theta2`` for psi1, ``psi2_max_re`` bounds
    ``Re theta1`` for psi2 and ``psi_box`` bounds ``(Re theta1, Re theta2)`` for
    psi. The ``*_strict`` flags tell whether the bound itself is excluded.
    """

    psi1_max_re: float
    psi2_max_re: float
    psi_box: tuple
    psi1_strict: bool
    psi2_strict: bool


def existence_diagnostics(p: ModelParams):
    """Return ``(disjunctive, conjunctive)`` readings of the existence condition."""
    conds = (p.r12 > 0, p.r21 > 0, p.r12 * p.r21 < 1)
    return any(conds), all(conds)


def validate_existence(p: ModelParams) -> bool:
    """Existence (in law) of the SRBM: ``r12 > 0 or r21 > 0 or r12*r21 < 1``.

    A warning is emitted whenever this literal disjunction differs from the
    conjunctive reading of the three conditions, so borderline cases can be
    audited.
    """
    disj, conj = existence_diagnostics(p)
    if disj != conj:
        warnings.warn(
            f"existence: disjunctive reading gives {disj}, conjunctive gives {conj} "
            f"(r12={p.r12}, r21={p.r21}, r12*r21={p.r12 * p.r21})",
            ExistenceWarning,
            stacklevel=2,
        )
    return disj


def drift_sign_case(p: ModelParams) -> DriftSignCase:
    if p.mu1 > 0 and p.mu2 > 0:
        return DriftSignCase.PP
    if p.mu1 > 0:
        return DriftSignCase.PN
    if p.mu2 > 0:
        return DriftSignCase.NP
    return DriftSignCase.NN


def _neg(v):
    return max(-v, 0.0)


def transience_margins(p: ModelParams):
    """``(mu1 + r12 mu2^-, mu2 + r21 mu1^-)``."""
    return p.mu1 + p.r12 * _neg(p.mu2), p.mu2 + p.r21 * _neg(p.mu1)


def classify(p: ModelParams) -> Classification:
    # exact comparisons: null recurrence is reported only on exact equality
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ExistenceWarning)
        exists = validate_existence(p)
    case = drift_sign_case(p)
    if not exists:
        return Classification(False, None, case)
    a, b = transience_margins(p)
    if a > 0 or b > 0:
        regime = Regime.TRANSIENT
    elif a < 0 and b < 0:
        regime = Regime.POSITIVE_RECURRENT
    else:
        regime = Regime.NULL_RECURRENT
    return Classification(True, regime, case)


def convergence_domain(p: ModelParams, k=None) -> ConvergenceDomain:
    """Convergence abscissae for psi, psi1, psi2 by drift-sign case."""
    cl = classify(p)
    if cl.regime is not Regime.TRANSIENT:
        raise DomainError(f"transforms are infinite outside the transient regime ({cl.regime})")
    if k is None:
        from .kernel import kernel_geometry

        k = kernel_geometry(p)
    t1s = k.theta_star[0]
    t2ss = k.theta_star_star[1]
    case = cl.drift_sign_case
    if case is DriftSignCase.PP:
        return ConvergenceDomain(t2ss, t1s, (min(t1s, 0.0), min(t2ss, 0.0)), False, False)
    if case is DriftSignCase.PN:
        return ConvergenceDomain(min(t2ss, 0.0), 0.0, (0.0, min(t2ss, 0.0)), False, True)
    if case is DriftSignCase.NP:
        return ConvergenceDomain(0.0, min(t1s, 0.0), (min(t1s, 0.0), 0.0), True, False)
    return ConvergenceDomain(0.0, 0.0, (0.0, 0.0), True, True)
