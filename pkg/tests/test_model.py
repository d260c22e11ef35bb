import math
import warnings

import pytest

from srbm_green.kernel import kernel_geometry
from srbm_green.errors import DomainError, ParameterError
from srbm_green.model import (
    DriftSignCase,
    ExistenceWarning,
    ModelParams,
    Regime,
    classify,
    convergence_domain,
    drift_sign_case,
    existence_diagnostics,
    transience_margins,
    validate_existence,
)


def test_defaults_and_dict_round_trip():
    p = ModelParams()
    assert p.as_dict() == dict(sigma11=1.0, sigma12=0.0, sigma22=1.0, mu1=1.0, mu2=1.0, r12=0.0, r21=0.0, x1=0.0, x2=0.0)
    assert ModelParams(**p.as_dict()) == p


@pytest.mark.parametrize(
    "kw",
    [dict(sigma11=0.0), dict(sigma12=1.0), dict(sigma22=-1.0), dict(x1=-0.1), dict(mu1=math.nan), dict(r12=math.inf)],
)
def test_invalid_parameters(kw):
    with pytest.raises(ParameterError):
        ModelParams(**kw)


def test_swap_is_an_involution():
    p = ModelParams(sigma11=2, sigma12=0.3, sigma22=0.5, mu1=0.7, mu2=1.1, r12=0.2, r21=-0.4, x1=1, x2=3)
    q = p.swapped()
    assert (q.sigma11, q.mu1, q.r12, q.x1) == (0.5, 1.1, -0.4, 3)
    assert q.swapped() == p


def test_with_start():
    assert ModelParams().with_start(2, 3).x == (2.0, 3.0)


def test_existence_readings():
    # R = I satisfies the disjunction but not the conjunctive reading
    assert existence_diagnostics(ModelParams()) == (True, False)
    with pytest.warns(ExistenceWarning):
        assert validate_existence(ModelParams())
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert validate_existence(ModelParams(r12=0.5, r21=0.5))
        assert not validate_existence(ModelParams(r12=-2.0, r21=-1.0))


def test_drift_sign_cases():
    assert drift_sign_case(ModelParams(mu1=1, mu2=1)) is DriftSignCase.PP
    assert drift_sign_case(ModelParams(mu1=1, mu2=-1)) is DriftSignCase.PN
    assert drift_sign_case(ModelParams(mu1=-1, mu2=1)) is DriftSignCase.NP
    assert drift_sign_case(ModelParams(mu1=-1, mu2=-1)) is DriftSignCase.NN


def test_classification():
    assert classify(ModelParams()).regime is Regime.TRANSIENT
    assert classify(ModelParams(mu1=-1, mu2=-1)).regime is Regime.POSITIVE_RECURRENT
    # margin exactly zero on one side, negative on the other
    p = ModelParams(mu1=-1.0, mu2=-0.5, r21=0.5)
    assert transience_margins(p) == (-1.0, 0.0)
    assert classify(p).regime is Regime.NULL_RECURRENT
    p = ModelParams(mu1=-1.0, mu2=-0.5, r21=0.7)
    assert classify(p).regime is Regime.TRANSIENT
    assert classify(ModelParams(r12=-2.0, r21=-1.0)).exists is False


def test_convergence_domain_canonical():
    cd = convergence_domain(ModelParams(x1=1, x2=1))
    assert cd.psi1_max_re == 0.0 and cd.psi2_max_re == 0.0
    assert cd.psi_box == (0.0, 0.0)


def test_convergence_domain_oblique():
    p = ModelParams(r12=0.5, r21=0.5, mu1=1.0, mu2=2.0)
    k = kernel_geometry(p)
    cd = convergence_domain(p, k)
    # both drifts positive: abscissae are the kernel points, which may be positive
    assert cd.psi1_max_re == k.theta_star_star[1]
    assert cd.psi2_max_re == k.theta_star[0]
    assert cd.psi_box == (min(k.theta_star[0], 0.0), min(k.theta_star_star[1], 0.0))


def test_convergence_domain_requires_transience():
    with pytest.raises(DomainError):
        convergence_domain(ModelParams(mu1=-1, mu2=-1))
