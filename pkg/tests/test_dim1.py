import math

import pytest
from scipy.integrate import quad

from srbm_green.dim1 import (
    Dim1Params,
    expected_local_time_1d,
    green_1d,
    pde_residual_1d,
    psi_1d,
    psi_1d_closed,
)
from srbm_green.errors import DomainError, PoleError


def test_params_validation():
    assert Dim1Params(2.0, 3.0).rate == 3.0
    with pytest.raises(ValueError):
        Dim1Params(sigma2=0.0)
    with pytest.raises(ValueError):
        Dim1Params(x0=-1.0)


def test_green_function_shape():
    q = Dim1Params(1.0, 1.0, 1.0)
    assert green_1d(q, 2.0) == 1.0 and green_1d(q, 1.0) == 1.0
    assert green_1d(q, 0.0) == pytest.approx(math.exp(-2.0))
    with pytest.raises(DomainError):
        green_1d(Dim1Params(mu=0.0), 1.0)
    with pytest.raises(ValueError):
        green_1d(q, -0.1)


def test_psi_start_at_zero():
    # x0 = 0: psi(theta) = -1/(mu theta), so psi(-1) = 1 for unit parameters
    assert psi_1d(Dim1Params(), -1.0) == pytest.approx(1.0)
    assert psi_1d(Dim1Params(2.0, 0.5), -0.25) == pytest.approx(8.0)


@pytest.mark.parametrize("q", [Dim1Params(1.0, 1.0, 1.0), Dim1Params(0.5, 2.0, 0.3), Dim1Params(3.0, 0.4, 2.0)])
def test_psi_against_quadrature(q):
    for th in (-0.3, -1.7, -q.rate):
        num = sum(quad(lambda x: math.exp(th * x) * green_1d(q, x), a, b, epsabs=1e-14)[0]
                  for a, b in ((0, q.x0), (q.x0, math.inf)))
        assert abs(psi_1d(q, th) - num) < 1e-10


def test_closed_form_and_removable_point():
    q = Dim1Params(1.0, 1.0, 1.0)
    for th in (-0.5, -3.0, -1.0 + 2.0j):
        assert psi_1d_closed(q, th) == pytest.approx(psi_1d(q, th), rel=1e-12)
    with pytest.raises(PoleError):
        psi_1d_closed(q, -2.0)
    with pytest.raises(PoleError):
        psi_1d_closed(q, 0.0)
    # the stable form is continuous through the removable point
    assert psi_1d(q, -2.0) == pytest.approx(psi_1d(q, -2.0 + 1e-7), rel=1e-6)
    with pytest.raises(DomainError):
        psi_1d(q, 0.1)


def test_expected_local_time():
    assert expected_local_time_1d(Dim1Params(1.0, 1.0, 1.0)) == pytest.approx(math.exp(-2) / 2)
    assert expected_local_time_1d(Dim1Params(1.0, 1.0, 0.0)) == pytest.approx(0.5)


def test_pde_residual():
    q = Dim1Params(1.0, 1.0, 2.0)
    # exponential branch: residual is O(h^2); constant branch: exactly zero
    r1, r2 = pde_residual_1d(q, None, 1.0, 1e-2), pde_residual_1d(q, None, 1.0, 5e-3)
    assert abs(r1) < 1e-3 and abs(r1 / r2) == pytest.approx(4.0, rel=1e-2)
    assert pde_residual_1d(q, None, 3.0, 1e-2) == 0.0
    b1, b2 = pde_residual_1d(q, None, 0.0, 1e-2), pde_residual_1d(q, None, 0.0, 5e-3)
    assert abs(b1) < 1e-3 and abs(b1 / b2) == pytest.approx(4.0, rel=5e-2)
    with pytest.raises(ValueError):
        pde_residual_1d(q, None, 2.0, 1e-2)
    with pytest.raises(ValueError):
        pde_residual_1d(q, 0.01, 0.0, 1e-2)
