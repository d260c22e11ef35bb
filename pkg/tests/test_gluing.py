import math

import numpy as np
import pytest

from srbm_green.errors import DomainError, PoleError
from srbm_green.gluing import GluingMap, W, chebyshev, chebyshev_algebraic, w, w_prime
from srbm_green.kernel import branch_points, theta2_branch
from srbm_green.model import ModelParams

I = ModelParams()


def test_chebyshev():
    x = np.array([0.3, -0.7 + 0.2j, 2.0 + 1.0j])
    assert np.allclose(chebyshev(2, x), 2 * x * x - 1)
    assert chebyshev(1.37, 1.0) == pytest.approx(1.0)
    assert chebyshev(3, 0.5) == pytest.approx(-1.0)


def test_chebyshev_algebraic_agrees_off_the_cut():
    x = np.array([0.2 + 0.5j, -3 + 1j, 4.0, -0.5 - 2j])
    for a in (0.7, 2.0, 3.4):
        assert np.allclose(chebyshev(a, x), chebyshev_algebraic(a, x), atol=1e-10)


def test_canonical_closed_form():
    # a = 2 and X = -(theta2 + 1)/sqrt(2): w = 2 X^2 - 1 = (theta2 + 1)^2 - 1
    t = np.array([-1.0, 0.0, -3.0 + 2.0j, -1.5 - 0.4j])
    assert np.allclose(w(I, None, t), (t + 1) ** 2 - 1, atol=1e-12)
    assert np.allclose(w_prime(I, None, t), 2 * (t + 1), atol=1e-12)
    assert w(I, None, -1.0) == pytest.approx(-1.0)
    assert w_prime(I, None, -1.0) == pytest.approx(0.0, abs=1e-12)


def test_gluing_identity_and_vertex():
    for p in (I, ModelParams(sigma12=0.4, sigma11=2.0, mu2=0.3), ModelParams(sigma12=-0.6)):
        k = branch_points(p)
        gm = GluingMap.from_model(p, k)
        assert abs(gm.w(gm.vertex()) + 1) < 1e-10
        t1 = k.theta1_minus - np.linspace(1e-3, 30, 200)
        a, b = gm.w(theta2_branch(p, t1, 1, k)), gm.w(theta2_branch(p, t1, -1, k))
        assert np.all(np.abs(a - b) <= 1e-10 * (1 + np.abs(a)))
        # the curve maps to real values <= -1
        assert np.all(np.abs(a.imag) <= 1e-9 * (1 + np.abs(a))) and np.all(a.real <= -1 + 1e-12)


def test_w_prime_finite_differences():
    p = ModelParams(sigma12=0.35, sigma11=1.5, mu1=0.8)
    gm = GluingMap.from_model(p)
    rng = np.random.default_rng(3)
    pts = gm.vertex() - 0.2 - rng.uniform(0, 4, 20) + 1j * rng.uniform(-3, 3, 20)
    h = 1e-6
    fd = (gm.w(pts + h) - gm.w(pts - h)) / (2 * h)
    assert np.all(np.abs(fd - gm.w_prime(pts)) <= 1e-6 * np.abs(gm.w_prime(pts)))


def test_cut_rejected():
    with pytest.raises(DomainError):
        w(I, None, 1.0)


def test_W():
    gm = GluingMap.from_model(I)
    assert gm.W(-1.0) == pytest.approx(0.0, abs=1e-15)
    assert abs(gm.W(-1e6) - 1) < 1e-11
    # w(-2) = 0 in the canonical case: the pole of W
    assert gm.pole() == pytest.approx(-1 - math.sqrt(2) * math.cos(math.pi / 4))
    with pytest.raises(PoleError):
        W(I, None, 0.0)
    with pytest.raises(PoleError):
        W(I, None, -2.0)
    assert W(I, None, -3.0) == pytest.approx(4 / 3)
