import math

import numpy as np
import pytest

from srbm_green.kernel import (
    beta_angle,
    branch_points,
    gamma,
    gamma1,
    gamma2,
    grad_gamma,
    intersection_points,
    theta1_branch,
    theta2_branch,
    theta2_branch_prime,
)
from srbm_green.model import ModelParams

I = ModelParams()


def test_gamma_values():
    assert gamma(I, (0, 0)) == 0
    assert gamma(I, (0, -2)) == 0
    assert gamma(I, (1, 1)) == 3


def test_gamma1_gamma2():
    assert gamma1(I, (2.0, 3.0)) == 2.0 and gamma2(I, (2.0, 3.0)) == 3.0
    assert gamma1(ModelParams(r21=0.5), (1, 2)) == 2
    assert gamma2(ModelParams(r12=-0.25), (4, 1)) == 0


def test_grad_gamma_matches_finite_differences():
    p = ModelParams(sigma11=2, sigma12=0.4, sigma22=0.7, mu1=0.3, mu2=-0.5)
    th = (0.3 - 0.2j, -0.7 + 0.1j)
    h = 1e-6
    g = grad_gamma(p, th)
    fd1 = (gamma(p, (th[0] + h, th[1])) - gamma(p, (th[0] - h, th[1]))) / (2 * h)
    fd2 = (gamma(p, (th[0], th[1] + h)) - gamma(p, (th[0], th[1] - h))) / (2 * h)
    assert abs(g[0] - fd1) < 1e-8 and abs(g[1] - fd2) < 1e-8


def test_branch_points_canonical():
    k = branch_points(I)
    assert k.theta1_plus == pytest.approx(-1 + math.sqrt(2), abs=1e-14)
    assert k.theta1_minus == pytest.approx(-1 - math.sqrt(2), abs=1e-14)
    assert (k.theta2_minus, k.theta2_plus) == pytest.approx((k.theta1_minus, k.theta1_plus), abs=1e-15)
    assert beta_angle(I) == pytest.approx(math.pi / 2)


def test_beta_limits():
    assert beta_angle(ModelParams(sigma12=-0.999999)) < 2e-3
    assert beta_angle(ModelParams(sigma12=0.999999)) > math.pi - 2e-3


def test_theta2_branch_examples():
    assert theta2_branch(I, 0.0, 1) == pytest.approx(0.0, abs=1e-15)
    assert theta2_branch(I, 0.0, -1) == pytest.approx(-2.0)
    k = branch_points(I)
    assert theta2_branch(I, k.theta1_minus, 1) == pytest.approx(-1.0, abs=1e-7)
    assert theta2_branch(I, k.theta1_minus, -1) == pytest.approx(-1.0, abs=1e-7)


def test_theta1_branch_examples():
    assert theta1_branch(I, -1.0, -1) == pytest.approx(-1 - math.sqrt(2))
    assert theta1_branch(I, 0.0, "-") == pytest.approx(-2.0)
    with pytest.raises(ValueError):
        theta1_branch(I, 0.0, 0)


def test_branch_conjugate_on_the_curve():
    p = ModelParams(sigma11=1.3, sigma12=-0.3, sigma22=0.8, mu1=0.6, mu2=1.2)
    k = branch_points(p)
    t1 = k.theta1_minus - np.linspace(0.1, 20, 50)
    a, b = theta2_branch(p, t1, 1, k), theta2_branch(p, t1, -1, k)
    assert np.allclose(a, np.conj(b), atol=1e-13)
    assert np.all(b.imag < 0)


def test_branch_derivative():
    p = ModelParams(sigma12=0.3, mu1=0.4)
    t = -0.2 + 0.7j
    h = 1e-6
    fd = (theta2_branch(p, t + h, 1) - theta2_branch(p, t - h, 1)) / (2 * h)
    assert abs(theta2_branch_prime(p, t, 1) - fd) < 1e-8


def test_intersection_points():
    star, sstar, d1, d2 = intersection_points(I)
    assert star == (0.0, -2.0) and sstar == (-2.0, 0.0) and not d1 and not d2
    # r21 = 1: theta1 = -theta2 on gamma1 = 0, so theta2^2 + (1 - 1) theta2 = 0 is degenerate
    star, _, d1, _ = intersection_points(ModelParams(r21=1.0))
    assert d1 and star == (0.0, 0.0)
    rng = np.random.default_rng(1)
    for _ in range(20):
        s12 = rng.uniform(-0.8, 0.8)
        p = ModelParams(sigma11=rng.uniform(0.5, 2), sigma12=s12, sigma22=rng.uniform(0.9, 2),
                        mu1=rng.uniform(-1, 1), mu2=rng.uniform(-1, 1), r12=rng.uniform(-1, 1),
                        r21=rng.uniform(-1, 1))
        s, ss, _, _ = intersection_points(p)
        assert abs(gamma(p, s)) < 1e-12 and abs(gamma1(p, s)) < 1e-12
        assert abs(gamma(p, ss)) < 1e-12 and abs(gamma2(p, ss)) < 1e-12


def test_gamma_vectorized():
    t1 = np.array([0.0, 1.0])
    t2 = np.array([-2.0, 1.0])
    assert np.allclose(gamma(I, (t1, t2)), [0.0, 3.0])
