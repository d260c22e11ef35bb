import numpy as np
import pytest

from srbm_green.curve import contour_grid, hyperbola_residual, in_domain, vertex
from srbm_green.errors import TruncationError
from srbm_green.kernel import branch_points, theta2_branch
from srbm_green.model import ModelParams

I = ModelParams()
TILTED = ModelParams(sigma11=1.4, sigma12=0.5, sigma22=0.9, mu1=0.7, mu2=1.1)


def test_vertex():
    assert vertex(I) == pytest.approx(-1.0)
    p = ModelParams(sigma22=2.0, mu2=0.6)
    assert vertex(p) == pytest.approx(-0.3)


def test_hyperbola_residual_examples():
    assert hyperbola_residual(I, -1 + 5j) == pytest.approx(0.0, abs=1e-14)
    assert hyperbola_residual(I, 0.0) == pytest.approx(-1.0)
    k = branch_points(TILTED)
    z = theta2_branch(TILTED, k.theta1_minus - np.linspace(0.01, 15, 40), -1, k)
    assert np.all(np.abs(hyperbola_residual(TILTED, z)) <= 1e-10 * (1 + np.abs(z) ** 2))


def test_in_domain():
    assert in_domain(I, None, -1.5) and not in_domain(I, None, -0.5)
    assert not in_domain(I, None, -1.0)
    k = branch_points(TILTED)
    z = theta2_branch(TILTED, k.theta1_minus - np.linspace(0.01, 15, 40), -1, k)
    assert np.all(in_domain(TILTED, k, z - 1e-6))
    assert not np.any(in_domain(TILTED, k, z + 1e-6))


def test_grid_membership_and_order():
    g = contour_grid(I, None, 200, 1e-8)
    assert g.node_count == 200
    assert np.max(np.abs(hyperbola_residual(I, g.z))) < 1e-10
    assert np.all(np.diff(g.t1) < 0) and np.all(np.diff(g.u) < 0) and np.all(g.u <= -1)
    assert np.all(g.weights > 0)
    assert g.achieved_bound <= 1e-8


def test_grid_derivative_data():
    g = contour_grid(TILTED, None, 256, 1e-8)
    # dz/dv from the analytic form against a spectral derivative of z
    assert np.allclose(g.derivative_v(g.z), g.dz_dv, rtol=1e-7, atol=1e-7)
    assert np.allclose(g.derivative_v(g.u), g.du_dv, rtol=1e-7, atol=1e-7)


def test_grid_too_small():
    with pytest.raises(TruncationError) as e:
        contour_grid(I, None, 4, 1e-8)
    assert e.value.achieved_bound == float("inf")


def test_unreachable_tolerance_reports_bound():
    with pytest.raises(TruncationError) as e:
        contour_grid(I.with_start(1, 1), None, 32, 1e-14)
    assert e.value.achieved_bound > 1e-14


def test_points_and_csv():
    g = contour_grid(I, None, 64, 1e-6)
    pts = g.points
    assert len(pts) == 64 and pts[0].z == g.z[0]
    row = next(g.csv_rows())
    assert len(row.split(",")) == 4
