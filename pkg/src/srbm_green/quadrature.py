"""Cauchy-type and principal-value integrals over the contour grid.

Everything is formed in the glued coordinate ``s = w(t)``, which is real and
runs from ``-1`` (vertex) to ``u_end`` along the grid. Singularity subtraction
with closed-form logarithms handles the near-singular and principal-value
cases; points close to the contour get a locally refined panel quadrature on
the interpolated density.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss, legval

from .curve import ContourGrid
from .errors import ProximityError, ResolutionError


class Mode(enum.Enum):
    OFF_CURVE = "OffCurve"
    PRINCIPAL_VALUE = "PrincipalValue"


@dataclass
class CauchyIntegrand:
    values: np.ndarray
    grid: ContourGrid

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.node_count,):
            raise ValueError(f"expected {self.grid.node_count} samples, got {self.values.shape}")


_GL16 = leggauss(16)
_TWO_PI_I = 2j * math.pi


def _legendre_coeffs(grid: ContourGrid, f):
    out = []
    for s, e, a, b in grid.panel_slices:
        n = e - s
        x, _ = leggauss(n)
        V = np.polynomial.legendre.legvander(x, n - 1)
        out.append(np.linalg.solve(V, f[s:e]))
    return out


def _nearest_v(grid: ContourGrid, zu):
    # u is decreasing in v; invert Re(zu) by interpolation then Newton
    target = min(max(zu.real, grid.u_end), -1.0)
    v = float(np.interp(-target, -grid.u, grid.v))
    for _ in range(30):
        _, _, _, _, wz, du = grid.eval_v(np.array([v]))
        step = (wz[0].real - target) / du[0]
        v = min(max(v - step, 0.0), grid.truncation_v)
        if abs(step) < 1e-15 * (1 + v):
            break
    return v


def _local_spacing(grid: ContourGrid, zu):
    i = int(np.argmin(np.abs(grid.u - zu.real)))
    return abs(grid.du_dv[i]) * grid.wv[i], i


def distance_to_contour(grid: ContourGrid, zu):
    x = min(max(zu.real, grid.u_end), -1.0)
    return abs(zu - x)


def _v_distance(grid, zu, vstar):
    # distance in v from a local quadratic model of u around vstar (u' vanishes at the vertex)
    d = 1e-4
    _, _, _, _, wz, du = grid.eval_v(np.array([vstar, vstar + d]))
    gap = abs(zu - wz[0].real)
    d2 = abs(du[1] - du[0]) / d
    return gap / max(abs(du[0]), math.sqrt(0.5 * gap * d2), 1e-300)


def _panel_near(a, b, vstar, vdist):
    h = b - a
    return a - h <= vstar <= b + h and vdist < h


def _graded_points(a, b, vstar, scale):
    # breakpoints refined geometrically toward vstar down to the given scale
    pts = {a, b}
    for side in (-1, 1):
        h = b - a
        while h > 0.25 * scale:
            c = vstar + side * h
            if a < c < b:
                pts.add(c)
            h *= 0.5
    if a < vstar < b:
        pts.add(vstar)
    return np.array(sorted(pts))


def _near_panel_integral(grid, coeffs, a, b, zu, fstar, vstar, vdist):
    # integral over [a, b] of (f(v) - fstar) u'(v) / (u(v) - zu) dv, f from the panel interpolant
    brk = _graded_points(a, b, min(max(vstar, a), b), max(vdist, 1e-14))
    x, wg = _GL16
    va = brk[:-1, None]
    vb = brk[1:, None]
    vv = (0.5 * (va + vb) + 0.5 * (vb - va) * x).ravel()
    ww = (0.5 * (vb - va) * wg).ravel()
    _, _, _, _, wz, du = grid.eval_v(vv)
    fv = legval(2 * (vv - a) / (b - a) - 1, coeffs)
    return np.sum((fv - fstar) * du * ww / (wz.real - zu))


def cauchy_u(grid: ContourGrid, f, zu, near_field=True):
    """``int f(s) / (s - zu) ds`` over the truncated contour, oriented vertex to end.

    ``zu`` is a point of the glued plane off the contour.
    """
    f = np.asarray(f, dtype=complex)
    zu = complex(zu)
    spacing, _ = _local_spacing(grid, zu)
    dist = distance_to_contour(grid, zu)
    if not near_field and dist <= 3 * spacing:
        raise ProximityError(
            f"point at distance {dist:.3g} from the contour (local spacing {spacing:.3g}); "
            "use the principal-value mode or refine the grid"
        )
    if zu == -1.0:
        # contour end: finite only for densities vanishing there, and then the
        # integrand is smooth in v (u + 1 and f both vanish to the right order)
        f0 = _interp(grid, f, 0.0)
        if abs(f0) > 1e-6 * float(np.max(np.abs(f))):
            raise ProximityError("density does not vanish at the contour end")
        return np.sum(f * grid.du_dv * grid.wv / (grid.u + 1.0))
    if dist == 0:
        raise ProximityError("point lies on the contour; use the principal-value mode")
    coeffs = None
    vstar = _nearest_v(grid, zu)
    vdist = _v_distance(grid, zu, vstar)
    # value of the density at the closest contour point
    fstar = _interp(grid, f, vstar)
    ds = grid.du_dv * grid.wv
    total = 0j
    for idx, (s, e, a, b) in enumerate(grid.panel_slices):
        if near_field and _panel_near(a, b, vstar, vdist):
            if coeffs is None:
                coeffs = _legendre_coeffs(grid, f)
            total += _near_panel_integral(grid, coeffs[idx], a, b, zu, fstar, vstar, vdist)
        else:
            total += np.sum((f[s:e] - fstar) * ds[s:e] / (grid.u[s:e] - zu))
    total += fstar * np.log((grid.u_end - zu) / (-1.0 - zu))
    return total


def _interp(grid: ContourGrid, f, v):
    for s, e, a, b in grid.panel_slices:
        if a <= v <= b:
            n = e - s
            x, _ = leggauss(n)
            c = np.linalg.solve(np.polynomial.legendre.legvander(x, n - 1), f[s:e])
            return complex(legval(2 * (v - a) / (b - a) - 1, c))
    return complex(f[-1])


def pv_u(grid: ContourGrid, f, df_dv=None):
    """Principal values ``PV int f(s) / (s - u_i) ds`` at every grid node ``u_i``."""
    f = np.asarray(f, dtype=complex)
    if df_dv is None:
        df_dv = grid.derivative_v(f)
    u, ds = grid.u, grid.du_dv * grid.wv
    diff = u[None, :] - u[:, None]
    np.fill_diagonal(diff, 1.0)
    num = (f[None, :] - f[:, None]) * ds[None, :]
    np.fill_diagonal(num, 0.0)
    out = np.sum(num / diff, axis=1)
    # removable node term: f'(s_i) ds_i = (df/dv) dv_i
    out += df_dv * grid.wv
    out += _mirror_correction(grid, f, u, ds)
    out += f * (np.log(np.abs(grid.u_end - u)) - np.log(np.abs(-1.0 - u)))
    return out


def _mirror_correction(grid, f, u, ds):
    # u is even in v, so the kernel at node v_i also has a pole at -v_i; for nodes
    # close to the vertex that pole spoils the panel rule. Remove its principal part
    # (residue f(-v_i) - f(v_i), f extrapolated from the first panel) and add its
    # exact integral over [0, V].
    s, e, a, b = grid.panel_slices[0]
    h = b - a
    idx = np.nonzero(grid.v[s:e] < 0.25 * h)[0] + s
    corr = np.zeros(f.shape, dtype=complex)
    if idx.size == 0:
        return corr
    n = e - s
    x, _ = leggauss(n)
    c = np.linalg.solve(np.polynomial.legendre.legvander(x, n - 1), f[s:e])
    vv = grid.v
    for i in idx:
        res = legval(2 * (-vv[i] - a) / h - 1, c) - f[i]
        quad = np.sum(res / (vv + vv[i]) * grid.wv)
        exact = res * math.log((grid.truncation_v + vv[i]) / vv[i])
        corr[i] = exact - quad
    return corr


def plemelj_limits(grid: ContourGrid, f, df_dv=None):
    """Left and right boundary values of ``(1/2 pi i) int f(s)/(s - z) ds`` at the nodes.

    With the orientation vertex to infinity the left side is the lower side
    of the glued plane.
    """
    f = np.asarray(f, dtype=complex)
    pv = pv_u(grid, f, df_dv) / _TWO_PI_I
    return 0.5 * f + pv, -0.5 * f + pv


def cauchy_integral(f: CauchyIntegrand, z, mode=Mode.OFF_CURVE, near_field=False):
    """``(1/2 pi i) int f(t) w'(t) / (w(t) - w(z)) dt`` over the grid.

    In principal-value mode ``z`` must be a grid point (or its index).
    """
    grid = f.grid
    mode = Mode(mode) if not isinstance(mode, Mode) else mode
    if mode is Mode.PRINCIPAL_VALUE:
        i = _node_index(grid, z)
        return complex(pv_u(grid, f.values)[i] / _TWO_PI_I)
    zu = complex(grid.gluing.w(z))
    return complex(cauchy_u(grid, f.values, zu, near_field=near_field) / _TWO_PI_I)


def _node_index(grid, z):
    if isinstance(z, (int, np.integer)):
        return int(z)
    i = int(np.argmin(np.abs(grid.z - z)))
    if abs(grid.z[i] - z) > 1e-12 * (1 + abs(z)):
        raise ProximityError("principal-value mode requires a grid point")
    return i


def winding(values) -> float:
    """Continuous argument variation along ordered samples."""
    v = np.asarray(values, dtype=complex)
    if np.any(v == 0):
        raise ResolutionError("zero value: argument undefined")
    if v.size < 2:
        return 0.0
    steps = np.angle(v[1:] / v[:-1])
    if np.any(np.abs(steps) > math.pi / 2):
        i = int(np.argmax(np.abs(steps)))
        raise ResolutionError(f"phase jump {steps[i]:.3f} rad between samples {i} and {i + 1}; refine the grid")
    return float(np.sum(steps))


def unwrap_log(values):
    """Continuous branch of ``log`` along samples, starting from the principal value."""
    v = np.asarray(values, dtype=complex)
    steps = np.angle(v[1:] / v[:-1])
    arg = np.angle(v[0]) + np.concatenate([[0.0], np.cumsum(steps)])
    return np.log(np.abs(v)) + 1j * arg
