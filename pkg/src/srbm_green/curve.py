"""The hyperbola branch R, its lower half R-, the domain to its left, and a quadrature grid on R-.

The lower half is generated by real ``theta1 <= theta1_minus`` through the branch
``Theta2^-``. The grid substitutes ``theta1 = theta1_minus - sinh(v)^2`` and lays
composite Gauss-Legendre panels in ``v``; with this substitution the curve point,
its ``v``-derivative and the glued coordinate ``w`` are all analytic in ``v``
including at the vertex, so no node clustering is needed there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import TruncationError
from .gluing import GluingMap
from .kernel import KernelGeometry, branch_points, theta2_branch
from .model import ModelParams

PANEL_ORDER = 16


@dataclass(frozen=True)
class CurvePoint:
    t1: float
    z: complex
    dz: complex


def vertex(p: ModelParams, k: KernelGeometry | None = None) -> float:
    k = k or branch_points(p)
    return -(p.sigma12 * k.theta1_minus + p.mu2) / p.sigma22


def hyperbola_residual(p: ModelParams, theta2):
    """Left side minus right side of the conic equation with ``x = Re theta2``, ``y = Im theta2``."""
    t = np.asarray(theta2, dtype=complex)
    x, y = t.real, t.imag
    s11, s12, s22 = p.sigma11, p.sigma12, p.sigma22
    lhs = (
        s22 * (s12**2 - s11 * s22) * x**2
        + s12**2 * s22 * y**2
        - 2 * s22 * (s11 * p.mu2 - s12 * p.mu1) * x
    )
    rhs = p.mu2 * (s11 * p.mu2 - 2 * s12 * p.mu1)
    out = lhs - rhs
    return out[()] if out.ndim == 0 else out


def branch_abscissa(p: ModelParams, k: KernelGeometry | None, y):
    """Abscissa of the branch through the vertex at height ``y``."""
    k = k or branch_points(p)
    y = np.asarray(y, dtype=float)
    # solve Im Theta2^-(t) = -|y| for t <= theta1_minus, then read off Re
    s22, s12 = p.sigma22, p.sigma12
    A = -p.det_sigma
    # (s22 y)^2 = -d(t) = -A (t - t1m)(t - t1p): quadratic in t
    c = (s22 * y) ** 2
    t1m, t1p = k.theta1_minus, k.theta1_plus
    # -A t^2 + A (t1m + t1p) t - A t1m t1p - c = 0 ; take the root <= t1m
    qa, qb, qc = -A, A * (t1m + t1p), -A * t1m * t1p - c
    disc = np.sqrt(np.maximum(qb * qb - 4 * qa * qc, 0.0))
    t = (-qb - disc) / (2 * qa)
    out = -(s12 * t + p.mu2) / s22
    return out[()] if out.ndim == 0 else out


def in_domain(p: ModelParams, k: KernelGeometry | None, theta2):
    """True iff ``theta2`` lies strictly left of the curve."""
    t = np.asarray(theta2, dtype=complex)
    out = t.real < branch_abscissa(p, k, t.imag)
    return out[()] if np.ndim(out) == 0 else out


def _panel_layout(node_count):
    npan = max(1, int(round(node_count / PANEL_ORDER)))
    base, extra = divmod(node_count, npan)
    return [base + (1 if i < extra else 0) for i in range(npan)]


def _tail_bound(p, k, gm, v):
    # envelope of the boundary data and of the neglected part of log G
    t1 = k.theta1_minus - math.sinh(v) ** 2
    kappa = p.x1 - p.sigma12 * p.x2 / p.sigma22
    z = theta2_branch(p, t1, -1, k)
    u = abs(gm.w(z))
    env = math.exp(min(0.0, kappa * t1)) / (1 + abs(t1))
    # the log G tail error also carries the size of the evaluation point, taken up to ~100
    return max(env, 100.0 / ((1 + abs(t1)) * max(u, 1.0)))


def choose_truncation(p: ModelParams, k: KernelGeometry, gm: GluingMap, tol: float):
    """Smallest ``V`` (bisection) whose tail bound is below ``tol``."""
    lo, hi = 0.0, 1.0
    while _tail_bound(p, k, gm, hi) > tol:
        lo, hi = hi, 2 * hi
        if hi > 40:
            raise TruncationError(f"tail bound cannot reach tol={tol}", _tail_bound(p, k, gm, hi))
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _tail_bound(p, k, gm, mid) > tol:
            lo = mid
        else:
            hi = mid
    return hi


class ContourGrid:
    """Quadrature nodes on R-, ordered from the vertex outwards.

    ``weights`` are quadrature weights for integrals in ``theta1`` (positive,
    since ``theta1`` decreases along the grid and the integrals are taken in
    the orientation vertex to infinity). The ``v``-parameter data used by the
    quadrature engine are kept alongside.
    """

    def __init__(self, p, k, gm, v, wv, panels, truncation_v, tol, achieved_bound):
        self.model = p
        self.geometry = k
        self.gluing = gm
        self.v = v
        self.wv = wv
        self.panels = panels
        self.truncation_v = truncation_v
        self.tol = tol
        self.achieved_bound = achieved_bound
        self.t1, self.dt1_dv, self.z, self.dz_dv, wz, self.du_dv = self.eval_v(v)
        self.dz = self.dz_dv / self.dt1_dv
        self.weights = -wv * self.dt1_dv
        self.truncation_t1 = float(k.theta1_minus - math.sinh(truncation_v) ** 2)
        self.node_count = int(v.size)
        # glued coordinate: real, <= -1, decreasing along the grid
        self.u = wz.real
        self.u_end = float(gm.w(theta2_branch(p, self.truncation_t1, -1, k)).real)

    def eval_v(self, v):
        """Curve data at parameter values ``v``: ``(t1, dt1/dv, z, dz/dv, w(z), du/dv)``."""
        p, k, gm = self.model, self.geometry, self.gluing
        v = np.asarray(v, dtype=float)
        sh, ch = np.sinh(v), np.cosh(v)
        t1 = k.theta1_minus - sh * sh
        dt1 = -2 * sh * ch
        A = -p.det_sigma
        rad = np.sqrt(-A * (k.theta1_plus - t1))
        z = (-(p.sigma12 * t1 + p.mu2) - 1j * sh * rad) / p.sigma22
        drad = A / (2 * rad) * dt1
        dz = (-p.sigma12 * dt1 - 1j * (ch * rad + sh * drad)) / p.sigma22
        wz = np.asarray(gm.w(z))
        du = (np.asarray(gm.w_prime(z)) * dz).real
        return t1, dt1, z, dz, wz, du

    @cached_property
    def panel_slices(self):
        out, start = [], 0
        for n, (a, b) in zip(self.panels, self._panel_edges):
            out.append((start, start + n, a, b))
            start += n
        return out

    @cached_property
    def points(self):
        return [CurvePoint(float(t), complex(z), complex(dz)) for t, z, dz in zip(self.t1, self.z, self.dz)]

    @cached_property
    def diff_matrices(self):
        """Per-panel spectral differentiation matrices in ``v``."""
        out = []
        start = 0
        for n, (a, b) in zip(self.panels, self._panel_edges):
            out.append((start, start + n, _diff_matrix(n, b - a)))
            start += n
        return out

    @cached_property
    def _panel_edges(self):
        e = np.linspace(0.0, self.truncation_v, len(self.panels) + 1)
        return list(zip(e[:-1], e[1:]))

    def derivative_v(self, f):
        """Spectral derivative in ``v`` of samples ``f`` on the grid."""
        f = np.asarray(f)
        out = np.empty_like(f)
        for s, e, D in self.diff_matrices:
            out[s:e] = D @ f[s:e]
        return out

    def csv_rows(self):
        for t, z, wt in zip(self.t1, self.z, self.weights):
            yield f"{t!r},{z.real!r},{z.imag!r},{wt!r}"


def _diff_matrix(n, width):
    x, _ = leggauss(n)
    # Legendre-Vandermonde based differentiation: D = V' V^{-1}
    V = np.polynomial.legendre.legvander(x, n - 1)
    dV = np.zeros_like(V)
    for j in range(n):
        c = np.zeros(n)
        c[j] = 1.0
        dV[:, j] = np.polynomial.legendre.legval(x, np.polynomial.legendre.legder(c))
    return np.linalg.solve(V.T, dV.T).T * (2.0 / width)


def _shape(p, k, v):
    # oscillating envelope of the boundary data: exp(theta . x) dz/dv / (1 + |theta1|)
    sh, ch = np.sinh(v), np.cosh(v)
    t1 = k.theta1_minus - sh * sh
    rad = np.sqrt(p.det_sigma * (k.theta1_plus - t1))
    z = (-(p.sigma12 * t1 + p.mu2) - 1j * sh * rad) / p.sigma22
    dt1 = -2 * sh * ch
    dz = (-p.sigma12 * dt1 - 1j * (ch * rad - sh * p.det_sigma / (2 * rad) * dt1)) / p.sigma22
    return np.exp(t1 * p.x1 + z * p.x2) * dz / (1 + np.abs(t1))


def _resolution_bound(p, k, v_edges, order):
    """A posteriori panel error: one panel against its two halves, relative to the total mass."""
    x, wg = leggauss(order)
    err = 0.0
    mass = 0.0
    for a, b in v_edges:
        m, h = 0.5 * (a + b), 0.5 * (b - a)
        one = np.sum(_shape(p, k, m + h * x) * wg) * h
        half = 0.0
        for c in (a + 0.5 * h, b - 0.5 * h):
            half = half + np.sum(_shape(p, k, c + 0.5 * h * x) * wg) * 0.5 * h
        err += abs(one - half)
        mass += np.sum(np.abs(_shape(p, k, m + h * x)) * wg) * h
    return float(err / max(mass, 1e-300))


def contour_grid(p: ModelParams, k: KernelGeometry | None = None, node_count: int = 512, tol: float = 1e-8):
    k = k or branch_points(p)
    if node_count < PANEL_ORDER:
        raise TruncationError(f"node_count={node_count} is below the minimum of {PANEL_ORDER}", float("inf"))
    gm = GluingMap.from_model(p, k)
    V = choose_truncation(p, k, gm, tol)
    panels = _panel_layout(node_count)
    edges = np.linspace(0.0, V, len(panels) + 1)
    pe = list(zip(edges[:-1], edges[1:]))
    order = min(panels)
    achieved = max(_tail_bound(p, k, gm, V), _resolution_bound(p, k, pe, order))
    if achieved > tol:
        raise TruncationError(
            f"tol={tol} unreachable with {node_count} nodes (achieved bound {achieved:.3g})", achieved
        )
    vs, ws = [], []
    for n, (a, b) in zip(panels, pe):
        x, wg = leggauss(n)
        vs.append(0.5 * (a + b) + 0.5 * (b - a) * x)
        ws.append(0.5 * (b - a) * wg)
    return ContourGrid(p, k, gm, np.concatenate(vs), np.concatenate(ws), panels, V, tol, achieved)


def conj_branch_check(p: ModelParams, k: KernelGeometry | None, t1):
    """``|Theta2^+(t1) - conj(Theta2^-(t1))|`` for real ``t1`` below ``theta1_minus``."""
    return np.abs(theta2_branch(p, t1, +1, k) - np.conj(theta2_branch(p, t1, -1, k)))


__all__ = [
    "CurvePoint",
    "ContourGrid",
    "vertex",
    "hyperbola_residual",
    "branch_abscissa",
    "in_domain",
    "contour_grid",
    "choose_truncation",
]
