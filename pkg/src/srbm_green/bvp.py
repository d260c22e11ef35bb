"""Boundary value problem for psi1: boundary data, index, fundamental solution and the transforms.

Conventions (fixed once and checked by the test-suite against exact values):

* R- is traversed from the vertex to infinity. In the glued plane this is the
  half-line ``(-inf, -1]`` run from ``-1`` to ``-inf``, so its left side is the
  lower half-plane. Points of R- approached from the domain left of R land on
  the upper side, points of R+ on the lower side.
* ``logG`` is the continuous branch of ``log G`` vanishing at the vertex. The
  fundamental solution is ``X(u) = exp((1/2 pi i) int logG(s) (1/(s-u) - 1/s) ds)``
  and ``Y+`` is its left (lower) boundary value.
* ``psi1(theta2) = X(u) ((1/2 pi i) int g(s)/Y+(s) ds/(s-u) + sum_j c_j u^j)``
  with ``u = w(theta2)``. The ``c_j`` vanish unless ``X`` itself decays at
  infinity; they are then fixed by the kernel relation on the real ellipse.
* Right of R the transform is continued with the kernel relation between the
  two roots ``theta2`` and ``p`` of ``gamma(Theta1^-(theta2), .) = 0``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .curve import ContourGrid, contour_grid, in_domain
from .errors import ContractError, DomainError, PoleError, ProximityError
from .gluing import GluingMap
from .kernel import KernelGeometry, branch_points, gamma, gamma1, gamma2, theta1_branch, theta2_branch
from .model import DriftSignCase, ModelParams, Regime, classify
from .quadrature import cauchy_u, plemelj_limits, pv_u, unwrap_log, winding

_TWO_PI_I = 2j * math.pi


def _arr(z):
    return np.asarray(z, dtype=complex)


def _theta1_on_curve(p, k, theta2, theta1):
    return theta1_branch(p, theta2, -1, k) if theta1 is None else theta1


def G_fn(p: ModelParams, theta2, theta1=None, k: KernelGeometry | None = None):
    """``G`` on R; ``theta1`` defaults to ``Theta1^-(theta2)``."""
    k = k or branch_points(p)
    t2 = _arr(theta2)
    t1 = _arr(_theta1_on_curve(p, k, theta2, theta1))
    c2 = np.conj(t2)
    num1, den1 = gamma1(p, (t1, t2)), gamma2(p, (t1, t2))
    num2, den2 = gamma2(p, (t1, c2)), gamma1(p, (t1, c2))
    if np.any(den1 == 0) or np.any(den2 == 0):
        raise PoleError("a denominator of G vanishes on the curve", location=complex(np.ravel(t2)[0]))
    out = (num1 / den1) * (num2 / den2)
    return out[()] if out.ndim == 0 else out


def g_fn(p: ModelParams, theta2, x=None, theta1=None, k: KernelGeometry | None = None):
    """Inhomogeneous term ``g`` on R for the start point ``x`` (defaults to the model's)."""
    k = k or branch_points(p)
    x1, x2 = p.x if x is None else x
    t2 = _arr(theta2)
    t1 = _arr(_theta1_on_curve(p, k, theta2, theta1))
    c2 = np.conj(t2)
    a2, b2 = gamma2(p, (t1, t2)), gamma2(p, (t1, c2))
    b1 = gamma1(p, (t1, c2))
    if np.any(a2 == 0) or np.any(b2 == 0) or np.any(b1 == 0):
        raise PoleError("a denominator of g vanishes on the curve", location=complex(np.ravel(t2)[0]))
    e_a = np.exp(t1 * x1 + t2 * x2) / a2
    if np.all(t1.imag == 0):
        # the two terms are complex conjugates: their difference is 2i Im, exactly 0 at the vertex
        bracket = 2j * e_a.imag
    else:
        bracket = e_a - np.exp(t1 * x1 + c2 * x2) / b2
    out = (b2 / b1) * bracket
    return out[()] if out.ndim == 0 else out


def G_at_infinity(p: ModelParams) -> complex:
    """Limit of ``G`` along R- towards infinity."""
    rho = complex(-p.sigma12, math.sqrt(p.det_sigma)) / p.sigma22
    q = (1 + p.r21 * rho) / (p.r12 + rho)
    return q / q.conjugate()


def index_chi(p: ModelParams, k: KernelGeometry | None = None) -> int:
    """Index from the sign of ``gamma1 gamma2`` at ``(theta1^-, vertex)``."""
    k = k or branch_points(p)
    t1 = k.theta1_minus
    v = -(p.sigma12 * t1 + p.mu2) / p.sigma22
    prod = gamma1(p, (t1, v)) * gamma2(p, (t1, v))
    return 1 if prod > 0 else 0


@dataclass
class BoundaryData:
    G: np.ndarray
    g: np.ndarray
    logG: np.ndarray
    d: float
    Delta: float
    chi_sign: int
    chi_wind: int
    logG_inf: complex
    vertex_G: complex


def _vertex_G(p, k):
    # limit of G at the vertex, probed just off it along R-
    v = 1e-7
    t1 = k.theta1_minus - math.sinh(v) ** 2
    z = theta2_branch(p, t1, -1, k)
    return complex(G_fn(p, z, t1, k))


def boundary_data(p: ModelParams, grid: ContourGrid, x=None) -> BoundaryData:
    k = grid.geometry
    G = G_fn(p, grid.z, grid.t1, k)
    g = g_fn(p, grid.z, x, grid.t1, k)
    G0 = _vertex_G(p, k)
    d = float(np.angle(G0))
    if d == -math.pi:
        d = math.pi
    # unwrap from the vertex value so that logG(vertex) = i d
    logG = unwrap_log(np.concatenate([[G0], G]))[1:]
    logG = logG - 1j * (np.angle(G0) - d)
    Ginf = G_at_infinity(p)
    base = cmath.log(Ginf)
    kshift = round((logG[-1].imag - base.imag) / (2 * math.pi))
    log_inf = complex(base.real, base.imag + 2 * math.pi * kshift)
    Delta = log_inf.imag - d
    chi_w = math.floor((d + Delta) / (2 * math.pi))
    return BoundaryData(G, g, logG, d, Delta, index_chi(p, k), chi_w, log_inf, G0)


def winding_check(bd: BoundaryData, orientation: int = 1) -> int:
    """``floor((d + Delta)/2 pi)`` with R- run vertex to infinity (``orientation=1``) or reversed."""
    return math.floor((bd.d + orientation * bd.Delta) / (2 * math.pi))


def winding_of_samples(bd: BoundaryData) -> float:
    """Argument variation of ``G`` over the grid samples (a resolution check)."""
    return winding(np.concatenate([[bd.vertex_G], bd.G]))


class Psi1Solver:
    """Solution of the boundary value problem for one model and start point."""

    def __init__(self, p: ModelParams, nodes: int = 512, tol: float = 1e-8):
        cl = classify(p)
        if cl.regime is not Regime.TRANSIENT:
            raise DomainError(f"transforms are infinite outside the transient regime ({cl.regime})")
        self.model = p
        self.caveat = cl.drift_sign_case is not DriftSignCase.PP
        self.k = branch_points(p)
        self.gluing = GluingMap.from_model(p, self.k)
        self.grid = contour_grid(p, self.k, nodes, tol)
        self.bd = boundary_data(p, self.grid)
        grid, bd = self.grid, self.bd
        lam = bd.logG
        self._lam_over_s = np.sum(lam * grid.du_dv * grid.wv / grid.u)
        tail = -bd.logG_inf * np.log((grid.u_end - grid.u) / grid.u_end)
        pv = pv_u(grid, lam)
        self.log_X_below = 0.5 * lam + (pv - self._lam_over_s + tail) / _TWO_PI_I
        self.X_below = np.exp(self.log_X_below)
        self.X_above = np.exp(self.log_X_below - lam)
        self.density = bd.g / self.X_below
        # number of homogeneous solutions u^j X(u) that vanish at infinity
        rate = bd.Delta / (2 * math.pi)
        self.n_free = max(0, math.ceil(rate - 1e-9)) if rate > 1e-9 else 0
        self.constants = np.zeros(self.n_free, dtype=complex)

    # glued-plane evaluations -------------------------------------------------
    def log_X(self, zu):
        grid, bd = self.grid, self.bd
        zu = complex(zu)
        val = cauchy_u(grid, self.bd.logG, zu) - self._lam_over_s - bd.logG_inf * cmath.log((grid.u_end - zu) / grid.u_end)
        return val / _TWO_PI_I

    def Phi_parts(self, zu):
        """``(particular, [homogeneous])`` values at a glued point off the contour."""
        X = cmath.exp(self.log_X(zu))
        part = X * cauchy_u(self.grid, self.density, zu) / _TWO_PI_I
        return part, [X * zu**j for j in range(self.n_free)]

    def Phi(self, zu):
        part, hom = self.Phi_parts(zu)
        return part + sum(c * h for c, h in zip(self.constants, hom))

    def boundary_values(self):
        """psi1 on R- and on R+ (limits from the domain) at the grid nodes."""
        cb, ca = plemelj_limits(self.grid, self.density)
        below = self.X_below * cb
        above = self.X_above * ca
        for j, c in enumerate(self.constants):
            below = below + c * self.X_below * self.grid.u**j
            above = above + c * self.X_above * self.grid.u**j
        # above: R- side; below: R+ side
        return above, below

    # theta2-plane evaluations ------------------------------------------------
    def parts(self, theta2):
        """``psi1 = particular + sum c_j hom_j`` at ``theta2`` with a continuation flag."""
        t2 = complex(theta2)
        vx = self.gluing.vertex()
        if abs(t2 - vx) <= 1e-13 * (1 + abs(vx)):
            part, hom = self.Phi_parts(-1.0)
            return part, hom, False
        if in_domain(self.model, self.k, t2):
            part, hom = self.Phi_parts(self.gluing.w(t2))
            return part, hom, False
        return (*self._continued(t2), True)

    def _continued(self, q):
        p, k = self.model, self.k
        if q.imag == 0 and q.real >= self.k.theta2_plus:
            raise DomainError(f"theta2={q} lies on the cut [{self.k.theta2_plus}, inf)")
        t1 = complex(theta1_branch(p, q, -1, k))
        # other root of gamma(t1, .) = 0
        other = -2 * (p.sigma12 * t1 + p.mu2) / p.sigma22 - q
        if not in_domain(p, k, other):
            raise ProximityError(f"theta2={q} is on the curve; use boundary_values for one-sided limits")
        part, hom = self.Phi_parts(self.gluing.w(other))
        x1, x2 = p.x
        gq1, gq2 = gamma1(p, (t1, q)), gamma2(p, (t1, q))
        gp1, gp2 = gamma1(p, (t1, other)), gamma2(p, (t1, other))
        if gq1 == 0:
            raise PoleError("gamma1 vanishes at the continued point", location=q)
        if gp2 == 0:
            raise PoleError("gamma2 vanishes at the reflected point", location=other)
        ratio = gq2 / gp2
        part_q = (ratio * (gp1 * part + cmath.exp(t1 * x1 + other * x2)) - cmath.exp(t1 * x1 + q * x2)) / gq1
        hom_q = [ratio * gp1 * h / gq1 for h in hom]
        return part_q, hom_q

    def __call__(self, theta2):
        part, hom, _ = self.parts(theta2)
        return part + sum(c * h for c, h in zip(self.constants, hom))

    def Y(self, theta2, chi=0):
        zu = self.gluing.w(theta2)
        return zu**chi * cmath.exp(self.log_X(zu))


def ellipse_arc_points(p: ModelParams, k: KernelGeometry | None = None, n: int = 9):
    """Real points of the ellipse on the arc through its leftmost and lowest points.

    The arc stops short of the topmost and rightmost points, where one of the
    transforms reaches its branch point; the kernel relation
    ``gamma1 psi1 + gamma2 psi2 + exp(theta . x) = 0`` holds all along it.
    """
    k = k or branch_points(p)
    lo, hi = k.theta1_minus, k.theta1_plus
    top = -(p.sigma12 * k.theta2_plus + p.mu1) / p.sigma11
    pts = []
    for f in np.linspace(0.1, 0.9, n):
        t1 = lo + f * (hi - lo)
        pts.append((t1, complex(theta2_branch(p, t1, -1, k)).real))
    for f in np.linspace(0.1, 0.9, n):
        t1 = lo + f * (top - lo)
        pts.append((t1, complex(theta2_branch(p, t1, +1, k)).real))
    return pts


class TransformSolver:
    """psi1 and psi2 of one model, with any free constants fixed jointly."""

    def __init__(self, p: ModelParams, nodes: int = 512, tol: float = 1e-8):
        self.model = p
        self.s1 = Psi1Solver(p, nodes, tol)
        self.s2 = Psi1Solver(p.swapped(), nodes, tol)
        self.fit_residual = 0.0
        if self.s1.n_free or self.s2.n_free:
            self._fit()

    def _fit(self):
        p, k = self.model, self.s1.k
        rows, rhs = [], []
        for t1, t2 in ellipse_arc_points(p, k):
            try:
                a1, h1, _ = self.s1.parts(t2)
                a2, h2, _ = self.s2.parts(t1)
            except (ProximityError, PoleError, DomainError):
                continue
            g1, g2 = gamma1(p, (t1, t2)), gamma2(p, (t1, t2))
            e = math.exp(t1 * p.x1 + t2 * p.x2)
            rows.append([g1 * h for h in h1] + [g2 * h for h in h2])
            rhs.append(-(g1 * a1 + g2 * a2 + e))
        A = np.array(rows, dtype=complex)
        b = np.array(rhs, dtype=complex)
        sol, *_ = np.linalg.lstsq(A, b, rcond=None)
        n1 = self.s1.n_free
        self.s1.constants = sol[:n1]
        self.s2.constants = sol[n1:]
        self.fit_residual = float(np.max(np.abs(A @ sol - b))) if len(b) else 0.0

    def psi1(self, theta2):
        return complex(self.s1(theta2))

    def psi2(self, theta1):
        return complex(self.s2(theta1))

    def psi(self, theta):
        return psi_from_boundary(self.model, theta, self.psi1(theta[1]), self.psi2(theta[0]))


@lru_cache(maxsize=32)
def solver(p: ModelParams, nodes: int = 512, tol: float = 1e-8) -> TransformSolver:
    return TransformSolver(p, nodes, tol)


def _with_x(p, x):
    return p if x is None else p.with_start(*x)


def Y_of(p: ModelParams, grid: ContourGrid, bd: BoundaryData, theta2, chi: int = 0):
    """Fundamental solution ``w^chi exp(K[log G])`` at ``theta2`` off the curve.

    The evaluators use ``chi = 0``; other values are available for comparison.
    """
    gm = grid.gluing
    zu = complex(gm.w(theta2))
    lam_s = np.sum(bd.logG * grid.du_dv * grid.wv / grid.u)
    val = cauchy_u(grid, bd.logG, zu) - lam_s - bd.logG_inf * cmath.log((grid.u_end - zu) / grid.u_end)
    return zu**chi * cmath.exp(val / _TWO_PI_I)


def Y_plus(p: ModelParams, grid: ContourGrid, bd: BoundaryData, t0, chi: int = 0):
    """Left boundary value of ``Y`` at the grid node ``t0`` (index or curve point)."""
    i = t0 if isinstance(t0, (int, np.integer)) else int(np.argmin(np.abs(grid.z - getattr(t0, "z", t0))))
    lam = bd.logG
    lam_s = np.sum(lam * grid.du_dv * grid.wv / grid.u)
    tail = -bd.logG_inf * np.log((grid.u_end - grid.u[i]) / grid.u_end)
    pv = pv_u(grid, lam)[i]
    return grid.u[i] ** chi * cmath.exp(0.5 * lam[i] + (pv - lam_s + tail) / _TWO_PI_I)


def psi1(p: ModelParams, x=None, theta2=0.0, nodes: int = 512, tol: float = 1e-8) -> complex:
    return solver(_with_x(p, x), nodes, tol).psi1(theta2)


def psi2(p: ModelParams, x=None, theta1=0.0, nodes: int = 512, tol: float = 1e-8) -> complex:
    return solver(_with_x(p, x), nodes, tol).psi2(theta1)


def psi_from_boundary(p: ModelParams, theta, v1, v2):
    t1, t2 = complex(theta[0]), complex(theta[1])
    gm = gamma(p, (t1, t2))
    if abs(gm) < 1e-12 * (1 + abs(t1) ** 2 + abs(t2) ** 2):
        raise PoleError(
            "gamma(theta) = 0: removable singularity, evaluate at a perturbed point", location=(t1, t2)
        )
    e = cmath.exp(t1 * p.x1 + t2 * p.x2)
    return -(gamma1(p, (t1, t2)) * v1 + gamma2(p, (t1, t2)) * v2 + e) / gm


def psi_interior(p: ModelParams, x=None, theta=(0.0, 0.0), nodes: int = 512, tol: float = 1e-8) -> complex:
    q = _with_x(p, x)
    t1, t2 = complex(theta[0]), complex(theta[1])
    gm = gamma(q, (t1, t2))
    if abs(gm) < 1e-12 * (1 + abs(t1) ** 2 + abs(t2) ** 2):
        raise PoleError(
            "gamma(theta) = 0: removable singularity, evaluate at a perturbed point", location=(t1, t2)
        )
    return solver(q, nodes, tol).psi((t1, t2))


# decoupling ------------------------------------------------------------------


def _angle_from_tan(num, den):
    # angle in (0, pi) with tan = num/den, den = 0 giving pi/2
    if den == 0:
        return math.pi / 2
    a = math.atan(num / den)
    return a if a > 0 else a + math.pi


def decoupling_condition(p: ModelParams, tol: float = 1e-9, span: int = 8):
    """``(satisfied, epsilon, delta)`` for the lattice condition ``eps + delta in beta Z + pi Z``."""
    beta = branch_points(p).beta
    sb, cb = math.sin(beta), math.cos(beta)
    eps = _angle_from_tan(sb, p.r21 * math.sqrt(p.sigma11 / p.sigma22) + cb)
    dlt = _angle_from_tan(sb, p.r12 * math.sqrt(p.sigma22 / p.sigma11) + cb)
    s = eps + dlt
    ok = any(abs(s - m * beta - n * math.pi) < tol for m in range(-span, span + 1) for n in range(-span, span + 1))
    return ok, eps, dlt


@dataclass(frozen=True)
class RationalFunction:
    """``coefficient * prod(z - zeros) / prod(z - poles)``."""

    zeros: tuple = ()
    poles: tuple = ()
    coefficient: complex = 1.0

    def __call__(self, z):
        z = _arr(z)
        out = np.full(z.shape, complex(self.coefficient))
        for a in self.zeros:
            out = out * (z - a)
        for b in self.poles:
            out = out / (z - b)
        return out[()] if out.ndim == 0 else out

    @property
    def vanishes_at_infinity(self):
        return len(self.zeros) < len(self.poles)


def psi1_decoupled(p: ModelParams, x, F: RationalFunction, theta2, nodes: int = 512, tol: float = 1e-8,
                   contract_tol: float = 1e-8) -> complex:
    """psi1 through a decoupling function ``F`` with ``G = F(t)/F(conj t)`` on the curve."""
    q = _with_x(p, x)
    base = solver(q, nodes, tol).s1
    grid, bd = base.grid, base.bd
    if not F.vanishes_at_infinity:
        raise ContractError("F must tend to 0 at infinity", residual=float("inf"))
    Fz, Fc = F(grid.z), F(np.conj(grid.z))
    resid = float(np.max(np.abs(bd.G - Fz / Fc) / np.maximum(1.0, np.abs(bd.G))))
    if not resid <= contract_tol:
        raise ContractError(f"F violates the decoupling identity on the grid (max residual {resid:.3g})", resid)
    dens = Fc * bd.g

    def direct(t2):
        zu = complex(grid.gluing.w(t2))
        return complex(cauchy_u(grid, dens, zu) / _TWO_PI_I / F(t2))

    t2 = complex(theta2)
    if in_domain(q, base.k, t2):
        return direct(t2)
    # continuation right of the curve, as for psi1
    k = base.k
    t1 = complex(theta1_branch(q, t2, -1, k))
    other = -2 * (q.sigma12 * t1 + q.mu2) / q.sigma22 - t2
    if not in_domain(q, k, other):
        raise ProximityError(f"theta2={t2} is on the curve")
    val = direct(other)
    gq1, gq2 = gamma1(q, (t1, t2)), gamma2(q, (t1, t2))
    gp1, gp2 = gamma1(q, (t1, other)), gamma2(q, (t1, other))
    return (gq2 / gp2 * (gp1 * val + cmath.exp(t1 * q.x1 + other * q.x2)) - cmath.exp(t1 * q.x1 + t2 * q.x2)) / gq1
