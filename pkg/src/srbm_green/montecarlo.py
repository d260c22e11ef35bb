"""Monte Carlo oracle: discretized SRBM paths with oblique reflection.

Each step solves a 2x2 linear complementarity problem for the local-time
increments. The lowest point of the step is the sampled Brownian-bridge
minimum of each coordinate rather than the end point, which removes the
``sqrt(dt)`` bias of plain projection (see :mod:`._mc_kernels`). Estimates are
averages of independent per-path values; the stream of path ``k`` depends
only on ``(seed, k)``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import _mc_kernels as K
from ._accel import HAVE_NUMBA, numba, numba_enabled
from .errors import DomainError, ReflectionError
from .model import ModelParams, convergence_domain, existence_diagnostics

# chunks are the unit of parallel work; fixed so results never depend on the thread count
_CHUNKS = 64


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    t_max: float = 30.0
    paths: int = 100_000
    seed: int = 42

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.dt <= self.t_max:
            raise ValueError(f"dt={self.dt} exceeds tMax={self.t_max}")
        if int(self.paths) < 1:
            raise ValueError(f"paths must be >= 1, got {self.paths}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def steps(self):
        return int(round(self.t_max / self.dt))


@dataclass(frozen=True)
class McEstimate:
    mean: complex | float
    stderr: float
    paths: int
    config: SimConfig
    # additive bound on the time-truncation bias, already folded into stderr
    bias_bound: float = 0.0
    sample_stderr: float = 0.0

    def within(self, value, k=3.0):
        return abs(self.mean - value) <= k * self.stderr


@dataclass
class PathState:
    z: np.ndarray = field(default_factory=lambda: np.zeros(2))
    l: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def advance(self, p: ModelParams, dw, dt):
        znew, dl = reflect_step(p, self.z, dw, dt)
        self.z = znew
        self.l = self.l + dl
        return self


def _threads():
    n = os.environ.get("SRBM_THREADS")
    if n and HAVE_NUMBA:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def reflect_step(p: ModelParams, z, dw, dt):
    """One implicit Skorokhod step: ``(z_new, dL)`` with ``z_new = z + dw + mu dt + R dL``.

    All four active sets are examined; the feasible one is returned.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError(f"position must lie in the quadrant, got {z}")
    free = z + np.asarray(dw, dtype=float) + np.array([p.mu1, p.mu2]) * dt
    sols = feasible_active_sets(p, free)
    if not sols:
        raise ReflectionError(
            f"no complementarity solution for free step {free} with r12={p.r12}, r21={p.r21}; "
            "the existence condition r12 > 0 or r21 > 0 or r12 r21 < 1 is required"
        )
    dl = sols[0][1]
    R = np.array([[1.0, p.r12], [p.r21, 1.0]])
    znew = np.maximum(free + R @ dl, 0.0)
    return znew, dl


def feasible_active_sets(p: ModelParams, q):
    """All ``(active_set, dL)`` solving the complementarity problem for ``w = q + R dL``."""
    q1, q2 = float(q[0]), float(q[1])
    tol = -1e-13 * (1 + abs(q1) + abs(q2))
    out = []
    if q1 >= 0 and q2 >= 0:
        out.append(((), np.zeros(2)))
    if -q1 >= 0 and q2 - p.r21 * q1 >= tol:
        out.append(((1,), np.array([-q1, 0.0])))
    if -q2 >= 0 and q1 - p.r12 * q2 >= tol:
        out.append(((2,), np.array([0.0, -q2])))
    det = 1 - p.r12 * p.r21
    if det != 0:
        l1 = (-q1 + p.r12 * q2) / det
        l2 = (-q2 + p.r21 * q1) / det
        if l1 >= 0 and l2 >= 0 and not (l1 == 0 and l2 == 0 and out):
            out.append(((1, 2), np.array([l1, l2])))
    # a degenerate solution (dL = 0 through a nonempty set) duplicates an earlier one
    uniq = []
    for s, dl in out:
        if not any(np.array_equal(dl, d) for _, d in uniq):
            uniq.append((s, dl))
    return uniq


# ----------------------------------------------------------------------------


def _chol(p):
    return np.linalg.cholesky(np.array([[p.sigma11, p.sigma12], [p.sigma12, p.sigma22]]))


@dataclass
class RawRun:
    """Per-path accumulators of one simulation pass."""

    interior: np.ndarray
    face1: np.ndarray
    face2: np.ndarray
    z_end: np.ndarray
    local_time: np.ndarray
    hist_sum: np.ndarray
    hist_sq: np.ndarray
    config: SimConfig


def run_paths(p: ModelParams, cfg: SimConfig, theta=(), theta_face1=(), theta_face2=(), hist=None,
              x=None) -> RawRun:
    """Simulate ``cfg.paths`` paths once and accumulate every requested estimator.

    ``theta`` lists interior points ``(theta1, theta2)``; ``theta_face1`` lists
    ``theta2`` values for face 1 (``Z1 = 0``) and ``theta_face2`` ``theta1``
    values for face 2. ``hist`` is ``(x0, x1, y0, y1, nx, ny)``.
    """
    if not existence_diagnostics(p)[0]:
        raise ReflectionError("the reflection matrix violates the existence condition")
    z0 = np.array(p.x if x is None else x, dtype=float)
    th = np.array(theta, dtype=complex).reshape(-1, 2)
    t1 = np.array(theta_face1, dtype=complex).reshape(-1)
    t2 = np.array(theta_face2, dtype=complex).reshape(-1)
    h = np.array(hist if hist is not None else (0, 1, 0, 1, 0, 0), dtype=float)
    mu = np.array([p.mu1, p.mu2])
    sig = np.array([p.sigma11, p.sigma22])
    args = (z0, mu, _chol(p), sig, float(p.r12), float(p.r21), float(cfg.dt), cfg.steps,
            np.uint64(cfg.seed), int(cfg.paths), th, t1, t2, h, _CHUNKS)
    if numba_enabled():
        _threads()
        out = K._paths_2d(*args)
    else:
        out = K.paths_2d_numpy(*args)
    acc, b1, b2, zend, lt, hs, hq, failed = out
    if int(np.sum(failed)):
        raise ReflectionError(f"{int(np.sum(failed))} steps had no complementarity solution")
    return RawRun(acc, b1, b2, zend, lt, hs.sum(axis=0), hq.sum(axis=0), cfg)


def _summary(values, cfg, bias=0.0):
    v = np.asarray(values)
    n = v.shape[0]
    mean = np.sum(v) / n
    if n > 1:
        var = float(np.sum(np.abs(v - mean) ** 2) / (n - 1))
    else:
        var = 0.0
    se = math.sqrt(var / n)
    m = complex(mean) if np.iscomplexobj(v) else float(mean)
    return McEstimate(m, se + bias, n, cfg, bias, se)


def interior_tail_bound(p: ModelParams, theta, z_end):
    """Mean over paths of ``exp(Re theta . z_end) / |Re theta . mu|``."""
    a, b = complex(theta[0]).real, complex(theta[1]).real
    rate = abs(a * p.mu1 + b * p.mu2)
    return float(np.mean(np.exp(a * z_end[:, 0] + b * z_end[:, 1]))) / rate


def face_tail_bound(p: ModelParams, face, theta, z_end):
    """Tail proxy for the face-``face`` local time after ``tMax``.

    The one-dimensional expected future local time ``(s/2m) exp(-2 m z / s)`` of
    the face coordinate, weighted by ``exp(Re theta y)`` at the current height of
    the other coordinate. This is exact without reflection coupling and a
    heuristic otherwise; infinite when the face coordinate has no positive drift.
    """
    i = face - 1
    s = p.sigma11 if face == 1 else p.sigma22
    m = p.mu1 if face == 1 else p.mu2
    zi, zj = z_end[:, i], z_end[:, 1 - i]
    if m <= 0:
        return float("inf")
    w = np.exp(min(complex(theta).real, 0.0) * zj)
    return float(np.mean(s / (2 * m) * np.exp(-2 * m * zi / s) * w))


def _check_interior(p, theta):
    a, b = complex(theta[0]).real, complex(theta[1]).real
    if not a * p.mu1 + b * p.mu2 < 0:
        raise DomainError(f"Re theta . mu must be negative, got {a * p.mu1 + b * p.mu2}")
    box = convergence_domain(p).psi_box
    if not (a < box[0] or (a == box[0] == 0)) or not (b < box[1] or (b == box[1] == 0)):
        raise DomainError(f"Re theta=({a}, {b}) outside the convergence box {box}")


def _check_face(p, face, theta):
    cd = convergence_domain(p)
    bound, strict = (cd.psi1_max_re, cd.psi1_strict) if face == 1 else (cd.psi2_max_re, cd.psi2_strict)
    r = complex(theta).real
    if r > bound or (strict and r == bound):
        raise DomainError(f"Re theta={r} beyond the convergence abscissa {bound} of face {face}")


def estimate_psi(p: ModelParams, x, theta, cfg: SimConfig) -> McEstimate:
    """``E_x int_0^tMax exp(theta . Z) dt`` with the tail bound added to the error."""
    _check_interior(p, theta)
    run = run_paths(p, cfg, theta=[theta], x=x)
    return interior_estimate(p, run, 0, theta)


def interior_estimate(p, run: RawRun, j, theta):
    bias = interior_tail_bound(p, theta, run.z_end)
    return _summary(run.interior[:, j], run.config, bias)


def face_estimate(p, run: RawRun, face, j, theta):
    vals = (run.face1 if face == 1 else run.face2)[:, j]
    bias = face_tail_bound(p, face, theta, run.z_end)
    return _summary(vals, run.config, bias)


def estimate_psi_boundary(p: ModelParams, x, i: int, theta, cfg: SimConfig) -> McEstimate:
    """``E_x int exp(theta Z_j) dL_i`` on face ``i`` (``theta`` is the other coordinate's variable)."""
    if i not in (1, 2):
        raise ValueError(f"face index must be 1 or 2, got {i}")
    _check_face(p, i, theta)
    kw = {"theta_face1": [theta]} if i == 1 else {"theta_face2": [theta]}
    run = run_paths(p, cfg, x=x, **kw)
    return face_estimate(p, run, i, 0, theta)


def occupation_histogram(p: ModelParams, x, box_grid, cfg: SimConfig):
    """Mean occupation time of each box of ``box_grid = (x0, x1, y0, y1, nx, ny)``.

    Returns an ``(nx, ny)`` object array of :class:`McEstimate`.
    """
    x0, x1, y0, y1, nx, ny = box_grid
    nx, ny = int(nx), int(ny)
    if not (x1 > x0 and y1 > y0 and nx > 0 and ny > 0):
        raise ValueError(f"malformed box grid {box_grid}")
    run = run_paths(p, cfg, x=x, hist=(x0, x1, y0, y1, nx, ny))
    return _hist_estimates(run.hist_sum, run.hist_sq, cfg).reshape(nx, ny)


def _hist_estimates(hsum, hsq, cfg):
    n = cfg.paths
    out = np.empty(hsum.shape[0], dtype=object)
    for b in range(hsum.shape[0]):
        mean = hsum[b] / n
        var = max(hsq[b] / n - mean * mean, 0.0) * n / max(n - 1, 1)
        out[b] = McEstimate(float(mean), math.sqrt(var / n), n, cfg, 0.0, math.sqrt(var / n))
    return out


# ----------------------------------------------------------------------------
# one dimension


@dataclass
class Dim1Run:
    psi: list
    occupation: np.ndarray
    bin_edges: np.ndarray
    local_time: McEstimate
    config: SimConfig


def simulate_1d(sigma2: float, mu: float, x0: float, cfg: SimConfig, theta=(-1.0,), hist=(0.0, 3.0, 40)) -> Dim1Run:
    """Reflected Brownian motion ``x0 + sigma W + mu t + L`` on the half-line.

    Returns estimates of ``psi(theta)`` for each ``theta``, the occupation
    histogram on ``hist = (a, b, bins)`` (mean time per bin) and ``E L(tMax)``.
    """
    if not mu > 0:
        raise DomainError(f"mu={mu} <= 0: the one-dimensional process is not transient")
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    if x0 < 0:
        raise ValueError(f"x0 must be >= 0, got {x0}")
    th = np.array(theta, dtype=complex).reshape(-1)
    if np.any(th.real >= 0):
        raise DomainError("Re theta must be negative")
    h = np.array(hist, dtype=float)
    args = (float(x0), float(mu), float(sigma2), float(cfg.dt), cfg.steps, np.uint64(cfg.seed),
            int(cfg.paths), th, h, _CHUNKS)
    if numba_enabled():
        _threads()
        acc, xend, lt, hs, hq = K._paths_1d(*args)
    else:
        acc, xend, lt, hs, hq = K.paths_1d_numpy(*args)
    psis = []
    for j, t in enumerate(th):
        bias = float(np.mean(np.exp(t.real * xend))) / abs(t.real * mu)
        psis.append(_summary(acc[:, j], cfg, bias))
    lbias = float(np.mean(sigma2 / (2 * mu) * np.exp(-2 * mu * xend / sigma2)))
    occ = _hist_estimates(hs.sum(axis=0), hq.sum(axis=0), cfg) if int(h[2]) else np.empty(0, dtype=object)
    edges = np.linspace(h[0], h[1], int(h[2]) + 1) if int(h[2]) else np.empty(0)
    return Dim1Run(psis, occ, edges, _summary(lt, cfg, lbias), cfg)
