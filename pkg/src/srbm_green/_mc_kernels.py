"""Path kernels for the simulation oracle.

Two implementations share one algorithm: scalar per-path loops compiled with
numba, and a numpy version vectorized across paths. Both draw from the same
counter-based streams (xoshiro256** seeded by splitmix64 of ``seed ^ path``),
so a path is the same object whichever backend or thread runs it.

Step scheme: the free increment ``D = sqrt(dt) L N + mu dt`` is drawn, the
minimum of each coordinate's Brownian bridge over the step is sampled exactly,
and the 2x2 complementarity problem is solved with the bridge minima as the
lowest reachable point. In one dimension this is exact in law.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import njit, numba, HAVE_NUMBA

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO53 = 1.0 / 9007199254740992.0

prange = numba.prange if HAVE_NUMBA else range


# ----------------------------------------------------------------------------
# scalar kernels (numba)


@njit(cache=True, inline="always")
def _splitmix(x):
    x = x + np.uint64(0x9E3779B97F4A7C15)
    z = x
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x, z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True)
def _seed_state(seed, path, st):
    x = np.uint64(seed) ^ np.uint64(path)
    for j in range(4):
        x, st[j] = _splitmix(x)


@njit(cache=True, inline="always")
def _uniform(st):
    s0, s1, s2, s3 = st[0], st[1], st[2], st[3]
    r = _rotl(s1 * np.uint64(5), 7) * np.uint64(9)
    t = s1 << np.uint64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    st[0], st[1], st[2], st[3] = s0, s1, s2, s3
    # open interval (0, 1)
    return (float(r >> np.uint64(11)) + 0.5) * 1.1102230246251565e-16


@njit(cache=True, inline="always")
def _normal_pair(st):
    # Marsaglia polar method
    while True:
        a = 2.0 * _uniform(st) - 1.0
        b = 2.0 * _uniform(st) - 1.0
        r = a * a + b * b
        if 0.0 < r < 1.0:
            f = math.sqrt(-2.0 * math.log(r) / r)
            return a * f, b * f


@njit(cache=True, inline="always")
def _bridge_low(z, d, var, st):
    # z + minimum over the step of a Brownian bridge from 0 to d with variance var = sigma^2 dt.
    # The minimum reaches -z only if u < exp(-2 z (z + d) / var); uniforms are >= 2^-54,
    # so beyond exponent 40 no uniform is drawn and z itself is returned.
    if 2.0 * z * (z + d) > 40.0 * var:
        return z
    return z + 0.5 * (d - math.sqrt(d * d - 2.0 * var * math.log(_uniform(st))))


@njit(cache=True, inline="always")
def lcp2(q1, q2, r12, r21):
    """Solve ``w = q + R l >= 0, l >= 0, w l = 0`` for ``R = [[1, r12], [r21, 1]]``.

    Returns ``(l1, l2, ok)``; the active sets are tried in the order
    none, {1}, {2}, {1, 2}.
    """
    tol = -1e-13 * (1.0 + abs(q1) + abs(q2))
    if q1 >= 0.0 and q2 >= 0.0:
        return 0.0, 0.0, True
    l1 = -q1
    if l1 >= 0.0 and q2 + r21 * l1 >= tol:
        return l1, 0.0, True
    l2 = -q2
    if l2 >= 0.0 and q1 + r12 * l2 >= tol:
        return 0.0, l2, True
    det = 1.0 - r12 * r21
    if det != 0.0:
        l1 = (-q1 + r12 * q2) / det
        l2 = (-q2 + r21 * q1) / det
        if l1 >= 0.0 and l2 >= 0.0:
            return l1, l2, True
    return 0.0, 0.0, False


@njit(cache=True, parallel=True)
def _paths_2d(z0, mu, chol, sig, r12, r21, dt, nsteps, seed, npaths,
              th_int, th_b1, th_b2, hist, nchunks):
    m, n1, n2 = th_int.shape[0], th_b1.shape[0], th_b2.shape[0]
    acc_int = np.zeros((npaths, m), dtype=np.complex128)
    acc_b1 = np.zeros((npaths, n1), dtype=np.complex128)
    acc_b2 = np.zeros((npaths, n2), dtype=np.complex128)
    zend = np.zeros((npaths, 2))
    ltot = np.zeros((npaths, 2))
    nx, ny = int(hist[4]), int(hist[5])
    nbox = nx * ny
    hsum = np.zeros((nchunks, max(nbox, 1)))
    hsq = np.zeros((nchunks, max(nbox, 1)))
    failed = np.zeros(nchunks, dtype=np.int64)
    per = (npaths + nchunks - 1) // nchunks
    sq = math.sqrt(dt)
    v1, v2 = sig[0] * dt, sig[1] * dt
    ra = th_int.real.copy()
    real_int = np.all(th_int.imag == 0.0)
    for c in prange(nchunks):
        st = np.zeros(4, dtype=np.uint64)
        occ = np.zeros(max(nbox, 1))
        for path in range(c * per, min((c + 1) * per, npaths)):
            _seed_state(seed, path, st)
            z1, z2 = z0[0], z0[1]
            e_prev = np.empty(m, dtype=np.complex128)
            a_loc = np.zeros(m, dtype=np.complex128)
            for j in range(m):
                e_prev[j] = np.exp(th_int[j, 0] * z1 + th_int[j, 1] * z2)
            if nbox > 0:
                occ[:] = 0.0
            for _ in range(nsteps):
                g1, g2 = _normal_pair(st)
                d1 = sq * (chol[0, 0] * g1) + mu[0] * dt
                d2 = sq * (chol[1, 0] * g1 + chol[1, 1] * g2) + mu[1] * dt
                q1 = _bridge_low(z1, d1, v1, st)
                q2 = _bridge_low(z2, d2, v2, st)
                l1, l2, ok = lcp2(q1, q2, r12, r21)
                if not ok:
                    failed[c] += 1
                n1z = max(z1 + d1 + l1 + r12 * l2, 0.0)
                n2z = max(z2 + d2 + r21 * l1 + l2, 0.0)
                for j in range(m):
                    if real_int:
                        e = math.exp(ra[j, 0] * n1z + ra[j, 1] * n2z) + 0j
                    else:
                        e = np.exp(th_int[j, 0] * n1z + th_int[j, 1] * n2z)
                    a_loc[j] += 0.5 * (e_prev[j] + e) * dt
                    e_prev[j] = e
                if l1 > 0.0:
                    mid = 0.5 * (z2 + n2z)
                    for j in range(n1):
                        acc_b1[path, j] += np.exp(th_b1[j] * mid) * l1
                if l2 > 0.0:
                    mid = 0.5 * (z1 + n1z)
                    for j in range(n2):
                        acc_b2[path, j] += np.exp(th_b2[j] * mid) * l2
                if nbox > 0:
                    ix = int(math.floor((n1z - hist[0]) / (hist[1] - hist[0]) * nx))
                    iy = int(math.floor((n2z - hist[2]) / (hist[3] - hist[2]) * ny))
                    if 0 <= ix < nx and 0 <= iy < ny:
                        occ[ix * ny + iy] += dt
                ltot[path, 0] += l1
                ltot[path, 1] += l2
                z1, z2 = n1z, n2z
            acc_int[path, :] = a_loc
            zend[path, 0] = z1
            zend[path, 1] = z2
            if nbox > 0:
                for b in range(nbox):
                    hsum[c, b] += occ[b]
                    hsq[c, b] += occ[b] * occ[b]
    return acc_int, acc_b1, acc_b2, zend, ltot, hsum, hsq, failed


@njit(cache=True, parallel=True)
def _paths_1d(x0, mu, sigma2, dt, nsteps, seed, npaths, thetas, hist, nchunks):
    m = thetas.shape[0]
    acc = np.zeros((npaths, m), dtype=np.complex128)
    xend = np.zeros(npaths)
    ltot = np.zeros(npaths)
    nb = int(hist[2])
    hsum = np.zeros((nchunks, max(nb, 1)))
    hsq = np.zeros((nchunks, max(nb, 1)))
    per = (npaths + nchunks - 1) // nchunks
    sq = math.sqrt(dt)
    s = math.sqrt(sigma2)
    var = sigma2 * dt
    rt = thetas.real.copy()
    real_th = np.all(thetas.imag == 0.0)
    for c in prange(nchunks):
        st = np.zeros(4, dtype=np.uint64)
        occ = np.zeros(max(nb, 1))
        for path in range(c * per, min((c + 1) * per, npaths)):
            _seed_state(seed, path, st)
            x = x0
            spare = 0.0
            have_spare = False
            e_prev = np.empty(m, dtype=np.complex128)
            a_loc = np.zeros(m, dtype=np.complex128)
            for j in range(m):
                e_prev[j] = np.exp(thetas[j] * x)
            if nb > 0:
                occ[:] = 0.0
            for _ in range(nsteps):
                if have_spare:
                    g = spare
                    have_spare = False
                else:
                    g, spare = _normal_pair(st)
                    have_spare = True
                d = s * sq * g + mu * dt
                low = _bridge_low(x, d, var, st)
                dl = -low if low < 0.0 else 0.0
                xn = max(x + d + dl, 0.0)
                for j in range(m):
                    if real_th:
                        e = math.exp(rt[j] * xn) + 0j
                    else:
                        e = np.exp(thetas[j] * xn)
                    a_loc[j] += 0.5 * (e_prev[j] + e) * dt
                    e_prev[j] = e
                if nb > 0:
                    ib = int(math.floor((xn - hist[0]) / (hist[1] - hist[0]) * nb))
                    if 0 <= ib < nb:
                        occ[ib] += dt
                ltot[path] += dl
                x = xn
            acc[path, :] = a_loc
            xend[path] = x
            if nb > 0:
                for b in range(nb):
                    hsum[c, b] += occ[b]
                    hsq[c, b] += occ[b] * occ[b]
    return acc, xend, ltot, hsum, hsq


# ----------------------------------------------------------------------------
# numpy fallback, vectorized across paths


class _Streams:
    def __init__(self, seed, npaths):
        x = np.full(npaths, np.uint64(seed), dtype=np.uint64) ^ np.arange(npaths, dtype=np.uint64)
        self.s = []
        for _ in range(4):
            x = x + _GOLDEN
            z = x.copy()
            z = (z ^ (z >> np.uint64(30))) * _M1
            z = (z ^ (z >> np.uint64(27))) * _M2
            self.s.append(z ^ (z >> np.uint64(31)))

    @staticmethod
    def _rotl(x, k):
        return (x << np.uint64(k)) | (x >> np.uint64(64 - k))

    def uniform(self, mask=None):
        """Next uniform of every stream; with ``mask`` only those streams advance."""
        old = self.s
        s0, s1, s2, s3 = old if mask is None else [a[mask] for a in old]
        r = self._rotl(s1 * np.uint64(5), 7) * np.uint64(9)
        t = s1 << np.uint64(17)
        s2 = s2 ^ s0
        s3 = s3 ^ s1
        s1 = s1 ^ s2
        s0 = s0 ^ s3
        s2 = s2 ^ t
        s3 = self._rotl(s3, 45)
        if mask is None:
            self.s = [s0, s1, s2, s3]
        else:
            for a, b in zip(old, (s0, s1, s2, s3)):
                a[mask] = b
        return ((r >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO53

    def normal_pair(self):
        n = self.s[0].shape[0]
        g1, g2 = np.empty(n), np.empty(n)
        todo = np.ones(n, dtype=bool)
        while np.any(todo):
            a = 2.0 * self.uniform(todo) - 1.0
            b = 2.0 * self.uniform(todo) - 1.0
            r = a * a + b * b
            ok = (r > 0) & (r < 1)
            idx = np.nonzero(todo)[0][ok]
            f = np.sqrt(-2.0 * np.log(r[ok]) / r[ok])
            g1[idx] = a[ok] * f
            g2[idx] = b[ok] * f
            todo[idx] = False
        return g1, g2


def _bridge_low_np(z, d, var, rng):
    near = ~(2.0 * z * (z + d) > 40.0 * var)
    out = z.copy()
    if np.any(near):
        u = rng.uniform(near)
        dn = d[near]
        out[near] = z[near] + 0.5 * (dn - np.sqrt(dn * dn - 2.0 * var * np.log(u)))
    return out


def lcp2_np(q1, q2, r12, r21):
    """Vectorized :func:`lcp2`."""
    tol = -1e-13 * (1.0 + np.abs(q1) + np.abs(q2))
    l1 = np.zeros_like(q1)
    l2 = np.zeros_like(q1)
    done = (q1 >= 0) & (q2 >= 0)
    a = ~done & (-q1 >= 0) & (q2 - r21 * q1 >= tol)
    l1 = np.where(a, -q1, l1)
    done |= a
    b = ~done & (-q2 >= 0) & (q1 - r12 * q2 >= tol)
    l2 = np.where(b, -q2, l2)
    done |= b
    det = 1.0 - r12 * r21
    if det != 0.0:
        c1 = (-q1 + r12 * q2) / det
        c2 = (-q2 + r21 * q1) / det
        c = ~done & (c1 >= 0) & (c2 >= 0)
        l1 = np.where(c, c1, l1)
        l2 = np.where(c, c2, l2)
        done |= c
    return l1, l2, done


def paths_2d_numpy(z0, mu, chol, sig, r12, r21, dt, nsteps, seed, npaths,
                   th_int, th_b1, th_b2, hist, nchunks):
    rng = _Streams(seed, npaths)
    z1 = np.full(npaths, float(z0[0]))
    z2 = np.full(npaths, float(z0[1]))
    acc_int = np.zeros((npaths, th_int.shape[0]), dtype=complex)
    acc_b1 = np.zeros((npaths, th_b1.shape[0]), dtype=complex)
    acc_b2 = np.zeros((npaths, th_b2.shape[0]), dtype=complex)
    ltot = np.zeros((npaths, 2))
    nx, ny = int(hist[4]), int(hist[5])
    nbox = nx * ny
    occ = np.zeros((npaths, max(nbox, 1)))
    failed = 0
    sq = math.sqrt(dt)
    v1, v2 = sig[0] * dt, sig[1] * dt
    e_prev = np.exp(np.outer(z1, th_int[:, 0]) + np.outer(z2, th_int[:, 1]))
    rows = np.arange(npaths)
    for _ in range(nsteps):
        g1, g2 = rng.normal_pair()
        d1 = sq * (chol[0, 0] * g1) + mu[0] * dt
        d2 = sq * (chol[1, 0] * g1 + chol[1, 1] * g2) + mu[1] * dt
        q1 = _bridge_low_np(z1, d1, v1, rng)
        q2 = _bridge_low_np(z2, d2, v2, rng)
        l1, l2, ok = lcp2_np(q1, q2, r12, r21)
        failed += int(np.count_nonzero(~ok))
        n1z = np.maximum(z1 + d1 + l1 + r12 * l2, 0.0)
        n2z = np.maximum(z2 + d2 + r21 * l1 + l2, 0.0)
        e = np.exp(np.outer(n1z, th_int[:, 0]) + np.outer(n2z, th_int[:, 1]))
        acc_int += 0.5 * (e_prev + e) * dt
        e_prev = e
        if th_b1.size:
            hit = l1 > 0
            if np.any(hit):
                mid = 0.5 * (z2[hit] + n2z[hit])
                acc_b1[hit] += np.exp(np.outer(mid, th_b1)) * l1[hit, None]
        if th_b2.size:
            hit = l2 > 0
            if np.any(hit):
                mid = 0.5 * (z1[hit] + n1z[hit])
                acc_b2[hit] += np.exp(np.outer(mid, th_b2)) * l2[hit, None]
        if nbox:
            ix = np.floor((n1z - hist[0]) / (hist[1] - hist[0]) * nx).astype(np.int64)
            iy = np.floor((n2z - hist[2]) / (hist[3] - hist[2]) * ny).astype(np.int64)
            inside = (ix >= 0) & (ix < nx) & (iy >= 0) & (iy < ny)
            np.add.at(occ, (rows[inside], ix[inside] * ny + iy[inside]), dt)
        ltot[:, 0] += l1
        ltot[:, 1] += l2
        z1, z2 = n1z, n2z
    hsum, hsq = _chunk_moments(occ, npaths, nchunks)
    zend = np.stack([z1, z2], axis=1)
    return acc_int, acc_b1, acc_b2, zend, ltot, hsum, hsq, np.array([failed])


def paths_1d_numpy(x0, mu, sigma2, dt, nsteps, seed, npaths, thetas, hist, nchunks):
    rng = _Streams(seed, npaths)
    x = np.full(npaths, float(x0))
    acc = np.zeros((npaths, thetas.shape[0]), dtype=complex)
    ltot = np.zeros(npaths)
    nb = int(hist[2])
    occ = np.zeros((npaths, max(nb, 1)))
    sq, s, var = math.sqrt(dt), math.sqrt(sigma2), sigma2 * dt
    e_prev = np.exp(np.outer(x, thetas))
    rows = np.arange(npaths)
    spare = None
    for _ in range(nsteps):
        if spare is not None:
            g, spare = spare, None
        else:
            g, spare = rng.normal_pair()
        d = s * sq * g + mu * dt
        low = _bridge_low_np(x, d, var, rng)
        dl = np.where(low < 0, -low, 0.0)
        xn = np.maximum(x + d + dl, 0.0)
        e = np.exp(np.outer(xn, thetas))
        acc += 0.5 * (e_prev + e) * dt
        e_prev = e
        if nb:
            ib = np.floor((xn - hist[0]) / (hist[1] - hist[0]) * nb).astype(np.int64)
            inside = (ib >= 0) & (ib < nb)
            np.add.at(occ, (rows[inside], ib[inside]), dt)
        ltot += dl
        x = xn
    hsum, hsq = _chunk_moments(occ, npaths, nchunks)
    return acc, x, ltot, hsum, hsq


def _chunk_moments(occ, npaths, nchunks):
    per = (npaths + nchunks - 1) // nchunks
    hsum = np.zeros((nchunks, occ.shape[1]))
    hsq = np.zeros((nchunks, occ.shape[1]))
    for c in range(nchunks):
        blk = occ[c * per:(c + 1) * per]
        hsum[c] = blk.sum(axis=0)
        hsq[c] = (blk * blk).sum(axis=0)
    return hsum, hsq
