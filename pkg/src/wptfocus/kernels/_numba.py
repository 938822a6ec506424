"""Numba-compiled field kernels, parallel over field points.

Each point owns its output slot and accumulates over antennas in a fixed
order, so results do not depend on the thread count.
"""

import math
import warnings

import numpy as np
from numba import njit, prange
from numba.core.errors import NumbaWarning

# an old system TBB only means numba falls back to another threading layer
warnings.filterwarnings("ignore", message="The TBB threading layer", category=NumbaWarning)

_EDGE_RTOL = 1e-12


@njit(cache=True, inline="always")
def _fresnel(cos_t, eps, parallel):
    sin2 = 1.0 - cos_t * cos_t
    root = math.sqrt(eps - sin2)
    if parallel:
        return (eps * cos_t - root) / (eps * cos_t + root)
    return (cos_t - root) / (cos_t + root)


@njit(cache=True, inline="always")
def _elem(cos_psi, exponent):
    if exponent == 0.0:
        return 1.0
    if cos_psi <= 0.0:
        return 0.0
    if cos_psi > 1.0:
        cos_psi = 1.0
    return cos_psi ** (0.5 * exponent)


@njit(cache=True, parallel=True)
def field_sum(points, tx, w, anchor, normal, ax1, ax2, hw, eps, amp, par,
              include_los, elem_exp, boresight, wavelength, min_dist):
    k0 = 2.0 * math.pi / wavelength
    npts = points.shape[0]
    nant = tx.shape[0]
    nref = anchor.shape[0]
    out = np.zeros(npts, dtype=np.complex128)
    status = np.zeros(npts, dtype=np.int8)
    for p in prange(npts):
        qx, qy, qz = points[p, 0], points[p, 1], points[p, 2]
        acc = 0.0 + 0.0j
        st = 0
        for l in range(nant):
            px, py, pz = tx[l, 0], tx[l, 1], tx[l, 2]
            e = 0.0 + 0.0j
            if include_los:
                dx, dy, dz = qx - px, qy - py, qz - pz
                d = math.sqrt(dx * dx + dy * dy + dz * dz)
                if d < min_dist:
                    st |= 1
                    d = 1.0
                g = _elem((dx * boresight[0] + dy * boresight[1] + dz * boresight[2]) / d,
                          elem_exp)
                ph = -k0 * d
                e += g * complex(math.cos(ph), math.sin(ph)) / d
            for r in range(nref):
                nx, ny, nz = normal[r, 0], normal[r, 1], normal[r, 2]
                ax, ay, az = anchor[r, 0], anchor[r, 1], anchor[r, 2]
                dp = (px - ax) * nx + (py - ay) * ny + (pz - az) * nz
                dq = (qx - ax) * nx + (qy - ay) * ny + (qz - az) * nz
                if dp * dq <= 0.0:
                    st |= 2
                ix, iy, iz = px - 2.0 * dp * nx, py - 2.0 * dp * ny, pz - 2.0 * dp * nz
                vx, vy, vz = qx - ix, qy - iy, qz - iz
                d = math.sqrt(vx * vx + vy * vy + vz * vz)
                if d < min_dist:
                    st |= 1
                    d = 1.0
                adp = abs(dp)
                adq = abs(dq)
                den = adp + adq
                t = adp / den if den > 0.0 else 0.0
                sx, sy, sz = ix + t * vx, iy + t * vy, iz + t * vz
                rx, ry, rz = sx - ax, sy - ay, sz - az
                h0 = hw[r, 0]
                h1 = hw[r, 1]
                if h0 < np.inf:
                    u = rx * ax1[r, 0] + ry * ax1[r, 1] + rz * ax1[r, 2]
                    if abs(u) > h0 * (1.0 + _EDGE_RTOL) + _EDGE_RTOL:
                        continue
                if h1 < np.inf:
                    u = rx * ax2[r, 0] + ry * ax2[r, 1] + rz * ax2[r, 2]
                    if abs(u) > h1 * (1.0 + _EDGE_RTOL) + _EDGE_RTOL:
                        continue
                cos_t = den / d
                if cos_t > 1.0:
                    cos_t = 1.0
                coef = _fresnel(cos_t, eps[r], par[r]) * amp[r]
                if elem_exp != 0.0:
                    ex, ey, ez = sx - px, sy - py, sz - pz
                    dn = math.sqrt(ex * ex + ey * ey + ez * ez)
                    if dn <= 0.0:
                        dn = 1.0
                    coef *= _elem((ex * boresight[0] + ey * boresight[1] + ez * boresight[2]) / dn,
                                  elem_exp)
                ph = -k0 * d
                e += coef * complex(math.cos(ph), math.sin(ph)) / d
            acc += w[l] * e
        out[p] = acc
        status[p] = st
    return out, status


@njit(cache=True, parallel=True)
def nf_gain(points, tx, w, wavelength, min_dist):
    k0 = 2.0 * math.pi / wavelength
    npts = points.shape[0]
    out = np.zeros(npts)
    status = np.zeros(npts, dtype=np.int8)
    for p in prange(npts):
        acc = 0.0 + 0.0j
        st = 0
        for l in range(tx.shape[0]):
            dx = points[p, 0] - tx[l, 0]
            dy = points[p, 1] - tx[l, 1]
            dz = points[p, 2] - tx[l, 2]
            d = math.sqrt(dx * dx + dy * dy + dz * dz)
            if d < min_dist:
                st |= 1
            ph = -k0 * d
            acc += w[l] * complex(math.cos(ph), math.sin(ph))
        out[p] = acc.real * acc.real + acc.imag * acc.imag
        status[p] = st
    return out, status


@njit(cache=True, parallel=True)
def ff_gain(directions, tx_rel, w, wavelength):
    k0 = 2.0 * math.pi / wavelength
    out = np.zeros(directions.shape[0])
    for m in prange(directions.shape[0]):
        acc = 0.0 + 0.0j
        for l in range(tx_rel.shape[0]):
            ph = k0 * (directions[m, 0] * tx_rel[l, 0]
                       + directions[m, 1] * tx_rel[l, 1]
                       + directions[m, 2] * tx_rel[l, 2])
            acc += w[l] * complex(math.cos(ph), math.sin(ph))
        out[m] = acc.real * acc.real + acc.imag * acc.imag
    return out
