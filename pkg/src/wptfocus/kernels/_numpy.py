"""Vectorized numpy implementations of the field kernels.

Points are processed in chunks so the ``(chunk, L)`` temporaries stay
small regardless of grid size.
"""

import numpy as np

_CHUNK = 256
_EDGE_RTOL = 1e-12

# status bit flags
OK, SINGULAR, WRONG_SIDE = 0, 1, 2


def _fresnel(cos_t, eps, parallel):
    sin2 = 1.0 - cos_t * cos_t
    root = np.sqrt(eps - sin2)
    if parallel:
        return (eps * cos_t - root) / (eps * cos_t + root)
    return (cos_t - root) / (cos_t + root)


def _elem(cos_psi, exponent):
    if exponent == 0.0:
        return 1.0
    return np.clip(cos_psi, 0.0, 1.0) ** (0.5 * exponent)


def field_sum(points, tx, w, anchor, normal, ax1, ax2, hw, eps, amp, par,
              include_los, elem_exp, boresight, wavelength, min_dist):
    k0 = 2.0 * np.pi / wavelength
    npts = points.shape[0]
    out = np.zeros(npts, dtype=np.complex128)
    status = np.zeros(npts, dtype=np.int8)
    for start in range(0, npts, _CHUNK):
        q = points[start:start + _CHUNK]
        acc = np.zeros((q.shape[0], tx.shape[0]), dtype=np.complex128)
        bad = np.zeros(q.shape[0], dtype=np.int8)
        if include_los:
            delta = q[:, None, :] - tx[None, :, :]
            d = np.sqrt(np.einsum("pli,pli->pl", delta, delta))
            sing = np.any(d < min_dist, axis=1)
            bad[sing] |= SINGULAR
            d = np.where(d < min_dist, 1.0, d)
            g = _elem((delta @ boresight) / d, elem_exp)
            acc += g * np.exp(-1j * k0 * d) / d
        for r in range(anchor.shape[0]):
            n = normal[r]
            dp = (tx - anchor[r]) @ n
            dq = (q - anchor[r]) @ n
            wrong = np.any(dp[None, :] * dq[:, None] <= 0.0, axis=1)
            bad[wrong] |= WRONG_SIDE
            img = tx - 2.0 * dp[:, None] * n
            v = q[:, None, :] - img[None, :, :]
            d = np.sqrt(np.einsum("pli,pli->pl", v, v))
            sing = np.any(d < min_dist, axis=1)
            bad[sing] |= SINGULAR
            d = np.where(d < min_dist, 1.0, d)
            adp = np.abs(dp)[None, :]
            adq = np.abs(dq)[:, None]
            denom = np.where(adp + adq > 0.0, adp + adq, 1.0)
            t = adp / denom
            s = img[None, :, :] + t[..., None] * v
            rel = s - anchor[r]
            vis = np.ones(d.shape, dtype=bool)
            for ax, h in ((ax1[r], hw[r, 0]), (ax2[r], hw[r, 1])):
                if np.isfinite(h):
                    vis &= np.abs(rel @ ax) <= h * (1.0 + _EDGE_RTOL) + _EDGE_RTOL
            cos_t = np.clip((adp + adq) / d, 0.0, 1.0)
            gamma = _fresnel(cos_t, eps[r], par[r])
            coef = np.where(vis, gamma * amp[r], 0.0)
            if elem_exp != 0.0:
                dep = s - tx[None, :, :]
                dn = np.sqrt(np.einsum("pli,pli->pl", dep, dep))
                dn = np.where(dn > 0.0, dn, 1.0)
                coef = coef * _elem((dep @ boresight) / dn, elem_exp)
            acc += coef * np.exp(-1j * k0 * d) / d
        out[start:start + q.shape[0]] = acc @ w
        status[start:start + q.shape[0]] = bad
    return out, status


def nf_gain(points, tx, w, wavelength, min_dist):
    k0 = 2.0 * np.pi / wavelength
    npts = points.shape[0]
    out = np.zeros(npts)
    status = np.zeros(npts, dtype=np.int8)
    for start in range(0, npts, _CHUNK):
        q = points[start:start + _CHUNK]
        delta = q[:, None, :] - tx[None, :, :]
        d = np.sqrt(np.einsum("pli,pli->pl", delta, delta))
        status[start:start + q.shape[0]] = np.where(
            np.any(d < min_dist, axis=1), SINGULAR, OK
        )
        out[start:start + q.shape[0]] = np.abs(np.exp(-1j * k0 * d) @ w) ** 2
    return out, status


def ff_gain(directions, tx_rel, w, wavelength):
    k0 = 2.0 * np.pi / wavelength
    out = np.zeros(directions.shape[0])
    for start in range(0, directions.shape[0], _CHUNK):
        u = directions[start:start + _CHUNK]
        out[start:start + u.shape[0]] = np.abs(np.exp(1j * k0 * (u @ tx_rel.T)) @ w) ** 2
    return out
