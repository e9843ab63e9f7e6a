"""Univariate and bivariate standard normal distribution functions.

The bivariate CDF follows A. Genz, "Numerical computation of rectangular
bivariate and trivariate normal and t probabilities" (Stat. Comput. 2004):
Gauss-Legendre integration of Plackett's identity for |rho| < 0.925 and an
asymptotic expansion around rho = +-1 otherwise. Double precision accuracy.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr

norm_cdf = ndtr


def norm_pdf(x):
    return np.exp(-0.5 * np.square(x)) / math.sqrt(2.0 * math.pi)


def _phi(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


_GL6 = (
    (0.1713244923791705, 0.3607615730481384, 0.4679139345726904),
    (0.9324695142031522, 0.6612093864662647, 0.2386191860831970),
)
_GL12 = (
    (0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
     0.2031674267230659, 0.2334925365383547, 0.2491470458134029),
    (0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
     0.5873179542866171, 0.3678314989981802, 0.1252334085114692),
)
_GL20 = (
    (0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
     0.08327674157670475, 0.1019301198172404, 0.1181945319615184,
     0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
     0.1527533871307259),
    (0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
     0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
     0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
     0.07652652113349733),
)


def _nodes(r: float) -> tuple[np.ndarray, np.ndarray]:
    w, x = _GL6 if abs(r) < 0.3 else _GL12 if abs(r) < 0.75 else _GL20
    w, x = np.asarray(w), np.asarray(x)
    # symmetric rule on (0, 2) after the shift used below
    return np.concatenate((w, w)), np.concatenate((1.0 - x, 1.0 + x))


def _bvnu(dh: float, dk: float, r: float) -> float:
    """P(X > dh, Y > dk) for standard normals with correlation r."""
    if dh == math.inf or dk == math.inf:
        return 0.0
    if dh == -math.inf:
        return 1.0 if dk == -math.inf else _phi(-dk)
    if dk == -math.inf:
        return _phi(-dh)
    if r == 0.0:
        return _phi(-dh) * _phi(-dk)

    tp = 2.0 * math.pi
    h, k = dh, dk
    hk = h * k
    w, x = _nodes(r)
    if abs(r) < 0.925:
        hs = (h * h + k * k) / 2.0
        asr = math.asin(r) / 2.0
        sn = np.sin(asr * x)
        bvn = float(np.exp((sn * hk - hs) / (1.0 - sn * sn)) @ w)
        bvn = bvn * asr / tp + _phi(-h) * _phi(-k)
    else:
        if r < 0.0:
            k, hk = -k, -hk
        bvn = 0.0
        if abs(r) < 1.0:
            a_s = (1.0 - r) * (1.0 + r)
            a = math.sqrt(a_s)
            bs = (h - k) ** 2
            asr = -(bs / a_s + hk) / 2.0
            c = (4.0 - hk) / 8.0
            d = (12.0 - hk) / 80.0
            if asr > -100.0:
                bvn = a * math.exp(asr) * (1.0 - c * (bs - a_s) * (1.0 - d * bs) / 3.0 + c * d * a_s * a_s)
            if hk > -100.0:
                b = math.sqrt(bs)
                sp = math.sqrt(tp) * _phi(-b / a)
                bvn -= math.exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0)
            a /= 2.0
            xs = (a * x) ** 2
            asr = -(bs / xs + hk) / 2.0
            keep = asr > -100.0
            xs, asr, wk = xs[keep], asr[keep], w[keep]
            sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs)
            rs = np.sqrt(1.0 - xs)
            ep = np.exp(-(hk / 2.0) * xs / (1.0 + rs) ** 2) / rs
            bvn = (a * float((np.exp(asr) * (sp - ep)) @ wk) - bvn) / tp
        if r > 0.0:
            bvn += _phi(-max(h, k))
        elif h >= k:
            bvn = -bvn
        else:
            lower = _phi(k) - _phi(h) if h < 0.0 else _phi(-h) - _phi(-k)
            bvn = lower - bvn
    return min(1.0, max(0.0, bvn))


def bivariate_normal_cdf(x, y, rho: float):
    """P(X <= x, Y <= y) for standard normals with correlation ``rho``.

    ``x`` and ``y`` may be arrays (broadcast together); ``rho`` is a scalar.
    """
    rho = float(rho)
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho}")
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        return _bvnu(-float(x), -float(y), rho)
    xb, yb = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    out = np.empty(xb.shape)
    for idx in np.ndindex(xb.shape):
        out[idx] = _bvnu(-xb[idx], -yb[idx], rho)
    return out
