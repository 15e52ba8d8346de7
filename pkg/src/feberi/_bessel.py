r"""Modified Bessel functions of the second kind, orders 0 and 1.

Three regimes, each accurate to ~1e-14 relative:

* ``x <= 2``: ascending series,

  .. math::
      K_0(x) = -(\ln(x/2) + \gamma) I_0(x) + \sum_{k\ge1} \frac{(x^2/4)^k}{(k!)^2} H_k

* ``2 < x <= 25``: Steed's continued fraction for :math:`K_\nu, K_{\nu+1}`
  (Temme's CF2 at :math:`\nu = 0`),
* ``x > 25``: Hankel asymptotic series, truncated where its remainder is
  below :math:`e^{-2x}`.

Only elementary functions are used. Inputs must be strictly positive.
"""

import math

import numpy as np

_EULER = 0.57721566490153286061
_SERIES_MAX = 2.0
_ASYMPTOTIC_MIN = 25.0
_N_SERIES = 24


def _series(x):
    y = 0.25 * x * x
    lnx = np.log(0.5 * x)
    term0 = np.ones_like(x)  # (y^k) / (k!)^2
    term1 = np.ones_like(x)  # (y^k) / (k! (k+1)!)
    i0 = np.zeros_like(x)
    i1 = np.zeros_like(x)
    k0_sum = np.zeros_like(x)
    k1_sum = np.zeros_like(x)
    harmonic = 0.0
    psi_k1 = -_EULER  # digamma(k + 1)
    for k in range(_N_SERIES):
        if k > 0:
            term0 = term0 * y / (k * k)
            term1 = term1 * y / (k * (k + 1))
            harmonic += 1.0 / k
            psi_k1 += 1.0 / k
        psi_k2 = psi_k1 + 1.0 / (k + 1)
        i0 = i0 + term0
        i1 = i1 + term1
        k0_sum = k0_sum + term0 * harmonic
        k1_sum = k1_sum + term1 * (psi_k1 + psi_k2)
    i1 = 0.5 * x * i1
    k0 = -(lnx + _EULER) * i0 + k0_sum
    k1 = 1.0 / x + lnx * i1 - 0.25 * x * k1_sum
    return k0, k1


def _steed(x, eps=1e-16, max_iter=10000):
    a1 = 0.25
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    q = np.full_like(x, a1)
    c = np.full_like(x, a1)
    a = -a1
    s = 1.0 + q * delh
    active = np.ones(x.shape, dtype=bool)
    for i in range(2, max_iter):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = np.where(active, (b * d - 1.0) * delh, 0.0)
        h = h + delh
        dels = q * delh
        s = s + dels
        active &= np.abs(dels) >= eps * np.abs(s)
        if not active.any():
            break
    h = a1 * h
    k0 = np.sqrt(np.pi / (2.0 * x)) * np.exp(-x) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def _asymptotic(x):
    pre = np.sqrt(np.pi / (2.0 * x)) * np.exp(-x)
    out = []
    for nu in (0, 1):
        mu = 4.0 * nu * nu
        term = np.ones_like(x)
        total = np.ones_like(x)
        for k in range(1, 30):
            term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
            total = total + term
        out.append(pre * total)
    return out[0], out[1]


def k0k1(x):
    """Return ``(K0(x), K1(x))`` for positive ``x`` (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise ValueError("modified Bessel K requires finite x > 0")
    k0 = np.empty_like(arr)
    k1 = np.empty_like(arr)
    for lo, hi, fn in (
        (0.0, _SERIES_MAX, _series),
        (_SERIES_MAX, _ASYMPTOTIC_MIN, _steed),
        (_ASYMPTOTIC_MIN, math.inf, _asymptotic),
    ):
        sel = (arr > lo) & (arr <= hi)
        if sel.any():
            k0[sel], k1[sel] = fn(arr[sel])
    if scalar:
        return float(k0[0]), float(k1[0])
    return k0, k1


def k0(x):
    return k0k1(x)[0]


def k1(x):
    return k0k1(x)[1]
