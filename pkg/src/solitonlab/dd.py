"""Vectorized double-double (compensated) arithmetic.

Tau-function determinants of closely spaced wavenumbers are Cauchy-matrix
conditioned: plain float64 LU loses up to ~10 digits at N=10, which is not
enough to cross-check the determinant against the Hirota expansion at the
1e-11 level. Each value here is carried as an unevaluated sum hi+lo of two
float64 arrays (~32 significant digits), which restores full headroom.

Only the handful of operations the determinant route needs are provided.
All functions broadcast like the underlying numpy ufuncs.
"""

from __future__ import annotations

import math

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1, Dekker splitting constant

# log(2) to double-double precision
_LN2_HI = 6.931471805599452862e-01
_LN2_LO = 2.319046813846299558e-17

_EXP_ORDER = 26


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _quick_two_sum(a, b):
    # requires |a| >= |b| (or a == 0)
    s = a + b
    return s, b - (s - a)


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def add(xh, xl, yh, yl):
    s, e = _two_sum(xh, yh)
    e = e + (xl + yl)
    return _quick_two_sum(s, e)


def sub(xh, xl, yh, yl):
    return add(xh, xl, -yh, -yl)


def mul(xh, xl, yh, yl):
    p, e = _two_prod(xh, yh)
    e = e + (xh * yl + xl * yh)
    return _quick_two_sum(p, e)


def div(xh, xl, yh, yl):
    q1 = xh / yh
    th, tl = mul(q1, np.zeros_like(q1), yh, yl)
    rh, rl = sub(xh, xl, th, tl)
    q2 = rh / yh
    th, tl = mul(q2, np.zeros_like(q2), yh, yl)
    rh, rl = sub(rh, rl, th, tl)
    q3 = rh / yh
    qh, ql = _quick_two_sum(q1, q2)
    return add(qh, ql, q3, np.zeros_like(q3))


def from_float(x):
    x = np.asarray(x, dtype=float)
    return x, np.zeros_like(x)


# 1/j! in double-double, built exactly (j! overflows the 53-bit mantissa at 23!)
def _inv_factorials(order):
    out = []
    fh, fl = np.float64(1.0), np.float64(0.0)
    for j in range(1, order + 1):
        fh, fl = mul(fh, fl, np.float64(j), np.float64(0.0))
        qh, ql = div(np.float64(1.0), np.float64(0.0), fh, fl)
        out.append((float(qh), float(ql)))
    return out


_INV_FACT = _inv_factorials(_EXP_ORDER)


def exp(xh, xl):
    """exp of a double-double, accurate to ~30 digits for |x| < ~700."""
    xh = np.asarray(xh, dtype=float)
    xl = np.asarray(xl, dtype=float)
    n = np.rint(xh / _LN2_HI)
    # r = x - n*ln2, |r| <= ln2/2
    th, tl = mul(n, np.zeros_like(n), np.float64(_LN2_HI), np.float64(_LN2_LO))
    rh, rl = sub(xh, xl, th, tl)
    # Taylor sum 1 + r + r^2/2! + ... via Horner
    sh = np.full_like(rh, _INV_FACT[_EXP_ORDER - 1][0])
    sl = np.full_like(rh, _INV_FACT[_EXP_ORDER - 1][1])
    for j in range(_EXP_ORDER - 2, -1, -1):
        sh, sl = mul(sh, sl, rh, rl)
        sh, sl = add(sh, sl, np.float64(_INV_FACT[j][0]), np.float64(_INV_FACT[j][1]))
    sh, sl = mul(sh, sl, rh, rl)
    sh, sl = add(sh, sl, np.float64(1.0), np.float64(0.0))
    ni = n.astype(np.int64)
    return np.ldexp(sh, ni), np.ldexp(sl, ni)


def log_abs(xh, xl):
    """log|x| of a double-double, as float64 (absolute error ~1e-16)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(np.abs(xh)) + np.log1p(np.where(xh != 0.0, xl / xh, 0.0))
    return np.where(xh == 0.0, -np.inf, out)


def slogdet(ah, al):
    """Sign and log|det| of a batch of double-double matrices.

    ah, al: arrays of shape (..., n, n). LU with partial pivoting on the
    hi parts; returns (sign, logabs) of shape (...,). A singular pivot
    yields sign 0 and logabs -inf.
    """
    ah = np.array(ah, dtype=float)
    al = np.array(al, dtype=float)
    n = ah.shape[-1]
    batch_shape = ah.shape[:-2]
    ah = ah.reshape(-1, n, n)
    al = al.reshape(-1, n, n)
    nb = ah.shape[0]
    bidx = np.arange(nb)
    sign = np.ones(nb)
    logabs = np.zeros(nb)
    for k in range(n):
        p = np.argmax(np.abs(ah[:, k:, k]), axis=1) + k
        swap = p != k
        if np.any(swap):
            rp_h = ah[bidx, p, :].copy()
            rp_l = al[bidx, p, :].copy()
            ah[bidx, p, :] = ah[:, k, :]
            al[bidx, p, :] = al[:, k, :]
            ah[:, k, :] = rp_h
            al[:, k, :] = rp_l
            sign = np.where(swap, -sign, sign)
        ph = ah[:, k, k]
        pl = al[:, k, k]
        logabs = logabs + log_abs(ph, pl)
        sign = sign * np.sign(ph)
        if k < n - 1:
            mh, ml = div(ah[:, k + 1 :, k], al[:, k + 1 :, k], ph[:, None], pl[:, None])
            uh, ul = mul(
                mh[:, :, None], ml[:, :, None],
                ah[:, None, k, k + 1 :], al[:, None, k, k + 1 :],
            )
            ah[:, k + 1 :, k + 1 :], al[:, k + 1 :, k + 1 :] = sub(
                ah[:, k + 1 :, k + 1 :], al[:, k + 1 :, k + 1 :], uh, ul
            )
    return sign.reshape(batch_shape), logabs.reshape(batch_shape)
