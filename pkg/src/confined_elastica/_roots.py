"""Scalar root finding: bisection to a tight bracket, then Newton polish."""

import math


def _same_sign(a, b):
    return math.copysign(1.0, a) == math.copysign(1.0, b)


def _bisect(f, lo, hi, flo, width, max_iter):
    for _ in range(max_iter):
        if hi - lo <= width:
            break
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid, mid, fmid
        if _same_sign(fmid, flo):
            lo, flo = mid, fmid
        else:
            hi = mid
    return lo, hi, flo


def bisect_newton(f, lo, hi, df=None, xtol=1e-12, max_iter=400):
    """Root of ``f`` in ``[lo, hi]`` given a sign change.

    Bisection shrinks the bracket to a thousandth of its width; Newton steps
    confined to the bracket then polish the root.  If Newton leaves the bracket
    or stalls, bisection finishes the job to ``xtol``.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if _same_sign(flo, fhi):
        raise ValueError("no sign change on the bracket")
    if df is not None:
        lo, hi, flo = _bisect(f, lo, hi, flo, 1e-3 * (hi - lo), max_iter)
        x = 0.5 * (lo + hi)
        for _ in range(30):
            slope = df(x)
            if slope == 0.0 or not math.isfinite(slope):
                break
            step = f(x) / slope
            if not lo <= x - step <= hi:
                break
            x -= step
            if abs(step) <= xtol:
                return x
    lo, hi, _ = _bisect(f, lo, hi, flo, xtol, max_iter)
    return 0.5 * (lo + hi)
