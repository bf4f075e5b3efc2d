"""Adaptive Simpson quadrature, vectorized over many independent integrals.

Intervals from all integrals share one work list; each pass refines every
interval whose Richardson error estimate exceeds its share of the tolerance.
"""

from __future__ import annotations

from collections.abc import Callable

import numpy as np

# f(owner, s) -> values; owner[k] says which integral s[k] belongs to
Integrand = Callable[[np.ndarray, np.ndarray], np.ndarray]


class QuadratureError(ArithmeticError):
    pass


def simpson_batch(
    f: Integrand,
    lo,
    hi,
    tol: float = 1e-10,
    max_depth: int = 48,
) -> np.ndarray:
    """Integrate ``f(k, .)`` over ``[lo[k], hi[k]]`` for every ``k``.

    ``tol`` is the absolute tolerance per integral; it is halved on every
    split so the accepted pieces add up to at most ``tol``.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape or lo.ndim != 1:
        raise ValueError("lo and hi must be 1-D arrays of equal length")
    M = lo.size
    result = np.zeros(M)

    owner = np.arange(M)
    a, b = lo.copy(), hi.copy()
    m = 0.5 * (a + b)
    fa, fm, fb = f(owner, a), f(owner, m), f(owner, b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    eps = np.full(M, float(tol))
    depth = 0

    while owner.size:
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = f(owner, lm)
        frm = f(owner, rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        err = left + right - whole
        done = np.abs(err) <= 15.0 * eps
        if depth >= max_depth:
            if not done.all():
                k = int(owner[~done][0])
                raise QuadratureError(f"no convergence for integral {k} after {max_depth} levels")
        if done.any():
            np.add.at(result, owner[done], left[done] + right[done] + err[done] / 15.0)
        keep = ~done
        if not keep.any():
            break
        o, a_, m_, b_ = owner[keep], a[keep], m[keep], b[keep]
        fa_, fm_, fb_ = fa[keep], fm[keep], fb[keep]
        flm_, frm_ = flm[keep], frm[keep]
        owner = np.concatenate([o, o])
        a = np.concatenate([a_, m_])
        b = np.concatenate([m_, b_])
        m = np.concatenate([0.5 * (a_ + m_), 0.5 * (m_ + b_)])
        fa = np.concatenate([fa_, fm_])
        fm = np.concatenate([flm_, frm_])
        fb = np.concatenate([fm_, fb_])
        whole = np.concatenate([left[keep], right[keep]])
        eps = np.concatenate([eps[keep], eps[keep]]) / 2.0
        depth += 1
    return result


def simpson(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10, max_depth: int = 48) -> float:
    """Scalar convenience wrapper around :func:`simpson_batch`."""
    g = np.vectorize(f, otypes=[float])
    return float(simpson_batch(lambda _k, s: g(s), [lo], [hi], tol, max_depth)[0])
