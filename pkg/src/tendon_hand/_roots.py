"""Scalar root finding: grid bracketing, bisection, Newton polish."""

from __future__ import annotations

import math


def first_bracket(f, lo, hi, n=220, atol=0.0):
    """Smallest sub-interval of an n-step grid on [lo, hi] where f changes sign.

    Returns ``(a, b, fa, fb)``; when a grid node is itself a root (|f| <= atol)
    the degenerate bracket ``(x, x, fx, fx)`` is returned. ``None`` if no root.
    """
    xs = [lo + (hi - lo) * i / n for i in range(n + 1)]
    prev_x = xs[0]
    prev_f = f(prev_x)
    if abs(prev_f) <= atol:
        return prev_x, prev_x, prev_f, prev_f
    for x in xs[1:]:
        fx = f(x)
        if abs(fx) <= atol:
            return x, x, fx, fx
        if (prev_f < 0) != (fx < 0):
            return prev_x, x, prev_f, fx
        prev_x, prev_f = x, fx
    return None


def bisect(f, a, b, fa=None, xtol=1e-14, maxiter=200):
    """Plain bisection on a sign-changing bracket."""
    fa = f(a) if fa is None else fa
    for _ in range(maxiter):
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0 or (b - a) <= xtol:
            return m
        if (fa < 0) == (fm < 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def bisect_newton(f, df, a, b, ftol=1e-10, maxiter=200, bisect_width=1e-4):
    """Root of f in [a, b] (f(a), f(b) of opposite sign, or a == b).

    Bisection narrows the bracket to ``bisect_width``, then Newton steps polish
    the root; any Newton step leaving the bracket falls back to bisection.
    Iteration stops once |f| <= ftol and the step has stalled, or after
    ``maxiter`` evaluations.
    """
    if a == b:
        return a
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa < 0) == (fb < 0):
        raise ValueError("root is not bracketed")
    it = 0
    while (b - a) > bisect_width and it < maxiter:
        m = 0.5 * (a + b)
        fm = f(m)
        it += 1
        if fm == 0.0:
            return m
        if (fa < 0) == (fm < 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    x = 0.5 * (a + b)
    fx = f(x)
    while it < maxiter:
        it += 1
        d = df(x)
        step = fx / d if d != 0.0 and math.isfinite(d) else math.inf
        nx = x - step
        if not (a <= nx <= b):
            nx = 0.5 * (a + b)
        nf = f(nx)
        if (fa < 0) == (nf < 0):
            a, fa = nx, nf
        else:
            b, fb = nx, nf
        if nf == 0.0 or (abs(nf) <= ftol and abs(nx - x) <= 1e-13):
            return nx
        x, fx = nx, nf
    return x
