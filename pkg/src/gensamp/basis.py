"""Pointwise evaluation of the reconstruction bases and the sinc kernel."""

import numpy as np

SQRT_HALF = np.sqrt(0.5)


def sinc(t):
    """Normalized sinc, sin(pi t) / (pi t), with exact zeros at nonzero integers.

    The argument is reduced modulo 2 before calling ``sin`` so that integers
    give exactly zero and large arguments keep full relative accuracy.
    """
    t = np.asarray(t, dtype=float)
    r = t - 2.0 * np.round(0.5 * t)          # exact, r in [-1, 1]
    # sin(pi r) = sin(pi (1 - r)) keeps the argument near zero close to +-1
    r = np.where(r > 0.5, 1.0 - r, np.where(r < -0.5, -1.0 - r, r))
    small = np.abs(t) < 1e-4
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.sin(np.pi * r) / (np.pi * np.where(small, 1.0, t))
    pt2 = (np.pi * t) ** 2
    taylor = 1.0 - pt2 / 6.0 + pt2 * pt2 / 120.0
    out = np.where(small, taylor, out)
    return out if out.ndim else float(out)


def trig_basis(x, n):
    """Matrix of e^{i k pi x}/sqrt(2), rows = points, columns k = -n..n."""
    x = np.asarray(x, dtype=float)
    k = np.arange(-n, n + 1)
    return SQRT_HALF * np.exp(1j * np.pi * np.multiply.outer(x, k))


def legendre_basis(x, n):
    """L2(-1,1)-normalized Legendre polynomials of degree 0..n at ``x``.

    Uses the three-term recurrence directly on the normalized polynomials.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (n + 1,))
    out[..., 0] = SQRT_HALF
    if n >= 1:
        out[..., 1] = np.sqrt(1.5) * x
    for k in range(1, n):
        # p_{k+1} = a_k x p_k - (a_k / a_{k-1}) p_{k-1},  a_k = sqrt((2k+1)(2k+3))/(k+1)
        a = np.sqrt((2 * k + 1) * (2 * k + 3)) / (k + 1)
        b = (k / (k + 1)) * np.sqrt((2 * k + 3) / (2 * k - 1))
        out[..., k + 1] = a * x * out[..., k] - b * out[..., k - 1]
    return out


def spline_knots(d, n):
    """Clamped knot vector for degree-d splines with breakpoints j/n, |j| <= n."""
    inner = np.arange(-n + 1, n) / n
    return np.concatenate([np.full(d + 1, -1.0), inner, np.full(d + 1, 1.0)])


def spline_breaks(n):
    return np.arange(-n, n + 1) / n


def find_span(knots, d, x):
    """Index i with knots[i] <= x < knots[i+1], clamped into the valid range."""
    nbasis = len(knots) - d - 1
    span = np.searchsorted(knots, x, side="right") - 1
    return np.clip(span, d, nbasis - 1)


def spline_nonzero(x, d, n):
    """Values of the d+1 B-splines that are nonzero at each point.

    Returns ``(span, values)``: basis function ``span - d + r`` takes the value
    ``values[..., r]``.  This is the triangular de Boor / Cox recursion
    evaluated for all points at once.
    """
    x = np.asarray(x, dtype=float)
    t = spline_knots(d, n)
    span = find_span(t, d, x)
    values = np.zeros(x.shape + (d + 1,))
    values[..., 0] = 1.0
    left = np.empty(x.shape + (d + 1,))
    right = np.empty(x.shape + (d + 1,))
    for j in range(1, d + 1):
        left[..., j] = x - t[span + 1 - j]
        right[..., j] = t[span + j] - x
        saved = np.zeros(x.shape)
        for r in range(j):
            temp = values[..., r] / (right[..., r + 1] + left[..., j - r])
            values[..., r] = saved + right[..., r + 1] * temp
            saved = left[..., j - r] * temp
        values[..., j] = saved
    return span, values


def spline_basis(x, d, n):
    """Dense matrix of all 2n+d B-splines at ``x`` (rows = points)."""
    x = np.asarray(x, dtype=float)
    span, values = spline_nonzero(x, d, n)
    out = np.zeros(x.shape + (2 * n + d,))
    cols = span[..., None] - d + np.arange(d + 1)
    np.put_along_axis(out, cols, values, axis=-1)
    return out
