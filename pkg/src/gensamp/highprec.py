"""Extended-precision D_{n,m} for values far beyond double precision.

Consistent sections are often so ill conditioned (D ~ 1e20 .. 1e100) that a
double-precision SVD only reports a floor near 1e16.  Here the cross-Gramian
is rebuilt in mpmath arithmetic -- sinc and spherical-Bessel closed forms for
the orthonormal spaces, high-order Gauss rules for splines -- and its
smallest singular value is taken at a working precision chosen from the
result.
"""

from __future__ import annotations

import math
from functools import lru_cache

import mpmath as mp
import numpy as np

from .errors import AccuracyError, UsageError
from .model import ReconstructionSpace, SamplingSystem

DEFAULT_DPS = 40


def _sinc(t):
    return mp.mpf(1) if t == 0 else mp.sinpi(t) / (mp.pi * t)


def _sph_jn(k, a):
    """Spherical Bessel function j_k(a) for real a (any sign)."""
    if a == 0:
        return mp.mpf(1) if k == 0 else mp.mpf(0)
    sign = -1 if (a < 0 and k % 2) else 1
    a = abs(a)
    return sign * mp.sqrt(mp.pi / (2 * a)) * mp.besselj(k + mp.mpf(1) / 2, a)


@lru_cache(maxsize=32)
def _gauss(q, dps):
    """q-point Gauss-Legendre rule at ``dps`` digits (Newton from double guesses)."""
    with mp.workdps(dps + 10):
        x0, _ = np.polynomial.legendre.leggauss(q)
        nodes, weights = [], []
        for guess in x0:
            x = mp.mpf(guess)
            for _ in range(100):
                p0, p1 = mp.mpf(1), x
                for k in range(2, q + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = q * (x * p1 - p0) / (x * x - 1)
                step = p1 / dp
                x -= step
                if abs(step) < mp.mpf(10) ** (-(dps + 8)):
                    break
            p0, p1 = mp.mpf(1), x
            for k in range(2, q + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = q * (x * p1 - p0) / (x * x - 1)
            nodes.append(x)
            weights.append(2 / ((1 - x * x) * dp * dp))
    return tuple(nodes), tuple(weights)


def _gauss_count(kappa, degree, dps):
    """Nodes needed to integrate t^degree e^{i kappa t} on [-1, 1] to 10^-(dps+5)."""
    target = -(dps + 5) * math.log(10)
    q = max(2, math.ceil(kappa))
    while True:
        # Gauss error for e^{i kappa t}: 2 kappa^{2q} (q!)^4 / ((2q+1) ((2q)!)^3)
        log_err = (math.log(2) + 2 * q * math.log(max(kappa, 1e-3)) + 4 * math.lgamma(q + 1)
                   - math.log(2 * q + 1) - 3 * math.lgamma(2 * q + 1))
        if log_err < target:
            return q + math.ceil((degree + 1) / 2)
        q += 1


def _bspline_values(x, knots, d, span):
    """The d+1 nonzero B-splines at x (triangular recursion, any number type)."""
    values = [mp.mpf(1)] + [mp.mpf(0)] * d
    left = [mp.mpf(0)] * (d + 1)
    right = [mp.mpf(0)] * (d + 1)
    for j in range(1, d + 1):
        left[j] = x - knots[span + 1 - j]
        right[j] = knots[span + j] - x
        saved = mp.mpf(0)
        for r in range(j):
            temp = values[r] / (right[r + 1] + left[j - r])
            values[r] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        values[j] = saved
    return values


def _knots(space):
    d, n = space.degree, space.n
    knots = [mp.mpf(-1)] * (d + 1) + [mp.mpf(j) / n for j in range(-n + 1, n)] + [mp.mpf(1)] * (d + 1)
    return knots


def cross_gramian(space: ReconstructionSpace, sys: SamplingSystem, m: int, dps: int):
    """U^{[n,m]} as an mpmath matrix at ``dps`` digits."""
    omega = [mp.mpf(float(w)) for w in sys.frequencies(m)]
    rows, cols = len(omega), space.dim
    with mp.workdps(dps):
        U = mp.matrix(rows, cols)
        if space.kind == "trig":
            for j, w in enumerate(omega):
                for c, k in enumerate(range(-space.n, space.n + 1)):
                    U[j, c] = _sinc(w - k)
        elif space.kind == "legendre":
            for j, w in enumerate(omega):
                a = mp.pi * w
                # int P_k(x) e^{-i a x} dx = 2 (-i)^k j_k(a), times the normalizations
                for k in range(cols):
                    U[j, k] = mp.sqrt(2 * k + 1) * mp.power(-1j, k) * _sph_jn(k, a)
        else:
            _spline_cross_gramian(U, space, omega, dps)
    return U


def _spline_cross_gramian(U, space, omega, dps):
    d, n = space.degree, space.n
    knots = _knots(space)
    h = mp.mpf(1) / n
    kappa = float(max(abs(w) for w in omega)) * math.pi / (2 * n)
    nodes, weights = _gauss(_gauss_count(kappa, d, dps), dps)
    scale = 1 / mp.sqrt(2)
    for p in range(2 * n):
        a = mp.mpf(p - n) / n
        span = d + p
        for t, wt in zip(nodes, weights):
            x = a + h * (t + 1) / 2
            vals = _bspline_values(x, knots, d, span)
            ww = wt * h / 2 * scale
            for j, w in enumerate(omega):
                e = mp.expjpi(-w * x) * ww
                for r in range(d + 1):
                    U[j, span - d + r] += e * vals[r]


def gram_A(space: ReconstructionSpace, dps: int):
    """Reconstruction Gram matrix at ``dps`` digits (exact Gauss rule per panel)."""
    with mp.workdps(dps):
        if space.orthonormal:
            return mp.eye(space.dim)
        d, n = space.degree, space.n
        knots = _knots(space)
        nodes, weights = _gauss(d + 1, dps)
        h = mp.mpf(1) / n
        A = mp.matrix(space.dim, space.dim)
        for p in range(2 * n):
            a = mp.mpf(p - n) / n
            span = d + p
            for t, wt in zip(nodes, weights):
                x = a + h * (t + 1) / 2
                vals = _bspline_values(x, knots, d, span)
                for r in range(d + 1):
                    for s in range(d + 1):
                        A[span - d + r, span - d + s] += wt * h / 2 * vals[r] * vals[s]
        return A


def _min_singular_value(space, sys, m, dps):
    with mp.workdps(dps):
        U = cross_gramian(space, sys, m, dps)
        if not space.orthonormal:
            L = mp.cholesky(gram_A(space, dps))
            U = U * mp.inverse(L.T)
        if space.kind == "trig":
            s = mp.svd_r(U, compute_uv=False)
        else:
            s = mp.svd_c(U, compute_uv=False)
        return min(s), max(s)


def compute_D_mp(space: ReconstructionSpace, sys: SamplingSystem, m: int,
                 dps: int | None = None) -> float:
    """D_{n,m} = 1/sigma_min(U R^{-1}) in extended precision.

    The precision is raised until the smallest singular value is at least
    15 digits above the working unit roundoff; the frequencies are taken as
    the exact double values used everywhere else.
    """
    if 2 * m + 1 < space.dim:
        return math.inf
    dps = dps or DEFAULT_DPS
    for _ in range(6):
        smin, smax = _min_singular_value(space, sys, m, dps)
        if smin > 0 and mp.log10(smax / smin) < dps - 15:
            return float(1 / smin)
        digits = 2 * dps if smin <= 0 else int(mp.log10(smax / smin)) + 25
        dps = max(digits, dps + 20)
    raise AccuracyError(f"D_{{n,m}} not resolved at {dps} digits")


def sampling_gram(sys: SamplingSystem, m: int, dps: int):
    """C^{[m]} at ``dps`` digits."""
    omega = [mp.mpf(float(w)) for w in sys.frequencies(m)]
    with mp.workdps(dps):
        size = len(omega)
        C = mp.matrix(size, size)
        for j in range(size):
            C[j, j] = mp.mpf(1)
            for k in range(j):
                C[j, k] = C[k, j] = _sinc(omega[k] - omega[j])
        return C


def _sec_theta_values(space, sys, m, dps):
    with mp.workdps(dps):
        U = cross_gramian(space, sys, m, dps)
        if not space.orthonormal:
            U = U * mp.inverse(mp.cholesky(gram_A(space, dps)).T)
        try:
            L = mp.cholesky(sampling_gram(sys, m, dps))
        except ValueError:
            return None, None
        diag = [abs(L[i, i]) for i in range(L.rows)]
        Y = mp.lu_solve(L, U) if U.cols == 1 else mp.inverse(L) * U
        svd = mp.svd_r if space.kind == "trig" else mp.svd_c
        s = svd(Y, compute_uv=False)
        loss = mp.log10(max(s) / min(s)) + 2 * mp.log10(max(diag) / min(diag))
        return min(s), loss


def compute_sec_theta_mp(space: ReconstructionSpace, sys: SamplingSystem, m: int,
                         dps: int | None = None) -> float:
    """sec theta_{n,m} = 1/sigma_min(L^{-1} U R^{-1}) with C = L L^*, in extended precision.

    The sampling Gram of a square section is itself exponentially ill
    conditioned, so its Cholesky factor is taken at the same working
    precision as everything else.
    """
    if 2 * m + 1 < space.dim:
        return math.inf
    dps = dps or DEFAULT_DPS
    for _ in range(6):
        smin, loss = _sec_theta_values(space, sys, m, dps)
        if smin is not None and smin > 0 and loss < dps - 15:
            return float(1 / smin)
        dps = 2 * dps if smin is None else max(int(loss) + 25, dps + 20)
    raise AccuracyError(f"sec theta_{{n,m}} not resolved at {dps} digits")


def analytic_samples(f, sys: SamplingSystem, m: int, dps: int):
    """Samples of a pure exponential e^{i k pi x}/sqrt 2 at ``dps`` digits."""
    k = f.trig_frequency
    if k is None:
        raise UsageError(f"extended-precision samples need a pure exponential, not {f.tag}")
    with mp.workdps(dps):
        return mp.matrix([_sinc(mp.mpf(float(w)) - k) for w in sys.frequencies(m)])


def solve_consistent(space: ReconstructionSpace, sys: SamplingSystem, samples, dps: int):
    """Square solve U alpha = samples at ``dps`` digits; returns complex128 coefficients.

    ``samples`` may be an mpmath vector (exact data) or a numpy array (data
    already rounded, e.g. noisy).
    """
    m = space.min_half_width()
    if 2 * m + 1 != space.dim:
        raise UsageError(f"{space.tag} has no square section")
    with mp.workdps(dps):
        U = cross_gramian(space, sys, m, dps)
        if not isinstance(samples, mp.matrix):
            samples = mp.matrix([mp.mpc(complex(s)) for s in np.asarray(samples)])
        alpha = mp.lu_solve(U, samples)
        return np.array([complex(a) for a in alpha])


def consistent_dps(space: ReconstructionSpace, sys: SamplingSystem) -> int:
    """Working precision leaving about 20 digits after the loss of log10 D_{n,n}."""
    D = compute_D_mp(space, sys, space.min_half_width())
    return max(DEFAULT_DPS, int(math.log10(max(D, 1.0))) + 25)
