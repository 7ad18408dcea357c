"""Stability constants of generalized sampling.

* ``D`` -- condition number of the reconstruction, the inverse square root of
  the smallest eigenvalue of the pencil (U*U, A).
* ``sec_theta`` -- quasi-optimality constant, from the pencil (B, A) with
  B = U*U (U*CU)^{-1} U*U.
* ``kappa_U`` -- the 2-norm condition number of U itself.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg

from .errors import ConditioningError, ProvenanceError, UsageError
from .gramian import CrossGramian, GramMatrix, assemble_A, assemble_C, assemble_U
from .model import ReconstructionSpace, SamplingSystem

INF_TOL = 1e-14


def _upper_cholesky(A: GramMatrix) -> np.ndarray:
    """R with A = R^* R; banded factorization for spline Gram matrices."""
    try:
        if A.bandwidth:
            p = A.bandwidth
            n = A.entries.shape[0]
            ab = np.zeros((p + 1, n), dtype=A.entries.dtype)
            for k in range(p + 1):
                ab[p - k, k:] = np.diagonal(A.entries, k)
            cb = scipy.linalg.cholesky_banded(ab)
            R = np.zeros_like(A.entries)
            for k in range(p + 1):
                R += np.diag(cb[p - k, k:], k)
            return R
        return scipy.linalg.cholesky(A.entries)
    except np.linalg.LinAlgError as exc:
        raise UsageError("reconstruction Gram matrix is not positive definite") from exc


def whitened(U: CrossGramian, A: GramMatrix) -> np.ndarray:
    """U R^{-1}, i.e. U expressed in an orthonormal basis of the same space."""
    if A.identity:
        return U.entries
    R = _upper_cholesky(A)
    # X R = U  <=>  R^T X^T = U^T
    return scipy.linalg.solve_triangular(R, U.entries.T, trans="T", lower=False).T


def _inverse_min(values: np.ndarray) -> float:
    """1/min(values) with the infinite sentinel for values <= INF_TOL * max."""
    if len(values) == 0:
        return math.inf
    vmax, vmin = values.max(), values.min()
    if vmax <= 0 or vmin <= INF_TOL * vmax:
        return math.inf
    return 1.0 / vmin


def compute_D(U: CrossGramian, A: GramMatrix | None = None) -> float:
    """D_{n,m}; infinite when sigma_min(U R^{-1}) <= 1e-14 sigma_max."""
    A = A if A is not None else assemble_A(U.space)
    if U.shape[0] == 0 or U.shape[0] < U.shape[1]:
        return math.inf
    s = scipy.linalg.svdvals(whitened(U, A))
    return _inverse_min(s)


def compute_kappa_U(U: CrossGramian) -> float:
    s = scipy.linalg.svdvals(U.entries)
    if len(s) == 0 or U.shape[0] < U.shape[1] or s[0] == 0:
        return math.inf
    return math.inf if s[-1] <= INF_TOL * s[0] else float(s[0] / s[-1])


def compute_sec_theta(U: CrossGramian, A: GramMatrix | None, C: GramMatrix) -> float:
    """sec(theta_{n,m}): (lambda_min of the pencil (B, A))^{-1/2}."""
    A = A if A is not None else assemble_A(U.space)
    V = whitened(U, A)                      # work in an orthonormal basis: A -> I
    X = V.conj().T @ V
    M = V.conj().T @ C.entries @ V
    M = 0.5 * (M + M.conj().T)
    try:
        L = scipy.linalg.cholesky(M, lower=True)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError("U*CU is numerically singular; increase m") from exc
    # B = Y^* Y, so lambda_min(B) = sigma_min(Y)^2 without forming B
    Y = scipy.linalg.solve_triangular(L, X, lower=True)
    return _inverse_min(scipy.linalg.svdvals(Y))


def tau_inverse(sys: SamplingSystem, c: float) -> int:
    """min{m : min(omega_m, -omega_{-m}) > c}."""
    delta = sys.delta
    if not delta > 0:
        raise ProvenanceError("separation constant is unknown")
    # tau(m) > (m - 1) delta, so this many indices always suffice
    M = max(1, math.ceil(c / delta) + 2)
    omega = sys.frequencies(M)
    tau = np.minimum(omega[M:], -omega[M::-1])
    return int(np.argmax(tau > c))


def urs_theoretical_bound(n: int, theta: float, sys: SamplingSystem) -> float:
    """Closed-form upper bound on the stable sampling rate for a balanced Fourier frame.

    Returns an int, or ``math.inf`` when the bound is vacuous (g(theta) <= 1).
    """
    if sys.c1 is None or not sys.delta > 0:
        raise ProvenanceError("the bound needs frame bounds c1, c2 and the separation delta")
    expo = math.pi**2 * sys.delta * (sys.c1 - max(1.0, sys.c2) / theta**2)
    if expo <= 0:
        return math.inf
    g = math.exp(expo)
    arg = g / (g - 1) + (g + 1) / (g - 1) * n
    return tau_inverse(sys, arg)


@dataclass
class DiagnosticsReport:
    space: str
    system: str
    n: int
    m: int
    D: float
    kappa_U: float
    sec_theta: float | None = None
    recon_const: float | None = None
    recon_const_is_bound: bool = False
    bounds_used: tuple | None = None

    def as_record(self) -> dict:
        rec = asdict(self)
        for key in ("D", "kappa_U", "sec_theta", "recon_const"):
            if rec[key] is not None and math.isinf(rec[key]):
                rec[key] = "inf"
        return rec

    def to_json(self, **extra) -> str:
        return json.dumps({**self.as_record(), **extra})


def report(space: ReconstructionSpace, sys: SamplingSystem, m: int,
           sec_theta: bool = False) -> DiagnosticsReport:
    """Assemble U and A (and C when ``sec_theta``) and collect every constant."""
    U = assemble_U(space, sys, m)
    A = assemble_A(space)
    D = compute_D(U, A)
    rep = DiagnosticsReport(space.tag, sys.describe(), space.n, m, D, compute_kappa_U(U),
                            bounds_used=(sys.c1, sys.c2, sys.bounds_provenance))
    if sec_theta and math.isfinite(D):
        rep.sec_theta = compute_sec_theta(U, A, assemble_C(sys, m))
        rep.recon_const = max(rep.sec_theta, D)
    elif sec_theta:
        rep.sec_theta = math.inf
        rep.recon_const = math.inf
    elif sys.c2 is not None:
        rep.recon_const = max(1.0, math.sqrt(sys.c2)) * D
        rep.recon_const_is_bound = True
    return rep
