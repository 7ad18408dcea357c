"""Consistent and generalized (least-squares) reconstruction, evaluation and errors."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import SingularityError, UsageError
from .gramian import CrossGramian
from .model import ReconstructionSpace, SignalModel, project
from .quadrature import converged_integral

RANK_TOL = 1e-14


@dataclass
class ReconstructionResult:
    method: str
    coefficients: np.ndarray
    residual_norm: float
    n: int
    m: int
    space: ReconstructionSpace
    system_tag: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def space_tag(self) -> str:
        return self.space.tag

    def as_record(self, error: float | None = None) -> dict:
        rec = {
            "method": self.method,
            "space": self.space.tag,
            "system": self.system_tag,
            "n": self.n,
            "m": self.m,
            "coefficients": [[float(c.real), float(c.imag)] for c in np.asarray(self.coefficients, complex)],
            "residual_norm": float(self.residual_norm),
            "seed": self.meta.get("seed"),
        }
        if error is not None:
            rec["error"] = float(error)
        rec.update({k: v for k, v in self.meta.items() if k != "seed"})
        return rec

    def to_json(self, error: float | None = None) -> str:
        return json.dumps(self.as_record(error))


def _check_samples(U: CrossGramian, samples) -> np.ndarray:
    samples = np.asarray(samples, dtype=complex)
    if samples.shape[0] != U.shape[0]:
        raise UsageError(f"{samples.shape[0]} samples for a matrix with {U.shape[0]} rows")
    return samples


def _result(method, U, coef, samples, meta):
    residual = float(np.linalg.norm(U.entries @ coef - samples))
    return ReconstructionResult(method, coef, residual, U.space.n, U.m, U.space, U.system_tag, meta)


def reconstruct_consistent(U: CrossGramian, samples, strict: bool = True) -> ReconstructionResult:
    """Solve the square system U alpha = samples by pivoted LU.

    Pivots below 1e-14 * ||U||_2 raise SingularityError; with ``strict=False``
    the solve goes ahead and the result is flagged ``ill_conditioned``.
    """
    if U.shape[0] != U.shape[1]:
        raise UsageError(f"consistent sampling needs a square matrix, got {U.shape}")
    samples = _check_samples(U, samples)
    lu, piv = scipy.linalg.lu_factor(U.entries, check_finite=False)
    pivots = np.abs(np.diagonal(lu))
    tol = RANK_TOL * np.linalg.norm(U.entries, 2)
    deficient = int(np.sum(pivots <= tol))
    meta = {}
    if deficient:
        if strict:
            raise SingularityError(
                f"U is numerically singular: {deficient} pivot(s) below {tol:.1e}",
                rank_deficiency=deficient,
            )
        meta["ill_conditioned"] = True
    coef = scipy.linalg.lu_solve((lu, piv), samples.astype(np.result_type(lu, samples)))
    return _result("consistent", U, coef, samples, meta)


class LeastSquares:
    """SVD of U, reusable for many right-hand sides (read-only after construction)."""

    def __init__(self, U: CrossGramian, strict: bool = True):
        if U.shape[0] < U.shape[1]:
            raise UsageError(f"need at least as many samples as unknowns, got {U.shape}")
        self.U = U
        self.left, self.sv, self.right = scipy.linalg.svd(U.entries, full_matrices=False)
        smax = self.sv[0] if len(self.sv) else 0.0
        self.deficiency = int(np.sum(self.sv <= RANK_TOL * smax))
        if self.deficiency and strict:
            raise SingularityError(
                f"U is rank deficient: sigma_min/sigma_max = {self.sv[-1] / smax:.1e}",
                rank_deficiency=self.deficiency,
            )

    def solve(self, samples) -> np.ndarray:
        samples = _check_samples(self.U, samples)
        proj = self.left.conj().T @ samples
        return self.right.conj().T @ (proj / (self.sv if samples.ndim == 1 else self.sv[:, None]))


def reconstruct_generalized(U: CrossGramian, samples, strict: bool = True,
                            solver: LeastSquares | None = None) -> ReconstructionResult:
    """Least-squares minimizer of ||U alpha - samples||_2 through the SVD of U."""
    solver = solver or LeastSquares(U, strict=strict)
    coef = solver.solve(samples)
    meta = {"ill_conditioned": True} if solver.deficiency else {}
    return _result("generalized", U, coef, _check_samples(U, samples), meta)


def evaluate(result: ReconstructionResult, points) -> np.ndarray:
    """Values of sum_k alpha_k phi_k at points in [-1, 1]."""
    points = np.asarray(points, dtype=float)
    if np.any(np.abs(points) > 1.0):
        raise UsageError("evaluation points must lie in [-1, 1]")
    return result.space.basis(points) @ result.coefficients


def _error_panels(space: ReconstructionSpace, f: SignalModel):
    return 1 + math.ceil(space.bandwidth() + f.oscillation)


def l2_norm(f: SignalModel, rtol: float = 1e-12) -> float:
    return math.sqrt(converged_integral(lambda x: np.abs(f(x)) ** 2, 1 + math.ceil(f.oscillation),
                                        rtol=rtol, atol=1e-32))


def l2_error(result: ReconstructionResult, f: SignalModel, with_best: bool = False,
             rtol: float = 1e-12):
    """L2(-1,1) norm of f - f_tilde; optionally also ||f - Q_n f|| on the same nodes."""
    space = result.space
    coefs = [np.asarray(result.coefficients)]
    if with_best:
        coefs.append(np.asarray(project(f, space)))
    C = np.stack(coefs, axis=1)

    def integrand(x):
        fx = f(x)
        diff = fx[:, None] - space.basis(x) @ C
        return np.vstack([(np.abs(diff) ** 2).T, np.abs(fx) ** 2])

    # converge on the norms, not their squares: the squared error carries
    # roundoff of order eps * ||f|| * error that no refinement removes
    def accept(previous, estimate):
        prev, est = np.sqrt(np.maximum(previous, 0.0)), np.sqrt(np.maximum(estimate, 0.0))
        floor = 1e-14 * est[-1]
        return bool(np.all(np.abs(est[:-1] - prev[:-1]) <= np.maximum(rtol * est[:-1], floor)))

    sq = converged_integral(integrand, _error_panels(space, f), align=space.panel_align(),
                            accept=accept)
    errs = np.sqrt(np.maximum(sq[:-1], 0.0))
    return (float(errs[0]), float(errs[1])) if with_best else float(errs[0])


@dataclass(frozen=True)
class NoiseSpec:
    """Perturbations uniform on the complex disk of radius ``eta``."""

    eta: float
    seed: int
    shape: str = "complex-disk"

    def __post_init__(self):
        if self.eta < 0:
            raise UsageError("noise amplitude must be nonnegative")


def noise_vector(spec: NoiseSpec, size: int) -> np.ndarray:
    rng = np.random.default_rng(spec.seed)
    radius = spec.eta * np.sqrt(rng.random(size))
    angle = 2 * np.pi * rng.random(size)
    return radius * np.exp(1j * angle)


def add_noise(samples, spec: NoiseSpec) -> np.ndarray:
    samples = np.asarray(samples, dtype=complex)
    if spec.eta == 0:
        return samples.copy()
    return samples + noise_vector(spec, samples.shape[0])


def save_samples_csv(samples, path):
    samples = np.asarray(samples, dtype=complex)
    m = (len(samples) - 1) // 2
    with open(path, "w") as fh:
        fh.write("index,re,im\n")
        for j, s in zip(range(-m, m + 1), samples):
            fh.write(f"{j},{float(s.real)!r},{float(s.imag)!r}\n")


def load_samples_csv(path) -> np.ndarray:
    """Read (index, re, im) rows, sorted by index; indices must be -m..m."""
    data = np.loadtxt(path, delimiter=",", comments="#", skiprows=1, ndmin=2)
    order = np.argsort(data[:, 0])
    idx = data[order, 0].astype(int)
    m = (len(idx) - 1) // 2
    if not np.array_equal(idx, np.arange(-m, m + 1)):
        raise UsageError("sample indices must be exactly -m..m")
    return data[order, 1] + 1j * data[order, 2]
