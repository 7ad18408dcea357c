"""Assembly of the cross-Gramian U and the Gram matrices A (reconstruction) and C (sampling).

U has rows j = -m..m (sample index) and one column per basis function, with
entry (j, k) = <phi_k, psi_j> = (1/sqrt 2) * int phi_k(x) e^{-i omega_j pi x} dx.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from . import basis
from .errors import AccuracyError, UsageError
from .model import ReconstructionSpace, SamplingSystem
from .quadrature import composite_rule

KERNEL_TOL = 1e-13
ROW_CHUNK = 256


@dataclass(frozen=True)
class CrossGramian:
    """The (2m+1) x dim(T_n) measurement matrix U^{[n,m]}.

    ``entries`` is real for the trigonometric kernel (sinc values) and
    complex otherwise.
    """

    entries: np.ndarray
    row_freqs: np.ndarray
    space: ReconstructionSpace
    kernel: str
    system_tag: str = ""

    @property
    def m(self) -> int:
        return (len(self.row_freqs) - 1) // 2

    @property
    def shape(self):
        return self.entries.shape


@dataclass(frozen=True)
class GramMatrix:
    """Hermitian positive semidefinite Gram matrix; ``which`` is 'A' or 'C'."""

    entries: np.ndarray
    which: str
    bandwidth: int | None = None
    identity: bool = False


def _panel_nodes(omega_max, h, poly_degree):
    """Gauss nodes per panel: half the polynomial degree plus the half-phase across the panel.

    Calibrated so that t^d e^{i kappa t} on [-1, 1] is integrated to 1e-14.
    """
    return math.ceil((poly_degree + 1) / 2) + math.ceil(omega_max * math.pi * h / 2) + 7


def _oscillatory_columns(space, omega, breaks, poly_degree):
    h = float(np.max(np.diff(breaks)))
    q = _panel_nodes(float(np.max(np.abs(omega), initial=0.0)), h, poly_degree)
    nodes, weights = composite_rule(breaks, q)
    out = np.zeros((len(omega), space.dim), dtype=complex)
    if space.kind == "spline":
        # only d+1 B-splines live on a panel: contract per panel, then scatter
        d = space.degree
        span, values = basis.spline_nonzero(nodes.reshape(-1, q), d, space.n)
        local_basis = values * weights.reshape(-1, q)[..., None]
        first = span[:, 0] - d
        for start in range(0, len(omega), ROW_CHUNK):
            w = omega[start:start + ROW_CHUNK]
            E = np.exp(-1j * np.pi * np.multiply.outer(w, nodes)).reshape(len(w), -1, q)
            local = np.einsum("rpq,pqs->rps", E, local_basis)
            block = out[start:start + len(w)]
            for s in range(d + 1):
                np.add.at(block, (slice(None), first + s), local[:, :, s])
        return basis.SQRT_HALF * out
    phi = space.basis(nodes) * weights[:, None]
    for start in range(0, len(omega), ROW_CHUNK):
        w = omega[start:start + ROW_CHUNK]
        out[start:start + len(w)] = np.exp(-1j * np.pi * np.multiply.outer(w, nodes)) @ phi
    return basis.SQRT_HALF * out


def _kernel_matrix(space, omega, refine=1):
    if space.kind == "trig":
        return basis.sinc(np.subtract.outer(omega, np.arange(-space.n, space.n + 1))), "analytic_sinc"
    if space.kind == "spline":
        breaks = np.linspace(-1.0, 1.0, 2 * space.n * refine + 1)
        return _oscillatory_columns(space, omega, breaks, space.degree), "spline_quadrature"
    breaks = np.linspace(-1.0, 1.0, 2 * (space.n + 1) * refine + 1)
    return _oscillatory_columns(space, omega, breaks, space.n), "legendre_quadrature"


def assemble_U(space: ReconstructionSpace, sys: SamplingSystem, m: int,
               verify: bool = False) -> CrossGramian:
    """Cross-Gramian for samples |j| <= m against the basis of ``space``.

    With ``verify`` the quadrature kernels are recomputed on twice as many
    panels and an AccuracyError names the worst disagreeing entry.
    """
    if m < 0:
        raise UsageError("m must be nonnegative")
    omega = sys.frequencies(m)
    entries, kernel = _kernel_matrix(space, omega)
    if verify and kernel != "analytic_sinc":
        fine, _ = _kernel_matrix(space, omega, refine=2)
        diff = np.abs(fine - entries)
        j, k = np.unravel_index(np.argmax(diff), diff.shape)
        if diff[j, k] > KERNEL_TOL * max(1.0, np.abs(fine).max()):
            raise AccuracyError(
                f"kernel tolerance missed at row {j - m}, column {k}: {diff[j, k]:.2e}",
                estimates=(entries[j, k], fine[j, k]),
            )
    return CrossGramian(entries, omega, space, kernel, sys.describe())


def assemble_A(space: ReconstructionSpace) -> GramMatrix:
    """Gram matrix of the reconstruction basis (identity unless splines)."""
    if space.orthonormal:
        return GramMatrix(np.eye(space.dim), "A", bandwidth=0, identity=True)
    d = space.degree
    nodes, weights = composite_rule(basis.spline_breaks(space.n), d + 1)
    B = space.basis(nodes)
    A = (B * weights[:, None]).T @ B
    A = 0.5 * (A + A.T)
    return GramMatrix(A, "A", bandwidth=d)


def assemble_C(sys: SamplingSystem, m: int) -> GramMatrix:
    """Gram matrix of psi_j, |j| <= m: entry (j, k) = sinc(omega_k - omega_j)."""
    omega = sys.frequencies(m)
    return GramMatrix(basis.sinc(np.subtract.outer(omega, omega).T), "C")


# ---------------------------------------------------------------------------
# Export


def save_matrix_csv(matrix, path):
    """CSV with real/imag interleaved columns: re_0, im_0, re_1, im_1, ..."""
    M = np.asarray(matrix, dtype=complex)
    out = np.empty((M.shape[0], 2 * M.shape[1]))
    out[:, 0::2] = M.real
    out[:, 1::2] = M.imag
    header = ",".join(f"re_{k},im_{k}" for k in range(M.shape[1]))
    np.savetxt(path, out, delimiter=",", header=header, comments="# ", fmt="%.17g")


def load_matrix_csv(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    return data[:, 0::2] + 1j * data[:, 1::2]


_HEADER = struct.Struct("<4sQQ")
_MAGIC = b"GSM1"


def save_matrix_bin(matrix, path):
    """Binary container: magic, rows, cols (little endian), then row-major complex128."""
    M = np.ascontiguousarray(matrix, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, *M.shape))
        fh.write(M.tobytes())


def load_matrix_bin(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic, rows, cols = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != _MAGIC:
            raise UsageError(f"{path} is not a matrix container")
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != rows * cols:
        raise UsageError(f"{path}: expected {rows * cols} entries, found {data.size}")
    return data.reshape(rows, cols).copy()
