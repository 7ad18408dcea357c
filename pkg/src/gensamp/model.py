"""Sampling frequencies, Fourier frames, reconstruction spaces and test signals.

Everything here is immutable; sampling and materialization are pure
functions of their inputs and the recorded seed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.linalg

from . import basis
from .errors import ConditioningError, UsageError
from .quadrature import converged_integral

FREQ_KINDS = ("uniform", "jittered", "explicit")
SPACE_KINDS = ("trig", "spline", "legendre")
NAMED_SIGNALS = ("rational_cos", "complex_exp8", "periodic_smooth", "nonperiodic_smooth")
# numpy's PCG64 behind default_rng; recorded in every experiment header
RNG_NAME = "numpy.random.PCG64"
DEFAULT_SEED = 20120401
# frame (c) bounds are not known in closed form; documented defaults
FRAME_C_BOUNDS = (2.0, 6.0)
SAMPLE_CHUNK = 256


# ---------------------------------------------------------------------------
# Frequencies and frames


@dataclass(frozen=True)
class FrequencySequence:
    """Nonuniform sample frequencies omega_j indexed by signed j.

    ``uniform``: omega_j = j * spacing.  ``jittered``: omega_j = j * spacing + nu_j
    with nu_j uniform in (-jitter, jitter), repaired to stay increasing,
    separated by ``spacing / 20`` and balanced.  ``explicit``: the values
    omega_{-M}..omega_M given in ``values``.
    """

    kind: str
    spacing: float | None = None
    jitter: float = 0.0
    seed: int | None = None
    values: tuple[float, ...] | None = None
    delta: float = field(default=0.0)

    def __post_init__(self):
        if self.kind not in FREQ_KINDS:
            raise UsageError(f"unknown frequency kind {self.kind!r}")
        if self.kind in ("uniform", "jittered"):
            if self.spacing is None or not self.spacing > 0:
                raise UsageError("spacing must be positive")
        if self.kind == "uniform":
            object.__setattr__(self, "delta", float(self.spacing))
        elif self.kind == "jittered":
            if self.seed is None:
                raise UsageError("jittered frequencies need a seed")
            if not 0 <= self.jitter < self.spacing:
                raise UsageError("jitter half-width must lie in [0, spacing)")
            object.__setattr__(self, "delta", self.spacing / 20.0)
        else:
            vals = np.asarray(self.values, dtype=float)
            if vals.ndim != 1 or len(vals) % 2 != 1:
                raise UsageError("explicit frequencies need an odd count (indices -M..M)")
            object.__setattr__(self, "values", tuple(float(v) for v in vals))
            gaps = np.diff(vals)
            sep = float(gaps.min()) if len(gaps) else math.inf
            check_invariants(vals, sep if len(gaps) else 0.0)
            if self.delta <= 0:
                object.__setattr__(self, "delta", sep if len(gaps) else 1.0)

    @property
    def index_range(self) -> int | None:
        """Largest materializable half-width M, or None when unbounded."""
        if self.kind == "explicit":
            return len(self.values) // 2
        return None

    def describe(self) -> str:
        if self.kind == "uniform":
            return f"uniform(spacing={self.spacing:g})"
        if self.kind == "jittered":
            return f"jittered(spacing={self.spacing:g}, jitter={self.jitter:g}, seed={self.seed})"
        return f"explicit(M={self.index_range})"

    def as_dict(self) -> dict:
        out = {"kind": self.kind, "delta": self.delta}
        if self.kind != "explicit":
            out["spacing"] = self.spacing
        if self.kind == "jittered":
            out.update(jitter=self.jitter, seed=self.seed, rng=RNG_NAME)
        if self.kind == "explicit":
            out["values"] = list(self.values)
        return out


def uniform(spacing: float) -> FrequencySequence:
    return FrequencySequence("uniform", spacing=float(spacing))


def jittered(spacing: float, jitter: float, seed: int) -> FrequencySequence:
    return FrequencySequence("jittered", spacing=float(spacing), jitter=float(jitter), seed=int(seed))


def explicit(values) -> FrequencySequence:
    return FrequencySequence("explicit", values=tuple(values))


def check_invariants(omega, delta):
    """Raise UsageError unless omega (indices -M..M) is increasing, separated and balanced."""
    omega = np.asarray(omega, dtype=float)
    M = len(omega) // 2
    gaps = np.diff(omega)
    if np.any(gaps <= 0):
        raise UsageError("frequencies must be strictly increasing")
    if len(gaps) and gaps.min() < delta:
        raise UsageError(f"frequencies are not {delta:g}-separated")
    if np.any(omega[M:] < 0) or np.any(omega[:M] >= 0):
        raise UsageError("frequencies are not balanced (sign must match index)")


@lru_cache(maxsize=128)
def _jittered_values(spacing, jitter, seed, m):
    rng = np.random.default_rng(seed)
    # draw order 0, 1, -1, 2, -2, ... so that every m reuses the same nu_j
    draws = rng.uniform(-jitter, jitter, size=2 * m + 1)
    nu = np.empty(2 * m + 1)
    nu[m] = draws[0]
    nu[m + 1:] = draws[1::2]
    nu[:m] = draws[2::2][::-1]
    omega = spacing * np.arange(-m, m + 1) + nu
    gap = spacing / 20.0
    omega[m] = max(omega[m], 0.0)
    # repair outward from j = 0 so the result does not depend on m
    for j in range(m + 1, 2 * m + 1):
        if omega[j] - omega[j - 1] < gap:
            omega[j] = omega[j - 1] + gap
            while omega[j] - omega[j - 1] < gap:
                omega[j] = np.nextafter(omega[j], np.inf)
    for j in range(m - 1, -1, -1):
        if omega[j + 1] - omega[j] < gap:
            omega[j] = omega[j + 1] - gap
            while omega[j + 1] - omega[j] < gap:
                omega[j] = np.nextafter(omega[j], -np.inf)
    omega.setflags(write=False)
    return omega


def materialize_freqs(seq: FrequencySequence, m: int) -> np.ndarray:
    """Frequencies omega_{-m}..omega_m as a float array of length 2m+1."""
    if m < 0:
        raise UsageError("m must be nonnegative")
    if seq.kind == "uniform":
        return seq.spacing * np.arange(-m, m + 1, dtype=float)
    if seq.kind == "jittered":
        return _jittered_values(seq.spacing, seq.jitter, seq.seed, int(m)).copy()
    M = seq.index_range
    if m > M:
        raise IndexError(f"explicit sequence has indices up to {M}, asked for {m}")
    return np.asarray(seq.values[M - m:M + m + 1])


def load_frequencies_csv(path) -> FrequencySequence:
    """Read a one-column CSV of frequencies (comment lines start with '#')."""
    values = []
    with open(path, newline="") as fh:
        for row in csv.reader(line for line in fh if not line.lstrip().startswith("#")):
            if not row or not row[0].strip():
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                if values:
                    raise
                # header line
    return explicit(values)


@dataclass(frozen=True)
class SamplingSystem:
    """Fourier frame psi_j(x) = e^{i omega_j pi x}/sqrt(2) with frame bounds."""

    freqs: FrequencySequence
    c1: float | None = None
    c2: float | None = None
    bounds_provenance: str | None = None

    def __post_init__(self):
        if (self.c1 is None) != (self.c2 is None):
            raise UsageError("give both frame bounds or neither")
        if self.c1 is not None and not 0 < self.c1 <= self.c2:
            raise UsageError("frame bounds must satisfy 0 < c1 <= c2")

    @property
    def delta(self) -> float:
        return self.freqs.delta

    @property
    def orthonormal(self) -> bool:
        return self.freqs.kind == "uniform" and self.freqs.spacing == 1.0

    def frequencies(self, m: int) -> np.ndarray:
        return materialize_freqs(self.freqs, m)

    def describe(self) -> str:
        return self.freqs.describe()

    def as_dict(self) -> dict:
        return {"freqs": self.freqs.as_dict(), "c1": self.c1, "c2": self.c2,
                "bounds_provenance": self.bounds_provenance}


def sampling_system(freqs: FrequencySequence, c1=None, c2=None) -> SamplingSystem:
    """Attach frame bounds: exact for uniform spacing <= 1, else user supplied.

    Jittered sequences without explicit bounds get the documented defaults
    c1 = 2, c2 = 6 (flagged ``user_supplied``).
    """
    if c1 is not None or c2 is not None:
        return SamplingSystem(freqs, c1, c2, "user_supplied")
    if freqs.kind == "uniform" and freqs.spacing <= 1.0:
        c = 1.0 / freqs.spacing
        return SamplingSystem(freqs, c, c, "exact")
    if freqs.kind == "jittered":
        return SamplingSystem(freqs, *FRAME_C_BOUNDS, "user_supplied")
    return SamplingSystem(freqs)


def frame_a() -> SamplingSystem:
    """omega_j = j/2: tight frame with c1 = c2 = 2."""
    return sampling_system(uniform(0.5))


def frame_b() -> SamplingSystem:
    """omega_j = j/4: tight frame with c1 = c2 = 4."""
    return sampling_system(uniform(0.25))


def frame_c(seed: int = DEFAULT_SEED) -> SamplingSystem:
    """omega_j = j/4 + nu_j, nu_j uniform in (-1/5, 1/5)."""
    return sampling_system(jittered(0.25, 0.2, seed))


FRAMES = {"a": frame_a, "b": frame_b, "c": frame_c}


# ---------------------------------------------------------------------------
# Reconstruction spaces


@dataclass(frozen=True)
class ReconstructionSpace:
    """Finite-dimensional reconstruction space T_n.

    ``trig``: e^{i k pi x}/sqrt(2), |k| <= n.  ``spline``: clamped B-splines of
    degree ``degree`` on the breakpoints j/n.  ``legendre``: normalized
    Legendre polynomials of degree <= n.
    """

    kind: str
    n: int
    degree: int = 0

    def __post_init__(self):
        if self.kind not in SPACE_KINDS:
            raise UsageError(f"unknown space kind {self.kind!r}")
        if self.n < 0 or (self.kind == "spline" and (self.n < 1 or self.degree < 1)):
            raise UsageError(f"invalid parameters for {self.kind} space")

    @property
    def dim(self) -> int:
        if self.kind == "trig":
            return 2 * self.n + 1
        if self.kind == "spline":
            return 2 * self.n + self.degree
        return self.n + 1

    @property
    def orthonormal(self) -> bool:
        return self.kind != "spline"

    @property
    def tag(self) -> str:
        if self.kind == "spline":
            return f"spline({self.degree},{self.n})"
        return f"{self.kind}({self.n})"

    def with_n(self, n: int) -> "ReconstructionSpace":
        return ReconstructionSpace(self.kind, n, self.degree)

    def basis(self, x) -> np.ndarray:
        """Basis functions at ``x``; rows are points, columns basis indices."""
        if self.kind == "trig":
            return basis.trig_basis(x, self.n)
        if self.kind == "spline":
            return basis.spline_basis(x, self.degree, self.n)
        return basis.legendre_basis(x, self.n)

    def column(self, k: int) -> int:
        """Column of basis index k (signed for trig)."""
        col = k + self.n if self.kind == "trig" else k
        if not 0 <= col < self.dim:
            raise UsageError(f"basis index {k} out of range for {self.tag}")
        return col

    def bandwidth(self) -> float:
        """Rough oscillation frequency (in units of pi) of the basis."""
        if self.kind == "trig":
            return float(self.n)
        if self.kind == "spline":
            return float(self.n)
        return 0.5 * self.n

    def panel_align(self) -> int:
        """Quadrature panel counts must be multiples of this (knot alignment)."""
        return 2 * self.n if self.kind == "spline" else 1

    def min_half_width(self) -> int:
        """Smallest m with 2m+1 >= dim, i.e. the square (consistent) section."""
        return max(0, math.ceil((self.dim - 1) / 2))

    def half_width(self, ratio: float) -> int:
        """Half-width m with about ``ratio`` times as many samples as dim - 1."""
        return max(self.min_half_width(), math.ceil(ratio * (self.dim - 1) / 2 - 1e-12))


def trig(n: int) -> ReconstructionSpace:
    return ReconstructionSpace("trig", n)


def spline(d: int, n: int) -> ReconstructionSpace:
    return ReconstructionSpace("spline", n, d)


def legendre(n: int) -> ReconstructionSpace:
    return ReconstructionSpace("legendre", n)


# ---------------------------------------------------------------------------
# Signals


def _rational_cos(x):
    return 1.0 / (2.0 + np.cos(np.pi * x))


def _complex_exp8(x):
    return basis.SQRT_HALF * np.exp(8j * np.pi * x)


def _periodic_smooth(x):
    return np.sin(3 * np.pi * x) + 2 * np.exp((20 / np.pi**2) * (np.cos(2 * np.pi * x) - 4 * np.cos(np.pi * x) - 5))


def _nonperiodic_smooth(x):
    return np.sin(10 * x) + 2 * np.exp(20 * (x**2 - 1))


_NAMED = {
    # evaluator, oscillation hint (units of pi)
    "rational_cos": (_rational_cos, 2.0),
    "complex_exp8": (_complex_exp8, 8.0),
    "periodic_smooth": (_periodic_smooth, 8.0),
    "nonperiodic_smooth": (_nonperiodic_smooth, 8.0),
}


@dataclass(frozen=True)
class SignalModel:
    """A function on [-1, 1] together with how its Fourier samples are obtained."""

    kind: str
    space: ReconstructionSpace | None = None
    index: int = 0
    func: Callable | None = field(default=None, compare=False)
    oscillation: float = 8.0
    sample_method: str = "quadrature"

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "basis_element":
            return self.space.basis(x)[..., self.space.column(self.index)]
        if self.kind == "custom":
            return np.asarray(self.func(x))
        return _NAMED[self.kind][0](x)

    @property
    def trig_frequency(self) -> int | None:
        """k when the signal is exactly e^{i k pi x}/sqrt(2), else None."""
        if self.kind == "complex_exp8":
            return 8
        if self.kind == "basis_element" and self.space.kind == "trig":
            return self.index
        return None

    @property
    def tag(self) -> str:
        if self.kind == "basis_element":
            return f"basis_element({self.space.tag},{self.index})"
        return self.kind


def signal(name: str) -> SignalModel:
    """One of the named test signals."""
    if name not in _NAMED:
        raise UsageError(f"unknown signal {name!r}; expected one of {NAMED_SIGNALS}")
    method = "analytic" if name == "complex_exp8" else "quadrature"
    return SignalModel(name, oscillation=_NAMED[name][1], sample_method=method)


def basis_element(space: ReconstructionSpace, index: int) -> SignalModel:
    space.column(index)
    method = "analytic" if space.kind == "trig" else "quadrature"
    return SignalModel("basis_element", space=space, index=index,
                       oscillation=space.bandwidth(), sample_method=method)


def custom(func: Callable, oscillation: float = 8.0) -> SignalModel:
    return SignalModel("custom", func=func, oscillation=oscillation)


def fourier_integrals(f: SignalModel, omega, align=1, rtol=1e-13) -> np.ndarray:
    """(1/sqrt 2) * integral of f(x) e^{-i omega pi x} over [-1, 1], by quadrature."""
    omega = np.asarray(omega, dtype=float)
    out = np.empty(len(omega), dtype=complex)
    for start in range(0, len(omega), SAMPLE_CHUNK):
        w = omega[start:start + SAMPLE_CHUNK]
        panels = 1 + math.ceil(np.max(np.abs(w), initial=0.0) + f.oscillation)

        def integrand(x, w=w):
            return basis.SQRT_HALF * f(x)[None, :] * np.exp(-1j * np.pi * np.multiply.outer(w, x))

        out[start:start + len(w)] = converged_integral(integrand, panels, rtol=rtol, align=align)
    return out


def exact_samples(f: SignalModel, sys: SamplingSystem, m: int) -> np.ndarray:
    """Samples <f, psi_j>, |j| <= m (closed form for pure exponentials)."""
    omega = sys.frequencies(m)
    k = f.trig_frequency
    if k is not None:
        return basis.sinc(omega - k).astype(complex)
    return fourier_integrals(f, omega)


def inner_products(f: SignalModel, space: ReconstructionSpace, rtol=1e-13) -> np.ndarray:
    """Vector of <f, phi_k> over the basis of ``space``."""
    k = f.trig_frequency
    if k is not None and space.kind == "trig":
        return basis.sinc(np.arange(-space.n, space.n + 1) - k).astype(complex)
    if space.kind == "trig":
        return fourier_integrals(f, np.arange(-space.n, space.n + 1, dtype=float))
    panels = 1 + math.ceil(space.bandwidth() + f.oscillation)

    def integrand(x):
        return f(x)[None, :] * space.basis(x).T.conj()

    return converged_integral(integrand, panels, rtol=rtol, align=space.panel_align())


def gram_solve(A: np.ndarray, b: np.ndarray, bandwidth: int | None = None) -> np.ndarray:
    """Solve the Hermitian positive definite system A c = b (banded if given)."""
    try:
        if bandwidth is not None:
            n = A.shape[0]
            ab = np.zeros((bandwidth + 1, n), dtype=A.dtype)
            for k in range(bandwidth + 1):
                ab[bandwidth - k, k:] = np.diagonal(A, k)
            return scipy.linalg.cho_solve_banded((scipy.linalg.cholesky_banded(ab), False), b)
        return scipy.linalg.cho_solve(scipy.linalg.cho_factor(A), b)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(f"Gram matrix is numerically singular: {exc}") from exc


def project(f: SignalModel, space: ReconstructionSpace) -> np.ndarray:
    """Coefficients of the orthogonal projection of f onto ``space``."""
    b = inner_products(f, space)
    if space.orthonormal:
        return b
    from .gramian import assemble_A

    return gram_solve(assemble_A(space).entries, b, bandwidth=space.degree)


# ---------------------------------------------------------------------------
# Plain-text configuration


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def load_config(path) -> dict:
    return parse_config(Path(path).read_text())


def _float(text) -> float:
    text = str(text).strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def frequencies_from_config(cfg: dict) -> FrequencySequence:
    kind = cfg.get("freqs", "uniform")
    if kind in FRAMES:
        return FRAMES[kind]().freqs if kind != "c" else frame_c(int(cfg.get("seed", DEFAULT_SEED))).freqs
    if kind == "uniform":
        return uniform(_float(cfg.get("spacing", "1")))
    if kind == "jittered":
        return jittered(_float(cfg["spacing"]), _float(cfg["jitter"]), int(cfg.get("seed", DEFAULT_SEED)))
    if kind == "explicit":
        return load_frequencies_csv(cfg["freqs_file"])
    raise UsageError(f"unknown frequency kind {kind!r}")


def system_from_config(cfg: dict) -> SamplingSystem:
    freqs = frequencies_from_config(cfg)
    if "c1" in cfg or "c2" in cfg:
        return sampling_system(freqs, _float(cfg["c1"]), _float(cfg["c2"]))
    return sampling_system(freqs)


def space_from_config(cfg: dict) -> ReconstructionSpace:
    kind = cfg.get("space", "trig")
    n = int(cfg.get("n", 8))
    if kind == "spline":
        return spline(int(cfg.get("degree", 2)), n)
    if kind == "trig":
        return trig(n)
    if kind == "legendre":
        return legendre(n)
    raise UsageError(f"unknown space kind {kind!r}")


def signal_from_config(cfg: dict) -> SignalModel:
    return signal(cfg.get("signal", "rational_cos"))
