"""Generalized sampling: stable reconstruction from nonuniform Fourier samples.

Submodules
----------
model        frequencies, frames, reconstruction spaces, test signals, samples
gramian      cross-Gramian U, reconstruction Gram A and sampling Gram C
solver       consistent and least-squares reconstruction, errors, noise
diagnostics  D_{n,m}, sec theta_{n,m}, kappa(U) and the closed-form rate bound
ssr          stable sampling and reconstruction rate searches
highprec     extended-precision D_{n,m} and sec theta_{n,m}
experiments  presets behind the command line
"""

__version__ = "0.1.0"

from .diagnostics import (DiagnosticsReport, compute_D, compute_kappa_U, compute_sec_theta,
                          report, urs_theoretical_bound)
from .errors import (AccuracyError, ConditioningError, GenSampError, ProvenanceError,
                     SingularityError, UsageError)
from .gramian import CrossGramian, GramMatrix, assemble_A, assemble_C, assemble_U
from .highprec import compute_D_mp, compute_sec_theta_mp
from .model import (FRAMES, FrequencySequence, ReconstructionSpace, SamplingSystem, SignalModel,
                    basis_element, custom, exact_samples, explicit, frame_a, frame_b, frame_c,
                    jittered, legendre, materialize_freqs, project, sampling_system, signal,
                    spline, trig, uniform)
from .solver import (NoiseSpec, ReconstructionResult, add_noise, evaluate, l2_error,
                     reconstruct_consistent, reconstruct_generalized)
from .ssr import SSRQuery, stable_reconstruction_rate, stable_sampling_rate, rate_sweep
