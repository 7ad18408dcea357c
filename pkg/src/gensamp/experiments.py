"""Experiment presets: each one turns resolved parameters into result tables.

A preset is a runner plus typed defaults.  ``run`` resolves the overrides,
executes the runner and writes one CSV per table (``#`` header lines echo
every parameter, the package version, the generator and the seeds) and a
JSON manifest.  Bodies are formatted with ``repr``-exact floats so reruns are
byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .diagnostics import compute_D, compute_sec_theta
from .errors import ConditioningError, UsageError
from .gramian import assemble_A, assemble_C, assemble_U
from . import highprec
from .highprec import compute_D_mp, compute_sec_theta_mp
from .model import (DEFAULT_SEED, RNG_NAME, FRAMES, exact_samples, frame_c, legendre,
                    signal, spline, trig)
from .solver import (LeastSquares, NoiseSpec, ReconstructionResult, add_noise, l2_error,
                     noise_vector, reconstruct_consistent, reconstruct_generalized)
from .ssr import SSRQuery, rate_sweep, stable_reconstruction_rate


@dataclass
class Table:
    name: str
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)


@dataclass(frozen=True)
class Preset:
    name: str
    summary: str
    defaults: dict
    runner: Callable[[dict], list[Table]]
    scaled: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# Parameter parsing and formatting


def parse_number(text: str):
    text = text.strip()
    if "/" in text:
        return float(Fraction(text))
    value = float(text)
    return int(value) if value.is_integer() and "." not in text and "e" not in text.lower() else value


def parse_grid(text: str) -> tuple:
    """``1..50``, ``2..64..2`` (with step) or a comma-separated list."""
    text = text.strip()
    if ".." in text:
        parts = [int(p) for p in text.split("..")]
        lo, hi, step = (parts + [1])[:3]
        return tuple(range(lo, hi + 1, step))
    return tuple(parse_number(p) if p.strip()[:1].isdigit() or p.strip()[:1] in "-." else p.strip()
                 for p in text.split(",") if p.strip())


def coerce(default, value):
    """Coerce a textual override to the type of the preset default."""
    if not isinstance(value, str):
        return value
    if isinstance(default, tuple):
        return parse_grid(value)
    if isinstance(default, bool):
        return value.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(Fraction(value.strip()))
    return value.strip()


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def format_param(value) -> str:
    if isinstance(value, tuple):
        return ",".join(format_value(v) for v in value)
    return format_value(value)


def scale_grid(values: tuple, scale: float) -> tuple:
    """Keep entries up to ``scale`` times the largest, and never fewer than three."""
    if scale >= 1.0 or not values:
        return values
    limit = scale * max(values)
    kept = tuple(v for v in values if v <= limit)
    return kept if len(kept) >= 3 else values[:3]


# ---------------------------------------------------------------------------
# Runners


def _system(params):
    frame = params.get("frame", "a")
    if frame not in FRAMES:
        raise UsageError(f"unknown frame {frame!r}; choose from {sorted(FRAMES)}")
    return frame_c(params["seed"]) if frame == "c" else FRAMES[frame]()


def _space(name: str, n: int):
    if name == "trig":
        return trig(n)
    if name == "legendre":
        return legendre(n)
    if name.startswith("spline"):
        return spline(int(name[len("spline"):] or 2), n)
    raise UsageError(f"unknown space {name!r}")


def run_angle(params):
    sys = _system(params)
    table = Table("angle", ("n", "m", "cos_theta", "sec_theta", "D"))
    for n in params["n"]:
        space = trig(n)
        m = space.min_half_width()
        if params["precision"] == "extended":
            sec = compute_sec_theta_mp(space, sys, m)
            D = compute_D_mp(space, sys, m)
        else:
            U = assemble_U(space, sys, m)
            D = compute_D(U)
            try:
                sec = compute_sec_theta(U, None, assemble_C(sys, m))
            except ConditioningError:
                sec = math.inf
        table.rows.append((n, m, 1.0 / sec, sec, D))
    return [table]


def run_consistent_error(params):
    sys = _system(params)
    f = signal(params["signal"])
    table = Table("error", ("n", "m", "error", "best_error", "ill_conditioned"))
    for n in params["n"]:
        U = assemble_U(trig(n), sys, n)
        res = reconstruct_consistent(U, exact_samples(f, sys, n), strict=False)
        err, best = l2_error(res, f, with_best=True)
        table.rows.append((n, n, err, best, bool(res.meta.get("ill_conditioned", False))))
    return [table]


def _consistent_extended(space, sys, f, eta, seed, cache):
    """Consistent solve at a precision that leaves ~20 digits after the loss of D_{n,n}."""
    if space not in cache:
        dps = highprec.consistent_dps(space, sys)
        cache[space] = (dps, highprec.analytic_samples(f, sys, space.min_half_width(), dps))
    dps, exact = cache[space]
    with highprec.mp.workdps(dps):
        noise = noise_vector(NoiseSpec(eta, seed), len(exact))
        data = highprec.mp.matrix([exact[i] + highprec.mp.mpc(complex(noise[i]))
                                   for i in range(len(exact))])
    coef = highprec.solve_consistent(space, sys, data, dps)
    m = space.min_half_width()
    return ReconstructionResult("consistent", coef, math.nan, space.n, m, space, sys.describe(),
                                {"precision": "extended", "dps": dps})


def run_noise(params):
    sys = _system(params)
    f = signal(params["signal"])
    extended = params["precision"] == "extended"
    seeds = range(params["seed"], params["seed"] + params["seeds"])
    table = Table("noise", ("n", "m", "eta", "seed", "error", "ill_conditioned"))
    cache = {}
    for ratio in params["ratios"]:
        for n in params["n"]:
            m = math.ceil(ratio * n)
            U = assemble_U(trig(n), sys, m)
            clean = exact_samples(f, sys, m)
            solver = None if m == n else LeastSquares(U, strict=False)
            for eta in params["eta"]:
                for seed in seeds:
                    # one draw per (eta, seed); the same stream serves every n
                    spec = NoiseSpec(float(eta), seed)
                    if m == n and extended:
                        res = _consistent_extended(trig(n), sys, f, float(eta), seed, cache)
                    elif m == n:
                        res = reconstruct_consistent(U, add_noise(clean, spec), strict=False)
                    else:
                        res = reconstruct_generalized(U, add_noise(clean, spec), strict=False,
                                                      solver=solver)
                    table.rows.append((n, m, float(eta), seed, l2_error(res, f),
                                       bool(res.meta.get("ill_conditioned", False))))
    return [table]


def run_const(params):
    table = Table("constants", ("frame", "c", "n", "m", "D"))
    for frame in params["frames"]:
        sys = _system({**params, "frame": frame})
        factors = params["c_a"] if frame == "a" else params["c_bc"]
        for c in factors:
            for n in params["n"]:
                m = math.ceil(c * n - 1e-12)
                table.rows.append((frame, float(c), n, m, compute_D(assemble_U(trig(n), sys, m))))
    return [table]


def run_ssr(params):
    table = Table("rates", ("frame", "theta", "n", "theta_tilde", "ratio", "D", "bound"))
    for frame in params["frames"]:
        sys = _system({**params, "frame": frame})
        for theta in params["theta"]:
            query = SSRQuery(trig(0), sys, float(theta), grid=params["n"])
            for row in rate_sweep(query):
                table.rows.append((frame, float(theta), row["n"], row["theta_tilde"],
                                   row["ratio"], row["D"], row["bound"]))
    return [table]


def run_recon_table(params):
    sys = _system({**params, "frame": "c"})
    table = Table("recon_constants", ("space", "n", "section", "m", "D"))
    for name in params["spaces"]:
        for n in params["n"]:
            space = _space(name, n)
            for ratio in params["ratios"]:
                m = space.half_width(ratio)
                if params["precision"] == "extended":
                    D = compute_D_mp(space, sys, m)
                else:
                    D = compute_D(assemble_U(space, sys, m), assemble_A(space))
                table.rows.append((name, n, f"{format_value(ratio)}x", m, D))
    return [table]


def run_comparison(params):
    sys = _system({**params, "frame": "c"})
    f = signal(params["signal"])
    table = Table("comparison", ("space", "m", "n", "D", "error"))
    for name in params["spaces"]:
        query = SSRQuery(_space(name, 1), sys, params["theta"])
        hint = None
        prev_m = None
        for m in params["m"]:
            if hint is not None:
                hint = int(hint * m / prev_m)
            n = stable_reconstruction_rate(query, m, hint=hint)
            smallest = 1 if query.space.kind == "spline" else 0
            if n == 0 and query.constant(smallest, m) > params["theta"]:
                table.rows.append((name, m, 0, math.inf, math.nan))
                continue
            space = _space(name, n)
            U = assemble_U(space, sys, m)
            res = reconstruct_generalized(U, exact_samples(f, sys, m))
            table.rows.append((name, m, n, query.constant(n, m), l2_error(res, f)))
            hint, prev_m = n, m
    return [table]


N50 = tuple(range(1, 51))
ETAS = (0.0, 1e-9, 1e-2)
COMPARISON_SPACES = ("trig", "spline2", "spline4", "legendre")
COMPARISON_M = (32, 64, 128, 256, 512, 1024)

PRESETS = {
    p.name: p for p in (
        Preset("ex1-angle",
               "cos theta_{n,n} of the square section against n for uniform spacing 1/2, "
               "with D_{n,n}; extended precision resolves values beyond 1e15",
               {"frame": "a", "n": N50, "precision": "extended"}, run_angle, ("n",)),
        Preset("ex1-error",
               "consistent reconstruction error ||f - f_{n,n}|| against the best "
               "approximation error ||f - Q_n f|| for f = 1/(2 + cos pi x)",
               {"frame": "a", "signal": "rational_cos", "n": N50}, run_consistent_error, ("n",)),
        Preset("ex1-noise",
               "consistent reconstruction (m = n) of exp(8 i pi x)/sqrt 2 from samples "
               "perturbed uniformly on the complex disk, eta in {0, 1e-9, 1e-2}",
               {"frame": "a", "signal": "complex_exp8", "n": N50, "ratios": (1,),
                "eta": ETAS, "seeds": 1, "precision": "double"}, run_noise, ("n",)),
        Preset("urs-noise",
               "noisy reconstruction of exp(8 i pi x)/sqrt 2 at m = n (consistent) and "
               "m = 2n (least squares), eta in {0, 1e-9, 1e-2}",
               {"frame": "a", "signal": "complex_exp8", "n": N50, "ratios": (1, 2),
                "eta": ETAS, "seeds": 1, "precision": "double"}, run_noise, ("n",)),
        Preset("urs-const",
               "D_{n,cn} against n for frame (a) with c in {1, 5/4, 3/2, 7/4, 2} and "
               "frames (b), (c) with c in {1, 7/4, 5/2, 13/4, 4}",
               {"frames": ("a", "b", "c"), "c_a": (1.0, 1.25, 1.5, 1.75, 2.0),
                "c_bc": (1.0, 1.75, 2.5, 3.25, 4.0), "n": N50}, run_const, ("n",)),
        Preset("urs-ssr",
               "stable sampling rate Theta~(n; theta)/n for frames (a)-(c), theta in "
               "{5/4, 10, 50}, with the closed-form upper bound",
               {"frames": ("a", "b", "c"), "theta": (1.25, 10.0, 50.0),
                "n": tuple(range(1, 65))}, run_ssr, ("n",)),
        Preset("recon-const-table",
               "D_{n,n} (square section) and D_{n,2n} (twice the samples) for spline(2,.), "
               "spline(4,.), legendre(.) at n in {8, 16, 32, 64} against frame (c); "
               "extended precision, the n = 64 spline entries take several minutes",
               {"spaces": ("spline2", "spline4", "legendre"), "n": (8, 16, 32, 64),
                "ratios": (1, 2), "precision": "extended"}, run_recon_table, ("n",)),
        Preset("comparison-periodic",
               "errors for the periodic test function with n = Psi~(m; 4) in each space, "
               "m in {32, ..., 1024}, frame (c)",
               {"signal": "periodic_smooth", "spaces": COMPARISON_SPACES, "m": COMPARISON_M,
                "theta": 4.0}, run_comparison, ("m",)),
        Preset("comparison-nonperiodic",
               "errors for sin 10x + 2 exp(20(x^2 - 1)) with n = Psi~(m; 4) in each "
               "space, m in {32, ..., 1024}, frame (c)",
               {"signal": "nonperiodic_smooth", "spaces": COMPARISON_SPACES, "m": COMPARISON_M,
                "theta": 4.0}, run_comparison, ("m",)),
    )
}

COMMON = {"seed": DEFAULT_SEED, "scale": 1.0}


# ---------------------------------------------------------------------------
# Specs and runs


@dataclass
class ExperimentSpec:
    """A preset name plus textual or typed overrides."""

    preset: str
    overrides: dict = field(default_factory=dict)

    def preset_def(self) -> Preset:
        if self.preset not in PRESETS:
            raise UsageError(f"unknown preset {self.preset!r}; choose from {', '.join(PRESETS)}")
        return PRESETS[self.preset]

    def resolved(self) -> dict:
        preset = self.preset_def()
        defaults = {**COMMON, **preset.defaults}
        unknown = set(self.overrides) - set(defaults)
        if unknown:
            raise UsageError(f"unknown parameter(s) for {self.preset}: {', '.join(sorted(unknown))}")
        params = {k: coerce(defaults[k], self.overrides.get(k, v)) for k, v in defaults.items()}
        if not 0 < params["scale"] <= 1:
            raise UsageError("scale must lie in (0, 1]")
        for key in preset.scaled:
            if key not in self.overrides:
                params[key] = scale_grid(params[key], params["scale"])
        return params


def describe(preset: str) -> str:
    spec = ExperimentSpec(preset)
    p = spec.preset_def()
    params = spec.resolved()
    lines = [f"{p.name}: {p.summary}"]
    lines += [f"  {k} = {format_param(v)}" for k, v in params.items()]
    return "\n".join(lines)


def header_lines(spec: ExperimentSpec, params: dict, table: Table) -> list[str]:
    lines = [f"# gensamp {__version__}", f"# preset = {spec.preset}", f"# table = {table.name}"]
    lines += [f"# {k} = {format_param(v)}" for k, v in params.items()]
    lines.append(f"# rng = {RNG_NAME}")
    if "eta" in params:
        lines.append("# noise = uniform on the complex disk, one draw per (eta, seed)")
    return lines


def render_table(table: Table) -> str:
    out = [",".join(table.columns)]
    out += [",".join(format_value(v) for v in row) for row in table.rows]
    return "\n".join(out) + "\n"


def run(spec: ExperimentSpec, out_dir) -> dict:
    """Execute a preset and write its CSV tables and manifest; returns the manifest."""
    params = spec.resolved()
    tables = spec.preset_def().runner(params)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for table in tables:
        body = render_table(table)
        path = out / f"{spec.preset}-{table.name}.csv"
        path.write_text("\n".join(header_lines(spec, params, table)) + "\n" + body)
        files.append({"file": path.name, "rows": len(table.rows),
                      "body_sha256": hashlib.sha256(body.encode()).hexdigest()})
    manifest = {
        "status": "ok",
        "tool": "gensamp",
        "version": __version__,
        "preset": spec.preset,
        "params": {k: list(v) if isinstance(v, tuple) else v for k, v in params.items()},
        "rng": RNG_NAME,
        "files": files,
    }
    (out / f"{spec.preset}-manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def read_table(path) -> tuple[dict, list[dict]]:
    """Parse a CSV written by ``run`` into (header params, rows as dicts of strings)."""
    header, lines = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            if " = " in line:
                key, value = line[1:].split(" = ", 1)
                header[key.strip()] = value.strip()
        elif line:
            lines.append(line.split(","))
    columns, body = lines[0], lines[1:]
    return header, [dict(zip(columns, row)) for row in body]
