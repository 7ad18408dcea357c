"""Command line: ``gensamp <preset|custom|describe> [--param value]... --out DIR``.

Any ``--key value`` pair overrides a preset parameter; ``--config FILE``
supplies ``key = value`` lines (command-line pairs win).  Failures print a
one-line JSON error record to stderr, write it to ``DIR/error.json`` when an
output directory was given, and exit nonzero (2 for usage errors).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .diagnostics import report
from .errors import GenSampError, UsageError
from .experiments import PRESETS, ExperimentSpec, describe, run
from .gramian import assemble_U
from .model import (exact_samples, load_config, signal_from_config, space_from_config,
                    system_from_config)
from .solver import NoiseSpec, add_noise, l2_error, reconstruct_consistent, reconstruct_generalized


def _pairs(tokens: list[str]) -> dict:
    """Turn ``--key value`` tokens into a dict (``--key=value`` also accepted)."""
    out, i = {}, 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--"):
            raise UsageError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise UsageError(f"missing value for --{key}")
            value = tokens[i + 1]
            i += 2
        out[key.replace("-", "_")] = value
    return out


def run_custom(cfg: dict, out_dir: Path) -> dict:
    """One reconstruction described entirely by key = value settings."""
    space = space_from_config(cfg)
    sys_ = system_from_config(cfg)
    f = signal_from_config(cfg)
    m = int(cfg.get("m", space.min_half_width()))
    method = cfg.get("method", "generalized" if 2 * m + 1 > space.dim else "consistent")
    U = assemble_U(space, sys_, m)
    samples = exact_samples(f, sys_, m)
    eta = float(cfg.get("eta", 0.0))
    seed = int(cfg.get("seed", 0))
    if eta > 0:
        samples = add_noise(samples, NoiseSpec(eta, seed))
    solve = reconstruct_consistent if method == "consistent" else reconstruct_generalized
    result = solve(U, samples, strict=False)
    result.meta["seed"] = seed
    result.meta["eta"] = eta
    diag = report(space, sys_, m, sec_theta=cfg.get("sec_theta", "0") in ("1", "true"))
    record = result.as_record(error=l2_error(result, f))
    record["diagnostics"] = diag.as_record()
    record["signal"] = f.tag
    record["version"] = __version__
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "custom-result.json").write_text(json.dumps(record, indent=2) + "\n")
    return record


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gensamp",
        description="Generalized sampling experiments from nonuniform Fourier samples.",
        epilog="presets: " + ", ".join(PRESETS),
    )
    parser.add_argument("command", help="a preset name, 'custom', or 'describe'")
    parser.add_argument("target", nargs="?", help="preset to describe")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--config", type=Path, help="key = value parameter file")
    parser.add_argument("--version", action="version", version=f"gensamp {__version__}")
    return parser


def _fail(exc: Exception, out_dir: Path | None, code: int) -> int:
    record = {"status": "error", "type": type(exc).__name__, "message": str(exc)}
    estimates = getattr(exc, "estimates", None)
    if estimates is not None:
        record["estimates"] = repr(estimates)
    deficiency = getattr(exc, "rank_deficiency", None)
    if deficiency is not None:
        record["rank_deficiency"] = deficiency
    text = json.dumps(record)
    print(text, file=sys.stderr)
    if out_dir is not None:
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / "error.json").write_text(text + "\n")
        except OSError:
            pass
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args, rest = parser.parse_known_args(argv)
    try:
        overrides = load_config(args.config) if args.config else {}
        overrides.update(_pairs(rest))
        if args.command == "describe":
            if not args.target:
                raise UsageError("describe needs a preset name")
            print(describe(args.target))
            return 0
        if args.target:
            raise UsageError(f"unexpected argument {args.target!r}")
        if args.out is None:
            raise UsageError("--out DIR is required")
        if args.command == "custom":
            record = run_custom(overrides, args.out)
            err = record.get("error")
            print(f"custom: error {err:.3e}" if err is not None and math.isfinite(err) else "custom: done")
            return 0
        manifest = run(ExperimentSpec(args.command, overrides), args.out)
        for entry in manifest["files"]:
            print(f"{args.out / entry['file']}  ({entry['rows']} rows)")
        return 0
    except UsageError as exc:
        return _fail(exc, args.out, 2)
    except (GenSampError, ArithmeticError, OSError) as exc:
        return _fail(exc, args.out, 1)


if __name__ == "__main__":
    sys.exit(main())
