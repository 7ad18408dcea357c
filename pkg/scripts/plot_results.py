"""Plot the CSV tables written by the presets (needs matplotlib).

Example::

    python3 scripts/plot_results.py results --out figures
"""

import argparse
import math
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from gensamp.experiments import read_table  # noqa: E402


def number(text):
    return math.inf if text == "inf" else float(text)


def grouped(rows, keys, x, y):
    groups = defaultdict(list)
    for row in rows:
        groups[tuple(row[k] for k in keys)].append((number(row[x]), number(row[y])))
    return {k: sorted(v) for k, v in groups.items()}


def line_plot(path, rows, keys, x, y, logy=True, logx=False):
    fig, ax = plt.subplots(figsize=(6, 4))
    for key, pts in grouped(rows, keys, x, y).items():
        pts = [(a, b) for a, b in pts if math.isfinite(b)]
        if pts:
            ax.plot(*zip(*pts), marker=".", label=", ".join(f"{k}={v}" for k, v in zip(keys, key)))
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    if logy:
        ax.set_yscale("log")
    if logx:
        ax.set_xscale("log", base=2)
    if keys:
        ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


PLOTS = {
    "ex1-angle-angle": ([], "n", "cos_theta", True, False),
    "ex1-error-error": ([], "n", "error", True, False),
    "ex1-noise-noise": (["eta"], "n", "error", True, False),
    "urs-noise-noise": (["m_over_n", "eta"], "n", "error", True, False),
    "urs-const-constants": (["frame", "c"], "n", "D", True, False),
    "urs-ssr-rates": (["frame", "theta"], "n", "ratio", False, False),
    "comparison-periodic-comparison": (["space"], "m", "error", True, True),
    "comparison-nonperiodic-comparison": (["space"], "m", "error", True, True),
}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("results", type=Path)
    parser.add_argument("--out", type=Path, default=Path("figures"))
    args = parser.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    for stem, (keys, x, y, logy, logx) in PLOTS.items():
        csv = args.results / f"{stem}.csv"
        if not csv.exists():
            continue
        _, rows = read_table(csv)
        if stem.startswith("urs-noise"):
            for row in rows:
                row["m_over_n"] = str(round(number(row["m"]) / number(row["n"])))
        line_plot(args.out / f"{stem}.png", rows, keys, x, y, logy, logx)
        print(args.out / f"{stem}.png")
    return 0


if __name__ == "__main__":
    sys.exit(main())
