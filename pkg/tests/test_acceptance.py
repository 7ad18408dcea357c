"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run alone with ``python3 tests/test_acceptance.py`` or as part of ``pytest``;
the lines are repeated in the terminal summary.
"""

import math
import sys

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from oracles import cross_gramian, gram, panel_integral, pencil_min_mp
from gensamp import highprec, model
from gensamp.diagnostics import compute_D, compute_sec_theta, urs_theoretical_bound
from gensamp.experiments import PRESETS, ExperimentSpec
from gensamp.gramian import assemble_A, assemble_C, assemble_U
from gensamp.solver import (NoiseSpec, add_noise, l2_error, reconstruct_consistent,
                            reconstruct_generalized)
from gensamp.ssr import SSRQuery, stable_sampling_rate


def verdict(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_orthonormal_identity():
    sys_ = model.sampling_system(model.uniform(1.0))
    worst = 0.0
    for n in (4, 8, 16):
        for m in (n, 2 * n):
            U = assemble_U(model.trig(n), sys_, m)
            D = compute_D(U)
            sec = compute_sec_theta(U, None, assemble_C(sys_, m))
            worst = max(worst, abs(sec - D) / D)
    verdict(1, worst <= 1e-8, f"max |sec theta - D|/D = {worst:.2e} (tol 1e-8)")


def test_criterion_02_consistent_equals_gs():
    sys_ = model.frame_a()
    U = assemble_U(model.trig(8), sys_, 8)
    samples = model.exact_samples(model.signal("rational_cos"), sys_, 8)
    a = reconstruct_consistent(U, samples).coefficients
    b = reconstruct_generalized(U, samples).coefficients
    rel = np.linalg.norm(a - b) / np.linalg.norm(a)
    verdict(2, rel <= 1e-8, f"relative coefficient difference {rel:.2e} (tol 1e-8)")


SANDWICH = [
    (space, frame, ratio, name)
    for space, frame, ratio in [
        (model.trig(4), "a", 3), (model.trig(12), "b", 5), (model.trig(8), "c", 5),
        (model.spline(1, 6), "a", 3), (model.spline(2, 4), "b", 6),
        (model.spline(3, 5), "c", 6), (model.spline(4, 4), "a", 4),
        (model.legendre(6), "a", 5), (model.legendre(9), "c", 8), (model.legendre(4), "b", 6),
    ]
    for name in ("rational_cos", "nonperiodic_smooth")
]


def test_criterion_03_sharp_sandwich():
    failures, largest_D = [], 0.0
    for space, frame, ratio, name in SANDWICH:
        sys_ = model.FRAMES[frame]()
        f = model.signal(name)
        m = space.half_width(ratio)
        U = assemble_U(space, sys_, m)
        A = assemble_A(space)
        D = compute_D(U, A)
        largest_D = max(largest_D, D)
        res = reconstruct_generalized(U, model.exact_samples(f, sys_, m))
        err, best = l2_error(res, f, with_best=True)
        sec = compute_sec_theta(U, A, assemble_C(sys_, m))
        if not (D <= 10 and best - 1e-8 <= err <= sec * best + 1e-8):
            failures.append(f"{space.tag}/{frame}/{name}")
    verdict(3, not failures and len(SANDWICH) == 20,
            f"{len(SANDWICH) - len(failures)}/{len(SANDWICH)} combinations inside the sandwich, "
            f"max D = {largest_D:.2f}" + (f"; failing {failures}" if failures else ""))


def test_criterion_04_urs_instability():
    sys_ = model.frame_a()
    grid = list(range(5, 50, 5))
    logs = [math.log10(highprec.compute_D_mp(model.trig(n), sys_, n)) for n in grid]
    increasing = all(b > a for a, b in zip(logs[1:], logs[2:]))
    D50 = highprec.compute_D_mp(model.trig(50), sys_, 50)
    D50_double = compute_D(assemble_U(model.trig(50), sys_, 50))
    in_bracket = 1e12 <= D50 <= 1e16
    verdict(4, increasing and in_bracket,
            f"log10 D_(n,n) for n=5..45: {', '.join(f'{v:.1f}' for v in logs)} "
            f"(increasing: {increasing}); D_(50,50) = {D50:.2e} in extended precision, "
            f"{D50_double} in double; bracket [1e12, 1e16]: {in_bracket}")


def test_criterion_05_tight_frame_plateau():
    sys_ = model.frame_a()
    target = 1 / math.sqrt(2)
    grid = list(range(110, 201, 10)) + [256]
    values = {m: compute_D(assemble_U(model.trig(50), sys_, m)) for m in grid}
    bad = [m for m, v in values.items() if abs(v - target) > 0.1 * target]
    verdict(5, not bad,
            "D_(50,m): " + ", ".join(f"m={m}: {v:.4f}" for m, v in values.items())
            + f"; outside 10% of 1/sqrt2 at m = {bad}")


def test_criterion_06_linear_rate():
    parts, ok = [], True
    for frame, lo, hi in (("a", 1.5, 3.0), ("b", 3.0, 5.5)):
        sys_ = model.FRAMES[frame]()
        q = SSRQuery(model.trig(0), sys_, 10.0)
        for n in (10, 20, 40, 80):
            rate = stable_sampling_rate(q, n)
            bound = urs_theoretical_bound(n, 10.0, sys_)
            good = lo <= rate / n <= hi and (not math.isfinite(bound) or rate <= bound)
            ok &= good
            parts.append(f"{frame}:n={n} rate={rate} ({rate / n:.3f}) bound={bound}")
    spot = urs_theoretical_bound(50, 10.0, model.frame_a())
    ok &= spot == 103
    verdict(6, ok, "; ".join(parts) + f"; bound(50) = {spot}")


def test_criterion_07_noise():
    sys_ = model.frame_a()
    f = model.signal("complex_exp8")
    U = assemble_U(model.trig(20), sys_, 40)
    clean = model.exact_samples(f, sys_, 40)
    stable = np.mean([l2_error(reconstruct_generalized(U, add_noise(clean, NoiseSpec(1e-2, s))), f)
                      for s in range(10)])
    U50 = assemble_U(model.trig(50), sys_, 50)
    clean50 = model.exact_samples(f, sys_, 50)
    res = reconstruct_consistent(U50, add_noise(clean50, NoiseSpec(1e-9, 0)), strict=False)
    unstable = l2_error(res, f)
    verdict(7, stable <= 1.0 and unstable >= 1.0,
            f"mean error at m=2n=40, eta=1e-2: {stable:.3e} (<= 1); "
            f"error at m=n=50, eta=1e-9: {unstable:.3e} (>= 1)")


def test_criterion_08_instability_table():
    sys_ = model.frame_c()
    ok, parts = True, []
    for make in (lambda n: model.spline(2, n), model.legendre):
        values = []
        for n in (8, 16, 32):
            space = make(n)
            values.append(highprec.compute_D_mp(space, sys_, space.min_half_width()))
        growth = [b / a for a, b in zip(values, values[1:])]
        ok &= all(g >= 10 for g in growth)
        parts.append(f"{make(8).kind}: D_(n,n) = {', '.join(f'{v:.2e}' for v in values)}")
    verdict(8, ok, "; ".join(parts) + " (n = 8, 16, 32; >= 10x per doubling)")


def _comparison(preset, spaces, ms):
    params = ExperimentSpec(preset, {"spaces": spaces, "m": ms}).resolved()
    (table,) = PRESETS[preset].runner(params)
    return [dict(zip(table.columns, row)) for row in table.rows]


def test_criterion_09_convergence_orders():
    ms = "64,128,256,512,1024"
    ok, parts = True, []
    for space, limit in (("spline2", -2.5), ("spline4", -4.5)):
        rows = _comparison("comparison-nonperiodic", space, ms)
        m = np.array([r["m"] for r in rows], float)
        err = np.array([r["error"] for r in rows])
        slope = np.polyfit(np.log(m), np.log(err), 1)[0]
        ok &= slope <= limit and all(r["D"] <= 4 for r in rows)
        parts.append(f"{space} slope {slope:.3f} (<= {limit}; errors "
                     + ", ".join(f"{e:.2e}" for e in err) + ")")
    leg = _comparison("comparison-nonperiodic", "legendre", "512")[0]
    trig = _comparison("comparison-nonperiodic", "trig", "1024")[0]
    per = _comparison("comparison-periodic", "trig", "256")[0]
    ok &= leg["error"] <= 1e-9 and trig["error"] >= 1e-3 and per["error"] <= 1e-12
    parts.append(f"legendre m=512 {leg['error']:.2e} (<= 1e-9)")
    parts.append(f"trig m=1024 {trig['error']:.2e} (>= 1e-3)")
    parts.append(f"periodic trig m=256 {per['error']:.2e} (<= 1e-12)")
    verdict(9, ok, "; ".join(parts))


def test_criterion_10_optimality():
    sys_ = model.frame_a()
    ok, parts = True, []
    for n in (8, 16):
        space = model.trig(n)
        U = assemble_U(space, sys_, n)
        D = highprec.compute_D_mp(space, sys_, n)
        left = np.linalg.svd(U.entries)[0]
        dps = highprec.consistent_dps(space, sys_)
        # unit perturbations: the worst direction of the double SVD plus random ones
        probes = [left[:, -1]]
        rng = np.random.default_rng(n)
        for _ in range(5):
            v = rng.standard_normal(2 * n + 1) + 1j * rng.standard_normal(2 * n + 1)
            probes.append(v / np.linalg.norm(v))
        amp = max(np.linalg.norm(highprec.solve_consistent(space, sys_, v, dps)) for v in probes)
        ok &= amp >= D * (1 - 1e-6)
        parts.append(f"n={n}: amplification {amp:.6e} vs D {D:.6e}")
    verdict(10, ok, "; ".join(parts))


def test_criterion_11_oracles():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(10):
        kind = rng.choice(["trig", "spline", "legendre"])
        n = int(rng.integers(1, 9))
        space = {"trig": model.trig(n), "legendre": model.legendre(n),
                 "spline": model.spline(int(rng.integers(1, 4)), n)}[kind]
        frame = model.FRAMES[str(rng.choice(["a", "b", "c"]))]()
        m = int(rng.integers(max(space.min_half_width(), space.half_width(1.5)), 21))
        m = max(m, space.min_half_width())
        omega = frame.frequencies(m)
        Uo, Ao = cross_gramian(space, omega), gram(space)
        D = compute_D(assemble_U(space, frame, m), assemble_A(space))
        worst = max(worst, abs(D - pencil_min_mp(Uo, Ao) ** -0.5) / D)
    gram_err = 0.0
    for space, frame, m in ((model.spline(2, 5), model.frame_c(), 16),
                            (model.spline(4, 3), model.frame_b(), 12),
                            (model.legendre(7), model.frame_a(), 10),
                            (model.trig(6), model.frame_c(), 14)):
        omega = frame.frequencies(m)
        gram_err = max(gram_err,
                       np.max(np.abs(assemble_U(space, frame, m).entries - cross_gramian(space, omega))),
                       np.max(np.abs(assemble_A(space).entries - gram(space))))
    C = assemble_C(model.frame_c(), 8).entries
    w = model.frame_c().frequencies(8)
    Co = np.array([[panel_integral(lambda x: np.exp(1j * np.pi * (a - b) * x) / 2) for b in w] for a in w])
    gram_err = max(gram_err, np.max(np.abs(C - Co)))
    verdict(11, worst <= 1e-8 and gram_err <= 1e-11,
            f"D vs Rayleigh-quotient oracle max rel diff {worst:.2e} (tol 1e-8); "
            f"Gram assemblies vs panel quadrature max abs diff {gram_err:.2e} (tol 1e-11)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
