"""Composite Gauss-Legendre quadrature on [-1, 1] with panel doubling."""

from functools import lru_cache

import numpy as np

from .errors import AccuracyError

MAX_NODES = 2**20
ROUNDOFF = 10 * np.finfo(float).eps


@lru_cache(maxsize=64)
def gauss_legendre(q):
    """Gauss-Legendre nodes and weights on [-1, 1] (cached, read-only)."""
    x, w = np.polynomial.legendre.leggauss(q)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_rule(breaks, q):
    """Nodes and weights of a q-point Gauss rule on every panel of ``breaks``."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(q)
    a, b = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b) + half * x[None, :]).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


def converged_integral(integrand, panels, q=20, rtol=1e-13, atol=0.0,
                       align=1, max_nodes=MAX_NODES, accept=None):
    """Integrate a (vector-valued) function over [-1, 1] to a relative tolerance.

    ``integrand(x)`` takes an array of nodes and returns an array whose last
    axis runs over the nodes; the result sums over that axis. Uniform panels
    start at ``panels`` (rounded up to a multiple of ``align`` so that panel
    edges land on spline knots) and are doubled until two successive
    estimates agree to ``max(rtol * |I|, atol)`` in the max norm, or to the
    roundoff level of the integral of ``|integrand|``.  A custom
    ``accept(previous, estimate)`` predicate replaces that test.
    """
    panels = int(align * np.ceil(max(panels, 1) / align))
    previous = None
    while True:
        nodes, weights = composite_rule(np.linspace(-1.0, 1.0, panels + 1), q)
        values = np.asarray(integrand(nodes))
        estimate = values @ weights
        if previous is not None and accept is not None:
            if accept(previous, estimate):
                return estimate
        elif previous is not None:
            change = np.max(np.abs(estimate - previous))
            scale = np.max(np.abs(estimate))
            # roundoff floor: integrals that cancel to ~0 cannot settle relatively
            floor = ROUNDOFF * np.max(np.abs(values) @ weights)
            if change <= max(rtol * scale, atol, floor):
                return estimate
        if 2 * panels * q > max_nodes:
            raise AccuracyError(
                f"quadrature did not converge with {panels * q} nodes",
                estimates=(previous, estimate),
            )
        previous = estimate
        panels *= 2
