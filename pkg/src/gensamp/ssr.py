"""Stable sampling rate and stable reconstruction rate searches driven by D_{n,m}."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .diagnostics import compute_D, compute_sec_theta, urs_theoretical_bound
from .errors import ProvenanceError, UsageError
from .gramian import assemble_A, assemble_C, assemble_U
from .model import ReconstructionSpace, SamplingSystem

# spline spaces for different n are not nested, so D need not be monotone in n
NESTED = ("trig", "legendre")
SPLINE_LOOKAHEAD = 4


@dataclass
class SSRQuery:
    """A family of spaces (``space`` with its n replaced by each grid value) against one frame.

    ``m_cap`` of None means 64 n + 64 for each n.  ``use_sec_theta`` switches
    from the D-only rates to the full reconstruction constant max(sec theta, D).
    """

    space: ReconstructionSpace
    sys: SamplingSystem
    theta: float
    grid: tuple[int, ...] = ()
    mode: str = "sampling_rate"
    m_cap: int | None = None
    use_sec_theta: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.theta <= 0:
            raise UsageError("theta must be positive")
        if self.mode not in ("sampling_rate", "reconstruction_rate"):
            raise UsageError(f"unknown mode {self.mode!r}")
        self.grid = tuple(sorted(int(n) for n in self.grid))

    def cap(self, n: int) -> int:
        return self.m_cap if self.m_cap is not None else 64 * n + 64

    def space_at(self, n: int) -> ReconstructionSpace:
        return self.space.with_n(n)

    def constant(self, n: int, m: int) -> float:
        """D_{n,m} (or max(sec theta, D)), memoized per query."""
        key = (n, m)
        if key not in self._cache:
            space = self.space_at(n)
            if 2 * m + 1 < space.dim:
                value = math.inf
            else:
                U = assemble_U(space, self.sys, m)
                A = assemble_A(space)
                value = compute_D(U, A)
                if self.use_sec_theta and math.isfinite(value):
                    value = max(value, compute_sec_theta(U, A, assemble_C(self.sys, m)))
            self._cache[key] = value
        return self._cache[key]


@dataclass(frozen=True)
class RateSearch:
    """Outcome of a sampling-rate search: ``m`` (int or inf) and D at that m.

    When the cap was hit, ``m`` is inf and ``D`` is the value at the cap.
    """

    n: int
    m: float
    D: float
    probes: int


def search_sampling_rate(query: SSRQuery, n: int, start: int | None = None) -> RateSearch:
    """min{m : D_{n,m} <= theta} by bracketing and bisection (D is non-increasing in m)."""
    lowest = query.space_at(n).min_half_width()
    cap = max(query.cap(n), lowest)
    probes = 0

    def ok(m):
        nonlocal probes
        probes += 1
        return query.constant(n, m) <= query.theta

    if start is None or start <= lowest:
        if ok(lowest):
            return RateSearch(n, lowest, query.constant(n, lowest), probes)
        lo, hi = lowest, None
        step = max(1, lowest)
    else:
        start = min(start, cap)
        if ok(start):
            hi, lo, step = start, None, max(1, start // 8)
            while lo is None:
                cand = max(lowest, hi - step)
                if ok(cand):
                    hi = cand
                    if cand == lowest:
                        return RateSearch(n, lowest, query.constant(n, lowest), probes)
                    step *= 2
                else:
                    lo = cand
        else:
            lo, hi, step = start, None, max(1, start // 8)
    while hi is None:
        cand = min(cap, lo + step)
        if ok(cand):
            hi = cand
        elif cand == cap:
            return RateSearch(n, math.inf, query.constant(n, cap), probes)
        else:
            lo, step = cand, 2 * step
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return RateSearch(n, hi, query.constant(n, hi), probes)


def stable_sampling_rate(query: SSRQuery, n: int) -> float:
    """Theta~(n; theta): least m with D_{n,m} <= theta, or inf past the cap."""
    return search_sampling_rate(query, n).m


def _last_true(ok, count: int, hint: int = 0):
    """Largest i < count with ok(i), for ok true-then-false; None if ok(0) fails.

    Brackets by doubling steps away from ``hint`` and then bisects.
    """
    i = min(max(hint, 0), count - 1)
    if ok(i):
        lo, hi, step = i, None, 1
        while hi is None and lo < count - 1:
            cand = min(count - 1, lo + step)
            if ok(cand):
                lo, step = cand, 2 * step
            else:
                hi = cand
        if hi is None:
            return lo
    else:
        lo, hi, step = None, i, 1
        while lo is None:
            if hi == 0:
                return None
            cand = max(0, hi - step)
            if ok(cand):
                lo = cand
            else:
                hi, step = cand, 2 * step
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def stable_reconstruction_rate(query: SSRQuery, m: int, hint: int | None = None) -> int:
    """Psi~(m; theta): largest n with D_{n,m} <= theta, 0 if there is none.

    Candidates are the query grid, or every n whose space fits in 2m+1
    samples.  The boundary is bracketed by doubling away from ``hint`` (the
    smallest candidate by default) and then bisected, so the expensive
    large-n sections are rarely assembled.  Spline spaces are not nested, so
    a few candidates past the boundary are also checked.
    """
    kind = query.space.kind
    first = 1 if kind == "spline" else 0
    candidates = [n for n in (query.grid or range(first, m + 2))
                  if query.space_at(n).dim <= 2 * m + 1]
    if not candidates:
        return 0

    def ok(i):
        return query.constant(candidates[i], m) <= query.theta

    start = 0
    if hint is not None:
        start = max((i for i, n in enumerate(candidates) if n <= hint), default=0)
    best = _last_true(ok, len(candidates), start)
    if kind not in NESTED:
        begin = 0 if best is None else best + 1
        for i in range(min(len(candidates) - 1, begin + SPLINE_LOOKAHEAD - 1), begin - 1, -1):
            if ok(i):
                return candidates[i]
    return 0 if best is None else candidates[best]


def rate_sweep(query: SSRQuery) -> list[dict]:
    """One row per grid n: Theta~, Theta~/n, D there, and the closed-form URS bound."""
    if not query.grid:
        raise UsageError("rate_sweep needs a nonempty grid")
    rows = []
    prev = None
    for n in query.grid:
        start = None
        if prev is not None and math.isfinite(prev.m) and prev.n > 0:
            start = math.ceil(prev.m * n / prev.n)
        res = search_sampling_rate(query, n, start=start)
        bound = None
        if query.space.kind == "trig":
            try:
                bound = urs_theoretical_bound(n, query.theta, query.sys)
            except ProvenanceError:
                bound = None
        rows.append({
            "n": n,
            "theta_tilde": res.m,
            "ratio": res.m / n if n else math.nan,
            "D": res.D,
            "bound": bound,
        })
        prev = res
    return rows
