"""Virtual-coupler design: maximize renderable stiffness k22.

For a plant that already satisfies the coupler-independent passivity
conditions (a), (b) and (c-i), the largest passive k22 is a function of the
coupler damping b22 alone, concave on the feasible interval (0, 4*Bf] for
typical drives.  maximize_k22 locates its maximum by a uniform 50-point
sweep (which doubles as a unimodality guard: the refined optimum must not
fall below the best sweep sample) followed by golden-section refinement of
the bracket around the best sample.  maximize_k22_over_alpha nests the same
search inside a golden-section scan of the feedforward blend alpha.

Two criteria are supported: "passivity" maximizes the exact two-port bound
k22_upper_bound; "absolute" bisects the sampled Llewellyn margin used by
check_absolute_stability on the same default grid, so the returned optimum
is consistent with that checker's verdicts.  Both objectives are evaluated
through a per-plant cache of the coupler-independent entries h11 and h12;
only the coupler port Re h22 = b22*w^2 / (k22^2 + b22^2*w^2) is recomputed
per candidate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np

from .errors import BaselineNotPassive
from .model import SystemParams, VirtualCoupler, hybrid_matrix
from .passivity import (
    _TINY,
    check_condition_a,
    check_condition_b,
    check_condition_c_i,
    default_grid,
    k22_upper_bound,
)

__all__ = [
    "OptimizationResult",
    "maximize_k22",
    "maximize_k22_over_alpha",
]

_CRITERIA = ("passivity", "absolute")
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_B22_TOL = 1e-4  # golden-section bracket width at termination
_SWEEP_POINTS = 50


@dataclass(frozen=True)
class OptimizationResult:
    """Outcome of a stiffness maximization.

    b22_opt    coupler damping at the optimum, in (0, 4*Bf]
    alpha_opt  feedforward blend at the optimum (the input alpha when only
               b22 was searched), in [0, 1]
    k22_max    largest coupler stiffness passing the criterion, >= 0
    criterion  "passivity" or "absolute"
    trace      every objective evaluation as (b22, alpha, k22) in call order
    notes      human-readable search summary (bracket, guard verdict)
    """

    b22_opt: float
    alpha_opt: float
    k22_max: float
    criterion: str
    trace: Tuple[Tuple[float, float, float], ...]
    notes: str = ""


def _normalize_criterion(criterion: str) -> str:
    c = str(criterion).strip().lower()
    if c not in _CRITERIA:
        raise ValueError(f"criterion must be one of {_CRITERIA}, got {criterion!r}")
    return c


def _require_baseline(params: SystemParams) -> None:
    """Raise BaselineNotPassive unless the coupler-independent tests pass."""
    if params.Bf <= 0.0:
        raise BaselineNotPassive(
            "the elastic element has no parallel damping (Bf = 0), so the "
            "feasible coupler-damping interval (0, 4*Bf] is empty and no "
            "virtual coupler can render the two-port passive"
        )
    failed = [
        rep.name
        for rep in (
            check_condition_a(params),
            check_condition_b(params),
            check_condition_c_i(params),
        )
        if not rep.passed
    ]
    if failed:
        raise BaselineNotPassive(
            "plant fails coupler-independent passivity condition(s) "
            + ", ".join(failed)
            + "; no choice of virtual coupler can repair them"
        )


class _LlewellynBound:
    """Bisected k22 bound against the sampled Llewellyn margin.

    h11 and h12 do not depend on the coupler, so their grid samples are
    computed once; each candidate (k22, b22) only rebuilds Re h22.  The
    margin formula and normalization mirror llewellyn_grid_margins exactly,
    and the acceptance tolerance matches check_absolute_stability's default.
    """

    def __init__(
        self, params: SystemParams, omegas: np.ndarray, margin_tol: float = 1e-8
    ) -> None:
        h = hybrid_matrix(params, VirtualCoupler(1.0, 1.0))
        with np.errstate(all="ignore"):
            h11 = h.h11.eval_grid(omegas)
            h12 = h.h12.eval_grid(omegas)
        self._re11 = h11.real
        self._re12 = h12.real
        self._abs12 = np.abs(h12)
        self._w2 = np.asarray(omegas, dtype=float) ** 2
        self._margin_tol = margin_tol

    def min_margin(self, k22: float, b22: float) -> float:
        re22 = b22 * self._w2 / (k22 * k22 + b22 * b22 * self._w2)
        prod = self._re11 * re22
        L = 2.0 * prod + self._re12 - self._abs12
        scale = 2.0 * np.abs(prod) + 2.0 * self._abs12 + _TINY
        return float(np.nanmin(L / scale))

    def feasible(self, k22: float, b22: float) -> bool:
        return self.min_margin(k22, b22) >= -self._margin_tol

    def bound(self, b22: float, tol: float = 1e-3) -> float:
        if not (b22 > 0.0 and math.isfinite(b22)):
            return 0.0
        if not self.feasible(0.0, b22):
            return 0.0
        hi = 1.0
        while self.feasible(hi, b22):
            hi *= 2.0
            if hi > 1e15:
                raise RuntimeError("k22 bound bracket failed to close")
        lo = 0.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self.feasible(mid, b22):
                lo = mid
            else:
                hi = mid
        return lo


def _make_objective(
    params: SystemParams, criterion: str, grid: Optional[np.ndarray]
) -> Callable[[float], float]:
    if criterion == "passivity":
        return lambda b22: k22_upper_bound(params, b22)
    cache = _LlewellynBound(params, default_grid(4000) if grid is None else grid)
    return cache.bound


def _golden_max(
    f: Callable[[float], float], lo: float, hi: float, tol: float
) -> Tuple[float, float]:
    """Golden-section maximum of a unimodal f on [lo, hi] to bracket < tol."""
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_PHI * (hi - lo)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def maximize_k22(
    params: SystemParams,
    criterion: str = "passivity",
    grid: Optional[np.ndarray] = None,
) -> OptimizationResult:
    """Largest k22 passing the chosen criterion, maximized over b22.

    Sweeps the objective at 50 uniform points of (0, 4*Bf], golden-sections
    the bracket around the best sample down to 1e-4, and returns whichever
    of the refined point and the best sweep sample scored higher -- the
    sweep acting as the unimodality guard for the local refinement.

    Raises BaselineNotPassive when Bf = 0 or any coupler-independent
    condition fails.
    """
    crit = _normalize_criterion(criterion)
    _require_baseline(params)

    objective = _make_objective(params, crit, grid)
    b_hi = 4.0 * params.Bf
    trace: List[Tuple[float, float, float]] = []

    def f(b22: float) -> float:
        k = objective(b22)
        trace.append((b22, params.alpha, k))
        return k

    pts = [b_hi * i / _SWEEP_POINTS for i in range(1, _SWEEP_POINTS + 1)]
    vals = [f(b) for b in pts]
    best = max(range(len(pts)), key=vals.__getitem__)
    lo_b = pts[best - 1] if best > 0 else 0.5 * pts[0]
    hi_b = pts[best + 1] if best + 1 < len(pts) else b_hi

    b_opt, k_max = _golden_max(f, lo_b, hi_b, _B22_TOL)
    guard = "guard: refinement held the sweep maximum"
    if vals[best] > k_max:
        b_opt, k_max = pts[best], vals[best]
        guard = "guard: sweep sample kept (refinement scored lower)"

    notes = (
        f"criterion={crit}; sweep {_SWEEP_POINTS} points on (0, {b_hi:g}]; "
        f"bracket [{lo_b:.6g}, {hi_b:.6g}]; {guard}"
    )
    return OptimizationResult(
        b22_opt=b_opt,
        alpha_opt=params.alpha,
        k22_max=k_max,
        criterion=crit,
        trace=tuple(trace),
        notes=notes,
    )


def maximize_k22_over_alpha(
    params: SystemParams,
    criterion: str = "passivity",
    grid: Optional[np.ndarray] = None,
    alpha_candidates: Optional[Iterable[float]] = None,
    alpha_tol: float = 5e-3,
) -> OptimizationResult:
    """Joint optimum over the feedforward blend alpha and b22.

    Runs maximize_k22 at both endpoints of [0, 1] and at golden-section
    probes in between, returning the best inner optimum; alpha values whose
    plant fails the coupler-independent conditions contribute k22 = 0.
    Passing alpha_candidates restricts the search to exactly those values
    (no interior refinement).
    """
    crit = _normalize_criterion(criterion)
    _require_baseline(params)

    results: dict[float, OptimizationResult] = {}
    trace: List[Tuple[float, float, float]] = []

    def inner(alpha: float) -> OptimizationResult:
        a = min(max(float(alpha), 0.0), 1.0)
        if a not in results:
            try:
                res = maximize_k22(params.replace(alpha=a), crit, grid)
            except BaselineNotPassive:
                res = OptimizationResult(
                    b22_opt=4.0 * params.Bf,
                    alpha_opt=a,
                    k22_max=0.0,
                    criterion=crit,
                    trace=(),
                    notes="coupler-independent conditions fail at this alpha",
                )
            results[a] = res
            trace.append((res.b22_opt, a, res.k22_max))
        return results[a]

    if alpha_candidates is not None:
        candidates = [inner(a) for a in alpha_candidates]
        if not candidates:
            raise ValueError("alpha_candidates must be non-empty when given")
        note = f"alpha restricted to {sorted(results)}"
    else:
        a_star, _ = _golden_max(lambda a: inner(a).k22_max, 0.0, 1.0, alpha_tol)
        candidates = [inner(0.0), inner(1.0), inner(a_star)]
        note = f"alpha golden-section on [0, 1] to {alpha_tol:g} plus endpoints"

    best = max(candidates, key=lambda r: r.k22_max)
    return OptimizationResult(
        b22_opt=best.b22_opt,
        alpha_opt=best.alpha_opt,
        k22_max=best.k22_max,
        criterion=crit,
        trace=tuple(trace),
        notes=f"criterion={crit}; {note}; inner: {best.notes}",
    )
