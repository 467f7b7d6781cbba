"""Bisection estimates of the critical exponents.

p*_- and p*_+ separate exponents whose center shoot returns to zero
(a positive ball solution exists) from those whose shoot stays positive.
The nodal exponent p**_+ is the sign change of the gluing gap

    g(p) = |v'_{p,+}(1)| - alpha*_-(p),

the boundary slope of the positive plus-ball solution against the minus
exterior critical slope: a two-region plus solution can be glued iff g > 0.
"""
from __future__ import annotations

import enum
import functools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundsViolated, NoSignChange, NoZeroFound
from .integrator import DEFAULT_R_MAX, DEFAULT_TOL, StopRule, integrate_from_center
from .model import Branch, OperatorSpec, dimension_like, sobolev_exponent
from .shooting import DEFAULT_SLOPE_TOL, critical_slope, positive_ball_solution

log = logging.getLogger(__name__)

DEFAULT_P_TOL = 1e-3
TOL_FLOOR = 1e-12


class ExponentKind(str, enum.Enum):
    P_STAR_MINUS = "p_star_minus"
    P_STAR_PLUS = "p_star_plus"
    P_STAR_STAR_PLUS = "p_star_star_plus"


@dataclass(frozen=True)
class RunRecord:
    """One indicator evaluation, enough to repeat it independently."""

    p: float
    outcome: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"p": self.p, "outcome": self.outcome, **self.detail}


@dataclass(frozen=True)
class CriticalExponentEstimate:
    which: ExponentKind
    value: float
    bracket: tuple[float, float]
    certificates: tuple[RunRecord, RunRecord]
    spec: OperatorSpec
    bound_checks: dict = field(default_factory=dict)

    @property
    def width(self) -> float:
        return self.bracket[1] - self.bracket[0]

    def to_dict(self) -> dict:
        return {
            "which": self.which.value,
            "value": self.value,
            "bracket": list(self.bracket),
            "width": self.width,
            "certificates": [c.to_dict() for c in self.certificates],
            "spec": self.spec.to_dict(),
            "bound_checks": self.bound_checks,
        }


def exponent_bounds(spec: OperatorSpec, branch: Branch | str | None = None) -> tuple[float, float]:
    """Open interval known to contain p*_-, resp. p*_+, when lambda < Lambda.

    minus: ((N~_- + 2)/(N~_- - 2), (N+2)/(N-2))
    plus:  (max(N~_+/(N~_+ - 2), (N+2)/(N-2)), (N~_+ + 2)/(N~_+ - 2))
    """
    b = spec.branch if branch is None else Branch(branch)
    sob = sobolev_exponent(spec.N)
    if b is Branch.MINUS:
        nm = dimension_like(spec, Branch.MINUS)
        return (nm + 2) / (nm - 2), sob
    npl = dimension_like(spec, Branch.PLUS)
    return max(npl / (npl - 2), sob), (npl + 2) / (npl - 2)


def center_crosses(spec: OperatorSpec, p: float, tol: float = DEFAULT_TOL, r_max: float = DEFAULT_R_MAX) -> RunRecord:
    """Indicator: does the shoot from u(0) = 1 reach a zero before r_max?"""
    prof = integrate_from_center(spec, p, 1.0, r_max=r_max, tol=tol, stop=StopRule(1))
    crossed = not prof.truncated
    detail = {"tol": tol, "r_max": r_max, "branch": spec.branch.value}
    if crossed:
        detail["rho"] = float(prof.zeros[0])
    else:
        detail["u_at_r_max"] = float(prof.u[-1])
    return RunRecord(float(p), crossed, detail)


def _level_tol(tol: float, level: int) -> float:
    return max(tol * 10.0 ** (-level), min(tol, TOL_FLOOR))


def critical_exponent_ball(
    spec: OperatorSpec,
    p_tol: float = DEFAULT_P_TOL,
    tol: float = DEFAULT_TOL,
    r_max: float = DEFAULT_R_MAX,
    bracket: tuple[float, float] | None = None,
) -> CriticalExponentEstimate:
    """Bisection on p of the center-shoot crossing indicator for ``spec.branch``.

    The integration tolerance tightens by one decade per bisection level
    (floored at 1e-12). For lambda = Lambda the known bounds collapse onto the
    Sobolev exponent, so the search starts from [sob - 1, sob + 1].
    """
    if not p_tol > 0:
        raise ValueError("p_tol must be positive")
    which = ExponentKind.P_STAR_MINUS if spec.branch is Branch.MINUS else ExponentKind.P_STAR_PLUS
    known = exponent_bounds(spec)
    if bracket is None:
        if spec.is_laplacian:
            sob = sobolev_exponent(spec.N)
            lo, hi = max(1.0 + 1e-3, sob - 1.0), sob + 1.0
        else:
            lo, hi = known
    else:
        lo, hi = bracket
    rec_lo = center_crosses(spec, lo, tol, r_max)
    rec_hi = center_crosses(spec, hi, tol, r_max)
    if not rec_lo.outcome or rec_hi.outcome:
        raise BoundsViolated(
            f"indicator not bracketed on [{lo}, {hi}]: crossed at lo={rec_lo.outcome}, at hi={rec_hi.outcome}"
        )
    level = 0
    while hi - lo > p_tol:
        level += 1
        mid = 0.5 * (lo + hi)
        rec = center_crosses(spec, mid, _level_tol(tol, level), r_max)
        if rec.outcome:
            lo, rec_lo = mid, rec
        else:
            hi, rec_hi = mid, rec
    value = 0.5 * (lo + hi)
    checks = {}
    if not spec.is_laplacian:
        a, b = known
        checks = {"lower_bound": a, "upper_bound": b, "inside_open_interval": bool(a < lo and hi < b)}
        if not (a < value < b):
            raise BoundsViolated(f"estimate {value} outside ({a}, {b}); r_max may be too small")
    return CriticalExponentEstimate(which, value, (lo, hi), (rec_lo, rec_hi), spec, checks)


@dataclass(frozen=True)
class GapValue:
    p: float
    plus_slope: float | None
    alpha_star_minus: float
    gap: float

    def to_dict(self) -> dict:
        return {"p": self.p, "plus_slope": self.plus_slope, "alpha_star_minus": self.alpha_star_minus, "gap": self.gap}


def compute_gap(spec: OperatorSpec, p: float, tol: float, slope_tol: float, r_max: float) -> GapValue:
    """Uncached gap evaluation (used for independent certificate re-runs)."""
    try:
        ball = positive_ball_solution(spec.with_branch(Branch.PLUS), p, tol=tol, r_max=r_max)
        slope = abs(ball.boundary_slope)
    except NoZeroFound:
        # no positive plus solution: nothing to glue, the gap is taken as -alpha*
        slope = None
    cs = critical_slope(Branch.MINUS, spec, p, slope_tol=slope_tol, tol=tol, r_max=r_max,
                        alpha_seed=slope if slope else None)
    g = (slope if slope is not None else 0.0) - cs.alpha_star
    return GapValue(float(p), slope, cs.alpha_star, g)


@functools.lru_cache(maxsize=512)
def _gap_cached(lam, Lam, N, p, tol, slope_tol, r_max) -> GapValue:
    return compute_gap(OperatorSpec(lam, Lam, N), p, tol, slope_tol, r_max)


def nodal_gap(
    spec: OperatorSpec,
    p: float,
    tol: float = DEFAULT_TOL,
    slope_tol: float = DEFAULT_SLOPE_TOL,
    r_max: float = DEFAULT_R_MAX,
) -> GapValue:
    """g(p) = |v'_{p,+}(1)| - alpha*_-(p); positive iff two-region plus gluing works."""
    return _gap_cached(spec.lam, spec.Lam, spec.N, float(p), tol, slope_tol, r_max)


def _gap_job(args):
    return nodal_gap(*args)


def critical_exponent_nodal(
    spec: OperatorSpec,
    p_tol: float = DEFAULT_P_TOL,
    tol: float = DEFAULT_TOL,
    slope_tol: float = DEFAULT_SLOPE_TOL,
    r_max: float = DEFAULT_R_MAX,
    p_minus: float | None = None,
    p_plus: float | None = None,
    n_probe: int = 12,
    jobs: int = 1,
) -> CriticalExponentEstimate:
    """Locate the sign change of the gluing gap between p*_- and p*_+.

    A probe grid over the open interval finds the first + to - change,
    then bisection narrows it to ``p_tol``. Constant sign on the grid raises
    NoSignChange; at lambda = Lambda the interval is empty because both
    thresholds coincide with the Sobolev exponent.
    """
    if p_minus is None:
        p_minus = critical_exponent_ball(spec.with_branch(Branch.MINUS), p_tol=min(p_tol, 1e-4), tol=tol).value
    if p_plus is None:
        p_plus = critical_exponent_ball(spec.with_branch(Branch.PLUS), p_tol=min(p_tol, 1e-4), tol=tol).value
    if spec.is_laplacian or p_plus - p_minus <= 4 * p_tol:
        raise NoSignChange(
            "no gap sign change: p**_+ merges with p* in the Laplacian limit"
            if spec.is_laplacian
            else f"thresholds too close ({p_minus}, {p_plus}) at p_tol {p_tol}"
        )
    margin = max(2 * p_tol, 1e-3 * (p_plus - p_minus))
    grid = np.linspace(p_minus + margin, p_plus - margin, n_probe)
    args = [(spec.with_branch(Branch.PLUS), float(p), tol, slope_tol, r_max) for p in grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            vals = list(ex.map(_gap_job, args))
    else:
        vals = [_gap_job(a) for a in args]
    k = next((i for i in range(len(vals) - 1) if vals[i].gap > 0 >= vals[i + 1].gap), None)
    if k is None:
        signs = "".join("+" if v.gap > 0 else "-" for v in vals)
        raise NoSignChange(f"gap sign pattern {signs} on ({p_minus:.6f}, {p_plus:.6f})")
    lo, hi = vals[k], vals[k + 1]
    while hi.p - lo.p > p_tol:
        mid = nodal_gap(spec, 0.5 * (lo.p + hi.p), tol, slope_tol, r_max)
        if mid.gap > 0:
            lo = mid
        else:
            hi = mid
    certs = (RunRecord(lo.p, True, lo.to_dict()), RunRecord(hi.p, False, hi.to_dict()))
    checks = {
        "p_star_minus": p_minus,
        "p_star_plus": p_plus,
        "ordered": bool(p_minus < lo.p and hi.p < p_plus),
        "probe_grid": [v.to_dict() for v in vals],
        "run": {"tol": tol, "slope_tol": slope_tol, "r_max": r_max},
    }
    return CriticalExponentEstimate(
        ExponentKind.P_STAR_STAR_PLUS, 0.5 * (lo.p + hi.p), (lo.p, hi.p), certs, spec.with_branch(Branch.PLUS), checks
    )


def verify_certificates(est: CriticalExponentEstimate) -> bool:
    """Repeat the bracket-end runs independently and compare outcomes."""
    lo, hi = est.certificates
    if est.which is ExponentKind.P_STAR_STAR_PLUS:
        run = est.bound_checks["run"]
        args = (est.spec, None, run["tol"], run["slope_tol"], run["r_max"])
        g_lo = compute_gap(args[0], lo.p, *args[2:]).gap
        g_hi = compute_gap(args[0], hi.p, *args[2:]).gap
        return g_lo > 0 >= g_hi
    a = center_crosses(est.spec, lo.p, lo.detail["tol"], lo.detail["r_max"])
    b = center_crosses(est.spec, hi.p, hi.detail["tol"], hi.detail["r_max"])
    return a.outcome and not b.outcome


__all__ = [
    "CriticalExponentEstimate",
    "ExponentKind",
    "GapValue",
    "RunRecord",
    "center_crosses",
    "critical_exponent_ball",
    "critical_exponent_nodal",
    "exponent_bounds",
    "nodal_gap",
    "verify_certificates",
]
