"""Shooting problems built on the integrator.

Positive ball solutions come from one center shoot plus rescaling. Exterior
problems start at r = 1 with u = 0, u' = alpha; the critical slope is the
threshold between trajectories that return to zero and those that stay
positive out to r_max. Decay of positive tails is classified by a log-log
fit against the fast rate r^-(N~-2) and the slow rate r^-2/(p-1).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import IndicatorNotBracketed, NoZeroFound, TailTooShort
from .integrator import DEFAULT_R_MAX, DEFAULT_TOL, RadialProfile, StopRule, integrate_exterior, integrate_from_center
from .model import Branch, OperatorSpec, dimension_like

ALPHA_CAP = 1e6
ALPHA_FLOOR = 1e-6
DEFAULT_SLOPE_TOL = 1e-9
DECAY_MARGIN = 0.25


class DecayLabel(str, enum.Enum):
    FAST = "fast"
    SLOW = "slow"
    UNDETERMINED = "pseudo_slow_or_undetermined"


@dataclass(frozen=True)
class DecayClass:
    label: DecayLabel
    fitted_exponent: float
    fit_window: tuple[float, float]
    fast_exponent: float
    slow_exponent: float

    def to_dict(self) -> dict:
        return {
            "label": self.label.value,
            "fitted_exponent": self.fitted_exponent,
            "fit_window": list(self.fit_window),
            "fast_exponent": self.fast_exponent,
            "slow_exponent": self.slow_exponent,
        }


class OutcomeKind(str, enum.Enum):
    CROSSED_ZERO = "crossed_zero"
    POSITIVE_TRUNCATED = "positive_truncated"


@dataclass(frozen=True, eq=False)
class ShootingOutcome:
    kind: OutcomeKind
    profile: RadialProfile
    rho: float | None = None
    decay: DecayClass | None = None
    tau: float | None = None
    sigma: float | None = None

    @property
    def crossed(self) -> bool:
        return self.kind is OutcomeKind.CROSSED_ZERO

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "rho": self.rho,
            "tau": self.tau,
            "sigma": self.sigma,
            "decay": None if self.decay is None else self.decay.to_dict(),
            "alpha": self.profile.meta.get("alpha"),
            "p": self.profile.p,
            "operator": self.profile.spec.branch.value,
            "r_end": self.profile.r_end,
        }


@dataclass(frozen=True)
class CriticalSlope:
    p: float
    alpha_star: float
    bracket: tuple[float, float]
    r_max_used: float
    kind: Branch = Branch.MINUS
    probes: int = 0

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "alpha_star": self.alpha_star,
            "bracket": list(self.bracket),
            "r_max_used": self.r_max_used,
            "kind": Branch(self.kind).value,
            "probes": self.probes,
        }


@dataclass(frozen=True, eq=False)
class BallSolution:
    """Positive solution on the unit ball obtained from a center shoot."""

    profile: RadialProfile
    boundary_slope: float
    rho: float
    raw: RadialProfile = field(repr=False)

    @property
    def sup_norm(self) -> float:
        return float(self.profile.u[0])


def positive_ball_solution(
    spec: OperatorSpec,
    p: float,
    tol: float = DEFAULT_TOL,
    r_max: float = DEFAULT_R_MAX,
    u0: float = 1.0,
) -> BallSolution:
    """Shoot from u(0) = u0 to the first zero rho and rescale onto [0, 1].

    Raises NoZeroFound when the shoot stays positive up to r_max, which
    happens at or above the critical exponent of ``spec``.
    """
    raw = integrate_from_center(spec, p, u0=u0, r_max=r_max, tol=tol, stop=StopRule(1))
    if raw.truncated or len(raw.zeros) == 0:
        raise NoZeroFound(f"center shoot positive up to r = {raw.r_end:.6g} at p = {p}")
    rho = float(raw.zeros[0])
    v = raw.rescale(rho)
    return BallSolution(v, float(v.du[-1]), rho, raw)


def _tail_window(profile: RadialProfile, window=None) -> tuple[float, float]:
    if window is not None:
        a, b = float(window[0]), float(window[1])
        if not (profile.r_min < a < b <= profile.r_end * (1 + 1e-12)):
            raise TailTooShort(f"window [{a}, {b}] not inside profile span")
        return a, min(b, profile.r_end)
    if not profile.truncated:
        raise TailTooShort("profile ends at a zero; no positive tail to classify")
    infl = profile.inflections
    t = float(infl[-1]) if len(infl) else max(profile.r_min, 1e-300)
    if t <= 0:
        t = profile.grid[1]
    if profile.r_end < 100.0 * t:
        raise TailTooShort(f"tail reaches r = {profile.r_end:.4g}, need two decades past t = {t:.4g}")
    return 10.0 * t, min(profile.r_end, 1e4 * t)


def classify_decay(
    profile: RadialProfile,
    spec: OperatorSpec | None = None,
    p: float | None = None,
    window=None,
    margin: float = DECAY_MARGIN,
) -> DecayClass:
    """Least-squares log-log slope of the positive tail, labelled by rate.

    The fast rate is -(N~-2) for the operator that produced the profile; the
    slow rate is -2/(p-1). Labels require the slope to lie within ``margin``
    times the gap between the two rates; Fast additionally needs
    r^{2/(p-1)} u decreasing over the window.
    """
    spec = profile.spec if spec is None else spec
    p = profile.p if p is None else p
    a, b = _tail_window(profile, window)
    rs = np.geomspace(a, b, 200)
    u, _ = profile(rs)
    if np.any(u <= 0):
        raise TailTooShort("profile not positive on the fit window")
    slope = float(np.polyfit(np.log(rs), np.log(u), 1)[0])
    fast = -(dimension_like(spec, spec.branch) - 2.0)
    slow = -2.0 / (p - 1.0)
    tolband = margin * abs(fast - slow)
    scaled = rs ** (2.0 / (p - 1.0)) * u
    if abs(slope - fast) <= tolband and np.all(np.diff(scaled) < 0):
        label = DecayLabel.FAST
    elif abs(slope - slow) <= tolband:
        label = DecayLabel.SLOW
    else:
        label = DecayLabel.UNDETERMINED
    return DecayClass(label, slope, (a, b), fast, slow)


def rho_alpha(
    kind: Branch | str,
    spec: OperatorSpec,
    p: float,
    alpha: float,
    r_max: float = DEFAULT_R_MAX,
    tol: float = DEFAULT_TOL,
    retry: bool = True,
) -> ShootingOutcome:
    """Exterior shoot at slope alpha with the outcome classified.

    A positive run whose tail still looks faster than the slow rate may yet
    return to zero beyond r_max; it is repeated once with 10 r_max.
    """
    prof = integrate_exterior(spec, kind, p, alpha, r_max=r_max, tol=tol)
    decay = None
    if prof.truncated:
        try:
            decay = classify_decay(prof)
        except TailTooShort:
            decay = None
        if retry and decay is not None and decay.fitted_exponent < decay.slow_exponent - DECAY_MARGIN * abs(
            decay.fast_exponent - decay.slow_exponent
        ):
            return rho_alpha(kind, spec, p, alpha, r_max=10 * r_max, tol=tol, retry=False)
    ext = prof.extrema
    infl = prof.inflections
    tau = float(ext[0]) if len(ext) else None
    sigma = float(infl[0]) if len(infl) else None
    if prof.truncated:
        return ShootingOutcome(OutcomeKind.POSITIVE_TRUNCATED, prof, None, decay, tau, sigma)
    return ShootingOutcome(OutcomeKind.CROSSED_ZERO, prof, float(prof.zeros[-1]), None, tau, sigma)


def _crosses(kind, spec, p, alpha, r_max, tol) -> bool:
    return rho_alpha(kind, spec, p, alpha, r_max=r_max, tol=tol).crossed


def critical_slope(
    kind: Branch | str,
    spec: OperatorSpec,
    p: float,
    slope_tol: float = DEFAULT_SLOPE_TOL,
    tol: float = DEFAULT_TOL,
    r_max: float = DEFAULT_R_MAX,
    alpha_seed: float | None = None,
    alpha_cap: float = ALPHA_CAP,
    alpha_floor: float = ALPHA_FLOOR,
) -> CriticalSlope:
    """Threshold slope between returning and positive exterior trajectories.

    Geometric probing from ``alpha_seed`` (default 1e-3) by factors of 2
    brackets the threshold, then bisection narrows it to ``slope_tol``.
    If even ``alpha_floor`` returns to zero the threshold is reported as 0.
    """
    if not p > 1:
        raise ValueError("exponent p must exceed 1")
    kind = Branch(kind)
    seed = 1e-3 if alpha_seed is None else float(alpha_seed)
    seed = min(max(seed, alpha_floor), alpha_cap)
    n = 0

    def ind(a):
        nonlocal n
        n += 1
        return _crosses(kind, spec, p, a, r_max, tol)

    a = seed
    if ind(a):
        hi = a
        while True:
            lo = hi / 2.0
            if lo < alpha_floor:
                if ind(alpha_floor):
                    return CriticalSlope(p, 0.0, (0.0, alpha_floor), r_max, kind, n)
                lo = alpha_floor
                break
            if not ind(lo):
                break
            hi = lo
    else:
        lo = a
        while True:
            hi = 2.0 * lo
            if hi > alpha_cap:
                raise IndicatorNotBracketed(f"no returning slope below cap {alpha_cap} at p = {p}")
            if ind(hi):
                break
            lo = hi
    while hi - lo > slope_tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if ind(mid):
            hi = mid
        else:
            lo = mid
    return CriticalSlope(p, 0.5 * (lo + hi), (lo, hi), r_max, kind, n)


def verify_critical_slope(cs: CriticalSlope, spec: OperatorSpec, tol: float = DEFAULT_TOL) -> bool:
    """Re-run the bracket endpoints: alpha_hi must return, alpha_lo must not."""
    lo, hi = cs.bracket
    if cs.alpha_star == 0.0:
        return _crosses(cs.kind, spec, cs.p, hi, cs.r_max_used, tol)
    return _crosses(cs.kind, spec, cs.p, hi, cs.r_max_used, tol) and not _crosses(
        cs.kind, spec, cs.p, lo, cs.r_max_used, tol
    )


@dataclass(frozen=True)
class PhaseTrajectory:
    t: np.ndarray
    x: np.ndarray
    dx: np.ndarray

    def as_rows(self):
        return list(zip(self.t.tolist(), self.x.tolist(), self.dx.tolist()))


def emden_fowler_trajectory(profile: RadialProfile, p: float | None = None) -> PhaseTrajectory:
    """x(t) = e^{2t/(p-1)} u(e^t) and dx/dt on the profile grid (r > 0)."""
    p = profile.p if p is None else p
    mask = profile.grid > 0
    r = profile.grid[mask]
    k = 2.0 / (p - 1.0)
    w = r**k
    x = w * profile.u[mask]
    dx = k * x + w * r * profile.du[mask]
    return PhaseTrajectory(np.log(r), x, dx)


def trajectories_intersect(a: PhaseTrajectory, b: PhaseTrajectory) -> bool:
    """Whether two phase-plane curves (x, dx) cross or touch."""
    from shapely.geometry import LineString

    la = LineString(np.column_stack([a.x, a.dx]))
    lb = LineString(np.column_stack([b.x, b.dx]))
    return bool(la.intersects(lb))


__all__ = [
    "BallSolution",
    "CriticalSlope",
    "DecayClass",
    "DecayLabel",
    "OutcomeKind",
    "PhaseTrajectory",
    "ShootingOutcome",
    "classify_decay",
    "critical_slope",
    "emden_fowler_trajectory",
    "positive_ball_solution",
    "rho_alpha",
    "trajectories_intersect",
    "verify_critical_slope",
]
