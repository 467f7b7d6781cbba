"""Sign-changing radial solutions on the unit ball and concentration sweeps.

A k-nodal solution is the center shoot from u(0) = 1 continued through its
first k-1 zeros and rescaled so that the k-th zero lands on r = 1. Because
the resolver applies the eigenvalue-weight rule to the actual signs, each
annular piece automatically solves the flipped-operator problem that an
explicit gluing would use; ``gluing_check`` confirms this independently.
"""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvariantViolation, NumericalFailure, ZeroCountNotReached
from .integrator import DEFAULT_R_MAX, DEFAULT_TOL, RadialProfile, StopRule, integrate_exterior, integrate_from_center
from .model import OperatorSpec, dimension_like
from .shooting import positive_ball_solution

log = logging.getLogger(__name__)

DEFAULT_EPSILONS = (0.2, 0.1, 0.05, 0.02, 0.01)
CONVERGENCE_REL = 0.02


@dataclass(frozen=True)
class NodalDecomposition:
    """Radii and magnitudes of a k-region solution normalized to the unit ball.

    ``inflection_radii[i]`` lists the sign changes of u'' inside region i.
    """

    k: int
    nodal_radii: tuple[float, ...]
    extremum_radii: tuple[float, ...]
    extremum_values: tuple[float, ...]
    inflection_radii: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.nodal_radii) != self.k - 1 or len(self.extremum_radii) != self.k:
            raise ValueError("inconsistent region count")

    def check_interlacing(self) -> None:
        seq = [self.extremum_radii[0]]
        for r, s in zip(self.nodal_radii, self.extremum_radii[1:]):
            seq += [r, s]
        seq.append(1.0)
        if self.extremum_radii[0] != 0.0 or any(b <= a for a, b in zip(seq, seq[1:])):
            raise InvariantViolation(f"radii do not interlace: {seq}")
        if any(not m > 0 for m in self.extremum_values):
            raise InvariantViolation("extremum magnitudes must be positive")

    @property
    def M(self) -> tuple[float, ...]:
        return self.extremum_values

    def t(self, i: int) -> float | None:
        ts = self.inflection_radii[i]
        return ts[0] if len(ts) == 1 else None

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "nodal_radii": list(self.nodal_radii),
            "extremum_radii": list(self.extremum_radii),
            "extremum_values": list(self.extremum_values),
            "inflection_radii": [list(t) for t in self.inflection_radii],
        }


@dataclass(frozen=True, eq=False)
class NodalSolution:
    profile: RadialProfile
    decomposition: NodalDecomposition
    rho: float
    raw: RadialProfile = field(repr=False)

    @property
    def boundary_slope(self) -> float:
        return float(self.profile.du[-1])


def decompose(profile: RadialProfile, k: int) -> NodalDecomposition:
    """Read nodal radii, extrema and inflections of a unit-ball profile."""
    zeros = [z for z in profile.zeros if z < 1.0 - 1e-12][: k - 1]
    edges = [0.0, *zeros, 1.0]
    ext = profile.extrema
    infl = profile.inflections
    s = [0.0]
    for i in range(1, k):
        a, b = edges[i], edges[i + 1]
        inside = [e for e in ext if a < e < b]
        if len(inside) != 1:
            raise InvariantViolation(f"region {i} has {len(inside)} interior extrema")
        s.append(float(inside[0]))
    M = []
    for si in s:
        if si == 0.0:
            M.append(abs(float(profile.u[0])))
        else:
            M.append(abs(profile(si)[0]))
    ts = tuple(tuple(float(t) for t in infl if edges[i] < t < edges[i + 1]) for i in range(k))
    return NodalDecomposition(k, tuple(float(z) for z in zeros), tuple(s), tuple(M), ts)


def build_nodal(
    spec: OperatorSpec,
    p: float,
    k: int,
    tol: float = DEFAULT_TOL,
    r_max: float = DEFAULT_R_MAX,
    u0: float = 1.0,
) -> NodalSolution:
    """k-region radial solution on the unit ball with u(0) > 0.

    Raises ZeroCountNotReached(found, k, r_end) when the shoot has fewer than
    k zeros before r_max; for the plus operator above p**_+ this is the
    expected nonexistence outcome.
    """
    if k < 1:
        raise ValueError("need k >= 1 nodal regions")
    raw = integrate_from_center(spec, p, u0=u0, r_max=r_max, tol=tol, stop=StopRule(k))
    z = raw.zeros
    if len(z) < k:
        raise ZeroCountNotReached(len(z), k, raw.r_end)
    rho = float(z[k - 1])
    prof = raw.rescale(rho)
    dec = decompose(prof, k)
    dec.check_interlacing()
    return NodalSolution(prof, dec, rho, raw)


@dataclass(frozen=True)
class ScalingReport:
    r1: float
    r1_predicted: float
    residual_radius: float
    slope_lhs: float
    slope_rhs: float
    residual_slope: float
    M0: float
    ball_sup: float

    @property
    def M0_exceeds_ball(self) -> bool:
        return self.M0 > self.ball_sup

    def to_dict(self) -> dict:
        return dict(self.__dict__, M0_exceeds_ball=self.M0_exceeds_ball)


def scaling_identity_check(sol: NodalSolution, spec: OperatorSpec, p: float, tol: float = DEFAULT_TOL) -> ScalingReport:
    """Compare the first nodal region with an independent positive ball solution.

    Uniqueness forces r1 = (|v|_inf / M0)^{(p-1)/2} and
    r1^{(p+1)/(p-1)} u'(r1) = v'(1). The ball solution is shot from
    u(0) = 2 so that no integration is shared with ``sol``.
    """
    dec = sol.decomposition
    if dec.k < 2:
        raise ValueError("scaling identities need at least two regions")
    ball = positive_ball_solution(spec, p, tol=tol, u0=2.0)
    r1 = dec.nodal_radii[0]
    M0 = dec.extremum_values[0]
    pred = (ball.sup_norm / M0) ** ((p - 1.0) / 2.0)
    _, du_r1 = sol.profile(r1)
    lhs = r1 ** ((p + 1.0) / (p - 1.0)) * du_r1
    rhs = ball.boundary_slope
    return ScalingReport(
        r1, pred, abs(r1 - pred) / r1, lhs, rhs, abs(lhs - rhs) / abs(rhs), M0, ball.sup_norm
    )


@dataclass(frozen=True)
class GluingReport:
    alpha: float
    max_abs_diff: float
    sup: float
    rel_diff: float
    n_points: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def gluing_check(sol: NodalSolution, spec: OperatorSpec, p: float, tol: float = DEFAULT_TOL) -> GluingReport:
    """Rescaled second region versus an independent exterior shoot.

    On [r1, r2] the sign of u is flipped, so w(r) = r1^{2/(p-1)} |u(r1 r)|
    solves the exterior problem for the opposite operator with slope
    |v'(1)|, v the positive ball solution of ``spec``. Both are compared on
    the exterior run's own grid.
    """
    dec = sol.decomposition
    if dec.k < 2:
        raise ValueError("gluing needs at least two regions")
    ball = positive_ball_solution(spec, p, tol=tol, u0=2.0)
    alpha = abs(ball.boundary_slope)
    ext = integrate_exterior(spec, spec.branch.opposite, p, alpha, tol=tol)
    r1 = dec.nodal_radii[0]
    r2 = dec.nodal_radii[1] if dec.k > 2 else 1.0
    # annulus [r1, r2] maps to [1, r2/r1]
    span = min(r2 / r1, ext.r_end)
    rr = ext.grid[(ext.grid >= 1.0) & (ext.grid <= span)]
    uu, _ = sol.profile(np.clip(rr * r1, r1, r2))
    w = r1 ** (2.0 / (p - 1.0)) * np.abs(uu)
    we = ext.u[(ext.grid >= 1.0) & (ext.grid <= span)]
    diff = float(np.max(np.abs(w - we)))
    sup = float(np.max(np.abs(we)))
    return GluingReport(alpha, diff, sup, diff / sup, int(rr.size))


def inflection_bound_ratio(sol: NodalSolution, spec: OperatorSpec, p: float) -> float:
    """t1 |u(t1)|^{(p-1)/2} divided by its lower bound sqrt(2 lam (N-1)/(p+1)).

    t1 is the inflection radius of the second region; the ratio is >= 1
    for exact solutions.
    """
    t1 = sol.decomposition.t(1)
    if t1 is None:
        raise InvariantViolation("second region lacks a unique inflection")
    u_t1, _ = sol.profile(t1)
    bound = math.sqrt(2.0 * spec.lam * (spec.N - 1.0) / (p + 1.0))
    return t1 * abs(u_t1) ** ((p - 1.0) / 2.0) / bound


# -- sweeps ---------------------------------------------------------------


@dataclass(frozen=True)
class SweepRecord:
    epsilon: float
    p: float
    decomposition: NodalDecomposition | None
    boundary_slope: float | None
    diagnostics: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def row(self, k: int) -> dict:
        out = {"epsilon": self.epsilon, "p": self.p}
        d = self.decomposition
        for i in range(k):
            out[f"M{i}"] = d.extremum_values[i] if d else float("nan")
        for i in range(1, k):
            out[f"r{i}"] = d.nodal_radii[i - 1] if d else float("nan")
            out[f"s{i}"] = d.extremum_radii[i] if d else float("nan")
        out["boundary_slope"] = self.boundary_slope if self.boundary_slope is not None else float("nan")
        out.update(self.diagnostics)
        out["error"] = self.error or ""
        return out


def sweep_diagnostics(dec: NodalDecomposition, p: float) -> dict:
    e = (p - 1.0) / 2.0
    M = dec.extremum_values
    out = {}
    if dec.k >= 2:
        out["r1_hat"] = dec.nodal_radii[0] * M[0] ** e
        out["s1_hat"] = dec.extremum_radii[1] * M[1] ** e
    for i in range(dec.k - 1):
        out[f"M{i}/M{i + 1}"] = M[i] / M[i + 1]
    return out


def _sweep_job(args):
    spec, p, k, eps, tol, r_max = args
    try:
        sol = build_nodal(spec, p, k, tol=tol, r_max=r_max)
    except (NumericalFailure, InvariantViolation) as exc:
        return SweepRecord(eps, p, None, None, {}, f"{type(exc).__name__}: {exc}")
    dec = sol.decomposition
    return SweepRecord(eps, p, dec, sol.boundary_slope, sweep_diagnostics(dec, p))


def _check_eps(eps_list) -> list[float]:
    eps = [float(e) for e in eps_list]
    if not eps or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilon list must be positive and strictly decreasing")
    return eps


def _fan_out(fn, jobs_args, jobs: int):
    if jobs > 1 and len(jobs_args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, jobs_args))
    return [fn(a) for a in jobs_args]


def concentration_sweep(
    spec: OperatorSpec,
    k: int,
    epsilon_list=DEFAULT_EPSILONS,
    p_crit_estimate: float = None,
    tol: float = DEFAULT_TOL,
    r_max: float = DEFAULT_R_MAX,
    jobs: int = 1,
) -> list[SweepRecord]:
    """One k-region solution per epsilon at p = p_crit_estimate - epsilon.

    Entries that fail are kept with their error text; results follow the
    order of ``epsilon_list``.
    """
    eps = _check_eps(epsilon_list)
    if p_crit_estimate is None:
        raise ValueError("p_crit_estimate is required")
    args = [(spec, p_crit_estimate - e, k, e, tol, r_max) for e in eps]
    return _fan_out(_sweep_job, args, jobs)


@dataclass(frozen=True)
class PositiveRecord:
    epsilon: float
    p: float
    values: dict
    error: str | None = None

    def row(self) -> dict:
        return {"epsilon": self.epsilon, "p": self.p, **self.values, "error": self.error or ""}


def _positive_job(args):
    spec, p, eps, tol, r_max = args
    try:
        ball = positive_ball_solution(spec, p, tol=tol, r_max=r_max)
    except NumericalFailure as exc:
        return PositiveRecord(eps, p, {}, f"{type(exc).__name__}: {exc}")
    v = ball.profile
    sup = ball.sup_norm
    infl = v.inflections
    r0 = float(infl[0]) if len(infl) else float("nan")
    v_r0 = v(r0)[0] if len(infl) else float("nan")
    nt = dimension_like(spec)
    vals = {
        "sup_norm": sup,
        "r0": r0,
        "r0_scaled_sup": r0 ** (2.0 / (p - 1.0)) * sup,
        "v_r0_over_sup": v_r0 / sup,
        "r0_scaled_v_r0": r0 ** (2.0 / (p - 1.0)) * v_r0,
        "normalized_slope": sup ** ((p * (nt - 2.0) - nt) / 2.0) * ball.boundary_slope,
        "boundary_slope": ball.boundary_slope,
    }
    return PositiveRecord(eps, p, vals)


def positive_solution_sweep(
    spec: OperatorSpec,
    epsilon_list=DEFAULT_EPSILONS,
    p_crit_estimate: float = None,
    tol: float = DEFAULT_TOL,
    r_max: float = DEFAULT_R_MAX,
    jobs: int = 1,
) -> list[PositiveRecord]:
    """Positive ball solutions approaching the critical exponent.

    Tracks |v|_inf, the inflection radius r0 and the rescaled products whose
    limits are the entire-space solution's inflection data, plus the
    boundary slope normalized by |v|_inf^{(p(N~-2)-N~)/2}.
    """
    eps = _check_eps(epsilon_list)
    if p_crit_estimate is None:
        raise ValueError("p_crit_estimate is required")
    return _fan_out(_positive_job, [(spec, p_crit_estimate - e, e, tol, r_max) for e in eps], jobs)


def entire_solution_reference(spec: OperatorSpec, p_star: float, tol: float = DEFAULT_TOL) -> dict:
    """Inflection radius R0 and U(R0) of the center shoot at p_star (U(0) = 1)."""
    prof = integrate_from_center(spec, p_star, 1.0, tol=tol, stop=StopRule(1))
    infl = prof.inflections
    if not len(infl):
        raise NumericalFailure("entire solution has no inflection")
    R0 = float(infl[0])
    return {"R0": R0, "U_R0": prof(R0)[0], "R0_scaled": R0 ** (2.0 / (p_star - 1.0))}


def relative_change(a: float, b: float) -> float:
    return abs(b - a) / max(abs(a), abs(b), 1e-300)


def stabilizes(values, rel: float = CONVERGENCE_REL) -> bool:
    """Finest two entries within ``rel`` and a consistent trend over the last three."""
    v = [x for x in values if x is not None and np.isfinite(x)]
    if len(v) < 3:
        return False
    if relative_change(v[-2], v[-1]) > rel:
        return False
    d1, d2 = v[-2] - v[-3], v[-1] - v[-2]
    return d1 * d2 >= 0 and abs(d2) <= abs(d1) * (1 + 1e-12)


def write_sweep_csv(path, records, k: int, header_comment: str | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [r.row(k) if isinstance(r, SweepRecord) else r.row() for r in records]
    cols = list(rows[0].keys()) if rows else ["epsilon", "p"]
    for r in rows:
        for c in r:
            if c not in cols:
                cols.append(c)
    with path.open("w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.DictWriter(fh, fieldnames=cols, restval="")
        w.writeheader()
        for r in rows:
            w.writerow({c: (repr(v) if isinstance(v, float) else v) for c, v in r.items()})
    return path


# -- decay envelope -------------------------------------------------------


@dataclass(frozen=True)
class DecayBoundReport:
    holds: bool
    worst_margin: float
    C: float
    K: float
    t: float
    window: tuple[float, float]

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def decay_bound_check(
    profile: RadialProfile,
    spec: OperatorSpec | None = None,
    p: float | None = None,
    slack: float = 1e-6,
    n: int = 400,
    r_hi: float | None = None,
) -> DecayBoundReport:
    """Check u(r) <= C / (r^2 - t^2 + K)^{(N~-2)/2} on the tail r >= t.

    t is the last inflection. With y = u^{-2/(N~-2)} as a function of s = r^2,
    the envelope is the tangent line of y at s = t^2, which gives
    C = a^{-(N~-2)/2} and K = y(t)/a with a = dy/ds at t. The bound holds
    on the tail exactly when y stays above that tangent. ``worst_margin`` is
    max(u/envelope) - 1, compared with ``slack``.

    A positive tail is checked up to ``r_hi``, by default 1e3 t: a shoot at
    a slope known only to a finite tolerance leaves the fast branch further
    out, so beyond that radius it no longer represents the fast solution.
    """
    spec = profile.spec if spec is None else spec
    p = profile.p if p is None else p
    infl = profile.inflections
    if not len(infl):
        raise NumericalFailure("inflection not found")
    t = float(infl[-1])
    nt = dimension_like(spec, spec.branch)
    e = (nt - 2.0) / 2.0
    u_t, du_t = profile(t)
    y_t = u_t ** (-1.0 / e)
    a = -(1.0 / (nt - 2.0)) * u_t ** (-nt / (nt - 2.0)) * du_t / t
    if not a > 0:
        raise NumericalFailure("profile not decreasing at its inflection")
    C = a ** (-e)
    K = y_t / a
    hi = profile.r_end
    if not profile.truncated and len(profile.zeros):
        hi = float(profile.zeros[-1])
    elif r_hi is None:
        hi = min(hi, 1e3 * t)
    if r_hi is not None:
        hi = min(hi, float(r_hi))
    rs = np.geomspace(t, hi, n)[:-1] if not profile.truncated else np.geomspace(t, hi, n)
    u, _ = profile(rs)
    env = C / (rs * rs - t * t + K) ** e
    worst = float(np.max(u / env) - 1.0)
    return DecayBoundReport(worst <= slack, worst, C, K, t, (t, float(rs[-1])))


__all__ = [
    "DecayBoundReport",
    "GluingReport",
    "NodalDecomposition",
    "NodalSolution",
    "PositiveRecord",
    "ScalingReport",
    "SweepRecord",
    "build_nodal",
    "concentration_sweep",
    "decay_bound_check",
    "decompose",
    "entire_solution_reference",
    "gluing_check",
    "positive_solution_sweep",
    "inflection_bound_ratio",
    "scaling_identity_check",
    "stabilizes",
    "write_sweep_csv",
]
