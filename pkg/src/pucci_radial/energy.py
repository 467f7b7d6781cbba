"""Weighted energies of radial solutions.

On a nodal region with inflection radius rho the weight is rho^gamma up to
rho and r^gamma beyond it, gamma(p) = 2(p+1)/(p-1) - N. With this weight the
region energy of |u|^{p+1} is invariant under u -> a u(a^{(p-1)/2} x), so
energies can be computed on the raw shoot (u(0) = 1) or on the unit-ball
rescaling alike.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import NumericalFailure, RegionError
from .exponents import critical_exponent_ball, critical_exponent_nodal
from .integrator import DEFAULT_TOL, RadialProfile, StopRule, integrate_exterior, integrate_from_center
from .model import Branch, OperatorSpec, dimension_like
from .nodal import DEFAULT_EPSILONS, _check_eps, _fan_out, build_nodal
from .shooting import DecayLabel, classify_decay, critical_slope, positive_ball_solution

log = logging.getLogger(__name__)

DEFAULT_QUAD_TOL = 1e-10
CRITICAL_OFFSET = 1e-4
TAIL_REL_TARGET = 1e-3


def weight_gamma(p: float, N: int) -> float:
    """gamma(p) = 2(p+1)/(p-1) - N."""
    if not p > 1:
        raise ValueError("weight exponent needs p > 1")
    return 2.0 * (p + 1.0) / (p - 1.0) - N


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere in R^N."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


@dataclass(frozen=True)
class RegionEnergy:
    region: tuple[float, float]
    inflection_radius: float
    gamma: float
    value: float
    error: float = 0.0

    def to_dict(self) -> dict:
        return {
            "region": list(self.region),
            "inflection_radius": self.inflection_radius,
            "gamma": self.gamma,
            "value": self.value,
            "error": self.error,
        }


@dataclass(frozen=True)
class SigmaEstimate:
    value: float
    truncated_integral: float
    tail_estimate: float
    tail_bound: float
    r_trunc: float
    inflection_radius: float
    p: float
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class EnergyReport:
    per_region: tuple[RegionEnergy, ...]
    total: float
    sigma_constants: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "per_region": [r.to_dict() for r in self.per_region],
            "total": self.total,
            "sigma_constants": {k: v.to_dict() for k, v in self.sigma_constants.items()},
        }


def _weighted_integral(profile: RadialProfile, a: float, b: float, p: float, N: int, gamma: float, varrho: float,
                       quad_tol: float) -> tuple[float, float]:
    seg = profile.segment(a, b)
    # split at the plateau radius so the weight kink sits on a grid point
    if seg.r_min < varrho < seg.r_end and not np.any(np.isclose(seg.grid, varrho, rtol=1e-15, atol=0)):
        pieces = [seg.segment(seg.r_min, varrho), seg.segment(varrho, seg.r_end)]
    else:
        pieces = [seg]
    # coarse trapezoid sets the absolute tolerance scale
    dens = np.abs(seg.u) ** (p + 1.0) * np.where(seg.grid <= varrho, varrho**gamma, seg.grid**gamma) * seg.grid ** (N - 1.0)
    scale = max(float(np.trapezoid(dens, seg.grid)), 1e-300)
    total = 0.0
    err = 0.0
    for pc in pieces:
        share = (pc.r_end - pc.r_min) / (seg.r_end - seg.r_min)
        v, e = _kernels.weighted_quadrature(pc.grid, pc.u, pc.du, pc.ddu, float(p), float(gamma), float(varrho),
                                            N - 1.0, quad_tol * scale * share)
        total += v
        err += e
    w = sphere_area(N)
    return w * total, w * err


def region_energy(
    profile: RadialProfile,
    a: float,
    b: float,
    p: float | None = None,
    N: int | None = None,
    quad_tol: float = DEFAULT_QUAD_TOL,
    region_index: int | None = None,
) -> RegionEnergy:
    """Weighted energy of the profile on the nodal region [a, b].

    The region must have constant sign and exactly one interior sign change
    of u''; that inflection radius is the plateau radius of the weight.
    """
    p = profile.p if p is None else p
    N = profile.spec.N if N is None else N
    gamma = weight_gamma(p, N)
    lo, hi = max(a, profile.r_min), min(b, profile.r_end)
    mask = (profile.grid >= lo) & (profile.grid <= hi)
    if np.all(profile.u[mask] == 0.0):
        return RegionEnergy((a, b), float("nan"), gamma, 0.0)
    inner_zeros = [z for z in profile.zeros if a < z < b and not (math.isclose(z, a, rel_tol=1e-12) or math.isclose(z, b, rel_tol=1e-12))]
    if inner_zeros:
        raise RegionError(f"sign change inside region at r = {inner_zeros[0]:.6g}", region_index)
    infl = [t for t in profile.inflections if a < t < b]
    if len(infl) == 0:
        raise RegionError("no inflection inside region", region_index)
    if len(infl) > 1:
        raise RegionError(f"{len(infl)} inflections inside region", region_index)
    varrho = float(infl[0])
    val, err = _weighted_integral(profile, lo, hi, p, N, gamma, varrho, quad_tol)
    err += _propagated_error(profile, lo, hi, p, N, gamma, varrho)
    return RegionEnergy((a, b), varrho, gamma, val, err)


def _propagated_error(profile: RadialProfile, a: float, b: float, p: float, N: int, gamma: float,
                      varrho: float) -> float:
    """First-order energy change from the integration error of u and of rho.

    The accumulated local error bound of u enters through d|u|^{p+1}; the
    inflection radius error moves the plateau level of the weight.
    """
    seg = profile.segment(a, b)
    r, u = seg.grid, np.abs(seg.u)
    w = np.where(r <= varrho, varrho**gamma, r**gamma) * r ** (N - 1.0)
    du_term = float(np.trapezoid((p + 1.0) * u**p * seg.err * w, r))
    ev = [e.error for e in profile.events if e.radius == varrho]
    drho = ev[0] if ev else 0.0
    inner = r <= varrho
    plateau = float(np.trapezoid(u[inner] ** (p + 1.0) * r[inner] ** (N - 1.0), r[inner])) if inner.sum() > 1 else 0.0
    rho_term = abs(gamma) * varrho ** (gamma - 1.0) * plateau * drho
    return sphere_area(N) * (du_term + rho_term)


def region_edges(profile: RadialProfile, k: int) -> list[float]:
    zeros = list(profile.zeros[:k])
    if len(zeros) < k:
        raise RegionError(f"profile has {len(zeros)} zeros, need {k}")
    return [profile.r_min, *zeros]


def total_energy(profile: RadialProfile, k: int, quad_tol: float = DEFAULT_QUAD_TOL) -> EnergyReport:
    """Sum of region energies of a k-region solution ending at its k-th zero."""
    edges = region_edges(profile, k)
    parts = []
    for i in range(k):
        parts.append(region_energy(profile, edges[i], edges[i + 1], quad_tol=quad_tol, region_index=i))
    return EnergyReport(tuple(parts), float(sum(r.value for r in parts)))


def _tail(profile: RadialProfile, R: float, p: float, N: int, gamma: float, nt: float) -> float:
    """Analytic tail of the weighted integral beyond R for u ~ C r^{-(N~-2)}."""
    rs = np.geomspace(R / 10.0, R, 50)
    u, _ = profile(rs)
    C = float(np.max(np.abs(u) * rs ** (nt - 2.0)))
    e = -(nt - 2.0) * (p + 1.0) + gamma + N - 1.0
    if not e < -1.0:
        raise NumericalFailure(f"tail integrand exponent {e:.4f} not integrable")
    return sphere_area(N) * C ** (p + 1.0) * R ** (e + 1.0) / abs(e + 1.0)


def _sigma_from_profile(profile: RadialProfile, start: float, varrho: float, p: float, quad_tol: float,
                        r_trunc: float | None) -> SigmaEstimate:
    spec = profile.spec
    N = spec.N
    gamma = weight_gamma(p, N)
    nt = dimension_like(spec, spec.branch)
    # fit past the plateau radius; a later inflection (departure from the
    # fast branch when p is slightly off) must not move the window
    window = (10.0 * varrho, min(profile.r_end, 1e3 * varrho))
    dc = classify_decay(profile, window=window)
    if dc.label is not DecayLabel.FAST:
        raise NumericalFailure(f"decay is {dc.label.value} (slope {dc.fitted_exponent:.3f}), expected fast")
    a, b = dc.fit_window
    if r_trunc is None:
        # smallest decade radius past the fit start with a small enough tail
        cands = [r for r in np.geomspace(a, b, 13)]
        r_trunc = cands[-1]
        for R in cands:
            if R < 10.0 * a:
                continue
            val, _ = _weighted_integral(profile, start, R, p, N, gamma, varrho, quad_tol)
            if _tail(profile, R, p, N, gamma, nt) < TAIL_REL_TARGET * val:
                r_trunc = R
                break
    val, err = _weighted_integral(profile, start, r_trunc, p, N, gamma, varrho, quad_tol)
    tail = _tail(profile, r_trunc, p, N, gamma, nt)
    return SigmaEstimate(val + tail, val, tail, 2.0 * tail + err, float(r_trunc), varrho, p,
                         {"decay": dc.to_dict(), "quad_error": err})


def entire_space_energy(
    spec: OperatorSpec,
    p_star_estimate: float,
    tol: float = DEFAULT_TOL,
    quad_tol: float = DEFAULT_QUAD_TOL,
    r_trunc: float | None = None,
    nudge: bool = True,
) -> SigmaEstimate:
    """Energy of the fast-decaying entire solution at the critical exponent.

    The center shoot at the estimate is integrated without a stop rule; the
    weight plateaus at its global inflection radius; beyond the truncation
    radius an analytic power-law tail is added, and twice that tail is
    reported as its bound. An estimate just below the threshold makes the
    shoot cross zero far out; with ``nudge`` the exponent is then raised in
    doubling steps from 1e-8 (at most 1e-3) until the shoot stays positive.
    """
    p = float(p_star_estimate)
    step = 1e-8
    while True:
        prof = integrate_from_center(spec, p, 1.0, tol=tol, stop=StopRule(0))
        if not len(prof.zeros):
            break
        if not nudge or step > 1e-3:
            raise NumericalFailure(f"center shoot crosses zero at r = {prof.zeros[0]:.6g}; exponent estimate too low")
        p = float(p_star_estimate) + step
        step *= 2.0
    infl = prof.inflections
    if not len(infl):
        raise NumericalFailure("entire solution has no inflection")
    est = _sigma_from_profile(prof, 0.0, float(infl[0]), p, quad_tol, r_trunc)
    return SigmaEstimate(est.value, est.truncated_integral, est.tail_estimate, est.tail_bound, est.r_trunc,
                         est.inflection_radius, est.p, dict(est.detail, p_estimate=float(p_star_estimate)))


def exterior_energy(
    spec: OperatorSpec,
    p_star_star_estimate: float,
    alpha: float | None = None,
    tol: float = DEFAULT_TOL,
    quad_tol: float = DEFAULT_QUAD_TOL,
    r_trunc: float | None = None,
) -> SigmaEstimate:
    """Energy outside the unit ball of the fast-decaying minus exterior solution.

    Without ``alpha`` the critical slope is computed and its lower bracket
    end (which stays positive) is integrated.
    """
    p = p_star_star_estimate
    if alpha is None:
        cs = critical_slope(Branch.MINUS, spec, p, tol=tol)
        if cs.alpha_star == 0.0:
            raise NumericalFailure(f"no positive exterior critical slope at p = {p}")
        alpha = cs.bracket[0]
    prof = integrate_exterior(spec, Branch.MINUS, p, alpha, tol=tol)
    if not prof.truncated:
        raise NumericalFailure(f"exterior solution returns to zero at r = {prof.zeros[0]:.6g}")
    infl = prof.inflections
    if not len(infl):
        raise NumericalFailure("exterior solution has no inflection")
    est = _sigma_from_profile(prof, 1.0, float(infl[0]), p, quad_tol, r_trunc)
    return SigmaEstimate(est.value, est.truncated_integral, est.tail_estimate, est.tail_bound, est.r_trunc,
                         est.inflection_radius, est.p, dict(est.detail, alpha=alpha))


# -- energy limits --------------------------------------------------------


@dataclass(frozen=True)
class LimitRow:
    epsilon: float
    p: float
    E_total: float
    E_predicted_limit: float
    error: str | None = None

    @property
    def gap(self) -> float:
        return abs(self.E_total - self.E_predicted_limit)

    @property
    def gap_relative(self) -> float:
        return self.gap / abs(self.E_predicted_limit)

    def row(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "p": self.p,
            "E_total": self.E_total,
            "E_predicted_limit": self.E_predicted_limit,
            "gap": self.gap,
            "gap_relative": self.gap_relative,
            "error": self.error or "",
        }


@dataclass(frozen=True)
class LimitExperiment:
    branch: Branch
    k: int
    p_crit: float
    predicted: float
    components: dict
    rows: tuple[LimitRow, ...]

    def to_dict(self) -> dict:
        return {
            "branch": self.branch.value,
            "k": self.k,
            "p_crit": self.p_crit,
            "predicted": self.predicted,
            "components": self.components,
            "rows": [r.row() for r in self.rows],
        }


def predicted_limit(
    spec: OperatorSpec,
    k: int,
    p_crit: float,
    tol: float = DEFAULT_TOL,
    quad_tol: float = DEFAULT_QUAD_TOL,
    p_sigma: float | None = None,
) -> tuple[float, dict]:
    """Limit energy of k-region solutions as p approaches the threshold.

    minus: Sigma*_- + E^T(u_bar), u_bar the (k-1)-region limit, which up to
    sign is the (k-1)-region plus solution;
    plus:  (k/2)(E(v_bar) + Sigma**_+) for even k and
           ((k+1)/2) E(v_bar) + ((k-1)/2) Sigma**_+ for odd k.
    Ball solutions are taken at p_crit - 1e-4 to stay on the existence side.
    """
    p_ball = p_crit - CRITICAL_OFFSET
    p_sig = p_crit if p_sigma is None else p_sigma
    if spec.branch is Branch.MINUS:
        sig = entire_space_energy(spec.with_branch(Branch.MINUS), p_sig, tol=tol, quad_tol=quad_tol)
        if k == 1:
            e_bar = 0.0
        else:
            ubar = build_nodal(spec.with_branch(Branch.PLUS), p_ball, k - 1, tol=tol)
            e_bar = total_energy(ubar.raw, k - 1, quad_tol).total
        return sig.value + e_bar, {"sigma_star_minus": sig.value, "E_u_bar": e_bar, "sigma_tail_bound": sig.tail_bound}
    sig = exterior_energy(spec, p_sig, tol=tol, quad_tol=quad_tol)
    vbar = positive_ball_solution(spec.with_branch(Branch.PLUS), p_ball, tol=tol)
    e_v = total_energy(vbar.raw, 1, quad_tol).total
    if k % 2 == 0:
        pred = k / 2 * (e_v + sig.value)
    else:
        pred = (k + 1) / 2 * e_v + (k - 1) / 2 * sig.value
    return pred, {"sigma_star_star_plus": sig.value, "E_v_bar": e_v, "sigma_tail_bound": sig.tail_bound}


def energy_limit_experiment(
    spec: OperatorSpec,
    k: int,
    epsilon_list=DEFAULT_EPSILONS,
    p_crit: float | None = None,
    tol: float = DEFAULT_TOL,
    quad_tol: float = DEFAULT_QUAD_TOL,
    jobs: int = 1,
    p_sigma: float | None = None,
) -> LimitExperiment:
    """E^T of k-region solutions at p_crit - eps against the predicted limit.

    p_crit defaults to p*_- for the minus branch and p**_+ for plus. The
    Sigma term needs the exponent to about 1e-8, so the default estimates
    are bisected to 1e-9 (minus) and 1e-8 (plus), and for minus the upper
    bracket end, where the center shoot stays positive, is used for Sigma.
    """
    eps = _check_eps(epsilon_list)
    if p_crit is None:
        if spec.branch is Branch.MINUS:
            est = critical_exponent_ball(spec, p_tol=1e-9, tol=tol)
            p_sigma = est.bracket[1] if p_sigma is None else p_sigma
        else:
            est = critical_exponent_nodal(spec, p_tol=1e-8, tol=tol, jobs=jobs)
        p_crit = est.value
    pred, comps = predicted_limit(spec, k, p_crit, tol, quad_tol, p_sigma=p_sigma)
    args = [(spec, p_crit - e, k, e, tol, quad_tol, pred) for e in eps]
    rows = _fan_out(_limit_job, args, jobs)
    return LimitExperiment(spec.branch, k, p_crit, pred, comps, tuple(rows))


def _limit_job(args) -> LimitRow:
    spec, p, k, e, tol, quad_tol, pred = args
    try:
        sol = build_nodal(spec, p, k, tol=tol)
        et = total_energy(sol.raw, k, quad_tol).total
        return LimitRow(e, p, et, pred)
    except (NumericalFailure, RegionError) as exc:
        return LimitRow(e, p, float("nan"), pred, f"{type(exc).__name__}: {exc}")


__all__ = [
    "EnergyReport",
    "LimitExperiment",
    "LimitRow",
    "RegionEnergy",
    "SigmaEstimate",
    "energy_limit_experiment",
    "entire_space_energy",
    "exterior_energy",
    "predicted_limit",
    "region_energy",
    "sphere_area",
    "total_energy",
    "weight_gamma",
]
