"""Adaptive integration of the radial equation with events and dense output.

The stepper is an embedded 5(4) Runge-Kutta pair. Sign changes of u, u' and
u'' end a step exactly at the root, so no step straddles a switch of the
piecewise right-hand side; the located roots double as the event list.
Profiles store (r, u, u', u'') on the grid and interpolate with quintic
Hermite polynomials, which are C^2 across the grid.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import GrazingZero, InvariantViolation, NumericalFailure, StepUnderflow
from .model import Branch, OperatorSpec, center_coefficient

DEFAULT_TOL = 1e-10
DEFAULT_R_MAX = 1e6
DEFAULT_MAX_STEPS = 2_000_000
EVENT_SAFETY = 10.0


class EventKind(str, enum.Enum):
    U_ZERO = "u_zero"
    DU_ZERO = "du_zero"
    DDU_ZERO = "ddu_zero"
    UNDETERMINED = "undetermined"


_KIND_CODES = {
    _kernels.EV_UZERO: EventKind.U_ZERO,
    _kernels.EV_DUZERO: EventKind.DU_ZERO,
    _kernels.EV_DDUZERO: EventKind.DDU_ZERO,
    _kernels.EV_UNDETERMINED: EventKind.UNDETERMINED,
}


@dataclass(frozen=True)
class Event:
    """A located sign change.

    ``side_signs`` holds the sign of the watched quantity before and after
    the root; ``error`` is a conservative bound on the radius error derived
    from the accumulated local error estimates.
    """

    kind: EventKind
    radius: float
    side_signs: tuple[int, int]
    error: float = 0.0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "radius": self.radius,
            "side_signs": list(self.side_signs),
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Event":
        return cls(EventKind(d["kind"]), float(d["radius"]), tuple(d["side_signs"]), float(d.get("error", 0.0)))


@dataclass(frozen=True)
class StopRule:
    """Stop at the ``zeros``-th zero of u; ``zeros=0`` runs to r_max."""

    zeros: int = 1

    def __post_init__(self):
        if self.zeros < 0:
            raise ValueError("zero count must be non-negative")

    @classmethod
    def at_r_max(cls) -> "StopRule":
        return cls(0)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    spec: OperatorSpec
    p: float
    grid: np.ndarray
    u: np.ndarray
    du: np.ndarray
    ddu: np.ndarray
    events: tuple[Event, ...]
    truncated: bool
    tol: float
    err: np.ndarray = field(repr=False)
    origin: str = "center"
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        g = self.grid
        if not (len(g) == len(self.u) == len(self.du) == len(self.ddu) == len(self.err)):
            raise ValueError("profile arrays must share the grid length")
        if len(g) < 2 or np.any(np.diff(g) <= 0):
            raise ValueError("profile grid must be strictly increasing with >= 2 points")
        for arr in (g, self.u, self.du, self.ddu, self.err):
            arr.setflags(write=False)

    # -- evaluation -------------------------------------------------------
    @property
    def r_min(self) -> float:
        return float(self.grid[0])

    @property
    def r_end(self) -> float:
        return float(self.grid[-1])

    def __call__(self, r):
        """Dense output (u, u') at radius/radii inside the grid span."""
        x = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(x < self.grid[0] * (1 - 1e-14)) or np.any(x > self.grid[-1] * (1 + 1e-14)):
            raise ValueError("evaluation radius outside profile span")
        uu, dd = _kernels.hermite_many(self.grid, self.u, self.du, self.ddu, x)
        if np.ndim(r) == 0:
            return float(uu[0]), float(dd[0])
        return uu, dd

    def second_derivative(self, r):
        uu, dd = self(r)
        wpos, wneg = self.spec.weights
        nm1 = self.spec.N - 1.0
        vec = np.vectorize(lambda rr, a, b: _kernels.ddu(rr, a, b, self.p, wpos, wneg, nm1))
        out = vec(np.asarray(r, dtype=float), uu, dd)
        return float(out) if np.ndim(out) == 0 else out

    # -- events -----------------------------------------------------------
    def radii(self, kind: EventKind) -> np.ndarray:
        return np.array([e.radius for e in self.events if e.kind is kind])

    @property
    def zeros(self) -> np.ndarray:
        return self.radii(EventKind.U_ZERO)

    @property
    def extrema(self) -> np.ndarray:
        return self.radii(EventKind.DU_ZERO)

    @property
    def inflections(self) -> np.ndarray:
        return self.radii(EventKind.DDU_ZERO)

    def index_of(self, r: float) -> int:
        """Grid index of the point closest to r."""
        i = int(np.searchsorted(self.grid, r))
        cands = [j for j in (i - 1, i) if 0 <= j < len(self.grid)]
        return min(cands, key=lambda j: abs(self.grid[j] - r))

    # -- transforms -------------------------------------------------------
    def rescale(self, length: float) -> "RadialProfile":
        """Return v(r) = L^{2/(p-1)} u(L r), again a solution of the same equation."""
        if not length > 0:
            raise ValueError("rescaling length must be positive")
        a = length ** (2.0 / (self.p - 1.0))
        evs = tuple(Event(e.kind, e.radius / length, e.side_signs, e.error / length) for e in self.events)
        return RadialProfile(
            self.spec,
            self.p,
            self.grid / length,
            self.u * a,
            self.du * a * length,
            self.ddu * a * length * length,
            evs,
            self.truncated,
            self.tol,
            self.err * a,
            self.origin,
            dict(self.meta, rescaled_by=length),
        )

    def segment(self, a: float, b: float) -> "RadialProfile":
        """Sub-profile on [a, b]; endpoints not on the grid are interpolated."""
        a = max(a, self.r_min)
        b = min(b, self.r_end)
        if not b > a:
            raise ValueError("empty segment")
        inner = (self.grid > a * (1 + 1e-15)) & (self.grid < b * (1 - 1e-15))
        rs = np.concatenate(([a], self.grid[inner], [b]))
        uu, dd = self(rs)
        idx = np.flatnonzero(inner)
        wpos, wneg = self.spec.weights
        nm1 = self.spec.N - 1.0
        aa = np.empty_like(rs)
        aa[1:-1] = self.ddu[idx]
        for j in (0, len(rs) - 1):
            if rs[j] == 0.0:
                aa[j] = self.ddu[0]
            else:
                aa[j] = _kernels.ddu(rs[j], uu[j], dd[j], self.p, wpos, wneg, nm1)
        uu[1:-1] = self.u[idx]
        dd[1:-1] = self.du[idx]
        ee = np.interp(rs, self.grid, self.err)
        evs = tuple(e for e in self.events if a <= e.radius <= b)
        return RadialProfile(self.spec, self.p, rs, uu, dd, aa, evs, self.truncated and b >= self.r_end, self.tol, ee,
                             self.origin, dict(self.meta))

    # -- diagnostics ------------------------------------------------------
    def h_increase(self) -> float:
        """Largest relative one-step increase of the monotone energy H."""
        wpos, wneg = self.spec.weights
        return float(_kernels.h_functional_increase(self.grid, self.u, self.du, self.ddu, self.p, wpos, wneg))

    def check_monotone_energy(self, factor: float = 100.0) -> float:
        inc = self.h_increase()
        if inc > factor * self.tol:
            raise InvariantViolation(f"H functional increased by {inc:.3e} (> {factor}*tol)")
        return inc

    def ode_residual(self) -> float:
        """Max |stored u'' - resolver(u, u')| over the grid (consistency check)."""
        wpos, wneg = self.spec.weights
        nm1 = self.spec.N - 1.0
        worst = 0.0
        for r, a, b, c in zip(self.grid, self.u, self.du, self.ddu):
            if r == 0.0:
                continue
            worst = max(worst, abs(c - _kernels.ddu(r, a, b, self.p, wpos, wneg, nm1)))
        return worst

    # -- serialization ----------------------------------------------------
    def metadata(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "p": self.p,
            "tol": self.tol,
            "truncated": self.truncated,
            "origin": self.origin,
            "events": [e.to_dict() for e in self.events],
            "meta": self.meta,
        }

    def write(self, csv_path) -> tuple[Path, Path]:
        """Write ``r,u,du`` CSV plus a JSON sidecar with events and metadata."""
        csv_path = Path(csv_path)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        data = np.column_stack([self.grid, self.u, self.du])
        np.savetxt(csv_path, data, delimiter=",", header="r,u,du", comments="", fmt="%.17g")
        side = csv_path.with_suffix(".json")
        side.write_text(json.dumps(self.metadata(), indent=2, default=_json_default))
        return csv_path, side

    @classmethod
    def read(cls, csv_path) -> "RadialProfile":
        csv_path = Path(csv_path)
        lines = [ln for ln in csv_path.read_text().splitlines() if ln and not ln.startswith("#")]
        data = np.loadtxt(lines[1:], delimiter=",", ndmin=2)
        meta = json.loads(csv_path.with_suffix(".json").read_text())
        spec = OperatorSpec.from_dict(meta["spec"])
        p = float(meta["p"])
        r, u, du = data[:, 0].copy(), data[:, 1].copy(), data[:, 2].copy()
        wpos, wneg = spec.weights
        a = np.array([_origin_ddu(spec, p, uu) if rr == 0 else
                      _kernels.ddu(rr, uu, dd, p, wpos, wneg, spec.N - 1.0) for rr, uu, dd in zip(r, u, du)])
        return cls(spec, p, r, u, du, a, tuple(Event.from_dict(e) for e in meta["events"]), bool(meta["truncated"]),
                   float(meta["tol"]), np.zeros_like(r), meta.get("origin", "center"), meta.get("meta", {}))


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, enum.Enum):
        return o.value
    raise TypeError(type(o))


def _origin_ddu(spec: OperatorSpec, p: float, u0: float) -> float:
    return -(u0**p) / (spec.N * center_coefficient(spec))


def origin_start_radius(tol: float) -> float:
    return max(tol**0.25, 1e-6)


def origin_series(spec: OperatorSpec, p: float, u0: float, r: float) -> tuple[float, float]:
    """u and u' of the regular solution near the origin, through order r^4."""
    c = center_coefficient(spec)
    N = spec.N
    b = -(u0**p) / (2.0 * N * c)
    d = p * u0 ** (2.0 * p - 1.0) / (8.0 * N * (N + 2.0) * c * c)
    return u0 + b * r * r + d * r**4, 2.0 * b * r + 4.0 * d * r**3


def _event_error(kind: int, i: int, R, U, D, A, err, spec: OperatorSpec, p: float) -> float:
    """Radius uncertainty of an event at grid index i from the local error budget."""
    r = R[i]
    e = EVENT_SAFETY * err[i]
    floor = 4 * np.finfo(float).eps * r
    if kind == _kernels.EV_UZERO:
        return e / max(abs(D[i]), 1e-300) + floor
    if kind == _kernels.EV_DUZERO:
        return (e / r) / max(abs(A[i]), 1e-300) + floor
    # u'' zero: perturb the resolver, divide by the slope of u''
    wpos, wneg = spec.weights
    c = min(wpos, wneg)
    dA = (p * abs(U[i]) ** (p - 1.0) * e + (spec.N - 1.0) * max(wpos, wneg) * e / (r * r)) / c
    lo, hi = max(i - 1, 0), min(i + 1, len(R) - 1)
    slope = abs(A[hi] - A[lo]) / max(R[hi] - R[lo], 1e-300)
    return dA / max(slope, 1e-300) + floor


def _run(spec, p, r0, u0, d0, r_max, tol, zeros, h0, max_steps, origin, prefix=None, check=True, meta=None):
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not r_max > r0:
        raise ValueError("r_max must exceed the start radius")
    if not p > 1:
        raise ValueError("exponent p must exceed 1")
    wpos, wneg = spec.weights
    R, U, D, A, E, EK, ER, ES, status, steps = _kernels.integrate(
        float(r0), float(u0), float(d0), float(p), float(wpos), float(wneg), spec.N - 1.0,
        float(r_max), float(tol), int(zeros), float(h0), int(max_steps),
    )
    if status == _kernels.STATUS_UNDERFLOW:
        raise StepUnderflow(float(R[-1]))
    if status == _kernels.STATUS_MAX_STEPS:
        raise NumericalFailure(f"step budget of {max_steps} exhausted at r = {R[-1]:.6g}")
    events = []
    for k, rr, s in zip(EK, ER, ES):
        i = int(np.searchsorted(R, rr))
        i = min(i, len(R) - 1)
        events.append(Event(_KIND_CODES[int(k)], float(rr), (int(s), -int(s)),
                            _event_error(int(k), i, R, U, D, A, E, spec, p)))
    if status == _kernels.STATUS_GRAZING:
        raise GrazingZero(float(R[-1]))
    if prefix is not None:
        R = np.concatenate(([prefix[0]], R))
        U = np.concatenate(([prefix[1]], U))
        D = np.concatenate(([prefix[2]], D))
        A = np.concatenate(([prefix[3]], A))
        E = np.concatenate(([0.0], E))
    prof = RadialProfile(spec, float(p), R, U, D, A, tuple(events), status == _kernels.STATUS_TRUNCATED,
                         float(tol), E, origin, dict(meta or {}, steps=int(steps)))
    if check:
        prof.check_monotone_energy()
    return prof


def integrate_from_center(
    spec: OperatorSpec,
    p: float,
    u0: float = 1.0,
    r_max: float = DEFAULT_R_MAX,
    tol: float = DEFAULT_TOL,
    stop: StopRule = StopRule(1),
    max_steps: int = DEFAULT_MAX_STEPS,
    check: bool = True,
) -> RadialProfile:
    """Integrate the regular solution with u(0) = u0, u'(0) = 0.

    The start at r_start = max(tol^{1/4}, 1e-6) uses the origin series; the
    origin itself is kept as the first grid point. Stops at the requested
    zero of u or at r_max (then ``truncated`` is set).
    """
    if not u0 > 0:
        raise ValueError("series start needs u0 > 0")
    rs = origin_start_radius(tol)
    us, ds = origin_series(spec, p, u0, rs)
    a0 = _origin_ddu(spec, p, u0)
    return _run(spec, p, rs, us, ds, r_max, tol, stop.zeros, 0.1 * rs, max_steps, "center",
                prefix=(0.0, u0, 0.0, a0), check=check, meta={"u0": u0})


def integrate_exterior(
    spec: OperatorSpec,
    kind: Branch | str,
    p: float,
    alpha: float,
    r_max: float = DEFAULT_R_MAX,
    tol: float = DEFAULT_TOL,
    max_steps: int = DEFAULT_MAX_STEPS,
    check: bool = True,
) -> RadialProfile:
    """Integrate u(1) = 0, u'(1) = alpha outward for the operator named by ``kind``.

    ``kind`` is the operator of the exterior problem ("minus" or "plus"),
    independent of ``spec.branch``. Stops at the first zero beyond r = 1.
    """
    if not alpha > 0:
        raise ValueError("exterior slope alpha must be positive")
    sp = spec.with_branch(kind)
    return _run(sp, p, 1.0, 0.0, alpha, r_max, tol, 1, 1e-3 / max(1.0, alpha ** 0.5), max_steps, "exterior",
                check=check, meta={"alpha": alpha})


def locate_events(profile: RadialProfile, tol_event: float | None = None) -> list[Event]:
    """Scan the grid for sign changes of u, u' and the resolver's u'' and
    refine each by bisection on the dense output.

    Zeros of u whose slope is below the grazing threshold are returned as
    ``UNDETERMINED`` instead of ``U_ZERO``.
    """
    R = profile.grid
    tol_event = tol_event if tol_event is not None else 4 * np.finfo(float).eps
    spec, p = profile.spec, profile.p
    wpos, wneg = spec.weights
    nm1 = spec.N - 1.0

    def g_u(x):
        return profile(x)[0]

    def g_du(x):
        return profile(x)[1]

    def g_ddu(x):
        if x == 0.0:
            return profile.ddu[0]
        a, b = profile(x)
        return _kernels.ddu(x, a, b, p, wpos, wneg, nm1)

    series = [
        (EventKind.U_ZERO, profile.u, g_u),
        (EventKind.DU_ZERO, profile.du, g_du),
        (EventKind.DDU_ZERO, profile.ddu, g_ddu),
    ]
    out = []
    for kind, vals, g in series:
        sg = np.sign(vals)
        # carry the last nonzero sign over exact zeros (e.g. u(1) = 0 at the start)
        last = 0.0
        start = 0
        while start < len(sg) and sg[start] == 0:
            start += 1
        if start == len(sg):
            continue
        last = sg[start]
        last_i = start
        for i in range(start + 1, len(sg)):
            if sg[i] == 0 or sg[i] == last:
                if sg[i] != 0:
                    last_i = i
                continue
            lo, hi = R[i - 1] if sg[i - 1] != 0 else R[last_i], R[i]
            glo = g(lo)
            if np.sign(glo) != last:
                lo = R[last_i]
            for _ in range(200):
                if hi - lo <= tol_event * max(hi, 1.0):
                    break
                mid = 0.5 * (lo + hi)
                gm = g(mid)
                if gm != 0 and np.sign(gm) == last:
                    lo = mid
                else:
                    hi = mid
            k = kind
            if kind is EventKind.U_ZERO and hi * abs(g_du(hi)) < profile.tol * _local_scale(profile, hi):
                k = EventKind.UNDETERMINED
            out.append(Event(k, float(hi), (int(last), int(-last))))
            last = sg[i]
            last_i = i
    out.sort(key=lambda e: e.radius)
    return out


def _local_scale(profile: RadialProfile, r: float) -> float:
    mask = (profile.grid >= r / math.e) & (profile.grid <= r)
    j = max(int(np.searchsorted(profile.grid, r / math.e)) - 1, 0)
    vals = np.abs(profile.u[mask])
    return float(max(vals.max() if vals.size else 0.0, abs(profile.u[j])))


def profile_from_function(spec, p, r, u, du, ddu=None, tol=DEFAULT_TOL, origin="synthetic") -> RadialProfile:
    """Wrap sampled data (e.g. a closed-form solution) as a profile."""
    r = np.asarray(r, float)
    u = np.asarray(u, float)
    du = np.asarray(du, float)
    if ddu is None:
        wpos, wneg = spec.weights
        ddu = np.array([_kernels.ddu(rr, a, b, p, wpos, wneg, spec.N - 1.0) if rr > 0 else np.nan
                        for rr, a, b in zip(r, u, du)])
        if r[0] == 0:
            ddu[0] = _origin_ddu(spec, p, u[0])
    prof = RadialProfile(spec, float(p), r.copy(), u.copy(), du.copy(), np.asarray(ddu, float).copy(), (), False,
                         tol, np.zeros_like(r), origin)
    return RadialProfile(prof.spec, prof.p, prof.grid.copy(), prof.u.copy(), prof.du.copy(), prof.ddu.copy(),
                         tuple(locate_events(prof)), False, tol, np.zeros_like(r), origin)


def bubble(N: int, r):
    """Critical Laplacian bubble (1 + r^2/(N(N-2)))^{-(N-2)/2} and its derivative."""
    r = np.asarray(r, float)
    k = N * (N - 2.0)
    base = 1.0 + r * r / k
    u = base ** (-(N - 2.0) / 2.0)
    du = -(N - 2.0) / k * r * base ** (-N / 2.0)
    return u, du


def compile_kernels() -> bool:
    return _kernels.compile_all()


__all__ = [
    "Event",
    "EventKind",
    "RadialProfile",
    "StopRule",
    "bubble",
    "integrate_exterior",
    "integrate_from_center",
    "locate_events",
    "origin_series",
    "origin_start_radius",
    "profile_from_function",
]
