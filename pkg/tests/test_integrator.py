import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from pucci_radial import EventKind, OperatorSpec, RadialProfile, StopRule, integrate_exterior, integrate_from_center
from pucci_radial.integrator import bubble, locate_events, origin_series, origin_start_radius


def test_lane_emden_first_zero(laplace3):
    prof = integrate_from_center(laplace3, 3.0, tol=1e-10)
    assert prof.zeros[0] == pytest.approx(oracles.LANE_EMDEN_N3_P3_FIRST_ZERO, abs=1e-8)
    assert prof.du[-1] == pytest.approx(oracles.LANE_EMDEN_N3_P3_SLOPE, abs=1e-8)
    assert not prof.truncated


def test_lane_emden_second_zero(laplace3):
    prof = integrate_from_center(laplace3, 3.0, stop=StopRule(2))
    assert len(prof.zeros) == 2
    assert prof.zeros[1] == pytest.approx(35.96194, abs=1e-4)


def test_bubble_profile_and_inflection():
    spec = OperatorSpec(1.0, 1.0, 4)
    tol = 1e-10
    prof = integrate_from_center(spec, 3.0, tol=tol, r_max=100.0, stop=StopRule(0))
    r = np.linspace(0.0, 100.0, 2001)
    u, du = prof(r)
    ue, due = bubble(4, r)
    assert np.max(np.abs(u - ue)) <= 10 * tol
    assert np.max(np.abs(du - due)) <= 10 * tol
    assert prof.inflections[0] == pytest.approx(oracles.bubble_inflection(4), abs=1e-8)
    assert prof.truncated


def test_origin_series_consistent(pucci_spec):
    r = origin_start_radius(1e-10)
    assert r == pytest.approx(1e-2 * 10**-0.5)
    u, du = origin_series(pucci_spec, 2.0, 1.0, 1e-3)
    assert u < 1.0 and du < 0.0


def test_events_interlace(pucci_spec):
    prof = integrate_from_center(pucci_spec, 2.0, stop=StopRule(3))
    kinds = [e.kind for e in prof.events]
    assert kinds.count(EventKind.U_ZERO) == 3
    z, ext = prof.zeros, prof.extrema
    assert np.all(np.diff(z) > 0)
    # one extremum strictly between consecutive zeros
    for a, b in zip(z, z[1:]):
        assert np.sum((ext > a) & (ext < b)) == 1
    assert all(e.error > 0 for e in prof.events)


def test_post_hoc_events_match(pucci_spec):
    prof = integrate_from_center(pucci_spec, 2.0, stop=StopRule(2))
    found = locate_events(prof)
    for kind in (EventKind.U_ZERO, EventKind.DU_ZERO):
        a = prof.radii(kind)
        b = np.array([e.radius for e in found if e.kind is kind])
        assert len(a) == len(b)
        assert np.allclose(a, b, rtol=1e-8)


def test_truncated_run_and_r_max(pucci_spec):
    # above p*_+ the plus shoot stays positive
    prof = integrate_from_center(pucci_spec.with_branch("plus"), 5.5, r_max=1e3)
    assert prof.truncated and prof.r_end == pytest.approx(1e3)
    assert np.all(prof.u > 0)


def test_exterior_start(pucci_spec):
    prof = integrate_exterior(pucci_spec, "plus", 2.5, 1.0)
    assert prof.r_min == 1.0 and prof.u[0] == 0.0 and prof.du[0] == 1.0
    assert prof.spec.branch.value == "plus"
    with pytest.raises(ValueError):
        integrate_exterior(pucci_spec, "minus", 2.5, -1.0)


def test_rescale_and_segment(pucci_spec):
    prof = integrate_from_center(pucci_spec, 2.0, stop=StopRule(1))
    rho = prof.zeros[0]
    v = prof.rescale(rho)
    assert v.r_end == pytest.approx(1.0)
    assert v.u[0] == pytest.approx(rho ** (2.0 / (2.0 - 1.0)))
    assert v.ode_residual() <= 1e-8 * np.max(np.abs(v.ddu))
    seg = prof.segment(0.3, 0.7 * rho)
    assert seg.r_min == 0.3 and seg.r_end == pytest.approx(0.7 * rho)
    assert seg(1.0)[0] == pytest.approx(prof(1.0)[0], rel=1e-14)


def test_monotone_energy_on_runs(pucci_spec):
    for branch in ("minus", "plus"):
        prof = integrate_from_center(pucci_spec.with_branch(branch), 2.0, stop=StopRule(2))
        assert prof.check_monotone_energy() <= 100 * prof.tol


def test_write_read_roundtrip(tmp_path, pucci_spec):
    prof = integrate_from_center(pucci_spec, 2.0, stop=StopRule(2))
    csv_path, meta = prof.write(tmp_path / "prof.csv")
    assert csv_path.read_text().splitlines()[0] == "r,u,du"
    back = RadialProfile.read(csv_path)
    assert np.array_equal(back.grid, prof.grid) and np.array_equal(back.u, prof.u)
    assert [e.radius for e in back.events] == [e.radius for e in prof.events]
    assert back.spec == prof.spec and back.p == prof.p


def test_evaluation_outside_span(pucci_spec):
    prof = integrate_from_center(pucci_spec, 2.0)
    with pytest.raises(ValueError):
        prof(prof.r_end * 2)


@settings(max_examples=15, deadline=None)
@given(a=st.floats(0.5, 2.0), branch=st.sampled_from(["minus", "plus"]))
def test_scaling_invariance(a, branch):
    """u_a(r) = a u_1(a^{(p-1)/2} r) for the shoot from u(0) = a."""
    spec = OperatorSpec(1.0, 1.5, 4, branch)
    p = 2.0
    base = integrate_from_center(spec, p, 1.0, stop=StopRule(2))
    scaled = integrate_from_center(spec, p, a, stop=StopRule(2))
    L = a ** ((p - 1.0) / 2.0)
    assert scaled.zeros == pytest.approx(base.zeros / L, rel=1e-8)
    r = np.linspace(0.0, scaled.r_end, 50)
    u, _ = scaled(r)
    ub, _ = base(np.minimum(L * r, base.r_end))
    assert np.max(np.abs(u - a * ub)) <= 1e-7 * a


def test_monotone_energy_detects_violation():
    from pucci_radial.errors import InvariantViolation
    from pucci_radial.integrator import profile_from_function

    spec = OperatorSpec(1.0, 1.0, 4)
    r = np.linspace(0.0, 10.0, 400)
    u, du = bubble(4, r)
    good = profile_from_function(spec, 3.0, r, u, du)
    assert good.check_monotone_energy() == 0.0
    # a slope kink that pumps energy in
    du_bad = du.copy()
    du_bad[100:] *= 1.5
    bad = profile_from_function(spec, 3.0, r, u, du_bad)
    with pytest.raises(InvariantViolation):
        bad.check_monotone_energy()
