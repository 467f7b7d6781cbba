import pytest

from pucci_radial import Branch, OperatorSpec
from pucci_radial.errors import BoundsViolated, NoSignChange
from pucci_radial.exponents import (
    ExponentKind,
    center_crosses,
    critical_exponent_ball,
    critical_exponent_nodal,
    exponent_bounds,
    nodal_gap,
    verify_certificates,
)


def test_bounds(pucci_spec):
    assert exponent_bounds(pucci_spec, "minus") == pytest.approx((15 / 7, 3.0))
    assert exponent_bounds(pucci_spec, "plus") == pytest.approx((3.0, 5.0))


@pytest.mark.parametrize("N", [3, 4, 5])
def test_laplacian_threshold(N):
    est = critical_exponent_ball(OperatorSpec(1.0, 1.0, N), p_tol=1e-3)
    assert est.value == pytest.approx((N + 2) / (N - 2), abs=1e-3)
    assert verify_certificates(est)


def test_minus_threshold(pucci_spec):
    est = critical_exponent_ball(pucci_spec, p_tol=1e-4)
    assert est.which is ExponentKind.P_STAR_MINUS
    assert est.width <= 1e-4
    assert est.bound_checks["inside_open_interval"]
    assert est.value == pytest.approx(2.14806, abs=1e-4)
    lo, hi = est.certificates
    assert lo.outcome and not hi.outcome
    assert "rho" in lo.detail


def test_bad_bracket(pucci_spec):
    with pytest.raises(BoundsViolated):
        critical_exponent_ball(pucci_spec, bracket=(2.5, 2.9))


def test_indicator(pucci_spec):
    assert center_crosses(pucci_spec, 2.0).outcome
    assert not center_crosses(pucci_spec, 2.5).outcome


def test_gap_sign(pucci_spec):
    assert nodal_gap(pucci_spec, 2.5).gap > 0
    assert nodal_gap(pucci_spec, 3.5).gap < 0


def test_nodal_threshold(pucci_spec):
    est = critical_exponent_nodal(pucci_spec, p_tol=1e-3)
    assert est.spec.branch is Branch.PLUS
    assert est.bound_checks["ordered"]
    assert est.value == pytest.approx(2.8769, abs=1e-3)
    assert verify_certificates(est)
    d = est.to_dict()
    assert d["which"] == "p_star_star_plus" and len(d["certificates"]) == 2


def test_nodal_laplacian_merges():
    with pytest.raises(NoSignChange, match="Laplacian"):
        critical_exponent_nodal(OperatorSpec(1.0, 1.0, 4), p_minus=3.0, p_plus=3.0)
