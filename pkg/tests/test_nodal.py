import csv

import numpy as np
import pytest

from pucci_radial import integrate_exterior
from pucci_radial.errors import ZeroCountNotReached
from pucci_radial.nodal import (
    build_nodal,
    concentration_sweep,
    decay_bound_check,
    decompose,
    gluing_check,
    positive_solution_sweep,
    inflection_bound_ratio,
    relative_change,
    scaling_identity_check,
    stabilizes,
    write_sweep_csv,
)
from pucci_radial.shooting import critical_slope

P_MINUS = 2.148061592


def test_build_nodal_structure(pucci_spec):
    sol = build_nodal(pucci_spec, 2.0, 3)
    dec = sol.decomposition
    assert dec.k == 3 and len(dec.nodal_radii) == 2
    assert dec.extremum_radii[0] == 0.0
    assert sol.profile.r_end == pytest.approx(1.0)
    # signs alternate between regions
    mid = [0.5 * (a + b) for a, b in zip((0.0, *dec.nodal_radii), (*dec.nodal_radii, 1.0))]
    signs = np.sign(sol.profile(np.array(mid))[0])
    assert list(signs) == [1, -1, 1]
    assert all(len(t) == 1 for t in dec.inflection_radii)


def test_nonexistence_above_nodal_threshold(pucci_spec):
    with pytest.raises(ZeroCountNotReached) as ei:
        build_nodal(pucci_spec.with_branch("plus"), 3.0, 2)
    assert ei.value.found == 1 and ei.value.wanted == 2


def test_build_nodal_rejects_k(pucci_spec):
    with pytest.raises(ValueError):
        build_nodal(pucci_spec, 2.0, 0)


def test_decompose_matches_build(pucci_spec):
    sol = build_nodal(pucci_spec, 2.0, 2)
    again = decompose(sol.profile, 2)
    assert again == sol.decomposition


def test_scaling_and_gluing(pucci_spec):
    tol = 1e-10
    sol = build_nodal(pucci_spec, P_MINUS - 0.1, 2, tol=tol)
    rep = scaling_identity_check(sol, pucci_spec, P_MINUS - 0.1, tol=tol)
    assert rep.residual_radius <= 10 * tol
    assert rep.residual_slope <= 10 * tol
    assert rep.M0_exceeds_ball
    g = gluing_check(sol, pucci_spec, P_MINUS - 0.1, tol=tol)
    assert g.rel_diff <= 10 * tol and g.n_points > 10
    assert inflection_bound_ratio(sol, pucci_spec, P_MINUS - 0.1) >= 0.95


def test_concentration_sweep_and_csv(tmp_path, pucci_spec):
    eps = (0.2, 0.1, 0.05)
    recs = concentration_sweep(pucci_spec, 2, eps, P_MINUS)
    assert [r.epsilon for r in recs] == list(eps)
    M0 = [r.decomposition.M[0] for r in recs]
    assert M0 == sorted(M0)
    path = write_sweep_csv(tmp_path / "s.csv", recs, 2, "M0 = sup of u")
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# M0")
    rows = list(csv.DictReader(lines[1:]))
    assert {"epsilon", "p", "M0", "M1", "r1", "s1", "r1_hat"} <= set(rows[0])
    assert float(rows[2]["epsilon"]) == 0.05


def test_sweep_parallel_matches_serial(pucci_spec):
    eps = (0.2, 0.1)
    a = concentration_sweep(pucci_spec, 2, eps, P_MINUS, jobs=1)
    b = concentration_sweep(pucci_spec, 2, eps, P_MINUS, jobs=2)
    assert [r.row(2) for r in a] == [r.row(2) for r in b]


def test_sweep_rejects_bad_eps(pucci_spec):
    with pytest.raises(ValueError):
        concentration_sweep(pucci_spec, 2, (0.1, 0.2), P_MINUS)


def test_positive_sweep(pucci_spec):
    recs = positive_solution_sweep(pucci_spec, (0.1, 0.05, 0.02), P_MINUS)
    sups = [r.values["sup_norm"] for r in recs]
    assert sups == sorted(sups)
    assert all(not r.error for r in recs)


def test_stabilizes():
    assert stabilizes([1.0, 1.1, 1.12, 1.125])
    assert not stabilizes([1.0, 2.0, 4.0])
    assert relative_change(1.0, 1.01) == pytest.approx(0.01 / 1.01)


def test_decay_bound(pucci_spec):
    p = 2.877
    cs = critical_slope("minus", pucci_spec, p)
    fast = decay_bound_check(integrate_exterior(pucci_spec, "minus", p, cs.bracket[0]))
    assert fast.holds
    slow = decay_bound_check(integrate_exterior(pucci_spec, "minus", p, 0.5 * cs.alpha_star))
    assert not slow.holds
