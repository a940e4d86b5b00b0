import numpy as np
import pytest
from hypothesis import given

from crossover.construction import construct_design
from crossover.information import (check_orthogonality, closed_form_information,
                                   info_closed, info_full, info_reduced,
                                   orthogonality_sides, projector,
                                   residual_projector, verdict)
from crossover.matrices import QVector, build_A, build_B1, build_B2, q_vector

from conftest import design_from, random_designs, sweep


def info_full_by_normal_equations(d):
    """A'A - A'N (N'N)^{-1} N'A with a full-rank nuisance N (Friday class and empty classes dropped)."""
    A = build_A(d).astype(float).ravel()
    B1 = build_B1(d).astype(float)
    keep = [k for k in (0, 1, 3) if B1[:, k].any()]
    N = np.hstack([B1[:, keep], build_B2(d).astype(float)])
    NtA = N.T @ A
    return float(A @ A - NtA @ np.linalg.solve(N.T @ N, NtA))


def test_projector_mean():
    np.testing.assert_allclose(projector(np.ones((4, 1))), np.full((4, 4), 0.25), atol=1e-15)


def test_projector_identity():
    np.testing.assert_allclose(projector(np.eye(5)), np.eye(5), atol=1e-15)


def test_projector_zero_matrix():
    assert not projector(np.zeros((3, 2))).any()


def test_projector_axioms_on_B1():
    B1 = build_B1(design_from([["HAH", "AHA"], ["HA", "AH"]])).astype(float)
    P = projector(B1)
    np.testing.assert_allclose(P @ P, P, atol=1e-10)
    np.testing.assert_allclose(P, P.T, atol=1e-10)
    np.testing.assert_allclose(P @ B1, B1, atol=1e-10)
    assert np.trace(P) == pytest.approx(4) and np.linalg.matrix_rank(B1) == 4


def test_all_h_single_patient():
    d = design_from([["HHH", "HHH"]])
    assert info_full(d) == pytest.approx(0, abs=1e-9)
    assert info_reduced(d) == pytest.approx(0, abs=1e-9)
    assert info_closed(d) == pytest.approx(6 - 0.5 * (4 + 4 + 4))


def test_dual_pair_single_patient_reduced_is_m():
    d = design_from([["AAH", "HHA"]])
    assert info_reduced(d) == pytest.approx(6)
    assert info_full(d) == pytest.approx(6)


def test_paper_scale_design_reaches_m(paper_design):
    assert info_full(paper_design) == pytest.approx(160, abs=1e-9)


def test_q_zero_but_imbalanced_patients():
    # q = 0 across patients, but each patient sees only one treatment.
    d = design_from([["HHH", "HHH"], ["AAA", "AAA"]])
    assert q_vector(d).is_zero()
    assert info_reduced(d) == pytest.approx(12)
    assert info_full(d) < info_reduced(d) - 1
    assert not check_orthogonality(d)
    assert not verdict(d).optimal


def test_closed_form_substitution():
    d = design_from([["HHA", "HAH"], ["HA", "AH"]])
    assert q_vector(d).contracted.tolist() == [2, 0, 0, 0]
    assert info_closed(d) == pytest.approx(8)
    assert info_reduced(d) == pytest.approx(8, abs=1e-9)


def test_closed_form_zero_q():
    assert closed_form_information(QVector(0, 0, 0, 0, 0), 4, 2, 10) == 160


def test_closed_form_rejects_imbalance_in_empty_stratum():
    with pytest.raises(RuntimeError):
        closed_form_information(QVector(0, 0, 0, 0, 2), 3, 0, 2)


@pytest.mark.parametrize("d", sweep(200, seed=3))
def test_three_routes_agree(d):
    full = info_full(d)
    assert full == pytest.approx(info_full_by_normal_equations(d), abs=1e-8)
    assert abs(info_reduced(d) - info_closed(d)) < 1e-9
    assert full <= info_reduced(d) + 1e-9 <= d.m + 2e-9


@pytest.mark.parametrize("d", sweep(60, seed=4))
def test_projection_identity(d):
    B1 = build_B1(d)
    B2 = build_B2(d)
    lhs = residual_projector(np.hstack([B1, B2]))
    rhs = residual_projector(B1) - projector(residual_projector(B1) @ B2)
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


@given(random_designs())
def test_orthogonality_iff_informations_coincide(d):
    assert check_orthogonality(d) == (abs(info_full(d) - info_reduced(d)) < 1e-6)


def test_orthogonality_constructed_and_all_h(paper_design):
    assert check_orthogonality(paper_design)
    d = design_from([["HHH", "HHH"], ["HH", "HH"]])
    lhs, rhs = orthogonality_sides(d)
    np.testing.assert_allclose(lhs, [6, 4])
    np.testing.assert_allclose(rhs, lhs, atol=1e-9)
    assert check_orthogonality(d)


def test_verdict_constructed_optimal():
    for n3, n2, w in [(4, 2, 10), (1, 0, 2), (0, 3, 4), (5, 3, 6)]:
        r = verdict(construct_design(n3, n2, w, seed=n3 * 100 + w))
        assert r.optimal and r.patient_balanced and r.orthogonal
        assert r.info_full == pytest.approx(r.m) and r.info_closed == r.m


def test_verdict_all_h():
    r = verdict(design_from([["HHH", "HHH"], ["HH", "HH"]]))
    assert not r.optimal and r.info_full == pytest.approx(0, abs=1e-9)


def test_friday_offset_needs_imbalanced_patients():
    # q3_F = +2 and q2_F = -2 cancel in the contracted vector...
    d = design_from([["AAH", "HHH"], ["HA", "AA"]])
    q = q_vector(d)
    assert (q.q3_F, q.q2_F) == (2, -2) and q.is_zero()
    assert info_reduced(d) == pytest.approx(d.m)
    # ...but the patients cannot then be balanced, so the design is not optimal.
    r = verdict(d)
    assert not r.patient_balanced and not r.optimal
    assert r.info_full < r.m - 1e-6


@given(random_designs())
def test_balanced_with_zero_q_forces_zero_friday_components(d):
    q = q_vector(d)
    if q.is_zero() and all(p.imbalance() == 0 for p in d.plans):
        assert q.q3_F == 0 and q.q2_F == 0


@given(random_designs())
def test_verdict_soundness(d):
    r = verdict(d)
    assert r.optimal == (abs(r.info_full - r.m) < 1e-6)
    assert r.info_full <= r.info_reduced + 1e-9 <= r.m + 2e-9


def test_verdict_rejects_invalid_design():
    from crossover.design import Design, PatientPlan
    d = Design(2, (PatientPlan.from_strings("1", ["HAH"]),))
    with pytest.raises(ValueError, match="invalid design"):
        verdict(d)
