import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crossover.construction import construct_design
from crossover.design import (Design, DesignFormatError, ModelParams, PatientPlan,
                              Schedule, SchemaError, Treatment, WeekSequence,
                              design_from_json, design_to_json, read_design,
                              validate_design, write_design)

from conftest import design_from, random_designs


def test_treatment_coding():
    assert Treatment.H.signed == 1 and Treatment.A.signed == -1
    assert Treatment.H.dual is Treatment.A and Treatment.A.dual is Treatment.H


def test_schedule_days_fixed():
    assert Schedule.THRICE.days == ("Mon", "Wed", "Fri")
    assert Schedule.TWICE.days == ("Mon", "Fri")
    with pytest.raises(SchemaError):
        Schedule.from_sessions(4)


def test_week_sequence_length_must_match_schedule():
    with pytest.raises(ValueError):
        WeekSequence(Schedule.THRICE, (Treatment.H, Treatment.A))


def test_plan_rejects_schedule_change():
    with pytest.raises(ValueError, match="unsupported"):
        PatientPlan("1", Schedule.THRICE, (WeekSequence.from_string("HAH"), WeekSequence.from_string("HA")))


@given(st.text(alphabet="HA", min_size=2, max_size=3))
def test_dual_is_involution(codes):
    seq = WeekSequence.from_string(codes)
    assert seq.dual().dual() == seq
    assert all(a is not b for a, b in zip(seq.treatments, seq.dual().treatments))


def test_model_params_require_positive_sigma():
    with pytest.raises(ValueError):
        ModelParams(tau=1.0, sigma=0.0)


def test_validate_length_mismatch():
    plans = (PatientPlan.from_strings("1", ["HAH"] * 10), PatientPlan.from_strings("2", ["HAH"] * 9))
    report = validate_design(Design(10, plans))
    assert not report.valid
    assert any("plan length 9 != w=10" in v for v in report.violations)


def test_validate_valid_design_is_empty():
    report = validate_design(design_from([["HAH", "AHA"], ["AH", "HA"]]))
    assert report.empty and report.valid and not report


def test_validate_duplicate_ids():
    plans = (PatientPlan.from_strings("7", ["HA"]), PatientPlan.from_strings("7", ["AH"]))
    assert any("duplicate" in v for v in validate_design(Design(1, plans)).violations)


def test_validate_imbalance_is_warning():
    # 4 H and 2 A over two thrice-weekly weeks: imbalance 4 - 2 = 2
    report = validate_design(design_from([["HHA", "HAH"]]))
    assert report.valid
    assert report.warnings == ["patient 1: patient imbalance = 2"]


@given(random_designs())
def test_m_equals_cell_count(d):
    assert d.n_cells() == d.m == d.weeks * (3 * d.n3 + 2 * d.n2)


@given(random_designs())
def test_json_round_trip(d):
    assert design_from_json(design_to_json(d)) == d


def test_file_round_trip(tmp_path):
    d = construct_design(3, 1, 4, seed=9)
    path = tmp_path / "d.json"
    write_design(d, path)
    assert read_design(path) == d


def test_read_n3_7_n2_2_w10(tmp_path):
    raw = {"weeks": 10, "plans": (
        [{"patient_id": str(i), "sessions_per_week": 3, "weeks": [["H", "A", "H"]] * 10} for i in range(7)]
        + [{"patient_id": str(7 + i), "sessions_per_week": 2, "weeks": [["A", "H"]] * 10} for i in range(2)]
    )}
    path = tmp_path / "d.json"
    path.write_text(json.dumps(raw))
    d = read_design(path)
    assert (d.n3, d.n2, d.m, d.n_cells()) == (7, 2, 250, 250)


def test_unknown_day_label_is_schema_error():
    raw = {"weeks": 1, "plans": [{"patient_id": "1", "sessions_per_week": 3,
                                  "days": ["Mon", "Tue", "Fri"], "weeks": [["H", "A", "H"]]}]}
    with pytest.raises(SchemaError, match="Tue"):
        design_from_json(json.dumps(raw))


def test_malformed_json_names_line():
    with pytest.raises(DesignFormatError, match="line 3"):
        design_from_json('{\n "weeks": 1,\n "plans": [,]}')


def test_missing_field_named():
    with pytest.raises(DesignFormatError, match=r"plans\[0\].*sessions_per_week"):
        design_from_json('{"weeks": 1, "plans": [{"patient_id": "1", "weeks": []}]}')


def test_bad_treatment_code():
    raw = '{"weeks": 1, "plans": [{"patient_id": "1", "sessions_per_week": 2, "weeks": [["H", "X"]]}]}'
    with pytest.raises(SchemaError, match=r"weeks\[0\]"):
        design_from_json(raw)


def test_canonical_order_thrice_first():
    d = design_from([["HA"], ["HAH"], ["AH"], ["AHA"]])
    assert [p.patient_id for p in d.canonical_plans()] == ["2", "4", "1", "3"]
