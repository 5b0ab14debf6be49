import json
from fractions import Fraction

import pytest

from htoffoli import cost
from htoffoli import routines as R
from htoffoli.circuit import Circuit, Conditioned, Decode, Macro, MeasureZ, PrepareMagic, PreparePlus, PrepareZero
from htoffoli.pauli import CliffordGate as G


def small_circuit():
    # one of each category, counted by hand below
    return Circuit.build(
        {q: None for q in range(4)},
        [
            PrepareMagic("H", (0,)),
            PrepareZero(1),
            PreparePlus(2),
            G("CNOT", (0, 1)),
            G("H", (2,)),
            MeasureZ(1, "m"),
            Conditioned(("m",), G("CZ", (0, 2))),
            Conditioned(("m",), G("X", (0,))),
            Decode(2),
            G("CZ", (0, 3), label=R.UNENCODED),
        ],
        inputs=(3,),
        outputs=(0, 2),
    )


def test_categories_by_hand():
    rep = cost.count_locations(small_circuit())
    assert rep.counts == {
        "magic_prep": 1,
        "data_prep": 2,
        "two_qubit": 1,
        "conditioned_two_qubit": 1,
        "one_qubit": 2,
        "measurement": 1,
        "decode": 1,
        "idle": 0,
    }
    # 1 + 2 + 2 + 2 + 1
    assert rep.total == 8


def test_weights_scale_categories():
    rules = cost.CostRules.from_mapping({"one_qubit": 3, "measurement": 5})
    assert cost.count_locations(small_circuit(), rules).total == 8 + 6 + 5


def test_idle_on_a_schedule():
    c = Circuit.build(
        {0: None, 1: None, 2: None},
        [G("CNOT", (0, 1)), G("CNOT", (1, 2)), G("CNOT", (1, 2))],
        inputs=(0, 1, 2),
        outputs=(0, 1, 2),
    )
    # steps 0, 1, 2; qubit 0 is held to the end after step 0, qubit 2 starts at step 1
    assert cost.idle_locations(c, cost.PRESETS["scheduled"]) == 2


def test_macros_have_no_cost():
    c = Circuit.build({0: None, 1: None, 2: None}, [Macro("TOFFOLI", (0, 1, 2))], (0, 1, 2))
    with pytest.raises(cost.CostError):
        cost.count_locations(c)


def test_rules_from_file(tmp_path):
    f = tmp_path / "rules.json"
    f.write_text(json.dumps({"data_prep": 0, "idle": 2}))
    assert cost.CostRules.from_file(f) == cost.CostRules(data_prep=0, idle=2)
    f.write_text(json.dumps({"teleport": 1}))
    with pytest.raises(cost.CostError):
        cost.CostRules.from_file(f)
    f.write_text(json.dumps({"idle": -1}))
    with pytest.raises(cost.CostError):
        cost.CostRules.from_file(f)
    f.write_text("{")
    with pytest.raises(cost.CostError):
        cost.CostRules.from_file(f)


def test_presets_on_h_to_toffoli():
    c = R.h_to_toffoli(2)
    assert cost.count_locations(c).total == 36
    assert cost.count_locations(c, cost.PRESETS["free-preparation"]).total == 34
    assert cost.count_locations(c, cost.PRESETS["scheduled"]).total > 36


def test_per_output():
    rep = cost.count_locations(R.fourteen_to_two(), outputs=2)
    assert rep.per_output == rep.total / 2


@pytest.mark.parametrize(
    "routine, target, injection, expected",
    [
        # 4 * routine/outputs + 23, plus 15 for the gate, plus 5 per raw state
        ("ten-to-two", "toffoli-state", False, 4 * Fraction(80, 2) + 23),
        ("fourteen-to-two", "toffoli-gate", True, 4 * (Fraction(78, 2) + 5 * 7) + 23 + 15),
        ("twenty-six-to-six", "toffoli-gate", True, 4 * (Fraction(192, 6) + 5 * Fraction(26, 6)) + 23 + 15),
        ("h-to-toffoli", "toffoli-gate", True, 36 + 15 + 5 * 8),
    ],
)
def test_pipeline_arithmetic(routine, target, injection, expected):
    assert cost.pipeline_cost(routine, target, injection).total == expected


def test_state_costs():
    assert [cost.state_cost(n) for n in cost.TABLE_ROUTINES] == [20, 28, Fraction(52, 3), 8]


def test_pipeline_errors():
    with pytest.raises(cost.CostError):
        cost.pipeline_cost("h-to-toffoli", "toffoli-lunch")
    with pytest.raises(cost.CostError):
        cost.pipeline_cost("nine-to-one")


def test_render_number():
    assert cost.render_number(Fraction(758, 3)) == "252.7"
    assert cost.render_number(Fraction(52, 3)) == "17.3"
    assert cost.render_number(Fraction(36)) == "36"


def test_table_flags_unreproduced_base_counts():
    report = cost.table_one(error_coefficients={n: None for n in cost.TABLE_ROUTINES})
    h = report.rows["h-to-toffoli"]
    assert h["state"].status == "matched" and h["gate"].status == "matched"
    flagged = " ".join(report.flags)
    assert "ten-to-two" in flagged and "four-state Toffoli preparation" in flagged
    assert "Toffoli gate from state" not in flagged
    for name in ("ten-to-two", "fourteen-to-two", "twenty-six-to-six"):
        assert report.rows[name]["state"].status == "derived"
    assert json.loads(json.dumps(report.as_dict()))["rows"]["h-to-toffoli"]["gate"]["quoted"] == "91"
