from __future__ import annotations

import random

import pytest

from roadmapper.errors import WrongSortError
from roadmapper.operationalization import (
    is_admissible,
    qualitative_operationalizations,
    quantitative_operationalizations,
    satisfaction_closure,
)
from roadmapper.quanteval import eval_condition, val
from roadmapper.testkit import (
    ModelGenSpec,
    brute_operationalizations,
    generate_database,
)

from conftest import parse_ok


def test_admissible_vacuous_on_empty_mandatory_set():
    db = parse_ok("t a. t b.")
    assert is_admissible([], db)


def test_admissible_requires_mandatory_members():
    db = parse_ok("t a !.")
    assert is_admissible(["a"], db)
    assert not is_admissible([], db)


def test_admissible_rejects_conflicting_sets():
    db = parse_ok("t u2. t u4. k c1: u2 & u4 -> false.")
    assert not is_admissible(["u2", "u4", "c1"], db)


def test_single_operationalization_with_mandatory_union():
    db = parse_ok("t u1. g p2. k imp1: u1 -> p2. t m1 !.")
    ops = qualitative_operationalizations("p2", db)
    assert len(ops) == 1
    assert ops[0].support == frozenset({"u1", "imp1", "m1"})
    assert ops[0].kind == "qualitative"


def test_two_alternative_operationalizations():
    db = parse_ok(
        "t u2. t u3. t u4. g p3. k op_a: u2 & u3 -> p3. k op_b: u4 -> p3."
    )
    ops = qualitative_operationalizations("p3", db)
    supports = {tuple(sorted(op.support)) for op in ops}
    assert supports == {("op_a", "u2", "u3"), ("op_b", "u4")}


def test_goal_without_refinement_has_no_operationalizations():
    db = parse_ok("g lonely. t a.")
    assert qualitative_operationalizations("lonely", db) == ()


def test_qualitative_rejects_tasks():
    db = parse_ok("t a.")
    with pytest.raises(WrongSortError):
        qualitative_operationalizations("a", db)


def test_quantitative_rejects_propositional_targets():
    db = parse_ok("g p1.")
    with pytest.raises(WrongSortError):
        quantitative_operationalizations("p1", db)


def test_quantitative_operationalization_through_refinement():
    db = parse_ok(
        "t w1: t1 = 30. t w2: t2 = 60. t w3: t3 = 45. t w4: t4 = 45. "
        "k e6: t6 = t1 + t2 + t3 + t4. q qc: t6 <= 200."
    )
    ops = quantitative_operationalizations("qc", db)
    assert [sorted(op.support) for op in ops] == [["e6", "w1", "w2", "w3", "w4"]]
    assert ops[0].kind == "quantitative"


def test_quantitative_unsatisfiable_bound():
    db = parse_ok(
        "t w1: t1 = 30. t w2: t2 = 60. t w3: t3 = 45. t w4: t4 = 45. "
        "k e6: t6 = t1 + t2 + t3 + t4. q qc: t6 <= 100."
    )
    assert quantitative_operationalizations("qc", db) == ()


def test_quantitative_through_declared_effect():
    db = parse_ok("t u7. q q7: P(e <= 0.10) = 0.8. k eff7: u7 -> q7.")
    ops = quantitative_operationalizations("q7", db)
    assert len(ops) == 1
    assert "u7" in ops[0].support


def test_quantitative_no_assignment_anywhere():
    db = parse_ok("q qc: v = 1. t a.")
    assert quantitative_operationalizations("qc", db) == ()


def test_assignment_is_its_own_operationalization():
    db = parse_ok("t w: v = 3.")
    ops = quantitative_operationalizations("w", db)
    assert [sorted(op.support) for op in ops] == [["w"]]


def test_supports_are_admissible_and_minimal(las_db):
    from roadmapper.model import G, S

    mandatory = set(las_db.mandatory_ids())
    mandatory_members = {
        i for i in mandatory if las_db[i].sort.value in ("k", "t")
    }
    for target in las_db.mandatory_ids(G, S):
        for op in qualitative_operationalizations(target, las_db):
            assert is_admissible(op.support, las_db)
            for member in sorted(op.support - mandatory_members):
                smaller = satisfaction_closure(op.support - {member}, las_db)
                assert target not in smaller.satisfied


def test_quantitative_results_reverify_under_eval_condition():
    db = parse_ok(
        "t w1: t1 = 30. t w2: t2 = 60. k e6: t6 = t1 + t2. q qc: t6 <= 100."
    )
    for op in quantitative_operationalizations("qc", db):
        reqs = [db[i] for i in sorted(op.support)]
        assignment = {
            name: next(iter(values))
            for name, values in (
                (var, val(reqs, var)) for var in ("t1", "t2", "t6")
            )
        }
        assert eval_condition(db["qc"].body.cond, assignment, {})


def test_softgoal_operationalizable_through_refinement_implication():
    db = parse_ok(
        's sg: ~ "fast arrival". q qc: t7 <= 900. k ref: qc -> sg. '
        "k kt: t7 = 700."
    )
    ops = qualitative_operationalizations("sg", db)
    assert [sorted(op.support) for op in ops] == [["kt", "ref"]]


@pytest.mark.parametrize("seed", range(25))
def test_matches_brute_force_scan(seed):
    rng = random.Random(seed)
    db = generate_database(
        ModelGenSpec(
            seed=seed,
            tasks=rng.randint(2, 4),
            assumptions=rng.randint(0, 1),
            goals=rng.randint(1, 2),
            conflict_density=rng.choice([0.0, 0.3]),
        )
    )
    if len(db.member_ids()) > 12:
        pytest.skip("generated model larger than the oracle cap")
    goals = [r.id for r in db if r.sort.value == "g"]
    for goal in goals:
        engine = sorted(
            tuple(sorted(op.support))
            for op in qualitative_operationalizations(goal, db)
        )
        oracle = sorted(tuple(sorted(s)) for s in brute_operationalizations(goal, db))
        assert engine == oracle, f"seed={seed} goal={goal}"


def test_satisfaction_closure_reports_origins():
    db = parse_ok("t u1. g p2. k imp1: u1 -> p2. q qc: v <= 5. t w: v = 3.")
    sc = satisfaction_closure(["u1", "imp1", "w"], db)
    assert sc.origin["u1"] == "member"
    assert sc.origin["p2"] == "inferred"
    assert sc.origin["qc"] == "numeric"
    assert sc.values["v"] == frozenset({3.0})


def test_search_limit_raises_resource_error():
    from roadmapper.errors import ResourceLimitError

    db = parse_ok(
        "g p1. t a. t b. t c. k i1: a & b -> p1. k i2: b & c -> p1. k i3: a & c -> p1."
    )
    with pytest.raises(ResourceLimitError):
        qualitative_operationalizations("p1", db, limit=1)
