from __future__ import annotations

import random

import pytest

from roadmapper.configuration import (
    check_configuration,
    enumerate_configurations,
)
from roadmapper.errors import ResourceLimitError, UnresolvedReferenceError, WrongSortError
from roadmapper.operationalization import satisfaction_closure
from roadmapper.testkit import ModelGenSpec, brute_configurations, generate_database

from conftest import parse_ok


def test_las_first_configuration_passes_all_six(las_enumeration):
    db = las_enumeration.database
    report = check_configuration(db, las_enumeration.configurations[0])
    assert report.is_configuration
    assert report.failing() == []


def test_las_union_fails_consistency(las_enumeration):
    db = las_enumeration.database
    with_u16 = next(c for c in las_enumeration if "u16" in c.members)
    with_u17 = next(c for c in las_enumeration if "u17" in c.members)
    report = check_configuration(db, with_u16.members | with_u17.members)
    assert not report.consistency.ok
    assert "c4" in report.consistency.witness


def test_removing_support_task_breaks_qualitative_threshold(las_enumeration):
    db = las_enumeration.database
    config = next(c for c in las_enumeration if "u1" in c.members)
    report = check_configuration(db, config.members - {"u1"})
    assert not report.qual_threshold.ok
    assert "p2" not in satisfaction_closure(config.members - {"u1"}, db).satisfied


def test_unknown_member_raises():
    db = parse_ok("t a.")
    with pytest.raises(UnresolvedReferenceError):
        check_configuration(db, ["ghost"])


def test_non_member_sort_raises():
    db = parse_ok("g p1. t a.")
    with pytest.raises(WrongSortError):
        check_configuration(db, ["p1"])


def test_two_exclusive_alternatives_give_two_configurations():
    db = parse_ok(
        "g p1 ! . t a. t b. k i1: a -> p1. k i2: b -> p1. k c1 !: a & b -> false."
    )
    enum = enumerate_configurations(db)
    assert [sorted(c.members) for c in enum] == [
        ["a", "c1", "i1"],
        ["b", "c1", "i2"],
    ]


def test_compatible_optional_task_joins_every_configuration():
    db = parse_ok(
        "g p1 ! . t a. t b. k i1: a -> p1. k i2: b -> p1. k c1 !: a & b -> false. "
        't extra ? "harmless".'
    )
    enum = enumerate_configurations(db)
    assert len(enum) == 2
    assert all("extra" in c.members for c in enum)


def test_unsatisfiable_mandatory_goal_gives_no_configurations():
    db = parse_ok("g p1 !. t a.")
    enum = enumerate_configurations(db)
    assert len(enum) == 0


def test_empty_database_has_the_empty_configuration():
    db = parse_ok("")
    enum = enumerate_configurations(db)
    assert [sorted(c.members) for c in enum] == [[]]


def test_atom_limit_guard():
    text = " ".join(f"t a{i}." for i in range(30))
    db = parse_ok(text)
    with pytest.raises(ResourceLimitError):
        enumerate_configurations(db)
    enum = enumerate_configurations(db, max_atoms=40)
    assert len(enum) == 1


def test_max_results_truncation():
    db = parse_ok(
        "g p1 ! . t a. t b. k i1: a -> p1. k i2: b -> p1. k c1 !: a & b -> false."
    )
    enum = enumerate_configurations(db, max_results=1)
    assert enum.truncated and len(enum) == 1


def test_value_conflicts_expanded_before_enumeration():
    db = parse_ok("t a: v = 3. t b: v = 7.")
    enum = enumerate_configurations(db)
    assert all("@macro_confl_v_3_7" in c.members for c in enum)
    assert not any({"a", "b"} <= c.members for c in enum)


def test_plain_member_kept_as_dominance_blocker():
    # `blocker` earns its place only by making the optional addition fire the
    # mandatory conflict; both outcomes are legitimate configurations.
    db = parse_ok(
        "g p1 ! . t x. k i1: x -> p1. t blocker. t opt ?. "
        "k c1 !: blocker & opt -> false."
    )
    enum = enumerate_configurations(db)
    families = {tuple(sorted(c.members)) for c in enum}
    assert families == {
        ("c1", "i1", "opt", "x"),
        ("blocker", "c1", "i1", "x"),
    }
    oracle = {tuple(sorted(s)) for s in brute_configurations(enum.database)}
    assert families == oracle


def test_every_returned_configuration_passes_check(las_enumeration):
    db = las_enumeration.database
    for config in las_enumeration.configurations[:16]:
        assert check_configuration(db, config).is_configuration


def test_pareto_efficiency_restated(las_enumeration):
    db = las_enumeration.database
    optionals = set(db.optional_member_ids())
    for config in las_enumeration.configurations[:8]:
        for opt in sorted(optionals - config.members):
            grown = satisfaction_closure(config.members | {opt}, db)
            assert grown.bottom  # adding any optional must break consistency


def test_irredundancy_restated(las_enumeration):
    db = las_enumeration.database
    mandatory = {
        i for i in db.mandatory_ids() if db[i].sort.value in ("k", "t")
    }
    config = las_enumeration.configurations[0]
    for member in sorted(config.members - mandatory):
        report = check_configuration(db, config.members - {member})
        assert not report.is_configuration


@pytest.mark.parametrize("seed", range(40))
def test_oracle_equivalence_on_random_models(seed):
    rng = random.Random(seed)
    db = generate_database(
        ModelGenSpec(
            seed=seed,
            tasks=rng.randint(2, 5),
            assumptions=rng.randint(0, 2),
            goals=rng.randint(1, 3),
            conflict_density=rng.choice([0.1, 0.3, 0.5]),
            optional_ratio=rng.choice([0.1, 0.4]),
            mandatory_ratio=rng.choice([0.3, 0.6]),
            include_quantities=seed % 3 == 0,
        )
    )
    enum = enumerate_configurations(db)
    if len(enum.database.member_ids()) > 12:
        pytest.skip("expanded model larger than the oracle cap")
    engine = sorted(tuple(sorted(c.members)) for c in enum)
    oracle = sorted(tuple(sorted(s)) for s in brute_configurations(enum.database))
    assert engine == oracle


def test_canonical_order_and_labels():
    db = parse_ok(
        "g p1 ! . t a. t b. k i1: a -> p1. k i2: b -> p1. k c1 !: a & b -> false."
    )
    enum = enumerate_configurations(db)
    keys = [c.canonical_key for c in enum]
    assert keys == sorted(keys)
    assert [c.id for c in enum] == ["S1", "S2"]
