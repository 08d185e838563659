"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
"""

from __future__ import annotations

import random
import time

import pytest

from roadmapper.configuration import enumerate_configurations
from roadmapper.errors import NotApplicableError
from roadmapper.inference import closure
from roadmapper.model import (
    Compare,
    Conflict,
    Const,
    G,
    Implication,
    Modality,
    Normal,
    ProbCompare,
    PropVar,
    QuantVar,
    Requirement,
    SimpleProp,
    SimpleQuant,
    T,
    Var,
    build_database,
)
from roadmapper.parser import parse, serialize
from roadmapper.quanteval import eval_condition, normal_cdf, sat_value, val
from roadmapper.roadmap import (
    MaximizeValue,
    MinimizeValue,
    RoadmapValueSum,
    apply_adaptation,
    build_roadmaps,
    derive_adaptation,
    rank_configurations,
    rank_roadmaps,
)
from roadmapper.testkit import (
    ModelGenSpec,
    brute_configurations,
    brute_entailment,
    generate_database,
    normal_cdf_by_integration,
    parse_dot,
    quantile_bisect,
)
from roadmapper.transforms import expand_value_conflicts, expand_value_preferences
from roadmapper.dot import render_dot

from conftest import LAS_PATH


def _report(number: int, name: str) -> None:
    print(f"ACCEPTANCE {number} ({name}): PASS")


def _small_specs(count: int, *, quantities_every: int = 4):
    """Seeded generator specs kept within the brute-force oracle scale."""
    produced = 0
    seed = 0
    while produced < count:
        rng = random.Random(seed * 7919)
        spec = ModelGenSpec(
            seed=seed,
            tasks=rng.randint(2, 5),
            assumptions=rng.randint(0, 2),
            goals=rng.randint(1, 3),
            conflict_density=rng.choice([0.1, 0.3, 0.5]),
            optional_ratio=rng.choice([0.1, 0.3, 0.5]),
            mandatory_ratio=rng.choice([0.2, 0.5, 0.8]),
            include_quantities=(seed % quantities_every == 0),
        )
        seed += 1
        yield spec
        produced += 1


def test_criterion_1_oracle_equivalence():
    start = time.time()
    compared = 0
    seed = 0
    while compared < 500:
        rng = random.Random(seed * 7919)
        quant = seed % 4 == 0
        spec = ModelGenSpec(
            seed=seed,
            tasks=rng.randint(2, 4 if quant else 5),
            assumptions=rng.randint(0, 1 if quant else 2),
            goals=rng.randint(1, 2 if quant else 3),
            conflict_density=rng.choice([0.1, 0.3, 0.5]),
            optional_ratio=rng.choice([0.1, 0.3, 0.5]),
            mandatory_ratio=rng.choice([0.2, 0.5, 0.8]),
            include_quantities=quant,
        )
        seed += 1
        db = generate_database(spec)
        enum = enumerate_configurations(db)
        if len(enum.database.member_ids()) > 12:
            continue
        engine = sorted(tuple(sorted(c.members)) for c in enum)
        oracle = sorted(tuple(sorted(s)) for s in brute_configurations(enum.database))
        assert engine == oracle, f"seed {spec.seed}: engine {engine} oracle {oracle}"
        compared += 1
    elapsed = time.time() - start
    assert elapsed <= 60.0, f"500 comparisons took {elapsed:.1f}s"
    _report(1, f"oracle equivalence, 500 databases in {elapsed:.1f}s")


def test_criterion_2_las_reproduction():
    from roadmapper.parser import load_file

    result = load_file(LAS_PATH)
    assert result.ok
    enum = enumerate_configurations(result.database, max_atoms=64)
    assert len(enum.configurations) >= 3

    left = {"u21", "u19", "u17", "u5"}
    right = {"u22", "u20", "u16", "u6"}
    pair = None
    for a in enum:
        if not left <= a.members:
            continue
        for b in enum:
            if right <= b.members and b.members - a.members == frozenset(right):
                pair = (a, b)
                break
        if pair:
            break
    assert pair is not None, "no S1/S3 analog pair found"
    s1, s3 = pair
    operator = derive_adaptation(s1, s3, trigger=["u21"])
    assert operator.add == frozenset({"u22", "u20", "u16", "u6"})
    assert frozenset({"u21", "u19", "u17", "u5"}) <= operator.delete
    union = closure(sorted(s1.members | s3.members), enum.database)
    assert union.bottom, "the S1/S3 union must be inconsistent"
    _report(2, f"LAS reproduction, {len(enum.configurations)} configurations")


def test_criterion_3_inference_soundness_and_paraconsistency():
    rng = random.Random(20260809)
    checked = 0
    for seed in range(1000):
        db = generate_database(
            ModelGenSpec(
                seed=seed,
                tasks=rng.randint(2, 4),
                assumptions=rng.randint(0, 1),
                goals=rng.randint(1, 3),
                conflict_density=0.0,
            )
        )
        premise_ids = [i for i in db.ids() if rng.random() < 0.7]
        atoms = {r.id for r in db if not r.is_complex}
        derived = closure(premise_ids, db).derived
        oracle = brute_entailment([db[i] for i in premise_ids])
        assert derived & atoms == oracle & atoms, f"seed {seed}"

        premise_tasks = sorted(i for i in premise_ids if db[i].sort is T)
        if len(premise_tasks) >= 2:
            conflict = Requirement("boom", Conflict(frozenset(premise_tasks[:2])))
            db2 = build_database(list(db) + [conflict], db.preferences, db.sat_fns)
            after = closure(premise_ids + ["boom"], db2)
            assert after.bottom
            assert after.derived == derived | {"boom"}, f"explosion at seed {seed}"
        checked += 1
    assert checked == 1000
    _report(3, "inference soundness on 1000 databases, no explosion")


def test_criterion_4_probability_evaluation():
    rng = random.Random(4)
    for _ in range(200):
        mean = rng.uniform(-50, 100)
        sd = rng.uniform(0.5, 60)
        x = mean + rng.uniform(-6, 6) * sd
        assert abs(normal_cdf(x, mean, sd) - normal_cdf_by_integration(x, mean, sd)) <= 1e-7

    dist = Normal(60.0, 2025.0)
    flip = quantile_bisect(dist, 0.9)
    assert abs(flip - 117.67) <= 0.05
    env = {"t2": dist}

    def constraint(bound: float) -> bool:
        cond = ProbCompare(QuantVar("t2"), "<=", Const(bound), ">=", Const(0.9))
        return eval_condition(cond, {}, env)

    assert not constraint(flip - 0.05)
    assert constraint(flip + 0.05)
    _report(4, f"normal CDF within 1e-7; bound flips at {flip:.2f}")


def test_criterion_5_macro_laws():
    for spec in _small_specs(200, quantities_every=2):
        db = generate_database(spec)
        once, _ = expand_value_conflicts(db)
        again, second = expand_value_conflicts(once)
        assert not second.changed and again == once, f"seed {spec.seed}"
        if db.sat_fn("v1") is not None:
            expanded, report = expand_value_preferences(db, "v1")
            fn = expanded.sat_fn("v1")
            for pref in report.added_preferences:
                left = expanded[pref.left].body.cond.rhs.value
                right = expanded[pref.right].body.cond.rhs.value
                if pref.kind.value == ">":
                    assert sat_value(fn, left) > sat_value(fn, right)
                else:
                    assert abs(sat_value(fn, left) - sat_value(fn, right)) <= 1e-9
            _, second = expand_value_preferences(expanded, "v1")
            assert not second.changed, f"seed {spec.seed}"

    # The worked two-value expansion, exactly as defined.
    db = parse("t a: v = 3. k b: v = 7.").database
    out, report = expand_value_conflicts(db)
    assert val([out[i] for i in out.member_ids()], "v") == frozenset({3.0, 7.0})
    added = [out[i] for i in report.added_requirements]
    constraints = sorted(
        (r for r in added if isinstance(r.body, SimpleQuant)),
        key=lambda r: r.body.cond.rhs.value,
    )
    conflicts = [r for r in added if isinstance(r.body, Conflict)]
    assert [c.body.cond.rhs.value for c in constraints] == [3.0, 7.0]
    assert all(c.sort.value == "q" for c in constraints)
    assert len(conflicts) == 1
    assert conflicts[0].modality is Modality.MANDATORY
    assert conflicts[0].body.antecedents == frozenset(c.id for c in constraints)
    assert len(added) == 3
    _report(5, "macro idempotence and preference direction on 200 databases")


def test_criterion_6_adaptation_round_trip():
    rng = random.Random(6)
    pairs = 0
    seed = 0
    while pairs < 1000:
        spec = ModelGenSpec(
            seed=seed,
            tasks=rng.randint(3, 6),
            assumptions=rng.randint(0, 2),
            goals=rng.randint(1, 3),
            conflict_density=rng.choice([0.2, 0.4]),
            optional_ratio=0.3,
        )
        seed += 1
        db = generate_database(spec)
        enum = enumerate_configurations(db)
        configs = list(enum.configurations)
        if len(configs) < 2:
            continue
        for _ in range(min(20, len(configs) * (len(configs) - 1))):
            a, b = rng.sample(configs, 2)
            operator = derive_adaptation(a, b)
            landed = apply_adaptation(enum.database, a, operator)
            assert landed.members == b.members, f"seed {spec.seed}"
            with pytest.raises(NotApplicableError):
                apply_adaptation(enum.database, b, operator)
            pairs += 1
            if pairs >= 1000:
                break
    _report(6, "1000 adaptation round trips, inapplicable operators rejected")


def _ranking_instance(seed: int, scale: float = 1.0):
    """A database whose configurations each pin `v` to one distinct task value."""
    rng = random.Random(seed)
    n = rng.randint(2, 5)
    values = [float(rng.randint(1, 30)) * scale for _ in range(n)]
    reqs = [Requirement("p1", SimpleProp(G, PropVar("p1")), Modality.MANDATORY)]
    for i, value in enumerate(values):
        task = f"a{i}"
        reqs.append(
            Requirement(task, SimpleQuant(T, Compare(Var(QuantVar("v")), "=", Const(value))))
        )
        reqs.append(Requirement(f"i{i}", Implication(frozenset({task}), "p1")))
    for i in range(n):
        for j in range(i + 1, n):
            reqs.append(
                Requirement(
                    f"c{i}_{j}",
                    Conflict(frozenset({f"a{i}", f"a{j}"})),
                    Modality.MANDATORY,
                )
            )
    return build_database(reqs)


def test_criterion_7_ranking_laws():
    rng = random.Random(7)
    for case in range(200):
        db = _ranking_instance(case)
        enum = enumerate_configurations(db, max_atoms=40)
        configs = list(enum.configurations)
        assert configs
        up = rank_configurations(enum.database, configs, MaximizeValue("v"))
        down = rank_configurations(enum.database, configs, MinimizeValue("v"))
        assert [r.value for r in down] == [r.value for r in reversed(up)]

        shuffled = configs[:]
        rng.shuffle(shuffled)
        again = rank_configurations(enum.database, shuffled, MaximizeValue("v"))
        assert [r.configuration.id for r in again] == [
            r.configuration.id for r in up
        ]

        scaled_db = _ranking_instance(case, scale=3.0)
        scaled_enum = enumerate_configurations(scaled_db, max_atoms=40)
        scaled = rank_configurations(
            scaled_enum.database, list(scaled_enum.configurations), MaximizeValue("v")
        )

        def chosen_tasks(ranking):
            return [
                sorted(m for m in r.configuration.members if m.startswith("a"))
                for r in ranking
            ]

        assert chosen_tasks(scaled) == chosen_tasks(up)

        if case % 10 == 0:
            roadmaps = build_roadmaps(enum.database, configs, 2)
            rule = RoadmapValueSum(
                "v", floor=float(rng.randint(0, 20)), max_diff=rng.randint(0, 6)
            )
            ranking = rank_roadmaps(enum.database, roadmaps, rule)
            for item in ranking.excluded:
                seq = item.roadmap.configurations
                if item.reason == "floor":
                    members = seq[item.witness].members
                    value = min(val(sorted(members), "v", enum.database))
                    assert value < rule.floor
                else:
                    a, b = seq[item.witness], seq[item.witness + 1]
                    assert len(a.members ^ b.members) > rule.max_diff
            for item in ranking.ranked:
                seq = item.roadmap.configurations
                for c in seq:
                    assert min(val(sorted(c.members), "v", enum.database)) >= rule.floor
                for a, b in zip(seq, seq[1:]):
                    assert len(a.members ^ b.members) <= rule.max_diff
    _report(7, "ranking laws on 200 instances, R4 witnesses verified")


def test_criterion_8_round_trips_and_dot():
    from roadmapper.parser import load_file

    result = load_file(LAS_PATH)
    assert result.ok
    las = result.database
    assert parse(serialize(las)).database == las
    nodes, _ = parse_dot(render_dot(las))
    assert len(nodes) == len(las.requirements)

    for spec in _small_specs(500, quantities_every=3):
        db = generate_database(spec)
        again = parse(serialize(db))
        assert again.ok, f"seed {spec.seed}: {[str(d) for d in again.diagnostics]}"
        assert again.database == db, f"seed {spec.seed}"
        nodes, _ = parse_dot(render_dot(db))
        assert len(nodes) == len(db.requirements), f"seed {spec.seed}"
    _report(8, "round trips on LAS plus 500 generated models; DOT parses")
