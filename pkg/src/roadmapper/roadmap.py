"""Adaptation operators, roadmaps, and decision rules for ranking.

An adaptation operator is a planning-style triple: a trigger (requirements
monitored to fail), an add list, and a delete list. A roadmap is a sequence
of configurations plus the operators connecting consecutive pairs. Rankings
are total, deterministic, and independent of input order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .configuration import Configuration, check_configuration
from .errors import (
    IdenticalConfigurationsError,
    MissingValueError,
    NonSingletonValError,
    NoSatisfactionFnError,
    NotApplicableError,
    RamificationFailureError,
    ResourceLimitError,
    TriggerNotInSourceError,
)
from .model import (
    Compare,
    Const,
    K,
    Modality,
    Preference,
    PreferenceKind,
    QuantVar,
    Requirement,
    RequirementsDatabase,
    SimpleQuant,
    Var,
)
from .operationalization import satisfaction_closure
from .quanteval import nearly_equal, sat_value, val

DEFAULT_ROADMAP_LIMIT = 20000


@dataclass(frozen=True)
class AdaptationRequirement:
    """Trigger / add / delete operator connecting two configurations."""

    trigger: frozenset[str]
    add: frozenset[str]
    delete: frozenset[str]

    def __post_init__(self):
        if not self.trigger:
            raise ValueError("adaptation trigger must be nonempty")
        if self.add & self.delete:
            raise ValueError("add and delete lists must be disjoint")
        if not self.add and not self.delete:
            raise IdenticalConfigurationsError("operator has no effect")

    def applicable_to(self, members: frozenset[str]) -> bool:
        return (self.trigger | self.delete) <= members and not (self.add & members)


@dataclass(frozen=True)
class Roadmap:
    configurations: tuple[Configuration, ...]
    adaptations: frozenset[AdaptationRequirement]

    def __post_init__(self):
        if not self.configurations:
            raise ValueError("a roadmap holds at least one configuration")

    @property
    def canonical_key(self) -> tuple[tuple[str, ...], ...]:
        return tuple(c.canonical_key for c in self.configurations)


# --- decision rules ---------------------------------------------------------

@dataclass(frozen=True)
class MaximizeValue:
    """Rank configurations by the value of a variable, highest first."""

    var: str


@dataclass(frozen=True)
class MinimizeValue:
    """Rank configurations by the value of a variable, lowest first."""

    var: str


@dataclass(frozen=True)
class MaximizeValueThenPreferences:
    """Highest value first; ties broken by how many optional and preferred
    requirements the configuration satisfies."""

    var: str


@dataclass(frozen=True)
class RoadmapValueSum:
    """Rank roadmaps by the summed value of a variable, subject to a floor on
    every configuration and a bound on consecutive change size."""

    var: str
    floor: float
    max_diff: int

    def __post_init__(self):
        if self.max_diff < 0:
            raise ValueError("max_diff must be nonnegative")


ConfigurationRule = MaximizeValue | MinimizeValue | MaximizeValueThenPreferences


@dataclass(frozen=True)
class RankedConfiguration:
    configuration: Configuration
    value: float
    preference_count: int | None = None
    pareto: bool | None = None


@dataclass(frozen=True)
class RankedRoadmap:
    roadmap: Roadmap
    total: float


@dataclass(frozen=True)
class ExcludedRoadmap:
    roadmap: Roadmap
    reason: str  # "floor" or "diff"
    witness: int  # configuration index (floor) or leading pair index (diff)


@dataclass(frozen=True)
class RoadmapRanking:
    ranked: tuple[RankedRoadmap, ...]
    excluded: tuple[ExcludedRoadmap, ...]


# --- adaptation -------------------------------------------------------------

def derive_adaptation(
    s_from: Configuration,
    s_to: Configuration,
    trigger: Iterable[str] | None = None,
) -> AdaptationRequirement:
    """The operator turning `s_from` into `s_to`.

    The trigger defaults to the deleted members: the requirements whose
    failure motivates leaving `s_from`. Callers may narrow it.
    """
    if s_from.members == s_to.members:
        raise IdenticalConfigurationsError(
            "source and target configurations are identical"
        )
    add = s_to.members - s_from.members
    delete = s_from.members - s_to.members
    trigger_set = frozenset(trigger) if trigger is not None else delete
    if not trigger_set <= s_from.members:
        raise TriggerNotInSourceError(
            f"trigger {sorted(trigger_set - s_from.members)} not in the source configuration"
        )
    return AdaptationRequirement(trigger=trigger_set, add=add, delete=delete)


def apply_adaptation(
    db: RequirementsDatabase,
    s: Configuration,
    operator: AdaptationRequirement,
) -> Configuration:
    """Apply the operator and re-validate the result.

    Additional changes may be needed after an adaptation; the engine never
    repairs silently, it reports the failing properties instead.
    """
    if not operator.applicable_to(s.members):
        raise NotApplicableError("operator preconditions do not hold in the source")
    members = (s.members - operator.delete) | operator.add
    report = check_configuration(db, members)
    if not report.is_configuration:
        raise RamificationFailureError(
            f"result violates {', '.join(report.failing())}", report=report
        )
    return Configuration.from_members(members)


def build_roadmaps(
    db: RequirementsDatabase,
    configs: Sequence[Configuration],
    max_len: int,
    *,
    limit: int = DEFAULT_ROADMAP_LIMIT,
) -> list[Roadmap]:
    """All roadmaps over distinct configurations up to `max_len`, each with
    the operators connecting its consecutive pairs."""
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    ordered = sorted(configs, key=lambda c: c.canonical_key)
    roadmaps: list[Roadmap] = []
    for length in range(1, min(max_len, len(ordered)) + 1):
        for sequence in itertools.permutations(ordered, length):
            adaptations = frozenset(
                derive_adaptation(a, b) for a, b in zip(sequence, sequence[1:])
            )
            roadmaps.append(Roadmap(tuple(sequence), adaptations))
            if len(roadmaps) > limit:
                raise ResourceLimitError(
                    f"more than {limit} roadmaps; raise the limit or lower max_len"
                )
    return roadmaps


# --- ranking -----------------------------------------------------------------

def _unique_value(
    db: RequirementsDatabase, members: frozenset[str], var: str
) -> float:
    values = val(sorted(members), var, db)
    if not values:
        raise MissingValueError(f"variable {var!r} obtains no value in a configuration")
    if len(values) > 1:
        raise NonSingletonValError(
            f"variable {var!r} obtains several values {sorted(values)}; "
            "expand value conflicts before ranking"
        )
    return next(iter(values))


def _preference_score(db: RequirementsDatabase, members: frozenset[str]) -> int:
    """Satisfied optional requirements plus satisfied preferred sides."""
    satisfied = satisfaction_closure(members, db).satisfied
    optional_hits = sum(
        1
        for req in sorted(db, key=lambda r: r.id)
        if req.modality is Modality.OPTIONAL and req.id in satisfied
    )
    preferred_hits = sum(
        1
        for pref in db.preferences
        if pref.kind in (PreferenceKind.STRICT, PreferenceKind.WEAK)
        and pref.left in satisfied
    )
    return optional_hits + preferred_hits


def rank_configurations(
    db: RequirementsDatabase,
    configs: Sequence[Configuration],
    rule: ConfigurationRule,
) -> tuple[RankedConfiguration, ...]:
    """Total order over the configurations under the given rule.

    Ties always break on the canonical member listing, so the ranking is
    deterministic and invariant under permutation of the input.
    """
    entries = []
    for config in configs:
        value = _unique_value(db, config.members, rule.var)
        count = (
            _preference_score(db, config.members)
            if isinstance(rule, MaximizeValueThenPreferences)
            else None
        )
        entries.append((config, value, count))

    if isinstance(rule, MinimizeValue):
        keyed = sorted(entries, key=lambda e: (e[1], e[0].canonical_key))
        return tuple(RankedConfiguration(c, v) for c, v, _ in keyed)
    if isinstance(rule, MaximizeValue):
        keyed = sorted(entries, key=lambda e: (-e[1], e[0].canonical_key))
        return tuple(RankedConfiguration(c, v) for c, v, _ in keyed)

    keyed = sorted(entries, key=lambda e: (-e[1], -e[2], e[0].canonical_key))
    pareto_flags = {}
    for config, value, count in keyed:
        dominated = any(
            ov >= value and oc >= count and (ov > value or oc > count)
            for _, ov, oc in keyed
        )
        pareto_flags[config.id] = not dominated
    return tuple(
        RankedConfiguration(c, v, n, pareto_flags[c.id]) for c, v, n in keyed
    )


def rank_roadmaps(
    db: RequirementsDatabase,
    roadmaps: Sequence[Roadmap],
    rule: RoadmapValueSum,
) -> RoadmapRanking:
    """Filter roadmaps by the floor and change-size constraints, then rank the
    survivors by summed value; excluded roadmaps carry their reason."""
    ranked: list[RankedRoadmap] = []
    excluded: list[ExcludedRoadmap] = []
    value_cache: dict[frozenset[str], float] = {}

    def value_of(members: frozenset[str]) -> float:
        if members not in value_cache:
            value_cache[members] = _unique_value(db, members, rule.var)
        return value_cache[members]

    for roadmap in roadmaps:
        values = [value_of(c.members) for c in roadmap.configurations]
        floor_breach = next(
            (i for i, v in enumerate(values) if v < rule.floor), None
        )
        if floor_breach is not None:
            excluded.append(ExcludedRoadmap(roadmap, "floor", floor_breach))
            continue
        pairs = list(zip(roadmap.configurations, roadmap.configurations[1:]))
        diff_breach = next(
            (
                i
                for i, (a, b) in enumerate(pairs)
                if len(a.members ^ b.members) > rule.max_diff
            ),
            None,
        )
        if diff_breach is not None:
            excluded.append(ExcludedRoadmap(roadmap, "diff", diff_breach))
            continue
        ranked.append(RankedRoadmap(roadmap, sum(values)))
    ranked.sort(
        key=lambda r: (
            -r.total,
            len(r.roadmap.configurations),
            r.roadmap.canonical_key,
        )
    )
    excluded.sort(key=lambda e: e.roadmap.canonical_key)
    return RoadmapRanking(tuple(ranked), tuple(excluded))


# --- pairwise satisfaction comparison ------------------------------------------

@dataclass(frozen=True)
class PairwisePreference:
    """Assumptions pinning the two observed values, plus the preference
    between them implied by the satisfaction function."""

    left_assumption: Requirement
    right_assumption: Requirement
    preference: Preference


def pairwise_value_preference(
    db: RequirementsDatabase,
    s1: Configuration,
    s2: Configuration,
    var: str | QuantVar,
) -> PairwisePreference | None:
    """Compare two configurations on one fuzzily-relaxed variable.

    Returns the assumptions for the two observed values and a strict
    preference for the more satisfying one (indifference when the levels are
    equal), or None when both configurations assign the same value.
    """
    name = var.name if isinstance(var, QuantVar) else var
    fn = db.sat_fn(name)
    if fn is None:
        raise NoSatisfactionFnError(f"no satisfaction function registered for {name!r}")
    values = []
    for config in (s1, s2):
        obtained = val(sorted(config.members), name, db)
        if not obtained:
            raise MissingValueError(f"{name!r} obtains no value in {config.id}")
        if len(obtained) > 1:
            raise NonSingletonValError(
                f"{name!r} obtains several values in {config.id}; "
                "expand value conflicts first"
            )
        values.append(next(iter(obtained)))
    x1, x2 = values
    if x1 == x2:
        return None
    from .transforms import MACRO_PREFIX, _value_id_part

    def assumption(x: float) -> Requirement:
        body = SimpleQuant(K, Compare(Var(QuantVar(name)), "=", Const(float(x))))
        req_id = f"{MACRO_PREFIX}k_{name}_{_value_id_part(x)}"
        return Requirement(req_id, body)

    a1, a2 = assumption(x1), assumption(x2)
    mu1, mu2 = sat_value(fn, x1), sat_value(fn, x2)
    if nearly_equal(mu1, mu2):
        return PairwisePreference(
            a1, a2, Preference(PreferenceKind.INDIFFERENT, a1.id, a2.id)
        )
    if mu1 > mu2:
        return PairwisePreference(a1, a2, Preference(PreferenceKind.STRICT, a1.id, a2.id))
    return PairwisePreference(a2, a1, Preference(PreferenceKind.STRICT, a2.id, a1.id))
