"""Checking and enumerating requirements configurations.

A configuration is a set of domain-assumption and task requirements that is
consistent, operationalizes every mandatory goal/softgoal and every mandatory
quality constraint, includes all mandatory k/t requirements, is maximal with
respect to optional k/t requirements, and is minimal beyond that.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ResourceLimitError, UnresolvedReferenceError, WrongSortError
from .model import (
    Conflict,
    G,
    MEMBER_SORTS,
    Modality,
    Q,
    RequirementsDatabase,
    S,
)
from .operationalization import (
    DEFAULT_SEARCH_LIMIT,
    _minimal_sets,
    _minimal_supports,
    satisfaction_closure,
)

DEFAULT_MAX_ATOMS = 24


@dataclass(frozen=True)
class Configuration:
    """A candidate or validated member set, identified by a synthesized label."""

    id: str
    members: frozenset[str]

    @property
    def canonical_key(self) -> tuple[str, ...]:
        return tuple(sorted(self.members))

    @staticmethod
    def from_members(members: Iterable[str], label: str | None = None) -> "Configuration":
        members = frozenset(members)
        if label is None:
            label = "cfg-" + format(abs(hash(tuple(sorted(members)))) % 16 ** 8, "08x")
        return Configuration(label, members)


@dataclass(frozen=True)
class PropertyCheck:
    ok: bool
    witness: tuple[str, ...] = ()


@dataclass(frozen=True)
class PropertyReport:
    consistency: PropertyCheck
    qual_threshold: PropertyCheck
    quant_threshold: PropertyCheck
    conformity: PropertyCheck
    dominance: PropertyCheck
    minimality: PropertyCheck

    @property
    def is_configuration(self) -> bool:
        return all(
            check.ok
            for check in (
                self.consistency,
                self.qual_threshold,
                self.quant_threshold,
                self.conformity,
                self.dominance,
                self.minimality,
            )
        )

    def failing(self) -> list[str]:
        names = (
            "consistency",
            "qual_threshold",
            "quant_threshold",
            "conformity",
            "dominance",
            "minimality",
        )
        return [name for name in names if not getattr(self, name).ok]


@dataclass(frozen=True)
class EnumerationResult:
    """Configurations found, the database they refer to (value conflicts
    expanded), and whether the result list was truncated."""

    database: RequirementsDatabase
    configurations: tuple[Configuration, ...]
    truncated: bool = False

    def __iter__(self):
        return iter(self.configurations)

    def __len__(self) -> int:
        return len(self.configurations)


def _member_ids(db: RequirementsDatabase, s: Configuration | Iterable[str]) -> frozenset[str]:
    members = s.members if isinstance(s, Configuration) else frozenset(s)
    for req_id in sorted(members):
        if req_id not in db:
            raise UnresolvedReferenceError(f"configuration member {req_id!r} not in database")
        if db[req_id].sort not in MEMBER_SORTS:
            raise WrongSortError(
                f"configuration member {req_id!r} is {db[req_id].sort.value}-sorted; "
                "only domain assumptions and tasks may be members"
            )
    return members


def _threshold_targets(db: RequirementsDatabase) -> tuple[list[str], list[str]]:
    qual = db.mandatory_ids(G, S)
    quant = db.mandatory_ids(Q)
    return qual, quant


def _satisfies_1_to_4(
    db: RequirementsDatabase, members: frozenset[str], cache: dict
) -> bool:
    closure = satisfaction_closure(members, db, cache)
    if closure.bottom:
        return False
    qual, quant = _threshold_targets(db)
    if any(target not in closure.satisfied for target in qual):
        return False
    if any(target not in closure.satisfied for target in quant):
        return False
    return set(db.mandatory_ids(*MEMBER_SORTS)) <= members


def _dominant(db: RequirementsDatabase, members: frozenset[str], cache: dict) -> list[str]:
    """Optional k/t requirements that could still be added; empty means dominant."""
    addable = []
    for opt in db.optional_member_ids():
        if opt in members:
            continue
        if not satisfaction_closure(members | {opt}, db, cache).bottom:
            addable.append(opt)
    return addable


def _satisfies_1_to_5(
    db: RequirementsDatabase, members: frozenset[str], cache: dict
) -> bool:
    return _satisfies_1_to_4(db, members, cache) and not _dominant(db, members, cache)


def check_configuration(
    db: RequirementsDatabase,
    s: Configuration | Iterable[str],
    cache: dict | None = None,
) -> PropertyReport:
    """Evaluate the six configuration properties, with witnesses for failures."""
    members = _member_ids(db, s)
    cache = {} if cache is None else cache
    closure = satisfaction_closure(members, db, cache)
    consistency = PropertyCheck(not closure.bottom, tuple(sorted(closure.bottom_witness)))

    qual_targets, quant_targets = _threshold_targets(db)
    missing_qual = tuple(t for t in qual_targets if t not in closure.satisfied)
    missing_quant = tuple(t for t in quant_targets if t not in closure.satisfied)
    qual = PropertyCheck(not missing_qual, missing_qual)
    quant = PropertyCheck(not missing_quant, missing_quant)

    missing_mandatory = tuple(
        m for m in db.mandatory_ids(*MEMBER_SORTS) if m not in members
    )
    conformity = PropertyCheck(not missing_mandatory, missing_mandatory)

    base_ok = all(c.ok for c in (consistency, qual, quant, conformity))
    if base_ok:
        addable = _dominant(db, members, cache)
        dominance = PropertyCheck(not addable, tuple(addable))
    else:
        dominance = PropertyCheck(False, ("properties 1-4 not satisfied",))

    if base_ok and dominance.ok:
        mandatory = set(db.mandatory_ids(*MEMBER_SORTS))
        removable = tuple(
            req_id
            for req_id in sorted(members - mandatory)
            if _satisfies_1_to_5(db, members - {req_id}, cache)
        )
        minimality = PropertyCheck(not removable, removable)
    else:
        minimality = PropertyCheck(False, ("properties 1-5 not satisfied",))

    return PropertyReport(consistency, qual, quant, conformity, dominance, minimality)


def _maximal_optional_extensions(
    db: RequirementsDatabase,
    base: frozenset[str],
    optionals: Sequence[str],
    cache: dict,
    limit: int,
) -> list[frozenset[str]]:
    """All maximal consistent ways to add optional members to `base`."""
    results: list[frozenset[str]] = []
    explored = 0

    def walk(current: frozenset[str], remaining: tuple[str, ...]) -> None:
        nonlocal explored
        explored += 1
        if explored > limit:
            raise ResourceLimitError("optional-extension search exceeded its limit")
        if not remaining:
            results.append(current)
            return
        head, rest = remaining[0], remaining[1:]
        if head in current:
            walk(current, rest)
            return
        extended = current | {head}
        if not satisfaction_closure(extended, db, cache).bottom:
            walk(extended, rest)
            # Leaving `head` out can only be maximal if adding it later fails,
            # which the final maximality filter decides.
            walk(current, rest)
        else:
            walk(current, rest)

    walk(base, tuple(optionals))
    maximal = []
    for candidate in set(results):
        addable = [
            o
            for o in optionals
            if o not in candidate
            and not satisfaction_closure(candidate | {o}, db, cache).bottom
        ]
        if not addable:
            maximal.append(candidate)
    return sorted(set(maximal), key=lambda s: tuple(sorted(s)))


def _relevant_plains(
    db: RequirementsDatabase, search_limit: int
) -> tuple[list[frozenset[str]], list[str]]:
    """Minimal threshold coverages and the plain members worth adding to them.

    Beyond threshold support (captured by the coverages), a plain member can
    earn its place in a configuration only by blocking an optional addition
    through a conflict, so the extra candidate pool is limited to supports of
    antecedents of conflicts that some optional requirement could help fire.
    """
    from .operationalization import _SupportSearch

    mandatory = frozenset(db.mandatory_ids(*MEMBER_SORTS))
    qual_targets, quant_targets = _threshold_targets(db)

    coverages = [mandatory]
    for target in qual_targets + quant_targets:
        routes = (
            frozenset({"inferred"})
            if target in qual_targets
            else frozenset({"member", "inferred", "numeric"})
        )
        supports = _minimal_supports(target, db, routes, search_limit)
        if not supports:
            return [], []
        coverages = _minimal_sets(
            [base | support for base in coverages for support in supports]
        )
        if len(coverages) > search_limit:
            raise ResourceLimitError("threshold-support combination exceeded the limit")

    optional_ids = set(db.optional_member_ids())
    search = _SupportSearch(db, search_limit)
    pool: set[str] = set()
    for req in sorted(db, key=lambda r: r.id):
        if not isinstance(req.body, Conflict):
            continue
        antecedent_options = {}
        for ant in sorted(req.body.antecedents):
            options, _ = search.options(ant, frozenset())
            antecedent_options[ant] = [members for members, _route in options]
        optional_involved = req.modality is Modality.OPTIONAL or any(
            members & optional_ids
            for options in antecedent_options.values()
            for members in options
        )
        if not optional_involved:
            continue
        pool.add(req.id)
        for options in antecedent_options.values():
            for members in options:
                pool.update(members)
    plains = sorted(
        req_id for req_id in pool if db[req_id].modality is Modality.PLAIN
    )
    return coverages, plains


def enumerate_configurations(
    db: RequirementsDatabase,
    *,
    max_atoms: int = DEFAULT_MAX_ATOMS,
    max_results: int | None = None,
    search_limit: int = DEFAULT_SEARCH_LIMIT,
) -> EnumerationResult:
    """All configurations of `db`, in canonical order.

    The value-conflict expansion runs first so no configuration can assign two
    different values to one variable. Results are complete relative to the
    limits; hitting `max_results` sets the truncated flag.
    """
    atom_count = len(db.member_ids())
    if atom_count > max_atoms:
        raise ResourceLimitError(
            f"database has {atom_count} k/t requirements; limit is {max_atoms}"
        )
    from .transforms import expand_value_conflicts

    db, _ = expand_value_conflicts(db)
    cache: dict = {}
    coverages, plains = _relevant_plains(db, search_limit)
    if not coverages:
        return EnumerationResult(db, (), False)
    optionals = db.optional_member_ids()

    # Grow each minimal coverage with every useful subset of the remaining
    # plain candidates; inconsistent partial sets cannot recover, so they
    # prune their whole subtree.
    expanded: set[frozenset[str]] = set()
    explored = 0
    for base in coverages:
        if satisfaction_closure(base, db, cache).bottom:
            continue
        stack = [(base, tuple(p for p in plains if p not in base))]
        while stack:
            current, remaining = stack.pop()
            explored += 1
            if explored > search_limit:
                raise ResourceLimitError("configuration search exceeded its limit")
            if not remaining:
                expanded.add(current)
                continue
            head, rest = remaining[0], remaining[1:]
            stack.append((current, rest))
            grown = current | {head}
            if not satisfaction_closure(grown, db, cache).bottom:
                stack.append((grown, rest))

    candidates: set[frozenset[str]] = set()
    for base in sorted(expanded, key=lambda s: tuple(sorted(s))):
        for extended in _maximal_optional_extensions(
            db, base, optionals, cache, search_limit
        ):
            candidates.add(extended)

    configurations = []
    for members in sorted(candidates, key=lambda s: tuple(sorted(s))):
        if check_configuration(db, members, cache).is_configuration:
            configurations.append(members)

    truncated = max_results is not None and len(configurations) > max_results
    if truncated:
        configurations = configurations[:max_results]
    labeled = tuple(
        Configuration(f"S{i}", members)
        for i, members in enumerate(configurations, start=1)
    )
    return EnumerationResult(db, labeled, truncated)
