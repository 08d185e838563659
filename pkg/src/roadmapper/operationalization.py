"""Operationalization: which member sets satisfy which requirements.

The satisfaction closure extends symbolic derivation with numeric discharge:
a quantitative requirement counts as satisfied by a member set when the
values that set assigns to the condition's variables (directly, through
acyclic refinement equations, or through derived assignments) make the
condition true, using declared distributions for probability bounds.
Implications and conflicts fire only when they are members themselves.

Minimal supports are enumerated recursively over the three satisfaction
routes (membership, implication, numeric discharge), then verified and
minimalized against the closure. Every support includes the full mandatory
k/t set; minimality is judged modulo that set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping

from .errors import (
    RefinementCycleError,
    ResourceLimitError,
    RoadmapperError,
    UnresolvedReferenceError,
    ValOverflowError,
    WrongSortError,
)
from .model import (
    Compare,
    Conflict,
    Distributed,
    DistributionSpec,
    G,
    Implication,
    MEMBER_SORTS,
    ProbCompare,
    Q,
    Requirement,
    RequirementsDatabase,
    S,
    SimpleQuant,
    T,
    Var,
    free_variables,
)
from .quanteval import (
    MAX_VALUES_PER_VARIABLE,
    _eval,
    compare,
    probability,
    propagate_values,
)

DEFAULT_SEARCH_LIMIT = 2 ** 20
_COMBO_LIMIT = 4096

Route = Literal["member", "inferred", "numeric"]


@dataclass(frozen=True)
class SatisfactionClosure:
    """Everything a member set satisfies, with values and distributions."""

    members: frozenset[str]
    satisfied: frozenset[str]
    bottom: bool
    values: Mapping[str, frozenset[float]] = field(default_factory=dict)
    distributions: Mapping[str, tuple[DistributionSpec, ...]] = field(default_factory=dict)
    origin: Mapping[str, Route] = field(default_factory=dict)
    bottom_witness: frozenset[str] = frozenset()

    def __contains__(self, req_id: str) -> bool:
        return req_id in self.satisfied


def _resolve_ids(members: Iterable[Requirement | str], db: RequirementsDatabase) -> frozenset[str]:
    ids = set()
    for item in members:
        req_id = item.id if isinstance(item, Requirement) else item
        if req_id not in db:
            raise UnresolvedReferenceError(f"cannot resolve requirement id {req_id!r}")
        ids.add(req_id)
    return frozenset(ids)


def satisfaction_closure(
    members: Iterable[Requirement | str],
    db: RequirementsDatabase,
    cache: dict | None = None,
) -> SatisfactionClosure:
    """Fixpoint of membership, implication firing, and numeric discharge."""
    ids = _resolve_ids(members, db)
    if cache is not None and ids in cache:
        return cache[ids]
    origin: dict[str, Route] = {req_id: "member" for req_id in sorted(ids)}
    member_implications = sorted(
        (r for r in (db[i] for i in ids) if isinstance(r.body, Implication)),
        key=lambda r: r.id,
    )
    member_conflicts = sorted(
        (r for r in (db[i] for i in ids) if isinstance(r.body, Conflict)),
        key=lambda r: r.id,
    )
    # Tasks state what execution brings about, so a task is satisfied only by
    # membership or inference; beliefs (k) and desires (q) follow from values.
    quantitative = [
        r
        for r in sorted(db, key=lambda r: r.id)
        if isinstance(r.body, SimpleQuant)
        and r.sort is not T
        and not isinstance(r.body.cond, Distributed)
    ]
    values: dict[str, frozenset[float]] = {}
    dists: dict[str, tuple[DistributionSpec, ...]] = {}
    changed = True
    while changed:
        changed = False
        satisfied_reqs = [db[i] for i in sorted(origin)]
        values = propagate_values(satisfied_reqs)
        dists = _distribution_env(satisfied_reqs)
        for imp in member_implications:
            body = imp.body
            if body.consequent not in origin and body.antecedents <= origin.keys():
                origin[body.consequent] = "inferred"
                changed = True
        for req in quantitative:
            if req.id in origin:
                continue
            if _condition_possible(req.body.cond, values, dists):
                origin[req.id] = "numeric"
                changed = True
    fired = frozenset(
        c.id for c in member_conflicts if c.body.antecedents <= origin.keys()
    )
    result = SatisfactionClosure(
        members=ids,
        satisfied=frozenset(origin),
        bottom=bool(fired),
        values=values,
        distributions=dists,
        origin=origin,
        bottom_witness=fired,
    )
    if cache is not None:
        cache[ids] = result
    return result


def _distribution_env(
    reqs: Iterable[Requirement],
) -> dict[str, tuple[DistributionSpec, ...]]:
    by_var: dict[str, list[DistributionSpec]] = {}
    for req in reqs:
        if isinstance(req.body, SimpleQuant) and isinstance(req.body.cond, Distributed):
            bucket = by_var.setdefault(req.body.cond.var.name, [])
            if req.body.cond.dist not in bucket:
                bucket.append(req.body.cond.dist)
    return {var: tuple(specs) for var, specs in by_var.items()}


def _env_combinations(
    variables: list[str], values: Mapping[str, frozenset[float]]
) -> Iterable[dict[str, float]]:
    pools = []
    for var in variables:
        pool = values.get(var)
        if not pool:
            return
        pools.append(sorted(pool))
    total = 1
    for pool in pools:
        total *= len(pool)
        if total > _COMBO_LIMIT:
            raise ValOverflowError("too many value combinations for one condition")
    for combo in itertools.product(*pools):
        yield dict(zip(variables, combo))


def _condition_possible(
    cond, values: Mapping[str, frozenset[float]], dists: Mapping
) -> bool:
    """Whether some combination of known values (and a declared distribution)
    makes the condition true. Evaluation failures rule the combination out."""
    if isinstance(cond, Compare):
        needed = sorted(free_variables(cond.lhs) | free_variables(cond.rhs))
        for env in _env_combinations(needed, values):
            try:
                if compare(_eval(cond.lhs, env), cond.op, _eval(cond.rhs, env)):
                    return True
            except RoadmapperError:
                continue
        return False
    if isinstance(cond, ProbCompare):
        governed = cond.var.name
        needed = sorted(
            (free_variables(cond.bound) | free_variables(cond.level)) - {governed}
        )
        if governed in free_variables(cond.bound) | free_variables(cond.level):
            return False
        for dist in dists.get(governed, ()):
            for env in _env_combinations(needed, values):
                try:
                    p = probability(dist, cond.inner_op, _eval(cond.bound, env))
                    if compare(p, cond.outer_op, _eval(cond.level, env)):
                        return True
                except RoadmapperError:
                    continue
        return False
    return False  # Distributed conditions satisfy only by membership or inference


def is_admissible(
    phi_set: Iterable[Requirement | str], db: RequirementsDatabase
) -> bool:
    """Whether the set is consistent and contains the mandatory k/t requirements.

    Mandatory goals, quality constraints, and softgoals are obligations a set
    must operationalize, not members it could contain, so inclusion is checked
    against the mandatory k/t subset only.
    """
    ids = _resolve_ids(phi_set, db)
    if not set(db.mandatory_ids(*MEMBER_SORTS)) <= ids:
        return False
    return not satisfaction_closure(ids, db).bottom


# --- minimal-support search ---------------------------------------------------


@dataclass(frozen=True)
class Operationalization:
    """A minimal member set sufficient for the target requirement."""

    target: str
    support: frozenset[str]
    kind: Literal["qualitative", "quantitative"]


def _minimal_sets(sets: Iterable[frozenset]) -> list[frozenset]:
    """Distinct sets with strict supersets removed, in canonical order."""
    unique = sorted(set(sets), key=lambda s: (len(s), tuple(sorted(s))))
    kept: list[frozenset] = []
    for candidate in unique:
        if not any(prev < candidate for prev in kept):
            kept.append(candidate)
    return kept


class _SupportSearch:
    """Recursive enumeration of minimal satisfaction options per requirement.

    Recursion follows well-founded derivations only: a requirement or variable
    already on the path contributes nothing to its own support. Results
    computed without hitting such a guard are memoized.
    """

    def __init__(self, db: RequirementsDatabase, limit: int):
        self.db = db
        self.limit = limit
        self.explored = 0
        self.req_memo: dict[str, tuple[tuple[frozenset[str], Route], ...]] = {}
        self.unit_memo: dict[str, tuple[tuple[frozenset[str], float], ...]] = {}
        self.by_consequent: dict[str, list[Requirement]] = {}
        self.assignments_by_var: dict[str, list[Requirement]] = {}
        self.dists_by_var: dict[str, list[Requirement]] = {}
        for req in sorted(db, key=lambda r: r.id):
            if isinstance(req.body, Implication):
                self.by_consequent.setdefault(req.body.consequent, []).append(req)
            if isinstance(req.body, SimpleQuant) and req.sort in MEMBER_SORTS:
                cond = req.body.cond
                if isinstance(cond, Compare) and cond.op == "=" and isinstance(cond.lhs, Var):
                    self.assignments_by_var.setdefault(cond.lhs.var.name, []).append(req)
                elif isinstance(cond, Distributed):
                    self.dists_by_var.setdefault(cond.var.name, []).append(req)

    def tick(self, n: int = 1) -> None:
        self.explored += n
        if self.explored > self.limit:
            raise ResourceLimitError(
                f"support search explored more than {self.limit} candidates"
            )

    def options(
        self, req_id: str, stack: frozenset
    ) -> tuple[tuple[tuple[frozenset[str], Route], ...], bool]:
        """Minimal member sets satisfying `req_id`, tagged with their route."""
        if req_id in self.req_memo:
            return self.req_memo[req_id], False
        key = ("req", req_id)
        if key in stack:
            return (), True
        stack = stack | {key}
        req = self.db[req_id]
        tainted = False
        collected: list[tuple[frozenset[str], Route]] = []
        if req.sort in MEMBER_SORTS:
            collected.append((frozenset({req_id}), "member"))
        for imp in self.by_consequent.get(req_id, ()):
            combos: list[frozenset[str]] = [frozenset({imp.id})]
            for ant in sorted(imp.body.antecedents):
                ant_options, t = self.options(ant, stack)
                tainted = tainted or t
                sets = _minimal_sets([members for members, _ in ant_options])
                if not sets:
                    combos = []
                    break
                self.tick(len(combos) * len(sets))
                combos = _minimal_sets([c | s for c in combos for s in sets])
            collected.extend((c, "inferred") for c in combos)
        if (
            isinstance(req.body, SimpleQuant)
            and req.sort is not T
            and not isinstance(req.body.cond, Distributed)
        ):
            numeric, t = self._numeric_options(req.body.cond, stack)
            tainted = tainted or t
            collected.extend((members, "numeric") for members in numeric)
        result: list[tuple[frozenset[str], Route]] = []
        for route in ("member", "inferred", "numeric"):
            for members in _minimal_sets([m for m, r in collected if r == route]):
                result.append((members, route))
        out = tuple(result)
        if not tainted:
            self.req_memo[req_id] = out
        return out, tainted

    def _numeric_options(
        self, cond, stack: frozenset
    ) -> tuple[list[frozenset[str]], bool]:
        if isinstance(cond, Compare):
            needed = sorted(free_variables(cond.lhs) | free_variables(cond.rhs))
            combos, tainted = self._value_combos(needed, stack)
            found = []
            for members, env in combos:
                try:
                    if compare(_eval(cond.lhs, env), cond.op, _eval(cond.rhs, env)):
                        found.append(members)
                except RoadmapperError:
                    continue
            return _minimal_sets(found), tainted
        if isinstance(cond, ProbCompare):
            governed = cond.var.name
            open_vars = free_variables(cond.bound) | free_variables(cond.level)
            if governed in open_vars:
                return [], False
            needed = sorted(open_vars)
            combos, tainted = self._value_combos(needed, stack)
            found = []
            for dist_req in self.dists_by_var.get(governed, ()):
                dist_options, t = self.options(dist_req.id, stack)
                tainted = tainted or t
                dist = dist_req.body.cond.dist
                for dist_members, _ in dist_options:
                    for members, env in combos:
                        try:
                            p = probability(dist, cond.inner_op, _eval(cond.bound, env))
                            if compare(p, cond.outer_op, _eval(cond.level, env)):
                                found.append(dist_members | members)
                        except RoadmapperError:
                            continue
            return _minimal_sets(found), tainted
        return [], False

    def _value_combos(
        self, variables: list[str], stack: frozenset
    ) -> tuple[list[tuple[frozenset[str], dict[str, float]]], bool]:
        """All ways to give each variable one value, with the members used."""
        combos: list[tuple[frozenset[str], dict[str, float]]] = [(frozenset(), {})]
        tainted = False
        for var in variables:
            units, t = self.units(var, stack)
            tainted = tainted or t
            if not units:
                return [], tainted
            self.tick(len(combos) * len(units))
            combos = [
                (members | unit_members, {**env, var: value})
                for members, env in combos
                for unit_members, value in units
            ]
        return combos, tainted

    def units(
        self, var: str, stack: frozenset
    ) -> tuple[tuple[tuple[frozenset[str], float], ...], bool]:
        """Minimal member sets that give `var` a specific value."""
        if var in self.unit_memo:
            return self.unit_memo[var], False
        key = ("var", var)
        if key in stack:
            return (), True
        stack = stack | {key}
        tainted = False
        found: list[tuple[frozenset[str], float]] = []
        for req in self.assignments_by_var.get(var, ()):
            rhs = req.body.cond.rhs
            rhs_vars = sorted(free_variables(rhs))
            if var in rhs_vars:
                raise RefinementCycleError(
                    f"variable {var!r} is defined in terms of itself"
                )
            sat_options, t = self.options(req.id, stack)
            tainted = tainted or t
            if not sat_options:
                continue
            carriers = _minimal_sets([m for m, _ in sat_options])
            if not rhs_vars:
                try:
                    value = _eval(rhs, {})
                except RoadmapperError:
                    continue
                found.extend((c, value) for c in carriers)
                continue
            combos, t = self._value_combos(rhs_vars, stack)
            tainted = tainted or t
            for members, env in combos:
                try:
                    value = _eval(rhs, env)
                except RoadmapperError:
                    continue
                self.tick(len(carriers))
                found.extend((c | members, value) for c in carriers)
        result = self._dedupe_units(found)
        if not tainted:
            self.unit_memo[var] = result
        return result, tainted

    @staticmethod
    def _dedupe_units(
        units: list[tuple[frozenset[str], float]]
    ) -> tuple[tuple[frozenset[str], float], ...]:
        buckets: dict[float, list[frozenset[str]]] = {}
        for members, value in units:
            buckets.setdefault(value, []).append(members)
        if len(buckets) > MAX_VALUES_PER_VARIABLE:
            raise ValOverflowError("assigned-value cap exceeded during support search")
        out: list[tuple[frozenset[str], float]] = []
        for value in sorted(buckets):
            out.extend((members, value) for members in _minimal_sets(buckets[value]))
        return tuple(out)


def _minimal_supports(
    target_id: str,
    db: RequirementsDatabase,
    routes: frozenset[str],
    limit: int,
) -> list[frozenset[str]]:
    mandatory = frozenset(db.mandatory_ids(*MEMBER_SORTS))
    search = _SupportSearch(db, limit)
    options, _ = search.options(target_id, frozenset())
    parts = _minimal_sets(
        [members - mandatory for members, route in options if route in routes]
    )
    cache: dict = {}
    supports = []
    for part in parts:
        candidate = mandatory | part
        closure = satisfaction_closure(candidate, db, cache)
        if closure.bottom or target_id not in closure.satisfied:
            continue
        # Minimality modulo the mandatory set, judged by the closure itself.
        redundant = False
        for removed in sorted(part):
            smaller = satisfaction_closure(candidate - {removed}, db, cache)
            if not smaller.bottom and target_id in smaller.satisfied:
                redundant = True
                break
        if not redundant:
            supports.append(candidate)
    return sorted(supports, key=lambda s: tuple(sorted(s)))


def qualitative_operationalizations(
    target: Requirement | str,
    db: RequirementsDatabase,
    *,
    limit: int = DEFAULT_SEARCH_LIMIT,
) -> tuple[Operationalization, ...]:
    """All minimal member sets from which the goal, quality constraint, or
    softgoal is deducible through implications."""
    target_id = target.id if isinstance(target, Requirement) else target
    if target_id not in db:
        raise UnresolvedReferenceError(f"cannot resolve requirement id {target_id!r}")
    if db[target_id].sort not in (G, Q, S):
        raise WrongSortError(
            f"{target_id!r} is {db[target_id].sort.value}-sorted; expected g, q, or s"
        )
    supports = _minimal_supports(target_id, db, frozenset({"inferred"}), limit)
    return tuple(
        Operationalization(target_id, support, "qualitative") for support in supports
    )


def quantitative_operationalizations(
    target: Requirement | str,
    db: RequirementsDatabase,
    *,
    limit: int = DEFAULT_SEARCH_LIMIT,
) -> tuple[Operationalization, ...]:
    """All minimal member sets that make the quantitative condition true,
    whether by value assignments or by a declared operationalization edge."""
    target_id = target.id if isinstance(target, Requirement) else target
    if target_id not in db:
        raise UnresolvedReferenceError(f"cannot resolve requirement id {target_id!r}")
    if not isinstance(db[target_id].body, SimpleQuant):
        raise WrongSortError(f"{target_id!r} is not a quantitative requirement")
    supports = _minimal_supports(
        target_id, db, frozenset({"member", "inferred", "numeric"}), limit
    )
    return tuple(
        Operationalization(target_id, support, "quantitative") for support in supports
    )
