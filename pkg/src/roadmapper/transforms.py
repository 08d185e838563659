"""Database rewrites: value-conflict expansion, satisfaction-driven preference
expansion, probabilistic and fuzzy relaxation, and softgoal refinement.

Rewrites are functional: they take a database and return a new one together
with a report of what changed. Synthesized requirements get ids under the
reserved "@macro_" prefix so user ids never collide.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import (
    DanglingReferenceError,
    InvalidLevelError,
    MissingValueError,
    NonSingletonValError,
    NoSatisfactionFnError,
    NotAComparisonError,
    MultiVariableConditionError,
    UnresolvedReferenceError,
    WrongSortError,
)
from .model import (
    BinOp,
    Body,
    Compare,
    Conflict,
    Const,
    Distributed,
    DistributionSpec,
    G,
    Implication,
    K,
    MEMBER_SORTS,
    Modality,
    PlateauThenDecay,
    Preference,
    PreferenceKind,
    ProbCompare,
    Q,
    QuantVar,
    Requirement,
    RequirementsDatabase,
    SatisfactionFn,
    SimpleQuant,
    Softgoal,
    Var,
    build_database,
    condition_variables,
)
from .quanteval import nearly_equal, sat_value, val

MACRO_PREFIX = "@macro_"

_PROB_OUTER = (">=", ">", "=", "<=", "<")
_RELAXABLE_OPS = ("<=", "<", ">=", ">")


@dataclass(frozen=True)
class RewriteReport:
    """What a rewrite added and removed, and how many passes it took."""

    added_requirements: tuple[str, ...] = ()
    removed_requirements: tuple[str, ...] = ()
    added_preferences: tuple[Preference, ...] = ()
    added_sat_fns: tuple[str, ...] = ()
    iterations: int = 1

    def __post_init__(self):
        overlap = set(self.added_requirements) & set(self.removed_requirements)
        if overlap:
            raise ValueError(f"ids both added and removed: {sorted(overlap)}")
        if self.iterations < 1:
            raise ValueError("a rewrite performs at least one pass")

    @property
    def changed(self) -> bool:
        return bool(
            self.added_requirements
            or self.removed_requirements
            or self.added_preferences
            or self.added_sat_fns
        )


def _value_id_part(x: float) -> str:
    """Injective, identifier-safe rendering of a float."""
    text = repr(float(x))
    if text.endswith(".0"):
        text = text[:-2]
    return (
        text.replace(".", "_").replace("-", "n").replace("+", "p").replace("e", "E")
    )


def _find_by_body(
    db: RequirementsDatabase, body: Body, modality: Modality | None = None
) -> str | None:
    for req in sorted(db, key=lambda r: r.id):
        if req.body == body and (modality is None or req.modality is modality):
            return req.id
    return None


def _fresh_id(db: RequirementsDatabase, base: str, taken: set[str]) -> str:
    candidate = base
    n = 1
    while candidate in db or candidate in taken:
        n += 1
        candidate = f"{base}_{n}"
    return candidate


def _value_constraint(var: str, x: float, sort) -> Body:
    return SimpleQuant(sort, Compare(Var(QuantVar(var)), "=", Const(float(x))))


def _rebuild(
    db: RequirementsDatabase,
    *,
    add: Iterable[Requirement] = (),
    remove: Iterable[str] = (),
    add_preferences: Iterable[Preference] = (),
    sat_fns: dict | None = None,
) -> RequirementsDatabase:
    removed = set(remove)
    reqs = [r for r in sorted(db, key=lambda r: r.id) if r.id not in removed]
    reqs.extend(add)
    return build_database(
        reqs,
        set(db.preferences) | set(add_preferences),
        sat_fns if sat_fns is not None else dict(db.sat_fns),
    )


def _member_requirements(db: RequirementsDatabase) -> list[Requirement]:
    return db.of_sort(*MEMBER_SORTS)


def expand_value_conflicts(
    db: RequirementsDatabase,
) -> tuple[RequirementsDatabase, RewriteReport]:
    """Add pairwise mandatory conflicts between competing value assignments.

    For every variable that obtains two or more values, every value gets a
    quality constraint pinning it, and every unordered value pair gets a
    mandatory conflict, so no configuration can assign both. Idempotent.
    """
    added: list[str] = []
    iterations = 0
    while True:
        iterations += 1
        new_reqs: list[Requirement] = []
        taken: set[str] = set()
        variables = sorted(
            {
                cond.lhs.var.name
                for req in _member_requirements(db)
                if isinstance(req.body, SimpleQuant)
                for cond in (req.body.cond,)
                if isinstance(cond, Compare) and cond.op == "=" and isinstance(cond.lhs, Var)
            }
        )
        for var in variables:
            values = sorted(val(_member_requirements(db), var))
            if len(values) < 2:
                continue
            constraint_ids = {}
            for x in values:
                body = _value_constraint(var, x, Q)
                existing = _find_by_body(db, body)
                if existing is None:
                    new_id = _fresh_id(db, f"{MACRO_PREFIX}q_{var}_{_value_id_part(x)}", taken)
                    taken.add(new_id)
                    new_reqs.append(Requirement(new_id, body))
                    constraint_ids[x] = new_id
                else:
                    constraint_ids[x] = existing
            for i, x1 in enumerate(values):
                for x2 in values[i + 1 :]:
                    pair = frozenset({constraint_ids[x1], constraint_ids[x2]})
                    body = Conflict(pair)
                    if _find_by_body(db, body, Modality.MANDATORY) is None:
                        new_id = _fresh_id(
                            db,
                            f"{MACRO_PREFIX}confl_{var}_"
                            f"{_value_id_part(x1)}_{_value_id_part(x2)}",
                            taken,
                        )
                        taken.add(new_id)
                        new_reqs.append(Requirement(new_id, body, Modality.MANDATORY))
        if not new_reqs:
            break
        db = _rebuild(db, add=new_reqs)
        added.extend(r.id for r in new_reqs)
    return db, RewriteReport(
        added_requirements=tuple(sorted(added)), iterations=iterations
    )


def expand_value_preferences(
    db: RequirementsDatabase, var: str | QuantVar
) -> tuple[RequirementsDatabase, RewriteReport]:
    """Add assumptions and preferences reflecting the satisfaction ordering of
    the values a variable obtains.

    Equally satisfying values become indifferent assumptions; unequally
    satisfying values get a conflict plus a strict preference for the more
    satisfying assignment. Idempotent.
    """
    name = var.name if isinstance(var, QuantVar) else var
    fn = db.sat_fn(name)
    if fn is None:
        raise NoSatisfactionFnError(f"no satisfaction function registered for {name!r}")
    added_reqs: list[str] = []
    added_prefs: list[Preference] = []
    iterations = 0
    while True:
        iterations += 1
        new_reqs: list[Requirement] = []
        new_prefs: list[Preference] = []
        taken: set[str] = set()
        assumption_ids: dict[float, str] = {}

        def assumption(x: float) -> str:
            if x in assumption_ids:
                return assumption_ids[x]
            body = _value_constraint(name, x, K)
            existing = _find_by_body(db, body)
            if existing is None:
                new_id = _fresh_id(db, f"{MACRO_PREFIX}k_{name}_{_value_id_part(x)}", taken)
                taken.add(new_id)
                new_reqs.append(Requirement(new_id, body))
                assumption_ids[x] = new_id
            else:
                assumption_ids[x] = existing
            return assumption_ids[x]

        values = sorted(val(_member_requirements(db), name))
        for i, x1 in enumerate(values):
            for x2 in values[i + 1 :]:
                mu1, mu2 = sat_value(fn, x1), sat_value(fn, x2)
                if nearly_equal(mu1, mu2):
                    left, right = assumption(x1), assumption(x2)
                    pref = Preference(PreferenceKind.INDIFFERENT, left, right)
                    if pref not in db.preferences:
                        new_prefs.append(pref)
                else:
                    hi, lo = (x1, x2) if mu1 > mu2 else (x2, x1)
                    left, right = assumption(hi), assumption(lo)
                    conflict = Conflict(frozenset({left, right}))
                    if _find_by_body(db, conflict) is None:
                        new_id = _fresh_id(
                            db,
                            f"{MACRO_PREFIX}kconfl_{name}_"
                            f"{_value_id_part(min(x1, x2))}_{_value_id_part(max(x1, x2))}",
                            taken,
                        )
                        taken.add(new_id)
                        new_reqs.append(Requirement(new_id, conflict))
                    pref = Preference(PreferenceKind.STRICT, left, right)
                    if pref not in db.preferences:
                        new_prefs.append(pref)
        if not new_reqs and not new_prefs:
            break
        db = _rebuild(db, add=new_reqs, add_preferences=new_prefs)
        added_reqs.extend(r.id for r in new_reqs)
        added_prefs.extend(new_prefs)
    return db, RewriteReport(
        added_requirements=tuple(sorted(added_reqs)),
        added_preferences=tuple(added_prefs),
        iterations=iterations,
    )


def _rewrite_references(
    db: RequirementsDatabase, old: str, new: str
) -> tuple[list[Requirement], set[Preference], set[Preference]]:
    """Requirements and preferences updated to mention `new` instead of `old`."""

    def sub(ref: str) -> str:
        return new if ref == old else ref

    updated: list[Requirement] = []
    for req in sorted(db, key=lambda r: r.id):
        if old not in req.references():
            continue
        if isinstance(req.body, Implication):
            body: Body = Implication(
                frozenset(sub(a) for a in req.body.antecedents), sub(req.body.consequent)
            )
        else:
            body = Conflict(frozenset(sub(a) for a in req.body.antecedents))
        updated.append(Requirement(req.id, body, req.modality, req.description))
    dropped = {p for p in db.preferences if old in (p.left, p.right)}
    replaced = {
        Preference(p.kind, sub(p.left), sub(p.right)) for p in dropped
    }
    return updated, dropped, replaced


def relax_probabilistic(
    db: RequirementsDatabase,
    constraint: str,
    dist: DistributionSpec,
    level: float,
    outer_op: str = ">=",
) -> tuple[RequirementsDatabase, RewriteReport]:
    """Replace a hard bound with a probability bound under an assumed distribution.

    Adds the distribution assumption for the constrained variable, removes the
    constraint, and adds a probabilistic constraint with the same modality.
    References to the old constraint follow it to its replacement.
    """
    if constraint not in db:
        raise UnresolvedReferenceError(f"cannot resolve requirement id {constraint!r}")
    req = db[constraint]
    if not isinstance(req.body, SimpleQuant) or req.sort is not Q:
        raise WrongSortError(f"{constraint!r} is not a quality constraint")
    cond = req.body.cond
    if not isinstance(cond, Compare):
        raise NotAComparisonError(f"{constraint!r} does not carry a plain comparison")
    if not isinstance(cond.lhs, Var) or cond.op not in _RELAXABLE_OPS:
        raise NotAComparisonError(
            f"{constraint!r} must bound a single variable with an inequality"
        )
    if not 0.0 < level <= 1.0:
        raise InvalidLevelError(f"probability level must lie in (0, 1], got {level}")
    if outer_op not in _PROB_OUTER:
        raise ValueError(f"invalid outer operator {outer_op!r}")
    variable = cond.lhs.var
    taken: set[str] = set()
    new_reqs: list[Requirement] = []
    dist_body: Body = SimpleQuant(K, Distributed(variable, dist))
    dist_id = _find_by_body(db, dist_body)
    if dist_id is None:
        dist_id = _fresh_id(db, f"{MACRO_PREFIX}dist_{variable.name}", taken)
        taken.add(dist_id)
        new_reqs.append(Requirement(dist_id, dist_body))
    prob_body: Body = SimpleQuant(
        Q, ProbCompare(variable, cond.op, cond.rhs, outer_op, Const(float(level)))
    )
    prob_id = _fresh_id(db, f"{MACRO_PREFIX}prob_{constraint}", taken)
    new_reqs.append(Requirement(prob_id, prob_body, req.modality, req.description))
    updated, dropped_prefs, replaced_prefs = _rewrite_references(db, constraint, prob_id)
    reqs = [
        r
        for r in sorted(db, key=lambda r: r.id)
        if r.id != constraint and r.id not in {u.id for u in updated}
    ]
    reqs.extend(updated)
    reqs.extend(new_reqs)
    prefs = (set(db.preferences) - dropped_prefs) | replaced_prefs
    out = build_database(reqs, prefs, dict(db.sat_fns))
    return out, RewriteReport(
        added_requirements=tuple(sorted(r.id for r in new_reqs)),
        removed_requirements=(constraint,),
    )


def relax_fuzzy(
    db: RequirementsDatabase, constraint: str, fn: SatisfactionFn
) -> tuple[RequirementsDatabase, RewriteReport]:
    """Drop a single-variable quality constraint and register a satisfaction
    function over its variable; value preferences then follow the function."""
    if constraint not in db:
        raise UnresolvedReferenceError(f"cannot resolve requirement id {constraint!r}")
    req = db[constraint]
    if not isinstance(req.body, SimpleQuant) or req.sort is not Q:
        raise WrongSortError(f"{constraint!r} is not a quality constraint")
    variables = sorted(condition_variables(req.body.cond))
    if len(variables) != 1:
        raise MultiVariableConditionError(
            f"{constraint!r} constrains {len(variables)} variables; fuzzy relaxation needs one"
        )
    referencing = [r.id for r in db if constraint in r.references()]
    referencing += [
        f"preference {p.left} / {p.right}"
        for p in db.preferences
        if constraint in (p.left, p.right)
    ]
    if referencing:
        raise DanglingReferenceError(
            f"cannot remove {constraint!r}; still referenced by {sorted(referencing)}"
        )
    sat_fns = dict(db.sat_fns)
    sat_fns[variables[0]] = fn
    out = _rebuild(db, remove=[constraint], sat_fns=sat_fns)
    return out, RewriteReport(
        removed_requirements=(constraint,), added_sat_fns=(variables[0],)
    )


def relax_fuzzy_upper_bound(
    db: RequirementsDatabase,
    var: str | QuantVar,
    bound: float,
    zero_at: float | None = None,
    level: float = 1.0,
) -> tuple[RequirementsDatabase, RewriteReport]:
    """Install the fuzzy reading of "var below bound": full satisfaction up to
    the bound, then a linear drop to zero. The decay endpoint defaults to
    1.5x the bound (1.0 when the bound is zero)."""
    name = var.name if isinstance(var, QuantVar) else var
    if zero_at is None:
        zero_at = 1.5 * bound if bound > 0 else 1.0
    fn = PlateauThenDecay(float(bound), float(zero_at), float(level))
    sat_fns = dict(db.sat_fns)
    sat_fns[name] = fn
    out = db.replace(sat_fns=sat_fns)
    return out, RewriteReport(added_sat_fns=(name,))


def add_satisfaction_product(
    db: RequirementsDatabase,
    var1: str | QuantVar,
    var2: str | QuantVar,
    out_var: str | QuantVar,
) -> tuple[RequirementsDatabase, RewriteReport]:
    """Bind `out_var` to the product of the current satisfaction levels of two
    variables, through auxiliary assumptions for each factor."""
    names = [v.name if isinstance(v, QuantVar) else v for v in (var1, var2, out_var)]
    factors = []
    members = _member_requirements(db)
    for name in names[:2]:
        fn = db.sat_fn(name)
        if fn is None:
            raise NoSatisfactionFnError(f"no satisfaction function registered for {name!r}")
        values = val(members, name)
        if not values:
            raise MissingValueError(f"variable {name!r} obtains no value")
        if len(values) > 1:
            raise NonSingletonValError(
                f"variable {name!r} obtains several values: {sorted(values)}"
            )
        factors.append(sat_value(fn, next(iter(values))))
    taken: set[str] = set()
    new_reqs: list[Requirement] = []
    aux_ids = []
    for name, mu in zip(names[:2], factors):
        body = _value_constraint(f"{MACRO_PREFIX}mu_{name}", mu, K)
        existing = _find_by_body(db, body)
        if existing is None:
            new_id = _fresh_id(db, f"{MACRO_PREFIX}kmu_{name}", taken)
            taken.add(new_id)
            new_reqs.append(Requirement(new_id, body))
            aux_ids.append(new_id)
        else:
            aux_ids.append(existing)
    product = BinOp(
        "*",
        Var(QuantVar(f"{MACRO_PREFIX}mu_{names[0]}")),
        Var(QuantVar(f"{MACRO_PREFIX}mu_{names[1]}")),
    )
    body = SimpleQuant(K, Compare(Var(QuantVar(names[2])), "=", product))
    if _find_by_body(db, body) is None:
        new_id = _fresh_id(db, f"{MACRO_PREFIX}prod_{names[2]}", taken)
        new_reqs.append(Requirement(new_id, body))
    out = _rebuild(db, add=new_reqs)
    return out, RewriteReport(
        added_requirements=tuple(sorted(r.id for r in new_reqs))
    )


def refine_softgoal(
    db: RequirementsDatabase, softgoal: str, refining: str
) -> tuple[RequirementsDatabase, RewriteReport]:
    """Declare that satisfying `refining` counts as satisfying the softgoal,
    making the softgoal operationalizable through that requirement."""
    for req_id in (softgoal, refining):
        if req_id not in db:
            raise UnresolvedReferenceError(f"cannot resolve requirement id {req_id!r}")
    if not isinstance(db[softgoal].body, Softgoal):
        raise WrongSortError(f"{softgoal!r} is not a softgoal")
    if db[refining].sort not in (Q, G):
        raise WrongSortError(
            f"{refining!r} must be a quality constraint or goal, "
            f"got sort {db[refining].sort.value!r}"
        )
    body: Body = Implication(frozenset({refining}), softgoal)
    if _find_by_body(db, body) is not None:
        return db, RewriteReport(iterations=1)
    new_id = _fresh_id(db, f"{MACRO_PREFIX}ref_{refining}__{softgoal}", set())
    out = _rebuild(db, add=[Requirement(new_id, body)])
    return out, RewriteReport(added_requirements=(new_id,))
