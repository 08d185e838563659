"""Forward-chaining consequence relation over requirement ids.

Derivation is purely symbolic: an id is derived when it is a premise, or when
it is the consequent of a premise implication whose antecedents are all
derived. A premise conflict whose antecedents are all derived flags the
contradiction; deriving the contradiction never licenses deriving anything
else (no ex falso), which keeps the relation paraconsistent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import UnresolvedReferenceError
from .model import Conflict, Implication, Requirement, RequirementsDatabase


@dataclass(frozen=True)
class Closure:
    """Least fixpoint of the membership and implication rules."""

    derived: frozenset[str]
    bottom: bool
    # One deterministic derivation per derived id: the implication ids used.
    support: Mapping[str, frozenset[str]] = field(default_factory=dict)
    bottom_witness: frozenset[str] = frozenset()

    def __contains__(self, req_id: str) -> bool:
        return req_id in self.derived


def _resolve_premises(
    pi: Iterable[Requirement | str], db: RequirementsDatabase | None
) -> dict[str, Requirement]:
    premises: dict[str, Requirement] = {}
    for item in pi:
        if isinstance(item, Requirement):
            premises[item.id] = item
        elif db is not None and item in db:
            premises[item] = db[item]
        else:
            raise UnresolvedReferenceError(f"cannot resolve premise id {item!r}")
    universe = set(premises)
    if db is not None:
        universe |= set(db.requirements)
    for req in premises.values():
        missing = req.references() - universe
        if missing:
            raise UnresolvedReferenceError(
                f"{req.id!r} references unresolved ids {sorted(missing)}"
            )
    return premises


def closure(
    pi: Iterable[Requirement | str], db: RequirementsDatabase | None = None
) -> Closure:
    """Everything derivable from the premise set `pi`.

    `db` supplies declarations for resolving ids that appear in `pi` (either
    as plain id strings or as references inside premises); only members of
    `pi` act as premises.
    """
    premises = _resolve_premises(pi, db)
    derived: set[str] = set(premises)
    support: dict[str, frozenset[str]] = {pid: frozenset() for pid in premises}
    implications = sorted(
        (r for r in premises.values() if isinstance(r.body, Implication)),
        key=lambda r: r.id,
    )
    conflicts = sorted(
        (r for r in premises.values() if isinstance(r.body, Conflict)),
        key=lambda r: r.id,
    )
    changed = True
    while changed:
        changed = False
        for imp in implications:
            body = imp.body
            if body.consequent in derived:
                continue
            if body.antecedents <= derived:
                derived.add(body.consequent)
                used = frozenset({imp.id}).union(
                    *(support.get(a, frozenset()) for a in body.antecedents)
                )
                support[body.consequent] = used
                changed = True
    fired = frozenset(
        c.id for c in conflicts if c.body.antecedents <= derived
    )
    return Closure(
        derived=frozenset(derived),
        bottom=bool(fired),
        support=support,
        bottom_witness=fired,
    )


def entails(
    pi: Iterable[Requirement | str],
    phi: Requirement | str,
    db: RequirementsDatabase | None = None,
) -> bool:
    """Whether `phi` is derivable from the premise set `pi`."""
    phi_id = phi.id if isinstance(phi, Requirement) else phi
    return phi_id in closure(pi, db).derived


def is_consistent(
    pi: Iterable[Requirement | str], db: RequirementsDatabase | None = None
) -> bool:
    """Whether `pi` fails to derive the contradiction."""
    return not closure(pi, db).bottom
