"""Graphviz DOT rendering of a requirements database.

One node per requirement (relations included), shape-coded by sort and
border-coded by modality. Single-antecedent implications draw one solid edge
from antecedent to consequent; wider implications draw one solid edge per
antecedent. Binary conflicts draw one dashed, dot-tailed edge between their
antecedents; wider conflicts draw dashed edges from each antecedent to the
conflict's own node. Preferences draw labeled dashed edges. Output order is
deterministic.
"""

from __future__ import annotations

from .model import (
    Conflict,
    Implication,
    Modality,
    RequirementsDatabase,
    Softgoal,
    Sort,
)

_SHAPES = {
    Sort.DOMAIN_ASSUMPTION: "box",
    Sort.GOAL: "ellipse",
    Sort.QUALITY_CONSTRAINT: "hexagon",
    Sort.SOFTGOAL: "egg",
    Sort.TASK: "parallelogram",
}


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _node_attrs(req) -> list[str]:
    attrs = [f"shape={_SHAPES[req.sort]}"]
    label = req.id
    if isinstance(req.body, Softgoal):
        label = f"{req.id}\\n{req.body.content.text}"
    elif req.description:
        label = f"{req.id}\\n{req.description}"
    attrs.append(f"label={_quote(label)}")
    if req.modality is Modality.MANDATORY:
        attrs.append("peripheries=2")
    elif req.modality is Modality.OPTIONAL:
        attrs.append("style=dashed")
    if isinstance(req.body, (Implication, Conflict)):
        attrs.append("fontsize=9")
    return attrs


def render_dot(db: RequirementsDatabase, name: str = "requirements") -> str:
    """The database as a DOT digraph; node count equals requirement count."""
    lines = [f"digraph {_quote(name)} {{", "  rankdir=BT;"]
    for req_id in sorted(db.requirements):
        req = db[req_id]
        lines.append(f"  {_quote(req_id)} [{', '.join(_node_attrs(req))}];")
    for req_id in sorted(db.requirements):
        req = db[req_id]
        if isinstance(req.body, Implication):
            for ant in sorted(req.body.antecedents):
                lines.append(
                    f"  {_quote(ant)} -> {_quote(req.body.consequent)} "
                    f"[label={_quote(req_id)}];"
                )
        elif isinstance(req.body, Conflict):
            ants = sorted(req.body.antecedents)
            if len(ants) == 2:
                lines.append(
                    f"  {_quote(ants[0])} -> {_quote(ants[1])} "
                    f"[style=dashed, arrowhead=dot, arrowtail=dot, dir=both, "
                    f"label={_quote(req_id)}];"
                )
            else:
                for ant in ants:
                    lines.append(
                        f"  {_quote(ant)} -> {_quote(req_id)} "
                        f"[style=dashed, arrowhead=dot];"
                    )
    for pref in sorted(db.preferences, key=lambda p: (p.kind.value, p.left, p.right)):
        lines.append(
            f"  {_quote(pref.left)} -> {_quote(pref.right)} "
            f"[style=dashed, label={_quote(pref.kind.value)}, constraint=false];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
