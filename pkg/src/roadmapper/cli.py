"""Command-line front end over `.req` files.

Commands: check, configs, rank, roadmaps, dot, relax, gen. JSON is the
machine interface (see schemas/output.schema.json); text is a human summary;
dot is visualization-only. Identical inputs and flags produce byte-identical
output.

Exit codes: 0 success, 1 model error, 2 I/O error, 3 resource limit,
4 semantic error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from .configuration import (
    DEFAULT_MAX_ATOMS,
    EnumerationResult,
    enumerate_configurations,
)
from .dot import render_dot
from .errors import (
    InvalidLevelError,
    MissingValueError,
    MultiVariableConditionError,
    NonSingletonValError,
    NoSatisfactionFnError,
    NotAComparisonError,
    ResourceLimitError,
    RoadmapperError,
    UnresolvedReferenceError,
    WrongSortError,
)
from .model import ExpDecay, Modality, Normal, PiecewiseLinear, PlateauThenDecay, Sort
from .operationalization import (
    qualitative_operationalizations,
    quantitative_operationalizations,
)
from .parser import ParseResult, load_file, serialize
from .roadmap import (
    MaximizeValue,
    MaximizeValueThenPreferences,
    MinimizeValue,
    RoadmapValueSum,
    build_roadmaps,
    rank_configurations,
    rank_roadmaps,
)
from .testkit import ModelGenSpec, generate_database
from .transforms import relax_fuzzy, relax_probabilistic

EXIT_OK = 0
EXIT_MODEL = 1
EXIT_IO = 2
EXIT_RESOURCE = 3
EXIT_SEMANTIC = 4

_SEMANTIC_ERRORS = (
    WrongSortError,
    MissingValueError,
    NonSingletonValError,
    NoSatisfactionFnError,
    NotAComparisonError,
    MultiVariableConditionError,
    InvalidLevelError,
    UnresolvedReferenceError,
)

ATOM_LIMIT_ENV = "ROADMAPPER_LIMIT_ATOMS"


@dataclass
class RunConfig:
    """One command per invocation, with its limits and output format."""

    command: str
    input_path: str | None = None
    output_format: str = "json"
    max_atoms: int = DEFAULT_MAX_ATOMS
    max_results: int | None = None
    seed: int = 0


def _default_max_atoms() -> int:
    value = os.environ.get(ATOM_LIMIT_ENV)
    if value:
        try:
            return int(value)
        except ValueError:
            pass
    return DEFAULT_MAX_ATOMS


def _emit(payload: dict, fmt: str, text_lines) -> None:
    if fmt == "json":
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        for line in text_lines:
            print(line)


def _diagnostics_payload(result: ParseResult) -> list[dict]:
    return [
        {
            "severity": d.severity.value,
            "file": d.span.file,
            "line": d.span.line,
            "column": d.span.column,
            "message": d.message,
        }
        for d in result.diagnostics
    ]


def _load(path: str) -> tuple[ParseResult | None, int]:
    try:
        return load_file(path), EXIT_OK
    except OSError as exc:
        print(f"error: cannot read {path}: {exc.strerror or exc}", file=sys.stderr)
        return None, EXIT_IO


def _report_payload(report) -> dict:
    return {
        "added": sorted(report.added_requirements),
        "removed": sorted(report.removed_requirements),
        "added_preferences": [
            {"kind": p.kind.value, "left": p.left, "right": p.right}
            for p in report.added_preferences
        ],
        "added_sat_fns": sorted(report.added_sat_fns),
        "iterations": report.iterations,
    }


def cmd_check(args) -> int:
    result, code = _load(args.file)
    if result is None:
        return code
    payload = {
        "command": "check",
        "file": args.file,
        "ok": result.ok,
        "diagnostics": _diagnostics_payload(result),
    }
    lines = [str(d) for d in result.diagnostics]
    if result.ok:
        db = result.database
        by_sort = {s.value: 0 for s in Sort}
        by_modality = {m.name.lower(): 0 for m in Modality}
        for req in db:
            by_sort[req.sort.value] += 1
            by_modality[req.modality.name.lower()] += 1
        payload["summary"] = {
            "requirements": len(db.requirements),
            "preferences": len(db.preferences),
            "sat_fns": len(db.sat_fns),
            "by_sort": by_sort,
            "by_modality": by_modality,
            "mandatory_goals": db.mandatory_ids(Sort.GOAL),
        }
        lines += [
            f"{args.file}: {len(db.requirements)} requirements, "
            f"{len(db.preferences)} preferences, {len(db.sat_fns)} satisfaction functions",
            "mandatory goals: " + (", ".join(db.mandatory_ids(Sort.GOAL)) or "(none)"),
        ]
    _emit(payload, args.format, lines)
    return EXIT_OK if result.ok else EXIT_MODEL


def _enumerate(args, db) -> EnumerationResult:
    return enumerate_configurations(
        db, max_atoms=args.max_atoms, max_results=args.max_results
    )


def _property_payload(report) -> dict:
    out = {}
    for name in (
        "consistency",
        "qual_threshold",
        "quant_threshold",
        "conformity",
        "dominance",
        "minimality",
    ):
        check = getattr(report, name)
        out[name] = {"ok": check.ok, "witness": list(check.witness)}
    return out


def cmd_configs(args) -> int:
    result, code = _load(args.file)
    if result is None:
        return code
    if not result.ok:
        _emit(
            {"command": "configs", "file": args.file, "ok": False,
             "diagnostics": _diagnostics_payload(result)},
            args.format,
            [str(d) for d in result.diagnostics],
        )
        return EXIT_MODEL
    from .configuration import check_configuration

    enum = _enumerate(args, result.database)
    db = enum.database
    entries = []
    lines = [f"{len(enum.configurations)} configuration(s)"]
    for config in enum.configurations:
        report = check_configuration(db, config)
        entry = {
            "id": config.id,
            "members": sorted(config.members),
            "properties": _property_payload(report),
        }
        if args.explain:
            explanations = {}
            for target in db.mandatory_ids(Sort.GOAL, Sort.SOFTGOAL):
                ops = qualitative_operationalizations(target, db)
                explanations[target] = [
                    sorted(op.support)
                    for op in ops
                    if op.support <= config.members
                ]
            for target in db.mandatory_ids(Sort.QUALITY_CONSTRAINT):
                ops = quantitative_operationalizations(target, db)
                explanations[target] = [
                    sorted(op.support)
                    for op in ops
                    if op.support <= config.members
                ]
            entry["explanations"] = explanations
        entries.append(entry)
        lines.append(f"  {config.id}: {', '.join(sorted(config.members))}")
    payload = {
        "command": "configs",
        "file": args.file,
        "count": len(entries),
        "truncated": enum.truncated,
        "configurations": entries,
    }
    _emit(payload, args.format, lines)
    return EXIT_OK


def cmd_rank(args) -> int:
    result, code = _load(args.file)
    if result is None:
        return code
    if not result.ok:
        for d in result.diagnostics:
            print(str(d), file=sys.stderr)
        return EXIT_MODEL
    rules = {
        "r1": MaximizeValue,
        "r2": MinimizeValue,
        "r3": MaximizeValueThenPreferences,
    }
    rule = rules[args.rule](args.var)
    enum = _enumerate(args, result.database)
    ranking = rank_configurations(enum.database, enum.configurations, rule)
    entries = []
    lines = [f"ranking under {args.rule} on {args.var!r}"]
    for position, item in enumerate(ranking, start=1):
        entry = {
            "position": position,
            "id": item.configuration.id,
            "members": sorted(item.configuration.members),
            "value": item.value,
        }
        if item.preference_count is not None:
            entry["preference_count"] = item.preference_count
            entry["pareto"] = item.pareto
        entries.append(entry)
        extra = (
            f", preferences={item.preference_count}, pareto={item.pareto}"
            if item.preference_count is not None
            else ""
        )
        lines.append(
            f"  {position}. {item.configuration.id} value={item.value!r}{extra}"
        )
    payload = {
        "command": "rank",
        "file": args.file,
        "rule": args.rule,
        "variable": args.var,
        "ranking": entries,
    }
    _emit(payload, args.format, lines)
    return EXIT_OK


def cmd_roadmaps(args) -> int:
    result, code = _load(args.file)
    if result is None:
        return code
    if not result.ok:
        for d in result.diagnostics:
            print(str(d), file=sys.stderr)
        return EXIT_MODEL
    enum = _enumerate(args, result.database)
    roadmaps = build_roadmaps(enum.database, enum.configurations, args.maxlen)
    rule = RoadmapValueSum(args.var, args.floor, args.maxdiff)
    ranking = rank_roadmaps(enum.database, roadmaps, rule)

    def _adaptations(roadmap):
        return [
            {
                "trigger": sorted(a.trigger),
                "add": sorted(a.add),
                "delete": sorted(a.delete),
            }
            for a in sorted(
                roadmap.adaptations, key=lambda a: (sorted(a.delete), sorted(a.add))
            )
        ]

    payload = {
        "command": "roadmaps",
        "file": args.file,
        "rule": {
            "name": "r4",
            "variable": args.var,
            "floor": args.floor,
            "max_diff": args.maxdiff,
            "max_len": args.maxlen,
        },
        "configurations": {
            c.id: sorted(c.members) for c in enum.configurations
        },
        "ranked": [
            {
                "sequence": [c.id for c in item.roadmap.configurations],
                "total": item.total,
                "adaptations": _adaptations(item.roadmap),
            }
            for item in ranking.ranked
        ],
        "excluded": [
            {
                "sequence": [c.id for c in item.roadmap.configurations],
                "reason": item.reason,
                "witness": item.witness,
            }
            for item in ranking.excluded
        ],
    }
    lines = [f"{len(ranking.ranked)} roadmap(s), {len(ranking.excluded)} excluded"]
    for item in ranking.ranked:
        lines.append(
            "  "
            + " -> ".join(c.id for c in item.roadmap.configurations)
            + f" (total={item.total!r})"
        )
    for item in ranking.excluded:
        lines.append(
            "  excluded "
            + " -> ".join(c.id for c in item.roadmap.configurations)
            + f" ({item.reason} at index {item.witness})"
        )
    _emit(payload, args.format, lines)
    return EXIT_OK


def cmd_dot(args) -> int:
    result, code = _load(args.file)
    if result is None:
        return code
    if not result.ok:
        for d in result.diagnostics:
            print(str(d), file=sys.stderr)
        return EXIT_MODEL
    sys.stdout.write(render_dot(result.database))
    return EXIT_OK


def _parse_satfn_spec(spec: str):
    kind, _, rest = spec.partition(":")
    if kind == "exp":
        return ExpDecay(float(rest))
    if kind == "plateau":
        end, zero, level = (float(x) for x in rest.split(","))
        return PlateauThenDecay(end, zero, level)
    if kind == "pwl":
        points = []
        for pair in rest.split(","):
            x, _, y = pair.partition(":")
            points.append((float(x), float(y)))
        return PiecewiseLinear(tuple(points))
    raise ValueError(f"unknown satisfaction function spec {spec!r}")


def cmd_relax(args) -> int:
    result, code = _load(args.file)
    if result is None:
        return code
    if not result.ok:
        for d in result.diagnostics:
            print(str(d), file=sys.stderr)
        return EXIT_MODEL
    db = result.database
    if args.prob:
        dist = Normal(args.mean, args.variance)
        db2, report = relax_probabilistic(
            db, args.target, dist, args.level, args.op
        )
        mode = "prob"
    else:
        db2, report = relax_fuzzy(db, args.target, _parse_satfn_spec(args.mu))
        mode = "fuzzy"
    text = serialize(db2)
    if args.format == "json":
        payload = {
            "command": "relax",
            "file": args.file,
            "mode": mode,
            "target": args.target,
            "report": _report_payload(report),
            "database": text,
        }
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        sys.stdout.write(text)
        print(
            f"relax {mode}: added={sorted(report.added_requirements)} "
            f"removed={sorted(report.removed_requirements)} "
            f"sat_fns={sorted(report.added_sat_fns)}",
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_gen(args) -> int:
    spec = ModelGenSpec(
        seed=args.seed,
        tasks=args.tasks,
        assumptions=args.assumptions,
        goals=args.goals,
        include_quantities=args.quantities,
    )
    sys.stdout.write(serialize(generate_database(spec)))
    return EXIT_OK


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roadmapper",
        description="Reason over mixed-variable requirements databases.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_file=True):
        if needs_file:
            p.add_argument("file", help="input .req file")
        p.add_argument(
            "--format", choices=("json", "text"), default="json", help="output format"
        )

    def limits(p):
        p.add_argument(
            "--max-atoms",
            type=int,
            default=_default_max_atoms(),
            help=f"k/t requirement cap for enumeration (default {DEFAULT_MAX_ATOMS}; "
            f"env {ATOM_LIMIT_ENV})",
        )
        p.add_argument(
            "--max-results", type=int, default=None, help="truncate configuration lists"
        )

    p = sub.add_parser("check", help="parse and validate a database")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("configs", help="enumerate configurations")
    common(p)
    limits(p)
    p.add_argument(
        "--explain",
        action="store_true",
        help="include operationalization witnesses per mandatory requirement",
    )
    p.set_defaults(func=cmd_configs)

    p = sub.add_parser("rank", help="rank configurations under r1/r2/r3")
    common(p)
    limits(p)
    p.add_argument("--rule", choices=("r1", "r2", "r3"), required=True)
    p.add_argument("--var", required=True, help="ranking variable")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("roadmaps", help="build and rank roadmaps under r4")
    common(p)
    limits(p)
    p.add_argument("--var", required=True, help="summed variable")
    p.add_argument("--floor", type=float, default=float("-inf"))
    p.add_argument("--maxdiff", type=int, default=10**6)
    p.add_argument("--maxlen", type=int, default=2)
    p.set_defaults(func=cmd_roadmaps)

    p = sub.add_parser("dot", help="render the requirement graph as DOT")
    p.add_argument("file", help="input .req file")
    p.set_defaults(func=cmd_dot)

    p = sub.add_parser("relax", help="probabilistic or fuzzy relaxation")
    common(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--prob", action="store_true")
    group.add_argument("--fuzzy", action="store_true")
    p.add_argument("--target", required=True, help="quality constraint id")
    p.add_argument("--mean", type=float, default=0.0, help="normal mean (prob)")
    p.add_argument("--variance", type=float, default=1.0, help="normal variance (prob)")
    p.add_argument("--level", type=float, default=0.9, help="probability level (prob)")
    p.add_argument(
        "--op", default=">=", choices=(">=", ">", "=", "<=", "<"), help="outer operator"
    )
    p.add_argument(
        "--mu",
        default="exp:1.0",
        help="satisfaction function (fuzzy): exp:RATE | plateau:END,ZERO,LEVEL | "
        "pwl:X:Y,X:Y,...",
    )
    p.set_defaults(func=cmd_relax)

    p = sub.add_parser("gen", help="generate a random model (test data)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tasks", type=int, default=5)
    p.add_argument("--assumptions", type=int, default=2)
    p.add_argument("--goals", type=int, default=3)
    p.add_argument("--quantities", action="store_true")
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except _SEMANTIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    except RoadmapperError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
