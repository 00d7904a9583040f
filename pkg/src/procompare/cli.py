"""Command-line surface: validate, compare, merge, serve.

Exit codes: 0 on success, 1 on a domain failure (invalid document,
unaccounted processes, ...), 2 on usage or IO problems.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import DomainError, ParseError, WeightsInvalid
from .model import model_from_data, structure_from_data, validate_model
from .reference import (
    Accept,
    Annotation,
    accounting,
    build_reference_model,
    decide,
    propose_plan,
    serialize_reference_model,
)
from .rules import Weights
from .session import (
    assumptions,
    create_session,
    establish_fact,
    export_heatmap,
    recompute,
    session_from_data,
)


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_json(path: str, what: str):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"{what} {path} is not valid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            details={"file": path},
        ) from None


def cmd_validate(args) -> int:
    model = structure_from_data(_load_json(args.path, "model document"))
    violations = validate_model(model)
    for violation in violations:
        print(f"{violation.rule} {violation.entity_id}: {violation.message}")
    return 1 if violations else 0


def _parse_weights(args) -> Weights:
    try:
        return Weights(args.w_pds, args.w_pcs, args.w_pch)
    except WeightsInvalid as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        raise SystemExit(2) from None


def _load_facts_into(session, path: str) -> None:
    records = _load_json(path, "facts file")
    if not isinstance(records, list):
        raise ParseError(f"facts file {path} must hold a list")
    for i, record in enumerate(records):
        if not isinstance(record, dict) or "left" not in record or "right" not in record or "verdict" not in record:
            raise ParseError(f"facts file entry {i} needs left, right, and verdict keys")
        establish_fact(
            session,
            record.get("kind", "process"),
            record["left"],
            record["right"],
            record["verdict"],
            record.get("rationale", ""),
        )


def cmd_compare(args) -> int:
    weights = _parse_weights(args)
    left = model_from_data(_load_json(args.left, "model document"))
    right = model_from_data(_load_json(args.right, "model document"))
    session = create_session(
        left, right, weights=weights, name_threshold=args.name_threshold, session_id="cli"
    )
    if args.facts:
        _load_facts_into(session, args.facts)
    record = recompute(session, args.scope)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    heatmap_path = out_dir / "heatmap.csv"
    heatmap_path.write_text(export_heatmap(record.matrix), encoding="utf-8")
    ranked = assumptions(session)
    listing = {
        "left_model": left.id,
        "right_model": right.id,
        "scope": record.scope,
        "weights": {"w_pds": args.w_pds, "w_pcs": args.w_pcs, "w_pch": args.w_pch},
        "name_threshold": args.name_threshold,
        "assumptions": [
            {"rank": i + 1, "left": a.left_id, "right": a.right_id, "score": a.score}
            for i, a in enumerate(ranked)
        ],
    }
    assumptions_path = out_dir / "assumptions.json"
    assumptions_path.write_text(
        json.dumps(listing, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    print(f"wrote {heatmap_path}")
    print(f"wrote {assumptions_path}")
    return 0


def _load_annotations(path: str) -> list[Annotation]:
    records = _load_json(path, "annotations file")
    if not isinstance(records, list):
        raise ParseError(f"annotations file {path} must hold a list")
    out = []
    for i, record in enumerate(records):
        if not isinstance(record, dict) or "process" not in record:
            raise ParseError(f"annotations file entry {i} needs a process key")
        out.append(
            Annotation(
                process_id=record["process"],
                source=record.get("source"),
                skipped_but_important=record.get("skipped_but_important", False),
                purpose=record.get("purpose", ""),
                exclude=record.get("exclude", False),
                note=record.get("note", ""),
            )
        )
    return out


def cmd_merge(args) -> int:
    session = session_from_data(_load_json(args.session, "session file"))
    if len(session.facts) == 0:
        print("error: nothing to merge, the session has no facts", file=sys.stderr)
        return 1
    annotations = _load_annotations(args.annotations) if args.annotations else []
    plan = propose_plan(session, annotations)
    decide(plan, Accept())
    ref = build_reference_model(session, plan)
    out_path = Path(args.out)
    if out_path.parent and not out_path.parent.exists():
        out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(serialize_reference_model(ref), encoding="utf-8")
    counts = accounting(ref)
    print(f"left processes:  {counts['left_processes']}")
    print(f"right processes: {counts['right_processes']}")
    print(f"common pairs:    {counts['common_pairs']}")
    print(f"box members:     {counts['box_members']}")
    print(f"exclusions:      {counts['exclusions']}")
    print(f"balanced:        {'yes' if counts['balanced'] else 'no'}")
    print(f"wrote {out_path}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    app = create_app(args.store)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="procompare",
        description="Compare descriptive software process models and build reference models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a model document")
    p_validate.add_argument("path", help="model document file")
    p_validate.set_defaults(func=cmd_validate)

    p_compare = sub.add_parser("compare", help="score two models and write heatmap plus assumptions")
    p_compare.add_argument("left", help="left model document")
    p_compare.add_argument("right", help="right model document")
    p_compare.add_argument("--w-pds", type=float, default=1.0 / 3.0, help="product-structure weight")
    p_compare.add_argument("--w-pcs", type=float, default=1.0 / 3.0, help="sub-process-structure weight")
    p_compare.add_argument("--w-pch", type=float, default=1.0 / 3.0, help="hierarchy weight")
    p_compare.add_argument("--name-threshold", type=float, default=0.9, help="match threshold for names")
    p_compare.add_argument("--facts", help="JSON facts file: [{left, right, kind, verdict, rationale}]")
    p_compare.add_argument(
        "--scope", choices=["phases", "processes"], default="processes", help="comparison scope"
    )
    p_compare.add_argument("--out", default=".", help="output directory")
    p_compare.set_defaults(func=cmd_compare)

    p_merge = sub.add_parser("merge", help="build a reference model from a saved session")
    p_merge.add_argument("session", help="session state file")
    p_merge.add_argument("--annotations", help="JSON annotations file")
    p_merge.add_argument("--out", default="reference.json", help="output reference document")
    p_merge.set_defaults(func=cmd_merge)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--store", default="procompare-store", help="persistence directory")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
