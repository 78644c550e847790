"""Command-line surface: structure files, verification reports, analysis,
constructions, isomorphism queries and enumeration runs.

Structure files are JSON with label-based element references::

    {
      "kind": "almost_groupoid",
      "elements": ["(0,0)", "(0,1)"],
      "units": ["(0,0)"],
      "theta": {"(0,0)": "(0,0)", "(0,1)": "(0,0)"},
      "inverse": {"(0,0)": "(0,0)", "(0,1)": "(0,1)"},
      "product": [["(0,0)", "(0,0)", "(0,0)"], ...]
    }

Groupoid files carry "source"/"target" instead of "theta"; generalized-group
files carry "e" and omit "units" (derived as the image of e).  Unknown fields
are rejected.  Rule-backed structures are addressed with builtin URIs such as
``builtin:rstar2?a=2`` since they have no finite table.

Exit codes: 0 pass/success, 1 verification failure or negative answer,
2 usage or parse errors.  The ALGF_SEED environment variable overrides the
default sampling seed 0; --seed overrides both.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import sys
from contextlib import redirect_stderr
from fractions import Fraction
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qsl, urlsplit

from jsonschema import Draft202012Validator

from . import census, constructions
from .almost import (
    as_groupoid,
    b2_zn_almost_groupoid,
    null_almost_groupoid,
    verify_almost_groupoid,
)
from .gengroup import (
    rstar_group,
    sqrtdet_generalized_group,
    triangular_generalized_group,
    verify_generalized_group,
)
from .groupoid import (
    check_groupoid_morphism,
    classify_substructure,
    gl_groupoid,
    is_transitive,
    isotropy_bundle,
    isotropy_group,
    left_translation_groupoid,
    pair_groupoid,
    rstar2_groupoid,
    symmetric_groupoid,
    verify_groupoid,
)
from .kernel import (
    ALMOST_GROUPOID,
    GENERALIZED_GROUP,
    GROUPOID,
    FiniteStructureTable,
    StructureError,
    build_finite_table,
    build_generalized_group,
    is_rule_structure,
)

STRUCTURE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind", "elements", "inverse", "product"],
    "properties": {
        "kind": {"enum": [GROUPOID, ALMOST_GROUPOID, GENERALIZED_GROUP]},
        "elements": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "units": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "source": {"type": "object", "additionalProperties": {"type": "string"}},
        "target": {"type": "object", "additionalProperties": {"type": "string"}},
        "theta": {"type": "object", "additionalProperties": {"type": "string"}},
        "e": {"type": "object", "additionalProperties": {"type": "string"}},
        "inverse": {"type": "object", "additionalProperties": {"type": "string"}},
        "product": {
            "type": "array",
            "items": {
                "type": "array",
                "items": {"type": "string"},
                "minItems": 3,
                "maxItems": 3,
            },
        },
    },
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": GROUPOID}}},
            "then": {
                "required": ["units", "source", "target"],
                "not": {"anyOf": [{"required": ["theta"]}, {"required": ["e"]}]},
            },
        },
        {
            "if": {"properties": {"kind": {"const": ALMOST_GROUPOID}}},
            "then": {
                "required": ["units", "theta"],
                "not": {
                    "anyOf": [
                        {"required": ["source"]},
                        {"required": ["target"]},
                        {"required": ["e"]},
                    ]
                },
            },
        },
        {
            "if": {"properties": {"kind": {"const": GENERALIZED_GROUP}}},
            "then": {
                "required": ["e"],
                "not": {
                    "anyOf": [
                        {"required": ["units"]},
                        {"required": ["source"]},
                        {"required": ["target"]},
                        {"required": ["theta"]},
                    ]
                },
            },
        },
    ],
}

_validator = Draft202012Validator(STRUCTURE_SCHEMA)


def parse_structure_text(text: str, origin: str = "<string>") -> FiniteStructureTable:
    """Parse and structurally validate one structure file."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StructureError(
            "syntax-error", f"{origin}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    errors = sorted(_validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise StructureError("schema-violation", f"{origin}: at {where}: {err.message}")
    product = [tuple(entry) for entry in doc["product"]]
    try:
        if doc["kind"] == GROUPOID:
            return build_finite_table(
                doc["elements"],
                doc["units"],
                doc["source"],
                doc["target"],
                doc["inverse"],
                product,
                GROUPOID,
            )
        if doc["kind"] == ALMOST_GROUPOID:
            return build_finite_table(
                doc["elements"],
                doc["units"],
                doc["theta"],
                doc["theta"],
                doc["inverse"],
                product,
                ALMOST_GROUPOID,
            )
        return build_generalized_group(
            doc["elements"], doc["e"], doc["inverse"], product
        )
    except StructureError as exc:
        raise StructureError(exc.code, f"{origin}: {exc}") from exc


def parse_structure_file(path: str) -> FiniteStructureTable:
    p = Path(path)
    if not p.exists():
        raise StructureError("file-not-found", f"no such file: {path}")
    return parse_structure_text(p.read_text(encoding="utf-8"), origin=path)


def structure_to_doc(table: FiniteStructureTable) -> dict:
    doc: dict = {"kind": table.kind, "elements": [e.label for e in table.elements]}
    if table.kind == GROUPOID:
        doc["units"] = [u.label for u in table.units]
        doc["source"] = {x.label: table.source[x].label for x in table.elements}
        doc["target"] = {x.label: table.target[x].label for x in table.elements}
    elif table.kind == ALMOST_GROUPOID:
        doc["units"] = [u.label for u in table.units]
        doc["theta"] = {x.label: table.source[x].label for x in table.elements}
    else:
        doc["e"] = {x.label: table.source[x].label for x in table.elements}
    doc["inverse"] = {x.label: table.inverse[x].label for x in table.elements}
    doc["product"] = [
        [x.label, y.label, z.label]
        for (x, y), z in sorted(
            table.product.items(), key=lambda kv: (kv[0][0].index, kv[0][1].index)
        )
    ]
    return doc


def serialize_structure(table: FiniteStructureTable) -> str:
    return json.dumps(structure_to_doc(table), indent=2) + "\n"


_BUILTIN_HELP = "rstar2, sqrtdet, triangular, rstar, gl, b2zn, pair, null, sym"


def load_structure(ref: str):
    """A finite table from a file path, or a rule structure/finite table from
    a ``builtin:`` URI."""
    if not ref.startswith("builtin:"):
        return parse_structure_file(ref)
    parts = urlsplit(ref)
    name = parts.path
    params = dict(parse_qsl(parts.query))
    try:
        if name == "rstar2":
            return rstar2_groupoid(Fraction(params.get("a", "2")))
        if name == "sqrtdet":
            return sqrtdet_generalized_group(params.get("mode", "rational"))
        if name == "triangular":
            return triangular_generalized_group()
        if name == "rstar":
            return rstar_group(params.get("mode", "rational"))
        if name == "gl":
            return gl_groupoid(int(params.get("n", "2")))
        if name == "b2zn":
            return b2_zn_almost_groupoid(int(params.get("n", "6")))
        if name == "pair":
            return pair_groupoid([str(i + 1) for i in range(int(params.get("n", "3")))])
        if name == "null":
            return null_almost_groupoid(
                [f"u{i + 1}" for i in range(int(params.get("n", "3")))]
            )
        if name == "sym":
            return symmetric_groupoid(
                [str(i + 1) for i in range(int(params.get("m", "2")))]
            )
    except ValueError as exc:
        raise StructureError("schema-violation", f"bad builtin parameter: {exc}") from exc
    raise StructureError(
        "unknown-builtin", f"unknown builtin {name!r}; available: {_BUILTIN_HELP}"
    )


_VERIFIERS = {
    GROUPOID: verify_groupoid,
    ALMOST_GROUPOID: verify_almost_groupoid,
    GENERALIZED_GROUP: verify_generalized_group,
}

_AS_KIND = {"groupoid": GROUPOID, "almost": ALMOST_GROUPOID, "gengroup": GENERALIZED_GROUP}


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("ALGF_SEED")
    return int(env) if env else 0


def _digest(key) -> str:
    return hashlib.sha256(repr(key).encode("utf-8")).hexdigest()[:12]


def _cmd_validate(args) -> tuple[int, dict]:
    S = load_structure(args.structure)
    seed = _resolve_seed(args)
    native = S.kind
    kind = _AS_KIND[args.as_kind] if args.as_kind else native
    report = _VERIFIERS[kind](S, samples=args.samples, seed=seed)
    doc = {
        "command": "validate",
        "input": args.structure,
        "kind": native,
        "verified_as": kind,
        "samples": args.samples,
        "seed": seed,
        "report": report.to_dict(),
    }
    return (0 if report.verdict else 1, doc)


def _cmd_analyze(args) -> tuple[int, dict]:
    S = load_structure(args.structure)
    if is_rule_structure(S):
        raise StructureError(
            "unsupported-for-rule-structure", "analyze needs a finite structure"
        )
    report = _VERIFIERS[S.kind](S)
    doc = {
        "command": "analyze",
        "input": args.structure,
        "kind": S.kind,
        "order": S.order,
        "unit_count": len(S.units),
        "report": report.to_dict(),
    }
    signature = []
    for u in S.units:
        fiber = isotropy_group(S, u.label)
        signature.append(
            {
                "unit": u.label,
                "size": fiber.order,
                "class": _digest(census.canonical_form(fiber).key),
            }
        )
    doc["isotropy_signature"] = signature
    if S.kind == GROUPOID:
        trans = is_transitive(S)
        doc["transitive"] = trans.passed
        if not trans.passed:
            doc["transitive_witness"] = list(trans.witness.elements)
    else:
        doc["transitive"] = None
    bundle = isotropy_bundle(S)
    cls = classify_substructure(
        S, [e.label for e in bundle.elements], [u.label for u in S.units]
    )
    doc["isotropy_bundle"] = {"size": bundle.order, "classification": cls.level}
    return (0 if report.verdict else 1, doc)


def _cmd_construct(args) -> tuple[int, dict]:
    A = load_structure(args.a)
    B = load_structure(args.b)
    if args.op == "union":
        result = constructions.disjoint_union_almost(A, B)
    elif args.op == "direct":
        result = constructions.direct_product_almost(A, B)
    else:
        if args.action is None:
            raise StructureError(
                "usage-error", "construct --op semidirect needs --action FILE"
            )
        p = Path(args.action)
        if not p.exists():
            raise StructureError("file-not-found", f"no such file: {args.action}")
        try:
            triples = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise StructureError(
                "syntax-error", f"{args.action}: line {exc.lineno}: {exc.msg}"
            ) from exc
        act = {(g, h): r for g, h, r in (tuple(t) for t in triples)}
        result = constructions.semidirect_product(A, B, act)
    Path(args.out).write_text(serialize_structure(result), encoding="utf-8")
    doc = {
        "command": "construct",
        "op": args.op,
        "inputs": [args.a, args.b],
        "output": args.out,
        "order": result.order,
        "unit_count": len(result.units),
        "verdict": "pass",
    }
    return (0, doc)


def _cmd_iso(args) -> tuple[int, dict]:
    A = load_structure(args.a)
    B = load_structure(args.b)
    if is_rule_structure(A) or is_rule_structure(B):
        raise StructureError(
            "unsupported-for-rule-structure", "iso needs finite structures"
        )
    pair = census.are_isomorphic(A, B)
    doc = {
        "command": "iso",
        "inputs": [args.a, args.b],
        "isomorphic": pair is not None,
        "witness": None if pair is None else {"f": dict(pair.f), "f0": dict(pair.f0)},
    }
    return (0 if pair is not None else 1, doc)


def _cmd_enumerate(args) -> tuple[int, dict]:
    if args.kind == "almost":
        if args.units is not None:
            found = census.enumerate_almost_groupoids(args.order, args.units)
        else:
            found = []
            for k in range(1, args.order + 1):
                found.extend(census.enumerate_almost_groupoids(args.order, k))
    else:
        found = census.enumerate_generalized_groups(args.order)
    doc = {
        "command": "enumerate",
        "kind": args.kind,
        "order": args.order,
        "units": args.units,
        "count": len(found),
        "structures": [structure_to_doc(t) for t in found],
    }
    return (0, doc)


def _cmd_cayley(args) -> tuple[int, dict]:
    S = load_structure(args.structure)
    if is_rule_structure(S):
        raise StructureError(
            "unsupported-for-rule-structure", "cayley needs a finite structure"
        )
    if S.kind == ALMOST_GROUPOID:
        S = as_groupoid(S)
    elif S.kind != GROUPOID:
        raise StructureError("kind-mismatch", "cayley needs a groupoid table")
    translations, phi = left_translation_groupoid(S)
    injective = len(set(phi.f.values())) == S.order
    report = check_groupoid_morphism(S, translations, phi.f, phi.f0)
    ok = injective and report.verdict and bool(report.is_isomorphism)
    doc = {
        "command": "cayley",
        "input": args.structure,
        "order": S.order,
        "translations": translations.order,
        "injective": injective,
        "report": report.to_dict(),
    }
    return (0 if ok else 1, doc)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="algf",
        description="Verify, analyze, combine and enumerate partial-product structures.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--out", dest="report_out", default=None, help="write the report here instead of stdout"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check the axioms of a structure")
    p.add_argument("structure", help=f"structure file or builtin URI ({_BUILTIN_HELP})")
    p.add_argument("--as", dest="as_kind", choices=sorted(_AS_KIND), default=None)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("analyze", parents=[common], help="isotropy, transitivity, substructure summary")
    p.add_argument("structure")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("construct", parents=[common], help="union, direct or semidirect product")
    p.add_argument("--op", choices=["union", "direct", "semidirect"], required=True)
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--action", default=None, help="JSON list of [g, h, result] triples")
    p.add_argument("-o", dest="out", required=True, help="write the constructed structure here")
    p.set_defaults(func=_cmd_construct)

    p = sub.add_parser("iso", parents=[common], help="search for an isomorphism between two structures")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=_cmd_iso)

    p = sub.add_parser("enumerate", parents=[common], help="enumerate small structures up to isomorphism")
    p.add_argument("--kind", choices=["almost", "gengroup"], required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--units", type=int, default=None)
    p.set_defaults(func=_cmd_enumerate)

    p = sub.add_parser("cayley", parents=[common], help="build the translation groupoid and verify the embedding")
    p.add_argument("structure")
    p.set_defaults(func=_cmd_cayley)

    return parser


_FAIL_CODES = {"action-verification-failed", "construction-invalid"}


def run_command(argv) -> tuple[int, str]:
    """Run one subcommand; returns (exit code, report text)."""
    parser = _build_parser()
    try:
        with redirect_stderr(io.StringIO()) as err:
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return (2 if exc.code else 0, err.getvalue())
    seed_env = os.environ.get("ALGF_SEED", "")
    if seed_env and not seed_env.lstrip("-").isdigit():
        return (2, json.dumps({"error": {"code": "usage-error", "message": "ALGF_SEED must be an integer"}}, indent=2) + "\n")
    try:
        code, doc = args.func(args)
    except StructureError as exc:
        doc = {"error": {"code": exc.code, "message": str(exc)}}
        return (1 if exc.code in _FAIL_CODES else 2, json.dumps(doc, indent=2) + "\n")
    text = json.dumps(doc, indent=2) + "\n"
    if args.report_out:
        Path(args.report_out).write_text(text, encoding="utf-8")
        return (code, "")
    return (code, text)


def main(argv: Optional[list] = None) -> int:
    code, text = run_command(sys.argv[1:] if argv is None else argv)
    if text:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
