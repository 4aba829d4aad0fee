"""Command line interface.

Exit status: 0 when everything checked out, 1 when a countermodel was found or
a check failed, 2 for usage and input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .algebra import MissingAtomError, Valuation, format_rational, parse_rational
from .canonical import (
    NormalizationError, NormalizationProblem, SnapshotError, check_membership_approx,
    check_postconditions, default_targets, normalize, pi_phi, snapshot_bound_violations,
)
from .formula import ParseError, is_modal, parse, to_text, variables
from .models import (
    ModelError, PossModel, is_euclidean, is_serial, is_transitive, load_model,
    to_relational,
)
from .proofs import BUILTIN_PROOFS, ProofSyntaxError, builtin_corpus, check, parse_proof
from .search import (
    ModelClass, RejectionBudgetExceeded, SearchBounds, compare_classes, crisp_reduction_check,
    default_chain, find_countermodel, random_countermodel,
)

OK, FAILED, BAD_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _formula(text: str):
    return parse(text)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def _load_json(path: str):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from None


def _corpus(source: str):
    if source.startswith("builtin:"):
        try:
            return builtin_corpus(source.split(":", 1)[1])
        except KeyError as exc:
            raise InputError(str(exc.args[0])) from None
    out = []
    for line in _read(source).splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(parse(line))
    return out


def _bounds(args, formulas=()) -> SearchBounds:
    names = sorted({n for f in formulas for n in variables(f)})
    chain = args.chain if args.chain is not None else default_chain(args.max_worlds, len(names))
    return SearchBounds(max_worlds=args.max_worlds, chain=chain, variables=tuple(names),
                        seed=args.seed, samples=args.samples)


# ---------------------------------------------------------------------------
# commands

def cmd_eval(args) -> int:
    M = load_model(args.model)
    f = _formula(args.formula)
    value = M.eval(args.world, f)
    payload = {"world": args.world, "formula": to_text(f), "value": format_rational(value)}
    text = format_rational(value)
    if isinstance(M, PossModel) and is_modal(f):
        payload["world_independent"] = True
        text += "\n(same value at every world: the model has a single possibility distribution)"
    _emit(args, payload, text)
    return OK


def cmd_countermodel(args) -> int:
    f = _formula(args.formula)
    bounds = _bounds(args, [f])
    if args.samples:
        report = random_countermodel(f, args.model_class, bounds)
    else:
        report = find_countermodel(f, args.model_class, bounds)
    text = report.summary()
    if report.found:
        text += "\n" + json.dumps(report.to_json()["witness"]["model"], indent=2)
    _emit(args, report.to_json(), text)
    return FAILED if report.found else OK


def cmd_compare(args) -> int:
    corpus = _corpus(args.corpus)
    classes = args.classes or [ModelClass.PI_G.value, ModelClass.KD45_GK.value]
    report = compare_classes(corpus, _bounds(args, corpus), classes)
    lines = [f"{len(corpus)} formulas, classes {', '.join(classes)}: "
             f"{len(report.discrepancies)} discrepancies"]
    lines += [f"  differs: {to_text(f)}" for f in report.discrepancies]
    _emit(args, report.to_json(), "\n".join(lines))
    return FAILED if report.discrepancies else OK


def cmd_crisp_check(args) -> int:
    corpus = _corpus(args.corpus)
    report = crisp_reduction_check(args.max_worlds, corpus)
    lines = [f"{len(corpus)} formulas, crisp STE vs semi-universal: "
             f"{len(report.discrepancies)} discrepancies"]
    lines += [f"  differs: {to_text(f)}" for f in report.discrepancies]
    _emit(args, report.to_json(), "\n".join(lines))
    return FAILED if report.discrepancies else OK


def cmd_frame_check(args) -> int:
    M = load_model(args.model)
    note = None
    if isinstance(M, PossModel):
        M = to_relational(M)
        note = "possibilistic model read as the relation R(w, w') = pi(w')"
    checks = {"serial": is_serial(M), "transitive": is_transitive(M), "euclidean": is_euclidean(M)}
    payload = {name: {"holds": c.holds, "witness": list(c.witness) if c.witness else None}
               for name, c in checks.items()}
    lines = [note] if note else []
    for name, c in checks.items():
        lines.append(f"{name}: {'yes' if c.holds else 'no, witness ' + ', '.join(c.witness)}")
    if note:
        payload["note"] = note
    _emit(args, payload, "\n".join(lines))
    return OK if all(checks.values()) else FAILED


def cmd_proof_check(args) -> int:
    if args.proof.startswith("builtin:"):
        key = args.proof.split(":", 1)[1]
        if key not in BUILTIN_PROOFS:
            raise InputError(f"unknown builtin proof {key!r}; known: {', '.join(BUILTIN_PROOFS)}")
        proof = BUILTIN_PROOFS[key]()
    else:
        proof = parse_proof(_read(args.proof), name=args.proof)
    result = check(proof, allow_derived=not args.strict)
    payload = {"proof": proof.name, "steps": len(proof.steps), "ok": result.ok,
               "conclusion": to_text(proof.conclusion), "uses_derived": proof.uses_derived()}
    if result.ok:
        text = f"{proof.name}: ok, {len(proof.steps)} steps, proves {to_text(proof.conclusion)}"
        if proof.uses_derived():
            text += " (uses a derived schema)"
    else:
        payload["error"] = {"step": result.error.step, "reason": result.error.reason}
        text = f"{proof.name}: step {result.error.step}: {result.error.reason}"
    _emit(args, payload, text)
    return OK if result.ok else FAILED


def cmd_normalize(args) -> int:
    try:
        problem = NormalizationProblem.from_json(_load_json(args.problem))
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise InputError(f"{args.problem}: {exc}") from None
    result = normalize(problem, membership_depth=args.depth)
    targets = [parse(t) for t in args.targets] if args.targets else default_targets(problem)
    violations = check_postconditions(result, targets)
    membership = check_membership_approx(result.w, problem.phi, args.depth)
    payload = result.to_json()
    payload["postcondition_violations"] = [str(v) for v in violations]
    payload["membership"] = {"depth": args.depth, "checked": membership.checked,
                             "skipped": membership.skipped,
                             "failures": [to_text(x) for x in membership.failures]}
    lines = [f"alpha = {format_rational(problem.alpha)}, beta = {format_rational(problem.beta)}, "
             f"delta = {format_rational(problem.cut)}"]
    lines += [f"w({k}) = {v}" for k, v in result.w.to_json().items()]
    lines.append(f"postconditions over {len(targets)} targets: "
                 + ("all hold" if not violations else f"{len(violations)} violations"))
    lines += [f"  {v}" for v in violations[:20]]
    lines.append(f"axiom instances at depth {args.depth}: {membership.checked} checked, "
                 f"{membership.skipped} skipped, {len(membership.failures)} failed")
    _emit(args, payload, "\n".join(lines))
    return FAILED if violations or not membership else OK


def _valuation(data, where: str) -> Valuation:
    if not isinstance(data, dict):
        raise InputError(f"{where}: expected an object mapping atoms to rationals")
    try:
        return Valuation({k: parse_rational(v) for k, v in data.items()})
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise InputError(f"{where}: {exc}") from None


def cmd_pi_phi(args) -> int:
    data = _load_json(args.valuations)
    if not isinstance(data, dict) or "v" not in data or not ("u" in data or "us" in data):
        raise InputError(f"{args.valuations}: expected {{\"v\": {{...}}, \"u\": {{...}}}} "
                         f"or {{\"v\": {{...}}, \"us\": [...]}}")
    f = _formula(args.formula)
    v = _valuation(data["v"], "$.v")
    us = [data["u"]] if "u" in data else data["us"]
    if not isinstance(us, list):
        raise InputError("$.us: expected a list")
    us = [_valuation(u, f"$.us[{i}]") for i, u in enumerate(us)]
    values = [pi_phi(v, u, f) for u in us]
    payload = {"formula": to_text(f), "pi": [format_rational(x) for x in values]}
    text = "\n".join(format_rational(x) for x in values)
    status = OK
    if args.snapshot:
        problems = snapshot_bound_violations(v, us, f)
        payload["snapshot_bound_violations"] = problems
        text += "\nsnapshot bounds: " + ("hold" if not problems else "; ".join(problems))
        status = FAILED if problems else OK
    _emit(args, payload, text)
    return status


# ---------------------------------------------------------------------------

def _add_bounds(p: argparse.ArgumentParser, samples: bool = True) -> None:
    p.add_argument("--max-worlds", type=int, default=3, metavar="N")
    p.add_argument("--chain", type=int, default=None, metavar="M",
                   help="chain denominator (default: worlds * variables + 1)")
    p.add_argument("--seed", type=int, default=None, metavar="S")
    if samples:
        p.add_argument("--samples", type=int, default=0, metavar="K",
                       help="draw K random models instead of enumerating")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kd45g", description="Workbench for the modal Gödel logic KD45(G).")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)
    classes = [c.value for c in ModelClass]

    p = sub.add_parser("eval", help="value of a formula at a world of a model file")
    p.add_argument("model")
    p.add_argument("world")
    p.add_argument("formula")
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("countermodel", help="bounded countermodel search")
    p.add_argument("formula")
    p.add_argument("--class", dest="model_class", choices=classes, default="pi-g")
    _add_bounds(p)
    p.set_defaults(run=cmd_countermodel)

    p = sub.add_parser("compare", help="countermodel status of a corpus in two classes")
    p.add_argument("corpus", help="file with one formula per line, or builtin:NAME")
    p.add_argument("--class", dest="classes", action="append", choices=classes)
    _add_bounds(p, samples=False)
    p.set_defaults(run=cmd_compare, samples=0)

    p = sub.add_parser("crisp-check", help="crisp STE models against semi-universal ones")
    p.add_argument("corpus")
    p.add_argument("--max-worlds", type=int, default=3, metavar="N")
    p.set_defaults(run=cmd_crisp_check)

    p = sub.add_parser("frame-check", help="seriality, transitivity and Euclideanness of a model")
    p.add_argument("model")
    p.set_defaults(run=cmd_frame_check)

    p = sub.add_parser("proof-check", help="check a proof file or builtin:proof1..4")
    p.add_argument("proof")
    p.add_argument("--strict", action="store_true", help="refuse derived schemas")
    p.set_defaults(run=cmd_proof_check)

    p = sub.add_parser("normalize", help="run the normalization transform on a problem file")
    p.add_argument("problem")
    p.add_argument("--targets", nargs="*", metavar="FORMULA")
    p.add_argument("--depth", type=int, default=0, help="nesting depth for the axiom-instance check")
    p.set_defaults(run=cmd_normalize)

    p = sub.add_parser("pi-phi", help="canonical possibility degree of valuations")
    p.add_argument("valuations", help='JSON {"v": {...}, "u": {...}} or {"v": {...}, "us": [...]}')
    p.add_argument("formula")
    p.add_argument("--snapshot", action="store_true", help="also check the snapshot model bounds")
    p.set_defaults(run=cmd_pi_phi)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    # accept --json anywhere on the line
    want_json = "--json" in argv
    argv = [a for a in argv if a != "--json"]
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    args.json = want_json
    try:
        return args.run(args)
    except NormalizationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT
    except (InputError, ParseError, ModelError, ProofSyntaxError, MissingAtomError, SnapshotError,
            RejectionBudgetExceeded, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
