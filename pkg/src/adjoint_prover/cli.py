"""Command-line entry point.

Exit codes: 0 proved / as expected, 1 refuted or unprovable, 2 bounds
exhausted without an answer, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from . import calculus, scenarios, search, semantics, transform
from .syntax import ParseError, parse_sequent, print_sequent

OK, NO, BOUNDS, BAD_INPUT = 0, 1, 2, 3


class InputError(Exception):
    pass


def _sequent(text: str):
    try:
        return parse_sequent(text)
    except ParseError as e:
        caret = " " * e.pos + "^"
        raise InputError(f"parse error: {e}\n  {text}\n  {caret}") from None


def _assumptions(path):
    if not path:
        return []
    try:
        return calculus.parse_assumptions(Path(path).read_text())
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    except ValueError as e:
        raise InputError(f"{path}: {e}") from None


def _load_proof(path):
    try:
        return calculus.loads(Path(path).read_text())
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    except (ValueError, KeyError, TypeError) as e:
        raise InputError(f"{path}: malformed proof file ({e})") from None


def _path(text: str) -> tuple:
    text = text.strip()
    if text in ("", "[]", "()"):
        return ()
    if text.startswith("["):
        try:
            return tuple(json.loads(text))
        except json.JSONDecodeError as e:
            raise InputError(f"bad path {text!r}: {e}") from None
    if not re.fullmatch(r"\d+(\s*[,.]\s*\d+)*", text):
        raise InputError(f"bad path {text!r}: expected indices like 0,2")
    return tuple(int(p) for p in re.split(r"\s*[,.]\s*", text))


def _round(text: str):
    text = text.strip()
    m = re.fullmatch(r"(?:after_round\()?(\d+)\)?", text)
    if m:
        return int(m.group(1))
    if text in (scenarios.BEFORE, scenarios.AFTER):
        return text
    raise InputError(f"bad round {text!r}: use before_father, after_father or after_round(r)")


def _emit(path, text):
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise InputError(f"cannot write {path}: {e.strerror}") from None


def _out(args, human: str, data: dict):
    if args.format == "json":
        print(json.dumps(data, indent=1, ensure_ascii=False))
    else:
        print(human)


def _config(args, assumptions=()):
    return search.SearchConfig(max_depth=args.max_depth, max_nodes=args.max_nodes,
                               assumptions=tuple(assumptions))


def cmd_prove(args) -> int:
    seq = _sequent(args.sequent)
    rules = _assumptions(args.assn)
    out = search.prove(seq, _config(args, rules))
    if isinstance(out, search.Proved):
        if args.emit:
            _emit(args.emit, calculus.dumps(out.derivation, rules))
        _out(args, calculus.render(out.derivation),
             {"status": "proved", "proof": calculus.to_dict(out.derivation),
              "stats": out.stats.to_dict()})
        return OK
    verdict = "not provable" if out.exhausted else "not proved within bounds"
    _out(args, f"{verdict}: {print_sequent(seq)}",
         {"status": "unprovable" if out.exhausted else "bounds", "stats": out.stats.to_dict()})
    return NO if out.exhausted else BOUNDS


def cmd_decide(args) -> int:
    seq = _sequent(args.sequent)
    rules = _assumptions(args.assn)
    out = search.decide(seq, _config(args, rules), max_worlds=args.worlds)
    if isinstance(out, search.Proved):
        if args.emit:
            _emit(args.emit, calculus.dumps(out.derivation, rules))
        _out(args, "proved\n" + calculus.render(out.derivation),
             {"status": "proved", "proof": calculus.to_dict(out.derivation)})
        return OK
    if isinstance(out, search.Refuted):
        _out(args, "refuted\n" + out.countermodel.render(),
             {"status": "refuted", "countermodel": out.countermodel.to_dict()})
        return NO
    if out.exhausted:
        _out(args, f"not provable; no countermodel with at most {args.worlds} worlds",
             {"status": "unprovable"})
        return NO
    _out(args, "undecided within bounds", {"status": "bounds"})
    return BOUNDS


def cmd_check(args) -> int:
    d, rules = _load_proof(args.proof)
    rules = rules + _assumptions(args.assn)
    bad = calculus.check(d, rules, allow_cut=args.allow_cut)
    if not bad:
        _out(args, f"ok: {print_sequent(d.conclusion)} ({d.node_count} nodes)",
             {"status": "ok", "conclusion": print_sequent(d.conclusion)})
        return OK
    _out(args, "rejected\n" + "\n".join(f"  {r}" for r in bad),
         {"status": "rejected", "rejections": [
             {"node": list(r.node), "rule": r.rule, "expected": r.expected, "found": r.found}
             for r in bad]})
    return BAD_INPUT


def cmd_elimcut(args) -> int:
    d1, r1 = _load_proof(args.left)
    d2, r2 = _load_proof(args.right)
    rules = r1 + r2
    for d, name in ((d1, args.left), (d2, args.right)):
        bad = calculus.check(d, rules)
        if bad:
            raise InputError(f"{name} does not check: {bad[0]}")
    trace = []
    try:
        out = transform.eliminate_cut(d1, d2, _path(args.path), args.index, trace)
    except transform.TransformError as e:
        raise InputError(str(e)) from None
    if args.emit:
        _emit(args.emit, calculus.dumps(out, rules))
    _out(args, calculus.render(out) + "\ncases: " + " ".join(trace),
         {"status": "ok", "proof": calculus.to_dict(out), "cases": trace})
    return OK


def cmd_countermodel(args) -> int:
    seq = _sequent(args.sequent)
    rules = _assumptions(args.assn)
    cm = semantics.find_countermodel(seq, args.worlds, rules)
    if cm is None:
        _out(args, f"no countermodel with at most {args.worlds} worlds", {"status": "none"})
        return BOUNDS
    _out(args, cm.render(), {"status": "refuted", "countermodel": cm.to_dict()})
    return NO


def cmd_muddy(args) -> int:
    try:
        if args.config:
            config = scenarios.MuddyConfig.loads(Path(args.config).read_text())
        else:
            if args.n is None or (args.k is None and not args.liar):
                raise InputError("muddy needs --n and --k (or --config)")
            k = 0 if args.liar else args.k
            config = scenarios.MuddyConfig(args.n, k, _round(args.round),
                                           "liar" if args.liar else "honest")
    except OSError as e:
        raise InputError(f"cannot read {args.config}: {e.strerror}") from None
    except (ValueError, KeyError) as e:
        raise InputError(f"invalid scenario: {e}") from None
    rules = scenarios.build_assumptions(config)
    if args.emit_assn:
        _emit(args.emit_assn, scenarios.export_assumptions(config))
    rows, worst = [], OK
    for q in scenarios.build_queries(config):
        out = search.prove(q.sequent, _config(args, rules))
        got = isinstance(out, search.Proved)
        if not got and not out.exhausted:
            status = "bounds"
        else:
            status = "proved" if got else "unprovable"
        agree = got == q.expected
        if not agree:
            worst = max(worst, NO if status != "bounds" else BOUNDS)
        rows.append({"query": q.name, "sequent": print_sequent(q.sequent),
                     "expected": "provable" if q.expected else "unprovable",
                     "result": status, "agrees": agree})
    lines = [f"{len(rules)} assumption rules"]
    for r in rows:
        mark = "ok " if r["agrees"] else "BAD"
        lines.append(f"{mark} {r['query']:<22} {r['result']:<10} {r['sequent']}")
    _out(args, "\n".join(lines), {"config": config.to_dict(), "queries": rows,
                                  "assumptions": [a.id for a in rules]})
    return worst


def cmd_laws(args) -> int:
    agents = [a for a in args.agents.split(",") if a]
    frames = violations = 0
    report = []
    for n in range(1, args.worlds + 1):
        for frame in semantics.enumerate_frames(n, agents):
            frames += 1
            for v in semantics.dlam_validate(semantics.complex_algebra(frame)):
                violations += 1
                if len(report) < 20:
                    report.append(f"{n} worlds: {v.law}: {v.detail}")
    _out(args, f"{frames} frames, {violations} violations" + "".join("\n  " + r for r in report),
         {"frames": frames, "violations": violations, "examples": report})
    return OK if violations == 0 else NO


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adjoint-prover",
                                description="Nested sequent prover for positive modal logic with adjoint modalities.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, search_flags=True):
        sp.add_argument("--format", choices=("text", "json"), default="text")
        if search_flags:
            sp.add_argument("--max-depth", type=int, default=256)
            sp.add_argument("--max-nodes", type=int, default=200_000)

    sp = sub.add_parser("prove", help="search for a cut-free derivation")
    sp.add_argument("sequent")
    sp.add_argument("--assn", help="assumption file, one 'assn A p => q | r' per line")
    sp.add_argument("--emit", help="write the proof as JSON")
    common(sp)
    sp.set_defaults(func=cmd_prove)

    sp = sub.add_parser("decide", help="proof search, then countermodel search")
    sp.add_argument("sequent")
    sp.add_argument("--worlds", type=int, default=3)
    sp.add_argument("--assn")
    sp.add_argument("--emit")
    common(sp)
    sp.set_defaults(func=cmd_decide)

    sp = sub.add_parser("check", help="check a proof file")
    sp.add_argument("proof")
    sp.add_argument("--allow-cut", action="store_true")
    sp.add_argument("--assn")
    common(sp, False)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("elimcut", help="eliminate a cut between two proof files")
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("--path", default="", help="level of the cut formula in the right proof, e.g. 0,1")
    sp.add_argument("--index", type=int, default=None)
    sp.add_argument("--emit")
    common(sp, False)
    sp.set_defaults(func=cmd_elimcut)

    sp = sub.add_parser("countermodel", help="search for a finite countermodel")
    sp.add_argument("sequent")
    sp.add_argument("--worlds", type=int, default=3)
    sp.add_argument("--assn")
    common(sp, False)
    sp.set_defaults(func=cmd_countermodel)

    sp = sub.add_parser("muddy", help="run the muddy children queries")
    sp.add_argument("--n", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--round", default=scenarios.BEFORE)
    sp.add_argument("--liar", action="store_true")
    sp.add_argument("--config", help="JSON file with n, k, round, variant")
    sp.add_argument("--emit-assn", help="write the generated assumption rules")
    common(sp)
    sp.set_defaults(func=cmd_muddy)

    sp = sub.add_parser("laws", help="validate the algebra laws on all complex algebras")
    sp.add_argument("--worlds", type=int, default=2)
    sp.add_argument("--agents", default="A")
    common(sp, False)
    sp.set_defaults(func=cmd_laws)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return OK if e.code == 0 else BAD_INPUT
    for name in ("worlds", "max_depth", "max_nodes", "n"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            print(f"error: --{name.replace('_', '-')} must be positive", file=sys.stderr)
            return BAD_INPUT
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return BAD_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
