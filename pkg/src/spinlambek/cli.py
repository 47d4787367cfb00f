"""Command line: ``spinlambek {parse,prove,interpret,check,expand}``.

Exit status is 0 on success with at least one reading, 2 when a search finds
nothing, 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import deduction
from .errors import SpinLambekError
from .lexicon import default_lexicon_path, load_lexicon
from .pipeline import find_derivations, report_to_json, report_to_text, run
from .syntax import (carrier_signature, format_formula, format_words, full_signature,
                     parse_formula, spatial_signature)
from .terms import extract_term, format_term

EXIT_OK, EXIT_ERROR, EXIT_NONE = 0, 1, 2


def _words(raw: list[str]) -> list[str]:
    return [w for chunk in raw for w in chunk.split()]


def _weights(raw: list[str] | None) -> list[float] | None:
    if not raw:
        return None
    try:
        return [float(x) for chunk in raw for x in chunk.replace(",", " ").split()]
    except ValueError:
        raise SpinLambekError(f"weights must be numbers, got {' '.join(raw)!r}") from None


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_parse(args) -> int:
    f = parse_formula(args.formula)
    if args.format == "structured":
        _emit(json.dumps({"formula": format_formula(f), "unicode": format_formula(f, unicode=True),
                          "spatial_signature": [str(x) for x in spatial_signature(f)],
                          "full_signature": [str(x) for x in full_signature(f)],
                          "carrier_signature": [str(x) for x in carrier_signature(f)]},
                         indent=2, ensure_ascii=False))
    else:
        _emit(f"{format_formula(f)}\n{format_formula(f, unicode=True)}\n"
              f"spatial: {spatial_signature(f)}\nfull:    {full_signature(f)}")
    return EXIT_OK


def _budget(args) -> deduction.SearchBudget:
    return deduction.SearchBudget(max_comm=args.budget)


def cmd_prove(args) -> int:
    lex = load_lexicon(args.lexicon)
    found, tried, truncated = find_derivations(_words(args.words), parse_formula(args.goal),
                                               _budget(args), lex, args.brackets)
    if args.format == "structured":
        doc = {"goal": args.goal, "structures_tried": tried, "truncated": truncated,
               "derivations": [{"id": i, "structure": format_words(s),
                                "xleft_indices": list(d.xleft_indices()),
                                "text": deduction.to_text(d), "tree": deduction.to_dict(d),
                                "term": format_term(extract_term(d))}
                               for i, (s, d) in enumerate(found)]}
        _emit(json.dumps(doc, indent=2, ensure_ascii=False))
    else:
        out = [f"{len(found)} derivation(s)" + (" (search truncated)" if truncated else "")]
        for i, (_, d) in enumerate(found):
            out += ["", f"derivation {i}:", deduction.to_text(d).rstrip("\n"),
                    f"term: {format_term(extract_term(d))}"]
        _emit("\n".join(out))
    return EXIT_OK if found else EXIT_NONE


def cmd_interpret(args) -> int:
    lex = load_lexicon(args.lexicon)
    report = run(_words(args.words), parse_formula(args.goal), _budget(args), _weights(args.weights),
                 lex, args.brackets, args.explicit_sum)
    _emit(report_to_json(report) if args.format == "structured" else report_to_text(report))
    return report.exit_code


def _load_derivation(path: str) -> deduction.Derivation:
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    return deduction.loads(text)


def cmd_check(args) -> int:
    d = _load_derivation(args.file)
    seq = deduction.check(d, args.max_comm)
    term = format_term(extract_term(d))
    if args.format == "structured":
        _emit(json.dumps({"valid": True, "conclusion": str(seq), "term": term}, indent=2, ensure_ascii=False))
    else:
        _emit(f"valid: {seq}\nterm: {term}")
    return EXIT_OK


def cmd_expand(args) -> int:
    d = deduction.expand_xleft(_load_derivation(args.file))
    deduction.check(d)
    if args.format == "structured":
        _emit(json.dumps(deduction.to_dict(d), indent=2, ensure_ascii=False))
    else:
        _emit(deduction.to_text(d))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinlambek", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, lexicon=True):
        sp.add_argument("--format", choices=("text", "structured"), default="text")
        if lexicon:
            sp.add_argument("--lexicon", default=str(default_lexicon_path()),
                            help="lexicon file (default: the shipped Dutch lexicon)")

    sp = sub.add_parser("parse", help="parse a formula and show its spaces")
    sp.add_argument("formula")
    common(sp, lexicon=False)
    sp.set_defaults(func=cmd_parse)

    for name, func, helptext in (("prove", cmd_prove, "list the derivations of a phrase"),
                                 ("interpret", cmd_interpret, "derive and interpret a phrase")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("words", nargs="*", help="the phrase (words or one quoted string)")
        sp.add_argument("--goal", default="n", help="goal formula (default n)")
        sp.add_argument("--budget", type=int, default=1, help="maximum Comm◇ steps per xleft (default 1)")
        sp.add_argument("--brackets", help="explicit bracketing, e.g. '(man, (die, ((de, hond), bijt)))'")
        common(sp)
        if name == "interpret":
            sp.add_argument("--weights", nargs="+", help="reading weights (default uniform)")
            sp.add_argument("--explicit-sum", action="store_true",
                            help="evaluate abstractions as explicit basis sums (reference mode)")
        sp.set_defaults(func=func)

    sp = sub.add_parser("check", help="verify a derivation file (text or JSON)")
    sp.add_argument("file", help="derivation file, or - for stdin")
    sp.add_argument("--max-comm", type=int, default=None, help="reject xleft steps above this index")
    common(sp, lexicon=False)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("expand", help="expand every xleft step into primitive rules")
    sp.add_argument("file", help="derivation file, or - for stdin")
    common(sp, lexicon=False)
    sp.set_defaults(func=cmd_expand)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "words", None) == [] and not getattr(args, "brackets", None):
        print("spinlambek: error: no phrase given", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except (SpinLambekError, ValueError, OSError) as e:
        print(f"spinlambek: error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
