"""End-to-end run: words → structures → derivations → terms → interpretations → report."""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .deduction import Derivation, SearchBudget, prove, to_dict, to_text
from .errors import LengthMismatch, ParseError, ReadingError, UnknownWord
from .lexicon import Lexicon
from .semantics import AmbiguousMeaning, Interpretation, ambiguous_sum, evaluate_all
from .spin import eigenstate_level
from .syntax import (Formula, Leaf, Node, Structure, format_formula, format_words, leaves,
                     parse_structure)
from .tensor import validate_density
from .terms import Term, extract_term, format_term, normalize

MAX_ENUMERATED_WORDS = 9
DEFAULT_SPIN_TOL = 1e-9
SCHEMA = "spinlambek.report/1"


def reporting_tolerance() -> float:
    raw = os.environ.get("LAMBEK_SPIN_TOL")
    if raw is None or not raw.strip():
        return DEFAULT_SPIN_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise ValueError(f"LAMBEK_SPIN_TOL must be a number, got {raw!r}") from None
    if not tol > 0:
        raise ValueError("LAMBEK_SPIN_TOL must be positive")
    return tol


# ---------------------------------------------------------------- structures

def leaf_names(words: Sequence[str]) -> list[str]:
    """The words as variable names, repeats suffixed _2, _3, ..."""
    seen: dict[str, int] = {}
    out = []
    for w in words:
        seen[w] = seen.get(w, 0) + 1
        out.append(w if seen[w] == 1 else f"{w}_{seen[w]}")
    return out


def bracketings(items: Sequence[Structure]) -> Iterator[Structure]:
    """Every binary tree with the given leaves in order (Catalan many)."""
    if len(items) == 1:
        yield items[0]
        return
    for k in range(1, len(items)):
        for left in bracketings(items[:k]):
            for right in bracketings(items[k:]):
                yield Node(left, right)


def phrase_structures(words: Sequence[str], lexicon: Lexicon,
                      brackets: str | None = None) -> list[Structure]:
    for w in words:
        if w not in lexicon:
            raise UnknownWord(w)
    if brackets is not None:
        return [bracketed_structure(brackets, lexicon)]
    if not words:
        raise ParseError("empty phrase")
    if len(words) > MAX_ENUMERATED_WORDS:
        raise ParseError(f"phrases over {MAX_ENUMERATED_WORDS} words need an explicit bracketing")
    items = [Leaf(name, lexicon[w].type) for name, w in zip(leaf_names(words), words)]
    return list(bracketings(items))


_BARE_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_'\-]*")


def bracketed_structure(text: str, lexicon: Lexicon) -> Structure:
    """Parse a bracketing such as ``(man, (die, ((de, hond), bijt)))`` over lexicon words.

    Leaves are bare words; their types come from the lexicon.
    """
    words = bracket_words(text)
    for w in words:
        if w not in lexicon:
            raise UnknownWord(w)
    names = iter(leaf_names(words))
    word_of: dict[str, str] = {}

    def rename(m: re.Match) -> str:
        name = next(names)
        word_of[name] = m.group(0)
        return name

    renamed = _BARE_WORD.sub(rename, text)
    return parse_structure(renamed, lookup=lambda name: lexicon[word_of[name]].type)


def bracket_words(text: str) -> list[str]:
    return _BARE_WORD.findall(text)


# ---------------------------------------------------------------- run

@dataclass(frozen=True)
class Reading:
    id: int
    structure: Structure
    derivation: Derivation
    term: Term
    normal_form: Term
    interpretation: Interpretation
    weight: float


@dataclass
class Report:
    words: list[str]
    goal: Formula
    budget: SearchBudget
    explicit_sum: bool
    structures_tried: int
    readings: list[Reading]
    meaning: AmbiguousMeaning | None
    truncated: bool = False
    lexicon_warnings: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 0 if self.readings else 2


def find_derivations(words: Sequence[str], goal: Formula, budget: SearchBudget, lexicon: Lexicon,
                     brackets: str | None = None) -> tuple[list[tuple[Structure, Derivation]], int, bool]:
    budget.validate(lexicon.space.spin_levels)
    structures = phrase_structures(words, lexicon, brackets)
    found, truncated = [], False
    for s in structures:
        res = prove(s, goal, budget)
        truncated |= res.truncated
        found += [(s, d) for d in res.derivations]
    found.sort(key=lambda sd: sd[1].xleft_indices())
    return found, len(structures), truncated


def run(words: Sequence[str], goal: Formula, budget: SearchBudget | None = None,
        weights: Sequence[float] | None = None, lexicon: Lexicon | None = None,
        brackets: str | None = None, explicit_sum: bool = False) -> Report:
    """Parse, prove, extract and interpret a phrase; collect the readings."""
    from .lexicon import default_lexicon_path, load_lexicon
    lexicon = lexicon or load_lexicon(default_lexicon_path())
    budget = budget or SearchBudget()
    words = list(words)
    if brackets is not None:
        words = bracket_words(brackets)
    found, tried, truncated = find_derivations(words, goal, budget, lexicon, brackets)
    if weights and len(weights) != len(found):
        raise LengthMismatch(f"{len(weights)} weights for {len(found)} readings")

    terms = [extract_term(d) for _, d in found]
    # every candidate structure has the same leaves, so one assignment serves all readings
    g = {name: lexicon.interpretation(w) for name, w in zip(leaf_names(words), words)}
    values = evaluate_all(terms, g, lexicon.model, explicit_sum)
    for i, v in enumerate(values):
        if isinstance(v, Exception):
            raise ReadingError(i, v) from v

    meaning = ambiguous_sum(values, weights, range(len(values))) if values else None
    readings = [Reading(i, s, d, t, normalize(t), v, meaning.weights[i])
                for i, ((s, d), t, v) in enumerate(zip(found, terms, values))]
    return Report(words, goal, budget, explicit_sum, tried, readings, meaning, truncated,
                  list(lexicon.warnings))


# ---------------------------------------------------------------- serialization

def complex_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def _chop(m: np.ndarray, tol: float) -> np.ndarray:
    m = np.array(m, dtype=complex)
    re_, im = m.real.copy(), m.imag.copy()
    re_[np.abs(re_) < tol] = 0.0
    im[np.abs(im) < tol] = 0.0
    return re_ + 1j * im


def report_to_dict(report: Report, tol: float | None = None) -> dict:
    tol = reporting_tolerance() if tol is None else tol
    readings = []
    for r in report.readings:
        sp = r.interpretation.spatial
        raw = sp.matrix()
        tr = complex(np.trace(raw))
        normalized = raw / tr if abs(tr) > 1e-300 else raw
        readings.append({
            "id": r.id,
            "structure": format_words(r.structure),
            "xleft_indices": list(r.derivation.xleft_indices()),
            "derivation": {"text": to_text(r.derivation), "tree": to_dict(r.derivation)},
            "term": format_term(r.term),
            "term_ascii": format_term(r.term, ascii=True),
            "normal_form": format_term(r.normal_form),
            "spatial": {
                "signature": [str(s.factor) for s in sp.slots],
                "dims": list(sp.dims),
                "matrix": complex_matrix(raw),
                "trace": [tr.real, tr.imag],
                "normalized": complex_matrix(normalized),
                "density_check": validate_density(normalized).passed,
            },
            "spin": {
                "matrix": complex_matrix(r.interpretation.spin),
                "eigenstate": eigenstate_level(r.interpretation.spin, tol),
                "density_check": validate_density(r.interpretation.spin).passed,
            },
            "weight": r.weight,
        })
    doc = {
        "schema": SCHEMA,
        "phrase": list(report.words),
        "goal": format_formula(report.goal),
        "budget": {"max_comm": report.budget.max_comm, "max_depth": report.budget.max_depth,
                   "max_derivations": report.budget.max_derivations},
        "lambda_mode": "explicit" if report.explicit_sum else "lazy",
        "structures_tried": report.structures_tried,
        "truncated": report.truncated,
        "warnings": list(report.lexicon_warnings),
        "readings": readings,
    }
    if report.meaning is not None:
        doc["weights"] = list(report.meaning.weights)
        doc["spin_overlaps"] = report.meaning.spin_overlaps().tolist()
        ds = report.meaning.direct_sum()
        doc["direct_sum"] = {"dimension": int(ds.shape[0]), "matrix": complex_matrix(ds)}
    return doc


def report_to_json(report: Report, tol: float | None = None) -> str:
    return json.dumps(report_to_dict(report, tol), indent=2, ensure_ascii=False) + "\n"


def format_matrix(m: np.ndarray, tol: float, indent: str = "    ") -> str:
    m = _chop(m, tol)
    real = not np.any(m.imag)

    def cell(z: complex) -> str:
        if real:
            return f"{z.real: .6f}"
        return f"{z.real: .6f}{z.imag:+.6f}i"

    return "\n".join(indent + "[" + "  ".join(cell(z) for z in row) + "]" for row in m)


def report_to_text(report: Report, tol: float | None = None) -> str:
    tol = reporting_tolerance() if tol is None else tol
    out = [f"phrase: {' '.join(report.words)}",
           f"goal: {format_formula(report.goal)}   budget: maxComm={report.budget.max_comm}"
           f"   lambda mode: {'explicit' if report.explicit_sum else 'lazy'}",
           f"readings: {len(report.readings)} (from {report.structures_tried} bracketing(s))"]
    if report.truncated:
        out.append("warning: search was truncated by the depth or derivation limit")
    out += [f"warning: {w}" for w in report.lexicon_warnings]
    for r in report.readings:
        sp = r.interpretation.spatial
        tr = complex(np.trace(sp.matrix()))
        level = eigenstate_level(r.interpretation.spin, tol)
        out += ["", f"reading {r.id}  (weight {r.weight:.6g}, xleft {list(r.derivation.xleft_indices())})",
                f"  structure: {format_words(r.structure)}",
                "  derivation:", to_text(r.derivation, indent=2).rstrip("\n"),
                f"  term: {format_term(r.term)}",
                f"  normal form: {format_term(r.normal_form)}",
                f"  spatial {[str(s.factor) for s in sp.slots]}, trace {tr.real:.6g}:",
                format_matrix(sp.matrix(), tol),
                "  spin" + (f" (eigenstate |{level}⟩⟨{level}|)" if level is not None else "") + ":",
                format_matrix(r.interpretation.spin, tol)]
    if report.meaning is not None and len(report.readings) > 1:
        out += ["", "spin overlaps Tr(ρi ρj):", format_matrix(report.meaning.spin_overlaps(), tol)]
    return "\n".join(out) + "\n"


__all__ = ["Reading", "Report", "run", "find_derivations", "bracketings", "phrase_structures",
           "bracketed_structure", "leaf_names", "report_to_dict", "report_to_json", "report_to_text",
           "reporting_tolerance"]
