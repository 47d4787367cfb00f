"""Natural-deduction derivations for NL◇: checking, search, xleft expansion, serialization."""

from __future__ import annotations

import enum
import itertools
import json
import re
from dataclasses import dataclass, field
from typing import Iterator

from .errors import (DerivationFormatError, EmptyAntecedent, InvalidInference,
                     SpinLambekError)
from .syntax import (Box, Bracket, Dia, Formula, Leaf, LeftDiv, Node, Path, RightDiv,
                     Structure, check_linear, find_leaf, format_formula, format_structure,
                     is_dia_box, is_modal, leaves, parse_formula, parse_structure,
                     positions, replace_at, subterm)


class Rule(enum.Enum):
    AX = "Ax"
    ER = "ER"          # E/
    EL = "EL"          # E\
    IR = "IR"          # I/
    IL = "IL"          # I\
    EBOX = "EBox"
    IBOX = "IBox"
    EDIA = "EDia"
    IDIA = "IDia"
    ASS = "AssDia"
    COMM = "CommDia"
    XLEFT = "XLeft"


@dataclass(frozen=True)
class Sequent:
    antecedent: Structure
    succedent: Formula

    def __str__(self) -> str:
        return f"{format_structure(self.antecedent)} |- {format_formula(self.succedent)}"

    def pretty(self) -> str:
        return f"{format_structure(self.antecedent, True)} ⊢ {format_formula(self.succedent, True)}"


@dataclass(frozen=True)
class Derivation:
    """A proof tree node.

    ``var`` names the variable a rule binds (IR, IL, XLeft) or the bracketed
    hypothesis it discharges (EDia); ``hyp`` is the extracted hypothesis of
    XLeft and ``n`` its Comm◇ count.
    """
    rule: Rule
    conclusion: Sequent
    premises: tuple["Derivation", ...] = ()
    var: str | None = None
    hyp: str | None = None
    n: int | None = None

    def __iter__(self) -> Iterator["Derivation"]:
        yield self
        for p in self.premises:
            yield from p

    def xleft_indices(self) -> tuple[int, ...]:
        return tuple(d.n for d in self if d.rule is Rule.XLEFT)

    def size(self) -> int:
        return sum(1 for _ in self)


def axiom(leaf: Leaf) -> Derivation:
    return Derivation(Rule.AX, Sequent(leaf, leaf.formula))


@dataclass(frozen=True)
class SearchBudget:
    max_comm: int = 1
    max_depth: int = 32
    max_derivations: int = 1000

    def __post_init__(self):
        if self.max_comm < 0 or self.max_depth < 1 or self.max_derivations < 1:
            raise ValueError("invalid search budget")

    def validate(self, spin_levels: int) -> None:
        if self.max_comm + 1 > spin_levels:
            raise ValueError(f"max_comm={self.max_comm} needs at least {self.max_comm + 1} spin levels, "
                             f"have {spin_levels}")


# ---------------------------------------------------------------- checking

def _fail(path, expected):
    raise InvalidInference(tuple(path), expected)


def _ass_redexes(s: Structure):
    """(path, rewritten) for every (⟨Δ1⟩·Δ2)·Δ3 → ⟨Δ1⟩·(Δ2·Δ3)."""
    for path, sub in positions(s):
        if (isinstance(sub, Node) and isinstance(sub.left, Node)
                and isinstance(sub.left.left, Bracket)):
            new = Node(sub.left.left, Node(sub.left.right, sub.right))
            yield path, replace_at(s, path, new)


def _comm_redexes(s: Structure):
    """(path, rewritten) for every Δ2·(⟨Δ1⟩·Δ3) → ⟨Δ1⟩·(Δ2·Δ3)."""
    for path, sub in positions(s):
        if (isinstance(sub, Node) and isinstance(sub.right, Node)
                and isinstance(sub.right.left, Bracket)):
            new = Node(sub.right.left, Node(sub.left, sub.right.right))
            yield path, replace_at(s, path, new)


def xleft_path(s: Structure, hyp: str) -> tuple[Path, int] | None:
    """Locate (y·Δ) for hypothesis leaf y; return its path and the Comm◇ count.

    Each ancestor where the path turns right costs one Comm◇ step; turning
    left costs an Ass◇ step.  Brackets on the path block the relocation.
    """
    p = find_leaf(s, hyp)
    if p is None or not p or p[-1] != 0:
        return None
    parent = p[:-1]
    node = s
    for step in parent:
        if not isinstance(node, Node):
            return None
        node = node.left if step == 0 else node.right
    if not isinstance(node, Node):
        return None
    return parent, sum(parent)


def check(d: Derivation, max_comm: int | None = None) -> Sequent:
    """Verify every inference of d and return its root sequent."""
    _check(d, (), max_comm)
    return d.conclusion


def _check(d: Derivation, path: tuple, max_comm) -> None:
    for i, p in enumerate(d.premises):
        _check(p, path + (i,), max_comm)
    concl = d.conclusion
    check_linear(concl.antecedent)
    ant, succ = concl.antecedent, concl.succedent
    prem = [p.conclusion for p in d.premises]

    def arity(k):
        if len(prem) != k:
            _fail(path, f"{d.rule.value} with {k} premise(s)")

    r = d.rule
    if r is Rule.AX:
        arity(0)
        if not (isinstance(ant, Leaf) and ant.formula == succ):
            _fail(path, "x:A ⊢ A")
    elif r is Rule.ER:
        arity(2)
        f = prem[0].succedent
        if not (isinstance(f, RightDiv) and f.left == succ and f.right == prem[1].succedent
                and ant == Node(prem[0].antecedent, prem[1].antecedent)):
            _fail(path, "Γ ⊢ B/A and Δ ⊢ A give Γ·Δ ⊢ B")
    elif r is Rule.EL:
        arity(2)
        f = prem[1].succedent
        if not (isinstance(f, LeftDiv) and f.right == succ and f.left == prem[0].succedent
                and ant == Node(prem[0].antecedent, prem[1].antecedent)):
            _fail(path, "Γ ⊢ A and Δ ⊢ A\\B give Γ·Δ ⊢ B")
    elif r is Rule.IR:
        arity(1)
        pa = prem[0].antecedent
        if not (isinstance(succ, RightDiv) and isinstance(pa, Node) and isinstance(pa.right, Leaf)
                and pa.right.var == d.var and pa.right.formula == succ.right
                and pa.left == ant and prem[0].succedent == succ.left):
            _fail(path, "Γ·x:A ⊢ B gives Γ ⊢ B/A")
    elif r is Rule.IL:
        arity(1)
        pa = prem[0].antecedent
        if not (isinstance(succ, LeftDiv) and isinstance(pa, Node) and isinstance(pa.left, Leaf)
                and pa.left.var == d.var and pa.left.formula == succ.left
                and pa.right == ant and prem[0].succedent == succ.right):
            _fail(path, "x:A·Γ ⊢ B gives Γ ⊢ A\\B")
    elif r is Rule.EBOX:
        arity(1)
        if not (prem[0].succedent == Box(succ) and ant == Bracket(prem[0].antecedent)):
            _fail(path, "Γ ⊢ □B gives ⟨Γ⟩ ⊢ B")
    elif r is Rule.IBOX:
        arity(1)
        if not (succ == Box(prem[0].succedent) and prem[0].antecedent == Bracket(ant)):
            _fail(path, "⟨Γ⟩ ⊢ B gives Γ ⊢ □B")
    elif r is Rule.IDIA:
        arity(1)
        if not (succ == Dia(prem[0].succedent) and ant == Bracket(prem[0].antecedent)):
            _fail(path, "Γ ⊢ B gives ⟨Γ⟩ ⊢ ◇B")
    elif r is Rule.EDIA:
        arity(2)
        minor, major = prem
        if not isinstance(minor.succedent, Dia) or major.succedent != succ:
            _fail(path, "Δ ⊢ ◇A and Γ[⟨x:A⟩] ⊢ B give Γ[Δ] ⊢ B")
        p = find_leaf(major.antecedent, d.var or "")
        ok = (p is not None and len(p) >= 1
              and subterm(major.antecedent, p[:-1]) == Bracket(Leaf(d.var, minor.succedent.inner))
              and replace_at(major.antecedent, p[:-1], minor.antecedent) == ant)
        if not ok:
            _fail(path, "Δ ⊢ ◇A and Γ[⟨x:A⟩] ⊢ B give Γ[Δ] ⊢ B")
    elif r is Rule.ASS:
        arity(1)
        if not (prem[0].succedent == succ
                and any(new == ant for _, new in _ass_redexes(prem[0].antecedent))):
            _fail(path, "Γ[(⟨Δ1⟩·Δ2)·Δ3] gives Γ[⟨Δ1⟩·(Δ2·Δ3)]")
    elif r is Rule.COMM:
        arity(1)
        if not (prem[0].succedent == succ
                and any(new == ant for _, new in _comm_redexes(prem[0].antecedent))):
            _fail(path, "Γ[Δ2·(⟨Δ1⟩·Δ3)] gives Γ[⟨Δ1⟩·(Δ2·Δ3)]")
    elif r is Rule.XLEFT:
        arity(1)
        expected = "Γ[y:A·Δ] ⊢ B gives Γ[Δ] ⊢ ◇□A\\B with n Comm◇ steps"
        if d.n is None or d.n < 0 or (max_comm is not None and d.n > max_comm):
            _fail(path, f"XLeft index within 0..{max_comm}")
        if not (isinstance(succ, LeftDiv) and is_dia_box(succ.left)
                and prem[0].succedent == succ.right and d.hyp and d.var):
            _fail(path, expected)
        pa = prem[0].antecedent
        located = xleft_path(pa, d.hyp)
        if located is None:
            _fail(path, expected)
        node_path, n = located
        node = subterm(pa, node_path)
        if not (node.left.formula == succ.left.inner.inner and n == d.n
                and replace_at(pa, node_path, node.right) == ant
                and d.var not in {leaf.var for leaf in leaves(pa)}):
            _fail(path, expected)
    else:  # pragma: no cover
        _fail(path, "a known rule")


# ---------------------------------------------------------------- search

@dataclass
class SearchResult:
    derivations: list[Derivation]
    truncated: bool = False

    def __iter__(self):
        return iter(self.derivations)

    def __len__(self) -> int:
        return len(self.derivations)

    def __getitem__(self, i):
        return self.derivations[i]


class _Search:
    def __init__(self, antecedent: Structure, budget: SearchBudget):
        self.budget = budget
        self.truncated = False
        self.taken = {leaf.var for leaf in leaves(antecedent)}
        self.counter = itertools.count(1)

    def fresh(self) -> tuple[str, str]:
        while True:
            k = next(self.counter)
            h, x = f"h{k}", f"x{k}"
            if h not in self.taken and x not in self.taken:
                self.taken |= {h, x}
                return h, x

    def check(self, g: Structure, c: Formula, depth: int) -> list[Derivation]:
        if depth > self.budget.max_depth:
            self.truncated = True
            return []
        out: list[Derivation] = []
        concl = Sequent(g, c)
        if isinstance(c, LeftDiv) and is_dia_box(c.left):
            out += self.xleft(g, c, depth)
        elif isinstance(c, LeftDiv) and is_modal(c.left):
            _, x = self.fresh()
            for d in self.check(Node(Leaf(x, c.left), g), c.right, depth + 1):
                out.append(Derivation(Rule.IL, concl, (d,), var=x))
        if isinstance(c, RightDiv) and is_modal(c.right):
            _, x = self.fresh()
            for d in self.check(Node(g, Leaf(x, c.right)), c.left, depth + 1):
                out.append(Derivation(Rule.IR, concl, (d,), var=x))
        if isinstance(c, Box):
            for d in self.check(Bracket(g), c.inner, depth + 1):
                out.append(Derivation(Rule.IBOX, concl, (d,)))
        if isinstance(c, Dia) and isinstance(g, Bracket):
            for d in self.check(g.inner, c.inner, depth + 1):
                out.append(Derivation(Rule.IDIA, concl, (d,)))
        out += [d for f, d in self.synth(g, depth) if f == c]
        return out

    def xleft(self, g: Structure, c: LeftDiv, depth: int) -> list[Derivation]:
        a = c.left.inner.inner
        sites = []
        for order, (path, sub) in enumerate(positions(g)):
            if any(isinstance(subterm(g, path[:k]), Bracket) for k in range(len(path))):
                continue
            n = sum(path)
            if n <= self.budget.max_comm:
                sites.append((n, order, path, sub))
        sites.sort(key=lambda s: (s[0], s[1]))
        out = []
        for n, _, path, sub in sites:
            y, x = self.fresh()
            premise = replace_at(g, path, Node(Leaf(y, a), sub))
            for d in self.check(premise, c.right, depth + 1):
                out.append(Derivation(Rule.XLEFT, Sequent(g, c), (d,), var=x, hyp=y, n=n))
        return out

    def synth(self, g: Structure, depth: int) -> list[tuple[Formula, Derivation]]:
        if depth > self.budget.max_depth:
            self.truncated = True
            return []
        if isinstance(g, Leaf):
            return [(g.formula, axiom(g))]
        out = []
        if isinstance(g, Node):
            for f, d1 in self.synth(g.left, depth + 1):
                if isinstance(f, RightDiv):
                    for d2 in self.check(g.right, f.right, depth + 1):
                        out.append((f.left, Derivation(Rule.ER, Sequent(g, f.left), (d1, d2))))
            for f, d2 in self.synth(g.right, depth + 1):
                if isinstance(f, LeftDiv):
                    for d1 in self.check(g.left, f.left, depth + 1):
                        out.append((f.right, Derivation(Rule.EL, Sequent(g, f.right), (d1, d2))))
        else:
            for f, d in self.synth(g.inner, depth + 1):
                if isinstance(f, Box):
                    out.append((f.inner, Derivation(Rule.EBOX, Sequent(g, f.inner), (d,))))
        return out


def prove(antecedent: Structure, goal: Formula, budget: SearchBudget | None = None) -> SearchResult:
    """All normal derivations of antecedent ⊢ goal within the budget.

    Ordered by the XLeft indices met in pre-order (lower first), then by
    discovery order, which follows the premises left to right.
    """
    budget = budget or SearchBudget()
    check_linear(antecedent)
    search = _Search(antecedent, budget)
    found = search.check(antecedent, goal, 0)
    taken = {leaf.var for leaf in leaves(antecedent)}
    unique = list(dict.fromkeys(_renumber(d, taken) for d in found))
    unique.sort(key=lambda d: d.xleft_indices())
    truncated = search.truncated
    if len(unique) > budget.max_derivations:
        unique = unique[:budget.max_derivations]
        truncated = True
    return SearchResult(unique, truncated)


def _rename_structure(s: Structure, names: dict[str, str]) -> Structure:
    if isinstance(s, Leaf):
        return Leaf(names.get(s.var, s.var), s.formula)
    if isinstance(s, Node):
        return Node(_rename_structure(s.left, names), _rename_structure(s.right, names))
    return Bracket(_rename_structure(s.inner, names))


def _renumber(d: Derivation, taken: set[str]) -> Derivation:
    """Rename search-generated variables to h1/x1, h2/x2, ... in pre-order."""
    names: dict[str, str] = {}
    counter = itertools.count(1)
    for node in d:
        fresh = [v for v in (node.hyp, node.var) if v is not None and v not in names]
        if not fresh:
            continue
        while True:
            k = next(counter)
            h, x = f"h{k}", f"x{k}"
            if h not in taken and x not in taken:
                break
        if node.hyp is not None and node.hyp not in names:
            names[node.hyp] = h
        if node.var is not None and node.var not in names:
            names[node.var] = x

    def walk(node: Derivation) -> Derivation:
        seq = Sequent(_rename_structure(node.conclusion.antecedent, names), node.conclusion.succedent)
        return Derivation(node.rule, seq, tuple(walk(p) for p in node.premises),
                          names.get(node.var, node.var), names.get(node.hyp, node.hyp), node.n)

    return walk(d)


# ---------------------------------------------------------------- xleft expansion

def _map_antecedents(d: Derivation, fn) -> Derivation:
    return Derivation(d.rule, Sequent(fn(d.conclusion.antecedent), d.conclusion.succedent),
                      tuple(_map_antecedents(p, fn) for p in d.premises), d.var, d.hyp, d.n)


def _bracket_leaf(s: Structure, var: str, new: Structure) -> Structure:
    if isinstance(s, Leaf):
        return new if s.var == var else s
    if isinstance(s, Node):
        return Node(_bracket_leaf(s.left, var, new), _bracket_leaf(s.right, var, new))
    return Bracket(_bracket_leaf(s.inner, var, new))


def _box_hypothesis(d: Derivation, y: str, a: Formula) -> Derivation:
    """Turn the hypothesis y:A into ⟨y:□A⟩ throughout, with E□ over a □A axiom."""
    boxed = Leaf(y, Box(a))
    if d.rule is Rule.AX and d.conclusion.antecedent == Leaf(y, a):
        return Derivation(Rule.EBOX, Sequent(Bracket(boxed), a), (axiom(boxed),))
    premises = tuple(_box_hypothesis(p, y, a) for p in d.premises)
    ant = _bracket_leaf(d.conclusion.antecedent, y, Bracket(boxed))
    return Derivation(d.rule, Sequent(ant, d.conclusion.succedent), premises, d.var, d.hyp, d.n)


def expand_xleft(d: Derivation) -> Derivation:
    """Replace every XLeft(n) by I\\ over E◇ over the Ass◇/Comm◇ chain over E□ over Ax."""
    premises = tuple(expand_xleft(p) for p in d.premises)
    if d.rule is not Rule.XLEFT:
        return Derivation(d.rule, d.conclusion, premises, d.var, d.hyp, d.n)
    (body,) = premises
    y, x = d.hyp, d.var
    goal = d.conclusion.succedent
    dia_box, b = goal.left, goal.right
    a = dia_box.inner.inner
    current = _box_hypothesis(body, y, a)
    s = current.conclusion.antecedent
    node_path, _ = xleft_path(body.conclusion.antecedent, y)
    # bubble ⟨y⟩ up from its node to the root
    for k in range(len(node_path) - 1, -1, -1):
        parent_path = node_path[:k]
        parent = subterm(s, parent_path)
        if node_path[k] == 0:       # (⟨z⟩·X)·Y → ⟨z⟩·(X·Y)
            new, rule = Node(parent.left.left, Node(parent.left.right, parent.right)), Rule.ASS
        else:                       # Y·(⟨z⟩·X) → ⟨z⟩·(Y·X)
            new, rule = Node(parent.right.left, Node(parent.left, parent.right.right)), Rule.COMM
        s = replace_at(s, parent_path, new)
        current = Derivation(rule, Sequent(s, b), (current,))
    xleaf = Leaf(x, dia_box)
    edia = Derivation(Rule.EDIA, Sequent(Node(xleaf, s.right), b), (axiom(xleaf), current), var=y)
    return Derivation(Rule.IL, d.conclusion, (edia,), var=x)


# ---------------------------------------------------------------- serialization

def _params(d: Derivation) -> str:
    out = ""
    if d.rule is Rule.XLEFT:
        out += f"({d.n}) y={d.hyp}"
    if d.var is not None:
        out += f" x={d.var}"
    return out


def to_text(d: Derivation, indent: int = 0) -> str:
    """Indented text: one ``[Rule params] antecedent |- succedent`` line per node."""
    lines = []

    def walk(node: Derivation, depth: int):
        lines.append(f"{'  ' * depth}[{node.rule.value}{_params(node)}] {node.conclusion}")
        for p in node.premises:
            walk(p, depth + 1)

    walk(d, indent)
    return "\n".join(lines) + "\n"


def format_tree(d: Derivation) -> str:
    """Indented display with ◇, □, ⟨⟩ and ⊢ (not re-parseable)."""
    lines = []

    def walk(node: Derivation, depth: int):
        tag = node.rule.value + (f"({node.n})" if node.rule is Rule.XLEFT else "")
        lines.append(f"{'  ' * depth}{tag:<10} {node.conclusion.pretty()}")
        for p in node.premises:
            walk(p, depth + 1)

    walk(d, 0)
    return "\n".join(lines)


_LINE = re.compile(r"^(?P<indent> *)\[(?P<rule>\w+)(?:\((?P<n>\d+)\))?(?P<params>(?: +\w+=\S+)*)\] +(?P<seq>.*)$")


def _parse_sequent(text: str, line: int | None = None) -> Sequent:
    ant, sep, succ = text.rpartition("|-")
    if not sep:
        raise DerivationFormatError("missing '|-' in sequent", line)
    try:
        return Sequent(parse_structure(ant, atoms=None), parse_formula(succ.strip(), atoms=None))
    except SpinLambekError as e:
        raise DerivationFormatError(str(e), line) from e


def _make(rule_tag: str, seq: Sequent, premises, params: dict, n, line=None) -> Derivation:
    try:
        rule = Rule(rule_tag)
    except ValueError:
        raise DerivationFormatError(f"unknown rule {rule_tag!r}", line) from None
    return Derivation(rule, seq, tuple(premises), params.get("x"), params.get("y"),
                      None if n is None else int(n))


def from_text(text: str) -> Derivation:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        m = _LINE.match(raw.rstrip())
        if not m:
            raise DerivationFormatError("malformed derivation line", lineno)
        width = len(m.group("indent"))
        if width % 2:
            raise DerivationFormatError("indentation must be a multiple of two spaces", lineno)
        params = dict(p.split("=", 1) for p in m.group("params").split())
        rows.append((width // 2, m.group("rule"), m.group("n"), params,
                     _parse_sequent(m.group("seq"), lineno), lineno))
    if not rows:
        raise EmptyAntecedent("no derivation lines")
    pos = 0

    def build(depth: int) -> Derivation:
        nonlocal pos
        d, rule, n, params, seq, lineno = rows[pos]
        if d != depth:
            raise DerivationFormatError(f"unexpected indentation depth {d}", lineno)
        pos += 1
        premises = []
        while pos < len(rows) and rows[pos][0] > depth:
            premises.append(build(depth + 1))
        return _make(rule, seq, premises, params, n, lineno)

    root = build(rows[0][0])
    if pos != len(rows):
        raise DerivationFormatError("more than one root", rows[pos][5])
    return root


def to_dict(d: Derivation) -> dict:
    out = {"rule": d.rule.value,
           "antecedent": format_structure(d.conclusion.antecedent),
           "succedent": format_formula(d.conclusion.succedent)}
    if d.n is not None:
        out["n"] = d.n
    if d.hyp is not None:
        out["hyp"] = d.hyp
    if d.var is not None:
        out["var"] = d.var
    out["premises"] = [to_dict(p) for p in d.premises]
    return out


def from_dict(obj: dict) -> Derivation:
    try:
        seq = _parse_sequent(f"{obj['antecedent']} |- {obj['succedent']}")
        params = {"x": obj.get("var"), "y": obj.get("hyp")}
        return _make(obj["rule"], seq, [from_dict(p) for p in obj.get("premises", [])],
                     params, obj.get("n"))
    except (KeyError, TypeError) as e:
        raise DerivationFormatError(f"malformed derivation record: {e}") from e


def loads(text: str) -> Derivation:
    """Read either serialization (JSON is recognized by a leading brace)."""
    if text.lstrip().startswith("{"):
        try:
            return from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise DerivationFormatError(str(e), e.lineno) from e
    return from_text(text)
