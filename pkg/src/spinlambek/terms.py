"""Directional lambda terms labelling NL◇ proofs."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Union

from .deduction import Derivation, Rule
from .syntax import Formula


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class LamR:
    """λʳx.t; ``ty`` optionally records the bound variable's formula."""
    var: str
    body: "Term"
    ty: Formula | None = field(default=None, compare=False)


@dataclass(frozen=True)
class LamL:
    """λˡx.t"""
    var: str
    body: "Term"
    ty: Formula | None = field(default=None, compare=False)


@dataclass(frozen=True)
class AppR:
    """t ◁ u: function on the left."""
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True)
class AppL:
    """u ▷ t: function on the right."""
    arg: "Term"
    fun: "Term"


@dataclass(frozen=True)
class Cup:
    body: "Term"


@dataclass(frozen=True)
class Cap:
    body: "Term"


@dataclass(frozen=True)
class Vee:
    body: "Term"


@dataclass(frozen=True)
class Wedge:
    body: "Term"


@dataclass(frozen=True)
class Comm:
    body: "Term"
    count: int = 1

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("Comm count must be at least 1")


@dataclass(frozen=True)
class And:
    left: "Term"
    right: "Term"


Term = Union[Var, Const, LamR, LamL, AppR, AppL, Cup, Cap, Vee, Wedge, Comm, And]
UNARY = (Cup, Cap, Vee, Wedge)
LAMBDAS = (LamR, LamL)


def comm(t: Term, n: int) -> Term:
    """ᶜⁿt with ᶜ⁰t = t and stacked markers merged."""
    if n == 0:
        return t
    if isinstance(t, Comm):
        return Comm(t.body, t.count + n)
    return Comm(t, n)


# ---------------------------------------------------------------- variables

def free_vars(t: Term) -> Counter:
    """Free variable occurrences (constants excluded)."""
    if isinstance(t, Var):
        return Counter({t.name: 1})
    if isinstance(t, Const):
        return Counter()
    if isinstance(t, LAMBDAS):
        c = free_vars(t.body)
        c.pop(t.var, None)
        return c
    if isinstance(t, AppR):
        return free_vars(t.fun) + free_vars(t.arg)
    if isinstance(t, AppL):
        return free_vars(t.arg) + free_vars(t.fun)
    if isinstance(t, And):
        return free_vars(t.left) + free_vars(t.right)
    return free_vars(t.body)


def all_names(t: Term) -> set[str]:
    if isinstance(t, (Var, Const)):
        return {t.name}
    if isinstance(t, LAMBDAS):
        return {t.var} | all_names(t.body)
    if isinstance(t, AppR):
        return all_names(t.fun) | all_names(t.arg)
    if isinstance(t, AppL):
        return all_names(t.arg) | all_names(t.fun)
    if isinstance(t, And):
        return all_names(t.left) | all_names(t.right)
    return all_names(t.body)


def is_linear(t: Term) -> bool:
    """Every variable, bound or free, occurs exactly once in its scope."""
    if any(k > 1 for k in free_vars(t).values()):
        return False

    def walk(u: Term) -> bool:
        if isinstance(u, LAMBDAS):
            return free_vars(u.body).get(u.var, 0) == 1 and walk(u.body)
        if isinstance(u, AppR):
            return walk(u.fun) and walk(u.arg)
        if isinstance(u, AppL):
            return walk(u.arg) and walk(u.fun)
        if isinstance(u, And):
            return walk(u.left) and walk(u.right)
        if isinstance(u, (Var, Const)):
            return True
        return walk(u.body)

    return walk(t)


def _fresh(base: str, avoid: set[str]) -> str:
    stem = base.rstrip("0123456789'") or "v"
    for k in itertools.count(1):
        name = f"{stem}{k}"
        if name not in avoid:
            return name


def substitute(t: Term, x: str, u: Term) -> Term:
    """t[x := u], renaming binders that would capture free variables of u."""
    if isinstance(t, Var):
        return u if t.name == x else t
    if isinstance(t, Const):
        return t
    if isinstance(t, LAMBDAS):
        if t.var == x:
            return t
        body, var = t.body, t.var
        if var in free_vars(u) and x in free_vars(body):
            var = _fresh(var, all_names(body) | all_names(u) | {x})
            body = substitute(body, t.var, Var(var))
        return type(t)(var, substitute(body, x, u), t.ty)
    if isinstance(t, AppR):
        return AppR(substitute(t.fun, x, u), substitute(t.arg, x, u))
    if isinstance(t, AppL):
        return AppL(substitute(t.arg, x, u), substitute(t.fun, x, u))
    if isinstance(t, And):
        return And(substitute(t.left, x, u), substitute(t.right, x, u))
    if isinstance(t, Comm):
        return Comm(substitute(t.body, x, u), t.count)
    return type(t)(substitute(t.body, x, u))


# ---------------------------------------------------------------- reduction

def normalize(t: Term) -> Term:
    """Normal form under left/right beta, ∪∩ and ∨∧ cancellation, and ᶜ merging."""
    if isinstance(t, (Var, Const)):
        return t
    if isinstance(t, AppL):
        arg, fun = normalize(t.arg), normalize(t.fun)
        if isinstance(fun, LamL):
            return normalize(substitute(fun.body, fun.var, arg))
        return AppL(arg, fun)
    if isinstance(t, AppR):
        fun, arg = normalize(t.fun), normalize(t.arg)
        if isinstance(fun, LamR):
            return normalize(substitute(fun.body, fun.var, arg))
        return AppR(fun, arg)
    if isinstance(t, LAMBDAS):
        return type(t)(t.var, normalize(t.body), t.ty)
    if isinstance(t, And):
        return And(normalize(t.left), normalize(t.right))
    if isinstance(t, Comm):
        return comm(normalize(t.body), t.count)
    body = normalize(t.body)
    if isinstance(t, Cup) and isinstance(body, Cap):
        return body.body
    if isinstance(t, Vee) and isinstance(body, Wedge):
        return body.body
    return type(t)(body)


def redexes(t: Term, path: tuple = ()) -> list[tuple[tuple, Term]]:
    """Every beta redex in t with its path (pre-order)."""
    out = []
    if isinstance(t, AppL) and isinstance(t.fun, LamL):
        out.append((path, t))
    if isinstance(t, AppR) and isinstance(t.fun, LamR):
        out.append((path, t))
    for i, child in enumerate(children(t)):
        out += redexes(child, path + (i,))
    return out


def contract_redex(t: Term) -> Term:
    if isinstance(t, AppL) and isinstance(t.fun, LamL):
        return substitute(t.fun.body, t.fun.var, t.arg)
    if isinstance(t, AppR) and isinstance(t.fun, LamR):
        return substitute(t.fun.body, t.fun.var, t.arg)
    raise ValueError("not a beta redex")


def reduce_step(t: Term) -> Term | None:
    """Contract the leftmost-outermost beta redex; None if there is none."""
    found = redexes(t)
    if not found:
        return None
    path, r = found[0]
    return replace_subterm(t, path, contract_redex(r))


def reduction_sequence(t: Term) -> list[Term]:
    """t and every term reached by repeated reduce_step (finite on linear terms)."""
    out = [t]
    while (nxt := reduce_step(out[-1])) is not None:
        out.append(nxt)
    return out


def replace_subterm(t: Term, path: tuple, new: Term) -> Term:
    if not path:
        return new
    kids = list(children(t))
    kids[path[0]] = replace_subterm(kids[path[0]], path[1:], new)
    return rebuild(t, kids)


def rebuild(t: Term, kids) -> Term:
    """A node like t with its children replaced."""
    if isinstance(t, LAMBDAS):
        return type(t)(t.var, kids[0], t.ty)
    if isinstance(t, AppR):
        return AppR(kids[0], kids[1])
    if isinstance(t, AppL):
        return AppL(kids[0], kids[1])
    if isinstance(t, And):
        return And(kids[0], kids[1])
    if isinstance(t, Comm):
        return Comm(kids[0], t.count)
    if isinstance(t, (Var, Const)):
        return t
    return type(t)(kids[0])


def children(t: Term) -> tuple[Term, ...]:
    if isinstance(t, (Var, Const)):
        return ()
    if isinstance(t, LAMBDAS):
        return (t.body,)
    if isinstance(t, AppR):
        return (t.fun, t.arg)
    if isinstance(t, AppL):
        return (t.arg, t.fun)
    if isinstance(t, And):
        return (t.left, t.right)
    return (t.body,)


def erase_comm(t: Term) -> Term:
    """Drop every ᶜ marker (they carry no truth-conditional content)."""
    if isinstance(t, (Var, Const)):
        return t
    if isinstance(t, Comm):
        return erase_comm(t.body)
    if isinstance(t, LAMBDAS):
        return type(t)(t.var, erase_comm(t.body), t.ty)
    if isinstance(t, AppR):
        return AppR(erase_comm(t.fun), erase_comm(t.arg))
    if isinstance(t, AppL):
        return AppL(erase_comm(t.arg), erase_comm(t.fun))
    if isinstance(t, And):
        return And(erase_comm(t.left), erase_comm(t.right))
    return type(t)(erase_comm(t.body))


def undirected(t: Term) -> Term:
    """Forget directionality: every application becomes AppR(fun, arg), every λ becomes λʳ."""
    if isinstance(t, (Var, Const)):
        return t
    if isinstance(t, LAMBDAS):
        return LamR(t.var, undirected(t.body), t.ty)
    if isinstance(t, AppR):
        return AppR(undirected(t.fun), undirected(t.arg))
    if isinstance(t, AppL):
        return AppR(undirected(t.fun), undirected(t.arg))
    if isinstance(t, And):
        return And(undirected(t.left), undirected(t.right))
    if isinstance(t, Comm):
        return Comm(undirected(t.body), t.count)
    return type(t)(undirected(t.body))


def de_bruijn(t: Term, env: tuple[str, ...] = ()):
    """Nameless form: bound variables become their binder depth."""
    if isinstance(t, Var):
        if t.name in env:
            return ("bound", env[::-1].index(t.name))
        return ("free", t.name)
    if isinstance(t, Const):
        return ("const", t.name)
    if isinstance(t, LAMBDAS):
        return (type(t).__name__, de_bruijn(t.body, env + (t.var,)))
    if isinstance(t, Comm):
        return ("Comm", t.count, de_bruijn(t.body, env))
    return (type(t).__name__,) + tuple(de_bruijn(c, env) for c in children(t))


def alpha_eq(t: Term, u: Term) -> bool:
    return de_bruijn(t) == de_bruijn(u)


# ---------------------------------------------------------------- extraction

def extract_term(d: Derivation) -> Term:
    """The Curry-Howard term of a derivation."""
    r = d.rule
    ps = d.premises
    if r is Rule.AX:
        return Var(d.conclusion.antecedent.var)
    if r is Rule.ER:
        return AppR(extract_term(ps[0]), extract_term(ps[1]))
    if r is Rule.EL:
        return AppL(extract_term(ps[0]), extract_term(ps[1]))
    if r is Rule.IR:
        return LamR(d.var, extract_term(ps[0]), d.conclusion.succedent.right)
    if r is Rule.IL:
        return LamL(d.var, extract_term(ps[0]), d.conclusion.succedent.left)
    if r is Rule.EBOX:
        return Vee(extract_term(ps[0]))
    if r is Rule.IBOX:
        return Wedge(extract_term(ps[0]))
    if r is Rule.IDIA:
        return Cap(extract_term(ps[0]))
    if r is Rule.EDIA:
        return substitute(extract_term(ps[1]), d.var, Cup(extract_term(ps[0])))
    if r is Rule.ASS:
        return extract_term(ps[0])
    if r is Rule.COMM:
        return comm(extract_term(ps[0]), 1)
    if r is Rule.XLEFT:
        body = substitute(extract_term(ps[0]), d.hyp, Vee(Cup(Var(d.var))))
        return LamL(d.var, comm(body, d.n), d.conclusion.succedent.left)
    raise ValueError(f"unknown rule {r}")


# ---------------------------------------------------------------- printing

_SUP = str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹")


def format_term(t: Term, ascii: bool = False) -> str:
    """Symbolic notation, or the ASCII fallback with ``ascii=True``."""
    f = lambda u: format_term(u, ascii)  # noqa: E731
    if isinstance(t, (Var, Const)):
        return t.name
    if isinstance(t, AppR):
        return f"({f(t.fun)} {'<|' if ascii else '◁'} {f(t.arg)})"
    if isinstance(t, AppL):
        return f"({f(t.arg)} {'|>' if ascii else '▷'} {f(t.fun)})"
    if isinstance(t, LAMBDAS):
        side = "l" if isinstance(t, LamL) else "r"
        head = f"\\{side} {t.var}." if ascii else f"λ{'ˡ' if side == 'l' else 'ʳ'}{t.var}."
        return head + f(t.body)
    if isinstance(t, And):
        return f"({f(t.left)} {'&' if ascii else '∧'} {f(t.right)})"
    if isinstance(t, Comm):
        mark = f"c^{t.count} " if ascii else "ᶜ" + str(t.count).translate(_SUP)
        return mark + _unary_operand(t.body, ascii)
    names = {Cup: ("cup", "∪"), Cap: ("cap", "∩"), Vee: ("vee", "∨"), Wedge: ("wedge", "∧")}
    word, sym = names[type(t)]
    return (word + " " if ascii else sym) + _unary_operand(t.body, ascii)


def _unary_operand(t: Term, ascii: bool) -> str:
    s = format_term(t, ascii)
    return f"({s})" if isinstance(t, LAMBDAS) else s


# ---------------------------------------------------------------- lexical programs

def die_program() -> Term:
    """The formal-semantics program for the relative pronoun.

    λx.λy.λz.((y z) ∧ (x ∩∧z)), with each abstraction and application
    oriented by the pronoun's type (n\\n)/(◇□np\\s): x is taken from the right,
    y from the left, and x consumes ∩∧z from its left.
    """
    x, y, z = Var("x"), Var("y"), Var("z")
    return LamR("x", LamL("y", LamR("z", And(AppR(y, z), AppL(Cap(Wedge(z)), x)))))
