"""Formulas, antecedent structures and the type-to-space maps.

Formulas of NL◇ are built from atoms with the two slashes and the two unary
modalities.  The ASCII surface syntax is::

    atom        identifier, drawn from the configured atom set
    A\\B         left division (argument A on the left)
    B/A         right division (argument A on the right)
    <>A         diamond
    []A         box

Prefix operators bind tighter than the slashes, chains of slashes associate
to the left, and the printer always parenthesizes binary operands.

Structures use ``(Γ, Δ)`` for the binary product and ``<Γ>`` for a bracket,
with leaves written ``x:A``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Callable, Iterator, Union

import numpy as np

from .errors import EmptyAntecedent, FormulaSyntaxError, NonLinearVariable, UnknownAtom

DEFAULT_ATOMS = frozenset({"s", "np", "n"})


# ---------------------------------------------------------------- formulas

@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class LeftDiv:
    """A\\B: consumes an A on its left to give B."""
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class RightDiv:
    """B/A: consumes an A on its right to give B."""
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Dia:
    inner: "Formula"

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Box:
    inner: "Formula"

    def __str__(self) -> str:
        return format_formula(self)


Formula = Union[Atom, LeftDiv, RightDiv, Dia, Box]


def is_modal(f: Formula) -> bool:
    """True if ◇ or □ occurs anywhere in f."""
    if isinstance(f, (Dia, Box)):
        return True
    if isinstance(f, (LeftDiv, RightDiv)):
        return is_modal(f.left) or is_modal(f.right)
    return False


def is_dia_box(f: Formula) -> bool:
    return isinstance(f, Dia) and isinstance(f.inner, Box)


# ---------------------------------------------------------------- tokens

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<sym><>|\[\]|[\\/()<>,:]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.group("ident"):
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("sym", m.group("sym"), m.start("sym")))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, atoms):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.atoms = atoms

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, sym: str) -> None:
        kind, val, pos = self.take()
        if kind != "sym" or val != sym:
            raise FormulaSyntaxError(f"expected {sym!r}, found {val or 'end of input'!r}", pos)

    def at(self, sym: str) -> bool:
        kind, val, _ = self.peek()
        return kind == "sym" and val == sym

    def finish(self) -> None:
        kind, val, pos = self.peek()
        if kind != "end":
            raise FormulaSyntaxError(f"trailing input {val!r}", pos)

    # formula := unary (('\' | '/') unary)*
    def formula(self) -> Formula:
        f = self.unary()
        while self.at("\\") or self.at("/"):
            op = self.take()[1]
            g = self.unary()
            f = LeftDiv(f, g) if op == "\\" else RightDiv(f, g)
        return f

    def unary(self) -> Formula:
        kind, val, pos = self.take()
        if kind == "sym" and val == "<>":
            return Dia(self.unary())
        if kind == "sym" and val == "[]":
            return Box(self.unary())
        if kind == "sym" and val == "(":
            f = self.formula()
            self.expect(")")
            return f
        if kind == "ident":
            if self.atoms is not None and val not in self.atoms:
                raise UnknownAtom(val)
            return Atom(val)
        raise FormulaSyntaxError(f"expected a formula, found {val or 'end of input'!r}", pos)

    # structure := leaf | '(' structure ',' structure ')' | '<' structure '>'
    def structure(self, lookup) -> "Structure":
        kind, val, pos = self.peek()
        if kind == "sym" and val == "(":
            self.take()
            left = self.structure(lookup)
            self.expect(",")
            right = self.structure(lookup)
            self.expect(")")
            return Node(left, right)
        if kind == "sym" and val == "<":
            self.take()
            inner = self.structure(lookup)
            self.expect(">")
            return Bracket(inner)
        if kind == "ident":
            self.take()
            if self.at(":"):
                self.take()
                return Leaf(val, self.formula())
            if lookup is None:
                raise FormulaSyntaxError("expected ':' after leaf variable", self.peek()[2])
            return Leaf(val, lookup(val))
        raise FormulaSyntaxError(f"expected a structure, found {val or 'end of input'!r}", pos)


def parse_formula(text: str, atoms=DEFAULT_ATOMS) -> Formula:
    """Parse the ASCII surface syntax.  ``atoms=None`` accepts any identifier."""
    p = _Parser(text, atoms)
    f = p.formula()
    p.finish()
    return f


def _operand(f: Formula, unicode: bool) -> str:
    s = format_formula(f, unicode)
    return f"({s})" if isinstance(f, (LeftDiv, RightDiv)) else s


def format_formula(f: Formula, unicode: bool = False) -> str:
    """Canonical printing; ``unicode=True`` uses ◇ and □."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Dia):
        return ("◇" if unicode else "<>") + _operand(f.inner, unicode)
    if isinstance(f, Box):
        return ("□" if unicode else "[]") + _operand(f.inner, unicode)
    if isinstance(f, LeftDiv):
        return _operand(f.left, unicode) + "\\" + _operand(f.right, unicode)
    if isinstance(f, RightDiv):
        return _operand(f.left, unicode) + "/" + _operand(f.right, unicode)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------- structures

@dataclass(frozen=True)
class Leaf:
    var: str
    formula: Formula


@dataclass(frozen=True)
class Node:
    left: "Structure"
    right: "Structure"


@dataclass(frozen=True)
class Bracket:
    inner: "Structure"


Structure = Union[Leaf, Node, Bracket]
Path = tuple[int, ...]


def leaves(s: Structure) -> Iterator[Leaf]:
    if isinstance(s, Leaf):
        yield s
    elif isinstance(s, Node):
        yield from leaves(s.left)
        yield from leaves(s.right)
    else:
        yield from leaves(s.inner)


def check_linear(s: Structure) -> None:
    seen = set()
    for leaf in leaves(s):
        if leaf.var in seen:
            raise NonLinearVariable(leaf.var)
        seen.add(leaf.var)


def positions(s: Structure, path: Path = ()) -> Iterator[tuple[Path, Structure]]:
    """Pre-order walk yielding (path, substructure); Node children are 0/1, a Bracket child is 0."""
    yield path, s
    if isinstance(s, Node):
        yield from positions(s.left, path + (0,))
        yield from positions(s.right, path + (1,))
    elif isinstance(s, Bracket):
        yield from positions(s.inner, path + (0,))


def subterm(s: Structure, path: Path) -> Structure:
    for step in path:
        if isinstance(s, Node):
            s = s.left if step == 0 else s.right
        elif isinstance(s, Bracket):
            s = s.inner
        else:
            raise KeyError(path)
    return s


def replace_at(s: Structure, path: Path, new: Structure) -> Structure:
    if not path:
        return new
    step, rest = path[0], path[1:]
    if isinstance(s, Node):
        if step == 0:
            return Node(replace_at(s.left, rest, new), s.right)
        return Node(s.left, replace_at(s.right, rest, new))
    if isinstance(s, Bracket):
        return Bracket(replace_at(s.inner, rest, new))
    raise KeyError(path)


def find_leaf(s: Structure, var: str) -> Path | None:
    for path, sub in positions(s):
        if isinstance(sub, Leaf) and sub.var == var:
            return path
    return None


def parse_structure(text: str, atoms=DEFAULT_ATOMS,
                    lookup: Callable[[str], Formula] | None = None) -> Structure:
    """Parse ``(x:A, <y:B>)``-style text.  With ``lookup``, bare words get their type from it."""
    if not text.strip():
        raise EmptyAntecedent("empty structure")
    p = _Parser(text, atoms)
    s = p.structure(lookup)
    p.finish()
    check_linear(s)
    return s


def format_structure(s: Structure, unicode: bool = False) -> str:
    if isinstance(s, Leaf):
        return f"{s.var}:{format_formula(s.formula, unicode)}"
    if isinstance(s, Node):
        sep = " · " if unicode else ", "
        return f"({format_structure(s.left, unicode)}{sep}{format_structure(s.right, unicode)})"
    if unicode:
        return f"⟨{format_structure(s.inner, unicode)}⟩"
    return f"<{format_structure(s.inner, unicode)}>"


def format_words(s: Structure) -> str:
    """Structure with formulas omitted, e.g. ``(man, (die, ((de, hond), bijt)))``."""
    if isinstance(s, Leaf):
        return s.var
    if isinstance(s, Node):
        return f"({format_words(s.left)}, {format_words(s.right)})"
    return f"<{format_words(s.inner)}>"


# ---------------------------------------------------------------- spaces

class AtomicSpace(enum.Enum):
    N = "N"
    S = "S"
    SPIN = "Spin"


@dataclass(frozen=True)
class Factor:
    space: AtomicSpace
    dual: bool = False

    def flip(self) -> "Factor":
        return Factor(self.space, not self.dual)

    def __str__(self) -> str:
        name = {"N": "Ñ", "S": "S̃", "Spin": "Spin"}[self.space.value]
        return name + ("*" if self.dual else "")


@dataclass(frozen=True)
class SpaceSignature:
    factors: tuple[Factor, ...]

    def __add__(self, other: "SpaceSignature") -> "SpaceSignature":
        return SpaceSignature(self.factors + other.factors)

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)

    def dual(self) -> "SpaceSignature":
        """(A⊗B)* = B*⊗A*: reverse the order and flip every variance."""
        return SpaceSignature(tuple(f.flip() for f in reversed(self.factors)))

    def dims(self, cfg: "SpaceConfig") -> tuple[int, ...]:
        return tuple(cfg.dim(f.space) for f in self.factors)

    def dimension(self, cfg: "SpaceConfig") -> int:
        return int(np.prod(self.dims(cfg), dtype=int))

    def without_spin(self) -> "SpaceSignature":
        return SpaceSignature(tuple(f for f in self.factors if f.space is not AtomicSpace.SPIN))

    def __str__(self) -> str:
        return "[" + ", ".join(map(str, self.factors)) + "]"


DEFAULT_ATOM_SPACES = {"s": AtomicSpace.S, "np": AtomicSpace.N, "n": AtomicSpace.N}


@dataclass(frozen=True)
class SpaceConfig:
    dim_n: int = 2
    dim_s: int = 2
    spin_levels: int = 2
    metrics: dict = field(default_factory=dict, compare=False, hash=False)
    atom_spaces: dict = field(default_factory=lambda: dict(DEFAULT_ATOM_SPACES),
                              compare=False, hash=False)

    def __post_init__(self):
        for name in ("dim_n", "dim_s", "spin_levels"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        for space, g in self.metrics.items():
            g = np.asarray(g, dtype=complex)
            d = self.dim(AtomicSpace(space) if isinstance(space, str) else space)
            if g.shape != (d, d):
                raise ValueError(f"metric for {space} must be {d}x{d}")
            if not np.allclose(g, g.conj().T, atol=1e-12):
                raise ValueError(f"metric for {space} is not symmetric")
            try:
                np.linalg.cholesky(g)
            except np.linalg.LinAlgError:
                raise ValueError(f"metric for {space} is not positive definite") from None

    def dim(self, space: AtomicSpace) -> int:
        if space is AtomicSpace.N:
            return self.dim_n
        if space is AtomicSpace.S:
            return self.dim_s
        return self.spin_levels

    def metric(self, space: AtomicSpace) -> np.ndarray | None:
        """The metric for ``space``, or None for the identity."""
        g = self.metrics.get(space, self.metrics.get(space.value))
        return None if g is None else np.asarray(g, dtype=complex)

    def space_of(self, atom: str) -> AtomicSpace:
        try:
            return self.atom_spaces[atom]
        except KeyError:
            raise UnknownAtom(atom) from None


def spatial_signature(f: Formula, cfg: SpaceConfig | None = None) -> SpaceSignature:
    """⌈f⌉, including the Spin⊗Spin* operator slots contributed by ◇ and □."""
    cfg = cfg or SpaceConfig()
    if isinstance(f, Atom):
        return SpaceSignature((Factor(cfg.space_of(f.name)),))
    if isinstance(f, RightDiv):
        return spatial_signature(f.left, cfg) + spatial_signature(f.right, cfg).dual()
    if isinstance(f, LeftDiv):
        return spatial_signature(f.left, cfg).dual() + spatial_signature(f.right, cfg)
    if isinstance(f, (Dia, Box)):
        ops = SpaceSignature((Factor(AtomicSpace.SPIN), Factor(AtomicSpace.SPIN, True)))
        return spatial_signature(f.inner, cfg) + ops
    raise TypeError(f"not a formula: {f!r}")


def full_signature(f: Formula, cfg: SpaceConfig | None = None) -> SpaceSignature:
    """⌊f⌋ = ⌈f⌉ ⊗ Spin."""
    return spatial_signature(f, cfg) + SpaceSignature((Factor(AtomicSpace.SPIN),))


def carrier_signature(f: Formula, cfg: SpaceConfig | None = None) -> SpaceSignature:
    """The distributional factors of ⌈f⌉: the ones spatial tensors actually carry.

    The modal operator slots live on the separate spin component, so they are
    dropped here.
    """
    return spatial_signature(f, cfg).without_spin()
