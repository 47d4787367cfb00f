"""Lexicon files: a header fixing the spaces, then one type and two density matrices per word.

The format is YAML::

    dim_n: 2
    dim_s: 2
    spin_levels: 2
    seed: 42
    metrics:            # optional, per atomic space
      N: [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]
    spin:               # optional operator configuration
      coefficients: [1, 0]
    words:
      man:
        type: n
        spatial: random
        spin: random_diagonal(7)

A matrix is either a literal (nested rows of ``[re, im]`` pairs) or a
generator: ``random``, ``random(seed)``, ``random_diagonal`` or
``random_diagonal(seed)``.  Generators without a seed draw from the header
seed mixed with the word and slot, so entries are reproducible and
independent of their order in the file.
"""

from __future__ import annotations

import re
import warnings
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np
import yaml

from .errors import (DensityViolation, FormulaSyntaxError, InvalidSpinConfig, ParseError,
                     ShapeError, UnknownAtom, UnknownWord)
from .semantics import Interpretation, Model, random_density
from .spin import SpinOperatorConfig, level_projector
from .syntax import (AtomicSpace, Formula, SpaceConfig, carrier_signature, format_formula,
                     full_signature, is_modal, parse_formula)
from .tensor import LabeledTensor, validate_density

EIGENSTATE_WARN_TOL = 1e-6
_GENERATOR = re.compile(r"^\s*(random|random_diagonal)\s*(?:\(\s*(\d+)\s*\))?\s*$")
_Loader = getattr(yaml, "CSafeLoader", yaml.SafeLoader)
_Dumper = getattr(yaml, "CSafeDumper", yaml.SafeDumper)
_HEADER_KEYS = {"dim_n", "dim_s", "spin_levels", "seed", "metrics", "spin", "words"}


class LexiconWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Entry:
    word: str
    type: Formula
    spatial: np.ndarray
    spin: np.ndarray


@dataclass
class Lexicon:
    space: SpaceConfig
    spin: SpinOperatorConfig
    entries: dict[str, Entry]
    seed: int = 0
    warnings: list[str] = field(default_factory=list)

    @property
    def model(self) -> Model:
        return Model(self.space, self.spin)

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, word: str) -> Entry:
        try:
            return self.entries[word]
        except KeyError:
            raise UnknownWord(word) from None

    def interpretation(self, word: str) -> Interpretation:
        e = self[word]
        sig = carrier_signature(e.type, self.space)
        return Interpretation(LabeledTensor.from_signature(e.spatial, sig, self.space), e.spin)

    def same_as(self, other: "Lexicon") -> bool:
        if (self.space, self.seed) != (other.space, other.seed) or self.entries.keys() != other.entries.keys():
            return False
        for w, e in self.entries.items():
            o = other.entries[w]
            if e.type != o.type or not np.array_equal(e.spatial, o.spatial) or not np.array_equal(e.spin, o.spin):
                return False
        return True


# ---------------------------------------------------------------- reading

def _line_index(text: str) -> dict[str, int]:
    """1-based line of every word key under ``words``, for error messages."""
    try:
        root = yaml.compose(text, Loader=_Loader)
    except yaml.YAMLError:
        return {}
    out: dict[str, int] = {}
    if isinstance(root, yaml.MappingNode):
        for k, v in root.value:
            if k.value == "words" and isinstance(v, yaml.MappingNode):
                for wk, _ in v.value:
                    out[str(wk.value)] = wk.start_mark.line + 1
    return out


def _literal(value, dim: int, word: str, what: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ShapeError(word, f"{what}: {dim}x{dim} matrix of [re, im] pairs") from None
    if arr.shape != (dim, dim, 2):
        raise ShapeError(word, f"{what}: {dim}x{dim} matrix of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _matrix(value, dim: int, word: str, what: str, seed: int, slot: int) -> np.ndarray:
    if isinstance(value, str):
        m = _GENERATOR.match(value)
        if not m:
            raise ParseError(f"{word}: unknown generator {value!r} for {what}")
        own = m.group(2)
        rng = np.random.default_rng(int(own) if own is not None else [seed, zlib.crc32(word.encode()), slot])
        return random_density(dim, rng, diagonal=m.group(1) == "random_diagonal")
    return _literal(value, dim, word, what)


def _header_matrix(value, dim: int, what: str) -> np.ndarray:
    try:
        return _literal(value, dim, "header", what)
    except ShapeError as e:
        raise ParseError(str(e)) from None


def _spin_config(section, levels: int) -> SpinOperatorConfig:
    if section is None:
        return SpinOperatorConfig(levels)
    if not isinstance(section, Mapping):
        raise ParseError("spin section must be a mapping")
    unknown = set(section) - {"basis", "coefficients", "unitaries", "selections", "raising"}
    if unknown:
        raise ParseError(f"unknown spin keys: {sorted(unknown)}")
    kw = {}
    if "basis" in section:
        kw["basis"] = _header_matrix(section["basis"], levels, "spin basis")
    if "raising" in section:
        kw["raising"] = _header_matrix(section["raising"], levels, "raising operator")
    if "unitaries" in section:
        kw["unitaries"] = tuple(_header_matrix(u, levels, "unitary") for u in section["unitaries"])
    for key in ("coefficients", "selections"):
        if key in section:
            kw[key] = tuple(section[key])
    try:
        return SpinOperatorConfig(levels, **kw)
    except (InvalidSpinConfig, TypeError, ValueError) as e:
        raise ParseError(f"spin section: {e}") from None


def _space_config(doc: Mapping) -> SpaceConfig:
    ints = {}
    for key, default in (("dim_n", 2), ("dim_s", 2), ("spin_levels", 2)):
        v = doc.get(key, default)
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ParseError(f"{key} must be a positive integer, got {v!r}")
        ints[key] = v
    metrics = {}
    raw = doc.get("metrics") or {}
    if not isinstance(raw, Mapping):
        raise ParseError("metrics must map space names to matrices")
    for name, lit in raw.items():
        try:
            space = AtomicSpace(name)
        except ValueError:
            raise ParseError(f"metrics: unknown space {name!r}") from None
        d = ints["dim_n"] if space is AtomicSpace.N else ints["dim_s"] if space is AtomicSpace.S else ints["spin_levels"]
        metrics[space] = _header_matrix(lit, d, f"metric for {name}")
    try:
        return SpaceConfig(metrics=metrics, **ints)
    except ValueError as e:
        raise ParseError(str(e)) from None


def _near_eigenstate(rho: np.ndarray) -> int | None:
    levels = rho.shape[0]
    for a in range(levels):
        if np.max(np.abs(rho - level_projector(a, levels))) <= EIGENSTATE_WARN_TOL:
            return a
    return None


def loads_lexicon(text: str) -> Lexicon:
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ParseError(f"malformed lexicon: {getattr(e, 'problem', e)}",
                         None if mark is None else mark.line + 1) from None
    if not isinstance(doc, Mapping):
        raise ParseError("lexicon must be a mapping with a 'words' section", 1)
    unknown = set(doc) - _HEADER_KEYS
    if unknown:
        raise ParseError(f"unknown header keys: {sorted(map(str, unknown))}")
    line_cache: dict[str, int] | None = None

    def line_of(word: str) -> int | None:
        nonlocal line_cache
        if line_cache is None:
            line_cache = _line_index(text)
        return line_cache.get(word)

    space = _space_config(doc)
    spin = _spin_config(doc.get("spin"), space.spin_levels)
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ParseError(f"seed must be a nonnegative integer, got {seed!r}")
    words = doc.get("words")
    if not isinstance(words, Mapping) or not words:
        raise ParseError("missing or empty 'words' section")

    entries: dict[str, Entry] = {}
    notes: list[str] = []
    for word, spec in words.items():
        word = str(word)
        if not isinstance(spec, Mapping) or set(spec) != {"type", "spatial", "spin"}:
            raise ParseError(f"{word}: entry needs exactly the keys type, spatial, spin", line_of(word))
        try:
            f = parse_formula(str(spec["type"]))
        except (FormulaSyntaxError, UnknownAtom) as e:
            raise ParseError(f"{word}: bad type: {e}", line_of(word)) from None
        if is_modal(f) and space.spin_levels < 2:
            raise ParseError(f"{word}: modal type needs spin_levels >= 2", line_of(word))
        full = full_signature(f, space)
        sig = carrier_signature(f, space)
        try:
            spatial = _matrix(spec["spatial"], sig.dimension(space), word, f"spatial part of {full}", seed, 0)
            rho = _matrix(spec["spin"], space.spin_levels, word, f"spin part of {full}", seed, 1)
        except ParseError as e:
            raise ParseError(str(e), line_of(word)) from None
        for m in (spatial, rho):
            report = validate_density(m)
            if not report.passed:
                raise DensityViolation(word, report)
        level = _near_eigenstate(rho)
        if level is not None:
            msg = f"{word}: spin is within {EIGENSTATE_WARN_TOL:g} of the level-{level} eigenstate; evaluation may be degenerate"
            notes.append(msg)
            warnings.warn(msg, LexiconWarning, stacklevel=2)
        entries[word] = Entry(word, f, spatial, rho)
    return Lexicon(space, spin, entries, seed, notes)


def load_lexicon(path: str | Path) -> Lexicon:
    return loads_lexicon(Path(path).read_text(encoding="utf-8"))


def default_lexicon_path() -> Path:
    return Path(__file__).with_name("data") / "dutch.lex"


# ---------------------------------------------------------------- writing

def _pairs(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def dumps_lexicon(lex: Lexicon) -> str:
    """Serialize with every matrix as a literal, so reloading gives the same values."""
    doc: dict = {"dim_n": lex.space.dim_n, "dim_s": lex.space.dim_s,
                 "spin_levels": lex.space.spin_levels, "seed": lex.seed}
    if lex.space.metrics:
        doc["metrics"] = {getattr(k, "value", k): _pairs(v) for k, v in lex.space.metrics.items()}
    sc = lex.spin
    default = SpinOperatorConfig(sc.levels)
    spin_doc = {}
    if not np.array_equal(sc.basis, default.basis):
        spin_doc["basis"] = _pairs(sc.basis)
    if sc.coefficients != default.coefficients:
        spin_doc["coefficients"] = list(sc.coefficients)
    if len(sc.unitaries) != 1 or not np.array_equal(sc.unitaries[0], default.unitaries[0]):
        spin_doc["unitaries"] = [_pairs(u) for u in sc.unitaries]
    if sc.selections != default.selections:
        spin_doc["selections"] = list(sc.selections)
    if not np.array_equal(sc.raising, default.raising):
        spin_doc["raising"] = _pairs(sc.raising)
    if spin_doc:
        doc["spin"] = spin_doc
    doc["words"] = {w: {"type": format_formula(e.type), "spatial": _pairs(e.spatial), "spin": _pairs(e.spin)}
                    for w, e in lex.entries.items()}
    return yaml.dump(doc, Dumper=_Dumper, sort_keys=False, default_flow_style=None, width=10_000)
