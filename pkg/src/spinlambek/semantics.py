"""Interpretation of proof terms as (spatial tensor, spin state) pairs.

Applications contract the function's argument slots against the argument
(a partial trace of the product) and measure the function's spin with the
argument's spin through the star map.  Abstractions leave an open dual slot
for the bound variable: the variable is given a "wire" tensor whose own
factors are tied to tagged copies of the dual factors, the tags ride along
through every contraction, and the binder finally moves them into place.
The spin side of an abstraction evaluates the body with the bound variable
at the maximally mixed state.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import spin as spinops
from .errors import (DegenerateMeasurement, LadderOverflow, LengthMismatch, NotEvaluable,
                     SignatureMismatch, SlotMismatch, UnboundVariable)
from .syntax import Formula, SpaceConfig, SpaceSignature, carrier_signature
from .tensor import LabeledTensor, Slot, contract, hermitian_eigvalsh, star
from .terms import (LAMBDAS, And, AppL, AppR, Cap, Comm, Const, Cup, LamL, LamR, Term, Var,
                    Vee, Wedge, children, contract_redex, redexes)


@dataclass(frozen=True)
class Interpretation:
    spatial: LabeledTensor
    spin: np.ndarray

    def full_matrix(self) -> np.ndarray:
        return np.kron(self.spatial.matrix(), self.spin)


@dataclass(frozen=True)
class Model:
    """Everything the evaluator needs besides the assignment."""
    space: SpaceConfig = field(default_factory=SpaceConfig)
    spin: spinops.SpinOperatorConfig | None = None

    def __post_init__(self):
        if self.spin is None:
            object.__setattr__(self, "spin", spinops.SpinOperatorConfig(self.space.spin_levels))
        if self.spin.levels != self.space.spin_levels:
            raise ValueError("spin operator config and space config disagree on the number of levels")


Assignment = Mapping[str, Interpretation]


# ---------------------------------------------------------------- helpers

def _dual_slots(sig: SpaceSignature, tag: str | None) -> list[Slot]:
    return [Slot(f.space, f.dual, tag) for f in sig.dual()]


def wire_tensor(sig: SpaceSignature, tag: str, cfg: SpaceConfig) -> LabeledTensor:
    """Σ_{k,k'} |k⟩⟨k'| ⊗ |k'ᴿ⟩⟨kᴿ|: own factors ``sig`` tied to tagged dual factors.

    ``kᴿ`` is the multi-index k in reverse order, matching the reversed factor
    order of the dual space.
    """
    dims = sig.dims(cfg)
    m = len(dims)
    data = np.zeros(dims + dims[::-1] + dims + dims[::-1], dtype=complex)
    for k in itertools.product(*map(range, dims)):
        for kp in itertools.product(*map(range, dims)):
            data[k + kp[::-1] + kp + k[::-1]] = 1.0
    slots = [Slot(f.space, f.dual) for f in sig] + _dual_slots(sig, tag)
    assert data.ndim == 4 * m
    return LabeledTensor(data, slots)


def basis_element(sig: SpaceSignature, k: tuple, kp: tuple, cfg: SpaceConfig) -> LabeledTensor:
    dims = sig.dims(cfg)
    data = np.zeros(dims + dims, dtype=complex)
    data[k + kp] = 1.0
    return LabeledTensor(data, [Slot(f.space, f.dual) for f in sig])


def _untagged(t: LabeledTensor) -> list[int]:
    return [i for i, s in enumerate(t.slots) if s.tag is None]


def apply(fun: LabeledTensor, arg: LabeledTensor, side: str, cfg: SpaceConfig,
          path: tuple = ()) -> LabeledTensor:
    """Contract a function tensor with its argument.

    ``side='right'`` for t ◁ u (argument slots at the end of the function's
    signature), ``side='left'`` for u ▷ t (at the start).
    """
    fu, au = _untagged(fun), _untagged(arg)
    k = len(au)
    if len(fu) < k:
        raise SignatureMismatch(f"function has {len(fu)} slots, argument needs {k}", path)
    segment = fu[:k] if side == "left" else fu[len(fu) - k:]
    pairs = [(segment[j], au[k - 1 - j]) for j in range(k)]
    try:
        out = contract(fun, arg, pairs, cfg)
    except SlotMismatch as e:
        raise SignatureMismatch(f"{e} (function {fun}, argument {arg})", path) from e
    order = _untagged(out) + [i for i, s in enumerate(out.slots) if s.tag is not None]
    return out.permute(order)


def _bind(t: LabeledTensor, tag: str, side: str) -> LabeledTensor:
    mine = [i for i, s in enumerate(t.slots) if s.tag == tag]
    plain = _untagged(t)
    others = [i for i, s in enumerate(t.slots) if s.tag is not None and s.tag != tag]
    order = (mine + plain if side == "left" else plain + mine) + others
    t = t.permute(order)
    return t.retag({i: None for i in range(len(mine) + len(plain))})


# ---------------------------------------------------------------- evaluator

class _Evaluator:
    def __init__(self, model: Model, explicit_sum: bool):
        self.model = model
        self.explicit = explicit_sum
        self.tags = itertools.count()

    def spin_op(self, fn: Callable, path: tuple, *args):
        try:
            return fn(*args)
        except DegenerateMeasurement as e:
            raise DegenerateMeasurement(f"{e} at term path {_fmt_path(path)}", path) from e
        except LadderOverflow as e:
            raise LadderOverflow(f"{e} at term path {_fmt_path(path)}", path) from e

    def eval(self, t: Term, env: Mapping[str, Interpretation], path: tuple) -> Interpretation:
        sc, cfg = self.model.spin, self.model.space
        if isinstance(t, (Var, Const)):
            try:
                return env[t.name]
            except KeyError:
                raise UnboundVariable(f"{t.name!r} has no interpretation") from None
        if isinstance(t, AppR):
            f = self.eval(t.fun, env, path + (0,))
            u = self.eval(t.arg, env, path + (1,))
            return Interpretation(apply(f.spatial, u.spatial, "right", cfg, path),
                                  self.spin_op(star, path, f.spin, u.spin))
        if isinstance(t, AppL):
            u = self.eval(t.arg, env, path + (0,))
            f = self.eval(t.fun, env, path + (1,))
            return Interpretation(apply(f.spatial, u.spatial, "left", cfg, path),
                                  self.spin_op(star, path, f.spin, u.spin))
        if isinstance(t, LAMBDAS):
            return self.abstraction(t, env, path)
        if isinstance(t, And):
            raise NotEvaluable("the logical constant ∧ has no numerical interpretation")
        inner = self.eval(t.body, env, path + (0,))
        if isinstance(t, Comm):
            rho = self.spin_op(spinops.raise_spin, path, inner.spin, t.count, sc)
        elif isinstance(t, Vee):
            rho = self.spin_op(spinops.project_box, path, inner.spin, sc)
        elif isinstance(t, Wedge):
            rho = self.spin_op(spinops.intro_box, path, inner.spin, sc)
        elif isinstance(t, Cap):
            rho = self.spin_op(spinops.intro_dia, path, inner.spin, sc)
        elif isinstance(t, Cup):
            rho = self.spin_op(spinops.evolve_dia, path, inner.spin, sc)
        else:
            raise TypeError(f"not a term: {t!r}")
        return Interpretation(inner.spatial, rho)

    def abstraction(self, t, env, path) -> Interpretation:
        cfg = self.model.space
        if t.ty is None:
            raise SignatureMismatch(f"abstraction over {t.var!r} carries no type", path)
        sig = carrier_signature(t.ty, cfg)
        mixed = spinops.maximally_mixed(cfg.spin_levels)
        side = "left" if isinstance(t, LamL) else "right"
        if not self.explicit:
            tag = f"{t.var}#{next(self.tags)}"
            x = Interpretation(wire_tensor(sig, tag, cfg), mixed)
            body = self.eval(t.body, {**env, t.var: x}, path + (0,))
            return Interpretation(_bind(body.spatial, tag, side), body.spin)

        # reference mode: Σ_{kk'} (dual basis element) ⊗ ⟦body⟧ with x ↦ |k⟩⟨k'|
        dims = sig.dims(cfg)
        spin_state, data, slots = None, None, None
        for k in itertools.product(*map(range, dims)):
            for kp in itertools.product(*map(range, dims)):
                x = Interpretation(basis_element(sig, k, kp, cfg), mixed)
                body = self.eval(t.body, {**env, t.var: x}, path + (0,))
                if any(s.tag is not None for s in body.spatial.slots):
                    raise SignatureMismatch("explicit-sum mode cannot mix with open slots", path)
                b = body.spatial.rank
                if data is None:
                    spin_state = body.spin
                    bdims = body.spatial.dims
                    if side == "left":
                        data = np.zeros(dims[::-1] + bdims + dims[::-1] + bdims, dtype=complex)
                        slots = _dual_slots(sig, None) + list(body.spatial.slots)
                    else:
                        data = np.zeros(bdims + dims[::-1] + bdims + dims[::-1], dtype=complex)
                        slots = list(body.spatial.slots) + _dual_slots(sig, None)
                full = (slice(None),) * b
                if side == "left":
                    data[kp[::-1] + full + k[::-1] + full] = body.spatial.data
                else:
                    data[full + kp[::-1] + full + k[::-1]] = body.spatial.data
        return Interpretation(LabeledTensor(data, slots), spin_state)


def _fmt_path(path: tuple) -> str:
    return "/".join(map(str, path)) or "root"


def interpret(t: Term, g: Assignment, model: Model | None = None,
              explicit_sum: bool = False) -> Interpretation:
    """⟦t⟧_g.  ``explicit_sum`` materializes abstractions as basis sums (reference mode)."""
    return _Evaluator(model or Model(), explicit_sum).eval(t, g, ())


# ---------------------------------------------------------------- ambiguity

@dataclass(frozen=True)
class AmbiguousMeaning:
    readings: tuple[Interpretation, ...]
    weights: tuple[float, ...]
    ids: tuple[int, ...]

    def direct_sum(self) -> np.ndarray:
        """Block-diagonal ⊕_k p_k (spatial_k ⊗ spin_k), spatial parts trace-normalized."""
        blocks = []
        for p, r in zip(self.weights, self.readings):
            spatial = r.spatial.matrix()
            tr = np.trace(spatial)
            spatial = spatial / tr if abs(tr) > 1e-300 else spatial
            blocks.append(p * np.kron(spatial, r.spin))
        size = sum(b.shape[0] for b in blocks)
        out = np.zeros((size, size), dtype=complex)
        at = 0
        for b in blocks:
            n = b.shape[0]
            out[at:at + n, at:at + n] = b
            at += n
        return out

    def spin_overlaps(self) -> np.ndarray:
        k = len(self.readings)
        out = np.zeros((k, k))
        for i in range(k):
            for j in range(k):
                out[i, j] = float(np.real(np.trace(self.readings[i].spin @ self.readings[j].spin)))
        return out


def ambiguous_sum(readings: Sequence[Interpretation], weights: Sequence[float] | None = None,
                  ids: Sequence[int] | None = None) -> AmbiguousMeaning:
    readings = tuple(readings)
    ids = tuple(range(len(readings))) if ids is None else tuple(ids)
    if weights is None or len(weights) == 0:
        weights = [1.0] * len(readings)
    if len(weights) != len(readings) or len(ids) != len(readings):
        raise LengthMismatch(f"{len(weights)} weights for {len(readings)} readings")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")
    total = float(w.sum())
    w = np.full(len(w), 1.0 / len(w)) if total == 0 else w / total
    return AmbiguousMeaning(readings, tuple(float(x) for x in w), ids)


# ---------------------------------------------------------------- beta soundness

def random_density(dim: int, rng: np.random.Generator, diagonal: bool = False) -> np.ndarray:
    """Random full-rank density matrix: a random Hermitian matrix shifted PSD, trace-normalized."""
    if diagonal:
        h = np.diag(rng.normal(size=dim)).astype(complex)
    else:
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h = (a + a.conj().T) / 2
    w = hermitian_eigvalsh(h)
    spread = float(w[-1] - w[0])
    h = h + (0.1 * spread + 1e-3 - float(w[0])) * np.eye(dim)
    return h / np.trace(h).real


def random_interpretation(f: Formula, model: Model, rng: np.random.Generator) -> Interpretation:
    sig = carrier_signature(f, model.space)
    spatial = LabeledTensor.from_signature(random_density(sig.dimension(model.space), rng), sig, model.space)
    return Interpretation(spatial, random_density(model.space.spin_levels, rng))


@dataclass(frozen=True)
class BetaReport:
    redexes: int
    trials: int
    max_spatial_deviation: float
    max_spin_deviation: float
    undefined_mismatches: int
    both_undefined: int
    skipped: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return (self.max_spatial_deviation < 1e-9 and self.max_spin_deviation < 1e-9
                and self.undefined_mismatches == 0)

    @property
    def spatial_passed(self) -> bool:
        return self.max_spatial_deviation < 1e-9


def beta_soundness_check(t: Term, types: Mapping[str, Formula], model: Model | None = None,
                         trials: int = 100, seed: int = 0, explicit_sum: bool = False) -> BetaReport:
    """Compare ⟦redex⟧ with ⟦contractum⟧ for every beta redex of t over random assignments.

    ``types`` gives the formula of every variable free in a redex; redexes
    that cannot be evaluated (they contain ∧) are skipped and listed.
    """
    model = model or Model()
    rng = np.random.default_rng(seed)
    found = redexes(t)
    max_sp = max_spin = 0.0
    mismatched = both = 0
    skipped = []
    evaluable = []
    for path, r in found:
        try:
            _check_evaluable(r)
            evaluable.append((path, r))
        except NotEvaluable:
            skipped.append(_fmt_path(path))
    for _ in range(trials):
        g = {name: random_interpretation(f, model, rng) for name, f in sorted(types.items())}
        for _, r in evaluable:
            lhs = rhs = None
            try:
                lhs = interpret(r, g, model, explicit_sum)
            except (DegenerateMeasurement, LadderOverflow):
                pass
            try:
                rhs = interpret(contract_redex(r), g, model, explicit_sum)
            except (DegenerateMeasurement, LadderOverflow):
                pass
            if lhs is None and rhs is None:
                both += 1
                continue
            if lhs is None or rhs is None:
                mismatched += 1
                continue
            if lhs.spatial.slots != rhs.spatial.slots:
                max_sp = np.inf
            else:
                max_sp = max(max_sp, float(np.max(np.abs(lhs.spatial.data - rhs.spatial.data))))
            max_spin = max(max_spin, float(np.max(np.abs(lhs.spin - rhs.spin))))
    return BetaReport(len(evaluable), trials, max_sp, max_spin, mismatched, both, tuple(skipped))


def _check_evaluable(t: Term) -> None:
    if isinstance(t, And):
        raise NotEvaluable("∧")
    for c in children(t):
        _check_evaluable(c)


def evaluate_all(terms: Sequence[Term], g: Assignment, model: Model,
                 explicit_sum: bool = False) -> list:
    """Evaluate several terms concurrently; results (or exceptions) in input order."""
    def one(t):
        try:
            return interpret(t, g, model, explicit_sum)
        except Exception as e:  # reported per reading by the caller
            return e

    with ThreadPoolExecutor() as pool:
        return list(pool.map(one, terms))
