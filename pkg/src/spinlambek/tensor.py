"""Dense complex tensors with labeled slots, and the density-matrix toolkit.

A ``LabeledTensor`` over slots ``f1 ... fk`` is an operator on ``V1 ⊗ ... ⊗ Vk``
stored with shape ``(d1, ..., dk, d1, ..., dk)``: the first k axes are the row
(ket) indices and the last k the column (bra) indices.  Reshaping to
``(D, D)`` gives the usual row-major matrix.

Eigen-decompositions use a self-contained cyclic Jacobi solver.  A complex
Hermitian matrix ``A = X + iY`` is diagonalized through its real symmetric
embedding ``[[X, -Y], [Y, X]]``; since the embedding is a *-homomorphism the
square root of the embedding embeds the square root of ``A``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateMeasurement, NotPSD, SlotMismatch
from .syntax import AtomicSpace, Factor, SpaceConfig, SpaceSignature

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
CLAMP_TOL = 1e-8
DEGENERATE_TOL = 1e-12
JACOBI_TOL = 1e-13
JACOBI_SWEEPS = 100


# ---------------------------------------------------------------- eigensolver

def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings covering every (p, q) once per sweep, n/2 disjoint pairs per round."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p >= 0 and q >= 0]
        rounds.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(a: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_SWEEPS):
    """Eigenvalues and eigenvectors of a real symmetric matrix by cyclic Jacobi sweeps.

    Each sweep visits every off-diagonal pair once, in round-robin order, so
    the rotations of one round act on disjoint index pairs and are applied
    together as a single orthogonal matrix.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    if n < 2:
        return np.diag(a).copy(), v
    scale = max(1.0, float(np.linalg.norm(a)))
    mask = ~np.eye(n, dtype=bool)
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        if float(np.linalg.norm(a[mask])) < tol * scale:
            break
        for p, q in rounds:
            apq = a[p, q]
            active = np.abs(apq) > 1e-300
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            big = np.abs(theta) > 1e150
            safe = np.where(big, 1.0, theta)
            t = np.where(big, 0.5 / np.where(big, theta, 1.0),
                         np.copysign(1.0, safe) / (np.abs(safe) + np.sqrt(safe * safe + 1.0)))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rot = np.eye(n)
            rot[p, p] = c
            rot[q, q] = c
            rot[p, q] = s
            rot[q, p] = -s
            a = rot.T @ a @ rot
            v = v @ rot
    return np.diag(a).copy(), v


def _embed(m: np.ndarray) -> np.ndarray:
    x, y = m.real, m.imag
    return np.block([[x, -y], [y, x]])


def hermitian_eigvalsh(m: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix."""
    m = np.asarray(m, dtype=complex)
    h = (m + m.conj().T) / 2
    if not np.any(h.imag):
        w, _ = jacobi_eigh(h.real)
        return np.sort(w)
    w, _ = jacobi_eigh(_embed(h))
    return np.sort(w)[::2]


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """The unique PSD square root; tiny negative eigenvalues are clamped to zero."""
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    h = (m + m.conj().T) / 2
    real = not np.any(h.imag)
    w, v = jacobi_eigh(h.real if real else _embed(h))
    lo = float(w.min())
    if lo < -CLAMP_TOL:
        raise NotPSD(lo)
    # eigenvalues inside the solver's accuracy are zero; their square roots would be ~1e-7 noise
    floor = JACOBI_TOL * max(1.0, float(np.max(np.abs(w))))
    r = (v * np.sqrt(np.where(w > floor, w, 0.0))) @ v.T
    if real:
        return r.astype(complex)
    return r[:n, :n] + 1j * r[n:, :n]


# ---------------------------------------------------------------- density matrices

@dataclass(frozen=True)
class DensityReport:
    hermiticity_defect: float
    min_eigenvalue: float
    trace_defect: float

    @property
    def passed(self) -> bool:
        return (self.hermiticity_defect <= HERMITIAN_TOL
                and self.min_eigenvalue >= -PSD_TOL
                and self.trace_defect <= TRACE_TOL)

    def __bool__(self) -> bool:
        return self.passed

    def __str__(self) -> str:
        verdict = "pass" if self.passed else "fail"
        return (f"{verdict}: hermiticity defect {self.hermiticity_defect:.2e}, "
                f"min eigenvalue {self.min_eigenvalue:.2e}, trace defect {self.trace_defect:.2e}")


def validate_density(m) -> DensityReport:
    if isinstance(m, LabeledTensor):
        m = m.matrix()
    m = np.asarray(m, dtype=complex)
    herm = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    lo = float(hermitian_eigvalsh(m)[0])
    tr = abs(complex(np.trace(m)) - 1.0)
    return DensityReport(herm, lo, tr)


def star(t: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Measure t with u: u^{1/2} t u^{1/2} / Tr(u^{1/2} t u^{1/2})."""
    t = np.asarray(t, dtype=complex)
    u = np.asarray(u, dtype=complex)
    if t.shape != u.shape:
        raise SlotMismatch(f"star operands differ in shape: {t.shape} vs {u.shape}")
    r = psd_sqrt(u)
    x = r @ t @ r
    tr = float(np.trace(x).real)
    if tr <= DEGENERATE_TOL:
        raise DegenerateMeasurement(f"star: normalizing trace {tr:.3e} vanishes")
    x = (x + x.conj().T) / 2
    return x / tr


# ---------------------------------------------------------------- labeled tensors

@dataclass(frozen=True)
class Slot:
    """One tensor factor.  ``tag`` marks an open slot left by a lambda-bound variable."""
    space: AtomicSpace
    dual: bool = False
    tag: str | None = None

    @property
    def factor(self) -> Factor:
        return Factor(self.space, self.dual)

    def __str__(self) -> str:
        s = str(self.factor)
        return s if self.tag is None else f"{s}@{self.tag}"


class LabeledTensor:
    __slots__ = ("data", "slots")

    def __init__(self, data: np.ndarray, slots: Sequence[Slot]):
        data = np.array(data, dtype=complex)
        slots = tuple(slots)
        if data.ndim != 2 * len(slots):
            raise SlotMismatch(f"data has {data.ndim} axes for {len(slots)} slots")
        if data.shape[:len(slots)] != data.shape[len(slots):]:
            raise SlotMismatch(f"row and column dimensions differ: {data.shape}")
        data.setflags(write=False)
        self.data = data
        self.slots = slots

    @classmethod
    def from_matrix(cls, matrix, slots: Sequence[Slot], cfg: SpaceConfig) -> "LabeledTensor":
        slots = tuple(slots)
        dims = tuple(cfg.dim(s.space) for s in slots)
        matrix = np.asarray(matrix, dtype=complex)
        size = int(np.prod(dims, dtype=int))
        if matrix.shape != (size, size):
            raise SlotMismatch(f"matrix shape {matrix.shape} does not fit slots of size {size}")
        return cls(matrix.reshape(dims + dims), slots)

    @classmethod
    def from_signature(cls, matrix, sig: SpaceSignature, cfg: SpaceConfig) -> "LabeledTensor":
        return cls.from_matrix(matrix, [Slot(f.space, f.dual) for f in sig], cfg)

    @property
    def rank(self) -> int:
        return len(self.slots)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.data.shape[:self.rank]

    @property
    def size(self) -> int:
        return int(np.prod(self.dims, dtype=int))

    def matrix(self) -> np.ndarray:
        return self.data.reshape(self.size, self.size)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix()))

    def signature(self) -> SpaceSignature:
        """Factors of the untagged slots."""
        return SpaceSignature(tuple(s.factor for s in self.slots if s.tag is None))

    def permute(self, order: Sequence[int]) -> "LabeledTensor":
        order = list(order)
        k = self.rank
        axes = order + [k + i for i in order]
        return LabeledTensor(self.data.transpose(axes), [self.slots[i] for i in order])

    def retag(self, mapping: dict[int, str | None]) -> "LabeledTensor":
        slots = [Slot(s.space, s.dual, mapping.get(i, s.tag)) for i, s in enumerate(self.slots)]
        return LabeledTensor(self.data, slots)

    def __repr__(self) -> str:
        return f"LabeledTensor([{', '.join(map(str, self.slots))}])"


def tensor_product(a: LabeledTensor, b: LabeledTensor) -> LabeledTensor:
    ka, kb = a.rank, b.rank
    outer = np.multiply.outer(a.data, b.data)
    rows = list(range(ka)) + [2 * ka + i for i in range(kb)]
    cols = [ka + i for i in range(ka)] + [2 * ka + kb + i for i in range(kb)]
    return LabeledTensor(outer.transpose(rows + cols), a.slots + b.slots)


def _apply_metric(data: np.ndarray, rank: int, slot: int, g: np.ndarray) -> np.ndarray:
    """G acting on one factor from both sides: (G ⊗ 1) X (G ⊗ 1)."""
    data = np.moveaxis(np.tensordot(g, data, axes=([1], [slot])), 0, slot)
    col = rank + slot
    return np.moveaxis(np.tensordot(data, g, axes=([col], [0])), -1, col)


def contract(a: LabeledTensor, b: LabeledTensor, pairs: Sequence[tuple[int, int]],
             cfg: SpaceConfig | None = None) -> LabeledTensor:
    """Tr over the paired factors of a·b.

    For each pair ``(i, j)`` the row index of ``a``'s slot i is summed against
    the column index of ``b``'s slot j and vice versa, i.e. the trace of the
    product on that factor.  Paired slots must be the same atomic space with
    opposite variance.  Unpaired slots of ``a`` come first in the result,
    then those of ``b``.
    """
    ka, kb = a.rank, b.rank
    used_a = [i for i, _ in pairs]
    used_b = [j for _, j in pairs]
    if len(set(used_a)) != len(used_a) or len(set(used_b)) != len(used_b):
        raise SlotMismatch("a slot is paired twice")
    bdata = b.data
    for i, j in pairs:
        if not (0 <= i < ka and 0 <= j < kb):
            raise SlotMismatch(f"pair ({i}, {j}) out of range")
        sa, sb = a.slots[i], b.slots[j]
        if sa.space is not sb.space or sa.dual == sb.dual:
            raise SlotMismatch(f"cannot pair {sa} with {sb}")
        if a.dims[i] != b.dims[j]:
            raise SlotMismatch(f"dimension mismatch on {sa.space.value}: {a.dims[i]} vs {b.dims[j]}")
        g = cfg.metric(sa.space) if cfg is not None else None
        if g is not None:
            bdata = _apply_metric(bdata, kb, j, g)

    # integer sublist einsum: a rows 0..ka-1, a cols ka..2ka-1, b gets fresh labels
    a_idx = list(range(2 * ka))
    b_idx = list(range(2 * ka, 2 * ka + 2 * kb))
    for i, j in pairs:
        b_idx[kb + j] = a_idx[i]       # b column meets a row
        b_idx[j] = a_idx[ka + i]       # b row meets a column
    free_a = [i for i in range(ka) if i not in used_a]
    free_b = [j for j in range(kb) if j not in used_b]
    out = ([a_idx[i] for i in free_a] + [b_idx[j] for j in free_b]
           + [a_idx[ka + i] for i in free_a] + [b_idx[kb + j] for j in free_b])
    data = np.einsum(a.data, a_idx, bdata, b_idx, out, optimize=True)
    slots = [a.slots[i] for i in free_a] + [b.slots[j] for j in free_b]
    return LabeledTensor(data, slots)


def partial_trace(t: LabeledTensor, traced: Sequence[int]) -> LabeledTensor:
    k = t.rank
    idx = list(range(2 * k))
    for i in traced:
        idx[k + i] = idx[i]
    keep = [i for i in range(k) if i not in traced]
    out = [idx[i] for i in keep] + [idx[k + i] for i in keep]
    return LabeledTensor(np.einsum(t.data, idx, out), [t.slots[i] for i in keep])


def identity_tensor(slots: Sequence[Slot], cfg: SpaceConfig, normalized: bool = False) -> LabeledTensor:
    slots = tuple(slots)
    size = int(np.prod([cfg.dim(s.space) for s in slots], dtype=int))
    m = np.eye(size, dtype=complex)
    if normalized:
        m /= size
    return LabeledTensor.from_matrix(m, slots, cfg)
