"""The (N+1)-level spin space and the operators interpreting the unary connectives.

Level ``a`` is the basis vector ``e_{L-1-a}``, so at two levels
``|0⟩ = (0, 1)ᵀ`` and ``|1⟩ = (1, 0)ᵀ``.  The raising operator maps level a to
a+1, which puts ones on the superdiagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMeasurement, InvalidSpinConfig, LadderOverflow
from .tensor import DEGENERATE_TOL, star


def level_vector(a: int, levels: int) -> np.ndarray:
    v = np.zeros(levels, dtype=complex)
    v[levels - 1 - a] = 1.0
    return v


def level_projector(a: int, levels: int) -> np.ndarray:
    v = level_vector(a, levels)
    return np.outer(v, v.conj())


def default_raising(levels: int) -> np.ndarray:
    return np.eye(levels, k=1, dtype=complex)


@dataclass(frozen=True)
class SpinOperatorConfig:
    levels: int = 2
    basis: np.ndarray | None = field(default=None, compare=False)        # columns are |a⟩
    coefficients: tuple[float, ...] | None = None                         # c_a
    unitaries: tuple[np.ndarray, ...] | None = field(default=None, compare=False)
    selections: tuple[int, ...] | None = None                             # d_b
    raising: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        L = self.levels
        if L < 1:
            raise InvalidSpinConfig("levels must be positive")
        basis = np.eye(L, dtype=complex)[:, ::-1] if self.basis is None else np.asarray(self.basis, dtype=complex)
        coeffs = tuple([1.0] + [0.0] * (L - 1)) if self.coefficients is None else tuple(map(float, self.coefficients))
        unitaries = (np.eye(L, dtype=complex),) if self.unitaries is None else tuple(
            np.asarray(u, dtype=complex) for u in self.unitaries)
        selections = tuple([1] + [0] * (len(unitaries) - 1)) if self.selections is None else tuple(
            int(d) for d in self.selections)
        raising = default_raising(L) if self.raising is None else np.asarray(self.raising, dtype=complex)

        if basis.shape != (L, L) or not np.allclose(basis.conj().T @ basis, np.eye(L), atol=1e-12):
            raise InvalidSpinConfig("projection basis must be an orthonormal LxL matrix")
        if len(coeffs) != L or abs(sum(coeffs) - 1.0) > 1e-12 or min(coeffs) < 0:
            raise InvalidSpinConfig("coefficients must be nonnegative, one per level, summing to 1")
        if len(selections) != len(unitaries) or any(d not in (0, 1) for d in selections):
            raise InvalidSpinConfig("selections must be 0/1 flags, one per unitary")
        for u in unitaries:
            if u.shape != (L, L) or not np.allclose(u.conj().T @ u, np.eye(L), atol=1e-12):
                raise InvalidSpinConfig("every U_b must be an LxL unitary")
        if raising.shape != (L, L):
            raise InvalidSpinConfig("raising operator must be LxL")

        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "unitaries", unitaries)
        object.__setattr__(self, "selections", selections)
        object.__setattr__(self, "raising", raising)

    @property
    def lowering(self) -> np.ndarray:
        return self.raising.conj().T

    def projector(self, a: int) -> np.ndarray:
        v = self.basis[:, a]
        return np.outer(v, v.conj())

    def completeness_defect(self) -> float:
        sp, sm = self.raising, self.lowering
        return float(np.max(np.abs(sp @ sp.conj().T + sm @ sm.conj().T - np.eye(self.levels))))


def project_box(rho: np.ndarray, cfg: SpinOperatorConfig) -> np.ndarray:
    """Σ_a c_a star(ρ, |a⟩⟨a|): with the default c_0 = 1, projection onto level 0."""
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros_like(rho)
    for a, c in enumerate(cfg.coefficients):
        if c == 0:
            continue
        p = cfg.projector(a)
        if float(np.real(np.trace(p @ rho))) <= DEGENERATE_TOL:
            raise DegenerateMeasurement(f"project_box: state has no weight on level {a}")
        out = out + c * star(rho, p)
    return out


def evolve_dia(rho: np.ndarray, cfg: SpinOperatorConfig) -> np.ndarray:
    """Apply the selected unitaries in order: U ρ U†."""
    rho = np.asarray(rho, dtype=complex)
    for u, d in zip(cfg.unitaries, cfg.selections):
        if d:
            rho = u @ rho @ u.conj().T
    return rho


def raise_spin(rho: np.ndarray, m: int, cfg: SpinOperatorConfig) -> np.ndarray:
    """S₊ᵐ ρ S₊†ᵐ, renormalized."""
    rho = np.asarray(rho, dtype=complex)
    if m < 0:
        raise ValueError("raise count must be nonnegative")
    if m == 0:
        return rho
    sm = np.linalg.matrix_power(cfg.raising, m)
    x = sm @ rho @ sm.conj().T
    tr = float(np.real(np.trace(x)))
    if tr <= DEGENERATE_TOL:
        raise LadderOverflow(f"raise by {m} annihilates the state (trace {tr:.3e})")
    return x / tr


def intro_box(rho: np.ndarray, cfg: SpinOperatorConfig) -> np.ndarray:
    return evolve_dia(rho, cfg)


def intro_dia(rho: np.ndarray, cfg: SpinOperatorConfig) -> np.ndarray:
    return project_box(rho, cfg)


def maximally_mixed(levels: int) -> np.ndarray:
    return np.eye(levels, dtype=complex) / levels


def eigenstate_level(rho: np.ndarray, tol: float = 1e-9) -> int | None:
    """The level a with ρ == |a⟩⟨a| within tol (default basis), else None."""
    rho = np.asarray(rho)
    levels = rho.shape[0]
    for a in range(levels):
        if np.max(np.abs(rho - level_projector(a, levels))) <= tol:
            return a
    return None
