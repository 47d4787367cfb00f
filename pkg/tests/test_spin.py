import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from spinlambek.errors import DegenerateMeasurement, InvalidSpinConfig, LadderOverflow
from spinlambek.spin import (SpinOperatorConfig, eigenstate_level, evolve_dia, intro_box, intro_dia,
                             level_projector, maximally_mixed, project_box, raise_spin)
from spinlambek.tensor import validate_density

DEFAULT = SpinOperatorConfig(2)
FLIP = np.array([[0, 1], [1, 0]], dtype=complex)
FLIP_CFG = SpinOperatorConfig(2, unitaries=(np.eye(2), FLIP), selections=(0, 1))
seeds = st.integers(0, 2**32 - 1)


def test_basis_orientation():
    np.testing.assert_array_equal(level_projector(0, 2), oracles.RHO0)
    np.testing.assert_array_equal(level_projector(1, 2), oracles.RHO1)
    np.testing.assert_array_equal(DEFAULT.raising, [[0, 1], [0, 0]])
    np.testing.assert_array_equal(DEFAULT.projector(0), oracles.RHO0)


# ---------------------------------------------------------------- box projection

def test_project_mixed_state_onto_level_zero():
    np.testing.assert_allclose(project_box(np.eye(2) / 2, DEFAULT), oracles.RHO0, atol=1e-12)


def test_level_zero_is_fixed():
    np.testing.assert_allclose(project_box(oracles.RHO0, DEFAULT), oracles.RHO0, atol=1e-12)


def test_projecting_orthogonal_state_is_degenerate():
    with pytest.raises(DegenerateMeasurement):
        project_box(oracles.RHO1, DEFAULT)


def test_mixed_coefficients():
    cfg = SpinOperatorConfig(2, coefficients=(0.25, 0.75))
    np.testing.assert_allclose(project_box(np.eye(2) / 2, cfg), 0.25 * oracles.RHO0 + 0.75 * oracles.RHO1, atol=1e-12)


@given(seeds, st.integers(2, 4))
@settings(max_examples=50)
def test_project_box_idempotent_and_valid(seed, levels):
    rng = np.random.default_rng(seed)
    cfg = SpinOperatorConfig(levels)
    rho = oracles.random_density(levels, rng)
    once = project_box(rho, cfg)
    assert validate_density(once).passed
    np.testing.assert_allclose(project_box(once, cfg), once, atol=1e-10)


# ---------------------------------------------------------------- diamond evolution

@given(seeds)
@settings(max_examples=30)
def test_default_evolution_is_identity(seed):
    rho = oracles.random_density(2, np.random.default_rng(seed))
    np.testing.assert_allclose(evolve_dia(rho, DEFAULT), rho, atol=1e-15)


@given(seeds)
@settings(max_examples=30)
def test_selected_unitary_conjugates(seed):
    rho = oracles.random_density(2, np.random.default_rng(seed))
    out = evolve_dia(rho, FLIP_CFG)
    np.testing.assert_allclose(out, FLIP @ rho @ FLIP.conj().T, atol=1e-14)
    assert validate_density(out).passed


def test_flip_swaps_levels():
    np.testing.assert_allclose(evolve_dia(oracles.RHO0, FLIP_CFG), oracles.RHO1, atol=1e-15)


def test_box_and_diamond_do_not_commute():
    rho = np.array([[0.3, 0.1], [0.1, 0.7]], dtype=complex)
    a = project_box(evolve_dia(rho, FLIP_CFG), FLIP_CFG)
    b = evolve_dia(project_box(rho, FLIP_CFG), FLIP_CFG)
    assert np.max(np.abs(a - b)) > 0.5


# ---------------------------------------------------------------- raising

@given(seeds)
@settings(max_examples=50)
def test_raising_any_state_with_level_zero_weight_gives_level_one(seed):
    rho = oracles.random_density(2, np.random.default_rng(seed))
    np.testing.assert_allclose(raise_spin(rho, 1, DEFAULT), oracles.RHO1, atol=1e-10)


def test_raise_zero_is_identity():
    rho = oracles.random_density(3, np.random.default_rng(0))
    np.testing.assert_array_equal(raise_spin(rho, 0, SpinOperatorConfig(3)), rho)


def test_raising_the_top_level_overflows():
    with pytest.raises(LadderOverflow):
        raise_spin(oracles.RHO1, 1, DEFAULT)
    with pytest.raises(LadderOverflow):
        raise_spin(maximally_mixed(3), 3, SpinOperatorConfig(3))


@given(seeds, st.integers(2, 5), st.integers(0, 3), st.integers(0, 3))
@settings(max_examples=60)
def test_raising_is_additive(seed, levels, a, b):
    cfg = SpinOperatorConfig(levels)
    rho = oracles.random_density(levels, np.random.default_rng(seed))
    try:
        both = raise_spin(rho, a + b, cfg)
        stepwise = raise_spin(raise_spin(rho, a, cfg), b, cfg)
    except LadderOverflow:
        assert a + b >= levels
        return
    np.testing.assert_allclose(both, stepwise, atol=1e-10)
    assert validate_density(both).passed


def test_completeness_at_two_levels():
    sp, sm = DEFAULT.raising, DEFAULT.lowering
    np.testing.assert_allclose(sp @ sp.conj().T + sm @ sm.conj().T, np.eye(2), atol=1e-12)
    assert DEFAULT.completeness_defect() < 1e-12


# ---------------------------------------------------------------- introduction rules

def test_intro_box_delegates_to_evolution():
    rho = oracles.random_density(2, np.random.default_rng(1))
    np.testing.assert_allclose(intro_box(rho, DEFAULT), rho, atol=1e-15)
    np.testing.assert_allclose(intro_box(rho, FLIP_CFG), evolve_dia(rho, FLIP_CFG), atol=1e-15)


def test_intro_dia_delegates_to_projection():
    np.testing.assert_allclose(intro_dia(np.eye(2) / 2, DEFAULT), oracles.RHO0, atol=1e-12)
    with pytest.raises(DegenerateMeasurement):
        intro_dia(oracles.RHO1, DEFAULT)


def test_eigenstate_level():
    assert eigenstate_level(oracles.RHO0) == 0
    assert eigenstate_level(oracles.RHO1) == 1
    assert eigenstate_level(np.eye(2) / 2) is None
    assert eigenstate_level(oracles.RHO0 + 1e-12, tol=1e-9) == 0


# ---------------------------------------------------------------- configuration

@pytest.mark.parametrize("kw", [
    {"coefficients": (0.5, 0.6)},
    {"coefficients": (1.2, -0.2)},
    {"coefficients": (1.0,)},
    {"unitaries": (np.eye(2), [[1, 1], [0, 1]]), "selections": (0, 1)},
    {"unitaries": (np.eye(2), FLIP), "selections": (1,)},
    {"selections": (2,)},
    {"basis": [[1, 1], [0, 1]]},
    {"raising": np.eye(3)},
])
def test_invalid_configs(kw):
    with pytest.raises(InvalidSpinConfig):
        SpinOperatorConfig(2, **kw)


def test_custom_basis_changes_projector():
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    cfg = SpinOperatorConfig(2, basis=h)
    plus = np.full((2, 2), 0.5)
    np.testing.assert_allclose(project_box(np.eye(2) / 2, cfg), plus, atol=1e-12)
