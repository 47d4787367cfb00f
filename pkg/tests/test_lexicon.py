import textwrap
import warnings

import numpy as np
import pytest

import oracles
from spinlambek.errors import DensityViolation, ParseError, ShapeError, UnknownWord
from spinlambek.lexicon import (LexiconWarning, default_lexicon_path, dumps_lexicon, load_lexicon,
                                loads_lexicon)
from spinlambek.spin import SpinOperatorConfig
from spinlambek.syntax import AtomicSpace, parse_formula
from spinlambek.tensor import validate_density


def lex(body, header="dim_n: 2\ndim_s: 2\nspin_levels: 2\nseed: 5\n"):
    return loads_lexicon(header + textwrap.dedent(body))


def literal(m):
    return str([[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)])


HALF = literal(np.eye(2) / 2)


# ---------------------------------------------------------------- the shipped lexicon

def test_shipped_lexicon(lexicon):
    assert sorted(lexicon.entries) == ["bijt", "de", "die", "hond", "man"]
    assert (lexicon.space.dim_n, lexicon.space.dim_s, lexicon.space.spin_levels) == (2, 2, 2)
    assert lexicon["die"].type == parse_formula("(n\\n)/(<>[]np\\s)")
    die_spin = lexicon["die"].spin
    np.testing.assert_array_equal(die_spin, np.diag(np.diag(die_spin)))
    assert lexicon["bijt"].spatial.shape == (8, 8)
    assert lexicon["die"].spatial.shape == (16, 16)
    for e in lexicon.entries.values():
        assert validate_density(e.spatial).passed and validate_density(e.spin).passed
    assert not lexicon.warnings


def test_loading_is_reproducible(lexicon):
    assert load_lexicon(default_lexicon_path()).same_as(lexicon)


def test_unknown_word(lexicon):
    assert "kat" not in lexicon
    with pytest.raises(UnknownWord):
        lexicon["kat"]


# ---------------------------------------------------------------- validation

def test_trace_two_is_rejected():
    with pytest.raises(DensityViolation) as e:
        lex(f"""
        words:
          man: {{type: n, spatial: {literal(np.eye(2))}, spin: {HALF}}}
        """)
    assert e.value.word == "man"
    assert e.value.report.trace_defect == pytest.approx(1.0)


def test_non_psd_spin_is_rejected():
    with pytest.raises(DensityViolation):
        lex(f"""
        words:
          man: {{type: n, spatial: {HALF}, spin: {literal(np.diag([1.5, -0.5]))}}}
        """)


def test_wrong_shape_is_rejected():
    with pytest.raises(ShapeError) as e:
        lex(f"""
        words:
          man: {{type: n, spatial: {literal(np.eye(4) / 4)}, spin: {HALF}}}
        """)
    assert e.value.word == "man"


def test_malformed_yaml_reports_line():
    with pytest.raises(ParseError) as e:
        lex("words:\n  man: {type: n,\n  spatial: [\n")
    assert e.value.line is not None and e.value.line >= 5


def test_bad_entry_reports_its_line():
    with pytest.raises(ParseError) as e:
        lex(f"""
        words:
          man: {{type: n, spatial: random, spin: random}}
          hond: {{type: n\\\\, spatial: random, spin: random}}
        """)
    assert e.value.line == 8


@pytest.mark.parametrize("body, match", [
    ("words:\n  man: {type: n, spatial: random}\n", "exactly the keys"),
    ("words:\n  man: {type: n, spatial: gaussian, spin: random}\n", "unknown generator"),
    ("words: {}\n", "words"),
    ("colour: blue\nwords:\n  man: {type: n, spatial: random, spin: random}\n", "header"),
    ("words:\n  man: {type: vp, spatial: random, spin: random}\n", "bad type"),
])
def test_parse_errors(body, match):
    with pytest.raises(ParseError, match=match):
        lex(body)


def test_bad_header_values():
    with pytest.raises(ParseError):
        loads_lexicon("dim_n: 0\nwords:\n  man: {type: n, spatial: random, spin: random}\n")
    with pytest.raises(ParseError):
        loads_lexicon("seed: -3\nwords:\n  man: {type: n, spatial: random, spin: random}\n")
    with pytest.raises(ParseError):
        loads_lexicon("- just a list\n")


def test_modal_type_needs_two_levels():
    with pytest.raises(ParseError, match="spin_levels"):
        lex("words:\n  w: {type: '<>np', spatial: random, spin: random}\n",
            header="dim_n: 2\ndim_s: 2\nspin_levels: 1\n")
    with pytest.warns(LexiconWarning):   # a one-level spin space has only the eigenstate
        lex("words:\n  w: {type: np, spatial: random, spin: random}\n", header="spin_levels: 1\n")


def test_eigenstate_spin_warns():
    with pytest.warns(LexiconWarning):
        out = lex(f"""
        words:
          man: {{type: n, spatial: {HALF}, spin: {literal(oracles.RHO0)}}}
        """)
    assert len(out.warnings) == 1 and "level-0" in out.warnings[0]


def test_generic_spin_does_not_warn():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        lex(f"""
        words:
          man: {{type: n, spatial: {HALF}, spin: {literal(np.diag([0.3, 0.7]))}}}
        """)


# ---------------------------------------------------------------- generators

def test_generators_are_deterministic_and_order_independent():
    a = lex("""
    words:
      man: {type: n, spatial: random, spin: random_diagonal}
      hond: {type: n, spatial: random, spin: random}
    """)
    b = lex("""
    words:
      hond: {type: n, spatial: random, spin: random}
      man: {type: n, spatial: random, spin: random_diagonal}
    """)
    for w in ("man", "hond"):
        np.testing.assert_array_equal(a[w].spatial, b[w].spatial)
        np.testing.assert_array_equal(a[w].spin, b[w].spin)
    assert not np.allclose(a["man"].spatial, a["hond"].spatial)
    s = a["man"].spin
    np.testing.assert_array_equal(s, np.diag(np.diag(s)))


def test_explicit_seed_ignores_the_word():
    a = lex("words:\n  man: {type: n, spatial: random(9), spin: random(9)}\n"
            "  hond: {type: n, spatial: random(9), spin: random(3)}\n")
    np.testing.assert_array_equal(a["man"].spatial, a["hond"].spatial)
    assert not np.allclose(a["man"].spin, a["hond"].spin)


def test_header_seed_changes_generated_matrices():
    body = "words:\n  man: {type: n, spatial: random, spin: random}\n"
    a = loads_lexicon("seed: 1\n" + body)
    b = loads_lexicon("seed: 2\n" + body)
    assert not np.allclose(a["man"].spatial, b["man"].spatial)


# ---------------------------------------------------------------- header sections

def test_spin_section():
    flip = [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]
    eye = [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]
    out = lex(f"""
    spin:
      coefficients: [0.5, 0.5]
      unitaries: [{eye}, {flip}]
      selections: [0, 1]
    words:
      man: {{type: n, spatial: random, spin: random}}
    """)
    assert out.spin.coefficients == (0.5, 0.5)
    np.testing.assert_array_equal(out.spin.unitaries[1], [[0, 1], [1, 0]])
    assert out.model.spin is out.spin


def test_invalid_spin_section():
    with pytest.raises(ParseError, match="spin section"):
        lex("spin:\n  coefficients: [0.9, 0.9]\nwords:\n  man: {type: n, spatial: random, spin: random}\n")
    with pytest.raises(ParseError, match="unknown spin keys"):
        lex("spin:\n  colour: 1\nwords:\n  man: {type: n, spatial: random, spin: random}\n")


def test_metrics_section():
    out = lex("""
    metrics:
      N: [[[2, 0], [0.5, 0]], [[0.5, 0], [1, 0]]]
    words:
      man: {type: n, spatial: random, spin: random}
    """)
    np.testing.assert_array_equal(out.space.metric(AtomicSpace.N), [[2, 0.5], [0.5, 1]])
    assert out.space.metric(AtomicSpace.S) is None
    with pytest.raises(ParseError):
        lex("metrics:\n  N: [[[1, 0], [2, 0]], [[2, 0], [1, 0]]]\nwords:\n  man: {type: n, spatial: random, spin: random}\n")
    with pytest.raises(ParseError):
        lex("metrics:\n  Q: [[[1, 0]]]\nwords:\n  man: {type: n, spatial: random, spin: random}\n")


# ---------------------------------------------------------------- writing

def test_dump_and_reload(lexicon):
    again = loads_lexicon(dumps_lexicon(lexicon))
    assert again.same_as(lexicon)


def test_dump_keeps_spin_configuration():
    src = lex("""
    spin:
      coefficients: [0.25, 0.75]
    words:
      man: {type: n, spatial: random, spin: random}
    """)
    again = loads_lexicon(dumps_lexicon(src))
    assert again.spin.coefficients == (0.25, 0.75)
    assert again.spin == src.spin


def test_complex_literals_survive():
    m = np.array([[0.5, 0.1j], [-0.1j, 0.5]])
    out = lex(f"words:\n  man: {{type: n, spatial: {literal(m)}, spin: {HALF}}}\n")
    np.testing.assert_array_equal(out["man"].spatial, m)
    assert out.interpretation("man").spatial.matrix().shape == (2, 2)
