import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import fuzz
from spinlambek.deduction import SearchBudget, axiom, prove
from spinlambek.syntax import Leaf, leaves, parse_formula, parse_structure
from spinlambek.terms import (And, AppL, AppR, Cap, Comm, Cup, LamL, LamR, Var, Vee, Wedge,
                              alpha_eq, comm, de_bruijn, die_program, erase_comm, extract_term,
                              format_term, free_vars, is_linear, normalize, redexes, reduce_step,
                              reduction_sequence, substitute, undirected)

x, y, z, w, u = (Var(n) for n in "xyzwu")
x1, x2, y0, y2, z0, z2 = (Var(n) for n in ("x1", "x2", "y0", "y2", "z0", "z2"))
PHRASE = "(y0:n, (z0:(n\\n)/(<>[]np\\s), ((x2:np/n, y2:n), z2:np\\(np\\s))))"
seeds = st.integers(0, 2**32 - 1)


@pytest.fixture(scope="module")
def dutch_terms():
    found = prove(parse_structure(PHRASE), parse_formula("n"), SearchBudget(max_comm=1))
    return [extract_term(d) for d in found]


def alpha_variants(t, pool):
    """Every renaming of t's binders drawn from pool (small terms only)."""
    binders = []

    def collect(s):
        if isinstance(s, (LamL, LamR)):
            binders.append(s.var)
            collect(s.body)
        elif isinstance(s, (AppL, AppR, And)):
            for c in (s.arg, s.fun) if isinstance(s, AppL) else (s.fun, s.arg) if isinstance(s, AppR) else (s.left, s.right):
                collect(c)
        elif hasattr(s, "body"):
            collect(s.body)

    collect(t)
    for names in itertools.permutations(pool, len(binders)):
        it = iter(names)

        def rename(s):
            if isinstance(s, (LamL, LamR)):
                new = next(it)
                return type(s)(new, rename(substitute(s.body, s.var, Var(new))), s.ty)
            if isinstance(s, AppL):
                return AppL(rename(s.arg), rename(s.fun))
            if isinstance(s, AppR):
                return AppR(rename(s.fun), rename(s.arg))
            if isinstance(s, And):
                return And(rename(s.left), rename(s.right))
            if isinstance(s, Comm):
                return Comm(rename(s.body), s.count)
            if hasattr(s, "body"):
                return type(s)(rename(s.body))
            return s

        yield rename(t)


# ---------------------------------------------------------------- extraction

def test_subject_term(dutch_terms):
    want = AppL(y0, AppR(z0, LamL("x1", AppL(Vee(Cup(x1)), AppL(AppR(x2, y2), z2)))))
    assert alpha_eq(dutch_terms[0], want)


def test_object_term(dutch_terms):
    want = AppL(y0, AppR(z0, LamL("x1", Comm(AppL(AppR(x2, y2), AppL(Vee(Cup(x1)), z2)), 1))))
    assert alpha_eq(dutch_terms[1], want)


def test_readings_differ_as_terms(dutch_terms):
    assert not alpha_eq(dutch_terms[0], dutch_terms[1])


def test_axiom_term():
    assert extract_term(axiom(Leaf("x", parse_formula("np")))) == x


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_extracted_terms_are_linear_in_the_leaves(seed):
    d = fuzz.random_derivation(np.random.default_rng(seed))
    t = extract_term(d)
    assert is_linear(t)
    assert sorted(free_vars(t).elements()) == sorted(l.var for l in leaves(d.conclusion.antecedent))


# ---------------------------------------------------------------- substitution

def test_hypothesis_substitution():
    assert substitute(AppL(x, z), "x", Vee(Cup(x1))) == AppL(Vee(Cup(x1)), z)


def test_substituting_the_variable_itself():
    assert substitute(x, "x", u) == u


def test_substitution_under_unrelated_binder():
    t = LamL("x", AppR(x, y))
    assert substitute(t, "y", w) == LamL("x", AppR(x, w))


def test_capture_is_avoided():
    t = LamL("x", AppR(x, y))
    out = substitute(t, "y", x)
    # the free x must stay free, so the binder has to be renamed
    assert free_vars(out) == {"x": 1}
    # the capture-free answers are exactly the variants whose binder is not x
    variants = set(alpha_variants(LamL("q", AppR(Var("q"), x)), ["a", "q", "v1", "x1", "x2", "y1"]))
    assert out in variants


def test_bound_variable_shadows():
    t = LamR("x", AppR(x, y))
    assert substitute(t, "x", u) == t


def test_comm_is_kept_under_substitution():
    assert substitute(Comm(AppL(x, z), 2), "x", y) == Comm(AppL(y, z), 2)


# ---------------------------------------------------------------- normalization

def test_left_beta_on_an_abstraction_over_a_function():
    redex = AppL(AppL(w, z), LamL("x", AppR(x, y)))
    assert normalize(redex) == AppR(AppL(w, z), y)


def test_right_beta():
    assert normalize(AppR(LamR("x", AppL(y, x)), z)) == AppL(y, z)


def test_unary_cancellations():
    assert normalize(Vee(Wedge(z))) == z
    assert normalize(Cup(Cap(z))) == z
    assert normalize(Wedge(Vee(z))) == Wedge(Vee(z))
    assert normalize(Cap(Cup(z))) == Cap(Cup(z))


def test_comm_markers_merge():
    assert comm(Comm(x, 2), 1) == Comm(x, 3)
    assert comm(x, 0) == x
    assert normalize(Comm(Comm(x, 1), 2)) == Comm(x, 3)
    with pytest.raises(ValueError):
        Comm(x, 0)


def test_die_program_against_the_readings(dutch_terms):
    words = {"y0": "man", "x2": "de", "y2": "hond", "z2": "bijt"}
    expected = ["λz.((man z) ∧ ((bijt (de hond)) z))",
                "λz.((man z) ∧ ((bijt z) (de hond)))"]
    for t, want in zip(dutch_terms, expected):
        for old, new in words.items():
            t = substitute(t, old, Var(new))
        nf = normalize(substitute(t, "z0", die_program()))
        assert alpha_eq(undirected(erase_comm(nf)), fuzz.parse_plain(want))


def _programs(seed):
    """Linear terms with redexes: extracted terms with a lexical program plugged in for a leaf."""
    rng = np.random.default_rng(seed)
    d = fuzz.random_derivation(rng)
    t = extract_term(d)
    names = sorted(free_vars(t))
    target = names[int(rng.integers(len(names)))]
    prog = LamL("p", AppL(Var("p"), Var("q")))
    if rng.random() < 0.5:
        prog = LamR("p", Vee(Wedge(AppR(Var("q"), Var("p")))))
    return substitute(t, target, prog) if rng.random() < 0.7 else t


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_normalize_is_idempotent_and_preserves_linearity(seed):
    t = _programs(seed)
    nf = normalize(t)
    assert normalize(nf) == nf
    assert not redexes(nf)
    if is_linear(t):
        assert is_linear(nf)
    assert free_vars(nf) == free_vars(t)


def _oracle_step(t):
    """One leftmost-outermost step of beta or unary cancellation, written independently."""
    if isinstance(t, AppL) and isinstance(t.fun, LamL):
        return substitute(t.fun.body, t.fun.var, t.arg)
    if isinstance(t, AppR) and isinstance(t.fun, LamR):
        return substitute(t.fun.body, t.fun.var, t.arg)
    if isinstance(t, Vee) and isinstance(t.body, Wedge):
        return t.body.body
    if isinstance(t, Cup) and isinstance(t.body, Cap):
        return t.body.body
    if isinstance(t, Comm) and isinstance(t.body, Comm):
        return Comm(t.body.body, t.count + t.body.count)
    if isinstance(t, AppL):
        for a, f in ((_oracle_step(t.arg), t.fun), (t.arg, _oracle_step(t.fun))):
            if a is not None and f is not None:
                return AppL(a, f)
    elif isinstance(t, AppR):
        for f, a in ((_oracle_step(t.fun), t.arg), (t.fun, _oracle_step(t.arg))):
            if a is not None and f is not None:
                return AppR(f, a)
    elif isinstance(t, And):
        for l, r in ((_oracle_step(t.left), t.right), (t.left, _oracle_step(t.right))):
            if l is not None and r is not None:
                return And(l, r)
    elif isinstance(t, (LamL, LamR)):
        b = _oracle_step(t.body)
        return None if b is None else type(t)(t.var, b, t.ty)
    elif isinstance(t, Comm):
        b = _oracle_step(t.body)
        return None if b is None else Comm(b, t.count)
    elif hasattr(t, "body"):
        b = _oracle_step(t.body)
        return None if b is None else type(t)(b)
    return None


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_normal_form_matches_outermost_stepping_oracle(seed):
    t = _programs(seed)
    cur = t
    while (nxt := _oracle_step(cur)) is not None:
        cur = nxt
    assert alpha_eq(cur, normalize(t))


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_beta_steps_end_beta_normal(seed):
    t = _programs(seed)
    seq = reduction_sequence(t)
    assert seq[0] == t
    assert reduce_step(seq[-1]) is None and not redexes(seq[-1])
    assert alpha_eq(normalize(seq[-1]), normalize(t))


def test_reduction_sequence_of_a_single_redex():
    redex = AppL(AppL(w, z), LamL("x", AppR(x, y)))
    assert reduction_sequence(redex) == [redex, AppR(AppL(w, z), y)]


# ---------------------------------------------------------------- comparison and printing

def test_alpha_equivalence():
    assert alpha_eq(LamL("a", AppR(Var("a"), y)), LamL("b", AppR(Var("b"), y)))
    assert not alpha_eq(LamL("a", AppR(Var("a"), y)), LamR("a", AppR(Var("a"), y)))
    assert not alpha_eq(LamL("a", y), LamL("y", Var("y")))
    assert de_bruijn(LamL("a", Var("a"))) == ("LamL", ("bound", 0))


def test_printing(dutch_terms):
    t = AppL(Var("man"), AppR(Var("die"), LamL("x1", Comm(AppL(AppR(Var("de"), Var("hond")), AppL(Vee(Cup(x1)), Var("bijt"))), 1))))
    assert format_term(t) == "(man ▷ (die ◁ λˡx1.ᶜ¹((de ◁ hond) ▷ (∨∪x1 ▷ bijt))))"
    assert format_term(t, ascii=True) == "(man |> (die <| \\l x1.c^1 ((de <| hond) |> (vee cup x1 |> bijt))))"
    assert format_term(Cap(Wedge(LamR("z", z)))) == "∩∧(λʳz.z)"
    assert format_term(And(x, y), ascii=True) == "(x & y)"
