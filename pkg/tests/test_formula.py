import pytest
from hypothesis import given, settings, strategies as st

from kd45g.formula import (
    BOT, TOP, And, Box, Diamond, Iff, Implies, Not, Or, ParseError, Var, depth,
    fixed_points, modal_atoms, modal_depth, parse, size, subformulas, substitute, to_text,
    variables,
)

p, q, r = Var("p"), Var("q"), Var("r")


@pytest.mark.parametrize("text, tree", [
    ("p -> q", Implies(p, q)),
    ("not p", Implies(p, BOT)),
    ("<> (p & q)", Diamond(And(p, q))),
    ("top", Implies(BOT, BOT)),
    ("p <-> q", And(Implies(p, q), Implies(q, p))),
    ("p -> q -> r", Implies(p, Implies(q, r))),
    ("p & q | r", Or(And(p, q), r)),
    ("p | q & r", And(Or(p, q), r)),
    ("not p & q", And(Not(p), q)),
    ("[] p -> p", Implies(Box(p), p)),
    ("[]<>p", Box(Diamond(p))),
    ("  p\t->\nq ", Implies(p, q)),
    ("x_1 & yZ9", And(Var("x_1"), Var("yZ9"))),
])
def test_parse(text, tree):
    assert parse(text) == tree


@pytest.mark.parametrize("tree, text", [
    (Implies(p, BOT), "p -> bot"),
    (Box(Diamond(p)), "[] <> p"),
    (And(p, Or(q, r)), "p & (q | r)"),
    (Box(And(p, q)), "[] (p & q)"),
    (Implies(Implies(p, q), r), "(p -> q) -> r"),
    (Implies(p, Implies(q, r)), "p -> q -> r"),
    (Or(And(p, q), r), "p & q | r"),
])
def test_print(tree, text):
    assert to_text(tree) == text


@pytest.mark.parametrize("text, offset", [
    ("p ->", 4),
    ("(p & q", 6),
    ("p q", 2),
    ("[] ", 3),
    ("P", 0),
    ("p & ~q", 4),
    ("not", 3),
])
def test_parse_errors_carry_offset(text, offset):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.offset == offset
    assert info.value.expected


def test_offset_counts_bytes():
    # "é" is two bytes in UTF-8
    with pytest.raises(ParseError) as info:
        parse("p & é")
    assert info.value.offset == 4
    with pytest.raises(ParseError) as info:
        parse("(p)é")
    assert info.value.offset == 3


def test_keywords_are_not_variables():
    with pytest.raises(ParseError):
        parse("bot & not")


def test_subformulas_examples():
    assert set(subformulas(p)) == {BOT, p}
    assert set(subformulas(Box(p))) == {BOT, p, Box(p)}
    assert set(subformulas(Implies(p, p))) == {BOT, p, Implies(p, p)}
    assert len(subformulas(Implies(p, p))) == 3


def test_fixed_points_examples():
    assert set(fixed_points(p)) == {Box(BOT), Diamond(BOT), Box(p), Diamond(p)}
    assert set(fixed_points(BOT)) == {Box(BOT), Diamond(BOT)}
    assert set(fixed_points(Box(p))) == {Box(BOT), Diamond(BOT), Box(p), Diamond(p),
                                         Box(Box(p)), Diamond(Box(p))}


def test_modal_atoms_examples():
    assert set(modal_atoms(Implies(Box(p), Diamond(q)))) == {Box(p), Diamond(q)}
    assert modal_atoms(p) == ()
    assert modal_atoms(Box(Diamond(p))) == (Box(Diamond(p)),)


def test_orders_are_deterministic():
    f = parse("([]p -> <>q) & (q | not p)")
    assert subformulas(f) == subformulas(parse(to_text(f)))
    assert [size(g) for g in subformulas(f)] == sorted(size(g) for g in subformulas(f))


def test_measures():
    f = parse("[] (p -> <> q)")
    assert size(f) == 5
    assert depth(f) == 3
    assert modal_depth(f) == 2
    assert variables(f) == ("p", "q")
    assert substitute(f, {"p": q, "q": p}) == parse("[] (q -> <> p)")


def test_sugar_never_survives():
    f = parse("not (p <-> top)")
    assert f == Not(Iff(p, TOP))


names = st.sampled_from(["p", "q", "r", "x1"])
formulas = st.recursive(
    st.one_of(names.map(Var), st.just(BOT)),
    lambda kids: st.one_of(
        st.builds(And, kids, kids), st.builds(Or, kids, kids), st.builds(Implies, kids, kids),
        st.builds(Box, kids), st.builds(Diamond, kids)),
    max_leaves=12)


@given(formulas)
@settings(max_examples=400)
def test_round_trip(f):
    assert parse(to_text(f)) == f


@given(formulas)
def test_subformulas_monotone(f):
    sub = set(subformulas(f))
    for g in sub:
        assert set(subformulas(g)) <= sub


@given(formulas)
def test_fixed_point_count(f):
    assert len(fixed_points(f)) == 2 * len(subformulas(f))
    assert len(set(fixed_points(f))) == len(fixed_points(f))


def _outermost(f):
    if isinstance(f, (Box, Diamond)):
        return {f}
    return set().union(*(_outermost(g) for g in f.children()))


@given(formulas)
def test_modal_atoms_are_outermost_occurrences(f):
    assert set(modal_atoms(f)) == _outermost(f)
