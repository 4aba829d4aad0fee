import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from kd45g.algebra import (
    ONE, ZERO, MissingAtomError, Valuation, atoms_of, countervaluation, format_rational,
    godel_consequence, implies, join, meet, neg, parse_rational, prop_eval, truth,
)
from kd45g.canonical import MonotoneMap
from kd45g.formula import BOT, And, Box, Diamond, Implies, Or, Var, parse

fractions = st.fractions(min_value=0, max_value=1, max_denominator=40)


def test_implication_examples():
    assert implies(F(1, 2), F(1, 3)) == F(1, 3)
    assert implies(F(1, 3), F(1, 2)) == 1
    for x in (ZERO, F(2, 7), ONE):
        assert implies(x, x) == 1


def test_lattice_examples():
    assert meet(F(1, 2), F(1, 3)) == F(1, 3)
    assert neg(ZERO) == 1
    assert neg(F(1, 2)) == 0
    assert join(ZERO, F(3, 8)) == F(3, 8)


def test_floats_refused():
    with pytest.raises(TypeError):
        truth(0.5)
    with pytest.raises(ValueError):
        truth(F(3, 2))
    with pytest.raises(TypeError):
        Valuation({"p": 0.25})


@pytest.mark.parametrize("text, value", [("0", ZERO), ("1", ONE), ("2/4", F(1, 2)), (" 3/10", F(3, 10))])
def test_rational_strings(text, value):
    assert parse_rational(text) == value
    assert parse_rational(format_rational(value)) == value


@pytest.mark.parametrize("text", ["", "0.5", "-1/2", "3/2", "1/0", "a/b", "1//2"])
def test_bad_rational_strings(text):
    with pytest.raises((ValueError, ZeroDivisionError)):
        parse_rational(text)


def test_format_is_reduced():
    assert format_rational(F(4, 8)) == "1/2"
    assert format_rational(ONE) == "1"


def test_prop_eval_examples():
    assert prop_eval(parse("not not p"), Valuation({"p": F(1, 2)})) == 1
    v = Valuation({"[] p": 1, "q": F(1, 2)})
    assert prop_eval(parse("[] p -> q"), v) == F(1, 2)


def test_prelinearity_on_a_chain():
    f = parse("(p -> q) | (q -> p)")
    chain = [ZERO, F(1, 2), ONE]
    for a, b in itertools.product(chain, repeat=2):
        assert prop_eval(f, Valuation({"p": a, "q": b})) == 1


def test_missing_atom_is_an_error():
    with pytest.raises(MissingAtomError) as info:
        prop_eval(parse("p & [] q"), Valuation({"p": 1}))
    assert "[] q" in str(info.value)
    with pytest.raises(MissingAtomError):
        Valuation({"p": 1})["q"]


def test_valuation_keys_must_be_atoms():
    with pytest.raises(ValueError):
        Valuation({"p & q": 1})


def test_consequence_examples():
    assert godel_consequence([], parse("(p -> q) | (q -> p)"))
    assert not godel_consequence([], parse("not not p -> p"))
    assert godel_consequence([parse("p")], parse("p"))
    cv = countervaluation([], parse("not not p -> p"))
    assert cv is not None and 0 < cv["p"] < 1


def test_consequence_with_modal_atoms():
    assert godel_consequence([parse("[] p"), parse("[] p -> <> q")], parse("<> q"))
    assert not godel_consequence([], parse("[] p -> p"))


def test_atoms_of_orders_variables_first():
    f = parse("<> q -> p & [] p")
    # modal atoms are sorted by their text, and "<" sorts before "["
    assert atoms_of(f) == (Var("p"), Diamond(Var("q")), Box(Var("p")))


@given(fractions, fractions, fractions)
def test_residuation(x, y, z):
    assert (meet(x, y) <= z) == (x <= implies(y, z))


@given(fractions, fractions)
def test_implication_is_one_exactly_when_ordered(x, y):
    assert (implies(x, y) == 1) == (x <= y)


leaves = st.sampled_from([Var("p"), Var("q"), BOT])
prop_formulas = st.recursive(
    leaves,
    lambda kids: st.one_of(st.builds(And, kids, kids), st.builds(Or, kids, kids),
                           st.builds(Implies, kids, kids)),
    max_leaves=5)


def _brute_force_valid(f) -> bool:
    """Every valuation into the (|A|+2)-element chain, with plain Fractions."""
    atoms = atoms_of(f)
    m = len(atoms) + 1
    for combo in itertools.product(range(m + 1), repeat=len(atoms)):
        v = Valuation({a: F(k, m) for a, k in zip(atoms, combo)})
        if prop_eval(f, v) != 1:
            return False
    return True


@given(prop_formulas)
@settings(max_examples=300)
def test_consequence_matches_brute_force(f):
    assert godel_consequence([], f) == _brute_force_valid(f)


def _random_sigma(rng: random.Random) -> MonotoneMap:
    xs = sorted({F(rng.randrange(1, 50), 50) for _ in range(4)})
    ys = sorted({F(rng.randrange(1, 50), 50) for _ in range(len(xs))})
    while len(ys) < len(xs):
        ys = sorted({F(rng.randrange(1, 50), 50) for _ in range(len(xs))})
    return MonotoneMap(((ZERO, ZERO),) + tuple(zip(xs, ys)) + ((ONE, ONE),))


@given(prop_formulas, st.integers(0, 10 ** 6))
@settings(max_examples=200)
def test_order_invariance(f, seed):
    rng = random.Random(seed)
    sigma = _random_sigma(rng)
    assert sigma.is_strictly_increasing()
    v = Valuation({"p": F(rng.randrange(0, 13), 12), "q": F(rng.randrange(0, 13), 12)})
    moved = Valuation({a: sigma(x) for a, x in v.items()})
    assert prop_eval(f, moved) == sigma(prop_eval(f, v))
