import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from kd45g.formula import BOT, TOP, And, Box, Diamond, Implies, Not, Or, Var, parse
from kd45g.models import (
    GKModel, ModelError, ModelFileError, NotNormalizedError, PossModel, dump_model,
    is_euclidean, is_kd45, is_serial, is_transitive, is_valid_in_model, load_model,
    model_from_json, model_to_json, necessity_of, possibility_of, to_relational,
)
from kd45g.search import ModelClass, random_model


@pytest.fixture
def two_worlds():
    return PossModel(["w1", "w2"], {"w1": 1, "w2": F(2, 5)},
                     {"w1": {"p": F(3, 10)}, "w2": {"p": F(4, 5)}})


def test_diamond_and_box_by_hand(two_worlds):
    # max(min(1, 3/10), min(2/5, 4/5)) and min(1 => 3/10, 2/5 => 4/5)
    assert two_worlds.eval("w1", parse("<> p")) == F(2, 5)
    assert two_worlds.eval("w1", parse("[] p")) == F(3, 10)
    assert two_worlds.eval("w2", BOT) == 0


def test_measures(two_worlds):
    assert possibility_of(two_worlds, Var("p")) == F(2, 5)
    assert necessity_of(two_worlds, Var("p")) == F(3, 10)
    assert possibility_of(two_worlds, TOP) == 1
    assert necessity_of(two_worlds, TOP) == 1
    assert possibility_of(two_worlds, BOT) == 0
    with pytest.raises(ValueError):
        possibility_of(two_worlds, parse("[] p"))


def test_relational_copy(two_worlds):
    R = to_relational(two_worlds)
    assert R.R["w1"] == R.R["w2"] == {"w1": 1, "w2": F(2, 5)}
    assert is_kd45(R)
    single = PossModel(["w"], {"w": 1}, {"w": {"p": 0}})
    assert to_relational(single).R == {"w": {"w": 1}}


def test_non_euclidean_witness():
    M = GKModel(["w1", "w2"],
                {"w1": {"w1": 1, "w2": 1}, "w2": {"w1": F(3, 10), "w2": F(3, 10)}},
                {"w1": {}, "w2": {}})
    check = is_euclidean(M)
    assert not check
    assert check.witness == ("w1", "w2", "w1")
    assert not is_serial(M) and is_serial(M).witness == ("w2",)


def test_non_transitive_witness():
    M = GKModel(["a", "b", "c"],
                {"a": {"a": 0, "b": 1, "c": 0}, "b": {"a": 0, "b": 0, "c": 1}, "c": {"a": 0, "b": 0, "c": 1}},
                {w: {} for w in "abc"})
    assert is_transitive(M).witness == ("a", "b", "c")


def test_box_p_to_p_fails_at_w2():
    M = PossModel(["w1", "w2"], {"w1": 1, "w2": 0}, {"w1": {"p": 1}, "w2": {"p": 0}})
    assert M.eval("w2", parse("[] p")) == 1
    assert M.eval("w2", parse("[] p -> p")) == 0
    assert not is_valid_in_model(M, parse("[] p -> p"))
    assert is_valid_in_model(M, TOP)


def test_validation_errors():
    with pytest.raises(NotNormalizedError):
        PossModel(["a"], {"a": F(1, 2)}, {"a": {}})
    with pytest.raises(ModelError):
        PossModel(["a"], {"a": 1}, {"a": {"p": 0.5}})
    with pytest.raises(ModelError):
        PossModel(["a", "a"], {"a": 1}, {"a": {}})
    M = PossModel(["a"], {"a": 1}, {"a": {"p": 0}})
    with pytest.raises(ModelError, match="unknown world"):
        M.eval("b", Var("p"))
    with pytest.raises(ModelError, match="undeclared"):
        M.eval("a", Var("q"))


def test_json_round_trip(tmp_path, two_worlds):
    path = tmp_path / "m.json"
    dump_model(two_worlds, str(path))
    assert load_model(str(path)) == two_worlds
    R = to_relational(two_worlds)
    assert model_from_json(json.loads(json.dumps(model_to_json(R)))) == R


@pytest.mark.parametrize("doc, path", [
    ({"kind": "modal", "worlds": ["a"]}, "$.kind"),
    ({"kind": "possibilistic", "worlds": [], "pi": {}, "e": {}}, "$.worlds"),
    ({"kind": "possibilistic", "worlds": ["a"], "pi": {"a": "1"}, "e": {"a": {"p": 0.5}}}, "$.e.a.p"),
    ({"kind": "possibilistic", "worlds": ["a"], "pi": {"a": "1/2"}, "e": {"a": {}}}, "$.pi"),
    ({"kind": "relational", "worlds": ["a"], "R": {"a": {"a": "x"}}, "e": {"a": {}}}, "$.R.a.a"),
    ({"kind": "possibilistic", "worlds": ["a"], "pi": {"a": "1"}, "e": []}, "$.e"),
])
def test_json_errors_cite_paths(doc, path):
    with pytest.raises(ModelFileError) as info:
        model_from_json(doc)
    assert info.value.path == path


small = st.fractions(min_value=0, max_value=1, max_denominator=6)
leaves = st.sampled_from([Var("p"), Var("q"), BOT])
formulas = st.recursive(
    leaves,
    lambda kids: st.one_of(st.builds(And, kids, kids), st.builds(Or, kids, kids),
                           st.builds(Implies, kids, kids), st.builds(Box, kids),
                           st.builds(Diamond, kids)),
    max_leaves=6)
positive = st.recursive(
    leaves,
    lambda kids: st.one_of(st.builds(And, kids, kids), st.builds(Or, kids, kids),
                           st.builds(Box, kids), st.builds(Diamond, kids)),
    max_leaves=6)
seeds = st.integers(0, 2 ** 32 - 1)


@given(formulas, seeds, st.integers(1, 4))
@settings(max_examples=150)
def test_modal_values_ignore_the_world(f, seed, k):
    M = random_model(ModelClass.PI_G, k, 6, ("p", "q"), seed)
    for g in (Box(f), Diamond(f)):
        assert len(set(M.values(g).values())) == 1


@given(formulas, seeds, st.integers(1, 4))
@settings(max_examples=150)
def test_relational_copy_agrees(f, seed, k):
    M = random_model(ModelClass.PI_G, k, 6, ("p", "q"), seed)
    R = to_relational(M)
    assert is_kd45(R)
    assert M.values(f) == R.values(f)


@given(formulas, seeds)
@settings(max_examples=150)
def test_first_duality(f, seed):
    M = random_model(ModelClass.PI_G, 3, 6, ("p", "q"), seed)
    assert M.values(Not(Diamond(f))) == M.values(Box(Not(f)))


@given(positive, seeds, st.sampled_from(["w1", "w2", "w3"]), small)
@settings(max_examples=150)
def test_raising_a_variable_never_lowers_positive_formulas(f, seed, world, bump):
    M = random_model(ModelClass.KD45_GK, 3, 6, ("p", "q"), seed)
    e = {w: dict(M.e[w]) for w in M.worlds}
    e[world]["p"] = max(e[world]["p"], bump)
    raised = GKModel(M.worlds, M.R, e, M.variables)
    before, after = M.values(f), raised.values(f)
    assert all(after[w] >= before[w] for w in M.worlds)


@given(seeds)
@settings(max_examples=50)
def test_five_dia_valid_in_possibilistic_models(seed):
    M = random_model(ModelClass.PI_G, 3, 7, ("p",), seed)
    assert is_valid_in_model(M, parse("<> p -> [] <> p"))
