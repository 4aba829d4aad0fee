"""Finite Gödel-Kripke models and possibilistic models.

Both kinds evaluate formulas with exact rationals. On a finite world set the
infimum and supremum in the modal clauses are plain ``min`` and ``max``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping, Sequence

from .algebra import ONE, ZERO, format_rational, implies, parse_rational
from .formula import (
    And, Bot, Box, Formula, Implies, Or, Var, is_propositional, parse,
    to_text, variables,
)


class ModelError(ValueError):
    """Malformed model: bad world, undeclared variable, or invalid table."""


class NotNormalizedError(ModelError):
    """A possibility distribution whose maximum is not exactly 1."""


class ModelFileError(ModelError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _check_value(x, where: str) -> Fraction:
    if isinstance(x, float):
        raise ModelError(f"{where}: floating point value {x!r} refused")
    v = Fraction(x)
    if not 0 <= v <= 1:
        raise ModelError(f"{where}: value {v} outside [0, 1]")
    return v


class _Model:
    worlds: tuple[str, ...]
    variables: tuple[str, ...]
    e: Mapping[str, Mapping[str, Fraction]]

    def _init_valuation(self, worlds, e, variables_):
        worlds = tuple(worlds)
        if not worlds:
            raise ModelError("a model needs at least one world")
        if len(set(worlds)) != len(worlds):
            raise ModelError("duplicate world names")
        if variables_ is None:
            variables_ = sorted({p for w in worlds for p in e.get(w, {})})
        variables_ = tuple(variables_)
        table = {}
        for w in worlds:
            row = e.get(w)
            if row is None:
                raise ModelError(f"no valuation given for world {w!r}")
            extra = set(row) - set(variables_)
            if extra:
                raise ModelError(f"world {w!r} assigns undeclared variables {sorted(extra)}")
            table[w] = {}
            for p in variables_:
                if p not in row:
                    raise ModelError(f"e({w}, {p}) missing")
                table[w][p] = _check_value(row[p], f"e({w}, {p})")
        self.worlds = worlds
        self.variables = variables_
        self.e = table
        self._index = {w: i for i, w in enumerate(worlds)}

    def _check_world(self, w: str) -> None:
        if w not in self._index:
            raise ModelError(f"unknown world {w!r}")

    def _check_vars(self, f: Formula) -> None:
        missing = set(variables(f)) - set(self.variables)
        if missing:
            raise ModelError(f"formula uses undeclared variables {sorted(missing)}")

    def weight(self, w: str, w2: str) -> Fraction:
        raise NotImplementedError

    def values(self, f: Formula) -> dict[str, Fraction]:
        """Value of ``f`` at every world."""
        self._check_vars(f)
        return self._values(f, {})

    def _values(self, f: Formula, memo: dict) -> dict[str, Fraction]:
        got = memo.get(f)
        if got is not None:
            return got
        W = self.worlds
        if isinstance(f, Var):
            out = {w: self.e[w][f.name] for w in W}
        elif isinstance(f, Bot):
            out = dict.fromkeys(W, ZERO)
        elif isinstance(f, (And, Or, Implies)):
            a = self._values(f.lhs, memo)
            b = self._values(f.rhs, memo)
            op = min if isinstance(f, And) else max if isinstance(f, Or) else implies
            out = {w: op(a[w], b[w]) for w in W}
        elif isinstance(f, Box):
            body = self._values(f.body, memo)
            out = {w: min(implies(self.weight(w, w2), body[w2]) for w2 in W) for w in W}
        else:
            body = self._values(f.body, memo)
            out = {w: max(min(self.weight(w, w2), body[w2]) for w2 in W) for w in W}
        memo[f] = out
        return out

    def eval(self, w: str, f: Formula) -> Fraction:
        self._check_world(w)
        return self.values(f)[w]


@dataclass(frozen=True)
class FrameCheck:
    holds: bool
    witness: tuple[str, ...] | None = None

    def __bool__(self) -> bool:
        return self.holds


class GKModel(_Model):
    """Worlds, a [0, 1]-valued accessibility relation ``R`` and a valuation ``e``."""

    kind = "relational"

    def __init__(self, worlds: Sequence[str], R: Mapping[str, Mapping[str, Any]],
                 e: Mapping[str, Mapping[str, Any]], variables: Sequence[str] | None = None):
        self._init_valuation(worlds, e, variables)
        rel = {}
        for w in self.worlds:
            row = R.get(w)
            if row is None:
                raise ModelError(f"R has no row for world {w!r}")
            rel[w] = {}
            for w2 in self.worlds:
                if w2 not in row:
                    raise ModelError(f"R({w}, {w2}) missing")
                rel[w][w2] = _check_value(row[w2], f"R({w}, {w2})")
            extra = set(row) - set(self.worlds)
            if extra:
                raise ModelError(f"R({w}, .) mentions unknown worlds {sorted(extra)}")
        self.R = rel

    def weight(self, w, w2):
        return self.R[w][w2]

    def __repr__(self):
        return f"GKModel(worlds={self.worlds}, R={self.R}, e={self.e})"

    def __eq__(self, other):
        return (isinstance(other, GKModel) and self.worlds == other.worlds
                and self.R == other.R and self.e == other.e and self.variables == other.variables)

    __hash__ = None


class PossModel(_Model):
    """Worlds, a normalized possibility distribution ``pi`` and a valuation ``e``."""

    kind = "possibilistic"

    def __init__(self, worlds: Sequence[str], pi: Mapping[str, Any],
                 e: Mapping[str, Mapping[str, Any]], variables: Sequence[str] | None = None):
        self._init_valuation(worlds, e, variables)
        dist = {}
        for w in self.worlds:
            if w not in pi:
                raise ModelError(f"pi({w}) missing")
            dist[w] = _check_value(pi[w], f"pi({w})")
        extra = set(pi) - set(self.worlds)
        if extra:
            raise ModelError(f"pi mentions unknown worlds {sorted(extra)}")
        if max(dist.values()) != ONE:
            raise NotNormalizedError(
                f"possibility distribution not normalized: max pi = {max(dist.values())}")
        self.pi = dist

    def weight(self, w, w2):
        return self.pi[w2]

    def __repr__(self):
        return f"PossModel(worlds={self.worlds}, pi={self.pi}, e={self.e})"

    def __eq__(self, other):
        return (isinstance(other, PossModel) and self.worlds == other.worlds
                and self.pi == other.pi and self.e == other.e and self.variables == other.variables)

    __hash__ = None


def eval_formula(M: _Model, w: str, f: Formula) -> Fraction:
    return M.eval(w, f)


def is_valid_in_model(M: _Model, f: Formula) -> bool:
    return all(v == ONE for v in M.values(f).values())


# ---------------------------------------------------------------------------
# frame properties

def is_serial(M: GKModel) -> FrameCheck:
    for w in M.worlds:
        if max(M.R[w].values()) != ONE:
            return FrameCheck(False, (w,))
    return FrameCheck(True)


def is_transitive(M: GKModel) -> FrameCheck:
    R, W = M.R, M.worlds
    for w in W:
        for w1 in W:
            for w2 in W:
                if min(R[w][w1], R[w1][w2]) > R[w][w2]:
                    return FrameCheck(False, (w, w1, w2))
    return FrameCheck(True)


def is_euclidean(M: GKModel) -> FrameCheck:
    R, W = M.R, M.worlds
    for w in W:
        for w1 in W:
            for w2 in W:
                if min(R[w][w1], R[w][w2]) > R[w1][w2]:
                    return FrameCheck(False, (w, w1, w2))
    return FrameCheck(True)


def is_kd45(M: GKModel) -> bool:
    return bool(is_serial(M)) and bool(is_transitive(M)) and bool(is_euclidean(M))


def to_relational(M: PossModel) -> GKModel:
    R = {w: {w2: M.pi[w2] for w2 in M.worlds} for w in M.worlds}
    return GKModel(M.worlds, R, M.e, M.variables)


# ---------------------------------------------------------------------------
# possibility and necessity of propositions

def _require_propositional(f: Formula) -> None:
    if not is_propositional(f):
        raise ValueError(f"measures apply to propositions only; {to_text(f)!r} has a modal operator")


def possibility_of(M: PossModel, f: Formula) -> Fraction:
    _require_propositional(f)
    vals = M.values(f)
    return max(min(M.pi[w], vals[w]) for w in M.worlds)


def necessity_of(M: PossModel, f: Formula) -> Fraction:
    _require_propositional(f)
    vals = M.values(f)
    return min(implies(M.pi[w], vals[w]) for w in M.worlds)


# ---------------------------------------------------------------------------
# JSON files

def model_to_json(M: _Model) -> dict:
    out: dict[str, Any] = {"kind": M.kind, "worlds": list(M.worlds)}
    if isinstance(M, PossModel):
        out["pi"] = {w: format_rational(M.pi[w]) for w in M.worlds}
    else:
        out["R"] = {w: {w2: format_rational(M.R[w][w2]) for w2 in M.worlds} for w in M.worlds}
    out["e"] = {w: {p: format_rational(M.e[w][p]) for p in M.variables} for w in M.worlds}
    return out


def _rational_at(value, path: str) -> Fraction:
    if not isinstance(value, str):
        raise ModelFileError(path, f"expected a rational string like \"2/5\", got {value!r}")
    try:
        return parse_rational(value)
    except ValueError as exc:
        raise ModelFileError(path, str(exc)) from None


def _object_at(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ModelFileError(path, "expected an object")
    return value


def model_from_json(data: Any) -> _Model:
    """Build a model from the decoded JSON document, citing the JSON path of any error."""
    data = _object_at(data, "$")
    kind = data.get("kind")
    if kind not in ("possibilistic", "relational"):
        raise ModelFileError("$.kind", f"expected \"possibilistic\" or \"relational\", got {kind!r}")
    worlds = data.get("worlds")
    if not isinstance(worlds, list) or not worlds or not all(isinstance(w, str) for w in worlds):
        raise ModelFileError("$.worlds", "expected a non-empty list of world names")
    e_raw = _object_at(data.get("e"), "$.e")
    e = {}
    for w, row in e_raw.items():
        row = _object_at(row, f"$.e.{w}")
        e[w] = {p: _rational_at(x, f"$.e.{w}.{p}") for p, x in row.items()}
    try:
        if kind == "possibilistic":
            pi_raw = _object_at(data.get("pi"), "$.pi")
            pi = {w: _rational_at(x, f"$.pi.{w}") for w, x in pi_raw.items()}
            return PossModel(worlds, pi, e)
        R_raw = _object_at(data.get("R"), "$.R")
        R = {}
        for w, row in R_raw.items():
            row = _object_at(row, f"$.R.{w}")
            R[w] = {w2: _rational_at(x, f"$.R.{w}.{w2}") for w2, x in row.items()}
        return GKModel(worlds, R, e)
    except ModelFileError:
        raise
    except NotNormalizedError as exc:
        raise ModelFileError("$.pi", str(exc)) from None
    except ModelError as exc:
        raise ModelFileError("$", str(exc)) from None


def load_model(path: str) -> _Model:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFileError("$", f"invalid JSON: {exc}") from None
    return model_from_json(data)


def dump_model(M: _Model, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_json(M), fh, indent=2)
        fh.write("\n")


def parse_formula(f: Formula | str) -> Formula:
    return parse(f) if isinstance(f, str) else f
