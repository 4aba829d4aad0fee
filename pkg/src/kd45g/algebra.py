"""Exact arithmetic of the standard Gödel algebra on [0, 1].

Truth values are :class:`fractions.Fraction` instances restricted to [0, 1].
Floats are rejected: Gödel implication jumps at ``x == y`` so any rounding
can flip a verdict.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

import numpy as np

from .formula import (
    And, Bot, Box, Diamond, Formula, Or, Var, modal_atoms, parse, to_text,
)

TruthValue = Fraction
ZERO = Fraction(0)
ONE = Fraction(1)


class MissingAtomError(KeyError):
    """A valuation was asked for an atom outside its declared domain."""

    def __init__(self, atom: Formula):
        self.atom = atom
        super().__init__(f"valuation has no value for {to_text(atom)!r}")

    def __str__(self) -> str:
        return self.args[0]


def truth(x) -> Fraction:
    """Coerce ``x`` to an exact truth value, rejecting floats and out-of-range input."""
    if isinstance(x, float):
        raise TypeError(f"floating point truth value {x!r} refused; use a Fraction or 'a/b'")
    if isinstance(x, str):
        return parse_rational(x)
    v = Fraction(x)
    if not 0 <= v <= 1:
        raise ValueError(f"truth value {v} outside [0, 1]")
    return v


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not text or any(c not in "0123456789/" for c in text) or text.count("/") > 1:
        raise ValueError(f"not a rational literal: {text!r}")
    return truth(Fraction(text))


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def implies(x: Fraction, y: Fraction) -> Fraction:
    return ONE if x <= y else y


def meet(x: Fraction, y: Fraction) -> Fraction:
    return min(x, y)


def join(x: Fraction, y: Fraction) -> Fraction:
    return max(x, y)


def neg(x: Fraction) -> Fraction:
    return implies(x, ZERO)


class Valuation(Mapping):
    """Immutable map from atoms (variables and modal formulas) to truth values.

    Keys may be given as formulas or as formula text. Looking up an atom that
    was not declared raises :class:`MissingAtomError`; there is no default.
    """

    def __init__(self, values: Mapping | Iterable = ()):
        items = values.items() if isinstance(values, Mapping) else values
        data = {}
        for k, v in items:
            key = parse(k) if isinstance(k, str) else k
            if not isinstance(key, (Var, Box, Diamond)):
                raise ValueError(f"valuation key {to_text(key)!r} is not a variable or modal atom")
            data[key] = truth(v)
        self._data = data

    def __getitem__(self, atom: Formula) -> Fraction:
        if isinstance(atom, str):
            atom = parse(atom)
        try:
            return self._data[atom]
        except KeyError:
            raise MissingAtomError(atom) from None

    def __iter__(self):
        return iter(self._data)

    def __len__(self):
        return len(self._data)

    def __hash__(self):
        return hash(frozenset(self._data.items()))

    def __repr__(self):
        body = ", ".join(f"{to_text(k)!r}: {format_rational(v)!r}" for k, v in self._data.items())
        return f"Valuation({{{body}}})"

    def updated(self, changes: Mapping) -> "Valuation":
        merged = dict(self._data)
        merged.update(Valuation(changes)._data)
        return Valuation(merged)

    def to_json(self) -> dict[str, str]:
        return {to_text(k): format_rational(v) for k, v in self._data.items()}


def prop_eval(f: Formula, v: Mapping[Formula, Fraction]) -> Fraction:
    """Gödel value of ``f`` reading every ``[]``/``<>`` subtree as an opaque atom."""
    if isinstance(f, (Var, Box, Diamond)):
        if isinstance(v, Valuation):
            return v[f]
        try:
            return v[f]
        except KeyError:
            raise MissingAtomError(f) from None
    if isinstance(f, Bot):
        return ZERO
    a = prop_eval(f.lhs, v)
    b = prop_eval(f.rhs, v)
    if isinstance(f, And):
        return meet(a, b)
    if isinstance(f, Or):
        return join(a, b)
    return implies(a, b)


def atoms_of(*formulas: Formula) -> tuple[Formula, ...]:
    """Variables then modal atoms of the given formulas, deduplicated and sorted."""
    names = sorted({n for f in formulas for n in variables_outside_modal(f)})
    mods = []
    for f in formulas:
        for a in modal_atoms(f):
            if a not in mods:
                mods.append(a)
    mods.sort(key=to_text)
    return tuple(Var(n) for n in names) + tuple(mods)


def variables_outside_modal(f: Formula) -> set[str]:
    if isinstance(f, Var):
        return {f.name}
    if isinstance(f, (Box, Diamond, Bot)):
        return set()
    return variables_outside_modal(f.lhs) | variables_outside_modal(f.rhs)


# ---------------------------------------------------------------------------
# chain-index evaluation: value k stands for k/m, exact for Gödel connectives

def chain_eval(f: Formula, table: Mapping[Formula, np.ndarray], m: int) -> np.ndarray:
    if isinstance(f, (Var, Box, Diamond)):
        return table[f]
    if isinstance(f, Bot):
        return np.zeros((), dtype=np.int16)
    a = chain_eval(f.lhs, table, m)
    b = chain_eval(f.rhs, table, m)
    if isinstance(f, And):
        return np.minimum(a, b)
    if isinstance(f, Or):
        return np.maximum(a, b)
    return np.where(a <= b, m, b)


def godel_consequence(theory: Iterable[Formula], f: Formula) -> bool:
    """Decide ``min v(T) <= v(f)`` for every Gödel valuation ``v``.

    Connectives only see the relative order of atom values and the endpoints,
    so with ``n`` atoms the chain ``{0, 1/(n+1), ..., 1}`` realizes every
    order pattern and exhausting it is a complete check.
    """
    theory = tuple(theory)
    atoms = atoms_of(*theory, f)
    n = len(atoms)
    m = n + 1
    if n == 0:
        grid = np.zeros((1, 0), dtype=np.int16)
    else:
        grid = np.array(list(itertools.product(range(m + 1), repeat=n)), dtype=np.int16)
    table = {a: grid[:, i] for i, a in enumerate(atoms)}
    lhs = np.full(len(grid), m, dtype=np.int16)
    for t in theory:
        lhs = np.minimum(lhs, np.broadcast_to(chain_eval(t, table, m), lhs.shape))
    rhs = np.broadcast_to(chain_eval(f, table, m), lhs.shape)
    return bool(np.all(lhs <= rhs))


def countervaluation(theory: Iterable[Formula], f: Formula) -> Valuation | None:
    """A valuation refuting ``theory |= f``, or ``None`` when the consequence holds."""
    theory = tuple(theory)
    atoms = atoms_of(*theory, f)
    m = len(atoms) + 1
    for combo in itertools.product(range(m + 1), repeat=len(atoms)):
        v = Valuation({a: Fraction(k, m) for a, k in zip(atoms, combo)})
        lhs = min((prop_eval(t, v) for t in theory), default=ONE)
        if lhs > prop_eval(f, v):
            return v
    return None


def chain(m: int) -> list[Fraction]:
    return [Fraction(i, m) for i in range(m + 1)]


def iter_valuations(atoms: Iterable[Formula], values: Iterable[Fraction]) -> Iterator[Valuation]:
    atoms = tuple(atoms)
    values = tuple(values)
    for combo in itertools.product(values, repeat=len(atoms)):
        yield Valuation(dict(zip(atoms, combo)))
