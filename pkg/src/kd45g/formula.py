"""Formulas of the bi-modal language over ``bot``, ``&``, ``|``, ``->``, ``[]`` and ``<>``.

Negation, ``top`` and ``<->`` are sugar and never appear in a tree::

    not A   ==  A -> bot
    top     ==  bot -> bot
    A <-> B ==  (A -> B) & (B -> A)

Precedence, tightest first: prefix operators (``not``, ``[]``, ``<>``), then
``&`` and ``|`` (same level, left associative), then ``->`` (right
associative), then ``<->`` (right associative).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping

__all__ = [
    "Formula", "Var", "Bot", "And", "Or", "Implies", "Box", "Diamond",
    "BOT", "TOP", "Not", "Iff", "ParseError",
    "parse", "to_text", "subformulas", "fixed_points", "modal_atoms",
    "variables", "size", "depth", "modal_depth", "substitute", "is_modal",
    "is_propositional",
]


class Formula:
    """Base class of formula nodes. Nodes are immutable and hash structurally."""

    __slots__ = ()

    def children(self) -> tuple["Formula", ...]:
        return ()

    def __str__(self) -> str:
        return to_text(self)


def _cached_hash(cls):
    # frozen dataclasses rehash the whole tree on every call; memoize once
    original = cls.__hash__

    def __hash__(self):
        h = self.__dict__.get("_h")
        if h is None:
            h = original(self)
            object.__setattr__(self, "_h", h)
        return h

    cls.__hash__ = __hash__
    return cls


@_cached_hash
@dataclass(frozen=True, eq=True)
class Var(Formula):
    name: str

    def __repr__(self) -> str:
        return f"Var({self.name!r})"


@_cached_hash
@dataclass(frozen=True, eq=True)
class Bot(Formula):
    def __repr__(self) -> str:
        return "Bot()"


@_cached_hash
@dataclass(frozen=True, eq=True)
class And(Formula):
    lhs: Formula
    rhs: Formula

    def children(self):
        return (self.lhs, self.rhs)


@_cached_hash
@dataclass(frozen=True, eq=True)
class Or(Formula):
    lhs: Formula
    rhs: Formula

    def children(self):
        return (self.lhs, self.rhs)


@_cached_hash
@dataclass(frozen=True, eq=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula

    def children(self):
        return (self.lhs, self.rhs)


@_cached_hash
@dataclass(frozen=True, eq=True)
class Box(Formula):
    body: Formula

    def children(self):
        return (self.body,)


@_cached_hash
@dataclass(frozen=True, eq=True)
class Diamond(Formula):
    body: Formula

    def children(self):
        return (self.body,)


BOT = Bot()
TOP = Implies(BOT, BOT)


def Not(f: Formula) -> Formula:
    return Implies(f, BOT)


def Iff(a: Formula, b: Formula) -> Formula:
    return And(Implies(a, b), Implies(b, a))


def is_modal(f: Formula) -> bool:
    return isinstance(f, (Box, Diamond))


# ---------------------------------------------------------------------------
# parsing

class ParseError(ValueError):
    """Syntax error at byte ``offset``; ``expected`` lists acceptable tokens."""

    def __init__(self, text: str, offset: int, expected: Iterable[str]):
        self.text = text
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        found = text[offset:offset + 10] or "end of input"
        super().__init__(
            f"syntax error at offset {offset}: expected one of "
            f"{', '.join(self.expected)}; found {found!r}"
        )


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<op><->|->|\[\]|<>|[&|()])|(?P<word>[a-z][a-zA-Z0-9_]*))"
)
_KEYWORDS = {"bot", "top", "not"}
_ATOM_START = ("identifier", "bot", "top", "not", "[]", "<>", "(")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, int]] = []
        pos = 0
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise ParseError(text, self._byte(pos), _ATOM_START + ("&", "|", "->", "<->", ")"))
            tok = m.group("op") or m.group("word")
            self.tokens.append((tok, m.start("op") if m.group("op") else m.start("word")))
            pos = m.end()
        self.tokens.append(("", len(text)))
        self.i = 0

    def _byte(self, char_offset: int) -> int:
        return len(self.text[:char_offset].encode("utf-8"))

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def error(self, expected) -> ParseError:
        return ParseError(self.text, self._byte(self.tokens[self.i][1]), expected)

    def advance(self) -> str:
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.iff()
        if self.peek() != "":
            raise self.error(("&", "|", "->", "<->", "end of input"))
        return f

    def iff(self) -> Formula:
        lhs = self.implication()
        if self.peek() == "<->":
            self.advance()
            return Iff(lhs, self.iff())
        return lhs

    def implication(self) -> Formula:
        lhs = self.junction()
        if self.peek() == "->":
            self.advance()
            return Implies(lhs, self.implication())
        return lhs

    def junction(self) -> Formula:
        f = self.prefix()
        while self.peek() in ("&", "|"):
            op = self.advance()
            rhs = self.prefix()
            f = And(f, rhs) if op == "&" else Or(f, rhs)
        return f

    def prefix(self) -> Formula:
        tok = self.peek()
        if tok == "not":
            self.advance()
            return Not(self.prefix())
        if tok == "[]":
            self.advance()
            return Box(self.prefix())
        if tok == "<>":
            self.advance()
            return Diamond(self.prefix())
        if tok == "(":
            self.advance()
            f = self.iff()
            if self.peek() != ")":
                raise self.error((")", "&", "|", "->", "<->"))
            self.advance()
            return f
        if tok == "bot":
            self.advance()
            return BOT
        if tok == "top":
            self.advance()
            return TOP
        if tok and tok[0].isalpha() and tok not in _KEYWORDS:
            self.advance()
            return Var(tok)
        raise self.error(_ATOM_START)


def parse(text: str) -> Formula:
    """Parse ASCII formula syntax into a sugar-free tree."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# printing

_LEVEL = {Implies: 1, And: 2, Or: 2}
_SYMBOL = {Implies: "->", And: "&", Or: "|"}


def to_text(f: Formula) -> str:
    """Print with the fewest parentheses that still re-parse to ``f``."""
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Bot):
        return "bot"
    if isinstance(f, (Box, Diamond)):
        op = "[]" if isinstance(f, Box) else "<>"
        body = f.body
        inner = to_text(body)
        if type(body) in _LEVEL:
            inner = f"({inner})"
        return f"{op} {inner}"
    level = _LEVEL[type(f)]
    left, right = to_text(f.lhs), to_text(f.rhs)
    if isinstance(f, Implies):
        # right associative
        if type(f.lhs) in _LEVEL and _LEVEL[type(f.lhs)] <= level:
            left = f"({left})"
        if type(f.rhs) in _LEVEL and _LEVEL[type(f.rhs)] < level:
            right = f"({right})"
    else:
        # & and | share a level and associate to the left
        if type(f.lhs) in _LEVEL and _LEVEL[type(f.lhs)] < level:
            left = f"({left})"
        if type(f.rhs) in _LEVEL and _LEVEL[type(f.rhs)] <= level:
            right = f"({right})"
    return f"{left} {_SYMBOL[type(f)]} {right}"


# ---------------------------------------------------------------------------
# structural queries

def _walk(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(g.children()))


def size(f: Formula) -> int:
    return sum(1 for _ in _walk(f))


def depth(f: Formula) -> int:
    kids = f.children()
    return 0 if not kids else 1 + max(depth(k) for k in kids)


def modal_depth(f: Formula) -> int:
    kids = f.children()
    inner = max((modal_depth(k) for k in kids), default=0)
    return inner + 1 if is_modal(f) else inner


def is_propositional(f: Formula) -> bool:
    return not any(is_modal(g) for g in _walk(f))


def _ordered(items: Iterable[Formula]) -> tuple[Formula, ...]:
    keyed = {g: (size(g), to_text(g)) for g in items}
    return tuple(sorted(keyed, key=keyed.__getitem__))


def subformulas(f: Formula) -> tuple[Formula, ...]:
    """All distinct subtrees of ``f`` plus ``bot``, ordered by size then text."""
    return _ordered(set(_walk(f)) | {BOT})


def fixed_points(f: Formula) -> tuple[Formula, ...]:
    """``[]t`` and ``<>t`` for every ``t`` in :func:`subformulas`."""
    out = []
    for g in subformulas(f):
        out.append(Box(g))
        out.append(Diamond(g))
    return tuple(out)


def modal_atoms(f: Formula) -> tuple[Formula, ...]:
    """Outermost ``[]``/``<>`` subtrees: the extra atoms when ``f`` is read propositionally."""
    found = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if is_modal(g):
            found.add(g)
        else:
            stack.extend(g.children())
    return _ordered(found)


def variables(f: Formula) -> tuple[str, ...]:
    return tuple(sorted({g.name for g in _walk(f) if isinstance(g, Var)}))


def transform(f: Formula, leaf: Callable[[Formula], Formula | None]) -> Formula:
    """Rebuild ``f`` bottom-up; ``leaf`` may replace any node before descent."""
    out = leaf(f)
    if out is not None:
        return out
    if isinstance(f, (Var, Bot)):
        return f
    if isinstance(f, (Box, Diamond)):
        return type(f)(transform(f.body, leaf))
    return type(f)(transform(f.lhs, leaf), transform(f.rhs, leaf))


def substitute(f: Formula, mapping: Mapping[str, Formula]) -> Formula:
    """Simultaneous replacement of variables named in ``mapping``."""
    return transform(f, lambda g: mapping.get(g.name) if isinstance(g, Var) else None)
