"""Bounded model enumeration, random model generation and countermodel search.

Models are enumerated over the chain ``{0, 1/m, ..., 1}``. Internally a value
``k/m`` is stored as the integer ``k``; min, max and Gödel implication act on
the indices exactly, so the vectorized evaluator below agrees with the
rational evaluator in :mod:`kd45g.models` (every reported countermodel is
re-checked there before it is returned).

Classes:

``pi-g``                possibilistic models ``(W, pi, e)`` with ``max pi = 1``
``kd45-gk``             relational models whose ``R`` is serial, transitive, Euclidean
``crisp-ste``           ``kd45-gk`` restricted to {0, 1}
``crisp-semiuniversal`` relational models with ``R = W x E``, ``E`` non-empty, over {0, 1}
"""

from __future__ import annotations

import itertools
import json
import random
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from .algebra import ONE
from .formula import (
    BOT, And, Bot, Box, Diamond, Formula, Implies, Or, Var, parse, to_text,
    variables,
)
from .models import GKModel, PossModel, model_to_json

NO_COUNTERMODEL = "no countermodel within bounds"
COUNTERMODEL = "countermodel found"


class ModelClass(str, Enum):
    PI_G = "pi-g"
    KD45_GK = "kd45-gk"
    CRISP_STE = "crisp-ste"
    CRISP_SEMIUNIVERSAL = "crisp-semiuniversal"

    @property
    def relational(self) -> bool:
        return self is not ModelClass.PI_G

    @property
    def crisp(self) -> bool:
        return self in (ModelClass.CRISP_STE, ModelClass.CRISP_SEMIUNIVERSAL)


class RejectionBudgetExceeded(RuntimeError):
    def __init__(self, accepted: int, tried: int, wanted: int):
        self.accepted, self.tried, self.wanted = accepted, tried, wanted
        rate = accepted / tried if tried else 0.0
        super().__init__(
            f"rejection sampling gave {accepted}/{wanted} frames after {tried} proposals "
            f"(acceptance rate {rate:.2e})")


@dataclass(frozen=True)
class SearchBounds:
    max_worlds: int
    chain: int
    variables: tuple[str, ...] = ()
    seed: int | None = None
    samples: int = 0
    min_worlds: int = 1
    dedup: bool = True
    prune_order: bool = False

    def __post_init__(self):
        if self.max_worlds < 1:
            raise ValueError("max_worlds must be >= 1")
        if self.chain < 1:
            raise ValueError("chain denominator must be >= 1")
        if not 1 <= self.min_worlds <= self.max_worlds:
            raise ValueError("need 1 <= min_worlds <= max_worlds")
        object.__setattr__(self, "variables", tuple(sorted(set(self.variables))))

    def for_formula(self, *formulas: Formula) -> "SearchBounds":
        """Same bounds with the variable set widened to cover ``formulas``."""
        names = set(self.variables)
        for f in formulas:
            names.update(variables(f))
        return replace(self, variables=tuple(sorted(names)))

    def to_json(self) -> dict:
        out = {"max_worlds": self.max_worlds, "chain": self.chain,
               "variables": list(self.variables)}
        if self.min_worlds != 1:
            out["min_worlds"] = self.min_worlds
        if self.samples:
            out["samples"] = self.samples
        if not self.dedup:
            out["dedup"] = False
        if self.prune_order:
            out["prune_order"] = True
        return out


def default_chain(worlds: int, nvars: int) -> int:
    """Chain denominator ``k*n + 1`` used when none is given."""
    return worlds * max(nvars, 1) + 1


# ---------------------------------------------------------------------------
# frames

def _dtype(m: int):
    return np.int8 if m <= 127 else np.int16


@lru_cache(maxsize=None)
def pi_frames(k: int, m: int, dedup: bool = True) -> np.ndarray:
    """Normalized distributions over ``k`` worlds, shape ``(F, k)``.

    With ``dedup`` only the non-increasing representative of each renaming
    class is kept.
    """
    if dedup:
        rows = [(m,) + rest for rest in itertools.combinations_with_replacement(range(m, -1, -1), k - 1)]
    else:
        rows = [r for r in itertools.product(range(m + 1), repeat=k) if max(r) == m]
    return np.array(rows, dtype=_dtype(m)).reshape(len(rows), k)


def _ste_ok(R: np.ndarray, upto: int) -> np.ndarray:
    """Transitivity and Euclidean conditions on triples whose first two worlds are < ``upto``."""
    ok = np.ones(R.shape[0], dtype=bool)
    for w in range(upto):
        for w1 in range(upto):
            a = R[:, w, w1][:, None]
            ok &= np.all(np.minimum(a, R[:, w1, :]) <= R[:, w, :], axis=1)
            ok &= np.all(np.minimum(a, R[:, w, :]) <= R[:, w1, :], axis=1)
    return ok


def _canonical_under_renaming(R: np.ndarray) -> tuple[np.ndarray, list[list[tuple[int, ...]]]]:
    """Keep the lexicographically least member of each renaming class.

    Returns the kept frames and, per kept frame, its automorphisms.
    """
    k = R.shape[-1]
    perms = list(itertools.permutations(range(k)))
    keep, auts = [], []
    for idx in range(R.shape[0]):
        base = R[idx].tobytes()
        least = True
        mine = []
        for p in perms:
            q = R[idx][np.ix_(p, p)].tobytes()
            if q < base:
                least = False
                break
            if q == base:
                mine.append(p)
        if least:
            keep.append(idx)
            auts.append(mine)
    return R[keep], auts


@lru_cache(maxsize=None)
def ste_frames(k: int, m: int, dedup: bool = True):
    """Serial, transitive, Euclidean relations on ``k`` worlds over the chain.

    Returns ``(R, automorphisms)``; ``R`` has shape ``(F, k, k)``.
    """
    dt = _dtype(m)
    rows = np.array([r for r in itertools.product(range(m + 1), repeat=k) if max(r) == m], dtype=dt)
    partial = rows[:, None, :]
    for i in range(1, k):
        n = partial.shape[0]
        ext = np.concatenate([np.repeat(partial, len(rows), axis=0),
                              np.tile(rows, (n, 1))[:, None, :]], axis=1)
        # only triples with w, w1 <= i can be judged: they need rows w and w1
        ok = np.ones(ext.shape[0], dtype=bool)
        for w in range(i + 1):
            for w1 in range(i + 1):
                if w < i and w1 < i:
                    continue
                a = ext[:, w, w1][:, None]
                ok &= np.all(np.minimum(a, ext[:, w1, :]) <= ext[:, w, :], axis=1)
                ok &= np.all(np.minimum(a, ext[:, w, :]) <= ext[:, w1, :], axis=1)
        partial = ext[ok]
    if k == 1:
        partial = partial[_ste_ok(partial, 1)]
    if dedup:
        return _canonical_under_renaming(partial)
    ident = [tuple(range(k))]
    return partial, [ident] * partial.shape[0]


@lru_cache(maxsize=None)
def semiuniversal_frames(k: int, dedup: bool = True):
    # the least-under-renaming representative need not be non-increasing,
    # so canonicalize from the full set
    pis = pi_frames(k, 1, dedup=False)
    R = np.repeat(pis[:, None, :], k, axis=1)
    if dedup:
        return _canonical_under_renaming(R)
    return R, [[tuple(range(k))]] * R.shape[0]


def _pi_automorphisms(pi: np.ndarray) -> list[tuple[int, ...]]:
    k = len(pi)
    return [p for p in itertools.permutations(range(k)) if np.array_equal(pi[list(p)], pi)]


def frames(cls: ModelClass, k: int, m: int, dedup: bool = True):
    """``(array, automorphisms)`` for the frames of ``cls`` on ``k`` worlds."""
    if cls is ModelClass.PI_G:
        F = pi_frames(k, m, dedup)
        auts = [_pi_automorphisms(F[i]) if dedup else [tuple(range(k))] for i in range(F.shape[0])]
        return F, auts
    if cls is ModelClass.KD45_GK:
        return ste_frames(k, m, dedup)
    if cls is ModelClass.CRISP_STE:
        return ste_frames(k, 1, dedup)
    return semiuniversal_frames(k, dedup)


@lru_cache(maxsize=None)
def valuation_grid(k: int, n: int, m: int) -> np.ndarray:
    """Every valuation of ``n`` variables at ``k`` worlds, shape ``(E, k, n)``."""
    cells = k * n
    if cells == 0:
        return np.zeros((1, k, 0), dtype=_dtype(m))
    grid = np.indices((m + 1,) * cells, dtype=_dtype(m)).reshape(cells, -1).T
    return np.ascontiguousarray(grid.reshape(-1, k, n))


@lru_cache(maxsize=None)
def _world_codes(k: int, n: int, m: int) -> np.ndarray:
    grid = valuation_grid(k, n, m).astype(np.int64)
    weights = (m + 1) ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return grid @ weights if n else np.zeros((grid.shape[0], k), dtype=np.int64)


def _canonical_valuations(k: int, n: int, m: int, auts) -> np.ndarray | None:
    """Mask of valuations that are lexicographically least under the frame's automorphisms."""
    if len(auts) <= 1 or n == 0:
        return None
    codes = _world_codes(k, n, m)
    keep = np.ones(codes.shape[0], dtype=bool)
    for p in auts:
        if p == tuple(range(k)):
            continue
        perm = codes[:, list(p)]
        # lexicographic codes <= perm
        less = np.zeros_like(keep)
        equal = np.ones_like(keep)
        for w in range(k):
            less |= equal & (codes[:, w] < perm[:, w])
            equal &= codes[:, w] == perm[:, w]
        keep &= less | equal
    return keep


def _used_bits(arr: np.ndarray) -> np.ndarray:
    """Bitmask of chain values occurring in each row of ``arr`` (rows flattened)."""
    flat = arr.reshape(arr.shape[0], -1).astype(np.int64)
    bits = np.zeros(flat.shape[0], dtype=np.int64)
    for j in range(flat.shape[1]):
        bits |= np.left_shift(1, flat[:, j])
    return bits


def _order_canonical(bits: np.ndarray, m: int) -> np.ndarray:
    """True where the interior values used are exactly ``1..j`` for some ``j``."""
    interior = (bits >> 1) & ((1 << (m - 1)) - 1) if m > 1 else np.zeros_like(bits)
    return (interior & (interior + 1)) == 0


# ---------------------------------------------------------------------------
# vectorized evaluation

@dataclass
class Grid:
    """A batch of ``M`` models with ``k`` worlds each, stored as chain indices.

    Arrays are world-major so that per-world slices are contiguous:
    ``weights`` is ``(k, M)`` for distributions or ``(k, k, M)`` for
    relations, ``values`` is ``(n, k, M)``. Formula tables are ``(..., k, M)``;
    leading axes batch several formulas at once.
    """

    cls: ModelClass
    m: int
    k: int
    variables: tuple[str, ...]
    weights: np.ndarray
    values: np.ndarray
    frame_ids: np.ndarray | None = None

    def __len__(self):
        return self.weights.shape[-1]

    def var(self, name: str) -> np.ndarray:
        return self.values[self.variables.index(name)]

    def bot(self) -> np.ndarray:
        return np.zeros((self.k, len(self)), dtype=self.values.dtype)

    def implies(self, a, b):
        return np.where(a <= b, self.m, b).astype(self.values.dtype, copy=False)

    def _spread(self, acc: np.ndarray) -> np.ndarray:
        # world-independent value, same at every world
        return np.broadcast_to(acc[..., None, :], acc.shape[:-1] + (self.k, acc.shape[-1]))

    def box(self, a: np.ndarray) -> np.ndarray:
        k, W = self.k, self.weights
        if self.cls.relational:
            rows = []
            for i in range(k):
                acc = self.implies(W[i, 0], a[..., 0, :])
                for j in range(1, k):
                    np.minimum(acc, self.implies(W[i, j], a[..., j, :]), out=acc)
                rows.append(acc)
            return np.stack(rows, axis=-2)
        acc = self.implies(W[0], a[..., 0, :])
        for j in range(1, k):
            np.minimum(acc, self.implies(W[j], a[..., j, :]), out=acc)
        return self._spread(acc)

    def diamond(self, a: np.ndarray) -> np.ndarray:
        k, W = self.k, self.weights
        if self.cls.relational:
            rows = []
            for i in range(k):
                acc = np.minimum(W[i, 0], a[..., 0, :])
                for j in range(1, k):
                    np.maximum(acc, np.minimum(W[i, j], a[..., j, :]), out=acc)
                rows.append(acc)
            return np.stack(rows, axis=-2)
        acc = np.minimum(W[0], a[..., 0, :])
        for j in range(1, k):
            np.maximum(acc, np.minimum(W[j], a[..., j, :]), out=acc)
        return self._spread(acc)

    def evaluate(self, f: Formula, memo: dict | None = None) -> np.ndarray:
        """Values of ``f`` at every world of every model, shape ``(k, M)``."""
        memo = {} if memo is None else memo
        got = memo.get(f)
        if got is not None:
            return got
        if isinstance(f, Var):
            out = self.var(f.name)
        elif isinstance(f, Bot):
            out = self.bot()
        elif isinstance(f, Box):
            out = self.box(self.evaluate(f.body, memo))
        elif isinstance(f, Diamond):
            out = self.diamond(self.evaluate(f.body, memo))
        else:
            a = self.evaluate(f.lhs, memo)
            b = self.evaluate(f.rhs, memo)
            if isinstance(f, And):
                out = np.minimum(a, b)
            elif isinstance(f, Or):
                out = np.maximum(a, b)
            else:
                out = self.implies(a, b)
        memo[f] = out
        return out

    def model(self, i: int, world_names: Sequence[str] | None = None):
        """The ``i``-th model of the batch as a rational model object."""
        names = list(world_names or [f"w{j + 1}" for j in range(self.k)])
        m, k = self.m, self.k
        e = {names[j]: {p: Fraction(int(self.values[t, j, i]), m) for t, p in enumerate(self.variables)}
             for j in range(k)}
        if self.cls.relational:
            R = {names[a]: {names[b]: Fraction(int(self.weights[a, b, i]), m) for b in range(k)}
                 for a in range(k)}
            return GKModel(names, R, e, self.variables)
        pi = {names[j]: Fraction(int(self.weights[j, i]), m) for j in range(k)}
        return PossModel(names, pi, e, self.variables)


def _chain_for(cls: ModelClass, bounds: SearchBounds) -> int:
    return 1 if cls.crisp else bounds.chain


def iter_grids(cls: ModelClass, bounds: SearchBounds, chunk: int = 1 << 19) -> Iterator[Grid]:
    """Exhaustive enumeration in a fixed order: world count, frame, valuation."""
    m = _chain_for(cls, bounds)
    n = len(bounds.variables)
    for k in range(bounds.min_worlds, bounds.max_worlds + 1):
        F, auts = frames(cls, k, m, bounds.dedup)
        vals = valuation_grid(k, n, m)
        e_bits = _used_bits(vals) if bounds.prune_order else None
        f_bits = _used_bits(F) if bounds.prune_order else None
        pending_f, pending_e, size = [], [], 0

        def flush():
            fi = np.concatenate(pending_f)
            ei = np.concatenate(pending_e)
            W = np.ascontiguousarray(np.moveaxis(F[fi], 0, -1))
            V = np.ascontiguousarray(np.moveaxis(vals[ei], 0, -1).transpose(1, 0, 2))
            return Grid(cls, m, k, bounds.variables, W, V, frame_ids=fi)

        for i in range(F.shape[0]):
            mask = _canonical_valuations(k, n, m, auts[i]) if bounds.dedup else None
            if bounds.prune_order:
                okb = _order_canonical(e_bits | f_bits[i], m)
                mask = okb if mask is None else mask & okb
            idx = np.arange(vals.shape[0]) if mask is None else np.flatnonzero(mask)
            if idx.size == 0:
                continue
            pending_f.append(np.full(idx.size, i, dtype=np.int64))
            pending_e.append(idx)
            size += idx.size
            if size >= chunk:
                yield flush()
                pending_f, pending_e, size = [], [], 0
        if size:
            yield flush()


def enumerate_models(bounds: SearchBounds, cls: ModelClass | str) -> Iterator[PossModel | GKModel]:
    """Exhaustive stream of models within ``bounds``, one per renaming class."""
    cls = ModelClass(cls)
    for grid in iter_grids(cls, bounds):
        for i in range(len(grid)):
            yield grid.model(i)


def count_models(bounds: SearchBounds, cls: ModelClass | str) -> int:
    return sum(len(g) for g in iter_grids(ModelClass(cls), bounds))


# ---------------------------------------------------------------------------
# random models

def _random_ste(k: int, m: int, count: int, rng: np.random.Generator,
                budget: int) -> np.ndarray:
    """Rejection sampling of STE relations.

    Half of the proposals are uniform serial relations, half are relations
    ``R_pi`` with random entries overwritten; both go through the same three
    checks and only accepted proposals are returned.
    """
    dt = _dtype(m)
    accepted, tried = [], 0
    have = 0
    while have < count:
        if tried >= budget:
            raise RejectionBudgetExceeded(have, tried, count)
        batch = min(max(4 * (count - have), 1024), budget - tried)
        R = rng.integers(0, m + 1, size=(batch, k, k), dtype=np.int64)
        half = batch // 2
        pi = rng.integers(0, m + 1, size=(half, k))
        pi[np.arange(half), rng.integers(0, k, size=half)] = m
        base = np.repeat(pi[:, None, :], k, axis=1)
        keep = rng.random((half, k, k)) < 0.75
        R[:half] = np.where(keep, base, R[:half])
        # force seriality on the uniform half to raise the acceptance rate
        rows = np.arange(half, batch)
        for w in range(k):
            R[rows, w, rng.integers(0, k, size=batch - half)] = m
        ok = _ste_ok(R, k) & np.all(R.max(axis=2) == m, axis=1)
        tried += batch
        good = R[ok].astype(dt)
        accepted.append(good)
        have += good.shape[0]
    return np.concatenate(accepted)[:count]


def random_grid(cls: ModelClass, k: int, m: int, variables: Sequence[str], count: int,
                rng: np.random.Generator, budget: int = 10 ** 7) -> Grid:
    variables = tuple(sorted(set(variables)))
    m = 1 if cls.crisp else m
    dt = _dtype(m)
    if cls is ModelClass.PI_G:
        W = rng.integers(0, m + 1, size=(count, k))
        W[np.arange(count), rng.integers(0, k, size=count)] = m
    elif cls is ModelClass.CRISP_SEMIUNIVERSAL:
        E = rng.integers(0, 2, size=(count, k))
        E[np.arange(count), rng.integers(0, k, size=count)] = 1
        W = np.repeat(E[:, None, :], k, axis=1)
    else:
        W = _random_ste(k, m, count, rng, budget)
    vals = rng.integers(0, m + 1, size=(count, k, len(variables)))
    W = np.ascontiguousarray(np.moveaxis(W.astype(dt), 0, -1))
    V = np.ascontiguousarray(np.moveaxis(vals.astype(dt), 0, -1).transpose(1, 0, 2))
    return Grid(cls, m, k, variables, W, V)


def random_model(cls: ModelClass | str, worlds: int, chain: int, variables: Sequence[str],
                 seed: int, budget: int = 10 ** 7):
    """One random model, a deterministic function of ``seed``."""
    cls = ModelClass(cls)
    rng = np.random.default_rng(seed)
    return random_grid(cls, worlds, chain, variables, 1, rng, budget).model(0)


def iter_random_grids(cls: ModelClass, bounds: SearchBounds, budget: int = 10 ** 7) -> Iterator[Grid]:
    """``bounds.samples`` random models, world counts uniform in the bounds."""
    rng = np.random.default_rng(bounds.seed)
    ks = rng.integers(bounds.min_worlds, bounds.max_worlds + 1, size=bounds.samples)
    for k in range(bounds.min_worlds, bounds.max_worlds + 1):
        count = int(np.sum(ks == k))
        if count:
            yield random_grid(cls, k, bounds.chain, bounds.variables, count, rng, budget)


# ---------------------------------------------------------------------------
# countermodel search

@dataclass
class SearchReport:
    formula: Formula
    cls: ModelClass
    outcome: str
    bounds: SearchBounds
    models_examined: int
    mode: str = "exhaustive"
    model: PossModel | GKModel | None = None
    world: str | None = None
    value: Fraction | None = None
    elapsed: float = 0.0

    @property
    def found(self) -> bool:
        return self.model is not None

    def to_json(self, timing: bool = False) -> dict:
        out = {
            "formula": to_text(self.formula),
            "class": self.cls.value,
            "mode": self.mode,
            "outcome": self.outcome,
            "models_examined": self.models_examined,
            "bounds": self.bounds.to_json(),
        }
        if self.bounds.seed is not None and self.mode == "random":
            out["seed"] = self.bounds.seed
        if self.model is not None:
            out["witness"] = {"world": self.world, "value": _fmt(self.value),
                              "model": model_to_json(self.model)}
        if timing:
            out["elapsed_seconds"] = round(self.elapsed, 3)
        return out

    def summary(self) -> str:
        head = f"{to_text(self.formula)} [{self.cls.value}, {self.mode}]: {self.outcome}"
        head += f" ({self.models_examined} models examined)"
        if self.model is not None:
            head += f"; refuted at {self.world} with value {_fmt(self.value)}"
        return head


def _fmt(x: Fraction | None) -> str | None:
    if x is None:
        return None
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class SelfCheckError(AssertionError):
    """The vectorized engine reported a countermodel the rational evaluator rejects."""


def _scan(f: Formula, cls: ModelClass, bounds: SearchBounds, grids: Iterable[Grid],
          mode: str) -> SearchReport:
    start = time.perf_counter()
    examined = 0
    for grid in grids:
        vals = grid.evaluate(f)
        bad = vals < grid.m
        rows = np.flatnonzero(bad.any(axis=0))
        if rows.size:
            i = int(rows[0])
            examined += i + 1
            j = int(np.flatnonzero(bad[:, i])[0])
            model = grid.model(i)
            world = model.worlds[j]
            value = model.eval(world, f)
            if value >= ONE or value != Fraction(int(vals[j, i]), grid.m):
                raise SelfCheckError(f"engine and evaluator disagree on {to_text(f)}")
            return SearchReport(f, cls, COUNTERMODEL, bounds, examined, mode, model, world, value,
                                time.perf_counter() - start)
        examined += len(grid)
    return SearchReport(f, cls, NO_COUNTERMODEL, bounds, examined, mode,
                        elapsed=time.perf_counter() - start)


def find_countermodel(f: Formula | str, cls: ModelClass | str, bounds: SearchBounds) -> SearchReport:
    """First model/world in enumeration order where ``f`` takes a value below 1."""
    f = parse(f) if isinstance(f, str) else f
    cls = ModelClass(cls)
    bounds = bounds.for_formula(f)
    return _scan(f, cls, bounds, iter_grids(cls, bounds), "exhaustive")


def random_countermodel(f: Formula | str, cls: ModelClass | str, bounds: SearchBounds) -> SearchReport:
    """Search ``bounds.samples`` random models drawn from ``bounds.seed``."""
    f = parse(f) if isinstance(f, str) else f
    cls = ModelClass(cls)
    bounds = bounds.for_formula(f)
    if bounds.seed is None:
        bounds = replace(bounds, seed=0)
    return _scan(f, cls, bounds, iter_random_grids(cls, bounds), "random")


# ---------------------------------------------------------------------------
# class comparison

@dataclass
class ComparisonReport:
    classes: tuple[ModelClass, ...]
    bounds: SearchBounds
    rows: list[dict[ModelClass, SearchReport]] = field(default_factory=list)
    formulas: list[Formula] = field(default_factory=list)

    @property
    def discrepancies(self) -> list[Formula]:
        return [f for f, row in zip(self.formulas, self.rows)
                if len({r.found for r in row.values()}) > 1]

    def to_json(self) -> dict:
        return {
            "classes": [c.value for c in self.classes],
            "bounds": self.bounds.to_json(),
            "results": [
                {"formula": to_text(f),
                 **{c.value: row[c].outcome for c in self.classes}}
                for f, row in zip(self.formulas, self.rows)
            ],
            "discrepancies": [to_text(f) for f in self.discrepancies],
        }


def compare_classes(corpus: Iterable[Formula | str], bounds: SearchBounds,
                    classes: Sequence[ModelClass | str] = (ModelClass.PI_G, ModelClass.KD45_GK)
                    ) -> ComparisonReport:
    """Bounded countermodel status of every corpus formula in each class."""
    classes = tuple(ModelClass(c) for c in classes)
    report = ComparisonReport(classes, bounds)
    for f in corpus:
        f = parse(f) if isinstance(f, str) else f
        report.formulas.append(f)
        report.rows.append({c: find_countermodel(f, c, bounds) for c in classes})
    return report


def crisp_reduction_check(max_worlds: int, corpus: Iterable[Formula | str]) -> ComparisonReport:
    """Crisp serial-transitive-Euclidean models against semi-universal ``W x E`` models."""
    bounds = SearchBounds(max_worlds=max_worlds, chain=1)
    return compare_classes(corpus, bounds, (ModelClass.CRISP_STE, ModelClass.CRISP_SEMIUNIVERSAL))


# ---------------------------------------------------------------------------
# formula generation

def random_formula(rng: random.Random, depth: int, names: Sequence[str] = ("p", "q"),
                   leaf_bias: float = 0.25) -> Formula:
    """A random formula of tree depth at most ``depth``."""
    if depth == 0 or rng.random() < leaf_bias:
        pick = rng.randrange(len(names) + 1)
        return BOT if pick == len(names) else Var(names[pick])
    op = rng.choice((And, Or, Implies, Box, Diamond))
    if op in (Box, Diamond):
        return op(random_formula(rng, depth - 1, names, leaf_bias))
    return op(random_formula(rng, depth - 1, names, leaf_bias),
              random_formula(rng, depth - 1, names, leaf_bias))


def random_corpus(count: int, depth: int, names: Sequence[str] = ("p", "q"), seed: int = 0) -> list[Formula]:
    rng = random.Random(seed)
    return [random_formula(rng, depth, names) for _ in range(count)]


def formulas_up_to_depth(depth: int, names: Sequence[str] = ("p",)) -> list[Formula]:
    """Every formula tree of depth at most ``depth`` over ``names`` and ``bot``.

    The order is the one used by :func:`closure_verdicts`: leaves, then
    ``[]`` and ``<>`` of the previous level, then ``&``, ``|``, ``->`` over
    ordered pairs of the previous level.
    """
    level = [Var(n) for n in names] + [BOT]
    for _ in range(depth):
        prev = level
        level = [Var(n) for n in names] + [BOT]
        level += [Box(g) for g in prev] + [Diamond(g) for g in prev]
        for op in (And, Or, Implies):
            level += [op(a, b) for a in prev for b in prev]
    return level


@dataclass
class ClosureVerdicts:
    """Validity verdicts for every formula of depth at most ``depth``.

    ``valid[i]`` refers to the ``i``-th formula in the order of
    :func:`formulas_up_to_depth`; :meth:`formula` rebuilds it on demand, so
    the millions of depth-3 trees are never materialized.
    """

    depth: int
    names: tuple[str, ...]
    base: list[Formula]
    valid: np.ndarray
    models_examined: int

    def formula(self, i: int) -> Formula:
        leaves = [Var(n) for n in self.names] + [BOT]
        if self.depth == 0:
            return leaves[i]
        if i < len(leaves):
            return leaves[i]
        i -= len(leaves)
        N = len(self.base)
        if i < 2 * N:
            return (Box if i < N else Diamond)(self.base[i % N])
        i -= 2 * N
        op = (And, Or, Implies)[i // (N * N)]
        a, b = divmod(i % (N * N), N)
        return op(self.base[a], self.base[b])


def closure_verdicts(cls: ModelClass | str, bounds: SearchBounds, depth: int,
                     chunk_cells: int = 1 << 25) -> ClosureVerdicts:
    """Verdict "no countermodel within bounds" for all formulas up to ``depth`` at once.

    Formulas of depth ``depth - 1`` are evaluated as stacked tables; the last
    level is judged by broadcasting the connectives over pairs of tables.
    """
    cls = ModelClass(cls)
    names = tuple(bounds.variables)
    base = formulas_up_to_depth(depth - 1, names) if depth else []
    leaves = [Var(n) for n in names] + [BOT]
    N = len(base)
    total = len(leaves) + (2 * N + 3 * N * N if depth else 0)
    valid = np.ones(total, dtype=bool)
    examined = 0
    for grid in iter_grids(cls, bounds):
        examined += len(grid)
        m = grid.m
        memo: dict = {}
        lv = [np.all(grid.evaluate(f, memo) == m) for f in leaves]
        valid[:len(leaves)] &= lv
        if not depth:
            continue
        T = np.stack([np.asarray(grid.evaluate(f, memo)) for f in base])
        pos = len(leaves)
        for unary in (grid.box, grid.diamond):
            valid[pos:pos + N] &= np.all(unary(T) == m, axis=(1, 2))
            pos += N
        cells = T.shape[1] * T.shape[2]
        step = max(1, chunk_cells // max(1, N * cells))
        for op in ("and", "or", "implies"):
            for a0 in range(0, N, step):
                A = T[a0:a0 + step, None]
                if op == "and":
                    ok = np.all(np.minimum(A, T[None]) == m, axis=(2, 3))
                elif op == "or":
                    ok = np.all(np.maximum(A, T[None]) == m, axis=(2, 3))
                else:
                    ok = np.all(A <= T[None], axis=(2, 3))
                n_a = ok.shape[0]
                valid[pos + a0 * N: pos + (a0 + n_a) * N] &= ok.reshape(-1)
            pos += N * N
    return ClosureVerdicts(depth, names, base, valid, examined)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)
