"""Finite fragments of the canonical-model construction.

Everything here works on :class:`~kd45g.algebra.Valuation` objects over
variables and modal atoms. For a formula ``f`` the *fixed points* are
``Delta_f = {[]t, <>t : t in Sub(f)}``; two valuations are equivalent modulo
``f`` when they agree on all of them.

The normalization transform takes a base valuation ``u`` and a Gödel
valuation ``nu`` that respects the order of ``u`` on the low fixed points and
sends the high ones to 1, and builds a valuation ``w`` that agrees with ``u``
on the fixed points while copying the order pattern of ``nu`` below a cut
``delta``::

    w(p) = g(nu(p))   if nu(p) < 1
    w(p) = h(u(p))    if nu(p) = 1

``g`` and ``h`` are :class:`MonotoneMap` objects whose breakpoints can be
inspected.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .algebra import (
    ONE, ZERO, MissingAtomError, Valuation, atoms_of, format_rational, implies, parse_rational,
    prop_eval, truth, variables_outside_modal,
)
from .formula import (
    TOP, Box, Diamond, Formula, Implies, Var, fixed_points, modal_atoms, parse,
    subformulas, substitute, to_text, variables,
)
from .models import PossModel


class NormalizationError(ValueError):
    """A normalization problem violates a named precondition.

    ``condition`` is one of ``"condition a"``, ``"condition b"``,
    ``"condition c"``, ``"zero-anchor"``, ``"delta-range"``, ``"ill-formed B"``
    or ``"coverage"``; ``witness`` holds the offending atoms.
    """

    def __init__(self, condition: str, message: str, witness: tuple = ()):
        self.condition = condition
        self.witness = tuple(witness)
        super().__init__(f"{condition}: {message}")


def _formula(f: Formula | str) -> Formula:
    return parse(f) if isinstance(f, str) else f


def _require(v: Mapping, atoms: Iterable[Formula], who: str) -> None:
    for a in atoms:
        if a not in v:
            raise MissingAtomError(a)


# ---------------------------------------------------------------------------
# equivalence and the canonical possibility degree

def equivalent_mod_phi(u: Mapping, w: Mapping, f: Formula | str) -> bool:
    """True when ``u`` and ``w`` agree on every fixed point of ``f``."""
    f = _formula(f)
    delta = fixed_points(f)
    _require(u, delta, "u")
    _require(w, delta, "w")
    return all(u[a] == w[a] for a in delta)


def pi_phi(v: Mapping, u: Mapping, f: Formula | str) -> Fraction:
    """``min`` over ``t`` in Sub(f) of ``min(v([]t) => u(t), u(t) => v(<>t))``.

    ``u(t)`` is the propositional value of ``t`` with modal subtrees read as atoms.
    """
    f = _formula(f)
    _require(v, fixed_points(f), "v")
    out = ONE
    for t in subformulas(f):
        ut = prop_eval(t, u)
        out = min(out, implies(v[Box(t)], ut), implies(ut, v[Diamond(t)]))
    return out


def world_valuation(M, world: str, atoms: Iterable[Formula]) -> Valuation:
    """Values of variables and modal atoms at ``world`` of ``M``."""
    return Valuation({a: M.eval(world, a) for a in atoms})


# ---------------------------------------------------------------------------
# monotone maps

@dataclass(frozen=True)
class MonotoneMap:
    """Piecewise-linear map through ``breakpoints`` plus isolated points.

    With ``open_right`` the last breakpoint is a limit and not part of the
    domain; an isolated point may then sit at the same abscissa (``1 -> 1``).
    """

    breakpoints: tuple[tuple[Fraction, Fraction], ...]
    isolated: tuple[tuple[Fraction, Fraction], ...] = ()
    open_right: bool = False

    def __call__(self, x) -> Fraction:
        x = Fraction(x)
        for a, b in self.isolated:
            if x == a:
                return b
        pts = self.breakpoints
        lo, hi = pts[0][0], pts[-1][0]
        if x < lo or x > hi or (self.open_right and x == hi):
            raise ValueError(f"{x} outside the domain of the map")
        if len(pts) == 1:
            return pts[0][1]
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if x0 <= x <= x1:
                if x1 == x0:
                    return y0
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        raise AssertionError("unreachable")

    def is_strictly_increasing(self) -> bool:
        """Strict increase on the continuous part."""
        pts = self.breakpoints
        return all(x0 < x1 and y0 < y1 for (x0, y0), (x1, y1) in zip(pts, pts[1:]))

    def to_json(self) -> dict:
        return {
            "breakpoints": [[format_rational(x), format_rational(y)] for x, y in self.breakpoints],
            "open_right": self.open_right,
            "isolated": [[format_rational(x), format_rational(y)] for x, y in self.isolated],
        }


# ---------------------------------------------------------------------------
# normalization problems

@dataclass(frozen=True)
class NormalizationProblem:
    """Base valuation ``u``, Gödel valuation ``nu``, formula ``phi`` and cut ``delta``.

    ``u`` and ``nu`` share one domain covering the fixed points of ``phi``.
    ``delta`` defaults to the midpoint of ``(alpha, beta]`` and to ``beta``
    when that interval is a single point.
    """

    u: Valuation
    nu: Valuation
    phi: Formula
    delta: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "phi", _formula(self.phi))
        for name in ("u", "nu"):
            val = getattr(self, name)
            if not isinstance(val, Valuation):
                object.__setattr__(self, name, Valuation(val))
        if self.delta is not None:
            object.__setattr__(self, "delta", truth(self.delta))

    @property
    def delta_set(self) -> tuple[Formula, ...]:
        return fixed_points(self.phi)

    @property
    def alpha(self) -> Fraction:
        return max((self.u[a] for a in self.delta_set if self.nu[a] < ONE), default=ZERO)

    @property
    def beta(self) -> Fraction:
        return min((self.u[a] for a in self.delta_set if self.nu[a] == ONE), default=ONE)

    @property
    def cut(self) -> Fraction:
        """``delta`` as given, or its default."""
        if self.delta is not None:
            return self.delta
        a, b = self.alpha, self.beta
        return (a + b) / 2 if a < b else b

    def validate(self, membership_depth: int = 0) -> None:
        """Raise :class:`NormalizationError` naming the first violated precondition."""
        u, nu = self.u, self.nu
        if set(u) != set(nu):
            odd = sorted(to_text(a) for a in set(u) ^ set(nu))
            raise NormalizationError("coverage", "u and nu must share one domain", odd)
        missing = [a for a in self.delta_set if a not in u]
        if missing:
            raise NormalizationError("coverage", "fixed points not covered",
                                     [to_text(a) for a in missing])
        delta = self.delta_set
        alpha, beta = self.alpha, self.beta
        low = [a for a in delta if u[a] <= alpha]
        for a, b in itertools.permutations(low, 2):
            if (nu[a] < nu[b]) != (u[a] < u[b]):
                raise NormalizationError(
                    "condition b",
                    f"nu({to_text(a)}) = {format_rational(nu[a])}, nu({to_text(b)}) = {format_rational(nu[b])} "
                    f"but u({to_text(a)}) = {format_rational(u[a])}, u({to_text(b)}) = {format_rational(u[b])}",
                    (to_text(a), to_text(b)))
        for a in delta:
            if u[a] > alpha and nu[a] != ONE:
                raise NormalizationError(
                    "condition c", f"u({to_text(a)}) = {format_rational(u[a])} > alpha but nu is "
                    f"{format_rational(nu[a])}", (to_text(a),))
        # g is pinned at 0 -> 0, so a low fixed point is 0 under nu exactly when it is 0 under u
        for a in delta:
            if nu[a] < ONE and (nu[a] == ZERO) != (u[a] == ZERO):
                raise NormalizationError(
                    "zero-anchor", f"nu({to_text(a)}) = {format_rational(nu[a])} but "
                    f"u({to_text(a)}) = {format_rational(u[a])}", (to_text(a),))
        anchors: dict[Fraction, Formula] = {}
        for a in delta:
            if nu[a] < ONE:
                b = anchors.setdefault(nu[a], a)
                if u[b] != u[a]:
                    raise NormalizationError(
                        "ill-formed B", f"{to_text(a)} and {to_text(b)} share nu = {format_rational(nu[a])} "
                        f"with different u values", (to_text(b), to_text(a)))
        d = self.cut
        if not alpha < d <= beta:
            raise NormalizationError(
                "delta-range", f"need alpha < delta <= beta, got alpha = {format_rational(alpha)}, "
                f"delta = {format_rational(d)}, beta = {format_rational(beta)}")
        if d == beta:
            below = [a for a in u if nu[a] == ONE and u[a] < beta]
            if below:
                raise NormalizationError(
                    "delta-range", f"delta = beta leaves no room for h below beta, but "
                    f"u({to_text(below[0])}) = {format_rational(u[below[0]])} with nu = 1",
                    (to_text(below[0]),))
        report = check_membership_approx(nu, self.phi, membership_depth)
        if not report:
            bad = report.failures[0]
            raise NormalizationError("condition a", f"nu gives {format_rational(prop_eval(bad, nu))} "
                                     f"to the axiom instance {to_text(bad)}", (to_text(bad),))

    def to_json(self) -> dict:
        out = {"u": self.u.to_json(), "nu": self.nu.to_json()}
        if self.delta is not None:
            out["delta"] = format_rational(self.delta)
        out["phi"] = to_text(self.phi)
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "NormalizationProblem":
        for key in ("u", "nu", "phi"):
            if key not in data:
                raise ValueError(f"normalization problem needs a {key!r} field")
        delta = data.get("delta")
        return cls(Valuation({k: parse_rational(v) for k, v in data["u"].items()}),
                   Valuation({k: parse_rational(v) for k, v in data["nu"].items()}),
                   parse(data["phi"]),
                   None if delta is None else parse_rational(delta))


@dataclass(frozen=True)
class Normalization:
    problem: NormalizationProblem
    g: MonotoneMap
    h: MonotoneMap
    w: Valuation

    def to_json(self) -> dict:
        p = self.problem
        return {"alpha": format_rational(p.alpha), "beta": format_rational(p.beta),
                "delta": format_rational(p.cut), "g": self.g.to_json(), "h": self.h.to_json(),
                "w": self.w.to_json()}


def build_g(problem: NormalizationProblem) -> MonotoneMap:
    """``g(0) = 0``, ``g(b_i) = u(lambda_i)``, ``(b_N, 1) -> (alpha, delta)``, ``g(1) = 1``."""
    u, nu = problem.u, problem.nu
    anchors = {ZERO: ZERO}
    for a in problem.delta_set:
        if nu[a] < ONE:
            anchors.setdefault(nu[a], u[a])
    pts = sorted(anchors.items())
    pts.append((ONE, problem.cut))
    return MonotoneMap(tuple(pts), isolated=((ONE, ONE),), open_right=True)


def build_h(problem: NormalizationProblem) -> MonotoneMap:
    """``h(0) = delta``, linear onto ``(delta, beta)``, identity on ``[beta, 1]``.

    When ``delta = beta`` the first piece would be constant, so the domain
    shrinks to ``[beta, 1]``; validation has already made sure no atom
    needs ``h`` below ``beta``.
    """
    d, beta = problem.cut, problem.beta
    pts = [] if d == beta else [(ZERO, d)]
    if beta > ZERO:
        pts.append((beta, beta))
    if beta < ONE:
        pts.append((ONE, ONE))
    return MonotoneMap(tuple(pts))


def normalize(problem: NormalizationProblem, membership_depth: int = 0) -> Normalization:
    """Validate ``problem`` and build ``w`` atom by atom."""
    problem.validate(membership_depth)
    g, h = build_g(problem), build_h(problem)
    u, nu = problem.u, problem.nu
    w = Valuation({a: g(nu[a]) if nu[a] < ONE else h(u[a]) for a in u})
    return Normalization(problem, g, h, w)


@dataclass(frozen=True)
class Violation:
    postcondition: int
    psi: Formula
    chi: Formula | None
    detail: str

    def __str__(self) -> str:
        pair = to_text(self.psi) if self.chi is None else f"{to_text(self.psi)}, {to_text(self.chi)}"
        return f"postcondition {self.postcondition} fails for {pair}: {self.detail}"


def check_postconditions(result: Normalization, targets: Iterable[Formula | str]) -> list[Violation]:
    """All violations of the six order postconditions over ``targets``."""
    p = result.problem
    d = p.cut
    rows = []
    for t in dict.fromkeys(_formula(t) for t in targets):
        rows.append((t, prop_eval(t, p.nu), prop_eval(t, p.u), prop_eval(t, result.w)))
    out = []
    for t, n, _, w in rows:
        if n == ONE and not w >= d:
            out.append(Violation(1, t, None, f"nu = 1 but w = {format_rational(w)} < delta"))
        if n < ONE and not w < d:
            out.append(Violation(2, t, None, f"nu < 1 but w = {format_rational(w)} >= delta"))
    for (t1, n1, u1, w1), (t2, n2, u2, w2) in itertools.permutations(rows, 2):
        failed = []
        if n1 != ONE and n1 <= n2 and not w1 <= w2:
            failed.append(3)
        if n1 < n2 and not w1 < w2:
            failed.append(4)
        if n1 == n2 == ONE and u1 <= u2 and not w1 <= w2:
            failed.append(5)
        if n1 == n2 == ONE and u1 < u2 and not w1 < w2:
            failed.append(6)
        if failed:
            vals = (f"nu = ({format_rational(n1)}, {format_rational(n2)}), "
                    f"u = ({format_rational(u1)}, {format_rational(u2)}), "
                    f"w = ({format_rational(w1)}, {format_rational(w2)})")
            out.extend(Violation(k, t1, t2, vals) for k in failed)
    return out


def default_targets(problem: NormalizationProblem) -> tuple[Formula, ...]:
    """Domain atoms, fixed points and the subformulas of ``phi`` the domain covers."""
    seen = dict.fromkeys(problem.u)
    seen.update(dict.fromkeys(problem.delta_set))
    domain = set(problem.u)
    for t in subformulas(problem.phi):
        if set(atoms_of(t)) <= domain:
            seen[t] = None
    return tuple(seen)


# ---------------------------------------------------------------------------
# bounded theory membership

@dataclass
class MembershipReport:
    checked: int = 0
    skipped: int = 0
    failures: list[Formula] = field(default_factory=list)

    def __bool__(self) -> bool:
        return not self.failures


def membership_pool(f: Formula, depth: int) -> tuple[Formula, ...]:
    """Sub(f), the fixed points and ``top``, closed ``depth`` times under ``[]`` and ``<>``."""
    pool = dict.fromkeys(subformulas(f) + fixed_points(f) + (TOP,))
    layer = list(pool)
    for _ in range(depth):
        layer = [op(g) for g in layer for op in (Box, Diamond) if op(g) not in pool]
        pool.update(dict.fromkeys(layer))
    return tuple(pool)


def check_membership_approx(w: Mapping, f: Formula | str, depth: int = 0) -> MembershipReport:
    """Bounded check that ``w`` gives 1 to the modal axioms of KD45(G).

    Every modal axiom schema is instantiated with formulas from
    :func:`membership_pool`. Instances mentioning an atom outside the domain of
    ``w`` cannot be evaluated and are counted as skipped. The propositional
    axioms are left out: every Gödel valuation gives them 1.
    """
    from .proofs import MODAL_AXIOMS, instantiate

    f = _formula(f)
    pool = membership_pool(f, depth)
    domain = set(w)
    covered = {g: set(atoms_of(g)) <= domain for g in pool}
    report = MembershipReport()
    for schema in MODAL_AXIOMS.values():
        mvs = schema.metavariables
        slots = modal_atoms(schema.template)
        bare = [i for i, mv in enumerate(mvs) if mv in variables_outside_modal(schema.template)]
        for combo in itertools.product(pool, repeat=len(mvs)):
            subst = dict(zip(mvs, combo))
            if not all(covered[combo[i]] for i in bare) or \
                    not all(substitute(slot, subst) in domain for slot in slots):
                report.skipped += 1
                continue
            inst = instantiate(schema, subst)
            report.checked += 1
            if prop_eval(inst, w) != ONE:
                report.failures.append(inst)
    return report


# ---------------------------------------------------------------------------
# the theory used to push a box value down

def gamma_set(psi: Formula | str, u: Mapping, f: Formula | str) -> tuple[Formula, ...]:
    """The five families of formulas forced up when ``u([]psi) = alpha < 1``.

    ``lambda`` ranges over the fixed points of ``f``; ``theta`` is restricted
    to Sub(f), a finite stand-in for all formulas.
    """
    psi, f = _formula(psi), _formula(f)
    delta = fixed_points(f)
    _require(u, delta, "u")
    if Box(psi) not in u:
        raise MissingAtomError(Box(psi))
    alpha = u[Box(psi)]
    if alpha == ONE:
        raise ValueError(f"u({to_text(Box(psi))}) = 1; the construction needs a value below 1")
    subs = subformulas(f)
    out: dict[Formula, None] = {}
    for lam in delta:
        if u[lam] > alpha:
            out[lam] = None
    for lam in delta:
        for th in subs:
            b, d = u[Box(th)], u[Diamond(th)]
            if u[lam] <= b:
                out[Implies(lam, th)] = None
            if u[lam] < b < ONE:
                out[Implies(Implies(th, lam), lam)] = None
            if d <= u[lam]:
                out[Implies(th, lam)] = None
            if d < u[lam] < ONE:
                out[Implies(Implies(lam, th), th)] = None
    return tuple(out)


# ---------------------------------------------------------------------------
# finite snapshots of the canonical model

class SnapshotError(ValueError):
    pass


def snapshot_model(v: Mapping, us: Sequence[Mapping], f: Formula | str,
                   names: Sequence[str] | None = None) -> PossModel:
    """Possibilistic model on the valuations ``us`` with ``pi = pi_phi(v, ., f)``.

    All valuations must be equivalent to ``v`` modulo ``f`` and at least one
    must get possibility 1, otherwise the distribution would not be normalized.
    """
    f = _formula(f)
    if not us:
        raise SnapshotError("a snapshot needs at least one valuation")
    names = list(names or [f"u{i + 1}" for i in range(len(us))])
    for name, u in zip(names, us):
        if not equivalent_mod_phi(v, u, f):
            raise SnapshotError(f"{name} is not equivalent to v on the fixed points")
    pis = [pi_phi(v, u, f) for u in us]
    if max(pis) != ONE:
        raise SnapshotError(f"no valuation gets possibility 1 (max is {format_rational(max(pis))})")
    vars_ = variables(f)
    e = {n: {p: u[Var(p)] for p in vars_} for n, u in zip(names, us)}
    return PossModel(names, dict(zip(names, pis)), e, vars_)


def snapshot_bound_violations(v: Mapping, us: Sequence[Mapping], f: Formula | str) -> list[str]:
    """Check the two bounds every snapshot must meet, for each ``t`` in Sub(f).

    ``min_i (pi(u_i) => u_i(t)) >= v([]t)`` and ``max_i min(pi(u_i), u_i(t)) <= v(<>t)``
    using the valuations' own values; for propositional ``t`` the model
    evaluation is compared as well.
    """
    f = _formula(f)
    M = snapshot_model(v, us, f)
    out = []
    for t in subformulas(f):
        vals = [prop_eval(t, u) for u in us]
        pis = [M.pi[w] for w in M.worlds]
        lo = min(implies(p, x) for p, x in zip(pis, vals))
        hi = max(min(p, x) for p, x in zip(pis, vals))
        if lo < v[Box(t)]:
            out.append(f"[] {to_text(t)}: {format_rational(lo)} < v = {format_rational(v[Box(t)])}")
        if hi > v[Diamond(t)]:
            out.append(f"<> {to_text(t)}: {format_rational(hi)} > v = {format_rational(v[Diamond(t)])}")
        if not modal_atoms(t):
            for w, x in zip(M.worlds, vals):
                if M.eval(w, t) != x:
                    out.append(f"{to_text(t)} at {w}: model gives {format_rational(M.eval(w, t))}, "
                               f"valuation {format_rational(x)}")
            box_val = M.eval(M.worlds[0], Box(t))
            dia_val = M.eval(M.worlds[0], Diamond(t))
            if box_val < v[Box(t)]:
                out.append(f"eval [] {to_text(t)} = {format_rational(box_val)} < v")
            if dia_val > v[Diamond(t)]:
                out.append(f"eval <> {to_text(t)} = {format_rational(dia_val)} > v")
    return out


# ---------------------------------------------------------------------------
# random instances

def _increasing_image(values: Sequence[Fraction], top: Fraction, rng: random.Random) -> dict:
    """Strictly increasing map of ``values`` into ``[0, top)`` fixing 0."""
    distinct = sorted(set(values))
    cuts = sorted(rng.sample(range(1, 1000), len(distinct)))
    out = {}
    for x, c in zip(distinct, cuts):
        out[x] = ZERO if x == ZERO else top * Fraction(c, 1000)
    return out


def random_problem(rng: random.Random, f: Formula | None = None, worlds: int = 3,
                   denominator: int = 12) -> NormalizationProblem:
    """A valid problem built the way the push-down argument builds one.

    ``u`` is read off a random possibilistic model at one of its worlds, so it
    satisfies every KD45(G) axiom instance. A cut ``alpha`` among the fixed
    point values splits them: the fixed points at or below it get an order
    preserving image in ``[0, 1)``, the rest get 1. Variables get arbitrary
    values.
    """
    from .search import ModelClass, random_formula, random_model

    names = ("p", "q")
    if f is None:
        f = random_formula(rng, 3, names)
        while not variables(f):
            f = random_formula(rng, 3, names)
    vars_ = variables(f)
    M = random_model(ModelClass.PI_G, worlds, denominator, vars_, rng.randrange(2 ** 32))
    world = rng.choice(M.worlds)
    delta = fixed_points(f)
    atoms = tuple(Var(n) for n in vars_) + tuple(a for a in delta)
    u = world_valuation(M, world, atoms)
    levels = sorted({u[a] for a in delta} - {ONE})
    alpha = rng.choice(levels) if levels else ZERO
    image = _increasing_image([u[a] for a in delta if u[a] <= alpha], ONE, rng)
    nu = {a: image[u[a]] if u[a] <= alpha else ONE for a in delta}
    for n in vars_:
        nu[Var(n)] = rng.choice([ONE, Fraction(rng.randrange(0, denominator), denominator)])
    problem = NormalizationProblem(u, Valuation(nu), f)
    a, b = problem.alpha, problem.beta
    choice = rng.random()
    if choice < 0.2 and not any(nu[x] == ONE and u[x] < b for x in u):
        d = b
    elif choice < 0.6:
        d = a + (b - a) * Fraction(rng.randrange(1, 100), 100)
    else:
        d = None
    return NormalizationProblem(problem.u, problem.nu, f, d)


def break_condition_b(problem: NormalizationProblem, rng: random.Random) -> NormalizationProblem:
    """Perturb ``nu`` so that it no longer copies the order of ``u`` below ``alpha``.

    Picks two low fixed points with different ``u`` values and swaps or merges
    their ``nu`` values. Returns ``problem`` unchanged when there are not two
    such points.
    """
    u, nu = problem.u, dict(problem.nu)
    low = [a for a in problem.delta_set if nu[a] < ONE]
    pairs = [(a, b) for a, b in itertools.combinations(low, 2) if u[a] < u[b]]
    if not pairs:
        return problem
    a, b = rng.choice(pairs)
    if rng.random() < 0.5:
        na, nb = nu[a], nu[b]
        for x in low:
            if nu[x] == na:
                nu[x] = nb
            elif nu[x] == nb:
                nu[x] = na
    else:
        old = nu[a]
        for x in low:
            if nu[x] == old:
                nu[x] = nu[b]
    return NormalizationProblem(u, Valuation(nu), problem.phi, problem.delta)


def problem_dumps(problem: NormalizationProblem) -> str:
    return json.dumps(problem.to_json(), indent=2)
