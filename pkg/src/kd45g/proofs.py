"""Hilbert-style proofs in KD45(G) and a checker for them.

Propositional base
------------------
Gödel logic G is fixed here as Dummett's LC: intuitionistic propositional
logic with primitive ``&``, ``|``, ``->``, ``bot`` plus the prelinearity
schema ``(phi -> psi) | (psi -> phi)``. Axioms ``G1``..``G10`` below, rule modus
ponens. LC and the BL-based axiomatization of G prove the same formulas.

Modal part
----------
``K_box``, ``K_dia``, ``F_box``, ``P``, ``FS2`` and the rule ``nec`` give K(G);
``D``, ``4_box``, ``4_dia``, ``5_box``, ``5_dia`` extend it to KD45(G).

Derived schemas
---------------
``T5`` (``<>(phi -> psi) -> ([]phi -> <>psi)``) is registered as a derived schema:
no derivation is mechanized, and :func:`derived_schema_crosscheck` checks it
semantically instead. Proofs that use it are marked as such by
:meth:`Proof.uses_derived`.

Proof file format, one step per line::

    premise <formula>                        (optional declarations, in order)
    <n>. <formula> ; axiom <name> [phi=<formula>, psi=<formula>]
    <n>. <formula> ; axiom <name>             (substitution inferred by matching)
    <n>. <formula> ; premise <k>
    <n>. <formula> ; mp <i> <j>               (step j must be: step i -> this)
    <n>. <formula> ; nec <i>
    qed <formula>
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .formula import (
    BOT, TOP, And, Bot, Box, Diamond, Formula, Iff, Implies, Not, Or, Var,
    parse, substitute, to_text, variables,
)

PHI, PSI, CHI = Var("phi"), Var("psi"), Var("chi")


@dataclass(frozen=True)
class AxiomSchema:
    name: str
    template: Formula
    kind: str = "modal"  # "propositional", "modal" or "derived"

    @property
    def metavariables(self) -> tuple[str, ...]:
        return variables(self.template)


def _schemas(kind: str, table: Sequence[tuple[str, str]]) -> dict[str, AxiomSchema]:
    return {name: AxiomSchema(name, parse(text), kind) for name, text in table}


G_SCHEMAS = _schemas("propositional", [
    ("G1", "phi -> (psi -> phi)"),
    ("G2", "(phi -> (psi -> chi)) -> ((phi -> psi) -> (phi -> chi))"),
    ("G3", "phi & psi -> phi"),
    ("G4", "phi & psi -> psi"),
    ("G5", "phi -> (psi -> phi & psi)"),
    ("G6", "phi -> phi | psi"),
    ("G7", "psi -> phi | psi"),
    ("G8", "(phi -> chi) -> ((psi -> chi) -> (phi | psi -> chi))"),
    ("G9", "bot -> phi"),
    ("G10", "(phi -> psi) | (psi -> phi)"),
])

K_SCHEMAS = _schemas("modal", [
    ("K_box", "[](phi -> psi) -> ([]phi -> []psi)"),
    ("K_dia", "<>(phi | psi) -> (<>phi | <>psi)"),
    ("F_box", "[] top"),
    ("P", "[](phi -> psi) -> (<>phi -> <>psi)"),
    ("FS2", "(<>phi -> []psi) -> [](phi -> psi)"),
])

KD45_SCHEMAS = _schemas("modal", [
    ("D", "<> top"),
    ("4_box", "[]phi -> [][]phi"),
    ("4_dia", "<><>phi -> <>phi"),
    ("5_box", "<>[]phi -> []phi"),
    ("5_dia", "<>phi -> []<>phi"),
])

DERIVED_SCHEMAS = _schemas("derived", [
    ("T5", "<>(phi -> psi) -> ([]phi -> <>psi)"),
])

MODAL_AXIOMS: dict[str, AxiomSchema] = {**K_SCHEMAS, **KD45_SCHEMAS}
CATALOGUE: dict[str, AxiomSchema] = {**G_SCHEMAS, **MODAL_AXIOMS, **DERIVED_SCHEMAS}

# theorems listed for K(G) and the iterated-modality schemes of KD45(G)
THEOREM_SCHEMAS: dict[str, Formula] = {
    "T1": Iff(Not(Diamond(PHI)), Box(Not(PHI))),
    "T2": Implies(Not(Not(Box(PHI))), Box(Not(Not(PHI)))),
    "T3": Implies(Diamond(Not(Not(PHI))), Not(Not(Diamond(PHI)))),
    "T4": Or(Implies(Box(PHI), Diamond(PSI)), Box(Implies(Implies(PHI, PSI), PSI))),
    "T5": DERIVED_SCHEMAS["T5"].template,
}
SIMPLIFICATION_SCHEMAS: dict[str, Formula] = {
    "F_box_dia": And(Iff(Diamond(Box(TOP)), Box(Diamond(TOP))), Iff(Box(Diamond(TOP)), Not(BOT))),
    "U_dia": And(Iff(Diamond(Diamond(PHI)), Diamond(PHI)), Iff(Diamond(PHI), Box(Diamond(PHI)))),
    "U_box": And(Iff(Box(Box(PHI)), Box(PHI)), Iff(Box(PHI), Diamond(Box(PHI)))),
}

# the usual two-valued KD45 axioms, with <> as the dual of []
CLASSICAL_SCHEMAS: dict[str, Formula] = {
    "K": parse("[](phi -> psi) -> ([]phi -> []psi)"),
    "D": parse("[]phi -> <>phi"),
    "4": parse("[]phi -> [][]phi"),
    "5": parse("<>phi -> []<>phi"),
    "dual": parse("<>phi <-> not [] not phi"),
}


class SubstitutionError(KeyError):
    def __str__(self) -> str:
        return self.args[0]


def instantiate(schema: AxiomSchema | str, subst: Mapping[str, Formula | str]) -> Formula:
    """Replace every metavariable of ``schema``; all of them must be given."""
    schema = CATALOGUE[schema] if isinstance(schema, str) else schema
    subst = {k: parse(v) if isinstance(v, str) else v for k, v in subst.items()}
    missing = [mv for mv in schema.metavariables if mv not in subst]
    if missing:
        raise SubstitutionError(f"schema {schema.name} needs a value for {', '.join(missing)}")
    return substitute(schema.template, subst)


def match(template: Formula, f: Formula, subst: dict[str, Formula] | None = None) -> dict[str, Formula] | None:
    """Substitution ``s`` with ``template[s] == f``, or ``None``."""
    subst = {} if subst is None else subst
    if isinstance(template, Var):
        bound = subst.get(template.name)
        if bound is None:
            subst[template.name] = f
            return subst
        return subst if bound == f else None
    if type(template) is not type(f):
        return None
    if isinstance(template, Bot):
        return subst
    for t, g in zip(template.children(), f.children()):
        if match(t, g, subst) is None:
            return None
    return subst


def structural_diff(expected: Formula, actual: Formula, path: str = "") -> str | None:
    """Describe the first position where two trees differ."""
    if expected == actual:
        return None
    if type(expected) is not type(actual) or isinstance(expected, (Var, Bot)):
        where = path or "root"
        return f"at {where}: expected {to_text(expected)!r}, found {to_text(actual)!r}"
    names = ("lhs", "rhs") if len(expected.children()) == 2 else ("body",)
    for name, e, a in zip(names, expected.children(), actual.children()):
        d = structural_diff(e, a, f"{path}.{name}" if path else name)
        if d:
            return d
    return None


# ---------------------------------------------------------------------------
# proofs

@dataclass(frozen=True)
class Step:
    formula: Formula
    rule: str                       # "axiom", "premise", "mp", "nec"
    refs: tuple[int, ...] = ()      # 1-based step numbers (or premise number)
    schema: str | None = None
    subst: tuple[tuple[str, Formula], ...] | None = None


@dataclass
class Proof:
    steps: list[Step]
    conclusion: Formula
    premises: list[Formula] = field(default_factory=list)
    name: str = ""

    def uses_derived(self) -> bool:
        return any(s.rule == "axiom" and s.schema in DERIVED_SCHEMAS for s in self.steps)


@dataclass(frozen=True)
class CheckError:
    step: int
    reason: str

    def __str__(self) -> str:
        return f"step {self.step}: {self.reason}"


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    error: CheckError | None = None

    def __bool__(self) -> bool:
        return self.ok


def check(proof: Proof, allow_derived: bool = True) -> CheckResult:
    """Verify every step and the declared conclusion."""
    depends: list[bool] = []  # per step: does it rest on a premise?

    def fail(n: int, reason: str) -> CheckResult:
        return CheckResult(False, CheckError(n, reason))

    if not proof.steps:
        return fail(0, "empty proof")
    for n, step in enumerate(proof.steps, start=1):
        for r in step.refs if step.rule in ("mp", "nec") else ():
            if not 1 <= r < n:
                return fail(n, f"bad reference {r}: must name an earlier step")
        if step.rule == "axiom":
            schema = CATALOGUE.get(step.schema or "")
            if schema is None:
                return fail(n, f"unknown schema {step.schema!r}")
            if schema.kind == "derived" and not allow_derived:
                return fail(n, f"derived schema {schema.name} not allowed")
            if step.subst is None:
                if match(schema.template, step.formula) is None:
                    return fail(n, f"schema mismatch: not an instance of {schema.name}")
            else:
                try:
                    expected = instantiate(schema, dict(step.subst))
                except SubstitutionError as exc:
                    return fail(n, f"schema mismatch: {exc}")
                if expected != step.formula:
                    return fail(n, f"schema mismatch for {schema.name}: "
                                   f"{structural_diff(expected, step.formula)}")
            depends.append(False)
        elif step.rule == "premise":
            (k,) = step.refs
            if not 1 <= k <= len(proof.premises):
                return fail(n, f"bad reference: no premise {k}")
            if proof.premises[k - 1] != step.formula:
                return fail(n, f"premise {k} is {to_text(proof.premises[k - 1])!r}")
            depends.append(True)
        elif step.rule == "mp":
            i, j = step.refs
            minor, major = proof.steps[i - 1].formula, proof.steps[j - 1].formula
            if major != Implies(minor, step.formula):
                return fail(n, f"MP shape mismatch: step {j} is not (step {i}) -> (this formula)")
            depends.append(depends[i - 1] or depends[j - 1])
        elif step.rule == "nec":
            (i,) = step.refs
            if depends[i - 1]:
                return fail(n, f"illegal nec: step {i} depends on a premise")
            if step.formula != Box(proof.steps[i - 1].formula):
                return fail(n, f"nec shape mismatch: expected [] of step {i}")
            depends.append(False)
        else:
            return fail(n, f"unknown rule {step.rule!r}")
    if proof.steps[-1].formula != proof.conclusion:
        return fail(len(proof.steps), "last step differs from the declared conclusion")
    return CheckResult(True)


# ---------------------------------------------------------------------------
# text format

class ProofSyntaxError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


def _split_subst(text: str) -> list[tuple[str, str]]:
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ValueError("substitution must be written [phi=..., psi=...]")
    body = body[1:-1]
    parts, depth, cur = [], 0, ""
    for ch in body:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    if cur.strip():
        parts.append(cur)
    out = []
    for part in parts:
        if "=" not in part:
            raise ValueError(f"bad binding {part.strip()!r}")
        mv, _, val = part.partition("=")
        out.append((mv.strip(), val.strip()))
    return out


def parse_proof(text: str, name: str = "") -> Proof:
    steps: list[Step] = []
    premises: list[Formula] = []
    conclusion = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("qed "):
                conclusion = parse(line[4:])
                continue
            if line.startswith("premise "):
                premises.append(parse(line[8:]))
                continue
            num, dot, rest = line.partition(".")
            if not dot or not num.strip().isdigit():
                raise ValueError("expected '<n>. <formula> ; <justification>'")
            if int(num) != len(steps) + 1:
                raise ValueError(f"step numbered {num}, expected {len(steps) + 1}")
            formula_text, semi, just = rest.rpartition(";")
            if not semi:
                raise ValueError("missing ';' before the justification")
            formula = parse(formula_text)
            words = just.split(None, 1)
            rule = words[0] if words else ""
            arg = words[1] if len(words) > 1 else ""
            if rule == "axiom":
                sname, _, sub = arg.strip().partition(" ")
                subst = None
                if sub.strip():
                    subst = tuple((mv, parse(v)) for mv, v in _split_subst(sub))
                steps.append(Step(formula, "axiom", (), sname, subst))
            elif rule in ("premise", "mp", "nec"):
                refs = tuple(int(x) for x in arg.split())
                want = 2 if rule == "mp" else 1
                if len(refs) != want:
                    raise ValueError(f"{rule} takes {want} number(s)")
                steps.append(Step(formula, rule, refs))
            else:
                raise ValueError(f"unknown justification {rule!r}")
        except ValueError as exc:
            raise ProofSyntaxError(lineno, str(exc)) from None
    if conclusion is None:
        raise ProofSyntaxError(len(text.splitlines()), "missing 'qed <formula>' line")
    return Proof(steps, conclusion, premises, name)


def format_proof(proof: Proof) -> str:
    lines = [f"premise {to_text(p)}" for p in proof.premises]
    for n, s in enumerate(proof.steps, start=1):
        if s.rule == "axiom":
            just = f"axiom {s.schema}"
            if s.subst is not None:
                just += " [" + ", ".join(f"{mv}={to_text(v)}" for mv, v in s.subst) + "]"
        else:
            just = f"{s.rule} " + " ".join(str(r) for r in s.refs)
        lines.append(f"{n}. {to_text(s.formula)} ; {just}")
    lines.append(f"qed {to_text(proof.conclusion)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# building proofs

class ProofBuilder:
    """Appends steps and returns their 1-based numbers."""

    def __init__(self, name: str = ""):
        self.steps: list[Step] = []
        self.name = name

    def _add(self, step: Step) -> int:
        self.steps.append(step)
        return len(self.steps)

    def formula(self, n: int) -> Formula:
        return self.steps[n - 1].formula

    def axiom(self, schema: str, **subst: Formula) -> int:
        f = instantiate(schema, subst)
        return self._add(Step(f, "axiom", (), schema, tuple(sorted(subst.items()))))

    def mp(self, minor: int, major: int) -> int:
        imp = self.formula(major)
        if not isinstance(imp, Implies) or imp.lhs != self.formula(minor):
            raise ValueError("builder: MP operands do not fit")
        return self._add(Step(imp.rhs, "mp", (minor, major)))

    def nec(self, i: int) -> int:
        return self._add(Step(Box(self.formula(i)), "nec", (i,)))

    def identity(self, a: Formula) -> int:
        """``a -> a`` from G1 and G2."""
        s1 = self.axiom("G1", phi=a, psi=Implies(a, a))
        s2 = self.axiom("G2", phi=a, psi=Implies(a, a), chi=a)
        s3 = self.mp(s1, s2)
        s4 = self.axiom("G1", phi=a, psi=a)
        return self.mp(s4, s3)

    def weaken(self, i: int, extra: Formula) -> int:
        """From ``x`` infer ``extra -> x``."""
        x = self.formula(i)
        return self.mp(i, self.axiom("G1", phi=x, psi=extra))

    def syllogism(self, ab: int, bc: int) -> int:
        """From ``a -> b`` and ``b -> c`` infer ``a -> c``."""
        a, b = self.formula(ab).lhs, self.formula(ab).rhs
        c = self.formula(bc).rhs
        s1 = self.weaken(bc, a)                              # a -> (b -> c)
        s2 = self.axiom("G2", phi=a, psi=b, chi=c)                 # (a->(b->c)) -> ((a->b) -> (a->c))
        s3 = self.mp(s1, s2)
        return self.mp(ab, s3)

    def possible(self, i: int) -> int:
        """From a premise-free theorem ``x`` infer ``<>x`` via nec, P and D."""
        x = self.formula(i)
        s1 = self.weaken(i, TOP)                             # top -> x
        s2 = self.nec(s1)                                    # [](top -> x)
        s3 = self.axiom("P", phi=TOP, psi=x)                     # [](top -> x) -> (<>top -> <>x)
        s4 = self.mp(s2, s3)
        s5 = self.axiom("D")
        return self.mp(s5, s4)

    def build(self, conclusion: Formula | None = None) -> Proof:
        return Proof(list(self.steps), conclusion or self.steps[-1].formula, [], self.name)


def proof_1(phi: Formula = PHI) -> Proof:
    """``<>phi -> <><>phi`` from 5_dia, FS2 and P."""
    b = ProofBuilder("proof1")
    s1 = b.axiom("5_dia", phi=phi)
    s2 = b.axiom("FS2", phi=phi, psi=Diamond(phi))
    s3 = b.mp(s1, s2)
    s4 = b.axiom("P", phi=phi, psi=Diamond(phi))
    b.mp(s3, s4)
    return b.build()


def proof_2(phi: Formula = PHI) -> Proof:
    """``[][]phi -> []phi`` from 5_box, FS2 and K_box."""
    b = ProofBuilder("proof2")
    s1 = b.axiom("5_box", phi=phi)
    s2 = b.axiom("FS2", phi=Box(phi), psi=phi)
    s3 = b.mp(s1, s2)
    s4 = b.axiom("K_box", phi=Box(phi), psi=phi)
    b.mp(s3, s4)
    return b.build()


def _via_t5(name: str, inner: Formula, four: str, phi: Formula) -> Proof:
    b = ProofBuilder(name)
    taut = b.identity(inner)                                 # inner -> inner
    poss = b.possible(taut)                                  # <>(inner -> inner)
    t5 = b.axiom("T5", phi=inner, psi=inner)
    mid = b.mp(poss, t5)                                     # []inner -> <>inner
    if four == "4_dia":
        # []<>phi -> <><>phi, then <><>phi -> <>phi
        ax = b.axiom("4_dia", phi=phi)
        b.syllogism(mid, ax)
    else:
        # []phi -> [][]phi, then [][]phi -> <>[]phi
        ax = b.axiom("4_box", phi=phi)
        b.syllogism(ax, mid)
    return b.build()


def proof_3(phi: Formula = PHI) -> Proof:
    """``[]<>phi -> <>phi`` through D, T5 and 4_dia."""
    return _via_t5("proof3", Diamond(phi), "4_dia", phi)


def proof_4(phi: Formula = PHI) -> Proof:
    """``[]phi -> <>[]phi`` through D, T5 and 4_box."""
    return _via_t5("proof4", Box(phi), "4_box", phi)


def builtin_derivations(phi: Formula = PHI) -> list[Proof]:
    return [proof_1(phi), proof_2(phi), proof_3(phi), proof_4(phi)]


BUILTIN_PROOFS = {"proof1": proof_1, "proof2": proof_2, "proof3": proof_3, "proof4": proof_4}


def substitute_proof(proof: Proof, mapping: Mapping[str, Formula]) -> Proof:
    """Apply a uniform substitution to every formula of ``proof``."""
    def sub(f):
        return substitute(f, mapping)

    steps = []
    for s in proof.steps:
        subst = None
        if s.subst is not None:
            subst = tuple((mv, sub(v)) for mv, v in s.subst)
        steps.append(Step(sub(s.formula), s.rule, s.refs, s.schema, subst))
    return Proof(steps, sub(proof.conclusion), [sub(p) for p in proof.premises], proof.name)


# ---------------------------------------------------------------------------
# corpora

def axiom_instances(fillers: Iterable[Formula | str], schemas: Iterable[str] | None = None) -> list[Formula]:
    """Every instance of the modal axiom schemas with metavariables drawn from ``fillers``."""
    import itertools

    fillers = [parse(x) if isinstance(x, str) else x for x in fillers]
    names = list(schemas) if schemas is not None else list(MODAL_AXIOMS)
    out = []
    for name in names:
        schema = CATALOGUE[name]
        mvs = schema.metavariables
        for combo in itertools.product(fillers, repeat=len(mvs)):
            f = instantiate(schema, dict(zip(mvs, combo)))
            if f not in out:
                out.append(f)
    return out


def schema_instances(templates: Mapping[str, Formula], fillers: Iterable[Formula | str]) -> list[Formula]:
    import itertools

    fillers = [parse(x) if isinstance(x, str) else x for x in fillers]
    out = []
    for template in templates.values():
        mvs = variables(template)
        for combo in itertools.product(fillers, repeat=len(mvs)):
            f = substitute(template, dict(zip(mvs, combo)))
            if f not in out:
                out.append(f)
    return out


STANDARD_FILLERS = ("p", "q", "<> p", "[] q", "p & q")


def builtin_corpus(name: str) -> list[Formula]:
    """Named corpora: ``axioms``, ``theorems`` (T1..T5), ``prop2``, ``t1``..``t5``,
    ``classical`` and ``nontheorems``."""
    name = name.lower()
    if name == "axioms":
        return axiom_instances(STANDARD_FILLERS)
    if name == "theorems":
        return schema_instances(THEOREM_SCHEMAS, STANDARD_FILLERS)
    if name in {"t1", "t2", "t3", "t4", "t5"}:
        return schema_instances({name: THEOREM_SCHEMAS[name.upper()]}, STANDARD_FILLERS)
    if name == "prop2":
        return schema_instances(SIMPLIFICATION_SCHEMAS, STANDARD_FILLERS)
    if name == "classical":
        return schema_instances(CLASSICAL_SCHEMAS, ("p", "q", "not p", "p & q"))
    if name == "nontheorems":
        return [parse(t) for t in ("[]p -> p", "p -> []p", "<>p -> []p", "not not p -> p")]
    raise KeyError(f"unknown builtin corpus {name!r}")


def derived_schema_crosscheck(name: str = "T5", max_worlds: int = 3, chain: int = 4,
                              fillers: Iterable[Formula | str] = ("p", "q", "bot")) -> list:
    """Bounded search for countermodels of a derived schema's instances.

    Returns the reports that found a countermodel (empty when the schema
    survives). Both the possibilistic class and the relational KD45 class
    are searched.
    """
    from .search import ModelClass, SearchBounds, find_countermodel

    bounds = SearchBounds(max_worlds=max_worlds, chain=chain)
    bad = []
    for f in schema_instances({name: DERIVED_SCHEMAS[name].template}, fillers):
        for cls in (ModelClass.PI_G, ModelClass.KD45_GK):
            report = find_countermodel(f, cls, bounds)
            if report.found:
                bad.append(report)
    return bad
