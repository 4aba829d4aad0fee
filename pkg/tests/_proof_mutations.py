"""Broken copies of a proof, each paired with the step that must be blamed."""

from dataclasses import replace

from kd45g.proofs import Proof


def delete_step(proof: Proof, i: int) -> tuple[Proof, int]:
    """Drop step ``i`` and renumber references to later steps.

    References to ``i`` itself are left pointing at whatever now sits there,
    so the first step that cited ``i`` is the one that must fail. If nothing
    cited it, the conclusion no longer matches (or the last step does).
    """
    steps = []
    blame = None
    for n, s in enumerate(proof.steps, start=1):
        if n == i:
            continue
        if s.rule in ("mp", "nec"):
            if i in s.refs and blame is None:
                blame = len(steps) + 1
            s = replace(s, refs=tuple(r - 1 if r > i else r for r in s.refs))
        steps.append(s)
    if blame is None:
        blame = len(steps)
    return Proof(steps, proof.conclusion, proof.premises, proof.name), blame


def swap_mp(proof: Proof, n: int) -> tuple[Proof, int]:
    steps = list(proof.steps)
    s = steps[n - 1]
    assert s.rule == "mp"
    steps[n - 1] = replace(s, refs=s.refs[::-1])
    return Proof(steps, proof.conclusion, proof.premises, proof.name), n


def wrong_schema(proof: Proof, n: int, schema: str) -> tuple[Proof, int]:
    steps = list(proof.steps)
    assert steps[n - 1].rule == "axiom" and steps[n - 1].schema != schema
    steps[n - 1] = replace(steps[n - 1], schema=schema)
    return Proof(steps, proof.conclusion, proof.premises, proof.name), n


def twenty_probes(proofs: dict[str, Proof]) -> list[tuple[str, Proof, int]]:
    """A fixed spread of mutations over the builtin proofs."""
    out = []
    for name in ("proof1", "proof2", "proof3", "proof4"):
        p = proofs[name]
        mps = [n for n, s in enumerate(p.steps, 1) if s.rule == "mp"]
        axioms = [n for n, s in enumerate(p.steps, 1) if s.rule == "axiom"]
        out.append((f"{name} delete 1", *delete_step(p, 1)))
        out.append((f"{name} delete last", *delete_step(p, len(p.steps))))
        out.append((f"{name} swap mp {mps[0]}", *swap_mp(p, mps[0])))
        out.append((f"{name} swap mp {mps[-1]}", *swap_mp(p, mps[-1])))
        wrong = "4_dia" if p.steps[axioms[-1] - 1].schema != "4_dia" else "5_box"
        out.append((f"{name} axiom {axioms[-1]} as {wrong}", *wrong_schema(p, axioms[-1], wrong)))
    return out
