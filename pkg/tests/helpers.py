"""Shared test utilities: independent oracles and fixture generators.

Everything here is deliberately written without reusing the production code
paths it checks: the first-order evaluator walks quantifiers by looping over
the domain, the closure oracle iterates to a fixed point, and the random
model generator builds acyclic dependency graphs by index ordering.
"""

from __future__ import annotations

import itertools
import random

from mlnrca.logic import (
    And,
    Atom,
    AtomTable,
    Constant,
    Exists,
    ForAll,
    Formula,
    GroundClause,
    Hardness,
    Implies,
    Not,
    Or,
    PredicateDecl,
    PredicateKind,
    Truth,
    Variable,
)
from mlnrca.engine import GroundNetwork
from mlnrca.model import InfrastructureModel
from mlnrca.session import Observation


# ---------------------------------------------------------------------------
# Independent first-order evaluator

def eval_fo(f: Formula, by_sort: dict[str, list[Constant]],
            truth: dict[tuple[str, tuple[str, ...]], bool],
            binding: dict[str, Constant] | None = None) -> bool:
    """Evaluate a first-order formula by looping quantifiers over the domain."""
    binding = binding or {}
    if isinstance(f, Truth):
        return f.value
    if isinstance(f, Atom):
        names = tuple(binding[t.name].name if isinstance(t, Variable) else t.name for t in f.args)
        return truth.get((f.pred.name, names), False)
    if isinstance(f, Not):
        return not eval_fo(f.sub, by_sort, truth, binding)
    if isinstance(f, And):
        return all(eval_fo(p, by_sort, truth, binding) for p in f.parts)
    if isinstance(f, Or):
        return any(eval_fo(p, by_sort, truth, binding) for p in f.parts)
    if isinstance(f, Implies):
        return (not eval_fo(f.antecedent, by_sort, truth, binding)) or \
            eval_fo(f.consequent, by_sort, truth, binding)
    if isinstance(f, ForAll):
        return all(eval_fo(f.body, by_sort, truth, {**binding, f.var.name: c})
                   for c in by_sort.get(f.var.sort, []))
    if isinstance(f, Exists):
        return any(eval_fo(f.body, by_sort, truth, {**binding, f.var.name: c})
                   for c in by_sort.get(f.var.sort, []))
    raise TypeError(f)


# ---------------------------------------------------------------------------
# Fixed-point redundancy closure oracle

def closure_oracle(pairs: list[tuple[str, str]]) -> dict[str, frozenset[str]]:
    rel = set()
    for a, b in pairs:
        rel.add((a, b))
        rel.add((b, a))
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(rel), repeat=2):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True
    out: dict[str, set[str]] = {}
    for a, b in rel:
        if a != b:
            out.setdefault(a, set()).add(b)
    members = {m for a, b in rel for m in (a, b)}
    return {m: frozenset(out.get(m, set())) for m in members}


# ---------------------------------------------------------------------------
# Hand-built propositional networks for solver tests

def tiny_network(hard: list[list[tuple[str, bool]]],
                 soft: list[tuple[list[tuple[str, bool]], float]],
                 hypothesis: set[str] | None = None) -> GroundNetwork:
    """Network over nullary atoms named by strings."""
    hypothesis = hypothesis or set()
    names = sorted({n for cl in hard for n, _ in cl} |
                   {n for cl, _ in soft for n, _ in cl})
    table = AtomTable()
    for n in names:
        kind = PredicateKind.HYPOTHESIS if n in hypothesis else PredicateKind.DERIVED
        table.intern(PredicateDecl(n, (), kind), ())

    def lits(cl):
        pairs = [(table.lookup((n, ())), pol) for n, pol in cl]
        return tuple(sorted(pairs, key=lambda lit: lit[0].index))

    hard_clauses = tuple(GroundClause(lits(cl), Hardness.ALWAYS) for cl in hard)
    soft_clauses = tuple(GroundClause(lits(cl), w) for cl, w in soft)
    return GroundNetwork(tuple(table.atoms), hard_clauses, soft_clauses)


# ---------------------------------------------------------------------------
# Random acyclic infrastructure models

def random_model(rng: random.Random, max_components: int = 7,
                 max_extra_capabilities: int = 6) -> tuple[InfrastructureModel, list[Observation]]:
    """Random acyclic model plus a satisfiable observation set.

    Every component carries at least one risk capability, so any single
    unavailability has an explanation; available observations are only placed
    on components that the observed failure cannot force down, keeping the
    hard clauses satisfiable by construction.  Total ground atom count stays
    within the exhaustive-oracle cap.
    """
    n = rng.randint(3, max_components)
    components = [f"C{i}" for i in range(n)]
    risk_pool = [f"R{i}" for i in range(rng.randint(1, 3))]

    specific: list[tuple[str, str]] = []
    generic: list[tuple[str, str]] = []
    for i in range(1, n):
        for j in rng.sample(range(i), k=min(i, rng.randint(0, 2))):
            kind = specific if rng.random() < 0.6 else generic
            kind.append((components[i], components[j]))

    capabilities: list[tuple[str, str, float]] = []
    for c in components:
        capabilities.append((c, rng.choice(risk_pool), round(rng.uniform(-3.0, -0.1), 3)))
    extra_budget = min(max_extra_capabilities, 20 - 2 * n)
    for _ in range(rng.randint(0, max(0, extra_budget))):
        c = rng.choice(components)
        r = rng.choice(risk_pool)
        if not any(cc == c and rr == r for cc, rr, _ in capabilities):
            capabilities.append((c, r, round(rng.uniform(-3.0, -0.1), 3)))

    model = InfrastructureModel(
        components=tuple(components),
        risks=tuple(risk_pool),
        specific_deps=tuple(specific),
        generic_deps=tuple(generic),
        risk_capabilities=tuple(capabilities),
    )

    down = rng.choice(components)
    forced = _dependents_closure(model, down)
    observations = [Observation(down, "unavailable")]
    candidates = [c for c in components if c != down and c not in forced]
    rng.shuffle(candidates)
    for c in candidates[:rng.randint(0, 2)]:
        observations.append(Observation(c, "available"))
    return model, observations


def _dependents_closure(model: InfrastructureModel, root: str) -> set[str]:
    dependents: dict[str, list[str]] = {}
    for a, b in model.specific_deps + model.generic_deps:
        dependents.setdefault(b, []).append(a)
    out: set[str] = set()
    frontier = [root]
    while frontier:
        node = frontier.pop()
        for nxt in dependents.get(node, ()):
            if nxt not in out:
                out.add(nxt)
                frontier.append(nxt)
    return out
