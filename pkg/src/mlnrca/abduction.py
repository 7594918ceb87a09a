"""Turning a deductive dependency program into an abductive one.

Deductive rules propagate unavailability downstream from causes; abduction
needs the converse: an unavailable component implies one of its possible
explanations.  One reverse implication is added per component, its disjuncts
shaped by the closed-world evidence at grounding time.  Pairwise-constraint
clauses against multiple explanations are available but normally omitted:
with strictly negative cause weights the solver already prefers few causes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .engine import GroundNetwork, MLNProgram, ProgramError
from .logic import (
    And,
    Atom,
    Exists,
    GroundAtom,
    GroundClause,
    Hardness,
    Implies,
    Not,
    Or,
    PredicateKind,
    SORT_COMPONENT,
    SORT_RISK,
    Variable,
    Weight,
    WeightedFormula,
)


@dataclass(frozen=True)
class AbductionConfig:
    """How the abductive extension is built.

    ``reverse_weight`` defaults to hard: the guarantee that every observed
    unavailability gets explained only holds with certainty for hard reverse
    implications.  ``mutex_weight`` enables the pairwise-constraint clauses
    with that (finite, normally negative) weight; None omits them.
    """

    reverse_weight: Weight = Hardness.ALWAYS
    mutex_weight: float | None = None
    cause_predicates: frozenset[str] = field(default=frozenset({"affectedByRisk"}))

    def __post_init__(self) -> None:
        if not isinstance(self.reverse_weight, Hardness) and not math.isfinite(self.reverse_weight):
            raise ValueError("soft reverse-implication weight must be finite")
        if self.mutex_weight is not None and not math.isfinite(self.mutex_weight):
            raise ValueError("mutual-exclusivity weight must be finite")


DEFAULT_CONFIG = AbductionConfig()

_REQUIRED_PREDICATES = ("specificallyDependsOn", "genericallyDependsOn", "redundancy", "unavailable")


def add_reverse_implications(program: MLNProgram,
                             config: AbductionConfig = DEFAULT_CONFIG) -> MLNProgram:
    """Extend the program with one reverse implication per component.

    unavailable(c) implies: some specific dependency of c is down, or some
    generic dependency is down together with all of its redundancy partners,
    or some declared risk occurred on c.  The disjunct sets collapse to the
    evidence-known edges and capabilities during grounding; a component with
    no dependencies and no risks compiles to a hard "never unavailable", so
    observing it down surfaces as a contradiction.
    """
    for name in _REQUIRED_PREDICATES:
        if not program.has_predicate(name):
            raise ProgramError(f"abduction requires predicate {name!r} in the program")
    for name in sorted(config.cause_predicates):
        if not program.has_predicate(name):
            raise ProgramError(f"cause predicate {name!r} not declared")
        if program.predicate(name).kind is not PredicateKind.HYPOTHESIS:
            raise ProgramError(f"cause predicate {name!r} must be a hypothesis predicate")

    sdo = program.predicate("specificallyDependsOn")
    gdo = program.predicate("genericallyDependsOn")
    red = program.predicate("redundancy")
    unavailable = program.predicate("unavailable")

    y = Variable("y", SORT_COMPONENT)
    z = Variable("z", SORT_COMPONENT)
    r = Variable("r", SORT_RISK)

    extra: list[WeightedFormula] = []
    for c in program.constants:
        if c.sort != SORT_COMPONENT:
            continue
        down_specific = Exists(y, And((Atom(sdo, (c, y)), Atom(unavailable, (y,)))))
        down_generic = Exists(y, And((
            Atom(gdo, (c, y)),
            Atom(unavailable, (y,)),
            Not(Exists(z, And((Atom(red, (y, z)), Not(Atom(unavailable, (z,))))))),
        )))
        risk_disjuncts = tuple(
            Exists(r, Atom(program.predicate(name), (c, r)))
            for name in sorted(config.cause_predicates)
        )
        body = Or((down_specific, down_generic) + risk_disjuncts)
        extra.append(WeightedFormula(Implies(Atom(unavailable, (c,)), body),
                                     config.reverse_weight, label=f"reverse:{c.name}"))
    return program.extended(extra)


def pc_mutex_clauses(heads: list[GroundAtom], weight: float) -> list[GroundClause]:
    """Pairwise-constraint clauses over cause atoms: (n^2 + n) / 2 of them.

    One clause per unordered pair of heads, self-pairs included, so pairs
    plus singletons.  Each clause holds whenever any of its causes occurred;
    with a negative weight that penalizes every occurrence and increasingly
    penalizes co-occurrence.
    """
    if len({h.index for h in heads}) != len(heads):
        raise ValueError("mutex heads must be pairwise distinct")
    if not math.isfinite(weight):
        raise ValueError("mutex weight must be finite")
    clauses: list[GroundClause] = []
    for i, a in enumerate(heads):
        for b in heads[i:]:
            if a.index == b.index:
                literals = ((a, True),)
            else:
                lo, hi = (a, b) if a.index < b.index else (b, a)
                literals = ((lo, True), (hi, True))
            clauses.append(GroundClause(literals, weight, origin="mutex"))
    return clauses


def add_mutex_clauses(network: GroundNetwork, config: AbductionConfig) -> GroundNetwork:
    """Append the pairwise constraints over all cause atoms, if configured."""
    if config.mutex_weight is None:
        return network
    heads = [a for a in network.non_aux_atoms if a.pred.name in config.cause_predicates]
    heads.sort(key=lambda a: a.index)
    return network.with_extra_soft(pc_mutex_clauses(heads, config.mutex_weight))


@dataclass(frozen=True)
class PreconditionReport:
    """Soft formulas whose weight does not bias against explanations."""

    nonnegative: tuple[WeightedFormula, ...]

    @property
    def ok(self) -> bool:
        return not self.nonnegative


def check_abduction_preconditions(program: MLNProgram) -> PreconditionReport:
    """List every soft formula with weight >= 0.

    An empty report certifies that omitting the mutual-exclusivity clauses is
    justified: every explanation then strictly lowers a world's score, so the
    solver is biased against picking more causes than needed.  Weight zero is
    reported too; it expresses indifference, not bias.
    """
    flagged = tuple(wf for wf in program.formulas
                    if not wf.is_hard and float(wf.weight) >= 0.0)  # type: ignore[arg-type]
    return PreconditionReport(flagged)
