"""First-order logic core: formulas, closed-world grounding, and clausification.

Weighted first-order formulas are ground-instantiated over a finite, sorted
constant domain.  Atoms of closed-world predicates are replaced by their truth
value during grounding, so the resulting ground formulas only mention open
(hypothesis or derived) atoms.  Clausification turns each ground formula into
hard and soft clauses, introducing one auxiliary atom per non-clausal soft
formula so that MAP scores are preserved exactly.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union


class GroundingError(Exception):
    """A formula could not be fully grounded (free variable left over)."""


class EvidenceContradictionError(Exception):
    """A hard formula simplified to false under the closed-world evidence."""

    def __init__(self, formula: "WeightedFormula", binding: Mapping[str, "Constant"]):
        self.formula = formula
        self.binding = dict(binding)
        bound = ", ".join(f"{v}={c.name}" for v, c in sorted(self.binding.items()))
        label = formula.label or format_formula(formula.formula)
        super().__init__(f"hard formula {label!r} is false under evidence (binding: {bound or 'none'})")


# ---------------------------------------------------------------------------
# Terms and predicates

SORT_COMPONENT = "component"
SORT_RISK = "risk"
SORT_TYPE_TAG = "type-tag"


@dataclass(frozen=True, slots=True)
class Constant:
    """A named domain element with a sort restricting where it may appear."""

    name: str
    sort: str

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("constant name must be non-empty")


@dataclass(frozen=True, slots=True)
class Variable:
    name: str
    sort: str


Term = Union[Variable, Constant]


class PredicateKind(enum.Enum):
    """How a predicate's ground atoms are treated by the engine."""

    EVIDENCE = "evidence-closed-world"
    HYPOTHESIS = "hypothesis"
    DERIVED = "derived"


@dataclass(frozen=True, slots=True)
class PredicateDecl:
    name: str
    arg_sorts: tuple[str, ...]
    kind: PredicateKind

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)


# ---------------------------------------------------------------------------
# Formulas

class Formula:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Truth(Formula):
    value: bool


TRUE = Truth(True)
FALSE = Truth(False)


@dataclass(frozen=True, slots=True)
class Atom(Formula):
    pred: PredicateDecl
    args: tuple[Term, ...]

    def __post_init__(self) -> None:
        if len(self.args) != self.pred.arity:
            raise ValueError(f"{self.pred.name} expects {self.pred.arity} arguments, got {len(self.args)}")

    @property
    def is_ground(self) -> bool:
        return all(isinstance(t, Constant) for t in self.args)

    def key(self) -> tuple[str, tuple[str, ...]]:
        """Identity of a ground atom: predicate name plus argument names."""
        return (self.pred.name, tuple(t.name for t in self.args))


@dataclass(frozen=True, slots=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True, slots=True)
class Or(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True, slots=True)
class Implies(Formula):
    antecedent: Formula
    consequent: Formula


@dataclass(frozen=True, slots=True)
class ForAll(Formula):
    var: Variable
    body: Formula


@dataclass(frozen=True, slots=True)
class Exists(Formula):
    var: Variable
    body: Formula


def atom(pred: PredicateDecl, *args: Term) -> Atom:
    return Atom(pred, tuple(args))


def and_(*parts: Formula) -> Formula:
    """Conjunction with constant folding, flattening and de-duplication."""
    flat: list[Formula] = []
    for p in parts:
        if p is TRUE or p == TRUE:
            continue
        if p is FALSE or p == FALSE:
            return FALSE
        if isinstance(p, And):
            flat.extend(p.parts)
        else:
            flat.append(p)
    seen: list[Formula] = []
    for p in flat:
        if p not in seen:
            seen.append(p)
    if not seen:
        return TRUE
    if len(seen) == 1:
        return seen[0]
    return And(tuple(seen))


def or_(*parts: Formula) -> Formula:
    """Disjunction with constant folding, flattening and de-duplication."""
    flat: list[Formula] = []
    for p in parts:
        if p is FALSE or p == FALSE:
            continue
        if p is TRUE or p == TRUE:
            return TRUE
        if isinstance(p, Or):
            flat.extend(p.parts)
        else:
            flat.append(p)
    seen: list[Formula] = []
    for p in flat:
        if p not in seen:
            seen.append(p)
    if not seen:
        return FALSE
    if len(seen) == 1:
        return seen[0]
    return Or(tuple(seen))


def not_(f: Formula) -> Formula:
    if isinstance(f, Truth):
        return FALSE if f.value else TRUE
    if isinstance(f, Not):
        return f.sub
    return Not(f)


def implies_(a: Formula, b: Formula) -> Formula:
    if isinstance(a, Truth):
        return b if a.value else TRUE
    if isinstance(b, Truth):
        return TRUE if b.value else not_(a)
    return Implies(a, b)


def free_variables(f: Formula) -> set[Variable]:
    if isinstance(f, Truth):
        return set()
    if isinstance(f, Atom):
        return {t for t in f.args if isinstance(t, Variable)}
    if isinstance(f, Not):
        return free_variables(f.sub)
    if isinstance(f, (And, Or)):
        out: set[Variable] = set()
        for p in f.parts:
            out |= free_variables(p)
        return out
    if isinstance(f, Implies):
        return free_variables(f.antecedent) | free_variables(f.consequent)
    if isinstance(f, (ForAll, Exists)):
        return free_variables(f.body) - {f.var}
    raise TypeError(f"unknown formula node: {f!r}")


def atoms_of(f: Formula) -> list[Atom]:
    """All atom leaves, in left-to-right order, duplicates included."""
    if isinstance(f, Truth):
        return []
    if isinstance(f, Atom):
        return [f]
    if isinstance(f, Not):
        return atoms_of(f.sub)
    if isinstance(f, (And, Or)):
        return [a for p in f.parts for a in atoms_of(p)]
    if isinstance(f, Implies):
        return atoms_of(f.antecedent) + atoms_of(f.consequent)
    if isinstance(f, (ForAll, Exists)):
        return atoms_of(f.body)
    raise TypeError(f"unknown formula node: {f!r}")


def format_formula(f: Formula) -> str:
    if isinstance(f, Truth):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        return f"{f.pred.name}({', '.join(t.name for t in f.args)})"
    if isinstance(f, Not):
        return f"!{_fmt_nested(f.sub)}"
    if isinstance(f, And):
        return " & ".join(_fmt_nested(p) for p in f.parts)
    if isinstance(f, Or):
        return " | ".join(_fmt_nested(p) for p in f.parts)
    if isinstance(f, Implies):
        return f"{_fmt_nested(f.antecedent)} => {_fmt_nested(f.consequent)}"
    if isinstance(f, ForAll):
        return f"forall {f.var.name}:{f.var.sort} {_fmt_nested(f.body)}"
    if isinstance(f, Exists):
        return f"exists {f.var.name}:{f.var.sort} {_fmt_nested(f.body)}"
    raise TypeError(f"unknown formula node: {f!r}")


def _fmt_nested(f: Formula) -> str:
    if isinstance(f, (Atom, Truth, Not)):
        return format_formula(f)
    return f"({format_formula(f)})"


# ---------------------------------------------------------------------------
# Weights

class Hardness(enum.Enum):
    """Infinite-weight markers; never compared to finite weights numerically."""

    ALWAYS = "+inf"
    NEVER = "-inf"


HARD = Hardness.ALWAYS

Weight = Union[float, Hardness]


@dataclass(frozen=True, slots=True)
class WeightedFormula:
    formula: Formula
    weight: Weight
    label: str | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.weight, Hardness) and not math.isfinite(self.weight):
            raise ValueError("soft weights must be finite; use the hard markers for infinities")

    @property
    def is_hard(self) -> bool:
        return isinstance(self.weight, Hardness)


# ---------------------------------------------------------------------------
# Closed-world evidence

@dataclass(frozen=True)
class ClosedWorldEvidence:
    """Evidence database applied while grounding.

    ``facts`` lists the true ground atoms of closed-world predicates; every
    other atom of such a predicate is false.  ``support`` optionally limits an
    open predicate to an explicit set of groundings: atoms outside the support
    are compiled to false, which keeps the ground network proportional to the
    declared model rather than to domain size squared.
    """

    facts: frozenset[tuple[str, tuple[str, ...]]] = frozenset()
    support: Mapping[str, frozenset[tuple[str, ...]]] = field(default_factory=dict)

    @staticmethod
    def from_atoms(facts: Iterable[tuple[str, Sequence[str]]],
                   support: Mapping[str, Iterable[Sequence[str]]] | None = None) -> "ClosedWorldEvidence":
        sup = {p: frozenset(tuple(a) for a in rows) for p, rows in (support or {}).items()}
        return ClosedWorldEvidence(frozenset((p, tuple(a)) for p, a in facts), sup)

    def truth_of(self, a: Atom) -> Formula | None:
        """Truth constant for ``a`` if it is decided by this evidence, else None."""
        name, args = a.key()
        if a.pred.kind is PredicateKind.EVIDENCE:
            return TRUE if (name, args) in self.facts else FALSE
        if name in self.support and args not in self.support[name]:
            return FALSE
        return None


EMPTY_EVIDENCE = ClosedWorldEvidence()


# ---------------------------------------------------------------------------
# Substitution and grounding

def substitute(f: Formula, binding: Mapping[str, Constant]) -> Formula:
    """Replace free variables (by name) with constants; structure is preserved."""
    if not binding:
        return f
    if isinstance(f, Truth):
        return f
    if isinstance(f, Atom):
        new_args = tuple(binding.get(t.name, t) if isinstance(t, Variable) else t for t in f.args)
        return Atom(f.pred, new_args) if new_args != f.args else f
    if isinstance(f, Not):
        return Not(substitute(f.sub, binding))
    if isinstance(f, And):
        return And(tuple(substitute(p, binding) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(substitute(p, binding) for p in f.parts))
    if isinstance(f, Implies):
        return Implies(substitute(f.antecedent, binding), substitute(f.consequent, binding))
    if isinstance(f, (ForAll, Exists)):
        inner = {k: v for k, v in binding.items() if k != f.var.name}
        return type(f)(f.var, substitute(f.body, inner))
    raise TypeError(f"unknown formula node: {f!r}")


def _domain_by_sort(domain: Iterable[Constant]) -> dict[str, list[Constant]]:
    by_sort: dict[str, list[Constant]] = {}
    for c in domain:
        by_sort.setdefault(c.sort, []).append(c)
    for consts in by_sort.values():
        consts.sort(key=lambda c: c.name)
    return by_sort


def _reduce(f: Formula, env: dict[str, Constant], by_sort: dict[str, list[Constant]],
            evidence: ClosedWorldEvidence) -> Formula:
    """Expand quantifiers over the sorted domain and fold evidence atoms.

    Variables resolve through ``env`` instead of tree substitution, and
    connectives short-circuit on decided truth values, so a closed-world
    guard (a false dependency edge, say) prunes the expansion of everything
    behind it.  The result is identical to full expansion plus folding.
    """
    if isinstance(f, Truth):
        return f
    if isinstance(f, Atom):
        args = tuple(env.get(t.name, t) if isinstance(t, Variable) else t for t in f.args)
        if any(isinstance(t, Variable) for t in args):
            return Atom(f.pred, args) if args != f.args else f
        ground = Atom(f.pred, args) if args != f.args else f
        decided = evidence.truth_of(ground)
        return decided if decided is not None else ground
    if isinstance(f, Not):
        return not_(_reduce(f.sub, env, by_sort, evidence))
    if isinstance(f, And):
        parts: list[Formula] = []
        for p in f.parts:
            r = _reduce(p, env, by_sort, evidence)
            if isinstance(r, Truth):
                if not r.value:
                    return FALSE
                continue
            parts.append(r)
        return and_(*parts)
    if isinstance(f, Or):
        parts = []
        for p in f.parts:
            r = _reduce(p, env, by_sort, evidence)
            if isinstance(r, Truth):
                if r.value:
                    return TRUE
                continue
            parts.append(r)
        return or_(*parts)
    if isinstance(f, Implies):
        antecedent = _reduce(f.antecedent, env, by_sort, evidence)
        if isinstance(antecedent, Truth) and not antecedent.value:
            return TRUE
        return implies_(antecedent, _reduce(f.consequent, env, by_sort, evidence))
    if isinstance(f, (ForAll, Exists)):
        universal = isinstance(f, ForAll)
        name = f.var.name
        shadowed = env.get(name)
        parts = []
        try:
            for c in by_sort.get(f.var.sort, []):
                env[name] = c
                r = _reduce(f.body, env, by_sort, evidence)
                if isinstance(r, Truth):
                    if r.value != universal:
                        return FALSE if universal else TRUE
                    continue
                parts.append(r)
        finally:
            if shadowed is None:
                env.pop(name, None)
            else:
                env[name] = shadowed
        return and_(*parts) if universal else or_(*parts)
    raise TypeError(f"unknown formula node: {f!r}")


def ground_formula(wf: WeightedFormula, domain: Iterable[Constant],
                   evidence: ClosedWorldEvidence = EMPTY_EVIDENCE) -> list[WeightedFormula]:
    """Ground one weighted formula over the domain.

    Top-level universal quantifiers split into one ground formula per binding
    (each grounding is its own feature); inner quantifiers expand in place.
    Ground formulas that simplify to a truth constant are dropped, except a
    hard formula reduced to false, which raises EvidenceContradictionError.
    """
    by_sort = _domain_by_sort(domain)

    weight = wf.weight
    body = wf.formula
    if weight is Hardness.NEVER:
        body = not_(body)
        weight = Hardness.ALWAYS

    outer: list[Variable] = []
    while isinstance(body, ForAll):
        outer.append(body.var)
        body = body.body

    candidates = [by_sort.get(v.sort, []) for v in outer]
    out: list[WeightedFormula] = []
    for combo in itertools.product(*candidates):
        binding = {v.name: c for v, c in zip(outer, combo)}
        g = _reduce(body, dict(binding), by_sort, evidence)
        if free_variables(g):
            names = sorted(v.name for v in free_variables(g))
            raise GroundingError(f"unbound variables {names} after grounding {wf.label or format_formula(wf.formula)!r}")
        if isinstance(g, Truth):
            if not g.value and isinstance(weight, Hardness):
                raise EvidenceContradictionError(wf, binding)
            continue
        out.append(WeightedFormula(g, weight, wf.label))
    return out


# ---------------------------------------------------------------------------
# Ground atoms, clauses, clausification

@dataclass(frozen=True, eq=False)
class GroundAtom:
    """A ground atom with its dense index inside one network."""

    pred: PredicateDecl
    args: tuple[Constant, ...]
    index: int
    is_aux: bool = False
    definition: Formula | None = None  # for auxiliaries: the formula they stand for

    @property
    def name(self) -> str:
        return f"{self.pred.name}({','.join(c.name for c in self.args)})" if self.args else f"{self.pred.name}()"

    def key(self) -> tuple[str, tuple[str, ...]]:
        return (self.pred.name, tuple(c.name for c in self.args))


Literal = tuple[GroundAtom, bool]


@dataclass(frozen=True)
class GroundClause:
    """Disjunction of literals; hard (Hardness.ALWAYS) or soft with finite weight."""

    literals: tuple[Literal, ...]
    weight: Weight
    origin: str | None = None

    @property
    def is_hard(self) -> bool:
        return isinstance(self.weight, Hardness)

    def satisfied_by(self, values: Sequence[bool]) -> bool:
        return any(values[a.index] == pol for a, pol in self.literals)

    def render(self) -> str:
        tag = "H" if self.is_hard else f"S{self.weight:g}"
        lits = " ".join(f"{'+' if pol else '-'}{a.index}" for a, pol in self.literals)
        return f"{tag} : {lits}"


class AtomTable:
    """Interner assigning dense indices to ground atoms, auxiliaries last."""

    def __init__(self) -> None:
        self.atoms: list[GroundAtom] = []
        self._by_key: dict[tuple[str, tuple[str, ...]], GroundAtom] = {}
        self._aux_count = 0

    def intern(self, pred: PredicateDecl, args: tuple[Constant, ...]) -> GroundAtom:
        key = (pred.name, tuple(c.name for c in args))
        found = self._by_key.get(key)
        if found is None:
            found = GroundAtom(pred, args, index=len(self.atoms))
            self.atoms.append(found)
            self._by_key[key] = found
        return found

    def intern_atom(self, a: Atom) -> GroundAtom:
        args = tuple(a.args)
        if not all(isinstance(t, Constant) for t in args):
            raise GroundingError(f"cannot intern non-ground atom {format_formula(a)}")
        return self.intern(a.pred, args)  # type: ignore[arg-type]

    def fresh_aux(self, definition: Formula) -> GroundAtom:
        pred = PredicateDecl(f"_aux{self._aux_count}", (), PredicateKind.DERIVED)
        self._aux_count += 1
        aux = GroundAtom(pred, (), index=len(self.atoms), is_aux=True, definition=definition)
        self.atoms.append(aux)
        self._by_key[(pred.name, ())] = aux
        return aux

    def lookup(self, key: tuple[str, tuple[str, ...]]) -> GroundAtom:
        return self._by_key[key]


def _nnf(f: Formula, positive: bool = True) -> Formula:
    """Negation normal form; input is ground and truth-constant free."""
    if isinstance(f, Atom):
        return f if positive else Not(f)
    if isinstance(f, Not):
        return _nnf(f.sub, not positive)
    if isinstance(f, And):
        parts = tuple(_nnf(p, positive) for p in f.parts)
        return And(parts) if positive else Or(parts)
    if isinstance(f, Or):
        parts = tuple(_nnf(p, positive) for p in f.parts)
        return Or(parts) if positive else And(parts)
    if isinstance(f, Implies):
        if positive:
            return Or((_nnf(f.antecedent, False), _nnf(f.consequent, True)))
        return And((_nnf(f.antecedent, True), _nnf(f.consequent, False)))
    raise TypeError(f"clausify expects ground quantifier-free formulas, got {f!r}")


def _cnf(f: Formula) -> list[list[tuple[Atom, bool]]]:
    """CNF by distribution; returns clauses as literal lists, tautologies dropped."""
    nnf = _nnf(f)

    def walk(g: Formula) -> list[list[tuple[Atom, bool]]]:
        if isinstance(g, Atom):
            return [[(g, True)]]
        if isinstance(g, Not):
            assert isinstance(g.sub, Atom)
            return [[(g.sub, False)]]
        if isinstance(g, And):
            out: list[list[tuple[Atom, bool]]] = []
            for p in g.parts:
                out.extend(walk(p))
            return out
        if isinstance(g, Or):
            acc: list[list[tuple[Atom, bool]]] = [[]]
            for p in g.parts:
                sub = walk(p)
                acc = [c1 + c2 for c1 in acc for c2 in sub]
            return acc
        raise TypeError(f"unexpected node in NNF: {g!r}")

    cleaned: list[list[tuple[Atom, bool]]] = []
    for raw in walk(nnf):
        lits: dict[tuple[str, tuple[str, ...]], tuple[Atom, bool]] = {}
        tautology = False
        for a, pol in raw:
            key = a.key()
            prev = lits.get(key)
            if prev is not None and prev[1] != pol:
                tautology = True
                break
            lits[key] = (a, pol)
        if not tautology:
            cleaned.append(list(lits.values()))
    return cleaned


def _is_clause(f: Formula) -> list[tuple[Atom, bool]] | None:
    """Literal list if ``f`` already is a disjunction of literals, else None."""
    if isinstance(f, Atom):
        return [(f, True)]
    if isinstance(f, Not) and isinstance(f.sub, Atom):
        return [(f.sub, False)]
    if isinstance(f, Or):
        lits: list[tuple[Atom, bool]] = []
        for p in f.parts:
            if isinstance(p, Atom):
                lits.append((p, True))
            elif isinstance(p, Not) and isinstance(p.sub, Atom):
                lits.append((p.sub, False))
            else:
                return None
        return lits
    return None


def _make_clause(lits: Iterable[tuple[Atom, bool]], weight: Weight, origin: str | None,
                 table: AtomTable, drop_tautologies: bool = True) -> GroundClause | None:
    """Build a clause with interned atoms, literals de-duplicated and sorted.

    Tautologies (both polarities of one atom) are dropped for hard clauses;
    a tautological soft clause is kept so its constant weight contribution,
    and thus exact score equality with the source formula, is preserved.
    """
    by_key: dict[tuple[int, bool], Literal] = {}
    tautological = False
    for a, pol in lits:
        ga = table.intern_atom(a)
        if (ga.index, not pol) in by_key:
            tautological = True
        by_key[(ga.index, pol)] = (ga, pol)
    if tautological and drop_tautologies:
        return None
    ordered = tuple(by_key[k] for k in sorted(by_key))
    return GroundClause(ordered, weight, origin)


@dataclass
class ClausifyResult:
    hard: list[GroundClause]
    soft: list[GroundClause]
    aux_atoms: list[GroundAtom]


def clausify(gf: WeightedFormula, table: AtomTable) -> ClausifyResult:
    """Clauses for one ground formula, MAP-score preserving.

    Hard formulas become plain CNF.  A soft formula that already is a clause
    keeps its weight.  Any other soft formula gets a fresh auxiliary atom a,
    hard clauses for a <=> formula, and the soft unit clause (a, weight): the
    biconditional fixes the auxiliary in every world, so scores transfer
    exactly for positive and negative weights alike.
    """
    formula = gf.formula
    weight = gf.weight
    if weight is Hardness.NEVER:
        formula = not_(formula)
        weight = Hardness.ALWAYS

    result = ClausifyResult([], [], [])
    if isinstance(weight, Hardness):
        for lits in _cnf(formula):
            clause = _make_clause(lits, Hardness.ALWAYS, gf.label, table)
            if clause is not None:
                result.hard.append(clause)
        return result

    direct = _is_clause(formula)
    if direct is not None:
        clause = _make_clause(direct, weight, gf.label, table, drop_tautologies=False)
        if clause is not None:
            result.soft.append(clause)
        return result

    aux = table.fresh_aux(formula)
    aux_formula = Atom(aux.pred, ())
    for impl in (Implies(aux_formula, formula), Implies(formula, aux_formula)):
        for lits in _cnf(impl):
            clause = _make_clause(lits, Hardness.ALWAYS, gf.label, table)
            if clause is not None:
                result.hard.append(clause)
    unit = _make_clause([(aux_formula, True)], weight, gf.label, table)
    assert unit is not None
    result.soft.append(unit)
    result.aux_atoms.append(aux)
    return result


def evaluate(f: Formula, truth: Mapping[tuple[str, tuple[str, ...]], bool]) -> bool:
    """Evaluate a ground, quantifier-free formula under an atom truth map."""
    if isinstance(f, Truth):
        return f.value
    if isinstance(f, Atom):
        return truth[f.key()]
    if isinstance(f, Not):
        return not evaluate(f.sub, truth)
    if isinstance(f, And):
        return all(evaluate(p, truth) for p in f.parts)
    if isinstance(f, Or):
        return any(evaluate(p, truth) for p in f.parts)
    if isinstance(f, Implies):
        return (not evaluate(f.antecedent, truth)) or evaluate(f.consequent, truth)
    raise TypeError(f"cannot evaluate {f!r}")
