"""The infrastructure model: DSL parsing, validation, and compilation.

The model DSL is line oriented, one declaration per line, ``#`` comments:

    component <name>
    risk <name>
    dependsSpecific <from> <to>
    dependsGeneric <from> <to>
    redundant <a> <b>
    hasRisk <component> <risk> weight <float>
    type <name>
    instanceOf <component> <type>
    typeRisk <type> <risk> weight <float>

Compilation produces an MLN program: hard propagation rules for specific and
generic dependencies and for risk effects, plus one soft unit per declared
risk capability and per type-rule member, with dependency, redundancy-closure
and type facts as closed-world evidence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .engine import MLNProgram
from .logic import (
    And,
    Atom,
    ClosedWorldEvidence,
    Constant,
    Exists,
    ForAll,
    Hardness,
    Implies,
    Not,
    PredicateDecl,
    PredicateKind,
    SORT_COMPONENT,
    SORT_RISK,
    Variable,
    WeightedFormula,
)

PRED_SPECIFIC = "specificallyDependsOn"
PRED_GENERIC = "genericallyDependsOn"
PRED_REDUNDANCY = "redundancy"
PRED_HAS_RISK = "hasRisk"
PRED_UNAVAILABLE = "unavailable"
PRED_AFFECTED = "affectedByRisk"

_BUILTIN_PREDICATES = {
    PRED_SPECIFIC, PRED_GENERIC, PRED_REDUNDANCY, PRED_HAS_RISK,
    PRED_UNAVAILABLE, PRED_AFFECTED,
}


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class ModelSyntaxError(Exception):
    """Carries every diagnostic collected while parsing a document."""

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = tuple(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class InfrastructureModel:
    """Declarative components, dependencies, redundancy, and risks."""

    components: tuple[str, ...] = ()
    risks: tuple[str, ...] = ()
    specific_deps: tuple[tuple[str, str], ...] = ()
    generic_deps: tuple[tuple[str, str], ...] = ()
    redundancy_pairs: tuple[tuple[str, str], ...] = ()
    risk_capabilities: tuple[tuple[str, str, float], ...] = ()
    type_tags: tuple[str, ...] = ()
    type_memberships: tuple[tuple[str, str], ...] = ()
    type_risk_rules: tuple[tuple[str, str, float], ...] = ()

    def to_dict(self) -> dict:
        return {
            "components": list(self.components),
            "risks": list(self.risks),
            "specificDeps": [list(p) for p in self.specific_deps],
            "genericDeps": [list(p) for p in self.generic_deps],
            "redundancyPairs": [list(p) for p in self.redundancy_pairs],
            "riskCapabilities": [[c, r, w] for c, r, w in self.risk_capabilities],
            "typeTags": list(self.type_tags),
            "typeMemberships": [list(p) for p in self.type_memberships],
            "typeRiskRules": [[t, r, w] for t, r, w in self.type_risk_rules],
        }

    @staticmethod
    def from_dict(doc: Mapping) -> "InfrastructureModel":
        return InfrastructureModel(
            components=tuple(doc.get("components", ())),
            risks=tuple(doc.get("risks", ())),
            specific_deps=tuple((a, b) for a, b in doc.get("specificDeps", ())),
            generic_deps=tuple((a, b) for a, b in doc.get("genericDeps", ())),
            redundancy_pairs=tuple((a, b) for a, b in doc.get("redundancyPairs", ())),
            risk_capabilities=tuple((c, r, float(w)) for c, r, w in doc.get("riskCapabilities", ())),
            type_tags=tuple(doc.get("typeTags", ())),
            type_memberships=tuple((c, t) for c, t in doc.get("typeMemberships", ())),
            type_risk_rules=tuple((t, r, float(w)) for t, r, w in doc.get("typeRiskRules", ())),
        )


_TOKEN_RE = re.compile(r"\S+")


def _tokenize(text: str) -> list[tuple[int, list[tuple[str, int]]]]:
    """Per line: 1-based line number and (token, 1-based column) pairs."""
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        tokens = [(m.group(0), m.start() + 1) for m in _TOKEN_RE.finditer(body)]
        if tokens:
            lines.append((lineno, tokens))
    return lines


def parse_model(text: str) -> InfrastructureModel:
    """Parse the model DSL; raises ModelSyntaxError with all diagnostics."""
    lines = _tokenize(text)
    diags: list[Diagnostic] = []

    declared: dict[str, tuple[str, int]] = {}  # name -> (category, line)
    components: list[str] = []
    risks: list[str] = []
    type_tags: list[str] = []

    def declare(category: str, name: str, lineno: int, col: int, into: list[str]) -> None:
        if name in declared:
            prev_cat, prev_line = declared[name]
            diags.append(Diagnostic(lineno, col, f"duplicate declaration of {name!r} ({prev_cat} on line {prev_line})"))
            return
        if category == "type" and name in _BUILTIN_PREDICATES:
            diags.append(Diagnostic(lineno, col, f"type name {name!r} collides with a built-in predicate"))
            return
        declared[name] = (category, lineno)
        into.append(name)

    # first pass: declarations, so later lines may reference forward
    for lineno, tokens in lines:
        keyword = tokens[0][0]
        if keyword in ("component", "risk", "type"):
            if len(tokens) != 2:
                diags.append(Diagnostic(lineno, tokens[0][1], f"{keyword} takes exactly one name"))
                continue
            name, col = tokens[1]
            target = {"component": components, "risk": risks, "type": type_tags}[keyword]
            declare(keyword, name, lineno, col, target)

    specific: list[tuple[str, str]] = []
    generic: list[tuple[str, str]] = []
    redundancy: list[tuple[str, str]] = []
    capabilities: list[tuple[str, str, float]] = []
    memberships: list[tuple[str, str]] = []
    type_rules: list[tuple[str, str, float]] = []
    seen_lines: dict[tuple, int] = {}

    def ref(name: str, category: str, lineno: int, col: int) -> bool:
        entry = declared.get(name)
        if entry is None:
            diags.append(Diagnostic(lineno, col, f"undeclared {category} {name!r}"))
            return False
        if entry[0] != category:
            diags.append(Diagnostic(lineno, col, f"{name!r} is a {entry[0]}, expected a {category}"))
            return False
        return True

    def parse_weight(tokens: list[tuple[str, int]], lineno: int, at: int) -> float | None:
        kw, kw_col = tokens[at]
        if kw != "weight":
            diags.append(Diagnostic(lineno, kw_col, f"expected keyword 'weight', got {kw!r}"))
            return None
        raw, col = tokens[at + 1]
        try:
            return float(raw)
        except ValueError:
            diags.append(Diagnostic(lineno, col, f"invalid weight {raw!r}"))
            return None

    def record(key: tuple, lineno: int, col: int) -> bool:
        if key in seen_lines:
            diags.append(Diagnostic(lineno, col, f"duplicate declaration (first on line {seen_lines[key]})"))
            return False
        seen_lines[key] = lineno
        return True

    for lineno, tokens in lines:
        keyword, kcol = tokens[0]
        if keyword in ("component", "risk", "type"):
            continue
        if keyword in ("dependsSpecific", "dependsGeneric", "redundant", "instanceOf"):
            if len(tokens) != 3:
                diags.append(Diagnostic(lineno, kcol, f"{keyword} takes exactly two names"))
                continue
            (a, acol), (b, bcol) = tokens[1], tokens[2]
            if keyword == "instanceOf":
                ok = ref(a, "component", lineno, acol) & ref(b, "type", lineno, bcol)
            else:
                ok = ref(a, "component", lineno, acol) & ref(b, "component", lineno, bcol)
            if not ok or not record((keyword, a, b), lineno, kcol):
                continue
            {"dependsSpecific": specific, "dependsGeneric": generic,
             "redundant": redundancy, "instanceOf": memberships}[keyword].append((a, b))
        elif keyword in ("hasRisk", "typeRisk"):
            if len(tokens) != 5:
                diags.append(Diagnostic(lineno, kcol, f"{keyword} takes <{'component' if keyword == 'hasRisk' else 'type'}> <risk> weight <float>"))
                continue
            (a, acol), (b, bcol) = tokens[1], tokens[2]
            first_cat = "component" if keyword == "hasRisk" else "type"
            ok = ref(a, first_cat, lineno, acol) & ref(b, "risk", lineno, bcol)
            weight = parse_weight(tokens, lineno, 3)
            if not ok or weight is None or not record((keyword, a, b), lineno, kcol):
                continue
            (capabilities if keyword == "hasRisk" else type_rules).append((a, b, weight))
        else:
            diags.append(Diagnostic(lineno, kcol, f"unknown keyword {keyword!r}"))

    if diags:
        raise ModelSyntaxError(diags)
    return InfrastructureModel(
        components=tuple(components),
        risks=tuple(risks),
        specific_deps=tuple(specific),
        generic_deps=tuple(generic),
        redundancy_pairs=tuple(redundancy),
        risk_capabilities=tuple(capabilities),
        type_tags=tuple(type_tags),
        type_memberships=tuple(memberships),
        type_risk_rules=tuple(type_rules),
    )


# ---------------------------------------------------------------------------
# Validation

@dataclass(frozen=True)
class ValidationIssue:
    severity: str  # "error" | "warning"
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...]

    @property
    def errors(self) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.severity == "error")

    @property
    def warnings(self) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.severity == "warning")

    @property
    def ok(self) -> bool:
        return not self.errors


class ModelValidationError(Exception):
    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__("; ".join(str(i) for i in report.errors))


def validate_model(model: InfrastructureModel) -> ValidationReport:
    """Semantic checks; returns a report rather than raising."""
    issues: list[ValidationIssue] = []
    err = lambda m: issues.append(ValidationIssue("error", m))
    warn = lambda m: issues.append(ValidationIssue("warning", m))

    comps = set(model.components)
    risks = set(model.risks)
    tags = set(model.type_tags)

    for a, b in model.specific_deps + model.generic_deps:
        for name in (a, b):
            if name not in comps:
                err(f"dependency references undeclared component {name!r}")
        if a == b:
            err(f"component {a!r} depends on itself")
    for a, b in model.redundancy_pairs:
        for name in (a, b):
            if name not in comps:
                err(f"redundancy references undeclared component {name!r}")
        if a == b:
            err(f"component {a!r} declared redundant with itself")
    for c, r, w in model.risk_capabilities:
        if c not in comps:
            err(f"hasRisk references undeclared component {c!r}")
        if r not in risks:
            err(f"hasRisk references undeclared risk {r!r}")
        if w >= 0:
            warn(f"risk weight for ({c}, {r}) is {w:g}; non-negative weights void the bias against multiple explanations")
    for c, t in model.type_memberships:
        if c not in comps:
            err(f"instanceOf references undeclared component {c!r}")
        if t not in tags:
            err(f"instanceOf references undeclared type {t!r}")
    for t, r, w in model.type_risk_rules:
        if t not in tags:
            err(f"typeRisk references undeclared type {t!r}")
        if r not in risks:
            err(f"typeRisk references undeclared risk {r!r}")
        if w >= 0:
            warn(f"type risk weight for ({t}, {r}) is {w:g}; non-negative weights void the bias against multiple explanations")

    overlap = set(model.specific_deps) & set(model.generic_deps)
    for a, b in sorted(overlap):
        err(f"dependency ({a}, {b}) declared both specific and generic; the two kinds are mutually exclusive")

    cycle = _find_cycle(model)
    if cycle:
        err("dependency cycle: " + " -> ".join(cycle))

    return ValidationReport(tuple(issues))


def _find_cycle(model: InfrastructureModel) -> list[str] | None:
    """First dependency cycle found by DFS, as a closed node path."""
    adjacency: dict[str, list[str]] = {c: [] for c in model.components}
    for a, b in model.specific_deps + model.generic_deps:
        if a in adjacency and b in adjacency:
            adjacency[a].append(b)
    for neighbors in adjacency.values():
        neighbors.sort()

    color: dict[str, int] = {}
    stack: list[str] = []

    def visit(node: str) -> list[str] | None:
        color[node] = 1
        stack.append(node)
        for nxt in adjacency[node]:
            if color.get(nxt, 0) == 1:
                return stack[stack.index(nxt):] + [nxt]
            if color.get(nxt, 0) == 0:
                found = visit(nxt)
                if found:
                    return found
        stack.pop()
        color[node] = 2
        return None

    for c in model.components:
        if color.get(c, 0) == 0:
            found = visit(c)
            if found:
                return found
    return None


# ---------------------------------------------------------------------------
# Redundancy closure and compilation

@dataclass(frozen=True)
class RedundancyClosure:
    """Symmetric-transitive closure of the declared redundancy pairs."""

    partner_sets: Mapping[str, frozenset[str]]

    def partners(self, component: str) -> frozenset[str]:
        return self.partner_sets.get(component, frozenset())


def redundancy_closure(model: InfrastructureModel) -> RedundancyClosure:
    neighbors: dict[str, set[str]] = {}
    for a, b in model.redundancy_pairs:
        neighbors.setdefault(a, set()).add(b)
        neighbors.setdefault(b, set()).add(a)

    partner_sets: dict[str, frozenset[str]] = {}
    seen: set[str] = set()
    for start in sorted(neighbors):
        if start in seen:
            continue
        group = {start}
        frontier = [start]
        while frontier:
            node = frontier.pop()
            for nxt in neighbors.get(node, ()):
                if nxt not in group:
                    group.add(nxt)
                    frontier.append(nxt)
        seen |= group
        for member in group:
            partner_sets[member] = frozenset(group - {member})
    return RedundancyClosure(partner_sets)


def base_predicates(model: InfrastructureModel) -> tuple[PredicateDecl, ...]:
    decls = [
        PredicateDecl(PRED_SPECIFIC, (SORT_COMPONENT, SORT_COMPONENT), PredicateKind.EVIDENCE),
        PredicateDecl(PRED_GENERIC, (SORT_COMPONENT, SORT_COMPONENT), PredicateKind.EVIDENCE),
        PredicateDecl(PRED_REDUNDANCY, (SORT_COMPONENT, SORT_COMPONENT), PredicateKind.EVIDENCE),
        PredicateDecl(PRED_HAS_RISK, (SORT_COMPONENT, SORT_RISK), PredicateKind.EVIDENCE),
        PredicateDecl(PRED_UNAVAILABLE, (SORT_COMPONENT,), PredicateKind.DERIVED),
        PredicateDecl(PRED_AFFECTED, (SORT_COMPONENT, SORT_RISK), PredicateKind.HYPOTHESIS),
    ]
    decls.extend(PredicateDecl(t, (SORT_COMPONENT,), PredicateKind.EVIDENCE)
                 for t in sorted(model.type_tags))
    return tuple(decls)


def compile_to_mln(model: InfrastructureModel) -> MLNProgram:
    """Compile a validated model to an MLN program.

    Redundancy symmetry and transitivity become a compile-time closure in the
    evidence rather than first-order rules; risk-occurrence atoms are limited
    to declared capabilities (and type-rule members) via a support set, which
    realizes the hard guard that occurrences presuppose a capability.
    """
    report = validate_model(model)
    if not report.ok:
        raise ModelValidationError(report)

    predicates = base_predicates(model)
    decls = {p.name: p for p in predicates}

    constants = tuple(Constant(c, SORT_COMPONENT) for c in sorted(model.components)) + \
        tuple(Constant(r, SORT_RISK) for r in sorted(model.risks))

    closure = redundancy_closure(model)
    facts: list[tuple[str, tuple[str, ...]]] = []
    facts.extend((PRED_SPECIFIC, (a, b)) for a, b in model.specific_deps)
    facts.extend((PRED_GENERIC, (a, b)) for a, b in model.generic_deps)
    for member in sorted(closure.partner_sets):
        facts.extend((PRED_REDUNDANCY, (member, other)) for other in sorted(closure.partners(member)))
    facts.extend((PRED_HAS_RISK, (c, r)) for c, r, _w in model.risk_capabilities)
    facts.extend((tag, (c,)) for c, tag in model.type_memberships)

    members_of: dict[str, list[str]] = {}
    for c, t in model.type_memberships:
        members_of.setdefault(t, []).append(c)
    units: list[tuple[str, str, float, str]] = [
        (c, r, w, f"risk:{c}:{r}") for c, r, w in model.risk_capabilities]
    for t, r, w in model.type_risk_rules:
        units.extend((m, r, w, f"type-risk:{t}:{r}:{m}") for m in members_of.get(t, ()))
    support = {(c, r) for c, r, _w, _label in units}

    x = Variable("x", SORT_COMPONENT)
    y = Variable("y", SORT_COMPONENT)
    z = Variable("z", SORT_COMPONENT)
    r_var = Variable("r", SORT_RISK)
    sdo, gdo, red = decls[PRED_SPECIFIC], decls[PRED_GENERIC], decls[PRED_REDUNDANCY]
    unavailable, affected = decls[PRED_UNAVAILABLE], decls[PRED_AFFECTED]

    formulas: list[WeightedFormula] = [
        WeightedFormula(
            ForAll(x, ForAll(y, Implies(
                And((Atom(sdo, (x, y)), Atom(unavailable, (y,)))),
                Atom(unavailable, (x,))))),
            Hardness.ALWAYS, label="rule:specific-dependency"),
        WeightedFormula(
            ForAll(x, ForAll(y, Implies(
                And((
                    Atom(gdo, (x, y)),
                    Atom(unavailable, (y,)),
                    Not(Exists(z, And((Atom(red, (y, z)), Not(Atom(unavailable, (z,))))))),
                )),
                Atom(unavailable, (x,))))),
            Hardness.ALWAYS, label="rule:generic-dependency"),
        WeightedFormula(
            ForAll(x, ForAll(r_var, Implies(Atom(affected, (x, r_var)), Atom(unavailable, (x,))))),
            Hardness.ALWAYS, label="rule:risk-effect"),
    ]

    const_by_name = {c.name: c for c in constants}
    for c, r, w, label in sorted(units, key=lambda u: (u[0], u[1])):
        formulas.append(WeightedFormula(
            Atom(affected, (const_by_name[c], const_by_name[r])), w, label=label))

    evidence = ClosedWorldEvidence.from_atoms(facts, {PRED_AFFECTED: support})
    return MLNProgram(predicates, tuple(formulas), constants, evidence)
