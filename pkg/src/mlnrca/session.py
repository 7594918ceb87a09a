"""The iterative diagnosis dialogue: observations in, root-cause reports out.

A session wraps one compiled-and-abduced model.  Observations accumulate as
hard evidence; each diagnose run performs exact MAP inference and extracts
the risk occurrences that explain every observed unavailability.  Ruling out
a proposed cause is done by adding new observations, never by a separate
rejection primitive.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .abduction import AbductionConfig, DEFAULT_CONFIG, add_mutex_clauses, add_reverse_implications
from .engine import (
    GroundNetwork,
    HardViolation,
    MapResult,
    UnsatisfiableError,
    World,
    build_ground_network,
    map_exact,
    score_world,
)
from .logic import Atom, Constant, Hardness, Not, SORT_COMPONENT, WeightedFormula
from .model import (
    Diagnostic,
    InfrastructureModel,
    ModelSyntaxError,
    PRED_UNAVAILABLE,
    ValidationReport,
    compile_to_mln,
    validate_model,
    _tokenize,
)

STATUS_AVAILABLE = "available"
STATUS_UNAVAILABLE = "unavailable"


class UnknownComponentError(Exception):
    def __init__(self, component: str):
        self.component = component
        super().__init__(f"unknown component {component!r}")


class ObservationConflictError(Exception):
    def __init__(self, earlier: "Observation", later: "Observation"):
        self.earlier = earlier
        self.later = later
        super().__init__(
            f"conflicting observations for {later.component!r}: "
            f"{earlier.status} earlier, {later.status} now")


class ContradictionError(Exception):
    """Observations contradict the hard model; names a conflicting subset."""

    def __init__(self, observations: Sequence["Observation"]):
        self.observations = tuple(observations)
        names = ", ".join(f"{o.status}({o.component})" for o in self.observations)
        super().__init__(f"observations contradict the model: {names or 'unknown subset'}")


class InvalidModelError(Exception):
    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__("; ".join(str(i) for i in report.errors))


@dataclass(frozen=True)
class Observation:
    component: str
    status: str
    source: str = "manual"
    timestamp: float = field(default_factory=time.time)

    def __post_init__(self) -> None:
        if self.status not in (STATUS_AVAILABLE, STATUS_UNAVAILABLE):
            raise ValueError(f"status must be available or unavailable, got {self.status!r}")
        if self.source not in ("manual", "monitoring"):
            raise ValueError(f"source must be manual or monitoring, got {self.source!r}")

    def to_dict(self) -> dict:
        return {"component": self.component, "status": self.status,
                "source": self.source, "timestamp": self.timestamp}


def parse_observations(text: str, source: str = "manual") -> list[Observation]:
    """Parse an observation file: ``observe available|unavailable <component>``."""
    observations: list[Observation] = []
    diags: list[Diagnostic] = []
    for lineno, tokens in _tokenize(text):
        keyword, kcol = tokens[0]
        if keyword != "observe":
            diags.append(Diagnostic(lineno, kcol, f"unknown keyword {keyword!r}; expected 'observe'"))
            continue
        if len(tokens) != 3:
            diags.append(Diagnostic(lineno, kcol, "observe takes <available|unavailable> <component>"))
            continue
        (status, scol), (component, _ccol) = tokens[1], tokens[2]
        if status not in (STATUS_AVAILABLE, STATUS_UNAVAILABLE):
            diags.append(Diagnostic(lineno, scol, f"expected available or unavailable, got {status!r}"))
            continue
        observations.append(Observation(component, status, source=source))
    if diags:
        raise ModelSyntaxError(diags)
    return observations


@dataclass(frozen=True)
class ChainStep:
    source: str
    target: str
    kind: str  # "specific" | "generic"


@dataclass(frozen=True)
class ObservedChain:
    observed: str
    steps: tuple[ChainStep, ...]


@dataclass(frozen=True)
class CauseExplanation:
    component: str
    risk: str
    chains: tuple[ObservedChain, ...]


@dataclass(frozen=True)
class RootCauseReport:
    causes: tuple[tuple[str, str], ...]
    derived_unavailable: tuple[str, ...]
    derived_available: tuple[str, ...]
    score: float
    alternatives: tuple[tuple[tuple[tuple[str, str], ...], float], ...] | None
    explanations: tuple[CauseExplanation, ...]

    def to_dict(self) -> dict:
        return {
            "causes": [{"component": c, "risk": r} for c, r in self.causes],
            "derivedUnavailable": list(self.derived_unavailable),
            "derivedAvailable": list(self.derived_available),
            "score": self.score,
            "alternatives": None if self.alternatives is None else [
                {"causes": [{"component": c, "risk": r} for c, r in causes], "score": s}
                for causes, s in self.alternatives
            ],
            "explanations": [
                {
                    "cause": {"component": e.component, "risk": e.risk},
                    "derived": True,
                    "chains": [
                        {"observed": ch.observed,
                         "steps": [{"from": st.source, "to": st.target, "kind": st.kind} for st in ch.steps]}
                        for ch in e.chains
                    ],
                }
                for e in self.explanations
            ],
        }


class DiagnosisSession:
    """Observation log plus the computed report history for one model."""

    def __init__(self, model: InfrastructureModel, config: AbductionConfig = DEFAULT_CONFIG,
                 rng=None):
        report = validate_model(model)
        if not report.ok:
            raise InvalidModelError(report)
        self.model = model
        self.config = config
        self._rng = rng
        self._program = add_reverse_implications(compile_to_mln(model), config)
        self._components = set(model.components)
        self.observations: list[Observation] = []
        self.reports: list[RootCauseReport] = []
        self._cache: dict[tuple[int, int], RootCauseReport] = {}

    # -- observations -----------------------------------------------------------

    def add_observations(self, observations: Iterable[Observation]) -> list[Observation]:
        """Append observations; rejects unknown components and conflicts."""
        incoming = list(observations)
        status_of = {o.component: o for o in self.observations}
        for obs in incoming:
            if obs.component not in self._components:
                raise UnknownComponentError(obs.component)
            earlier = status_of.get(obs.component)
            if earlier is not None and earlier.status != obs.status:
                raise ObservationConflictError(earlier, obs)
            status_of[obs.component] = earlier or obs
        self.observations.extend(incoming)
        return self.observations

    def reset(self) -> None:
        self.observations.clear()
        self.reports.clear()
        self._cache.clear()

    # -- diagnosis ----------------------------------------------------------------

    def _observation_formulas(self) -> list[WeightedFormula]:
        unavailable = self._program.predicate(PRED_UNAVAILABLE)
        unique: dict[str, str] = {}
        for o in self.observations:
            unique.setdefault(o.component, o.status)
        formulas = []
        for component in sorted(unique):
            status = unique[component]
            const = Constant(component, SORT_COMPONENT)
            a = Atom(unavailable, (const,))
            body = a if status == STATUS_UNAVAILABLE else Not(a)
            formulas.append(WeightedFormula(body, Hardness.ALWAYS,
                                            label=f"observation:{status}:{component}"))
        return formulas

    def network(self) -> GroundNetwork:
        """The ground network for the current observation log."""
        net = build_ground_network(self._program.extended(self._observation_formulas()))
        return add_mutex_clauses(net, self.config)

    def diagnose(self, k: int = 1) -> RootCauseReport:
        """Run MAP inference and extract the root-cause report."""
        key = (len(self.observations), k)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        net = self.network()
        try:
            result = map_exact(net, k=k, rng=self._rng)
        except UnsatisfiableError as exc:
            raise ContradictionError(self._labels_to_observations(exc.conflicting_observations)) from exc
        report = self._build_report(net, result, k)
        self._cache[key] = report
        self.reports.append(report)
        return report

    def _labels_to_observations(self, labels: Sequence[str]) -> list[Observation]:
        by_key = {}
        for o in self.observations:
            by_key.setdefault((o.status, o.component), o)
        out = []
        for label in labels:
            parts = label.split(":", 2)
            if len(parts) == 3 and parts[0] == "observation":
                found = by_key.get((parts[1], parts[2]))
                if found is not None:
                    out.append(found)
        return out

    def _causes_in(self, net: GroundNetwork, world: World) -> tuple[tuple[str, str], ...]:
        causes = []
        for a in world.true_atoms(net):
            if a.pred.name in self.config.cause_predicates:
                causes.append((a.args[0].name, a.args[1].name))
        return tuple(sorted(causes))

    def _build_report(self, net: GroundNetwork, result: MapResult, k: int) -> RootCauseReport:
        rescored = score_world(net, result.world)
        assert not isinstance(rescored, HardViolation)
        causes = self._causes_in(net, result.world)
        down = set()
        for a in result.world.true_atoms(net):
            if a.pred.name == PRED_UNAVAILABLE:
                down.add(a.args[0].name)
        derived_unavailable = tuple(sorted(down))
        derived_available = tuple(sorted(self._components - down))
        observed_down = sorted({o.component for o in self.observations
                                if o.status == STATUS_UNAVAILABLE})
        explanations = tuple(
            CauseExplanation(c, r, self._chains(c, down, observed_down))
            for c, r in causes
        )
        alternatives = None
        if k > 1:
            entries = [(causes, rescored)]
            entries.extend((self._causes_in(net, w), s) for w, s in result.alternatives)
            alternatives = tuple(entries)
        return RootCauseReport(
            causes=causes,
            derived_unavailable=derived_unavailable,
            derived_available=derived_available,
            score=rescored,
            alternatives=alternatives,
            explanations=explanations,
        )

    def _chains(self, origin: str, down: set[str], observed_down: list[str]) -> tuple[ObservedChain, ...]:
        """Shortest dependency chains from a cause component to each observed
        unavailability, walking evidence edges through unavailable components."""
        dependents: dict[str, list[tuple[str, str]]] = {}
        for dependent, provider in self.model.specific_deps:
            dependents.setdefault(provider, []).append((dependent, "specific"))
        for dependent, provider in self.model.generic_deps:
            dependents.setdefault(provider, []).append((dependent, "generic"))
        for targets in dependents.values():
            targets.sort()

        parents: dict[str, tuple[str, str]] = {}
        frontier = [origin]
        seen = {origin}
        while frontier:
            node = frontier.pop(0)
            for nxt, kind in dependents.get(node, ()):
                if nxt in seen or nxt not in down:
                    continue
                seen.add(nxt)
                parents[nxt] = (node, kind)
                frontier.append(nxt)

        chains = []
        for observed in observed_down:
            if observed == origin:
                chains.append(ObservedChain(observed, ()))
                continue
            if observed not in seen:
                continue
            steps: list[ChainStep] = []
            node = observed
            while node != origin:
                prev, kind = parents[node]
                steps.append(ChainStep(prev, node, kind))
                node = prev
            chains.append(ObservedChain(observed, tuple(reversed(steps))))
        return tuple(chains)


def new_session(model: InfrastructureModel, config: AbductionConfig = DEFAULT_CONFIG,
                rng=None) -> DiagnosisSession:
    """Validate the model and prepare a session with a cached abduced program."""
    return DiagnosisSession(model, config, rng)
