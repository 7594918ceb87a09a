"""Reverse implications, pairwise constraints, and the omission precondition."""

import random

import pytest

from mlnrca.abduction import (
    AbductionConfig,
    add_mutex_clauses,
    add_reverse_implications,
    check_abduction_preconditions,
    pc_mutex_clauses,
)
from mlnrca.engine import (
    HardViolation,
    ProgramError,
    World,
    build_ground_network,
    map_exact,
    score_world,
)
from mlnrca.logic import (
    Atom,
    Constant,
    Implies,
    Or,
    SORT_COMPONENT,
    ground_formula,
)
from mlnrca.model import InfrastructureModel, compile_to_mln
from mlnrca.session import ContradictionError, Observation, new_session

from .helpers import random_model, tiny_network


def _reverse_formula(program, component):
    found = [wf for wf in program.formulas if wf.label == f"reverse:{component}"]
    assert len(found) == 1
    return found[0]


class TestReverseImplications:
    def test_one_formula_per_component(self, printer_model):
        base = compile_to_mln(printer_model)
        extended = add_reverse_implications(base)
        added = [wf for wf in extended.formulas if wf.label and wf.label.startswith("reverse:")]
        assert len(added) == len(printer_model.components)
        assert all(wf.is_hard for wf in added)

    def test_scan_service_disjuncts_match_fixture_edges(self, printer_model):
        program = add_reverse_implications(compile_to_mln(printer_model))
        wf = _reverse_formula(program, "ScanService")
        grounded = ground_formula(wf, program.constants, program.evidence)
        assert len(grounded) == 1
        body = grounded[0].formula
        assert isinstance(body, Implies)
        disjuncts = body.consequent.parts if isinstance(body.consequent, Or) else (body.consequent,)
        names = {str(d) if not isinstance(d, Atom) else f"{d.pred.name}:{d.args[0].name}" for d in disjuncts}
        # ScanService has three specific dependencies and no direct risks
        assert names == {
            "unavailable:OfficePrinter",
            "unavailable:MailService",
            "unavailable:cas.uni-ma",
        }

    def test_component_with_only_a_risk(self):
        model = InfrastructureModel(
            components=("PowerSupply",),
            risks=("PowerOutage",),
            risk_capabilities=(("PowerSupply", "PowerOutage", -2.3),),
        )
        program = add_reverse_implications(compile_to_mln(model))
        wf = _reverse_formula(program, "PowerSupply")
        grounded = ground_formula(wf, program.constants, program.evidence)
        assert len(grounded) == 1
        body = grounded[0].formula
        assert body == Implies(
            Atom(program.predicate("unavailable"), (Constant("PowerSupply", SORT_COMPONENT),)),
            Atom(program.predicate("affectedByRisk"),
                 (Constant("PowerSupply", SORT_COMPONENT), Constant("PowerOutage", "risk"))),
        )

    def test_isolated_component_observed_down_contradicts(self):
        model = InfrastructureModel(
            components=("Island", "Other"),
            risks=("Storm",),
            risk_capabilities=(("Other", "Storm", -1.0),),
        )
        session = new_session(model)
        session.add_observations([Observation("Island", "unavailable")])
        with pytest.raises(ContradictionError) as excinfo:
            session.diagnose()
        assert any(o.component == "Island" for o in excinfo.value.observations)

    def test_cause_predicate_must_be_declared(self, printer_model):
        base = compile_to_mln(printer_model)
        config = AbductionConfig(cause_predicates=frozenset({"noSuchPredicate"}))
        with pytest.raises(ProgramError):
            add_reverse_implications(base, config)

    def test_soft_reverse_mode(self, printer_model):
        base = compile_to_mln(printer_model)
        extended = add_reverse_implications(base, AbductionConfig(reverse_weight=-0.25))
        added = [wf for wf in extended.formulas if wf.label and wf.label.startswith("reverse:")]
        assert all(wf.weight == -0.25 for wf in added)
        # soft reverse implications are non-clausal, so auxiliaries appear
        net = build_ground_network(extended)
        assert any(a.is_aux for a in net.atoms)
        map_exact(net)  # must still solve

    def test_soft_reverse_network_agrees_with_oracle(self, svn_model):
        from mlnrca.engine import brute_force_map
        from mlnrca.logic import Atom, Hardness, WeightedFormula
        from mlnrca.model import PRED_UNAVAILABLE

        base = compile_to_mln(svn_model)
        extended = add_reverse_implications(base, AbductionConfig(reverse_weight=-0.4))
        unavailable = extended.predicate(PRED_UNAVAILABLE)
        svc = next(c for c in extended.constants if c.name == "Service_Subversion")
        observed = extended.extended([
            WeightedFormula(Atom(unavailable, (svc,)), Hardness.ALWAYS,
                            label="observation:unavailable:Service_Subversion")])
        net = build_ground_network(observed)
        assert any(a.is_aux for a in net.atoms)
        exact = map_exact(net)
        oracle = brute_force_map(net)  # exercises auxiliary completion
        assert exact.score == oracle.score
        assert exact.world == oracle.world


class TestMutexClauses:
    @pytest.mark.parametrize("n,expected", [(0, 0), (1, 1), (2, 3), (3, 6), (10, 55)])
    def test_clause_count(self, n, expected):
        net = tiny_network(hard=[[(f"h{i}", True)] for i in range(max(n, 1))], soft=[])
        heads = [a for a in net.atoms][:n]
        assert len(pc_mutex_clauses(heads, -0.5)) == expected

    def test_duplicate_heads_rejected(self):
        net = tiny_network(hard=[[("h", True)]], soft=[])
        with pytest.raises(ValueError):
            pc_mutex_clauses([net.atoms[0], net.atoms[0]], -0.5)

    def test_clause_shapes(self):
        net = tiny_network(hard=[[("a", True)], [("b", True)]], soft=[])
        clauses = pc_mutex_clauses(list(net.atoms), -0.5)
        shapes = sorted(tuple((a.name, pol) for a, pol in c.literals) for c in clauses)
        assert shapes == [
            (("a()", True),),
            (("a()", True), ("b()", True)),
            (("b()", True),),
        ]
        assert all(c.weight == -0.5 for c in clauses)

    def test_add_mutex_targets_cause_atoms(self, svn_model):
        session = new_session(svn_model)
        net = session.network()
        config = AbductionConfig(mutex_weight=-0.5)
        extended = add_mutex_clauses(net, config)
        n_causes = sum(1 for a in net.atoms if a.pred.name == "affectedByRisk")
        assert len(extended.soft_clauses) - len(net.soft_clauses) == n_causes * (n_causes + 1) // 2


class TestPreconditions:
    def test_printer_fixture_all_negative(self, printer_model):
        report = check_abduction_preconditions(compile_to_mln(printer_model))
        assert report.ok and report.nonnegative == ()

    def test_positive_weight_reported(self):
        model = InfrastructureModel(
            components=("A",), risks=("R",),
            risk_capabilities=(("A", "R", 0.5),),
        )
        report = check_abduction_preconditions(compile_to_mln(model))
        assert not report.ok
        assert [wf.label for wf in report.nonnegative] == ["risk:A:R"]

    def test_zero_weight_reported(self):
        model = InfrastructureModel(
            components=("A",), risks=("R",),
            risk_capabilities=(("A", "R", 0.0),),
        )
        report = check_abduction_preconditions(compile_to_mln(model))
        assert [wf.label for wf in report.nonnegative] == ["risk:A:R"]


class TestAbductionProperties:
    def test_explanation_completeness_on_fixture_map(self, printer_model):
        session = new_session(printer_model)
        session.add_observations([
            Observation("PrintService", "available"),
            Observation("CopyService", "available"),
            Observation("ScanService", "unavailable"),
        ])
        net = session.network()
        result = map_exact(net)
        down = {a.args[0].name for a in result.world.true_atoms(net)
                if a.pred.name == "unavailable"}
        causes = {a.args[0].name for a in result.world.true_atoms(net)
                  if a.pred.name == "affectedByRisk"}
        deps = {}
        for a, b in printer_model.specific_deps + printer_model.generic_deps:
            deps.setdefault(a, set()).add(b)
        for c in down:
            supported = c in causes or any(d in down for d in deps.get(c, ()))
            assert supported, f"{c} is down without a supporting disjunct"

    def test_parsimony_no_removable_cause(self):
        rng = random.Random(1234)
        for _ in range(30):
            model, observations = random_model(rng)
            session = new_session(model)
            session.add_observations(observations)
            net = session.network()
            result = map_exact(net)
            for atom in result.world.true_atoms(net):
                if atom.pred.name != "affectedByRisk":
                    continue
                flipped = list(result.world.values)
                flipped[atom.index] = False
                assert isinstance(score_world(net, World(tuple(flipped))), HardViolation), \
                    f"cause {atom.name} removable without violating hard clauses"

    def test_omission_equivalence_sample(self):
        rng = random.Random(4321)
        checked = 0
        for _ in range(40):
            model, observations = random_model(rng)
            session = new_session(model)
            session.add_observations(observations)
            net = session.network()
            from mlnrca.engine import ExhaustiveScores
            enum = ExhaustiveScores(net)
            best = float(enum.scores[enum.valid].max())
            if int((enum.valid & (enum.scores == best)).sum()) != 1:
                continue
            checked += 1
            causes_omit = _cause_set(net, map_exact(net))
            for weight in (-0.1, -0.5, -2.0):
                with_mutex = add_mutex_clauses(net, AbductionConfig(mutex_weight=weight))
                assert _cause_set(with_mutex, map_exact(with_mutex)) == causes_omit
        assert checked >= 10


def _cause_set(net, result):
    return {a.name for a in result.world.true_atoms(net) if a.pred.name == "affectedByRisk"}
