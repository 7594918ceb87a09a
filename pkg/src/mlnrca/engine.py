"""Ground network construction, world scoring, and exact MAP inference.

The solver is a branch-and-bound search over ground atoms with unit
propagation on hard clauses and an admissible bound (satisfied soft weight
plus the best case of all undecided soft clauses).  A vectorized exhaustive
enumerator doubles as an independent oracle for MAP results and as the
normalization-constant calculator for probability checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .logic import (
    Atom,
    AtomTable,
    ClosedWorldEvidence,
    Constant,
    Formula,
    GroundAtom,
    GroundClause,
    Hardness,
    PredicateDecl,
    PredicateKind,
    WeightedFormula,
    atoms_of,
    clausify,
    format_formula,
    free_variables,
    ground_formula,
)

DEFAULT_BRUTE_CAP = 20

_EPS = 1e-9


class ProgramError(Exception):
    """The MLN program is malformed (sorts, arities, or evidence misuse)."""


class UnsatisfiableError(Exception):
    """The hard clauses admit no world; carries a best-effort conflict set."""

    def __init__(self, conflicting_observations: Sequence[str]):
        self.conflicting_observations = tuple(conflicting_observations)
        what = ", ".join(self.conflicting_observations) or "model constraints alone"
        super().__init__(f"hard clauses unsatisfiable (conflict: {what})")


class BruteForceCapError(Exception):
    """Refused exhaustive enumeration beyond the configured atom cap."""


@dataclass(frozen=True)
class MLNProgram:
    """Weighted formulas plus constants and closed-world evidence."""

    predicates: tuple[PredicateDecl, ...]
    formulas: tuple[WeightedFormula, ...]
    constants: tuple[Constant, ...]
    evidence: ClosedWorldEvidence

    def predicate(self, name: str) -> PredicateDecl:
        for p in self.predicates:
            if p.name == name:
                return p
        raise KeyError(name)

    def has_predicate(self, name: str) -> bool:
        return any(p.name == name for p in self.predicates)

    def extended(self, extra: Iterable[WeightedFormula]) -> "MLNProgram":
        return replace(self, formulas=self.formulas + tuple(extra))

    def check(self) -> None:
        """Raise ProgramError on sort/arity violations or evidence misuse."""
        decls = {p.name: p for p in self.predicates}
        const_sorts = {c.name: c.sort for c in self.constants}
        if len(const_sorts) != len(self.constants):
            raise ProgramError("constant names must be unique within the domain")
        for wf in self.formulas:
            if free_variables(wf.formula):
                names = sorted(v.name for v in free_variables(wf.formula))
                raise ProgramError(f"formula {wf.label or format_formula(wf.formula)!r} has unbound variables {names}")
            for a in atoms_of(wf.formula):
                decl = decls.get(a.pred.name)
                if decl is None:
                    raise ProgramError(f"undeclared predicate {a.pred.name!r}")
                if decl.arity != len(a.args):
                    raise ProgramError(f"arity mismatch for {a.pred.name!r}")
                for term, sort in zip(a.args, decl.arg_sorts):
                    if term.sort != sort:
                        raise ProgramError(f"term {term.name!r} has sort {term.sort!r}, expected {sort!r} in {a.pred.name!r}")
        for pred_name, args in self.evidence.facts:
            decl = decls.get(pred_name)
            if decl is None or decl.kind is not PredicateKind.EVIDENCE:
                raise ProgramError(f"evidence fact over non-closed-world predicate {pred_name!r}")
            if len(args) != decl.arity:
                raise ProgramError(f"evidence arity mismatch for {pred_name!r}")
        for pred_name in self.evidence.support:
            decl = decls.get(pred_name)
            if decl is None or decl.kind is PredicateKind.EVIDENCE:
                raise ProgramError(f"support restriction over unusable predicate {pred_name!r}")


@dataclass
class GroundNetwork:
    """The propositional network: indexed atoms, hard clauses, soft clauses."""

    atoms: tuple[GroundAtom, ...]
    hard_clauses: tuple[GroundClause, ...]
    soft_clauses: tuple[GroundClause, ...]

    def __post_init__(self) -> None:
        self._index_by_key = {a.key(): a.index for a in self.atoms}
        for c in self.soft_clauses:
            if isinstance(c.weight, Hardness) or not math.isfinite(c.weight):
                raise ProgramError("soft clause weights must be finite")

    def index_of(self, pred_name: str, args: Sequence[str]) -> int:
        return self._index_by_key[(pred_name, tuple(args))]

    def has_atom(self, pred_name: str, args: Sequence[str]) -> bool:
        return (pred_name, tuple(args)) in self._index_by_key

    @property
    def non_aux_atoms(self) -> list[GroundAtom]:
        return [a for a in self.atoms if not a.is_aux]

    @property
    def hypothesis_indexes(self) -> list[int]:
        return [a.index for a in self.atoms if not a.is_aux and a.pred.kind is PredicateKind.HYPOTHESIS]

    def with_extra_soft(self, clauses: Iterable[GroundClause]) -> "GroundNetwork":
        return GroundNetwork(self.atoms, self.hard_clauses, self.soft_clauses + tuple(clauses))

    def dump(self) -> str:
        """Text dump: one line per atom, one line per clause, in built order."""
        lines = [f"A{a.index} {a.name}" for a in self.atoms]
        lines.extend(c.render() for c in self.hard_clauses)
        lines.extend(c.render() for c in self.soft_clauses)
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class World:
    """A total truth assignment, positionally aligned with network atom indices."""

    values: tuple[bool, ...]

    def true_atoms(self, network: GroundNetwork) -> list[GroundAtom]:
        return [a for a in network.atoms if self.values[a.index] and not a.is_aux]


@dataclass(frozen=True)
class HardViolation:
    violated: tuple[GroundClause, ...]


@dataclass(frozen=True)
class MapResult:
    world: World
    score: float
    optimal: bool = True
    alternatives: tuple[tuple[World, float], ...] = ()


def build_ground_network(program: MLNProgram) -> GroundNetwork:
    """Ground and clausify the program into a deterministic network.

    Atom indices follow a stable sort by predicate name then argument names;
    auxiliary atoms from clausification come afterwards in creation order.
    """
    program.check()
    grounded: list[WeightedFormula] = []
    for wf in program.formulas:
        grounded.extend(ground_formula(wf, program.constants, program.evidence))

    keys: dict[tuple[str, tuple[str, ...]], Atom] = {}
    for gf in grounded:
        for a in atoms_of(gf.formula):
            if a.pred.kind is PredicateKind.EVIDENCE:
                raise ProgramError(f"closed-world atom {a.pred.name!r} survived evidence elimination")
            keys.setdefault(a.key(), a)

    table = AtomTable()
    for key in sorted(keys):
        table.intern_atom(keys[key])

    hard: list[GroundClause] = []
    soft: list[GroundClause] = []
    for gf in grounded:
        result = clausify(gf, table)
        hard.extend(result.hard)
        soft.extend(result.soft)
    return GroundNetwork(tuple(table.atoms), tuple(hard), tuple(soft))


def score_world(network: GroundNetwork, world: World) -> float | HardViolation:
    """Sum of satisfied soft-clause weights, or the violated hard clauses."""
    if len(world.values) != len(network.atoms):
        raise ValueError(f"world covers {len(world.values)} atoms, network has {len(network.atoms)}")
    violated = tuple(c for c in network.hard_clauses if not c.satisfied_by(world.values))
    if violated:
        return HardViolation(violated)
    score = 0.0
    for c in network.soft_clauses:
        if c.satisfied_by(world.values):
            score += c.weight  # type: ignore[operator]
    return score


# ---------------------------------------------------------------------------
# Exhaustive enumeration (oracle + probabilities)

def _eval_array(f: Formula, cols: dict[tuple[str, tuple[str, ...]], np.ndarray], size: int) -> np.ndarray:
    from .logic import And, Implies, Not, Or, Truth

    if isinstance(f, Truth):
        return np.full(size, f.value, dtype=bool)
    if isinstance(f, Atom):
        return cols[f.key()]
    if isinstance(f, Not):
        return ~_eval_array(f.sub, cols, size)
    if isinstance(f, And):
        out = np.full(size, True, dtype=bool)
        for p in f.parts:
            out &= _eval_array(p, cols, size)
        return out
    if isinstance(f, Or):
        out = np.full(size, False, dtype=bool)
        for p in f.parts:
            out |= _eval_array(p, cols, size)
        return out
    if isinstance(f, Implies):
        return ~_eval_array(f.antecedent, cols, size) | _eval_array(f.consequent, cols, size)
    raise TypeError(f"cannot evaluate {f!r} over arrays")


class ExhaustiveScores:
    """Scores of every world (free atoms enumerated, auxiliaries completed)."""

    def __init__(self, network: GroundNetwork, cap: int = DEFAULT_BRUTE_CAP):
        non_aux = network.non_aux_atoms
        if len(non_aux) > cap:
            raise BruteForceCapError(f"{len(non_aux)} non-auxiliary atoms exceed the cap of {cap}")
        self.network = network
        self.enum_atoms = [a for a in network.atoms if not (a.is_aux and a.definition is not None)]
        n = len(self.enum_atoms)
        self.count = 1 << n
        worlds = np.arange(self.count, dtype=np.int64)
        self._value_cols: dict[int, np.ndarray] = {}
        key_cols: dict[tuple[str, tuple[str, ...]], np.ndarray] = {}
        for bit, a in enumerate(self.enum_atoms):
            col = ((worlds >> bit) & 1).astype(bool)
            self._value_cols[a.index] = col
            key_cols[a.key()] = col
        for a in network.atoms:
            if a.is_aux and a.definition is not None:
                col = _eval_array(a.definition, key_cols, self.count)
                self._value_cols[a.index] = col
                key_cols[a.key()] = col

        self.valid = np.full(self.count, True, dtype=bool)
        for c in network.hard_clauses:
            self.valid &= self._clause_sat(c)
        self.scores = np.zeros(self.count, dtype=np.float64)
        for c in network.soft_clauses:
            self.scores += np.where(self._clause_sat(c), float(c.weight), 0.0)  # type: ignore[arg-type]

    def _clause_sat(self, c: GroundClause) -> np.ndarray:
        sat = np.full(self.count, False, dtype=bool)
        for a, pol in c.literals:
            col = self._value_cols[a.index]
            sat |= col if pol else ~col
        return sat

    def world(self, i: int) -> World:
        values = [False] * len(self.network.atoms)
        for a in self.network.atoms:
            values[a.index] = bool(self._value_cols[a.index][i])
        return World(tuple(values))


def partition_and_probability(network: GroundNetwork, world: World,
                              cap: int = DEFAULT_BRUTE_CAP) -> tuple[float, float]:
    """Normalization constant and the probability of ``world``.

    Exists for verification at small scale: refuses networks whose
    non-auxiliary atom count exceeds ``cap``.
    """
    enum = ExhaustiveScores(network, cap)
    z = float(np.exp(enum.scores[enum.valid]).sum())
    s = score_world(network, world)
    if isinstance(s, HardViolation):
        return z, 0.0
    return z, math.exp(s) / z


def _tie_key(values: Sequence[bool], hyp_indexes: Sequence[int],
             non_aux_indexes: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    n_hyp = sum(1 for i in hyp_indexes if values[i])
    trues = tuple(i for i in non_aux_indexes if values[i])
    return (n_hyp, trues)


def brute_force_map(network: GroundNetwork, cap: int = DEFAULT_BRUTE_CAP) -> MapResult:
    """Exhaustive MAP oracle; same contract and tie-break as map_exact(k=1)."""
    enum = ExhaustiveScores(network, cap)
    if not bool(enum.valid.any()):
        raise UnsatisfiableError(_conflicting_observations(network))
    best = float(enum.scores[enum.valid].max())
    candidates = np.nonzero(enum.valid & (enum.scores == best))[0]
    hyp = network.hypothesis_indexes
    non_aux = [a.index for a in network.non_aux_atoms]
    best_world: World | None = None
    best_key: tuple[int, tuple[int, ...]] | None = None
    for i in candidates:
        w = enum.world(int(i))
        key = _tie_key(w.values, hyp, non_aux)
        if best_key is None or key < best_key:
            best_key = key
            best_world = w
    assert best_world is not None
    canonical = score_world(network, best_world)
    assert not isinstance(canonical, HardViolation)
    return MapResult(world=best_world, score=canonical)


# ---------------------------------------------------------------------------
# Branch and bound

class _ClauseState:
    __slots__ = ("lits", "weight", "is_hard", "n_unassigned", "n_sat", "gain")

    def __init__(self, clause: GroundClause):
        self.lits = [(a.index, pol) for a, pol in clause.literals]
        self.is_hard = clause.is_hard
        self.weight = 0.0 if clause.is_hard else float(clause.weight)  # type: ignore[arg-type]
        self.gain = max(self.weight, 0.0)
        self.n_unassigned = len(self.lits)
        self.n_sat = 0


class _Search:
    """One branch-and-bound run over a clause set; collects all tied optima."""

    def __init__(self, network: GroundNetwork, extra_hard: Sequence[GroundClause] = (),
                 sat_only: bool = False):
        self.network = network
        n = len(network.atoms)
        self.n = n
        hard = list(network.hard_clauses) + list(extra_hard)
        soft = [] if sat_only else list(network.soft_clauses)
        self.states = [_ClauseState(c) for c in hard] + [_ClauseState(c) for c in soft]
        self.occ: list[list[tuple[_ClauseState, bool]]] = [[] for _ in range(n)]
        for st in self.states:
            for idx, pol in st.lits:
                self.occ[idx].append((st, pol))
        self.assign: list[bool | None] = [None] * n
        self.trail: list[int] = []
        self.sat_weight = 0.0
        self.pending_gain = sum(st.gain for st in self.states if not st.is_hard)
        hyp = set(network.hypothesis_indexes)
        order = [a.index for a in network.atoms if a.index in hyp]
        order += [a.index for a in network.atoms if a.index not in hyp]
        self.order = order
        self.hyp_indexes = sorted(hyp)
        self.non_aux_indexes = [a.index for a in network.non_aux_atoms]
        # prefer the value with the larger immediate unit-clause payoff
        gain_true = [0.0] * n
        gain_false = [0.0] * n
        for st in self.states:
            if not st.is_hard and len(st.lits) == 1:
                idx, pol = st.lits[0]
                if pol:
                    gain_true[idx] += st.weight
                else:
                    gain_false[idx] += st.weight
        self.preferred = [gain_true[i] > gain_false[i] for i in range(n)]
        self.best_score = -math.inf
        self.leaves: list[tuple[tuple[int, tuple[int, ...]], tuple[bool, ...]]] = []
        self.sat_only = sat_only
        self.found_any = False

    # -- assignment bookkeeping ------------------------------------------------

    def _set(self, idx: int, value: bool, units: list[_ClauseState]) -> bool:
        self.assign[idx] = value
        self.trail.append(idx)
        ok = True
        for st, pol in self.occ[idx]:
            was_sat = st.n_sat > 0
            st.n_unassigned -= 1
            if pol == value:
                st.n_sat += 1
            if not was_sat:
                if st.n_sat > 0:
                    if not st.is_hard:
                        self.sat_weight += st.weight
                        self.pending_gain -= st.gain
                elif st.n_unassigned == 0:
                    if st.is_hard:
                        ok = False
                    else:
                        self.pending_gain -= st.gain
                elif st.is_hard and st.n_unassigned == 1:
                    units.append(st)
        return ok

    def _unset(self, idx: int) -> None:
        value = self.assign[idx]
        self.assign[idx] = None
        for st, pol in self.occ[idx]:
            was_sat = st.n_sat > 0
            was_dead = st.n_sat == 0 and st.n_unassigned == 0
            if pol == value:
                st.n_sat -= 1
            st.n_unassigned += 1
            if was_sat and st.n_sat == 0:
                if not st.is_hard:
                    self.sat_weight -= st.weight
                    self.pending_gain += st.gain
            elif was_dead:
                if not st.is_hard:
                    self.pending_gain += st.gain

    def _undo_to(self, mark: int) -> None:
        while len(self.trail) > mark:
            self._unset(self.trail.pop())

    def _assign_propagate(self, idx: int, value: bool) -> bool:
        units: list[_ClauseState] = []
        if not self._set(idx, value, units):
            return False
        while units:
            st = units.pop()
            if st.n_sat > 0 or st.n_unassigned != 1:
                continue
            lit = next(((i, p) for i, p in st.lits if self.assign[i] is None), None)
            if lit is None:
                return False
            if not self._set(lit[0], lit[1], units):
                return False
        return True

    # -- search -----------------------------------------------------------------

    def _pick(self) -> int | None:
        for idx in self.order:
            if self.assign[idx] is None:
                return idx
        return None

    def _record_leaf(self) -> None:
        self.found_any = True
        if self.sat_only:
            return
        values = tuple(bool(v) for v in self.assign)
        s = score_world(self.network, World(values))
        assert not isinstance(s, HardViolation)
        if s > self.best_score:
            self.best_score = s
            self.leaves = [(_tie_key(values, self.hyp_indexes, self.non_aux_indexes), values)]
        elif s == self.best_score:
            self.leaves.append((_tie_key(values, self.hyp_indexes, self.non_aux_indexes), values))

    def run(self) -> None:
        if any(st.is_hard and st.n_unassigned == 0 and st.n_sat == 0 for st in self.states):
            return  # empty hard clause: trivially unsatisfiable
        self._dfs()

    def _dfs(self) -> None:
        if self.sat_only and self.found_any:
            return
        if not self.sat_only and self.sat_weight + self.pending_gain < self.best_score - _EPS:
            return
        idx = self._pick()
        if idx is None:
            self._record_leaf()
            return
        first = self.preferred[idx]
        for value in (first, not first):
            mark = len(self.trail)
            if self._assign_propagate(idx, value):
                self._dfs()
            self._undo_to(mark)
            if self.sat_only and self.found_any:
                return


def _is_satisfiable(network: GroundNetwork, extra_hard: Sequence[GroundClause]) -> bool:
    search = _Search(network, extra_hard, sat_only=True)
    search.run()
    return search.found_any


def _conflicting_observations(network: GroundNetwork,
                              extra_hard: Sequence[GroundClause] = ()) -> list[str]:
    """Greedy-minimized subset of observation clauses causing unsatisfiability."""
    def is_obs(c: GroundClause) -> bool:
        return bool(c.origin and c.origin.startswith("observation:"))

    model = GroundNetwork(network.atoms,
                          tuple(c for c in network.hard_clauses if not is_obs(c)),
                          ())
    obs = [c for c in network.hard_clauses if is_obs(c)] + [c for c in extra_hard if is_obs(c)]
    if not _is_satisfiable(model, ()):
        return []
    keep = list(obs)
    for c in list(keep):
        trial = [x for x in keep if x is not c]
        if not _is_satisfiable(model, trial):
            keep = trial
    return sorted(c.origin for c in keep if c.origin)


def map_exact(network: GroundNetwork, k: int = 1, *, rng=None) -> MapResult:
    """Exact MAP state(s), deterministic tie-break unless ``rng`` is given.

    Ties are broken toward fewer true hypothesis atoms, then the
    lexicographically smallest true-atom index set.  For ``k > 1`` each found
    world's hypothesis pattern is excluded by a hard blocking clause and the
    search repeats; scores are non-increasing along the result list.
    """
    if k < 1:
        raise ValueError("k must be positive")
    blocking: list[GroundClause] = []
    results: list[tuple[World, float]] = []
    atom_by_index = {a.index: a for a in network.atoms}
    for round_no in range(k):
        search = _Search(network, blocking)
        search.run()
        if not search.leaves:
            if round_no == 0:
                raise UnsatisfiableError(_conflicting_observations(network))
            break
        if rng is not None and len(search.leaves) > 1:
            _key, values = search.leaves[rng.randrange(len(search.leaves))]
        else:
            _key, values = min(search.leaves, key=lambda leaf: leaf[0])
        world = World(values)
        results.append((world, search.best_score))
        hyp = network.hypothesis_indexes
        if not hyp:
            break
        lits = tuple((atom_by_index[i], not values[i]) for i in hyp)
        blocking.append(GroundClause(lits, Hardness.ALWAYS, origin="blocking"))
    primary_world, primary_score = results[0]
    return MapResult(world=primary_world, score=primary_score,
                     alternatives=tuple(results[1:]))
