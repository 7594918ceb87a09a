"""Root cause analysis for IT infrastructures.

A declarative dependency-and-risk model compiles to a Markov logic network,
gets augmented with reverse implications for abduction, and exact MAP
inference returns the most probable explanation for observed failures.
"""

from .abduction import AbductionConfig, add_reverse_implications, check_abduction_preconditions, pc_mutex_clauses
from .engine import (
    BruteForceCapError,
    GroundNetwork,
    HardViolation,
    MLNProgram,
    MapResult,
    UnsatisfiableError,
    World,
    brute_force_map,
    build_ground_network,
    map_exact,
    partition_and_probability,
    score_world,
)
from .logic import (
    ClosedWorldEvidence,
    Constant,
    EvidenceContradictionError,
    Hardness,
    HARD,
    PredicateDecl,
    PredicateKind,
    WeightedFormula,
    clausify,
    ground_formula,
    substitute,
)
from .model import (
    InfrastructureModel,
    ModelSyntaxError,
    ModelValidationError,
    RedundancyClosure,
    compile_to_mln,
    parse_model,
    redundancy_closure,
    validate_model,
)
from .session import (
    ContradictionError,
    DiagnosisSession,
    Observation,
    ObservationConflictError,
    RootCauseReport,
    UnknownComponentError,
    new_session,
    parse_observations,
)

__version__ = "0.1.0"
