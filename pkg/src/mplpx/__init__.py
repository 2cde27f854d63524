"""MAP inference for pairwise discrete models.

Solves the dual of the cluster LP relaxation by monotone block coordinate
descent on messages, tightening the relaxation on the fly with the triplet
and square clusters whose guaranteed bound improvement is largest, until the
dual bound meets a decoded assignment (a certificate of optimality) or the
candidate pool is exhausted.
"""

from ._backend import compiled_available, get_backend
from .instanceio import (
    GeneratorSpec,
    ParseError,
    generate,
    parse_native,
    parse_uai,
    write_native,
)
from .model import (
    DuplicateEdgeError,
    InvalidAssignmentError,
    MissingEdgeError,
    PairwiseModel,
)
from .msgcore import Cluster, DuplicateClusterError, MessageState, init_messages
from .oracle import OracleResult, StateSpaceTooLargeError, brute_force_map
from .pursuit import (
    CandidateSquare,
    SolveConfig,
    SolveResult,
    SolveTrace,
    add_cluster,
    enumerate_squares,
    enumerate_triangles,
    score_cluster,
    solve,
    solve_random_schedule,
)

__version__ = "0.1.0"

__all__ = [
    "CandidateSquare",
    "Cluster",
    "DuplicateClusterError",
    "DuplicateEdgeError",
    "GeneratorSpec",
    "InvalidAssignmentError",
    "MessageState",
    "MissingEdgeError",
    "OracleResult",
    "PairwiseModel",
    "ParseError",
    "SolveConfig",
    "SolveResult",
    "SolveTrace",
    "StateSpaceTooLargeError",
    "add_cluster",
    "brute_force_map",
    "compiled_available",
    "enumerate_squares",
    "enumerate_triangles",
    "generate",
    "get_backend",
    "init_messages",
    "parse_native",
    "parse_uai",
    "score_cluster",
    "solve",
    "solve_random_schedule",
    "write_native",
    "__version__",
]
