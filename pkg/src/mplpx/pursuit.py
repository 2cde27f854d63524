"""Candidate cluster enumeration, bound-improvement scoring, and the outer
solve loop.

The solver alternates message-passing phases with relaxation tightening:
run the edge-level dual to convergence, decode, and if the dual still
exceeds the decoded energy, add the candidate clusters whose guaranteed
one-block dual decrease is largest, warm-started with zero messages so the
bound is preserved. Squares are scored as 4-cycles and added as two triplets
through a chord.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .model import PairwiseModel
from .msgcore import Cluster, DuplicateClusterError, MessageState

CANDIDATE_KINDS = ("triangles", "squares", "both")


@dataclass(frozen=True)
class CandidateSquare:
    """A chordless 4-cycle candidate.

    ``vars`` lists the cycle in canonical order: lowest variable first, then
    its smaller cycle neighbor. ``cycle_edges`` holds the model edge indices
    of consecutive pairs, wrapping around.
    """

    vars: tuple[int, int, int, int]
    cycle_edges: tuple[int, int, int, int]


@dataclass
class SolveConfig:
    """Knobs of the outer loop; defaults follow the solver's standard schedule."""

    initial_pass_cap: int = 1000
    inner_iters: int = 20
    clusters_per_round: int = 5
    gap_tolerance: float = 1e-4
    convergence_threshold: float = 2e-5
    max_rounds: int = 1000
    candidate_kind: str = "both"
    score_floor: float = 1e-8
    square_budget: int = 100_000

    def check(self) -> None:
        for name in (
            "initial_pass_cap",
            "inner_iters",
            "clusters_per_round",
            "gap_tolerance",
            "convergence_threshold",
            "max_rounds",
            "score_floor",
            "square_budget",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.gap_tolerance <= self.convergence_threshold:
            raise ValueError(
                "gap_tolerance must exceed convergence_threshold "
                f"({self.gap_tolerance} <= {self.convergence_threshold})"
            )
        if self.candidate_kind not in CANDIDATE_KINDS:
            raise ValueError(
                f"candidate_kind must be one of {CANDIDATE_KINDS}, "
                f"got {self.candidate_kind!r}"
            )


@dataclass(frozen=True)
class TraceEvent:
    """One row of a solve trace."""

    event: str  # "pass" | "cluster-added" | "decoded"
    pass_index: int
    dual: float
    decoded: float | None = None
    cluster: tuple[int, ...] | None = None
    d_c: float | None = None
    ms: float = 0.0


@dataclass
class SolveTrace:
    events: list[TraceEvent] = field(default_factory=list)

    def append(self, ev: TraceEvent) -> None:
        self.events.append(ev)

    def dual_series(self) -> list[float]:
        return [ev.dual for ev in self.events if ev.event == "pass"]


@dataclass
class SolveResult:
    assignment: np.ndarray
    dual: float
    trace: SolveTrace
    status: str
    energy: float
    clusters_added: list[tuple[int, ...]]
    passes: int
    wall_time: float
    state: MessageState


def enumerate_triangles(model: PairwiseModel) -> list[Cluster]:
    """Every 3-variable subset whose three edges exist, sorted by variable triple."""
    nbr = [set() for _ in range(model.num_vars)]
    for i, j in model.edges:
        nbr[i].add(j)
        nbr[j].add(i)
    triples = []
    for i, j in model.edges:
        for k in sorted(nbr[i] & nbr[j]):
            if k > j:
                triples.append((i, j, k))
    triples.sort()
    return [Cluster.from_vars(model, *t) for t in triples]


def enumerate_squares(model: PairwiseModel, budget: int = 100_000) -> list[CandidateSquare]:
    """Every chordless 4-cycle, in canonical cycle order, sorted.

    On 4-connected grids these are exactly the unit faces. Enumeration stops
    once ``budget`` cycles were collected.
    """
    nbr = [set() for _ in range(model.num_vars)]
    for i, j in model.edges:
        nbr[i].add(j)
        nbr[j].add(i)
    seen: set[tuple[int, ...]] = set()
    squares = []
    n = model.num_vars
    for a in range(n):
        if len(squares) >= budget:
            break
        for c in range(a + 1, n):
            # a and c sit on one diagonal; chordless means neither diagonal
            # is an edge
            if c in nbr[a]:
                continue
            common = sorted(nbr[a] & nbr[c])
            for bi in range(len(common)):
                for di in range(bi + 1, len(common)):
                    b, d = common[bi], common[di]
                    if d in nbr[b]:
                        continue
                    key = tuple(sorted((a, b, c, d)))
                    if key in seen:
                        continue
                    seen.add(key)
                    squares.append(_canonical_square(model, a, b, c, d))
                    if len(squares) >= budget:
                        break
                if len(squares) >= budget:
                    break
            if len(squares) >= budget:
                break
    squares.sort(key=lambda s: s.vars)
    return squares


def _canonical_square(model: PairwiseModel, a: int, b: int, c: int, d: int) -> CandidateSquare:
    # cycle a-b-c-d; rotate/reflect so the lowest variable comes first,
    # followed by its smaller neighbor
    cyc = [a, b, c, d]
    lo = cyc.index(min(cyc))
    cyc = cyc[lo:] + cyc[:lo]
    if cyc[3] < cyc[1]:
        cyc = [cyc[0], cyc[3], cyc[2], cyc[1]]
    edges = tuple(
        model.edge_index(cyc[t], cyc[(t + 1) % 4]) for t in range(4)
    )
    return CandidateSquare(vars=tuple(cyc), cycle_edges=edges)


def score_cluster(state: MessageState, candidate) -> float:
    """Guaranteed dual decrease of one block update of the candidate:
    independent per-edge belief maxima minus their joint maximum.

    Never negative. For squares the joint maximum runs over the four cycle
    variables; the chord is not consulted.
    """
    if isinstance(candidate, Cluster):
        b_pq = state.edge_belief(candidate.edge_ids[0], exclude=candidate)
        b_pr = state.edge_belief(candidate.edge_ids[1], exclude=candidate)
        b_qr = state.edge_belief(candidate.edge_ids[2], exclude=candidate)
        indep = float(b_pq.max() + b_pr.max() + b_qr.max())
        joint = float(
            (b_pq[:, :, None] + b_pr[:, None, :] + b_qr[None, :, :]).max()
        )
        return indep - joint
    if isinstance(candidate, CandidateSquare):
        cyc = candidate.vars
        tables = []
        for t in range(4):
            u, v = cyc[t], cyc[(t + 1) % 4]
            tbl = state.edge_belief(candidate.cycle_edges[t])
            tables.append(tbl if u < v else tbl.T)
        t01, t12, t23, t30 = tables
        indep = float(sum(t.max() for t in tables))
        joint = float(
            (
                t01[:, :, None, None]
                + t12[None, :, :, None]
                + t23[None, None, :, :]
                + t30.T[:, None, None, :]
            ).max()
        )
        return indep - joint
    raise TypeError(f"cannot score {type(candidate).__name__}")


def add_cluster(state: MessageState, candidate) -> list[Cluster]:
    """Register a candidate with zero warm-start messages.

    Triplets are registered directly. A square gets the chord through its
    lowest-indexed vertex (added as a zero-potential edge when absent) and is
    registered as the two resulting triplets; if one of them already exists
    only the other is added. The dual objective is exactly unchanged.

    Returns the clusters actually registered; raises
    ``DuplicateClusterError`` when nothing new would be registered.
    """
    if isinstance(candidate, Cluster):
        state.register_cluster(candidate)
        return [candidate]
    if isinstance(candidate, CandidateSquare):
        cyc = candidate.vars
        u, v = min(cyc[0], cyc[2]), max(cyc[0], cyc[2])
        if not state.model.has_edge(u, v):
            state.add_chord_edge(u, v)
        added = []
        dupes = 0
        for triple in ((cyc[0], cyc[1], cyc[2]), (cyc[0], cyc[2], cyc[3])):
            cl = Cluster.from_vars(state.model, *triple)
            try:
                state.register_cluster(cl)
                added.append(cl)
            except DuplicateClusterError:
                dupes += 1
        if dupes == 2:
            raise DuplicateClusterError(
                f"square {cyc}: both triplets already registered"
            )
        return added
    raise TypeError(f"cannot add {type(candidate).__name__}")


def solve(model: PairwiseModel, config: SolveConfig | None = None, backend=None) -> SolveResult:
    """Full solve with score-based cluster selection."""
    return _solve_impl(model, config or SolveConfig(), rng=None, backend=backend)


def solve_random_schedule(
    model: PairwiseModel, config: SolveConfig | None = None, seed: int = 0, backend=None
) -> SolveResult:
    """Same loop as :func:`solve`, but each round adds uniformly random
    unregistered candidates instead of the top-scoring ones."""
    rng = np.random.default_rng(seed)
    return _solve_impl(model, config or SolveConfig(), rng=rng, backend=backend)


def _candidates(state: MessageState, config: SolveConfig) -> list:
    """Fresh candidate list: unregistered triangles, then chordless squares.

    Re-enumerated every round because chord edges added for earlier squares
    create new triangles and can create or destroy chordless 4-cycles.
    """
    model = state.model
    out: list = []
    if config.candidate_kind in ("triangles", "both"):
        registered = {c.vars for c in state.clusters}
        out.extend(
            c for c in enumerate_triangles(model) if c.vars not in registered
        )
    if config.candidate_kind in ("squares", "both"):
        out.extend(enumerate_squares(model, budget=config.square_budget))
    return out


def _identity(candidate) -> tuple[int, ...]:
    return tuple(candidate.vars)


def _solve_impl(model, config, rng, backend=None) -> SolveResult:
    config.check()
    problems = model.validate()
    if problems:
        raise ValueError("model does not validate: " + "; ".join(problems))

    t0 = time.perf_counter()

    def ms() -> float:
        return (time.perf_counter() - t0) * 1000.0

    state = MessageState(model, backend=backend)
    trace = SolveTrace()
    dual = state.dual_objective()

    def run_phase(cap: int, detect_convergence: bool) -> float:
        nonlocal dual
        prev = None
        for _ in range(cap):
            state.run_pass()
            dual = state.dual_objective()
            trace.append(TraceEvent("pass", state.pass_count, dual, ms=ms()))
            if detect_convergence and prev is not None:
                if prev - dual < config.convergence_threshold:
                    break
            prev = dual
        return dual

    run_phase(config.initial_pass_cap, detect_convergence=True)
    at_convergence = True

    best_energy = -np.inf
    best_assignment = state.decode()
    clusters_added: list[tuple[int, ...]] = []
    status = "budget-exhausted"
    rounds = 0

    while True:
        assignment = state.decode()
        energy = state.model.energy(assignment)
        trace.append(
            TraceEvent("decoded", state.pass_count, dual, decoded=energy, ms=ms())
        )
        if energy > best_energy:
            best_energy = energy
            best_assignment = assignment

        if dual - best_energy <= config.gap_tolerance:
            status = "certified"
            break
        if rounds >= config.max_rounds:
            status = "budget-exhausted"
            break

        cands = _candidates(state, config)
        if rng is None:
            scored = [
                (score_cluster(state, c), idx, c)
                for idx, c in enumerate(cands)
            ]
            scored = [t for t in scored if t[0] > config.score_floor]
            scored.sort(key=lambda t: (-t[0], t[1]))
            picks = scored[: config.clusters_per_round]
        else:
            if cands:
                take = min(config.clusters_per_round, len(cands))
                chosen = rng.choice(len(cands), size=take, replace=False)
                picks = [
                    (score_cluster(state, cands[idx]), int(idx), cands[idx])
                    for idx in sorted(int(x) for x in chosen)
                ]
            else:
                picks = []
        if not picks:
            # candidate scores are only conclusive at a converged state:
            # mid-phase beliefs can score every remaining candidate at zero
            # even though the current clusters have not been exploited yet
            if at_convergence:
                status = "gap-remaining"
                break
            run_phase(config.initial_pass_cap, detect_convergence=True)
            at_convergence = True
            continue

        for d_c, _, cand in picks:
            try:
                add_cluster(state, cand)
            except DuplicateClusterError:
                # overlapping squares picked in one round can fully cover
                # each other's triplets; nothing new to add
                continue
            clusters_added.append(_identity(cand))
            trace.append(
                TraceEvent(
                    "cluster-added",
                    state.pass_count,
                    dual,
                    cluster=_identity(cand),
                    d_c=d_c,
                    ms=ms(),
                )
            )
        rounds += 1
        run_phase(config.inner_iters, detect_convergence=False)
        at_convergence = False

    return SolveResult(
        assignment=best_assignment,
        dual=dual,
        trace=trace,
        status=status,
        energy=best_energy,
        clusters_added=clusters_added,
        passes=state.pass_count,
        wall_time=time.perf_counter() - t0,
        state=state,
    )
