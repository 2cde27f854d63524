"""Pairwise discrete graphical models with log-space potentials.

A model is a graph over ``n`` discrete variables with one potential table per
variable and per edge. All tables hold log-space energies; the solver's
objective is to maximize the total energy of an assignment. Models are
immutable after construction: graph mutations (adding a zero-potential chord
during square triangulation) produce a new model.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


class InvalidAssignmentError(ValueError):
    """Assignment has the wrong length or an out-of-range state index."""


class DuplicateEdgeError(ValueError):
    """The variable pair is already an edge of the model."""


class MissingEdgeError(KeyError):
    """The variable pair is not an edge of the model."""


class PairwiseModel:
    """Immutable pairwise MRF in log-space.

    Parameters
    ----------
    cardinalities : sequence of int
        Number of states ``k_i >= 1`` of each variable.
    node_potentials : sequence of array-like
        One length-``k_i`` energy table per variable.
    edges : sequence of (int, int)
        Unordered variable pairs. Stored in canonical orientation
        ``i < j``; a pair given as ``(j, i)`` is flipped and its table
        transposed.
    edge_potentials : sequence of array-like
        One ``k_i x k_j`` energy table per edge, oriented like the edge.

    Construction is permissive so that malformed inputs can be inspected
    with :meth:`validate`; the solver requires a model that validates.
    """

    __slots__ = (
        "cardinalities",
        "node_potentials",
        "edges",
        "edge_potentials",
        "adjacency",
        "_edge_index",
    )

    def __init__(
        self,
        cardinalities: Sequence[int],
        node_potentials: Iterable,
        edges: Iterable[tuple[int, int]],
        edge_potentials: Iterable,
    ):
        card = np.array(cardinalities, dtype=np.int32)
        card.setflags(write=False)
        self.cardinalities = card

        pots = []
        for table in node_potentials:
            arr = np.array(table, dtype=np.float64)
            arr.setflags(write=False)
            pots.append(arr)
        self.node_potentials = tuple(pots)

        n = card.shape[0]
        canon_edges = []
        canon_tables = []
        for (i, j), table in zip(edges, edge_potentials):
            i, j = int(i), int(j)
            arr = np.array(table, dtype=np.float64)
            if i > j:
                i, j = j, i
                arr = arr.T.copy()
            arr.setflags(write=False)
            canon_edges.append((i, j))
            canon_tables.append(arr)
        self.edges = tuple(canon_edges)
        self.edge_potentials = tuple(canon_tables)

        index: dict[tuple[int, int], int] = {}
        incident: list[list[int]] = [[] for _ in range(n)]
        for e, (i, j) in enumerate(self.edges):
            if i != j and 0 <= i < n and 0 <= j < n:
                index.setdefault((i, j), e)
                incident[i].append(e)
                incident[j].append(e)
        self._edge_index = index
        self.adjacency = tuple(tuple(ids) for ids in incident)

    @property
    def num_vars(self) -> int:
        return self.cardinalities.shape[0]

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self._edge_index

    def edge_index(self, i: int, j: int) -> int:
        """Index of edge {i, j} in either orientation."""
        try:
            return self._edge_index[(min(i, j), max(i, j))]
        except KeyError:
            raise MissingEdgeError(f"no edge between variables {i} and {j}") from None

    def neighbor_vars(self, i: int) -> list[int]:
        """Variables adjacent to ``i``, in incident-edge order."""
        out = []
        for e in self.adjacency[i]:
            a, b = self.edges[e]
            out.append(b if a == i else a)
        return out

    def check_assignment(self, assignment) -> np.ndarray:
        a = np.asarray(assignment, dtype=np.int64)
        if a.shape != (self.num_vars,):
            raise InvalidAssignmentError(
                f"assignment has shape {a.shape}, expected ({self.num_vars},)"
            )
        if np.any(a < 0) or np.any(a >= self.cardinalities):
            bad = int(np.argmax((a < 0) | (a >= self.cardinalities)))
            raise InvalidAssignmentError(
                f"state {a[bad]} out of range for variable {bad} "
                f"(cardinality {self.cardinalities[bad]})"
            )
        return a

    def energy(self, assignment) -> float:
        """Total log-space energy: node terms plus edge terms."""
        a = self.check_assignment(assignment)
        total = 0.0
        for i in range(self.num_vars):
            total += self.node_potentials[i][a[i]]
        for e, (i, j) in enumerate(self.edges):
            total += self.edge_potentials[e][a[i], a[j]]
        return float(total)

    def validate(self) -> list[str]:
        """All invariant violations, or an empty list for a valid model."""
        problems: list[str] = []
        n = self.num_vars
        for i, k in enumerate(self.cardinalities):
            if k < 1:
                problems.append(f"variable {i}: cardinality {k} < 1")
        if len(self.node_potentials) != n:
            problems.append(
                f"{len(self.node_potentials)} node potential tables for {n} variables"
            )
        for i, pot in enumerate(self.node_potentials):
            if i >= n:
                break
            if pot.shape != (self.cardinalities[i],):
                problems.append(
                    f"node potential {i}: shape {pot.shape}, expected "
                    f"({self.cardinalities[i]},)"
                )
            elif not np.all(np.isfinite(pot)):
                problems.append(f"node potential {i}: non-finite entry")

        if len(self.edge_potentials) != len(self.edges):
            problems.append(
                f"{len(self.edge_potentials)} edge tables for {len(self.edges)} edges"
            )
        seen: set[tuple[int, int]] = set()
        for e, (i, j) in enumerate(self.edges):
            if not (0 <= i < n and 0 <= j < n):
                problems.append(f"edge {e}: endpoint out of range ({i}, {j})")
                continue
            if i == j:
                problems.append(f"edge {e}: self-loop on variable {i}")
                continue
            if (i, j) in seen:
                problems.append(f"edge {e}: duplicate pair ({i}, {j})")
            seen.add((i, j))
            if e >= len(self.edge_potentials):
                continue
            table = self.edge_potentials[e]
            want = (self.cardinalities[i], self.cardinalities[j])
            if table.shape != want:
                problems.append(
                    f"edge {e} ({i}, {j}): table shape {table.shape}, expected {want}"
                )
            elif not np.all(np.isfinite(table)):
                problems.append(f"edge {e} ({i}, {j}): non-finite entry")
        return problems

    def with_zero_chord(self, i: int, j: int) -> "PairwiseModel":
        """New model with the zero-potential edge {i, j} appended.

        The added table is identically zero, so the energy of every
        assignment is unchanged.
        """
        if i == j:
            raise ValueError(f"chord endpoints must differ, got ({i}, {j})")
        i, j = min(i, j), max(i, j)
        if self.has_edge(i, j):
            raise DuplicateEdgeError(f"edge ({i}, {j}) already present")
        zero = np.zeros((self.cardinalities[i], self.cardinalities[j]))
        return PairwiseModel(
            self.cardinalities,
            self.node_potentials,
            self.edges + ((i, j),),
            self.edge_potentials + (zero,),
        )

    def __repr__(self) -> str:
        return (
            f"PairwiseModel(num_vars={self.num_vars}, num_edges={self.num_edges})"
        )
