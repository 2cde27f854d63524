"""Coordinate-descent message passing on the dual of the cluster LP relaxation.

The dual variables are three families of messages:

* edge-to-node, one vector per edge endpoint,
* edge-to-edge, one table per edge (the reparameterized edge potential),
* cluster-to-edge, one table per (registered triplet, member edge) pair.

Every block update (all messages out of one edge, or all messages out of one
cluster) is computed from a consistent snapshot and never increases the dual
objective. After one full sweep the dual is a valid upper bound on the MAP
energy, which is what turns a decoded assignment whose energy matches the
dual into an optimality certificate.

Messages live in flat float64 buffers so that the compiled and pure-python
kernels can share one layout; see ``_kernels_py`` for the update formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .model import MissingEdgeError, PairwiseModel


class DuplicateClusterError(ValueError):
    """A cluster over the same variable set is already registered."""


class UnregisteredClusterError(ValueError):
    """The cluster is not registered in this message state."""


@dataclass(frozen=True)
class Cluster:
    """A triplet of variables together with its three model edges.

    ``vars`` is sorted ascending; ``edge_ids`` holds the model edge indices
    of the pairs (p,q), (p,r), (q,r) in that order.
    """

    vars: tuple[int, int, int]
    edge_ids: tuple[int, int, int]

    @classmethod
    def from_vars(cls, model: PairwiseModel, p: int, q: int, r: int) -> "Cluster":
        """Build a cluster from three variables; all three edges must exist."""
        p, q, r = sorted((int(p), int(q), int(r)))
        if p == q or q == r:
            raise ValueError(f"cluster variables must be distinct, got ({p},{q},{r})")
        return cls(
            vars=(p, q, r),
            edge_ids=(
                model.edge_index(p, q),
                model.edge_index(p, r),
                model.edge_index(q, r),
            ),
        )


class MessageState:
    """All dual variables for one model, plus the registered clusters.

    New states start with every message zero. The zero state is not yet
    dual feasible; after the first :meth:`run_pass` the dual objective is a
    valid upper bound on the MAP energy.

    A state is mutated by one writer at a time; read-only consumers
    (``dual_objective``, beliefs, ``decode``) may run concurrently with each
    other between updates.
    """

    def __init__(self, model: PairwiseModel, clusters=(), backend=None):
        self._be = _backend.get_backend(backend)
        self.model = model
        self.pass_count = 0
        self.clusters: list[Cluster] = []
        self._cluster_keys: set[tuple[int, int, int]] = set()

        card = model.cardinalities
        n = model.num_vars
        self._card = np.ascontiguousarray(card, dtype=np.int32)
        self._node_off = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(card, out=self._node_off[1:])
        self._node_pot = (
            np.concatenate([np.asarray(p).ravel() for p in model.node_potentials])
            if n
            else np.zeros(0)
        )
        self._node_sum = np.zeros(self._node_off[-1])

        self._edge_i = np.array([i for i, _ in model.edges], dtype=np.int32)
        self._edge_j = np.array([j for _, j in model.edges], dtype=np.int32)
        m = len(model.edges)
        sizes = np.array(
            [int(card[i]) * int(card[j]) for i, j in model.edges], dtype=np.int64
        )
        self._edge_off = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(sizes, out=self._edge_off[1:])
        self._edge_pot = (
            np.concatenate([t.ravel() for t in model.edge_potentials])
            if m
            else np.zeros(0)
        )
        e2n_sizes = np.array(
            [int(card[i]) + int(card[j]) for i, j in model.edges], dtype=np.int64
        )
        self._e2n_off = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(e2n_sizes, out=self._e2n_off[1:])
        self._e2n = np.zeros(self._e2n_off[-1])
        self._e2e = np.zeros(self._edge_off[-1])
        self._csum = np.zeros(self._edge_off[-1])

        self._cl_vars = np.zeros((0, 3), dtype=np.int32)
        self._cl_edges = np.zeros((0, 3), dtype=np.int32)
        self._c2e_off = np.zeros((0, 3), dtype=np.int64)
        self._c2e = np.zeros(0)

        self._scratch = np.zeros(self._edge_scratch_need())
        self._all_edges = np.arange(m, dtype=np.int64)
        self._all_clusters = np.arange(0, dtype=np.int64)

        for c in clusters:
            self.register_cluster(c)

    # -- construction helpers -------------------------------------------------

    def _edge_scratch_need(self) -> int:
        if len(self._edge_i) == 0:
            return 1
        k_i = self._card[self._edge_i].astype(np.int64)
        k_j = self._card[self._edge_j].astype(np.int64)
        return int(2 * (k_i + k_j).max())

    def _cluster_scratch_need(self, vars_: tuple[int, int, int]) -> int:
        kp, kq, kr = (int(self._card[v]) for v in vars_)
        return kp * kq + kp * kr + kq * kr

    def _ensure_scratch(self, need: int) -> None:
        if self._scratch.shape[0] < need:
            self._scratch = np.zeros(need)

    # -- structure mutations --------------------------------------------------

    def register_cluster(self, cluster: Cluster) -> int:
        """Register a triplet with zero messages; the dual value is unchanged.

        Returns the cluster's index. Raises ``DuplicateClusterError`` if a
        cluster over the same variables is already registered and
        ``MissingEdgeError`` if one of its edges is absent.
        """
        key = tuple(sorted(cluster.vars))
        if key in self._cluster_keys:
            raise DuplicateClusterError(f"cluster {key} already registered")
        m = len(self.model.edges)
        for e in cluster.edge_ids:
            if not (0 <= e < m):
                raise MissingEdgeError(f"cluster {key} cites nonexistent edge {e}")
        for (u, v), e in zip(
            ((key[0], key[1]), (key[0], key[2]), (key[1], key[2])), cluster.edge_ids
        ):
            if self.model.edges[e] != (u, v):
                raise ValueError(
                    f"cluster {key}: edge id {e} is {self.model.edges[e]}, "
                    f"expected ({u}, {v})"
                )

        sizes = [
            int(self._card[u]) * int(self._card[v])
            for (u, v) in ((key[0], key[1]), (key[0], key[2]), (key[1], key[2]))
        ]
        base = self._c2e.shape[0]
        offs = np.array(
            [[base, base + sizes[0], base + sizes[0] + sizes[1]]], dtype=np.int64
        )
        self._cl_vars = np.vstack([self._cl_vars, np.array([key], dtype=np.int32)])
        self._cl_edges = np.vstack(
            [self._cl_edges, np.array([cluster.edge_ids], dtype=np.int32)]
        )
        self._c2e_off = np.vstack([self._c2e_off, offs])
        self._c2e = np.concatenate([self._c2e, np.zeros(sum(sizes))])
        self.clusters.append(cluster)
        self._cluster_keys.add(key)
        self._ensure_scratch(self._cluster_scratch_need(key))
        self._all_clusters = np.arange(len(self.clusters), dtype=np.int64)
        return len(self.clusters) - 1

    def add_chord_edge(self, i: int, j: int) -> int:
        """Append a zero-potential edge to the model and grow the buffers.

        All new message tables are zero, so the dual value is unchanged.
        Returns the new edge's index.
        """
        self.model = self.model.with_zero_chord(i, j)
        i, j = min(i, j), max(i, j)
        ki, kj = int(self._card[i]), int(self._card[j])
        self._edge_i = np.append(self._edge_i, np.int32(i))
        self._edge_j = np.append(self._edge_j, np.int32(j))
        self._edge_off = np.append(self._edge_off, self._edge_off[-1] + ki * kj)
        self._e2n_off = np.append(self._e2n_off, self._e2n_off[-1] + ki + kj)
        self._edge_pot = np.concatenate([self._edge_pot, np.zeros(ki * kj)])
        self._e2e = np.concatenate([self._e2e, np.zeros(ki * kj)])
        self._csum = np.concatenate([self._csum, np.zeros(ki * kj)])
        self._e2n = np.concatenate([self._e2n, np.zeros(ki + kj)])
        m = len(self._edge_i)
        self._all_edges = np.arange(m, dtype=np.int64)
        self._ensure_scratch(2 * (ki + kj))
        return m - 1

    # -- block updates ----------------------------------------------------------

    def update_edge(self, e: int) -> None:
        """One simultaneous block update of all messages leaving edge ``e``."""
        if not (0 <= e < len(self._edge_i)):
            raise IndexError(f"edge index {e} out of range")
        self._run_edges(np.array([e], dtype=np.int64))

    def update_cluster(self, cluster) -> None:
        """One simultaneous block update of the messages leaving a cluster.

        ``cluster`` is a registered ``Cluster`` or its index.
        """
        idx = self._cluster_index(cluster)
        self._run_clusters(np.array([idx], dtype=np.int64))

    def run_pass(self) -> None:
        """One full sweep: every edge in index order, then every cluster in
        addition order."""
        self._run_edges(self._all_edges)
        self._run_clusters(self._all_clusters)
        self.pass_count += 1

    def _run_edges(self, which: np.ndarray) -> None:
        if which.shape[0] == 0:
            return
        self._be.update_edges(
            which,
            self._edge_i,
            self._edge_j,
            self._card,
            self._node_off,
            self._edge_off,
            self._e2n_off,
            self._node_pot,
            self._edge_pot,
            self._e2n,
            self._e2e,
            self._node_sum,
            self._csum,
            self._scratch,
        )

    def _run_clusters(self, which: np.ndarray) -> None:
        if which.shape[0] == 0:
            return
        self._be.update_clusters(
            which,
            self._cl_vars,
            self._cl_edges,
            self._c2e_off,
            self._card,
            self._edge_off,
            self._e2e,
            self._csum,
            self._c2e,
            self._scratch,
        )

    def _cluster_index(self, cluster) -> int:
        if isinstance(cluster, (int, np.integer)):
            idx = int(cluster)
            if not (0 <= idx < len(self.clusters)):
                raise UnregisteredClusterError(f"no cluster with index {idx}")
            return idx
        key = tuple(sorted(cluster.vars))
        for idx, c in enumerate(self.clusters):
            if c.vars == key:
                return idx
        raise UnregisteredClusterError(f"cluster {key} is not registered")

    # -- objective, beliefs, decoding -------------------------------------------

    def dual_objective(self) -> float:
        """Upper bound on the MAP energy (valid once ``pass_count >= 1``).

        The per-node and per-edge maxima are combined with exact summation
        (math.fsum) so the value is invariant under registering zero-message
        clusters and zero-potential chord edges.
        """
        total = 0.0
        if self._node_pot.shape[0]:
            total += math.fsum(
                np.maximum.reduceat(
                    self._node_pot + self._node_sum, self._node_off[:-1]
                )
            )
        if self._e2e.shape[0]:
            total += math.fsum(
                np.maximum.reduceat(self._e2e + self._csum, self._edge_off[:-1])
            )
        return total

    def node_belief(self, i: int) -> np.ndarray:
        """Node potential plus all incoming edge-to-node messages."""
        lo, hi = self._node_off[i], self._node_off[i + 1]
        return self._node_pot[lo:hi] + self._node_sum[lo:hi]

    def edge_belief(self, e: int, exclude: Cluster | None = None) -> np.ndarray:
        """Reparameterized edge table: edge-to-edge message plus incoming
        cluster messages.

        With ``exclude`` given, that cluster's own message is left out (the
        candidate-scoring variant; excluding a cluster that is not registered
        subtracts nothing). ``exclude`` must contain ``e``.
        """
        lo, hi = self._edge_off[e], self._edge_off[e + 1]
        ki = int(self._card[self._edge_i[e]])
        kj = int(self._card[self._edge_j[e]])
        table = (self._e2e[lo:hi] + self._csum[lo:hi]).reshape(ki, kj)
        if exclude is not None:
            if e not in exclude.edge_ids:
                raise ValueError(
                    f"edge {e} is not one of the excluded cluster's edges "
                    f"{exclude.edge_ids}"
                )
            key = tuple(sorted(exclude.vars))
            for idx, c in enumerate(self.clusters):
                if c.vars == key:
                    slot = c.edge_ids.index(e)
                    o = self._c2e_off[idx, slot]
                    table = table - self._c2e[o : o + ki * kj].reshape(ki, kj)
                    break
        return table

    def cluster_to_edge(self, cluster, e: int) -> np.ndarray:
        """Copy of the message a registered cluster currently sends to edge ``e``."""
        idx = self._cluster_index(cluster)
        slot = self.clusters[idx].edge_ids.index(e)
        o = self._c2e_off[idx, slot]
        ki = int(self._card[self._edge_i[e]])
        kj = int(self._card[self._edge_j[e]])
        return self._c2e[o : o + ki * kj].reshape(ki, kj).copy()

    def edge_to_node(self, e: int, endpoint: int) -> np.ndarray:
        """Copy of the message edge ``e`` currently sends to one endpoint."""
        i, j = int(self._edge_i[e]), int(self._edge_j[e])
        ki, kj = int(self._card[i]), int(self._card[j])
        mi = self._e2n_off[e]
        if endpoint == i:
            return self._e2n[mi : mi + ki].copy()
        if endpoint == j:
            return self._e2n[mi + ki : mi + ki + kj].copy()
        raise ValueError(f"variable {endpoint} is not an endpoint of edge {e}")

    def edge_to_edge_view(self, e: int) -> np.ndarray:
        """Writable view of the edge-to-edge message table.

        Writing here needs no bookkeeping (nothing is derived from it), which
        makes it the hook for preloading reparameterized edge tables.
        """
        lo, hi = self._edge_off[e], self._edge_off[e + 1]
        ki = int(self._card[self._edge_i[e]])
        kj = int(self._card[self._edge_j[e]])
        return self._e2e[lo:hi].reshape(ki, kj)

    def decode(self) -> np.ndarray:
        """Assignment maximizing each node belief; ties go to the lowest state."""
        out = np.zeros(self.model.num_vars, dtype=np.int64)
        bel = self._node_pot + self._node_sum
        for i in range(self.model.num_vars):
            lo, hi = self._node_off[i], self._node_off[i + 1]
            out[i] = int(np.argmax(bel[lo:hi]))
        return out

    @property
    def backend_name(self) -> str:
        return _backend.backend_name(self._be)


def init_messages(model: PairwiseModel, clusters=(), backend=None) -> MessageState:
    """Zero-initialized message state for a model; alias of the constructor."""
    return MessageState(model, clusters, backend)
