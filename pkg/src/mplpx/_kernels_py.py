"""Pure-numpy message update kernels (fallback backend).

Both kernels operate on the flat message buffers owned by
``mplpx.msgcore.MessageState``. The arithmetic mirrors the compiled
``mplpx._kernels`` operation for operation, so the two backends produce
identical tables bit for bit.

Block semantics: each edge (or cluster) block reads a snapshot of its inputs
before writing any of its outputs, which is what makes every block update a
monotone coordinate-descent step on the dual objective.
"""

import numpy as np

IS_COMPILED = False

ONE_THIRD = 1.0 / 3.0
MINUS_TWO_THIRDS = -2.0 / 3.0


def update_edges(
    which,
    edge_i,
    edge_j,
    card,
    node_off,
    edge_off,
    e2n_off,
    node_pot,
    edge_pot,
    e2n,
    e2e,
    node_sum,
    csum,
    scratch,
):
    """Recompute the edge-to-node and edge-to-edge messages of each listed edge."""
    for e in which:
        i = edge_i[e]
        j = edge_j[e]
        ki = int(card[i])
        kj = int(card[j])
        ni = node_off[i]
        nj = node_off[j]
        mi = e2n_off[e]
        mj = mi + ki
        t0 = edge_off[e]

        # snapshot: lam_* holds (incoming edge-to-node sum excluding this
        # edge) + node potential, for each endpoint
        lam_i = node_sum[ni : ni + ki] - e2n[mi : mi + ki] + node_pot[ni : ni + ki]
        lam_j = node_sum[nj : nj + kj] - e2n[mj : mj + kj] + node_pot[nj : nj + kj]
        pair = (csum[t0 : t0 + ki * kj] + edge_pot[t0 : t0 + ki * kj]).reshape(ki, kj)

        new_mi = MINUS_TWO_THIRDS * lam_i + ONE_THIRD * (pair + lam_j[None, :]).max(
            axis=1
        )
        new_mj = MINUS_TWO_THIRDS * lam_j + ONE_THIRD * (pair + lam_i[:, None]).max(
            axis=0
        )
        new_ee = MINUS_TWO_THIRDS * csum[t0 : t0 + ki * kj] + ONE_THIRD * (
            (lam_i[:, None] + lam_j[None, :]) + edge_pot[t0 : t0 + ki * kj].reshape(ki, kj)
        ).ravel()

        node_sum[ni : ni + ki] += new_mi - e2n[mi : mi + ki]
        node_sum[nj : nj + kj] += new_mj - e2n[mj : mj + kj]
        e2n[mi : mi + ki] = new_mi
        e2n[mj : mj + kj] = new_mj
        e2e[t0 : t0 + ki * kj] = new_ee


def update_clusters(
    which,
    cl_vars,
    cl_edges,
    c2e_off,
    card,
    edge_off,
    e2e,
    csum,
    c2e,
    scratch,
):
    """Recompute the three cluster-to-edge messages of each listed triplet."""
    for c in which:
        p, q, r = (int(v) for v in cl_vars[c])
        kp, kq, kr = int(card[p]), int(card[q]), int(card[r])
        tpq, tpr, tqr = (edge_off[e] for e in cl_edges[c])
        opq, opr, oqr = (int(o) for o in c2e_off[c])
        spq, spr, sqr = kp * kq, kp * kr, kq * kr

        # edge beliefs with this cluster's own messages removed
        b_pq = (
            (e2e[tpq : tpq + spq] + csum[tpq : tpq + spq]) - c2e[opq : opq + spq]
        ).reshape(kp, kq)
        b_pr = (
            (e2e[tpr : tpr + spr] + csum[tpr : tpr + spr]) - c2e[opr : opr + spr]
        ).reshape(kp, kr)
        b_qr = (
            (e2e[tqr : tqr + sqr] + csum[tqr : tqr + sqr]) - c2e[oqr : oqr + sqr]
        ).reshape(kq, kr)

        new_pq = (
            MINUS_TWO_THIRDS * b_pq
            + ONE_THIRD * np.max(b_pr[:, None, :] + b_qr[None, :, :], axis=2)
        ).ravel()
        new_pr = (
            MINUS_TWO_THIRDS * b_pr
            + ONE_THIRD * np.max(b_pq[:, :, None] + b_qr[None, :, :], axis=1)
        ).ravel()
        new_qr = (
            MINUS_TWO_THIRDS * b_qr
            + ONE_THIRD * np.max(b_pq[:, :, None] + b_pr[:, None, :], axis=0)
        ).ravel()

        csum[tpq : tpq + spq] += new_pq - c2e[opq : opq + spq]
        csum[tpr : tpr + spr] += new_pr - c2e[opr : opr + spr]
        csum[tqr : tqr + sqr] += new_qr - c2e[oqr : oqr + sqr]
        c2e[opq : opq + spq] = new_pq
        c2e[opr : opr + spr] = new_pr
        c2e[oqr : oqr + sqr] = new_qr
