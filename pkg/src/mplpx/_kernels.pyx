# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled message update kernels (hot path).

Typed-loop translation of ``mplpx._kernels_py``; same buffers, same block
semantics, same floating-point operation order, so results agree with the
fallback bit for bit. Compiled with -ffp-contract=off (see setup.py).
"""

from libc.math cimport INFINITY
from libc.stdint cimport int32_t, int64_t

IS_COMPILED = True

cdef double ONE_THIRD = 1.0 / 3.0
cdef double MINUS_TWO_THIRDS = -2.0 / 3.0


def update_edges(
    const int64_t[::1] which,
    const int32_t[::1] edge_i,
    const int32_t[::1] edge_j,
    const int32_t[::1] card,
    const int64_t[::1] node_off,
    const int64_t[::1] edge_off,
    const int64_t[::1] e2n_off,
    const double[::1] node_pot,
    const double[::1] edge_pot,
    double[::1] e2n,
    double[::1] e2e,
    double[::1] node_sum,
    double[::1] csum,
    double[::1] scratch,
):
    """Recompute the edge-to-node and edge-to-edge messages of each listed edge."""
    cdef Py_ssize_t w, a, b
    cdef int64_t e, ni, nj, mi, mj, t0, t
    cdef int32_t i, j, ki, kj
    cdef Py_ssize_t s_lam_i, s_lam_j, s_new_i, s_new_j
    cdef double best, v, delta

    for w in range(which.shape[0]):
        e = which[w]
        i = edge_i[e]
        j = edge_j[e]
        ki = card[i]
        kj = card[j]
        ni = node_off[i]
        nj = node_off[j]
        mi = e2n_off[e]
        mj = mi + ki
        t0 = edge_off[e]

        # scratch layout: lam_i | lam_j | new_mi | new_mj
        s_lam_i = 0
        s_lam_j = ki
        s_new_i = ki + kj
        s_new_j = 2 * ki + kj

        for a in range(ki):
            scratch[s_lam_i + a] = node_sum[ni + a] - e2n[mi + a] + node_pot[ni + a]
        for b in range(kj):
            scratch[s_lam_j + b] = node_sum[nj + b] - e2n[mj + b] + node_pot[nj + b]

        for a in range(ki):
            best = -INFINITY
            t = t0 + a * kj
            for b in range(kj):
                v = csum[t + b] + edge_pot[t + b] + scratch[s_lam_j + b]
                if v > best:
                    best = v
            scratch[s_new_i + a] = (
                MINUS_TWO_THIRDS * scratch[s_lam_i + a] + ONE_THIRD * best
            )

        for b in range(kj):
            best = -INFINITY
            for a in range(ki):
                t = t0 + a * kj + b
                v = csum[t] + edge_pot[t] + scratch[s_lam_i + a]
                if v > best:
                    best = v
            scratch[s_new_j + b] = (
                MINUS_TWO_THIRDS * scratch[s_lam_j + b] + ONE_THIRD * best
            )

        for a in range(ki):
            t = t0 + a * kj
            for b in range(kj):
                e2e[t + b] = MINUS_TWO_THIRDS * csum[t + b] + ONE_THIRD * (
                    (scratch[s_lam_i + a] + scratch[s_lam_j + b]) + edge_pot[t + b]
                )

        for a in range(ki):
            delta = scratch[s_new_i + a] - e2n[mi + a]
            node_sum[ni + a] = node_sum[ni + a] + delta
            e2n[mi + a] = scratch[s_new_i + a]
        for b in range(kj):
            delta = scratch[s_new_j + b] - e2n[mj + b]
            node_sum[nj + b] = node_sum[nj + b] + delta
            e2n[mj + b] = scratch[s_new_j + b]


def update_clusters(
    const int64_t[::1] which,
    const int32_t[:, ::1] cl_vars,
    const int32_t[:, ::1] cl_edges,
    const int64_t[:, ::1] c2e_off,
    const int32_t[::1] card,
    const int64_t[::1] edge_off,
    double[::1] e2e,
    double[::1] csum,
    double[::1] c2e,
    double[::1] scratch,
):
    """Recompute the three cluster-to-edge messages of each listed triplet."""
    cdef Py_ssize_t w, a, b, g
    cdef int64_t c, tpq, tpr, tqr, opq, opr, oqr, t
    cdef int32_t kp, kq, kr
    cdef Py_ssize_t b_pq, b_pr, b_qr, spq, spr, sqr
    cdef double best, v, nv

    for w in range(which.shape[0]):
        c = which[w]
        kp = card[cl_vars[c, 0]]
        kq = card[cl_vars[c, 1]]
        kr = card[cl_vars[c, 2]]
        tpq = edge_off[cl_edges[c, 0]]
        tpr = edge_off[cl_edges[c, 1]]
        tqr = edge_off[cl_edges[c, 2]]
        opq = c2e_off[c, 0]
        opr = c2e_off[c, 1]
        oqr = c2e_off[c, 2]
        spq = kp * kq
        spr = kp * kr
        sqr = kq * kr

        # scratch layout: b_pq | b_pr | b_qr (beliefs minus own messages)
        b_pq = 0
        b_pr = spq
        b_qr = spq + spr
        for t in range(spq):
            scratch[b_pq + t] = (e2e[tpq + t] + csum[tpq + t]) - c2e[opq + t]
        for t in range(spr):
            scratch[b_pr + t] = (e2e[tpr + t] + csum[tpr + t]) - c2e[opr + t]
        for t in range(sqr):
            scratch[b_qr + t] = (e2e[tqr + t] + csum[tqr + t]) - c2e[oqr + t]

        for a in range(kp):
            for b in range(kq):
                best = -INFINITY
                for g in range(kr):
                    v = scratch[b_pr + a * kr + g] + scratch[b_qr + b * kr + g]
                    if v > best:
                        best = v
                t = a * kq + b
                nv = MINUS_TWO_THIRDS * scratch[b_pq + t] + ONE_THIRD * best
                csum[tpq + t] = csum[tpq + t] + (nv - c2e[opq + t])
                c2e[opq + t] = nv

        for a in range(kp):
            for g in range(kr):
                best = -INFINITY
                for b in range(kq):
                    v = scratch[b_pq + a * kq + b] + scratch[b_qr + b * kr + g]
                    if v > best:
                        best = v
                t = a * kr + g
                nv = MINUS_TWO_THIRDS * scratch[b_pr + t] + ONE_THIRD * best
                csum[tpr + t] = csum[tpr + t] + (nv - c2e[opr + t])
                c2e[opr + t] = nv

        for b in range(kq):
            for g in range(kr):
                best = -INFINITY
                for a in range(kp):
                    v = scratch[b_pq + a * kq + b] + scratch[b_pr + a * kr + g]
                    if v > best:
                        best = v
                t = b * kr + g
                nv = MINUS_TWO_THIRDS * scratch[b_qr + t] + ONE_THIRD * best
                csum[tqr + t] = csum[tqr + t] + (nv - c2e[oqr + t])
                c2e[oqr + t] = nv
