# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: CM joint-construction runs, fluid RK4, Poisson RK4.

Mirrors the pure-Python implementations draw for draw: random decisions pull
64-bit words from the caller's PCG64 bit generator through numpy's C
interface, using the same modulo-rejection bounded draw as
localmatch.rng.RandomSource.below, so pure and compiled runs coincide
bit for bit on the same seed.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport ceil, expm1
from libc.stdint cimport int8_t, int64_t, uint64_t
from numpy.random cimport bitgen_t

cnp.import_array()

# criterion codes shared with localmatch.backend
cdef int K_GREEDY = 0
cdef int K_UNIMIN = 1
cdef int K_UNIMAX = 2
cdef int K_MINMIN = 3
cdef int K_MAXMAX = 4

cdef int CLS_U = 0
cdef int CLS_M = 1
cdef int CLS_I = 2
cdef int CLS_B = 3

cdef double SCALAR_GUARD = 1e-12
cdef double CELL_NUDGE = 9.5367431640625e-07  # 2**-20


cdef bitgen_t *_get_bitgen(object bit_generator) except NULL:
    capsule = bit_generator.capsule
    return <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")


cdef inline uint64_t _next_u64(bitgen_t *bg) noexcept nogil:
    return bg.next_uint64(bg.state)


cdef inline uint64_t _below(bitgen_t *bg, uint64_t n) noexcept nogil:
    # identical protocol to RandomSource.below: n == 1 consumes nothing
    cdef uint64_t r, limit, x
    if n <= 1:
        return 0
    r = (0 - n) % n  # 2**64 mod n
    if r == 0:
        return _next_u64(bg) % n
    limit = 0 - r    # 2**64 - r
    while True:
        x = _next_u64(bg)
        if x < limit:
            return x % n


cdef Py_ssize_t _pick_extreme(int64_t[::1] values, int64_t[::1] members,
                              Py_ssize_t count, bint use_min,
                              bitgen_t *bg) noexcept nogil:
    """Uniform index among argmin/argmax of values[members[i]], i < count."""
    cdef int64_t best = values[members[0]]
    cdef Py_ssize_t i, ties = 0, want, seen = 0
    cdef int64_t a
    for i in range(1, count):
        a = values[members[i]]
        if (use_min and a < best) or (not use_min and a > best):
            best = a
    for i in range(count):
        if values[members[i]] == best:
            ties += 1
    want = <Py_ssize_t> _below(bg, <uint64_t> ties)
    for i in range(count):
        if values[members[i]] == best:
            if seen == want:
                return i
            seen += 1
    return 0  # unreachable


_iota_cache = {}


cdef int64_t[::1] _iota(Py_ssize_t n):
    arr = _iota_cache.get(n)
    if arr is None:
        arr = np.arange(n, dtype=np.int64)
        _iota_cache[n] = arr
    return arr


def cm_run(cnp.ndarray[cnp.int64_t, ndim=1] degrees_arr, int kind_code, object rng,
           cnp.ndarray[cnp.int64_t, ndim=1] snap_steps_arr, bint record_moments,
           bint record_edges):
    """One joint-construction run; returns the same aggregates as the pure path."""
    cdef bitgen_t *bg = _get_bitgen(rng.bit_generator)
    cdef int64_t[::1] degrees = degrees_arr
    cdef Py_ssize_t n = degrees.shape[0]
    cdef Py_ssize_t total = 0
    cdef Py_ssize_t i, v
    cdef int64_t top = 0
    for i in range(n):
        total += degrees[i]
        if degrees[i] > top:
            top = degrees[i]

    avail_arr = np.array(degrees_arr, dtype=np.int64)
    cdef int64_t[::1] avail = avail_arr
    cls_arr = np.zeros(n, dtype=np.int8)
    cdef int8_t[::1] cls = cls_arr
    u_list_arr = np.empty(n, dtype=np.int64)
    u_pos_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] u_list = u_list_arr
    cdef int64_t[::1] u_pos = u_pos_arr
    cdef Py_ssize_t u_len = 0

    stub_node_arr = np.empty(total, dtype=np.int64)
    stub_link_arr = np.empty(total, dtype=np.int64)
    slot_off_arr = np.zeros(n + 1, dtype=np.int64)
    slot_cnt_arr = np.zeros(n, dtype=np.int64)
    node_slots_arr = np.empty(total, dtype=np.int64)
    cdef int64_t[::1] stub_node = stub_node_arr
    cdef int64_t[::1] stub_link = stub_link_arr
    cdef int64_t[::1] slot_off = slot_off_arr
    cdef int64_t[::1] slot_cnt = slot_cnt_arr
    cdef int64_t[::1] node_slots = node_slots_arr
    cdef Py_ssize_t pool_len = 0

    mu_counts_arr = np.zeros(top + 1, dtype=np.int64)
    cdef int64_t[::1] mu_counts = mu_counts_arr
    cdef int64_t mu_mass = 0, mu_m1 = 0, mu_m2 = 0
    cdef int64_t[6] mu_tails
    for i in range(6):
        mu_tails[i] = 0

    cdef int64_t d, k
    for v in range(n):
        d = degrees[v]
        slot_off[v + 1] = slot_off[v] + d
        if d > 0:
            cls[v] = CLS_U
            u_pos[v] = u_len
            u_list[u_len] = v
            u_len += 1
        else:
            cls[v] = CLS_I
        mu_counts[d] += 1
        mu_mass += 1
        mu_m1 += d
        mu_m2 += d * d
        for k in range(1, 6):
            if d >= k:
                mu_tails[k] += 1
        for k in range(d):
            node_slots[slot_off[v] + k] = pool_len
            stub_link[pool_len] = k
            stub_node[pool_len] = v
            pool_len += 1
        slot_cnt[v] = d

    # per-step scratch: edge multiplicities and first-touch order
    b_cnt_arr = np.zeros(n, dtype=np.int64)
    bp_cnt_arr = np.zeros(n, dtype=np.int64)
    order_arr = np.empty(n, dtype=np.int64)
    pre_arr = np.empty(n, dtype=np.int64)
    bp_order_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] b_cnt = b_cnt_arr
    cdef int64_t[::1] bp_cnt = bp_cnt_arr
    cdef int64_t[::1] order = order_arr
    cdef int64_t[::1] pre = pre_arr
    cdef int64_t[::1] bp_order = bp_order_arr

    moments_arr = None
    cdef int64_t[:, ::1] moments = None
    if record_moments:
        moments_arr = np.empty((n + 1, 8), dtype=np.int64)
        moments = moments_arr

    edges_arr = None
    matching_arr = None
    cdef int64_t[:, ::1] edges = None
    cdef int64_t[:, ::1] matching = None
    cdef Py_ssize_t edge_len = 0
    if record_edges:
        edges_arr = np.empty((total // 2, 2), dtype=np.int64)
        matching_arr = np.empty((n // 2 + 1, 2), dtype=np.int64)
        edges = edges_arr
        matching = matching_arr

    snapshots = []
    snap_set = set(snap_steps_arr.tolist())

    cdef int64_t matched_pairs = 0, blocked = 0, selfloops = 0, multiedges = 0
    cdef Py_ssize_t j, idx, last, li, p, q
    cdef Py_ssize_t explorer, match, w, nlen, bplen, tpos, s_last
    cdef int64_t k_first, k_match, c, pre_deg, y

    if record_moments:
        moments[0, 0] = mu_mass
        moments[0, 1] = mu_m1
        moments[0, 2] = mu_m2
        for k in range(1, 6):
            moments[0, 2 + k] = mu_tails[k]
    if 0 in snap_set:
        snapshots.append((0, mu_counts_arr.copy()))

    for j in range(n):
        if u_len == 0:
            if record_moments:
                moments[j + 1, 0] = mu_mass
                moments[j + 1, 1] = mu_m1
                moments[j + 1, 2] = mu_m2
                for k in range(1, 6):
                    moments[j + 1, 2 + k] = mu_tails[k]
            if (j + 1) in snap_set:
                snapshots.append((j + 1, mu_counts_arr.copy()))
            continue

        # ---- choose the explored node over the unexplored list ----
        if kind_code <= K_UNIMAX:
            idx = <Py_ssize_t> _below(bg, <uint64_t> u_len)
        else:
            idx = _pick_extreme(avail, u_list, u_len, kind_code == K_MINMIN, bg)
        explorer = <Py_ssize_t> u_list[idx]
        k_first = avail[explorer]
        last = u_len - 1
        if idx != last:
            u_list[idx] = u_list[last]
            u_pos[u_list[idx]] = idx
        u_len -= 1

        # ---- pair all stubs of the explorer ----
        nlen = 0
        while avail[explorer] > 0:
            # take one stub of the explorer (last slot in its list)
            p = <Py_ssize_t> node_slots[slot_off[explorer] + slot_cnt[explorer] - 1]
            v = <Py_ssize_t> stub_node[p]
            li = <Py_ssize_t> stub_link[p]
            slot_cnt[v] -= 1
            s_last = <Py_ssize_t> node_slots[slot_off[v] + slot_cnt[v]]
            if s_last != p:
                node_slots[slot_off[v] + li] = s_last
                stub_link[s_last] = li
            q = pool_len - 1
            if p != q:
                stub_node[p] = stub_node[q]
                stub_link[p] = stub_link[q]
                node_slots[slot_off[stub_node[p]] + stub_link[p]] = p
            pool_len -= 1
            avail[explorer] -= 1

            # partner stub uniform among the remaining pool
            p = <Py_ssize_t> _below(bg, <uint64_t> pool_len)
            w = <Py_ssize_t> stub_node[p]
            li = <Py_ssize_t> stub_link[p]
            slot_cnt[w] -= 1
            s_last = <Py_ssize_t> node_slots[slot_off[w] + slot_cnt[w]]
            if s_last != p:
                node_slots[slot_off[w] + li] = s_last
                stub_link[s_last] = li
            q = pool_len - 1
            if p != q:
                stub_node[p] = stub_node[q]
                stub_link[p] = stub_link[q]
                node_slots[slot_off[stub_node[p]] + stub_link[p]] = p
            pool_len -= 1
            avail[w] -= 1

            if record_edges:
                edges[edge_len, 0] = explorer if explorer < w else w
                edges[edge_len, 1] = w if explorer < w else explorer
                edge_len += 1
            if w == explorer:
                selfloops += 1
            else:
                c = b_cnt[w]
                if c == 0:
                    order[nlen] = w
                    nlen += 1
                else:
                    multiedges += 1
                b_cnt[w] = c + 1

        if nlen == 0:
            # blocked: only the explorer's atom leaves the measure
            cls[explorer] = CLS_B
            blocked += 1
            y = k_first
            mu_counts[y] -= 1
            mu_mass -= 1
            mu_m1 -= y
            mu_m2 -= y * y
            for k in range(1, 6):
                if y >= k:
                    mu_tails[k] -= 1
        else:
            for i in range(nlen):
                pre[i] = avail[order[i]] + b_cnt[order[i]]
            if kind_code == K_GREEDY:
                idx = <Py_ssize_t> _below(bg, <uint64_t> nlen)
            elif kind_code == K_UNIMIN or kind_code == K_MINMIN:
                idx = _pick_extreme(pre, _iota(nlen), nlen, True, bg)
            else:
                idx = _pick_extreme(pre, _iota(nlen), nlen, False, bg)
            match = <Py_ssize_t> order[idx]
            k_match = pre[idx]
            tpos = <Py_ssize_t> u_pos[match]
            last = u_len - 1
            if tpos != last:
                u_list[tpos] = u_list[last]
                u_pos[u_list[tpos]] = tpos
            u_len -= 1

            # complete the match's remaining stubs
            bplen = 0
            while avail[match] > 0:
                p = <Py_ssize_t> node_slots[slot_off[match] + slot_cnt[match] - 1]
                v = <Py_ssize_t> stub_node[p]
                li = <Py_ssize_t> stub_link[p]
                slot_cnt[v] -= 1
                s_last = <Py_ssize_t> node_slots[slot_off[v] + slot_cnt[v]]
                if s_last != p:
                    node_slots[slot_off[v] + li] = s_last
                    stub_link[s_last] = li
                q = pool_len - 1
                if p != q:
                    stub_node[p] = stub_node[q]
                    stub_link[p] = stub_link[q]
                    node_slots[slot_off[stub_node[p]] + stub_link[p]] = p
                pool_len -= 1
                avail[match] -= 1

                p = <Py_ssize_t> _below(bg, <uint64_t> pool_len)
                w = <Py_ssize_t> stub_node[p]
                li = <Py_ssize_t> stub_link[p]
                slot_cnt[w] -= 1
                s_last = <Py_ssize_t> node_slots[slot_off[w] + slot_cnt[w]]
                if s_last != p:
                    node_slots[slot_off[w] + li] = s_last
                    stub_link[s_last] = li
                q = pool_len - 1
                if p != q:
                    stub_node[p] = stub_node[q]
                    stub_link[p] = stub_link[q]
                    node_slots[slot_off[stub_node[p]] + stub_link[p]] = p
                pool_len -= 1
                avail[w] -= 1

                if record_edges:
                    edges[edge_len, 0] = match if match < w else w
                    edges[edge_len, 1] = w if match < w else match
                    edge_len += 1
                if w == match:
                    selfloops += 1
                else:
                    c = bp_cnt[w]
                    if c == 0:
                        bp_order[bplen] = w
                        bplen += 1
                    else:
                        multiedges += 1
                    bp_cnt[w] = c + 1

            cls[explorer] = CLS_M
            cls[match] = CLS_M
            if record_edges:
                matching[matched_pairs, 0] = explorer
                matching[matched_pairs, 1] = match
            matched_pairs += 1

            y = k_first
            mu_counts[y] -= 1
            mu_mass -= 1
            mu_m1 -= y
            mu_m2 -= y * y
            for k in range(1, 6):
                if y >= k:
                    mu_tails[k] -= 1
            y = k_match
            mu_counts[y] -= 1
            mu_mass -= 1
            mu_m1 -= y
            mu_m2 -= y * y
            for k in range(1, 6):
                if y >= k:
                    mu_tails[k] -= 1

            # third-party losses: first-edge order then match-edge order
            for i in range(nlen):
                w = <Py_ssize_t> order[i]
                if w == match:
                    continue
                d = b_cnt[w] + bp_cnt[w]
                bp_cnt[w] = 0
                pre_deg = avail[w] + d
                mu_counts[pre_deg] -= 1
                mu_m1 -= pre_deg
                mu_m2 -= pre_deg * pre_deg
                for k in range(1, 6):
                    if pre_deg >= k:
                        mu_tails[k] -= 1
                y = avail[w]
                mu_counts[y] += 1
                mu_m1 += y
                mu_m2 += y * y
                for k in range(1, 6):
                    if y >= k:
                        mu_tails[k] += 1
                if avail[w] == 0:
                    cls[w] = CLS_I
                    tpos = <Py_ssize_t> u_pos[w]
                    last = u_len - 1
                    if tpos != last:
                        u_list[tpos] = u_list[last]
                        u_pos[u_list[tpos]] = tpos
                    u_len -= 1
            for i in range(bplen):
                w = <Py_ssize_t> bp_order[i]
                d = bp_cnt[w]
                if d == 0:
                    continue  # already folded into a first-phase neighbor
                bp_cnt[w] = 0
                pre_deg = avail[w] + d
                mu_counts[pre_deg] -= 1
                mu_m1 -= pre_deg
                mu_m2 -= pre_deg * pre_deg
                for k in range(1, 6):
                    if pre_deg >= k:
                        mu_tails[k] -= 1
                y = avail[w]
                mu_counts[y] += 1
                mu_m1 += y
                mu_m2 += y * y
                for k in range(1, 6):
                    if y >= k:
                        mu_tails[k] += 1
                if avail[w] == 0:
                    cls[w] = CLS_I
                    tpos = <Py_ssize_t> u_pos[w]
                    last = u_len - 1
                    if tpos != last:
                        u_list[tpos] = u_list[last]
                        u_pos[u_list[tpos]] = tpos
                    u_len -= 1
            for i in range(nlen):
                b_cnt[order[i]] = 0

        if pool_len % 2 != 0:
            raise RuntimeError(f"stub pool parity violated at step {j + 1}")
        if record_moments:
            moments[j + 1, 0] = mu_mass
            moments[j + 1, 1] = mu_m1
            moments[j + 1, 2] = mu_m2
            for k in range(1, 6):
                moments[j + 1, 2 + k] = mu_tails[k]
        if (j + 1) in snap_set:
            snapshots.append((j + 1, mu_counts_arr.copy()))

    cdef int64_t isolated = 0
    for v in range(n):
        if cls[v] == CLS_I:
            isolated += 1
    if record_edges:
        edges_out = edges_arr[:edge_len].copy()
        matching_out = matching_arr[:matched_pairs].copy()
    else:
        edges_out = None
        matching_out = None
    return (snapshots, 2 * matched_pairs, isolated, blocked, selfloops, multiedges,
            moments_arr, int(mu_counts[0]), edges_out, matching_out)


# ---------------------------------------------------------------------------
# fluid solver
# ---------------------------------------------------------------------------

cdef void _field(int kind_code, double[::1] x, double[::1] out,
                 double[::1] q, double[::1] km) noexcept nogil:
    # Mean one-step transition at a scaled state: remove the explored atom,
    # remove the match atom (marginal km), and shift one unit per partner
    # stub consumed from a third party.  The chosen match is one of the
    # explorer's partner draws, so the shift intensity is K*sb - km (it
    # collapses to (K-1)*sb only for the value-blind greedy choice).
    # Collecting terms, with C = M/m + <km, x> - 1:
    #   dx_j = -( x_j/m + C*grad_j/M + km[j+1] ),  dx_0 = C*x_1/M - km[1].
    cdef Py_ssize_t nmax = x.shape[0] - 1
    cdef Py_ssize_t i, jj, kk
    cdef double m = 0.0, big_m = 0.0, amp, grad, acc, pw, s, xnext
    for i in range(1, nmax + 1):
        m += x[i]
        big_m += i * x[i]
    if m <= 0.0 or big_m <= 0.0:
        for i in range(nmax + 1):
            out[i] = 0.0
        return
    km[0] = 0.0
    km[nmax + 1] = 0.0
    if kind_code == K_GREEDY:
        for jj in range(1, nmax + 1):
            km[jj] = jj * x[jj] / big_m
    elif kind_code == K_UNIMIN:
        # q[i] = P(size-biased degree >= i), i = 0..N+1
        acc = 0.0
        q[nmax + 1] = 0.0
        for i in range(nmax, -1, -1):
            acc += i * x[i]
            q[i] = acc / big_m
        # km[j] = (u[j] - u[j+1])/m with u[i] = sum_k x_k q[i]^k
        xnext = 0.0  # reuse as u[j+1]
        for jj in range(nmax, 0, -1):
            pw = 1.0
            s = 0.0
            for kk in range(1, nmax + 1):
                pw *= q[jj]
                s += x[kk] * pw
            km[jj] = (s - xnext) / m
            xnext = s
    else:
        # uni-max: q holds the size-biased c.d.f., F(0) = 0
        acc = 0.0
        for i in range(nmax + 1):
            acc += i * x[i]
            q[i] = acc / big_m
        xnext = 0.0  # u[j-1], with u[0] = sum_k x_k F(0)^k = 0
        for jj in range(1, nmax + 1):
            pw = 1.0
            s = 0.0
            for kk in range(1, nmax + 1):
                pw *= q[jj]
                s += x[kk] * pw
            km[jj] = (s - xnext) / m
            xnext = s
    amp = big_m / m - 1.0
    for jj in range(1, nmax + 1):
        amp += jj * km[jj]
    for jj in range(1, nmax + 1):
        xnext = x[jj + 1] if jj < nmax else 0.0
        grad = jj * x[jj] - (jj + 1) * xnext
        out[jj] = -(x[jj] / m + amp * grad / big_m + km[jj + 1])
    out[0] = amp * x[1] / big_m - km[1]


cdef void _rk4_with_k1(int kind_code, double[::1] x, double h,
                       double[::1] k1, double[::1] k2, double[::1] k3, double[::1] k4,
                       double[::1] stage, double[::1] q, double[::1] u) noexcept nogil:
    """One classical step with k1 precomputed; result written back into x."""
    cdef Py_ssize_t dim = x.shape[0]
    cdef Py_ssize_t i
    for i in range(dim):
        stage[i] = x[i] + 0.5 * h * k1[i]
    _field(kind_code, stage, k2, q, u)
    for i in range(dim):
        stage[i] = x[i] + 0.5 * h * k2[i]
    _field(kind_code, stage, k3, q, u)
    for i in range(dim):
        stage[i] = x[i] + h * k3[i]
    _field(kind_code, stage, k4, q, u)
    for i in range(dim):
        x[i] = x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


def fluid_solve(int kind_code, cnp.ndarray[cnp.float64_t, ndim=1] x0_arr,
                double h, double halt_eps):
    # Cell loop with graded substeps near extinction: a substep never sheds
    # more than half the remaining positive-degree mass, and the last one
    # aims just below the halting threshold (mirrors the pure solver).
    cdef Py_ssize_t ncells = <Py_ssize_t> ceil(1.0 / h - 1e-12)
    cdef Py_ssize_t dim = x0_arr.shape[0]
    states_arr = np.empty((ncells + 1, dim), dtype=np.float64)
    clamped_arr = np.zeros(ncells, dtype=np.float64)
    cdef double[:, ::1] states = states_arr
    cdef double[::1] clamped = clamped_arr

    x_arr = x0_arr.astype(np.float64)
    k1_arr = np.empty(dim)
    k2_arr = np.empty(dim)
    k3_arr = np.empty(dim)
    k4_arr = np.empty(dim)
    stage_arr = np.empty(dim)
    q_arr = np.empty(dim + 1)
    u_arr = np.empty(dim + 1)
    cdef double[::1] x = x_arr
    cdef double[::1] k1 = k1_arr
    cdef double[::1] k2 = k2_arr
    cdef double[::1] k3 = k3_arr
    cdef double[::1] k4 = k4_arr
    cdef double[::1] stage = stage_arr
    cdef double[::1] q = q_arr
    cdef double[::1] u = u_arr

    cdef bint frozen = False, full
    cdef double t_halt = -1.0
    cdef Py_ssize_t c, i, it
    cdef double t0, t1, tcur, remaining, mp, mdot, speed, h_sub, cap, neg_total

    for i in range(dim):
        states[0, i] = x[i]
    for c in range(ncells):
        t0 = c * h
        t1 = (c + 1) * h
        if t1 > 1.0:
            t1 = 1.0
        if not frozen:
            tcur = t0
            neg_total = 0.0
            for it in range(100000):
                mp = 0.0
                for i in range(1, dim):
                    mp += x[i]
                if mp <= halt_eps:
                    frozen = True
                    t_halt = tcur
                    break
                remaining = t1 - tcur
                if remaining <= 0.0:
                    break
                _field(kind_code, x, k1, q, u)
                mdot = 0.0
                speed = 0.0
                for i in range(1, dim):
                    mdot += k1[i]
                for i in range(dim):
                    speed += k1[i] if k1[i] >= 0 else -k1[i]
                h_sub = remaining
                if speed > 0.0:
                    cap = 0.25 * mp / speed
                    if cap < h_sub:
                        h_sub = cap
                if mdot < 0.0:
                    cap = (mp - 0.75 * halt_eps) / -mdot
                    if cap < h_sub:
                        h_sub = cap
                full = h_sub >= remaining
                _rk4_with_k1(kind_code, x, remaining if full else h_sub,
                             k1, k2, k3, k4, stage, q, u)
                for i in range(dim):
                    if x[i] < 0.0:
                        neg_total -= x[i]
                        x[i] = 0.0
                if full:
                    tcur = t1
                    break
                tcur = tcur + h_sub
            clamped[c] = neg_total
        for i in range(dim):
            states[c + 1, i] = x[i]
    return states_arr, t_halt, clamped_arr


# ---------------------------------------------------------------------------
# Poisson scalar solver
# ---------------------------------------------------------------------------

cdef inline double _pslope(double v, double rho) noexcept nogil:
    if v <= SCALAR_GUARD:
        return 0.0
    return -(1.0 + 1.0 / (-expm1(-rho * v)))


def poisson_solve(double rho, double h):
    cdef Py_ssize_t ncells = <Py_ssize_t> ceil(1.0 / h - 1e-12)
    v_arr = np.empty(ncells + 1, dtype=np.float64)
    cdef double[::1] v = v_arr
    cdef double cur = 1.0, t1, dt, tprev, a1, a2, a3, a4
    cdef Py_ssize_t c
    v[0] = 1.0
    tprev = 0.0
    for c in range(ncells):
        t1 = (c + 1) * h
        if t1 > 1.0:
            t1 = 1.0
        dt = t1 - c * h
        if cur > SCALAR_GUARD:
            a1 = _pslope(cur, rho)
            a2 = _pslope(cur + 0.5 * dt * a1, rho)
            a3 = _pslope(cur + 0.5 * dt * a2, rho)
            a4 = _pslope(cur + dt * a3, rho)
            cur = cur + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
            if cur < 0.0:
                cur = 0.0
        v[c + 1] = cur
    return v_arr
