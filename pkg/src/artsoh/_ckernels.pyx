# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: CART tree growth and the SMO dual solver.

Mirrors :mod:`artsoh._pykernels` operation for operation; tree growth must
give bit-identical output for the same inputs.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY
from libc.stdlib cimport malloc, free, qsort

cnp.import_array()

ctypedef struct Pair:
    double v
    long long lab


cdef int _cmp_pair(const void* a, const void* b) noexcept nogil:
    cdef double va = (<const Pair*>a).v
    cdef double vb = (<const Pair*>b).v
    if va < vb:
        return -1
    if va > vb:
        return 1
    return 0


def grow_tree(const double[:, ::1] X, const long long[::1] y, samples,
              int max_features, const unsigned int[::1] rand):
    """Grow one unpruned Gini tree on ``samples`` (row indices into X).

    Returns (feature, threshold, left, right, count0, count1) arrays in
    node-creation order; leaves have feature -1.
    """
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t n_rand = rand.shape[0]
    cdef Py_ssize_t rand_pos = 0
    cdef Py_ssize_t m, i, t, k, f, visited, best_f, nl
    cdef long long c1, l1, l0, r1, r0
    cdef double score, best_score, thr, best_thr
    cdef long long tmp
    cdef long long[::1] samp
    cdef long long[::1] perm = np.empty(d, dtype=np.int64)
    cdef Pair* buf = NULL

    features, thresholds, lefts, rights, cnt0, cnt1 = [], [], [], [], [], []

    Xa = np.asarray(X)
    root = np.ascontiguousarray(samples, dtype=np.int64)
    features.append(-1); thresholds.append(0.0); lefts.append(-1); rights.append(-1)
    cnt0.append(0); cnt1.append(0)
    stack = [(0, root)]
    buf = <Pair*>malloc(max(root.shape[0], 1) * sizeof(Pair))
    if buf == NULL:
        raise MemoryError()
    try:
        while stack:
            node, arr = stack.pop()
            samp = arr
            m = samp.shape[0]
            c1 = 0
            for i in range(m):
                c1 += y[samp[i]]
            cnt0[node] = m - c1
            cnt1[node] = c1
            if c1 == 0 or c1 == m or m < 2:
                continue
            for i in range(d):
                perm[i] = i
            for i in range(d - 1, 0, -1):
                k = rand[rand_pos % n_rand] % (i + 1)
                rand_pos += 1
                tmp = perm[i]; perm[i] = perm[k]; perm[k] = tmp
            best_f = -1
            best_score = -INFINITY
            best_thr = 0.0
            visited = 0
            for t in range(d):
                if visited >= max_features:
                    break
                f = perm[t]
                for i in range(m):
                    buf[i].v = X[samp[i], f]
                    buf[i].lab = y[samp[i]]
                qsort(buf, m, sizeof(Pair), _cmp_pair)
                if buf[0].v == buf[m - 1].v:
                    continue
                visited += 1
                l1 = 0
                for i in range(m - 1):
                    l1 += buf[i].lab
                    if buf[i].v < buf[i + 1].v:
                        nl = i + 1
                        l0 = nl - l1
                        r1 = c1 - l1
                        r0 = (m - nl) - r1
                        score = (<double>(l0 * l0 + l1 * l1)) / (<double>nl) + \
                                (<double>(r0 * r0 + r1 * r1)) / (<double>(m - nl))
                        if score > best_score:
                            best_score = score
                            best_f = f
                            thr = (buf[i].v + buf[i + 1].v) / 2.0
                            if thr == buf[i + 1].v:
                                thr = buf[i].v
                            best_thr = thr
            if best_f < 0:
                continue
            go_left = Xa[arr, best_f] <= best_thr
            left_id = len(features)
            right_id = left_id + 1
            for _ in range(2):
                features.append(-1); thresholds.append(0.0); lefts.append(-1); rights.append(-1)
                cnt0.append(0); cnt1.append(0)
            features[node] = best_f
            thresholds[node] = best_thr
            lefts[node] = left_id
            rights[node] = right_id
            stack.append((right_id, arr[~go_left]))
            stack.append((left_id, arr[go_left]))
    finally:
        free(buf)
    return (np.array(features, dtype=np.int64), np.array(thresholds, dtype=np.float64),
            np.array(lefts, dtype=np.int64), np.array(rights, dtype=np.int64),
            np.array(cnt0, dtype=np.int64), np.array(cnt1, dtype=np.int64))


def smo_solve(const double[:, ::1] Q, const double[::1] y, const double[::1] C,
              double eps, long long max_iter):
    """Minimise 0.5 a'Qa - sum(a) s.t. y'a = 0, 0 <= a <= C.

    Second-order working-set selection. Returns (alpha, G, iterations, converged).
    """
    cdef Py_ssize_t n = Q.shape[0]
    cdef double TAU = 1e-12
    cdef double[::1] a = np.zeros(n)
    cdef double[::1] G = np.full(n, -1.0)
    cdef Py_ssize_t t, i, j
    cdef long long it = 0
    cdef double Gmax, Gmax2, obj_min, grad_diff, quad, obj, delta, diff, s
    cdef double old_ai, old_aj, dai, daj
    cdef bint converged = False
    while it < max_iter:
        Gmax = -INFINITY
        Gmax2 = -INFINITY
        i = -1
        for t in range(n):
            if y[t] > 0:
                if a[t] < C[t] and -G[t] >= Gmax:
                    Gmax = -G[t]; i = t
            else:
                if a[t] > 0 and G[t] >= Gmax:
                    Gmax = G[t]; i = t
        j = -1
        obj_min = INFINITY
        for t in range(n):
            if y[t] > 0:
                if a[t] > 0:
                    grad_diff = Gmax + G[t]
                    if G[t] >= Gmax2:
                        Gmax2 = G[t]
                    if grad_diff > 0 and i >= 0:
                        quad = Q[i, i] + Q[t, t] - 2.0 * y[i] * Q[i, t]
                        if quad <= 0:
                            quad = TAU
                        obj = -(grad_diff * grad_diff) / quad
                        if obj <= obj_min:
                            j = t; obj_min = obj
            else:
                if a[t] < C[t]:
                    grad_diff = Gmax - G[t]
                    if -G[t] >= Gmax2:
                        Gmax2 = -G[t]
                    if grad_diff > 0 and i >= 0:
                        quad = Q[i, i] + Q[t, t] + 2.0 * y[i] * Q[i, t]
                        if quad <= 0:
                            quad = TAU
                        obj = -(grad_diff * grad_diff) / quad
                        if obj <= obj_min:
                            j = t; obj_min = obj
        if Gmax + Gmax2 < eps or j < 0 or i < 0:
            converged = True
            break
        it += 1
        old_ai = a[i]
        old_aj = a[j]
        if y[i] != y[j]:
            quad = Q[i, i] + Q[j, j] + 2.0 * Q[i, j]
            if quad <= 0:
                quad = TAU
            delta = (-G[i] - G[j]) / quad
            diff = a[i] - a[j]
            a[i] += delta
            a[j] += delta
            if diff > 0:
                if a[j] < 0:
                    a[j] = 0; a[i] = diff
            else:
                if a[i] < 0:
                    a[i] = 0; a[j] = -diff
            if diff > C[i] - C[j]:
                if a[i] > C[i]:
                    a[i] = C[i]; a[j] = C[i] - diff
            else:
                if a[j] > C[j]:
                    a[j] = C[j]; a[i] = C[j] + diff
        else:
            quad = Q[i, i] + Q[j, j] - 2.0 * Q[i, j]
            if quad <= 0:
                quad = TAU
            delta = (G[i] - G[j]) / quad
            s = a[i] + a[j]
            a[i] -= delta
            a[j] += delta
            if s > C[i]:
                if a[i] > C[i]:
                    a[i] = C[i]; a[j] = s - C[i]
            else:
                if a[j] < 0:
                    a[j] = 0; a[i] = s
            if s > C[j]:
                if a[j] > C[j]:
                    a[j] = C[j]; a[i] = s - C[j]
            else:
                if a[i] < 0:
                    a[i] = 0; a[j] = s
        dai = a[i] - old_ai
        daj = a[j] - old_aj
        for t in range(n):
            G[t] += Q[t, i] * dai + Q[t, j] * daj
    return np.asarray(a), np.asarray(G), int(it), bool(converged)
