"""Pure numpy versions of the compiled kernels in ``_ckernels.pyx``.

Same signatures and results; tree growth is bit-identical to the compiled
version (the split score is evaluated with the same operation order).
"""
import numpy as np

_TAU = 1e-12


def grow_tree(X, y, samples, max_features, rand):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    rand = np.asarray(rand, dtype=np.uint32)
    d = X.shape[1]
    n_rand = rand.size
    rand_pos = 0
    features, thresholds, lefts, rights, cnt0, cnt1 = [-1], [0.0], [-1], [-1], [0], [0]
    stack = [(0, np.ascontiguousarray(samples, dtype=np.int64))]
    while stack:
        node, samp = stack.pop()
        m = samp.size
        labels = y[samp]
        c1 = int(labels.sum())
        cnt0[node] = m - c1
        cnt1[node] = c1
        if c1 == 0 or c1 == m or m < 2:
            continue
        perm = list(range(d))
        for i in range(d - 1, 0, -1):
            k = int(rand[rand_pos % n_rand]) % (i + 1)
            rand_pos += 1
            perm[i], perm[k] = perm[k], perm[i]
        best_f, best_score, best_thr = -1, -np.inf, 0.0
        visited = 0
        nl = np.arange(1, m, dtype=np.int64)
        nr = m - nl
        for f in perm:
            if visited >= max_features:
                break
            vals = X[samp, f]
            order = np.argsort(vals, kind="stable")
            v = vals[order]
            if v[0] == v[-1]:
                continue
            visited += 1
            l1 = np.cumsum(labels[order])[:-1]
            l0 = nl - l1
            r1 = c1 - l1
            r0 = nr - r1
            score = (l0 * l0 + l1 * l1) / nl + (r0 * r0 + r1 * r1) / nr
            score[~(v[:-1] < v[1:])] = -np.inf
            i = int(np.argmax(score))
            if score[i] > best_score:
                best_score = score[i]
                best_f = f
                thr = (v[i] + v[i + 1]) / 2.0
                best_thr = v[i] if thr == v[i + 1] else thr
        if best_f < 0:
            continue
        go_left = X[samp, best_f] <= best_thr
        left_id = len(features)
        right_id = left_id + 1
        for lst, val in ((features, -1), (thresholds, 0.0), (lefts, -1), (rights, -1), (cnt0, 0), (cnt1, 0)):
            lst.extend([val, val])
        features[node] = best_f
        thresholds[node] = float(best_thr)
        lefts[node] = left_id
        rights[node] = right_id
        stack.append((right_id, samp[~go_left]))
        stack.append((left_id, samp[go_left]))
    return (np.array(features, dtype=np.int64), np.array(thresholds, dtype=np.float64),
            np.array(lefts, dtype=np.int64), np.array(rights, dtype=np.int64),
            np.array(cnt0, dtype=np.int64), np.array(cnt1, dtype=np.int64))


def smo_solve(Q, y, C, eps, max_iter):
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    n = y.size
    a = np.zeros(n)
    G = np.full(n, -1.0)
    diag = np.diag(Q).copy()
    pos = y > 0
    it = 0
    converged = False
    while it < max_iter:
        # i: maximal violator in the "up" set
        up = np.where(pos, a < C, a > 0)
        score_up = np.where(pos, -G, G)
        cand = np.flatnonzero(up)
        if cand.size == 0:
            converged = True
            break
        vals = score_up[cand]
        Gmax = vals.max()
        i = int(cand[np.flatnonzero(vals == Gmax)[-1]])
        # j: second-order choice in the "low" set
        low = np.where(pos, a > 0, a < C)
        score_low = np.where(pos, G, -G)
        lidx = np.flatnonzero(low)
        Gmax2 = score_low[lidx].max() if lidx.size else -np.inf
        grad_diff = np.where(pos, Gmax + G, Gmax - G)[lidx]
        sign = np.where(pos[lidx], -1.0, 1.0)
        quad = diag[i] + diag[lidx] + sign * 2.0 * y[i] * Q[i, lidx]
        quad = np.where(quad <= 0, _TAU, quad)
        ok = grad_diff > 0
        if Gmax + Gmax2 < eps or not ok.any():
            converged = True
            break
        obj = -(grad_diff[ok] ** 2) / quad[ok]
        jc = lidx[ok]
        j = int(jc[np.flatnonzero(obj == obj.min())[-1]])
        it += 1
        ai, aj = a[i], a[j]
        Ci, Cj = C[i], C[j]
        if y[i] != y[j]:
            q = Q[i, i] + Q[j, j] + 2.0 * Q[i, j]
            q = _TAU if q <= 0 else q
            delta = (-G[i] - G[j]) / q
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > Ci - Cj:
                if ai > Ci:
                    ai, aj = Ci, Ci - diff
            elif aj > Cj:
                aj, ai = Cj, Cj + diff
        else:
            q = Q[i, i] + Q[j, j] - 2.0 * Q[i, j]
            q = _TAU if q <= 0 else q
            delta = (G[i] - G[j]) / q
            s = ai + aj
            ai -= delta
            aj += delta
            if s > Ci:
                if ai > Ci:
                    ai, aj = Ci, s - Ci
            elif aj < 0:
                aj, ai = 0.0, s
            if s > Cj:
                if aj > Cj:
                    aj, ai = Cj, s - Cj
            elif ai < 0:
                ai, aj = 0.0, s
        dai, daj = ai - a[i], aj - a[j]
        a[i], a[j] = ai, aj
        G += Q[:, i] * dai + Q[:, j] * daj
    return a, G, it, converged
