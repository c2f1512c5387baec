"""Numba kernels for CART regression trees.

Randomness is keyed, not streamed: a node's candidate-feature order comes
from a hash of the tree seed and the node's path from the root. Growing a
tree with a depth or min-split limit therefore produces exactly the
truncation of the unlimited tree, which the grid search exploits.
"""
import numpy as np
from numba import njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
S30 = np.uint64(30)
S27 = np.uint64(27)
S31 = np.uint64(31)
ONE = np.uint64(1)
TWO = np.uint64(2)

LEAF = -1
NO_DEPTH_LIMIT = np.iinfo(np.int64).max


@njit(cache=True)
def splitmix64(x):
    z = x + GOLDEN
    z = (z ^ (z >> S30)) * MIX1
    z = (z ^ (z >> S27)) * MIX2
    return z ^ (z >> S31)


@njit(cache=True)
def tree_seed(master, tree_index):
    return splitmix64(splitmix64(np.uint64(master)) ^ splitmix64(np.uint64(tree_index) + GOLDEN))


@njit(cache=True)
def bootstrap_counts(seed, n):
    out = np.zeros(n, dtype=np.int64)
    state = splitmix64(seed ^ MIX2)
    un = np.uint64(n)
    for i in range(n):
        state = state + GOLDEN
        out[np.int64(splitmix64(state) % un)] += 1
    return out


@njit(cache=True)
def _feature_order(key, d, order):
    for i in range(d):
        order[i] = i
    state = key
    for i in range(d - 1):
        state = state + GOLDEN
        j = i + np.int64(splitmix64(state) % np.uint64(d - i))
        tmp = order[i]
        order[i] = order[j]
        order[j] = tmp


@njit(cache=True)
def presort(X):
    d = X.shape[1]
    out = np.empty((d, X.shape[0]), dtype=np.int64)
    for f in range(d):
        out[f] = np.argsort(X[:, f], kind="mergesort")
    return out


@njit(cache=True)
def grow_tree(X, y, sorted_rows, multiplicity, max_features, min_leaf, max_depth, min_split, seed):
    """Grow one tree on the rows of ``X`` repeated ``multiplicity`` times.

    ``sorted_rows`` is :func:`presort` of ``X``; a bootstrap draw is passed as
    per-row counts.

    Returns node arrays ``(feature, threshold, left, right, value, count, depth)``;
    ``feature == -1`` marks a leaf.
    """
    n = 0
    for r in range(multiplicity.shape[0]):
        n += multiplicity[r]
    d = X.shape[1]
    cap = 2 * n + 1
    feature = np.full(cap, LEAF, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, LEAF, dtype=np.int64)
    right = np.full(cap, LEAF, dtype=np.int64)
    value = np.zeros(cap)
    count = np.zeros(cap, dtype=np.int64)
    depth = np.zeros(cap, dtype=np.int64)

    # per-feature sample lists sorted by that feature; each node owns [start, end)
    srt = np.empty((d, n), dtype=np.int64)
    for f in range(d):
        i = 0
        for r in sorted_rows[f]:
            for _ in range(multiplicity[r]):
                srt[f, i] = r
                i += 1
    xt = np.ascontiguousarray(X.T)  # column access during the scans
    goes_left = np.zeros(X.shape[0], dtype=np.bool_)
    order = np.empty(d, dtype=np.int64)
    tmp = np.empty(n, dtype=np.int64)
    tmp_r = np.empty(n, dtype=np.int64)
    inv = np.empty(n + 1)
    inv[0] = 0.0
    for k in range(1, n + 1):
        inv[k] = 1.0 / k

    st_start = np.empty(cap, dtype=np.int64)
    st_end = np.empty(cap, dtype=np.int64)
    st_node = np.empty(cap, dtype=np.int64)
    st_key = np.empty(cap, dtype=np.uint64)
    st_start[0] = 0
    st_end[0] = n
    st_node[0] = 0
    st_key[0] = splitmix64(np.uint64(seed))
    top = 1
    n_nodes = 1

    while top > 0:
        top -= 1
        start = st_start[top]
        end = st_end[top]
        node = st_node[top]
        key = st_key[top]
        m = end - start

        # sums taken in feature-0 order, which depends only on the node's sample set
        total = 0.0
        for i in range(start, end):
            total += y[srt[0, i]]
        mean = total / m
        sse = 0.0
        for i in range(start, end):
            r = y[srt[0, i]] - mean
            sse += r * r
        value[node] = mean
        count[node] = m

        if depth[node] >= max_depth or m < min_split or m < 2 * min_leaf or sse <= 1e-14 * m:
            continue

        best_proxy = -np.inf
        best_f = -1
        best_thr = 0.0
        _feature_order(key, d, order)
        visited = 0
        for oi in range(d):
            if visited >= max_features:
                break
            f = order[oi]
            xf = xt[f]
            rows = srt[f]
            if xf[rows[start]] == xf[rows[end - 1]]:
                continue
            visited += 1
            sl = 0.0
            for k in range(min_leaf - 1):
                sl += y[rows[start + k]]
            xb = xf[rows[start + min_leaf - 1]]
            for k in range(min_leaf - 1, m - min_leaf):
                sl += y[rows[start + k]]
                xa = xb
                xb = xf[rows[start + k + 1]]
                if xa == xb:
                    continue
                nl = k + 1
                nr = m - nl
                sr = total - sl
                proxy = sl * sl * inv[nl] + sr * sr * inv[nr]
                thr = 0.5 * (xa + xb)
                if thr >= xb or thr < xa:
                    thr = xa
                better = proxy > best_proxy
                if not better and proxy == best_proxy:
                    better = f < best_f or (f == best_f and thr < best_thr)
                if better:
                    best_proxy = proxy
                    best_f = f
                    best_thr = thr
        if best_f < 0:
            continue

        nl = 0
        for i in range(start, end):
            r = srt[best_f, i]
            gl = xt[best_f, r] <= best_thr
            goes_left[r] = gl
            if gl:
                nl += 1
        # stable partition keeps every per-feature list sorted within the children;
        # leaf values are read from the feature-0 list, so only that one is needed
        # when neither child can split again
        floor = max(min_split, 2 * min_leaf)
        child_terminal = depth[node] + 1 >= max_depth or (nl < floor and m - nl < floor)
        for f in range(1 if child_terminal else d):
            # branchless: write to both buffers, advance only the matching cursor
            li = 0
            ri = 0
            for i in range(start, end):
                r = srt[f, i]
                g = np.int64(goes_left[r])
                tmp[li] = r
                tmp_r[ri] = r
                li += g
                ri += 1 - g
            for i in range(nl):
                srt[f, start + i] = tmp[i]
            for i in range(m - nl):
                srt[f, start + nl + i] = tmp_r[i]

        feature[node] = best_f
        threshold[node] = best_thr
        lnode = n_nodes
        rnode = n_nodes + 1
        n_nodes += 2
        left[node] = lnode
        right[node] = rnode
        depth[lnode] = depth[node] + 1
        depth[rnode] = depth[node] + 1
        # push right first so the left subtree is built first
        st_start[top] = start + nl
        st_end[top] = end
        st_node[top] = rnode
        st_key[top] = splitmix64(key * TWO + TWO)
        top += 1
        st_start[top] = start
        st_end[top] = start + nl
        st_node[top] = lnode
        st_key[top] = splitmix64(key * TWO + ONE)
        top += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), value[:n_nodes].copy(), count[:n_nodes].copy(), depth[:n_nodes].copy())


@njit(cache=True)
def grow_forest(X, y, n_trees, max_features, min_leaf, max_depth, min_split, bootstrap, seed):
    n = X.shape[0]
    ones = np.ones(n, dtype=np.int64)
    sorted_rows = presort(X)
    feats = []
    thrs = []
    lefts = []
    rights = []
    vals = []
    cnts = []
    deps = []
    # without bootstrap and with every feature tried, the seed only reorders
    # candidates and the order-free tie-break makes every tree the same
    same = not bootstrap and max_features >= X.shape[1]
    for t in range(n_trees):
        if same and t > 0:
            f, th, l, r, v, c, dp = feats[0], thrs[0], lefts[0], rights[0], vals[0], cnts[0], deps[0]
        else:
            ts = tree_seed(seed, t)
            mult = bootstrap_counts(ts, n) if bootstrap else ones
            f, th, l, r, v, c, dp = grow_tree(X, y, sorted_rows, mult, max_features, min_leaf, max_depth,
                                              min_split, ts)
        feats.append(f)
        thrs.append(th)
        lefts.append(l)
        rights.append(r)
        vals.append(v)
        cnts.append(c)
        deps.append(dp)
    offsets = np.zeros(n_trees + 1, dtype=np.int64)
    for t in range(n_trees):
        offsets[t + 1] = offsets[t] + feats[t].shape[0]
    tot = offsets[n_trees]
    feature = np.empty(tot, dtype=np.int64)
    threshold = np.empty(tot)
    left = np.empty(tot, dtype=np.int64)
    right = np.empty(tot, dtype=np.int64)
    value = np.empty(tot)
    count = np.empty(tot, dtype=np.int64)
    depth = np.empty(tot, dtype=np.int64)
    for t in range(n_trees):
        o = offsets[t]
        k = feats[t].shape[0]
        feature[o:o + k] = feats[t]
        threshold[o:o + k] = thrs[t]
        left[o:o + k] = lefts[t]
        right[o:o + k] = rights[t]
        value[o:o + k] = vals[t]
        count[o:o + k] = cnts[t]
        depth[o:o + k] = deps[t]
    return offsets, feature, threshold, left, right, value, count, depth


@njit(cache=True)
def predict_trees(offsets, feature, threshold, left, right, value, X):
    """Per-tree predictions, shape ``(n_trees, n_points)``."""
    n_trees = offsets.shape[0] - 1
    out = np.empty((n_trees, X.shape[0]))
    for t in range(n_trees):
        o = offsets[t]
        for i in range(X.shape[0]):
            node = 0
            while feature[o + node] != LEAF:
                if X[i, feature[o + node]] <= threshold[o + node]:
                    node = left[o + node]
                else:
                    node = right[o + node]
            out[t, i] = value[o + node]
    return out


@njit(cache=True)
def predict_truncated(offsets, feature, threshold, left, right, value, count, depth, X,
                      max_depths, min_splits, checkpoints):
    """Forest means for every (max_depth, min_split) truncation at each tree-count checkpoint.

    Returns shape ``(len(checkpoints), len(max_depths), len(min_splits), n_points)``.
    """
    n_trees = offsets.shape[0] - 1
    nd = max_depths.shape[0]
    ns = min_splits.shape[0]
    nc = checkpoints.shape[0]
    npts = X.shape[0]
    acc = np.zeros((nd, ns, npts))
    out = np.empty((nc, nd, ns, npts))
    path = np.empty(depth.max() + 2 if depth.shape[0] > 0 else 2, dtype=np.int64)
    ci = 0
    for t in range(n_trees):
        o = offsets[t]
        for i in range(npts):
            node = 0
            plen = 0
            while True:
                path[plen] = node
                plen += 1
                if feature[o + node] == LEAF:
                    break
                if X[i, feature[o + node]] <= threshold[o + node]:
                    node = left[o + node]
                else:
                    node = right[o + node]
            for a in range(nd):
                for b in range(ns):
                    md = max_depths[a]
                    ms = min_splits[b]
                    stop = path[plen - 1]
                    for q in range(plen):
                        nq = path[q]
                        if depth[o + nq] >= md or count[o + nq] < ms:
                            stop = nq
                            break
                    acc[a, b, i] += value[o + stop]
        while ci < nc and checkpoints[ci] == t + 1:
            out[ci] = acc / (t + 1)
            ci += 1
    return out
