"""Independent reference implementations used as test oracles.

Everything here recomputes values from raw data by direct summation or
exhaustive enumeration, deliberately avoiding the library's prefix-sum,
Gram, and dynamic-programming paths.
"""

from itertools import combinations
import math

import numpy as np


def naive_l2(data, a, b):
    seg = data[a:b]
    mean = seg.mean(axis=0)
    return float(sum(float((row - mean) @ (row - mean)) for row in seg))


def naive_sigma(data, a, b):
    seg = data[a:b]
    n = b - a
    mean = seg.mean(axis=0)
    cov = np.cov(seg, rowvar=False, bias=True).reshape(seg.shape[1], seg.shape[1])
    inv = np.linalg.inv(cov)
    quad = sum(float((row - mean) @ inv @ (row - mean)) for row in seg)
    return n * float(np.linalg.slogdet(cov)[1]) + quad


def naive_poisson(data, a, b):
    n = b - a
    total = 0.0
    for j in range(data.shape[1]):
        m = data[a:b, j].mean()
        if m > 0:
            total += -n * m * math.log(m)
    return total


def naive_linear(design, y, a, b):
    W, resp = design[a:b], y[a:b]
    coef = np.linalg.pinv(W) @ resp
    resid = resp - W @ coef
    return float(resid @ resid)


def naive_lad_intercept(y, a, b):
    # Intercept-only least absolute deviations: some sample value is optimal.
    seg = y[a:b]
    return min(float(np.abs(seg - c).sum()) for c in seg)


def naive_ar(y, order, a, b):
    rows, resp = [], []
    for t in range(max(a, order), b):
        rows.append(list(y[t - order:t][::-1]) + [1.0])
        resp.append(y[t])
    W, resp = np.array(rows), np.array(resp)
    coef = np.linalg.pinv(W) @ resp
    resid = resp - W @ coef
    return float(resid @ resid)


def naive_mahalanobis(data, M, a, b):
    seg = data[a:b]
    mean = seg.mean(axis=0)
    return float(sum(float((row - mean) @ M @ (row - mean)) for row in seg))


def naive_rank(data, a, b):
    T, d = data.shape
    ranks = np.zeros((T, d))
    for t in range(T):
        for j in range(d):
            ranks[t, j] = sum(data[s, j] <= data[t, j] for s in range(T)) - (T + 1) / 2
    shifted = ranks + 0.5
    cov = sum(np.outer(shifted[t], shifted[t]) for t in range(T)) / T
    inv = np.linalg.pinv(cov, hermitian=True)
    rbar = ranks[a:b].mean(axis=0)
    return -(b - a) * float(rbar @ inv @ rbar)


def naive_ecdf(y, a, b):
    T = len(y)
    n = b - a
    seg = y[a:b]
    total = 0.0
    for j, u in enumerate(sorted(y), start=1):
        F = (sum(v < u for v in seg) + 0.5 * sum(v == u for v in seg)) / n
        term = 0.0
        if 0 < F < 1:
            term = F * math.log(F) + (1 - F) * math.log(1 - F)
        total += term / ((j - 0.5) * (T - j + 0.5))
    return -n * total


def kernel_fn(spec):
    if spec.kind == "linear":
        return lambda x, y: float(x @ y)
    if spec.kind == "polynomial":
        return lambda x, y: float(x @ y + spec.const) ** spec.deg
    if spec.kind == "rbf":
        return lambda x, y: math.exp(-spec.gamma * float((x - y) @ (x - y)))

    def chi2(x, y):
        total = 0.0
        for xi, yi in zip(x, y):
            if xi + yi > 0:
                total += (xi - yi) ** 2 / (xi + yi)
        return math.exp(-spec.gamma * total)

    return chi2


def naive_kernel(data, spec, a, b):
    k = kernel_fn(spec)
    n = b - a
    diag = sum(k(data[t], data[t]) for t in range(a, b))
    cross = sum(k(data[s], data[t]) for s in range(a, b) for t in range(a, b))
    return diag - cross / n


def exhaustive_best(cost, n_bkps, min_size, jump=1):
    """Minimum sum of costs over every admissible breakpoint combination."""
    T = cost.signal.T
    if n_bkps == 0:
        return cost.eval(0, T), [T]
    cands = [t for t in range(jump, T, jump) if min_size <= t <= T - min_size]
    best_v, best_pts = np.inf, None
    for combo in combinations(cands, n_bkps):
        bounds = [0, *combo, T]
        if any(hi - lo < min_size for lo, hi in zip(bounds, bounds[1:])):
            continue
        v = float(np.sum(cost.eval_batch(np.array(bounds[:-1]), np.array(bounds[1:]))))
        if v < best_v:
            best_v, best_pts = v, list(combo)
    return best_v, (best_pts or []) + [T]


def pairwise_rand_index(truth, pred):
    """O(T^2) enumeration over unordered sample pairs."""

    def labels(seg):
        out = np.empty(seg.T, dtype=int)
        for k, (a, b) in enumerate(seg.segments()):
            out[a:b] = k
        return out

    lt, lp = labels(truth), labels(pred)
    agree = 0
    total = 0
    for s in range(truth.T):
        for t in range(s + 1, truth.T):
            total += 1
            agree += (lt[s] == lt[t]) == (lp[s] == lp[t])
    return agree / total


def random_segmentation(rng, T, n_bkps, min_spacing=2):
    """A valid random segmentation with the requested change count."""
    from sigseg import make_segmentation

    slack = T - (n_bkps + 1) * min_spacing
    assert slack >= 0
    picks = np.sort(rng.choice(slack + n_bkps, size=n_bkps, replace=False))
    bkps = [int(v) - i + (i + 1) * min_spacing for i, v in enumerate(picks)]
    return make_segmentation(bkps, T)
