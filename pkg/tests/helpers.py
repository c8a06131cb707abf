"""Brute-force reference implementations used only by the tests.

Everything here favors directness over speed: explicit cyclic-segment
walks, scalar loops, raw exponentials. Feasible for the small periods the
tests use, and independent of the package's vectorized code paths.
"""

import itertools
import math

import numpy as np


def seg_open(x, i, j):
    # sum over the cyclic segment (i, j]: walk from i+1 up to j
    n = len(x)
    d = (j - i) % n
    return sum(x[(i + 1 + t) % n] for t in range(d))


def seg_closed(x, i, j):
    # [i, j]: include the left endpoint; [i, i] is the single term x_i
    n = len(x)
    d = (j - i) % n
    return sum(x[(i + t) % n] for t in range(d + 1))


def d2_brute(x1, x2):
    n = len(x1)
    y = [b - a for a, b in zip(x1, x2)]
    q = [math.log(sum(math.exp(seg_open(y, i, j)) for j in range(n)))
         for i in range(n)]
    return [x2[i] + q[i] - q[(i - 1) % n] for i in range(n)]


def t2_brute(x1, x2):
    n = len(x1)
    y = [b - a for a, b in zip(x1, x2)]
    s = [math.log(sum(math.exp(seg_closed(y, i, j)) for j in range(n)))
         for i in range(n)]
    return [x1[i] + s[i] - s[(i + 1) % n] for i in range(n)]


def j2_brute(u1, u2):
    n = len(u1)
    w = [b - a for a, b in zip(u1, u2)]
    return [u2[i]
            + math.log((math.exp(w[(i + 1) % n]) - 1) / (math.exp(w[i]) - 1))
            for i in range(n)]


def l2_brute(u1, u2):
    n = len(u1)
    v = [a - b for a, b in zip(u1, u2)]
    return [u1[i]
            + math.log((1 - math.exp(v[(i - 1) % n])) / (1 - math.exp(v[i])))
            for i in range(n)]


def d_multi_recursive(vectors):
    if len(vectors) == 1:
        return list(vectors[0])
    return d2_brute(vectors[0], d_multi_recursive(vectors[1:]))


def q_form_brute(vectors):
    # multi-sum over (j_1..j_{m-1}) in Z_N^{m-1} with j_0 = i of
    # prod_r exp(seg_open(X_m - X_r, j_{r-1}, j_r)); output via X_m + diff
    m = len(vectors)
    n = len(vectors[0])
    xm = vectors[-1]
    diffs = [[xm[t] - v[t] for t in range(n)] for v in vectors[:-1]]
    q = []
    for i in range(n):
        total = 0.0
        for js in itertools.product(range(n), repeat=m - 1):
            prev = i
            logterm = 0.0
            for r in range(m - 1):
                logterm += seg_open(diffs[r], prev, js[r])
                prev = js[r]
            total += math.exp(logterm)
        q.append(math.log(total))
    return [xm[i] + q[i] - q[(i - 1) % n] for i in range(n)]


def fullline_series_brute(x1, x2, terms=200000):
    # J_i = sum_{j>=0} exp(X1_{i-j}) prod_{l=0}^{j-1} exp(X1_{i-l} - X2_{i-l})
    n = len(x1)
    js = []
    for i in range(n):
        tot = 0.0
        logpref = 0.0
        for j in range(terms):
            tot += math.exp(x1[(i - j) % n] + logpref)
            logpref += x1[(i - j) % n] - x2[(i - j) % n]
        js.append(tot)
    return [x2[i] + math.log(js[i]) - math.log(js[(i - 1) % n])
            for i in range(n)]


def polymer_window_brute(u, w):
    # window sum j = i-N..i-1 of prod_{l=j+1}^{i} exp(W_l - U_l) on the
    # periodic extension, times the geometric tail, then spatial differences
    n = len(u)
    su, sw = sum(u), sum(w)
    geom = 1.0 / (1.0 - math.exp(sw - su))
    g = []
    for i in range(n):
        tot = 0.0
        for j in range(i - n, i):
            p = 0.0
            for ell in range(j + 1, i + 1):
                p += w[ell % n] - u[ell % n]
            tot += math.exp(p)
        g.append(tot * geom)
    return [u[i] + math.log(g[i]) - math.log(g[(i - 1) % n]) for i in range(n)]


def phi2_brute(f1, f2):
    # direct ratio form on the grid: out(x) = f1(x) + log(1 + (e^{delta}-1) r(x))
    # with r the normalized running integral of e^{f2-f1}
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    m = f1.shape[-1] - 1
    w = np.exp(f2 - f1)
    c = np.concatenate([[0.0], np.cumsum((w[1:] + w[:-1]) / (2.0 * m))])
    r = c / c[-1]
    delta = f2[-1] - f1[-1]
    out = f1 + np.log1p((np.exp(delta) - 1.0) * r)
    out[0] = 0.0
    out[-1] = f2[-1]
    return out


def marginal_cdf_n2(theta, beta, lo=None, hi=None, m=40001):
    # density on the free coordinate x: C exp(-beta^{-2}(e^{-x} + e^{-(theta-x)}))
    c = theta / 2.0
    w = 14.0 * max(beta, 1.0)
    lo = c - w if lo is None else lo
    hi = c + w if hi is None else hi
    x = np.linspace(lo, hi, m)
    logp = -(np.exp(-x) + np.exp(-(theta - x))) / beta**2
    p = np.exp(logp - logp.max())
    cdf = np.concatenate([[0.0], np.cumsum((p[1:] + p[:-1]) * 0.5)])
    cdf /= cdf[-1]
    return x, cdf


def marginal_cdf_n3(theta, beta, m=2001):
    # marginal of one coordinate: integrate the second free coordinate
    c = theta / 3.0
    w = 14.0 * max(beta, 1.0)
    x1 = np.linspace(c - w, c + w, m)
    x2 = np.linspace(c - w, c + w, m)
    xx1, xx2 = np.meshgrid(x1, x2, indexing="ij")
    logp = -(np.exp(-xx1) + np.exp(-xx2) + np.exp(-(theta - xx1 - xx2))) / beta**2
    p = np.exp(logp - logp.max())
    marg = np.trapezoid(p, x2, axis=1)
    cdf = np.concatenate([[0.0], np.cumsum((marg[1:] + marg[:-1]) * 0.5)])
    cdf /= cdf[-1]
    return x1, cdf


def ks_against_cdf(samples, grid, cdf):
    xs = np.sort(np.asarray(samples, dtype=float))
    ref = np.interp(xs, grid, cdf)
    n = xs.size
    emp_hi = np.arange(1, n + 1) / n
    emp_lo = np.arange(0, n) / n
    return float(max(np.max(np.abs(emp_hi - ref)), np.max(np.abs(emp_lo - ref))))
