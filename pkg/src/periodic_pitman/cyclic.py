"""Transform algebra on period-N cyclic vectors.

A cyclic vector is a 1-d float64 array whose index wraps mod N; all maps
here also accept stacked inputs with leading batch axes, acting on the last
axis. Every map conserves the entry sum (the "slope") of each coordinate it
returns. Partition sums of exponentials are always max-shifted; raw partial
sums are never exponentiated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DomainError",
    "SlopedFamily",
    "logsumexp",
    "slope",
    "seg_sum",
    "cyclic_shift",
    "reflect",
    "d2",
    "t2",
    "j2",
    "l2",
    "pitman_w",
    "pitman_w_inv",
    "d_multi",
    "d_multi_qform",
    "dk_stack",
    "jk_stack",
    "multiline_step",
    "coupled_step",
    "fullline_d_periodic",
]

SLOPE_RTOL = 1e-10


class DomainError(ValueError):
    """Input lies outside the strict ordering domain of an inverse map."""


def logsumexp(a, axis=-1):
    """Numerically stable log of a sum of exponentials along an axis."""
    a = np.asarray(a, dtype=float)
    m = np.max(a, axis=axis, keepdims=True)
    return np.log(np.sum(np.exp(a - m), axis=axis)) + np.squeeze(m, axis=axis)


def slope(x):
    """Entry sum of a cyclic vector (batched over leading axes)."""
    return np.sum(np.asarray(x, dtype=float), axis=-1)


def _check_pair(x1, x2):
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x1.shape[-1] != x2.shape[-1]:
        raise ValueError(f"period mismatch: {x1.shape[-1]} vs {x2.shape[-1]}")
    if not (np.isfinite(x1).all() and np.isfinite(x2).all()):
        raise ValueError("cyclic vectors must have finite entries")
    return x1, x2


def seg_sum(x, i, j, include_left=False):
    """Cyclic segment sum of x over (i, j], or [i, j] with the left endpoint.

    Sums run in cyclic order starting from i; (i, i] is empty and [i, i]
    is the single term x_i.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    i, j = int(i) % n, int(j) % n
    d = (j - i) % n
    if include_left:
        idx = [(i + t) % n for t in range(d + 1)]
    else:
        idx = [(i + 1 + t) % n for t in range(d)]
    if not idx:
        return 0.0 if x.ndim == 1 else np.zeros(x.shape[:-1])
    return np.sum(x[..., idx], axis=-1)


def cyclic_shift(x, steps=1):
    """Index shift (tau_s x)_i = x_{i+s}."""
    return np.roll(np.asarray(x, dtype=float), -steps, axis=-1)


def reflect(x):
    """Spatial reflection (r x)_i = -x_{N-i}."""
    x = np.asarray(x, dtype=float)
    return -np.concatenate([x[..., :1], x[..., :0:-1]], axis=-1)


def _gather_pairs(v, idx2d):
    """Table t[..., a, b] = v[..., idx2d[a, b]] for an (N, N) index map."""
    n = v.shape[-1]
    vv = np.broadcast_to(v[..., None, :], v.shape[:-1] + (n, n))
    idx = np.broadcast_to(idx2d, vv.shape)
    return np.take_along_axis(vv, idx, axis=-1)


def _open_seg_table(y):
    """Table s[..., i, d] = y_{(i, i+d]} for d = 0..N-1, via a doubled prefix."""
    n = y.shape[-1]
    yy = np.concatenate([y, y], axis=-1)
    pref = np.concatenate(
        [np.zeros(y.shape[:-1] + (1,)), np.cumsum(yy, axis=-1)], axis=-1
    )
    i = np.arange(n)[:, None]
    d = np.arange(n)[None, :]
    return pref[..., i + d + 1] - pref[..., i + 1]


def _q_vector(y):
    # Q_i = log sum_j exp(y_{(i,j]}); the j = i term contributes exp(0)
    return logsumexp(_open_seg_table(y), axis=-1)


def d2(x1, x2):
    """Lower output line of the pair transform.

    Entry i is x2_i + Q_i - Q_{i-1} where Q_i is the log partition sum of
    the cyclic segments of y = x2 - x1 opened at i. Conserves slope(x2).
    """
    x1, x2 = _check_pair(x1, x2)
    q = _q_vector(x2 - x1)
    return x2 + (q - np.roll(q, 1, axis=-1))


def t2(x1, x2):
    """Upper output line of the pair transform.

    Entry i is x1_i + S_i - S_{i+1} with S the log partition sum over
    left-closed segments of y = x2 - x1. Conserves slope(x1).
    """
    x1, x2 = _check_pair(x1, x2)
    y = x2 - x1
    s = y + _q_vector(y)  # closed segments: y_{[i,j]} = y_i + y_{(i,j]}
    return x1 + (s - np.roll(s, -1, axis=-1))


def _log_abs_expm1(w):
    """log |e^w - 1|, stable across the whole real line."""
    w = np.asarray(w, dtype=float)
    big = w > 37.0
    safe = np.where(big, 0.0, w)
    out = np.log(np.abs(np.expm1(safe)))
    return np.where(big, w + np.log1p(-np.exp(-np.where(big, w, 38.0))), out)


def _check_ordered(u1, u2, label=""):
    diff = u2 - u1
    # the domain is open: a zero difference is an error, not a tolerance case
    if np.any(diff == 0.0) or (np.any(diff > 0) and np.any(diff < 0)):
        raise DomainError(f"entry differences must be strictly one-signed{label}")
    return diff


def j2(u1, u2):
    """Inverse companion of d2: recovers the second input from ordered lines.

    Requires u1 < u2 or u1 > u2 entrywise (strict). Conserves slope(u2).
    """
    u1, u2 = _check_pair(u1, u2)
    w = _check_ordered(u1, u2)
    g = _log_abs_expm1(w)
    return u2 + (np.roll(g, -1, axis=-1) - g)


def l2(u1, u2):
    """Inverse companion of t2: l2(t2(x1, x2), x2) = x1 on ordered pairs.

    Requires u1 < u2 or u1 > u2 entrywise (strict). Conserves slope(u1).
    """
    u1, u2 = _check_pair(u1, u2)
    v = _check_ordered(u2, u1)  # v = u1 - u2, same strict-sign requirement
    g = _log_abs_expm1(v)
    return u1 + (np.roll(g, 1, axis=-1) - g)


def pitman_w(x1, x2):
    """The pair map W(x1, x2) = (t2(x1, x2), d2(x1, x2)).

    A bijection of slope hyperplanes; on equal-slope inputs it is the swap
    (x2, x1). Satisfies, per entry, d_i + t_{i-1} = x1_i + x2_{i-1} and
    exp(-x1_i) + exp(-x2_i) = exp(-t_i) + exp(-d_i).
    """
    return t2(x1, x2), d2(x1, x2)


def pitman_w_inv(v1, v2):
    """Inverse of pitman_w: (v1, v2) -> (d2(v2, v1), t2(v2, v1))."""
    return d2(v2, v1), t2(v2, v1)


def _as_family(vectors):
    arr = np.asarray(vectors, dtype=float)
    if arr.ndim < 2:
        raise ValueError("a family needs shape (k, ..., N)")
    if arr.shape[0] < 1:
        raise ValueError("empty family")
    return arr


def d_multi(vectors):
    """k-input lower line: the recursion d2(x1, d_multi(x2, ..., xk))."""
    arr = _as_family(vectors)
    out = arr[-1]
    for r in range(arr.shape[0] - 2, -1, -1):
        out = d2(arr[r], out)
    return out


def d_multi_qform(vectors):
    """d_multi evaluated through the direct multi-sum over index tuples.

    The sum over (j_1, ..., j_{m-1}) factorizes into a chain of positive
    N x N matrix products, each max-shifted; serves as a cross-check of the
    recursive form.
    """
    arr = _as_family(vectors)
    m, n = arr.shape[0], arr.shape[-1]
    if m == 1:
        return arr[0]
    a = np.arange(n)[:, None]
    b = np.arange(n)[None, :]
    to_pairs = (b - a) % n  # segment length d for the pair (a, b]
    xm = arr[-1]
    q = np.zeros(xm.shape)
    for r in range(m - 2, -1, -1):
        logmat = _gather_pairs_from_table(_open_seg_table(xm - arr[r]), to_pairs)
        q = logsumexp(logmat + q[..., None, :], axis=-1)
    return xm + (q - np.roll(q, 1, axis=-1))


def _gather_pairs_from_table(seg, idx2d):
    """Reindex s[..., i, d] (segment length d) to s[..., a, b] (end residue b)."""
    idx = np.broadcast_to(idx2d, seg.shape)
    return np.take_along_axis(seg, idx, axis=-1)


def dk_stack(vectors):
    """Stacked transform: r-th output is d_multi of the first r inputs.

    Slopes pass through coordinatewise; outputs are pointwise sorted in the
    order of the input slopes.
    """
    arr = _as_family(vectors)
    return np.stack([d_multi(arr[: r + 1]) for r in range(arr.shape[0])])


def jk_stack(vectors):
    """Inverse of dk_stack on families with strictly one-signed line gaps.

    Raises DomainError naming the first recursion stage whose pair violates
    the strict ordering.
    """
    arr = _as_family(vectors)

    def rec(idx):
        if len(idx) == 1:
            return [arr[idx[0]]]
        head = rec(idx[:-1])
        alt = rec(idx[:-2] + (idx[-1],))
        try:
            last = j2(head[-1], alt[-1])
        except DomainError as e:
            raise DomainError(f"stage {len(idx)}: {e}") from None
        return head + [last]

    return np.stack(rec(tuple(range(arr.shape[0]))))


def multiline_step(w, vectors):
    """One multiline update: x_r -> d2(w_r, x_r), carry w_{r+1} = t2(w_r, x_r).

    Returns the updated family and the carried inputs (w_1, ..., w_{k+1}).
    """
    arr = _as_family(vectors)
    w = np.asarray(w, dtype=float)
    carried = [w]
    out = []
    for r in range(arr.shape[0]):
        out.append(d2(carried[-1], arr[r]))
        carried.append(t2(carried[-1], arr[r]))
    return np.stack(out), carried


def coupled_step(w, vectors):
    """One coupled update: every component mapped by d2 with the same w."""
    arr = _as_family(vectors)
    w = np.asarray(w, dtype=float)
    return np.stack([d2(w, arr[r]) for r in range(arr.shape[0])])


def fullline_d_periodic(x1, x2, tol=1e-12, max_terms=10**6):
    """Infinite-series lower line evaluated on periodic inputs.

    J_i sums exp(x1_{i-j}) times the product of exp(x1 - x2) over the last
    j sites; convergence requires slope(x1) < slope(x2), with geometric
    block ratio exp(slope(x1) - slope(x2)). Blocks of N terms are added
    until the next block falls below tol times the accumulated sum (hard
    cap max_terms). The result equals d2 of the once-shifted first
    argument, advanced one index.
    """
    x1, x2 = _check_pair(x1, x2)
    n = x1.shape[-1]
    gap = slope(x1) - slope(x2)
    if np.any(gap >= 0):
        raise ValueError("divergent series: slope(x1) must be below slope(x2)")
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    back = (i - j) % n  # site visited j steps behind i
    # first-period log terms: x1_{i-j} + sum_{l=0..j-1} (x1 - x2)_{i-l}
    ytab = _gather_pairs(x1 - x2, back)
    cums = np.cumsum(ytab, axis=-1) - ytab  # exclusive prefix along j
    block0 = logsumexp(_gather_pairs(x1, back) + cums, axis=-1)
    acc = block0
    logratio = gap if np.ndim(gap) == 0 else gap[..., None]
    p = 1
    while p * n < max_terms:
        nxt = block0 + p * logratio
        if np.all(nxt < np.log(tol) + acc):
            break
        acc = np.logaddexp(acc, nxt)
        p += 1
    return x2 + (acc - np.roll(acc, 1, axis=-1))


@dataclass
class SlopedFamily:
    """An ordered k-tuple of common-period cyclic vectors with their slopes."""

    vectors: np.ndarray  # (k, ..., N)
    slopes: np.ndarray  # (k,)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)
        self.slopes = np.atleast_1d(np.asarray(self.slopes, dtype=float))
        if self.vectors.ndim < 2 or self.vectors.shape[0] != self.slopes.shape[0]:
            raise ValueError("vectors must be (k, ..., N) matching k slopes")
        got = slope(self.vectors)
        ref = self.slopes.reshape((-1,) + (1,) * (got.ndim - 1))
        tol = SLOPE_RTOL * np.maximum(1.0, np.abs(ref))
        if np.any(np.abs(got - ref) > tol):
            raise ValueError("recorded slopes disagree with vector sums")

    @classmethod
    def from_vectors(cls, vectors):
        vectors = np.asarray(vectors, dtype=float)
        s = slope(vectors)
        while s.ndim > 1:
            s = s[..., 0]
        return cls(vectors, np.atleast_1d(s))

    @property
    def k(self) -> int:
        return self.vectors.shape[0]

    @property
    def period(self) -> int:
        return self.vectors.shape[-1]
