"""Majorization machinery for LOCC convertibility.

Schmidt vectors are numpy arrays of nonnegative reals sorted descending and
summing to 1. Conversion feasibility, the conclusive-conversion probability,
the intermediate vector for the two-phase protocol, and the decompositions
used to compile measurement rounds (T-transform chains, their groupings, and
Birkhoff convex decompositions of doubly-stochastic matrices) all live here.

T-transform coordinate indices are 0-based.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

RECON_TOL = 1e-10
SUM_TOL = 1e-12


class TTransform(NamedTuple):
    """Doubly-stochastic mix of identity and the (j, k) swap.

    Acts on coordinates j < k as [[t, 1-t], [1-t, t]] and as identity
    elsewhere.
    """

    j: int
    k: int
    t: float


def _as_schmidt(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.min() < -SUM_TOL:
        raise ValueError("Schmidt vector has a negative entry")
    if abs(v.sum() - 1.0) > 1e-9:
        raise ValueError("Schmidt vector does not sum to 1")
    if np.any(v[:-1] < v[1:] - 1e-9):
        raise ValueError("Schmidt vector is not sorted descending")
    return v


def _pad_pair(alpha, beta) -> tuple[np.ndarray, np.ndarray]:
    a = _as_schmidt(alpha)
    b = _as_schmidt(beta)
    d = max(a.size, b.size)
    a = np.concatenate([a, np.zeros(d - a.size)])
    b = np.concatenate([b, np.zeros(d - b.size)])
    return a, b


def is_majorized(alpha, beta, tol: float = 1e-12) -> bool:
    """True iff every prefix sum of alpha is at most that of beta.

    The majorized (more mixed) vector is the first argument; True means a
    deterministic LOCC conversion from a state with Schmidt vector ``alpha``
    to one with ``beta`` exists.
    """
    a, b = _pad_pair(alpha, beta)
    ca, cb = np.cumsum(a), np.cumsum(b)
    if abs(ca[-1] - cb[-1]) > tol:
        return False
    return bool(np.all(ca <= cb + tol))


def _tails(v: np.ndarray) -> np.ndarray:
    """Suffix sums E_l = sum_{i >= l}, returned for l = 0..d-1."""
    return np.cumsum(v[::-1])[::-1]


def vidal_probability(alpha, beta) -> float:
    """Maximal conversion probability min_l E_l(alpha)/E_l(beta).

    E_l is the suffix sum from position l; positions with E_l(beta) = 0 are
    skipped. Returns a value in (0, 1], equal to 1 exactly when alpha is
    majorized by beta. A target of larger Schmidt rank than the source is
    unreachable and yields 0.0.
    """
    a, b = _pad_pair(alpha, beta)
    rank_a = int(np.sum(a > 1e-14))
    rank_b = int(np.sum(b > 1e-14))
    if rank_b > rank_a:
        return 0.0
    ta, tb = _tails(a), _tails(b)
    mask = tb > 1e-14
    return float(np.min(ta[mask] / tb[mask]))


def vidal_intermediate(alpha, beta) -> np.ndarray:
    """Intermediate Schmidt vector gamma of the two-phase conversion.

    The conversion alpha -> beta splits into a deterministic phase
    alpha -> gamma (requires is_majorized(alpha, gamma)) followed by a
    single local filter gamma -> beta succeeding with probability
    r = vidal_probability(alpha, beta) = min_i gamma_i / beta_i.

    Built from the running minimum of f_l = E_l(alpha) - r E_l(beta):
    gamma_l = h_l - h_{l+1} + r beta_l with h the running minimum of f.
    The result is sorted descending; when alpha is already majorized by
    beta it equals beta exactly.
    """
    a, b = _pad_pair(alpha, beta)
    r = vidal_probability(a, b)
    if r == 0.0:
        raise ValueError("target rank exceeds source rank; no conversion")
    d = a.size
    f = np.empty(d + 1)
    f[:d] = _tails(a) - r * _tails(b)
    f[d] = 0.0
    h = np.minimum.accumulate(f)
    gamma = h[:d] - h[1:] + r * b
    gamma = np.sort(gamma)[::-1]
    gamma[gamma < 0] = 0.0
    return gamma / gamma.sum()


def expand_ttransform(tt: TTransform, d: int) -> np.ndarray:
    """Expand a T-transform to its d x d doubly-stochastic matrix."""
    j, k, t = tt
    m = np.eye(d)
    m[j, j] = m[k, k] = t
    m[j, k] = m[k, j] = 1.0 - t
    return m


def t_transform_decompose(alpha, beta) -> list[TTransform]:
    """Greedy chain of at most d-1 T-transforms carrying beta to alpha.

    Repeatedly picks the smallest index j where the current vector exceeds
    the target alpha and the next index k > j where it falls short, then
    levels whichever gap is smaller. Requires is_majorized(alpha, beta).
    """
    a, b = _pad_pair(alpha, beta)
    if not is_majorized(a, b):
        raise ValueError("alpha is not majorized by beta")
    d = a.size
    out: list[TTransform] = []
    cur = b.copy()
    for _ in range(d - 1):
        if np.max(np.abs(cur - a)) < 1e-13:
            break
        j = int(np.argmax(cur > a + 1e-13))
        k = j + 1 + int(np.argmax(cur[j + 1 :] < a[j + 1 :] - 1e-13))
        delta = min(cur[j] - a[j], a[k] - cur[k])
        t = 1.0 - delta / (cur[j] - cur[k])
        out.append(TTransform(j, k, float(t)))
        nj = t * cur[j] + (1 - t) * cur[k]
        nk = (1 - t) * cur[j] + t * cur[k]
        cur[j], cur[k] = nj, nk
    if np.max(np.abs(cur - a)) > RECON_TOL:
        raise ArithmeticError("T-transform chain failed to reach the target")
    return out


def build_doubly_stochastic(alpha, beta) -> np.ndarray:
    """Doubly-stochastic D with D @ beta = alpha, as a T-transform product."""
    a, b = _pad_pair(alpha, beta)
    d = a.size
    mat = np.eye(d)
    for tt in t_transform_decompose(a, b):
        mat = expand_ttransform(tt, d) @ mat
    return mat


def group_ttransforms(ts: list[TTransform], g: int, d: int) -> list[np.ndarray]:
    """Multiply consecutive T-transforms in groups of g.

    Returns ceil(len(ts)/g) doubly-stochastic matrices [D_1, ..., D_l]
    whose ordered product D_l ... D_1 equals the product of all transforms;
    applying them sequentially to a vector replays the full chain.
    """
    if g < 1:
        raise ValueError("group size must be at least 1")
    out = []
    for start in range(0, len(ts), g):
        m = np.eye(d)
        for tt in ts[start : start + g]:
            m = expand_ttransform(tt, d) @ m
        out.append(m)
    return out


def _perfect_matching(adj: np.ndarray) -> np.ndarray | None:
    """Kuhn's augmenting-path perfect matching on a boolean adjacency matrix.

    Returns col_of_row index array or None if no perfect matching exists.
    """
    d = adj.shape[0]
    row_of_col = np.full(d, -1)

    def try_row(r: int, seen: np.ndarray) -> bool:
        for c in range(d):
            if adj[r, c] and not seen[c]:
                seen[c] = True
                if row_of_col[c] < 0 or try_row(row_of_col[c], seen):
                    row_of_col[c] = r
                    return True
        return False

    for r in range(d):
        if not try_row(r, np.zeros(d, dtype=bool)):
            return None
    col_of_row = np.empty(d, dtype=int)
    for c, r in enumerate(row_of_col):
        col_of_row[r] = c
    return col_of_row


def _lex_bottleneck_matching(m: np.ndarray) -> np.ndarray:
    """Max-bottleneck perfect matching, lexicographically smallest.

    Binary-searches the bottleneck value over the distinct positive entries,
    then fixes row assignments in order, always choosing the smallest column
    that keeps the remaining rows matchable.
    """
    d = m.shape[0]
    vals = np.unique(m[m > 1e-15])
    lo, hi = 0, len(vals) - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        match = _perfect_matching(m >= vals[mid] - 1e-15)
        if match is not None:
            best = vals[mid]
            lo = mid + 1
        else:
            hi = mid - 1
    if best is None:
        raise ArithmeticError("matrix has no positive perfect matching")
    adj = m >= best - 1e-15
    perm = np.full(d, -1)
    used = np.zeros(d, dtype=bool)
    for r in range(d):
        for c in range(d):
            if adj[r, c] and not used[c]:
                sub_rows = [i for i in range(r + 1, d)]
                sub_cols = [j for j in range(d) if not used[j] and j != c]
                sub = adj[np.ix_(sub_rows, sub_cols)] if sub_rows else None
                if sub is None or _perfect_matching(sub) is not None:
                    perm[r] = c
                    used[c] = True
                    break
        if perm[r] < 0:
            raise ArithmeticError("lexicographic matching failed")
    return perm


def birkhoff_decompose(
    dmat: np.ndarray, tol: float = RECON_TOL
) -> list[tuple[float, np.ndarray]]:
    """Convex decomposition of a doubly-stochastic matrix into permutations.

    Greedy max-bottleneck extraction: each step removes the largest weight
    supported on strictly positive entries, zeroing at least one entry, so
    the term count is bounded by (d-1)^2 + 1. Permutations are returned as
    index arrays p with matrix[i, p[i]] = 1, so (P v)[i] = v[p[i]].
    """
    m = np.asarray(dmat, dtype=float).copy()
    d = m.shape[0]
    if m.shape != (d, d) or m.min() < -tol:
        raise ValueError("not a nonnegative square matrix")
    if not (
        np.allclose(m.sum(axis=0), 1.0, atol=1e-9)
        and np.allclose(m.sum(axis=1), 1.0, atol=1e-9)
    ):
        raise ValueError("matrix is not doubly stochastic")
    terms: list[tuple[float, np.ndarray]] = []
    bound = (d - 1) ** 2 + 1
    for _ in range(bound + 1):
        resid = m.max()
        if resid < 1e-13:
            break
        perm = _lex_bottleneck_matching(m)
        q = float(m[np.arange(d), perm].min())
        m[np.arange(d), perm] -= q
        m[m < 1e-15] = 0.0
        terms.append((q, perm))
    else:
        raise ArithmeticError("Birkhoff extraction exceeded the term bound")
    total = sum(q for q, _ in terms)
    if abs(total - 1.0) > 1e-9:
        raise ArithmeticError(f"Birkhoff weights sum to {total}, not 1")
    return [(q / total, p) for q, p in terms]


def permutation_matrix(perm: np.ndarray) -> np.ndarray:
    """Matrix of the permutation index array: (P v)[i] = v[perm[i]]."""
    d = len(perm)
    p = np.zeros((d, d))
    p[np.arange(d), perm] = 1.0
    return p
