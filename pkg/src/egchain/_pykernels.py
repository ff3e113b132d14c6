"""Pure-Python kernels; reference behaviour for the compiled ``_kernels`` module."""

from __future__ import annotations

import numpy as np

from .revision import rate_rows
from .rng import Xoshiro256StarStar

NAME = "python"


def transition_rows(b, states, neighbors, code, eta):
    b = np.asarray(b, dtype=np.float64).tolist()
    states = np.asarray(states).tolist()
    neighbors = np.asarray(neighbors).tolist()
    m = len(b)
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for i, s in enumerate(states):
        n = 0
        for v in s:
            n += v
        q = []
        for k in range(m):
            acc = 0.0
            for k2 in range(m):
                acc += s[k2] * b[k][k2]
            q.append(acc - b[k][k])
        big = [s[k] * q[k] for k in range(m)]
        acc = 0.0
        for k in range(m):
            acc += s[k] * big[k]
        qbar = acc / n
        r = rate_rows(code, eta, s, q, big, qbar)

        row: list[tuple[int, float]] = []
        stay = 0.0
        for m1 in range(m):
            if s[m1] == 0:
                continue
            w1 = s[m1] / n
            stay += w1 * r[m1][m1]
            for m2 in range(m):
                if m2 == m1:
                    continue
                p = w1 * r[m1][m2]
                if p > 0.0:
                    row.append((neighbors[i][m1][m2], p))
        if stay > 0.0:
            row.append((i, stay))
        row.sort()
        for j, p in row:
            indices.append(j)
            data.append(p)
        indptr.append(len(indices))
    return (
        np.array(indptr, dtype=np.int64),
        np.array(indices, dtype=np.int64),
        np.array(data, dtype=np.float64),
    )


def _step(indptr, indices, data, i, u):
    lo, hi = indptr[i], indptr[i + 1]
    c = 0.0
    for k in range(lo, hi):
        c += data[k]
        if u < c:
            return indices[k]
    return indices[hi - 1]


def sample_path(indptr, indices, data, start, generations, seed, stream=0):
    indptr, indices, data = indptr.tolist(), indices.tolist(), data.tolist()
    rng = Xoshiro256StarStar.from_seed(seed, stream)
    path = [int(start)]
    i = int(start)
    for _ in range(generations):
        i = _step(indptr, indices, data, i, rng.next_double())
        path.append(i)
    return np.array(path, dtype=np.int64)


def batch_absorb(indptr, indices, data, labels, n_classes, start, runs, horizon, seed):
    """Run ``runs`` chains from ``start``; stream k drives run k.

    Returns per-class hit counts and the number of runs still transient
    after ``horizon`` steps.
    """
    indptr, indices, data = indptr.tolist(), indices.tolist(), data.tolist()
    labels = np.asarray(labels).tolist()
    counts = [0] * n_classes
    not_absorbed = 0
    for run in range(runs):
        rng = Xoshiro256StarStar.from_seed(seed, run)
        i = int(start)
        steps = 0
        while labels[i] < 0 and steps < horizon:
            i = _step(indptr, indices, data, i, rng.next_double())
            steps += 1
        if labels[i] < 0:
            not_absorbed += 1
        else:
            counts[labels[i]] += 1
    return np.array(counts, dtype=np.int64), not_absorbed


def _seqsum(values, axis=0):
    # left-to-right accumulation, matching the compiled loops bit for bit
    return np.cumsum(values, axis=axis)[-1] if len(values) else 0.0


def absorb_banded(band, lbw, ubw, rc):
    w = np.array(band, dtype=np.float64, copy=True)
    r = np.array(rc, dtype=np.float64, copy=True)
    t, nk = r.shape
    x = np.zeros((t, nk))
    piv = np.zeros(t)
    for k in range(t):
        jmax = min(k + ubw, t - 1)
        imax = min(k + lbw, t - 1)
        upper = w[k, lbw + 1: lbw + 1 + jmax - k]
        d = float(_seqsum(np.concatenate(([0.0], upper, r[k]))))
        if not d > 0.0:
            return x, piv, k
        piv[k] = d
        for i in range(k + 1, imax + 1):
            f = w[i, lbw + k - i]
            if f == 0.0:
                continue
            f = f / d
            w[i, lbw + k - i] = 0.0
            lo = lbw + k + 1 - i
            row = w[i, lo: lo + jmax - k]
            diag = i - (k + 1)
            saved = row[diag] if diag < len(row) else None
            row += f * upper
            if saved is not None:
                row[diag] = saved
            r[i] += f * r[k]
    for k in range(t - 1, -1, -1):
        jmax = min(k + ubw, t - 1)
        upper = w[k, lbw + 1: lbw + 1 + jmax - k]
        terms = np.vstack((r[k][None, :], upper[:, None] * x[k + 1: jmax + 1]))
        x[k] = _seqsum(terms, axis=0) / piv[k]
    return x, piv, -1
