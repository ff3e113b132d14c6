# cython: language_level=3
"""Compiled kernels: transition-row assembly and chain sampling.

Mirrors ``_pykernels`` operation for operation so both backends return
bit-identical arrays.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

NAME = "cython"

DEF BR = 0
DEF PPC = 1
DEF PC = 2
DEF CAP = 3
DEF LOGIT = 4

cdef uint64_t GOLDEN_GAMMA = 0x9E3779B97F4A7C15ULL


cdef void _rates(int code, double eta, const int64_t[:] s, double[:] q, double[:] big,
                 double qbar, double[:, :] r, double[:] w) noexcept nogil:
    cdef Py_ssize_t m = s.shape[0]
    cdef Py_ssize_t k, m1, m2, nwin
    cdef int64_t n = 0
    cdef double best, den, gain, first, top
    cdef bint all_equal, started

    for k in range(m):
        n += s[k]
    for m1 in range(m):
        for m2 in range(m):
            r[m1, m2] = 1.0 if m1 == m2 else 0.0

    if code == BR:
        started = False
        best = 0.0
        for k in range(m):
            if s[k] > 0 and (not started or q[k] > best):
                best = q[k]
                started = True
        nwin = 0
        for k in range(m):
            if s[k] > 0 and q[k] == best:
                nwin += 1
        for k in range(m):
            w[k] = 0.0
        for k in range(m):
            if s[k] > 0 and q[k] == best:
                w[k] = 1.0 / nwin
        for m1 in range(m):
            if s[m1] > 0:
                for m2 in range(m):
                    r[m1, m2] = w[m2]
        return

    if code == PPC or code == PC:
        for m1 in range(m):
            if s[m1] == 0:
                continue
            den = 0.0
            for m2 in range(m):
                w[m2] = 0.0
            for m2 in range(m):
                if s[m2] == 0:
                    continue
                gain = big[m2] - big[m1]
                if gain > 0.0:
                    if code == PPC:
                        w[m2] = (<double>s[m2] / <double>n) * gain
                    else:
                        w[m2] = gain
                den += w[m2]
            if den > 0.0:
                for m2 in range(m):
                    r[m1, m2] = w[m2] / den
        return

    if code == CAP:
        all_equal = True
        started = False
        first = 0.0
        for k in range(m):
            if s[k] > 0:
                if not started:
                    first = big[k]
                    started = True
                elif big[k] != first:
                    all_equal = False
        if all_equal:
            return
        den = 0.0
        for m2 in range(m):
            w[m2] = 0.0
        for m2 in range(m):
            if s[m2] == 0:
                continue
            gain = big[m2] - qbar
            if gain > 0.0:
                w[m2] = gain
            den += w[m2]
        if den > 0.0:
            for m1 in range(m):
                if s[m1] > 0:
                    for m2 in range(m):
                        r[m1, m2] = w[m2] / den
        return

    if code == LOGIT:
        started = False
        top = 0.0
        for k in range(m):
            if s[k] > 0 and (not started or big[k] > top):
                top = big[k]
                started = True
        den = 0.0
        for m2 in range(m):
            w[m2] = 0.0
        for m2 in range(m):
            if s[m2] == 0:
                continue
            w[m2] = exp((big[m2] - top) / eta)
            den += w[m2]
        for m1 in range(m):
            if s[m1] > 0:
                for m2 in range(m):
                    r[m1, m2] = w[m2] / den
        return


def transition_rows(b, states, neighbors, int code, double eta):
    if code < BR or code > LOGIT:
        raise ValueError(f"unknown protocol code {code}")
    cdef const double[:, :] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef const int64_t[:, :] sv = np.ascontiguousarray(states, dtype=np.int64)
    cdef const int64_t[:, :, :] nv = np.ascontiguousarray(neighbors, dtype=np.int64)
    cdef Py_ssize_t n_states = sv.shape[0]
    cdef Py_ssize_t m = sv.shape[1]
    cdef Py_ssize_t width = m * (m - 1) + 1

    indptr_arr = np.zeros(n_states + 1, dtype=np.int64)
    indices_arr = np.empty(n_states * width, dtype=np.int64)
    data_arr = np.empty(n_states * width, dtype=np.float64)
    cdef int64_t[:] indptr = indptr_arr
    cdef int64_t[:] indices = indices_arr
    cdef double[:] data = data_arr

    q_arr = np.empty(m)
    big_arr = np.empty(m)
    w_arr = np.empty(m)
    r_arr = np.empty((m, m))
    cdef double[:] q = q_arr
    cdef double[:] big = big_arr
    cdef double[:] w = w_arr
    cdef double[:, :] r = r_arr

    cdef Py_ssize_t i, k, k2, m1, m2, pos, a, lo
    cdef int64_t n, tj
    cdef double acc, qbar, w1, p, stay, tp

    pos = 0
    with nogil:
        for i in range(n_states):
            n = 0
            for k in range(m):
                n += sv[i, k]
            for k in range(m):
                acc = 0.0
                for k2 in range(m):
                    acc += sv[i, k2] * bv[k, k2]
                q[k] = acc - bv[k, k]
            for k in range(m):
                big[k] = sv[i, k] * q[k]
            acc = 0.0
            for k in range(m):
                acc += sv[i, k] * big[k]
            qbar = acc / n
            _rates(code, eta, sv[i], q, big, qbar, r, w)

            lo = pos
            stay = 0.0
            for m1 in range(m):
                if sv[i, m1] == 0:
                    continue
                w1 = <double>sv[i, m1] / <double>n
                stay += w1 * r[m1, m1]
                for m2 in range(m):
                    if m2 == m1:
                        continue
                    p = w1 * r[m1, m2]
                    if p > 0.0:
                        indices[pos] = nv[i, m1, m2]
                        data[pos] = p
                        pos += 1
            if stay > 0.0:
                indices[pos] = i
                data[pos] = stay
                pos += 1
            # insertion sort by target index (targets in a row are distinct)
            for a in range(lo + 1, pos):
                tj = indices[a]
                tp = data[a]
                k = a - 1
                while k >= lo and indices[k] > tj:
                    indices[k + 1] = indices[k]
                    data[k + 1] = data[k]
                    k -= 1
                indices[k + 1] = tj
                data[k + 1] = tp
            indptr[i + 1] = pos
    return indptr_arr, indices_arr[:pos].copy(), data_arr[:pos].copy()


cdef inline uint64_t _rotl(uint64_t x, int k) noexcept nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t _splitmix(uint64_t* x) noexcept nogil:
    cdef uint64_t z
    x[0] += GOLDEN_GAMMA
    z = x[0]
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline void _seed(uint64_t seed, uint64_t stream, uint64_t* s) noexcept nogil:
    cdef uint64_t x = seed + 4 * stream * GOLDEN_GAMMA
    cdef int k
    for k in range(4):
        s[k] = _splitmix(&x)


cdef inline uint64_t _next(uint64_t* s) noexcept nogil:
    cdef uint64_t result = _rotl(s[1] * 5, 7) * 9
    cdef uint64_t t = s[1] << 17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


cdef inline double _uniform(uint64_t* s) noexcept nogil:
    return <double>(_next(s) >> 11) * (1.0 / 9007199254740992.0)


cdef inline int64_t _step(const int64_t[:] indptr, const int64_t[:] indices, const double[:] data,
                          int64_t i, double u) noexcept nogil:
    cdef int64_t lo = indptr[i]
    cdef int64_t hi = indptr[i + 1]
    cdef int64_t k
    cdef double c = 0.0
    for k in range(lo, hi):
        c += data[k]
        if u < c:
            return indices[k]
    return indices[hi - 1]


def sample_path(indptr, indices, data, int64_t start, Py_ssize_t generations,
                seed, stream=0):
    cdef const int64_t[:] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const int64_t[:] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[:] dv = np.ascontiguousarray(data, dtype=np.float64)
    path_arr = np.empty(generations + 1, dtype=np.int64)
    cdef int64_t[:] path = path_arr
    cdef uint64_t s[4]
    cdef Py_ssize_t j
    cdef int64_t i = start
    _seed(<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF), <uint64_t>(stream & 0xFFFFFFFFFFFFFFFF), s)
    path[0] = i
    with nogil:
        for j in range(generations):
            i = _step(ip, ix, dv, i, _uniform(s))
            path[j + 1] = i
    return path_arr


def batch_absorb(indptr, indices, data, labels, Py_ssize_t n_classes, int64_t start,
                 Py_ssize_t runs, Py_ssize_t horizon, seed):
    cdef const int64_t[:] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const int64_t[:] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[:] dv = np.ascontiguousarray(data, dtype=np.float64)
    cdef const int64_t[:] lab = np.ascontiguousarray(labels, dtype=np.int64)
    counts_arr = np.zeros(n_classes, dtype=np.int64)
    cdef int64_t[:] counts = counts_arr
    cdef uint64_t s[4]
    cdef uint64_t useed = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t run, steps
    cdef Py_ssize_t not_absorbed = 0
    cdef int64_t i
    with nogil:
        for run in range(runs):
            _seed(useed, <uint64_t>run, s)
            i = start
            steps = 0
            while lab[i] < 0 and steps < horizon:
                i = _step(ip, ix, dv, i, _uniform(s))
                steps += 1
            if lab[i] < 0:
                not_absorbed += 1
            else:
                counts[lab[i]] += 1
    return counts_arr, not_absorbed


def absorb_banded(band, Py_ssize_t lbw, Py_ssize_t ubw, rc):
    """Subtraction-free banded elimination for absorption probabilities.

    ``band[i, lbw + (j - i)]`` holds the transient-to-transient probability
    i -> j (diagonal ignored); ``rc[i, k]`` the one-step mass into class k.
    Returns ``(x, pivots, bad)`` where ``bad`` is the first transient position
    whose pivot vanished, or -1.
    """
    w_arr = np.array(band, dtype=np.float64, order="C", copy=True)
    r_arr = np.array(rc, dtype=np.float64, order="C", copy=True)
    cdef double[:, :] w = w_arr
    cdef double[:, :] r = r_arr
    cdef Py_ssize_t t = w.shape[0]
    cdef Py_ssize_t nk = r.shape[1]
    x_arr = np.zeros((t, nk))
    piv_arr = np.zeros(t)
    cdef double[:, :] x = x_arr
    cdef double[:] piv = piv_arr
    cdef Py_ssize_t k, i, j, c, jmax, imax
    cdef double d, f, acc
    cdef Py_ssize_t bad = -1
    with nogil:
        for k in range(t):
            jmax = k + ubw if k + ubw < t - 1 else t - 1
            imax = k + lbw if k + lbw < t - 1 else t - 1
            d = 0.0
            for j in range(k + 1, jmax + 1):
                d += w[k, lbw + j - k]
            for c in range(nk):
                d += r[k, c]
            if not d > 0.0:
                bad = k
                break
            piv[k] = d
            for i in range(k + 1, imax + 1):
                f = w[i, lbw + k - i]
                if f == 0.0:
                    continue
                f = f / d
                w[i, lbw + k - i] = 0.0
                for j in range(k + 1, jmax + 1):
                    if j != i:
                        w[i, lbw + j - i] += f * w[k, lbw + j - k]
                for c in range(nk):
                    r[i, c] += f * r[k, c]
        if bad < 0:
            for k in range(t - 1, -1, -1):
                jmax = k + ubw if k + ubw < t - 1 else t - 1
                for c in range(nk):
                    acc = r[k, c]
                    for j in range(k + 1, jmax + 1):
                        acc += w[k, lbw + j - k] * x[j, c]
                    x[k, c] = acc / piv[k]
    return x_arr, piv_arr, bad
