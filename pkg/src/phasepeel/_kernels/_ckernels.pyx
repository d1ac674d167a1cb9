# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: graph sampling and the resolve sweep.

Line-for-line port of _pykernels.py; the counter-based integer streams
are bit-identical, float paths agree to roundoff and every comparison
sits behind a tolerance wide enough to absorb that.
"""

import numpy as np

from .. import _cancel as _pycancel

from libc.math cimport atan2, acos, cos, fabs, floor, fmax, log, sin, sqrt, llround, M_PI
from libc.stdint cimport int32_t, int64_t, uint8_t, uint64_t

cdef double TOL_INT = 1e-6
cdef double TOL_VERIFY = 1e-8
cdef double LEAD_EPS = 1e-12
cdef double DEGEN_EPS = 1e-10
cdef double VALUE_FLOOR = 1e-9
cdef double CONFLICT_TOL = 1e-6
cdef double COS_EPS = 1e-12

# the compiled constants must match the shared module exactly
assert (1e-6, 1e-8, 1e-12, 1e-10, 1e-9, 1e-6, 1e-12) == (
    _pycancel.TOL_INT,
    _pycancel.TOL_VERIFY,
    _pycancel.LEAD_EPS,
    _pycancel.DEGEN_EPS,
    _pycancel.VALUE_FLOOR,
    _pycancel.CONFLICT_TOL,
    _pycancel.COS_EPS,
)

cdef double U53 = 2.0 ** -53
cdef double PHI_SCALE = (2.0 ** -53) * (M_PI / 2.0)


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z + <uint64_t>0x9E3779B97F4A7C15)
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline double phi_from_row(uint64_t row_key, uint64_t j) nogil:
    cdef uint64_t h = mix64(mix64(row_key ^ j))
    return <double>(h >> 11) * PHI_SCALE


cdef int64_t _row_edges(uint64_t row_key, double inv_log_q, int64_t n_left,
                        int32_t* out) nogil:
    """Geometric-gap walk over one row; emits 1-based columns when out
    is non-NULL, returns the edge count either way."""
    cdef int64_t cur = -1, cnt = 0
    cdef uint64_t t = 0
    cdef uint64_t h
    cdef double u
    cdef int64_t gap
    while True:
        h = mix64(mix64(row_key ^ t))
        t += 1
        u = (<double>(h >> 11) + 1.0) * U53
        gap = <int64_t>floor(log(u) * inv_log_q)
        cur += gap + 1
        if cur >= n_left:
            break
        if out != NULL:
            out[cnt] = <int32_t>(cur + 1)
        cnt += 1
    return cnt


def sample_rows(n_left, n_right, edge_prob, inv_log_q, key):
    """Sample all right-node adjacency rows of one bipartite graph.

    Same contract as the pure version: (indptr, indices), 1-based sorted
    columns per row, driven by the per-row counter stream.
    """
    cdef int64_t nl = n_left, nr = n_right
    cdef double p = edge_prob
    indptr_arr = np.zeros(nr + 1, dtype=np.int64)
    if nr == 0 or nl == 0 or p <= 0.0:
        return indptr_arr, np.empty(0, dtype=np.int32)
    if p >= 1.0:
        indptr_arr[1:] = np.arange(1, nr + 1, dtype=np.int64) * nl
        row = np.arange(1, nl + 1, dtype=np.int32)
        return indptr_arr, np.tile(row, nr)

    cdef double ilq = inv_log_q
    cdef uint64_t k64 = <uint64_t>key
    cdef int64_t[::1] indptr = indptr_arr
    cdef int64_t i, total = 0
    cdef uint64_t row_key

    for i in range(nr):
        row_key = mix64(k64 ^ <uint64_t>i)
        total += _row_edges(row_key, ilq, nl, NULL)
        indptr[i + 1] = total

    indices_arr = np.empty(total, dtype=np.int32)
    cdef int32_t[::1] indices = indices_arr
    for i in range(nr):
        row_key = mix64(k64 ^ <uint64_t>i)
        if indptr[i + 1] > indptr[i]:
            _row_edges(row_key, ilq, nl, &indices[indptr[i]])
    return indptr_arr, indices_arr


cdef inline int64_t _bisect(const int32_t* row, int64_t length, int64_t j) nogil:
    """Index of j in the sorted row, or -1."""
    cdef int64_t lo = 0, hi = length, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if row[mid] < j:
            lo = mid + 1
        else:
            hi = mid
    if lo < length and row[lo] == j:
        return lo
    return -1


def multiton_sweep(
    indptr_arr,
    indices_arr,
    b_arr,
    n,
    phase_key,
    cos_tab_arr,
    sin_tab_arr,
    value_arr,
    mag_arr,
    resolved_arr,
    resolved_count,
    k,
    attempt_singletons,
    new_out_arr,
):
    """One in-order resolve sweep; see _pykernels.multiton_sweep."""
    cdef const int64_t[::1] indptr = indptr_arr
    cdef const int32_t[::1] indices = indices_arr
    cdef const double[:, ::1] b = b_arr
    cdef const double[::1] cos_tab = cos_tab_arr
    cdef const double[::1] sin_tab = sin_tab_arr
    cdef double complex[::1] value = value_arr
    cdef double[::1] mag = mag_arr
    cdef uint8_t[::1] resolved = resolved_arr
    cdef int64_t[::1] new_out = new_out_arr

    cdef int64_t nn = n, kk = k, rcount = resolved_count
    cdef bint do_singles = attempt_singletons
    cdef uint64_t pkey = <uint64_t>phase_key

    cdef double unit = M_PI / (2.0 * nn)
    cdef int64_t n_right = indptr.shape[0] - 1
    cdef int64_t n_new = 0, attempts = 0, failures = 0
    cdef int64_t singles = 0, degen = 0, conflicts = 0

    cdef int64_t i, s, e, t, nres, j, p, length
    cdef double b1, b2, b3, b4, b5, sv, cj, mm
    cdef uint64_t row_key
    cdef double complex A, B, D, xt, M, num, den, x
    cdef double cpsi, psi, ratio, absA, absB, scale
    cdef double P, Q, R, a2, a1, a0, disc, sq, d_ns, S, ca, sa, alpha, jf
    cdef double csj, snj, ph
    cdef double roots[2]
    cdef int n_roots, ri, si, n_sign
    cdef double sgn
    cdef bint saw_degen
    cdef int64_t cj_idx[8]
    cdef double complex cx[8]
    cdef double ccs[8]
    cdef int n_cand, vi, n_ver
    cdef int64_t vj[8]
    cdef double complex vx[8]
    cdef bint okcand

    for i in range(n_right):
        if rcount + n_new >= kk:
            break
        s = indptr[i]
        e = indptr[i + 1]
        if s == e:
            continue
        length = e - s
        nres = 0
        for t in range(s, e):
            if resolved[indices[t]]:
                nres += 1
        b1 = b[i, 0]
        b2 = b[i, 1]
        b3 = b[i, 2]
        b4 = b[i, 3]
        b5 = b[i, 4]

        if nres == 0:
            if not do_singles or (b1 <= 0.0 and b2 <= 0.0):
                continue
            sv = atan2(b2, b1) / unit
            j = llround(sv)
            if fabs(sv - j) > TOL_INT or j < 1 or j > nn:
                continue
            cj = cos_tab[j]
            if fabs(cj) > COS_EPS:
                mm = b1 / cj
            else:
                mm = b2 / sin_tab[j]
            if fabs(mm - b5) > TOL_VERIFY * fmax(1.0, b5):
                continue
            p = _bisect(&indices[s], length, j)
            if p < 0:
                continue
            if mm <= 0.0:
                continue
            if mag[j] > 0.0:
                if fabs(mm - mag[j]) > CONFLICT_TOL * fmax(1.0, mag[j]):
                    conflicts += 1
            elif not resolved[j]:
                mag[j] = mm
                singles += 1
            continue

        attempts += 1
        A = 0
        B = 0
        D = 0
        row_key = mix64(pkey ^ <uint64_t>i)
        for t in range(s, e):
            j = indices[t]
            if resolved[j]:
                xt = value[j]
                A = A + xt * cos_tab[j]
                B = B + xt * (1j * sin_tab[j])
                ph = phi_from_row(row_key, <uint64_t>j)
                D = D + xt * (cos(ph) + 1j * sin(ph))

        # closed-form candidate enumeration (port of candidate_solutions)
        n_cand = 0
        saw_degen = False
        if b1 > 0.0 and b2 > 0.0:
            cpsi = (b3 * b3 - b1 * b1 - b2 * b2) / (2.0 * b1 * b2)
            if fabs(cpsi) <= 1.0 + 1e-9:
                if cpsi > 1.0:
                    cpsi = 1.0
                elif cpsi < -1.0:
                    cpsi = -1.0
                psi = acos(cpsi)
                ratio = b1 / b2
                absA = abs(A)
                absB = abs(B)
                scale = fmax(1.0, fmax(absA, absB * ratio))
                n_sign = 1 if (psi == 0.0 or psi == M_PI) else 2
                for si in range(n_sign):
                    sgn = 1.0 if si == 0 else -1.0
                    M = ratio * cos(psi) + 1j * (sgn * ratio * sin(psi))
                    P = b2 * b2 - absB * absB
                    Q = b1 * b1 - absA * absA
                    R = A.imag * B.real - A.real * B.imag - b2 * b2 * M.imag
                    a2 = (P - Q) * (P - Q) + 4.0 * R * R
                    a1 = 2.0 * P * Q - 2.0 * Q * Q - 4.0 * R * R
                    a0 = Q * Q

                    if fabs(a2) < LEAD_EPS:
                        if fabs(a1) < LEAD_EPS:
                            saw_degen = True
                            continue
                        roots[0] = -a0 / a1
                        n_roots = 1
                    else:
                        disc = a1 * a1 - 4.0 * a2 * a0
                        if disc < 0.0:
                            if disc > -1e-12 * (a1 * a1 + fabs(4.0 * a2 * a0)):
                                disc = 0.0
                            else:
                                continue
                        sq = sqrt(disc)
                        roots[0] = (-a1 + sq) / (2.0 * a2)
                        roots[1] = (-a1 - sq) / (2.0 * a2)
                        n_roots = 2
                        for ri in range(2):
                            d_ns = 2.0 * a2 * roots[ri] + a1
                            if d_ns != 0.0:
                                roots[ri] = roots[ri] - (
                                    a2 * roots[ri] * roots[ri]
                                    + a1 * roots[ri] + a0
                                ) / d_ns

                    for ri in range(n_roots):
                        S = roots[ri]
                        if S < 0.0:
                            if S < -1e-12:
                                continue
                            S = 0.0
                        if S > 1.0:
                            if S > 1.0 + 1e-12:
                                continue
                            S = 1.0
                        ca = sqrt(S)
                        sa = sqrt(fmax(0.0, 1.0 - S))
                        alpha = atan2(sa, ca)
                        jf = alpha / unit
                        j = llround(jf)
                        if fabs(jf - j) > TOL_INT or j < 1 or j > nn:
                            continue
                        num = B * M - A
                        if abs(num) <= DEGEN_EPS * scale:
                            saw_degen = True
                            continue
                        csj = cos(j * unit)
                        snj = sin(j * unit)
                        den = csj - 1j * M * snj
                        if abs(den) < 1e-14:
                            continue
                        x = num / den
                        if abs(x) <= VALUE_FLOOR:
                            continue
                        if n_cand < 8:
                            cj_idx[n_cand] = j
                            cx[n_cand] = x
                            ccs[n_cand] = csj
                            n_cand += 1

        if saw_degen:
            degen += 1

        n_ver = 0
        for vi in range(n_cand):
            j = cj_idx[vi]
            x = cx[vi]
            if resolved[j]:
                continue
            if _bisect(&indices[s], length, j) < 0:
                continue
            if fabs(abs(A + x * cos_tab[j]) - b1) > TOL_VERIFY * fmax(1.0, b1):
                continue
            ph = phi_from_row(row_key, <uint64_t>j)
            if fabs(abs(D + x * (cos(ph) + 1j * sin(ph))) - b5) > TOL_VERIFY * fmax(1.0, b5):
                continue
            if n_ver < 8:
                vj[n_ver] = j
                vx[n_ver] = x
                n_ver += 1

        # select_unique: all survivors must agree on one (j, x)
        if n_ver == 0:
            if n_cand > 0:
                failures += 1
            continue
        okcand = True
        for vi in range(1, n_ver):
            if vj[vi] != vj[0] or abs(vx[vi] - vx[0]) > 1e-6 * fmax(1.0, abs(vx[0])):
                okcand = False
                break
        if not okcand:
            failures += 1
            continue
        j = vj[0]
        x = vx[0]
        if abs(x) <= VALUE_FLOOR:
            continue
        value[j] = x
        mag[j] = abs(x)
        resolved[j] = 1
        new_out[n_new] = j
        n_new += 1

    return n_new, attempts, failures, singles, degen, conflicts
