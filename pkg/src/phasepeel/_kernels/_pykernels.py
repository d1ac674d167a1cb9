"""Pure numpy/Python implementations of the hot kernels.

Functionally equivalent to the compiled versions in _ckernels.pyx; the
compiled sweep follows this code line for line.  Kept importable with
no compiler so the package degrades gracefully.
"""

from __future__ import annotations

import math

import numpy as np

from .. import _rng
from .._cancel import (
    CONFLICT_TOL,
    COS_EPS,
    TOL_INT,
    TOL_VERIFY,
    VALUE_FLOOR,
    candidate_solutions,
    select_unique,
)

_CHUNK_ENTRIES = 1 << 24  # cap on the uint64 scratch matrix per round


def sample_rows(
    n_left: int, n_right: int, edge_prob: float, inv_log_q: float, key: int
) -> tuple[np.ndarray, np.ndarray]:
    """Sample all right-node adjacency rows of one bipartite graph.

    Each (right, left) pair is an edge with probability edge_prob,
    decided by geometric gap skipping over a counter-based stream, so
    run time is proportional to the number of edges drawn.  Returns
    (indptr, indices) with 1-based sorted left indices per row.
    """
    indptr = np.zeros(n_right + 1, dtype=np.int64)
    if n_right == 0 or n_left == 0 or edge_prob <= 0.0:
        return indptr, np.empty(0, dtype=np.int32)
    if edge_prob >= 1.0:
        indptr[1:] = np.arange(1, n_right + 1, dtype=np.int64) * n_left
        row = np.arange(1, n_left + 1, dtype=np.int32)
        return indptr, np.tile(row, n_right)

    mean_deg = n_left * edge_prob
    t_round = max(8, int(mean_deg + 6.0 * math.sqrt(mean_deg) + 16.0))
    chunk_rows = max(1, _CHUNK_ENTRIES // t_round)

    counts = np.zeros(n_right, dtype=np.int64)
    pieces: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    tails: dict[int, list[np.ndarray]] = {}

    counters = np.arange(t_round, dtype=np.uint64)
    for lo in range(0, n_right, chunk_rows):
        hi = min(n_right, lo + chunk_rows)
        rows = np.arange(lo, hi, dtype=np.uint64)
        row_keys = _rng._mix64_vec(np.uint64(key) ^ rows)
        h = _rng._mix64_vec(_rng._mix64_vec(row_keys[:, None] ^ counters[None, :]))
        u = ((h >> np.uint64(11)) + np.uint64(1)) * 2.0**-53
        gaps = np.floor(np.log(u) * inv_log_q).astype(np.int64)
        pos = np.cumsum(gaps + 1, axis=1) - 1
        valid = pos < n_left
        nvalid = valid.sum(axis=1)
        counts[lo:hi] = nvalid
        pieces.append((np.arange(lo, hi, dtype=np.int64), nvalid, pos[valid]))

        # rows that did not pass n_left within t_round draws (rare): finish
        # them one by one, continuing the same counter stream
        for r in np.nonzero(nvalid == t_round)[0]:
            row = int(lo + r)
            cur = int(pos[r, -1])
            t0 = t_round
            extra: list[np.ndarray] = []
            while cur < n_left:
                cs = np.arange(t0, t0 + 64, dtype=np.uint64)
                hh = _rng.counter_u64(int(row_keys[r]), cs)
                uu = ((hh >> np.uint64(11)) + np.uint64(1)) * 2.0**-53
                gg = np.floor(np.log(uu) * inv_log_q).astype(np.int64)
                pp = np.cumsum(gg + 1) + cur
                ok = pp < n_left
                extra.append(pp[ok])
                if not ok.all():
                    cur = n_left
                else:
                    cur = int(pp[-1])
                t0 += 64
            tail = np.concatenate(extra) if extra else np.empty(0, dtype=np.int64)
            tails[row] = [tail]
            counts[row] += len(tail)

    indptr[1:] = np.cumsum(counts)
    indices = np.empty(int(indptr[-1]), dtype=np.int32)
    for rows, nvalid, flat in pieces:
        if len(flat) == 0:
            continue
        starts = indptr[rows]
        offs = np.repeat(starts, nvalid) + (
            np.arange(len(flat)) - np.repeat(np.cumsum(nvalid) - nvalid, nvalid)
        )
        indices[offs] = flat + 1  # to 1-based
    for row, tail_list in tails.items():
        tail = tail_list[0]
        start = int(indptr[row]) + int(counts[row]) - len(tail)
        indices[start : start + len(tail)] = tail + 1
    return indptr, indices


def multiton_sweep(
    indptr: np.ndarray,
    indices: np.ndarray,
    b: np.ndarray,
    n: int,
    phase_key: int,
    cos_tab: np.ndarray,
    sin_tab: np.ndarray,
    value: np.ndarray,
    mag: np.ndarray,
    resolved: np.ndarray,
    resolved_count: int,
    k: int,
    attempt_singletons: bool,
    new_out: np.ndarray,
) -> tuple[int, int, int, int, int, int]:
    """One in-order resolve sweep over the right nodes of one graph.

    For each right node the adjacency is split against the current
    resolved set; with at least one resolved neighbor the cancelling-out
    closed form is attempted and a unique verified candidate is written
    into the dense state immediately (later nodes in the same sweep see
    it).  Nodes with no resolved neighbor optionally get a singleton
    attempt whose verified magnitude is recorded (magnitude only; it
    cannot join the phase frame here).

    Returns (n_new, attempts, failures, singleton_hits, degenerate_skips,
    conflicts) and appends newly resolved indices to new_out[:n_new].
    A non-zero conflict count means two verified recoveries disagreed on
    the same index and the caller must fail the trial.
    """
    unit = math.pi / (2.0 * n)
    n_right = len(indptr) - 1
    n_new = attempts = failures = singles = degen = conflicts = 0

    for i in range(n_right):
        if resolved_count + n_new >= k:
            break
        s, e = int(indptr[i]), int(indptr[i + 1])
        if s == e:
            continue
        row = indices[s:e]
        rmask = resolved[row].astype(bool)
        nres = int(rmask.sum())
        b1, b2, b3, b4, b5 = (float(v) for v in b[i])

        if nres == 0:
            if not attempt_singletons or (b1 <= 0.0 and b2 <= 0.0):
                continue
            sv = math.atan2(b2, b1) / unit
            j = round(sv)
            if abs(sv - j) > TOL_INT or j < 1 or j > n:
                continue
            cj = cos_tab[j]
            m = b1 / cj if abs(cj) > COS_EPS else b2 / sin_tab[j]
            if abs(m - b5) > TOL_VERIFY * max(1.0, b5):
                continue
            p = np.searchsorted(row, j)
            if p >= len(row) or row[p] != j:
                continue
            if m <= 0.0:
                continue
            if mag[j] > 0.0:
                if abs(m - mag[j]) > CONFLICT_TOL * max(1.0, mag[j]):
                    conflicts += 1
            elif not resolved[j]:
                mag[j] = m
                singles += 1
            continue

        attempts += 1
        res = row[rmask]
        vals = value[res]
        A = complex((vals * cos_tab[res]).sum())
        B = 1j * complex((vals * sin_tab[res]).sum())
        row_key = _rng.phi_row_key(phase_key, i)
        phis = _rng.phi_from_row_key(row_key, res)
        D = complex((vals * np.exp(1j * phis)).sum())

        cands, saw_degen = candidate_solutions(b1, b2, b3, A, B, n)
        if saw_degen:
            degen += 1
        verified: list[tuple[int, complex]] = []
        for j, x, _csj, _snj in cands:
            if resolved[j]:
                continue
            p = np.searchsorted(row, j)
            if p >= len(row) or row[p] != j:
                continue
            if abs(abs(A + x * cos_tab[j]) - b1) > TOL_VERIFY * max(1.0, b1):
                continue
            ph = _rng.phi_scalar_from_row(row_key, j)
            if abs(abs(D + x * complex(math.cos(ph), math.sin(ph))) - b5) > TOL_VERIFY * max(1.0, b5):
                continue
            verified.append((j, x))
        pick = select_unique(verified)
        if pick is None:
            if cands:
                failures += 1
            continue
        j, x = pick
        ax = abs(x)
        if ax <= VALUE_FLOOR:
            continue
        value[j] = x
        mag[j] = ax
        resolved[j] = 1
        new_out[n_new] = j
        n_new += 1

    return n_new, attempts, failures, singles, degen, conflicts
