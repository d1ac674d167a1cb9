"""Three-phase sparse phase retrieval decoder.

Phase 1 (seeding) works on the densest graph: identify singleton right
nodes and recover magnitudes, identify resolvable doubletons and recover
signed relative phases, then anchor the largest connected component of
the implied relative-phase graph H at phase zero.  Phase 2 runs one
cancelling-out sweep per geometric-decay stage graph.  Phase 3 sweeps
the cleanup graph to a fixpoint.  All recovered phases live in the
frame of the phase-1 anchor, which is the global-phase degree of
freedom of the problem.
"""

from __future__ import annotations

import cmath
import math
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, _rng
from ._cancel import (
    CONFLICT_TOL,
    COS_EPS,
    TOL_INT,
    TOL_VERIFY,
    VALUE_FLOOR,
    candidate_solutions,
    select_unique,
)
from .measure import (
    IntensityBundle,
    MeasurementEnsemble,
    SparseSignal,
    angle_tables,
)

__all__ = [
    "TOL_INT",
    "TOL_VERIFY",
    "TOL_COS",
    "TOL_PHASE",
    "DecodeStats",
    "RecoveryResult",
    "DecoderState",
    "try_singleton",
    "verify_singleton",
    "doubleton_relative_phase",
    "resolve_doubleton_sign",
    "giant_component",
    "cancel_out",
    "run_seeding",
    "run_stage",
    "run_cleanup",
    "decode",
    "equal_up_to_global_phase",
]

# slack on the pre-clamp law-of-cosines cosine when testing doubletons
TOL_COS = 1e-8
# cycle-consistency slack (radians) for redundant relative-phase edges
TOL_PHASE = 1e-6


def try_singleton(b, n: int):
    """Tentative singleton read of one 5-tuple of intensities.

    Returns (j, magnitude) when the trigonometric ratio lands on an
    integer index, else None.  The caller must still verify the
    candidate; a multiton can land on an integer by accident.
    """
    b1, b2 = float(b[0]), float(b[1])
    if b1 <= 0.0 and b2 <= 0.0:
        return None
    unit = math.pi / (2.0 * n)
    s = math.atan2(b2, b1) / unit
    j = round(s)
    if abs(s - j) > TOL_INT or j < 1 or j > n:
        return None
    cos_tab, sin_tab = angle_tables(n)
    cj = cos_tab[j]
    magnitude = b1 / cj if abs(cj) > COS_EPS else b2 / sin_tab[j]
    return j, float(magnitude)


def verify_singleton(candidate, b5: float) -> bool:
    """Check a singleton candidate against the random-phase row.

    A true singleton has b5 = |x_j| exactly; anything else agrees only
    on a measure-zero set of the random phase.
    """
    _, magnitude = candidate
    return abs(magnitude - b5) <= TOL_VERIFY * max(1.0, b5)


def doubleton_relative_phase(mag_u: float, mag_v: float, b4: float):
    """Unsigned relative phase of a two-component node via law of cosines.

    Returns theta in [0, pi], or None when the implied cosine exceeds 1
    in magnitude beyond tolerance (the node holds more than these two
    components).  The +/- sign ambiguity is NOT resolved here.
    """
    c = (b4 * b4 - mag_u * mag_u - mag_v * mag_v) / (2.0 * mag_u * mag_v)
    if abs(c) > 1.0 + TOL_COS:
        return None
    return math.acos(min(1.0, max(-1.0, c)))


def resolve_doubleton_sign(u, v, mag_u, mag_v, theta, phi_u, phi_v, b5):
    """Pick the sign of a doubleton's relative phase using the b5 row.

    Tests |mag_u e^{i phi_u} + mag_v e^{i(phi_v +/- theta)}| against b5.
    Returns the signed theta, or None when neither branch matches (the
    node was not a resolvable doubleton) or both match ambiguously.
    """
    tol = TOL_VERIFY * max(1.0, b5)
    base_u = mag_u * cmath.exp(1j * phi_u)
    plus = abs(abs(base_u + mag_v * cmath.exp(1j * (phi_v + theta))) - b5) <= tol
    minus = abs(abs(base_u + mag_v * cmath.exp(1j * (phi_v - theta))) - b5) <= tol
    if plus and minus:
        # identical branches at theta in {0, pi}; anything else is ambiguous
        return theta if abs(math.sin(theta)) <= 1e-9 else None
    if plus:
        return theta
    if minus:
        return -theta
    return None


def giant_component(nodes, H_edges):
    """Largest connected component of the relative-phase graph H.

    H_edges holds (u, v, delta) with delta = phase(v) - phase(u).
    Returns (component set, phase map) where the BFS root of the winning
    component is pinned at phase 0 and every tree edge propagates its
    signed delta.  Isolated nodes count as size-1 components; ties go to
    the component with the smallest root index.
    """
    adj: dict[int, list[tuple[int, float]]] = {}
    for u, v, delta in H_edges:
        adj.setdefault(u, []).append((v, delta))
        adj.setdefault(v, []).append((u, -delta))

    best_nodes: list[int] = []
    best_phases: dict[int, float] = {}
    seen: set[int] = set()
    for root in sorted(nodes):
        if root in seen:
            continue
        comp = [root]
        phases = {root: 0.0}
        seen.add(root)
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v, delta in adj.get(u, ()):
                if v in phases:
                    continue
                phases[v] = phases[u] + delta
                seen.add(v)
                comp.append(v)
                queue.append(v)
        if len(comp) > len(best_nodes):
            best_nodes = comp
            best_phases = phases
    return set(best_nodes), best_phases


def cancel_out(b, neighbors, resolved_values, n: int, phi):
    """Recover the single unknown component of one right node, if any.

    b is the node's 5-tuple, neighbors its adjacency list, resolved_values
    maps already-recovered indices to complex values, and phi maps a left
    index j to this node's random phase phi_{i,j}.  Returns (j, x_j) when
    exactly one candidate from the closed form survives verification
    against the b1 and b5 rows, else None.  Requires at least one
    resolved neighbor to cancel against.
    """
    res = [t for t in neighbors if t in resolved_values]
    if not res:
        return None
    cos_tab, sin_tab = angle_tables(n)
    A = 0j
    Bs = 0.0j
    D = 0j
    for t in res:
        xt = resolved_values[t]
        A += xt * cos_tab[t]
        Bs += xt * sin_tab[t]
        D += xt * cmath.exp(1j * phi(t))
    B = 1j * Bs

    b1, b2, b3, _b4, b5 = (float(v) for v in b)
    cands, _ = candidate_solutions(b1, b2, b3, A, B, n)
    if not cands:
        return None
    neighbor_set = set(int(t) for t in neighbors)
    verified = []
    for j, x, _cs, _sn in cands:
        if j in resolved_values or j not in neighbor_set:
            continue
        if abs(abs(A + x * cos_tab[j]) - b1) > TOL_VERIFY * max(1.0, b1):
            continue
        if abs(abs(D + x * cmath.exp(1j * phi(j))) - b5) > TOL_VERIFY * max(1.0, b5):
            continue
        verified.append((j, x))
    pick = select_unique(verified)
    if pick is None or abs(pick[1]) <= VALUE_FLOOR:
        return None
    return pick


@dataclass
class DecodeStats:
    """Per-trial counters; decode_ns covers the three decoding phases."""

    n_singletons: int = 0
    n_doubletons: int = 0
    giant_size: int = 0
    stage_resolved: tuple = ()
    cleanup_resolved: int = 0
    cleanup_sweeps: int = 0
    cancel_attempts: int = 0
    cancel_failures: int = 0
    singleton_hits: int = 0
    degenerate_skips: int = 0
    conflicts: int = 0
    resolved_count: int = 0
    decode_ns: int = 0
    failure_reason: str | None = None


@dataclass(frozen=True)
class RecoveryResult:
    estimate: SparseSignal
    success: bool
    stats: DecodeStats


@dataclass
class DecoderState:
    """Mutable per-trial state shared by the three decoding phases.

    value/mag/resolved are dense over [0, n] (slot 0 unused) so the
    sweep kernels can index by left node directly.
    """

    n: int
    k: int
    phi_keys: tuple
    cos_tab: np.ndarray
    sin_tab: np.ndarray
    value: np.ndarray
    mag: np.ndarray
    resolved: np.ndarray
    resolved_count: int = 0
    failed: bool = False
    failure_reason: str | None = None
    neighbor_lists: dict = field(default_factory=dict)
    doubleton_list: list = field(default_factory=list)
    H_edges: list = field(default_factory=list)
    stats: DecodeStats = field(default_factory=DecodeStats)
    _new_buf: np.ndarray | None = None

    @classmethod
    def for_ensemble(cls, ens: MeasurementEnsemble, k: int) -> "DecoderState":
        n = ens.n
        cos_tab, sin_tab = angle_tables(n)
        return cls(
            n=n,
            k=k,
            phi_keys=ens.phi_keys,
            cos_tab=cos_tab,
            sin_tab=sin_tab,
            value=np.zeros(n + 1, dtype=np.complex128),
            mag=np.zeros(n + 1, dtype=np.float64),
            resolved=np.zeros(n + 1, dtype=np.uint8),
            _new_buf=np.empty(max(1, k), dtype=np.int64),
        )

    @property
    def magnitudes(self) -> dict[int, float]:
        js = np.flatnonzero(self.mag > 0.0)
        return {int(j): float(self.mag[j]) for j in js}

    @property
    def phases(self) -> dict[int, float]:
        js = np.flatnonzero(self.resolved)
        return {int(j): float(np.angle(self.value[j])) for j in js}

    @property
    def resolved_set(self) -> set[int]:
        return {int(j) for j in np.flatnonzero(self.resolved)}

    def _mark_failed(self, reason: str) -> None:
        self.failed = True
        if self.failure_reason is None:
            self.failure_reason = reason
            self.stats.failure_reason = reason


def _wrap_phase(t: float) -> float:
    return math.remainder(t, 2.0 * math.pi)


def run_seeding(b: np.ndarray, graph, state: DecoderState) -> DecoderState:
    """Seeding pass: singletons, resolvable doubletons, giant component.

    b is the (n_right, 5) intensity block of the seeding graph.  On
    return state.resolved holds the giant component of H with phases in
    the root frame; everything outside it is demoted back to unknown.
    """
    n = state.n
    cos_tab, sin_tab = state.cos_tab, state.sin_tab
    unit = math.pi / (2.0 * n)
    b1 = b[:, 0]
    b2 = b[:, 1]
    b4 = b[:, 3]
    b5 = b[:, 4]

    # vectorized try_singleton + verify_singleton over all right nodes
    s = np.arctan2(b2, b1) / unit
    j = np.rint(s).astype(np.int64)
    ok = (np.abs(s - j) <= TOL_INT) & (j >= 1) & (j <= n) & ((b1 > 0) | (b2 > 0))
    jc = np.clip(j, 0, n)
    cj = cos_tab[jc]
    safe_cos = np.abs(cj) > COS_EPS
    mag_cos = np.divide(b1, cj, out=np.zeros_like(b1), where=safe_cos)
    mag_sin = np.divide(b2, sin_tab[jc], out=np.zeros_like(b2), where=~safe_cos)
    m = np.where(safe_cos, mag_cos, mag_sin)
    ok &= np.abs(m - b5) <= TOL_VERIFY * np.maximum(1.0, b5)
    ok &= m > 0.0

    rows = np.flatnonzero(ok)
    js = j[rows]
    ms = m[rows]
    uniq, first = np.unique(js, return_index=True)
    state.stats.n_singletons = int(uniq.size)
    if uniq.size != js.size:
        # same index witnessed by several nodes: magnitudes must agree
        order = np.argsort(js, kind="stable")
        js_s, ms_s = js[order], ms[order]
        starts = np.searchsorted(js_s, uniq)
        ref = np.repeat(ms_s[starts], np.diff(np.append(starts, js_s.size)))
        if np.any(np.abs(ms_s - ref) > CONFLICT_TOL * np.maximum(1.0, ref)):
            state._mark_failed("conflicting singleton magnitudes")
        state.mag[uniq] = ms_s[starts]
    else:
        state.mag[js] = ms

    # neighbor lists over discovered indices; |N(i)| >= 3 drops the node
    disc = np.zeros(n + 1, dtype=bool)
    disc[uniq] = True
    hit = np.flatnonzero(disc[graph.indices])
    pairs: list[tuple[int, int, int]] = []
    if hit.size:
        hrows = np.searchsorted(graph.indptr, hit, side="right") - 1
        hcols = graph.indices[hit].astype(np.int64)
        occ, starts = np.unique(hrows, return_index=True)
        counts = np.diff(np.append(starts, hrows.size))
        for i, st, ct in zip(occ, starts, counts):
            state.neighbor_lists[int(i)] = tuple(
                int(c) for c in hcols[st : st + min(ct, 3)]
            )
        two = counts == 2
        pairs = [
            (int(i), int(hcols[st]), int(hcols[st + 1]))
            for i, st in zip(occ[two], starts[two])
        ]
    state.doubleton_list = pairs

    phi_key = state.phi_keys[0]
    for i, u, v in pairs:
        theta = doubleton_relative_phase(state.mag[u], state.mag[v], float(b4[i]))
        if theta is None:
            continue
        phi_u = _rng.phi_scalar(phi_key, i, u)
        phi_v = _rng.phi_scalar(phi_key, i, v)
        signed = resolve_doubleton_sign(
            u, v, state.mag[u], state.mag[v], theta, phi_u, phi_v, float(b5[i])
        )
        if signed is None:
            continue
        state.H_edges.append((u, v, signed))
    state.stats.n_doubletons = len(state.H_edges)

    comp, phases = giant_component([int(x) for x in uniq], state.H_edges)

    # redundant edges inside the component must agree with the BFS tree
    for u, v, delta in state.H_edges:
        if u in comp and v in comp:
            if abs(_wrap_phase(phases[v] - phases[u] - delta)) > TOL_PHASE:
                state._mark_failed("inconsistent phase cycle in H")
                break

    # demote everything outside the giant component; resolve the inside
    for jx in uniq:
        ji = int(jx)
        if ji not in comp:
            state.mag[ji] = 0.0
    for ji, th in phases.items():
        state.value[ji] = state.mag[ji] * cmath.exp(1j * th)
        state.resolved[ji] = 1
    state.resolved_count = len(comp)
    state.stats.giant_size = len(comp)
    state.stats.resolved_count = state.resolved_count
    return state


def _sweep(b, graph, state: DecoderState, phase: int, attempt_singletons: bool) -> int:
    n_new, att, fail, sing, degen, confl = _kernels.multiton_sweep(
        graph.indptr,
        graph.indices,
        b,
        state.n,
        state.phi_keys[phase],
        state.cos_tab,
        state.sin_tab,
        state.value,
        state.mag,
        state.resolved,
        state.resolved_count,
        state.k,
        attempt_singletons,
        state._new_buf,
    )
    st = state.stats
    st.cancel_attempts += att
    st.cancel_failures += fail
    st.singleton_hits += sing
    st.degenerate_skips += degen
    st.conflicts += confl
    state.resolved_count += n_new
    st.resolved_count = state.resolved_count
    if confl:
        state._mark_failed("conflicting recoveries in sweep")
    return n_new


def run_stage(b: np.ndarray, graph, state: DecoderState, phase: int) -> DecoderState:
    """One cancelling-out sweep over a geometric-decay stage graph.

    Newly resolved components are visible to later nodes of the same
    sweep.  Right nodes with no resolved neighbor get a free singleton
    attempt whose verified magnitude is kept for statistics (it cannot
    join the phase frame).
    """
    n_new = _sweep(b, graph, state, phase, attempt_singletons=True)
    state.stats.stage_resolved = state.stats.stage_resolved + (n_new,)
    return state


def run_cleanup(b: np.ndarray, graph, state: DecoderState, phase: int) -> DecoderState:
    """Sweep the cleanup graph until no progress or all k resolved."""
    n_right = graph.n_right
    sweeps = 0
    while state.resolved_count < state.k and sweeps < n_right and not state.failed:
        n_new = _sweep(b, graph, state, phase, attempt_singletons=False)
        sweeps += 1
        state.stats.cleanup_resolved += n_new
        if n_new == 0:
            break
    state.stats.cleanup_sweeps = sweeps
    return state


def decode(ens: MeasurementEnsemble, bundle: IntensityBundle, k: int) -> RecoveryResult:
    """Full three-phase reconstruction of an exactly k-sparse signal.

    Returns success=False (never raises) when fewer than k components
    resolve or a verification conflict poisons the trial; raises only on
    structural mismatch between ensemble and bundle.
    """
    if len(bundle.phases) != ens.n_phases:
        raise ValueError(
            f"bundle has {len(bundle.phases)} phases, ensemble {ens.n_phases}"
        )
    for arr, graph in zip(bundle.phases, ens.graphs):
        if arr.shape != (graph.n_right, 5):
            raise ValueError(
                f"bundle block {arr.shape} does not match graph ({graph.n_right}, 5)"
            )
    if k < 1:
        raise ValueError("k must be >= 1")

    state = DecoderState.for_ensemble(ens, k)
    n_stages = ens.n_phases - 2

    t0 = time.perf_counter_ns()
    run_seeding(bundle.phases[0], ens.graphs[0], state)
    if not state.failed and state.resolved_count > 0:
        for l in range(1, n_stages + 1):
            if state.failed or state.resolved_count >= k:
                break
            run_stage(bundle.phases[l], ens.graphs[l], state, l)
        if not state.failed:
            run_cleanup(bundle.phases[-1], ens.graphs[-1], state, ens.n_phases - 1)
    t1 = time.perf_counter_ns()

    pad = n_stages - len(state.stats.stage_resolved)
    if pad > 0:
        state.stats.stage_resolved = state.stats.stage_resolved + (0,) * pad
    state.stats.decode_ns = t1 - t0
    state.stats.resolved_count = state.resolved_count

    js = np.flatnonzero(state.resolved).astype(np.int64)
    estimate = SparseSignal(n=ens.n, indices=js, values=state.value[js])
    success = (state.resolved_count == k) and not state.failed
    return RecoveryResult(estimate=estimate, success=success, stats=state.stats)


def equal_up_to_global_phase(xhat: SparseSignal, x: SparseSignal, tol: float) -> bool:
    """True when xhat matches x after the best global phase rotation.

    The optimal rotation is Theta* = arg(sum conj(xhat_j) x_j); supports
    must match exactly.
    """
    if xhat.n != x.n:
        raise ValueError("signals have different lengths")
    if not np.array_equal(xhat.indices, x.indices):
        return False
    if x.k == 0:
        return True
    inner = np.sum(np.conj(xhat.values) * x.values)
    theta = np.angle(inner)
    return bool(np.max(np.abs(xhat.values - x.values * np.exp(-1j * theta))) <= tol)
