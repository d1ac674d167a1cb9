"""Measurement-row families and intensity encoding.

Every right node i of a stage graph owns five measurement rows built from
the same adjacency list N(i).  The row families differ only in the scalar
entry placed at each left node j:

    q=1  cos(j*pi/2n)          real trigonometric ramp
    q=2  i*sin(j*pi/2n)        imaginary trigonometric ramp
    q=3  exp(i*j*pi/2n)        structured unit complex
    q=4  1                     plain unit
    q=5  exp(i*phi_ij)         random unit complex, phi_ij uniform [0, pi/2)

Intensities are b = |<row, x>|, computed straight from adjacency lists and
the signal support; the measurement matrix is never materialized.  phi_ij
is recomputed on demand from (seed, phase, i, j), never stored.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _rng
from .ensemble import (
    BipartiteGraph,
    EnsembleConfig,
    StageSchedule,
    build_graph,
    build_schedule,
)

__all__ = [
    "SparseSignal",
    "MeasurementEnsemble",
    "IntensityBundle",
    "angle_tables",
    "entry",
    "build_ensemble",
    "encode",
]


@lru_cache(maxsize=8)
def angle_tables(n: int):
    """Shared cos/sin lookup over the n+1 grid angles j*pi/2n, j = 0..n.

    The encoder and the decoder index the same tables, so a magnitude
    recovered as b1/cos_tab[j] reproduces the encoded modulus exactly.
    """
    angles = np.arange(n + 1, dtype=np.float64) * (math.pi / (2.0 * n))
    cos_tab = np.cos(angles)
    sin_tab = np.sin(angles)
    cos_tab.setflags(write=False)
    sin_tab.setflags(write=False)
    return cos_tab, sin_tab


def entry(q: int, j: int, n: int, phi: float | None = None) -> complex:
    """Scalar matrix entry for row family q at left node j.

    phi is the random phase and is consulted only for q = 5.
    """
    if not 1 <= q <= 5:
        raise IndexError(f"row family q={q} out of range [1, 5]")
    if not 1 <= j <= n:
        raise IndexError(f"left index j={j} out of range [1, {n}]")
    ang = j * math.pi / (2.0 * n)
    if q == 1:
        return complex(math.cos(ang), 0.0)
    if q == 2:
        return complex(0.0, math.sin(ang))
    if q == 3:
        return cmath.exp(1j * ang)
    if q == 4:
        return 1.0 + 0.0j
    if phi is None:
        raise ValueError("q=5 entry requires phi")
    return cmath.exp(1j * phi)


@dataclass(frozen=True)
class SparseSignal:
    """Exactly k-sparse complex signal of length n.

    indices: sorted, distinct, 1-based support positions.
    values:  matching non-zero complex entries.
    """

    n: int
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.ascontiguousarray(self.indices, dtype=np.int64)
        val = np.ascontiguousarray(self.values, dtype=np.complex128)
        if idx.ndim != 1 or val.shape != idx.shape:
            raise ValueError("indices and values must be 1-D and same length")
        if idx.size:
            if idx[0] < 1 or idx[-1] > self.n:
                raise ValueError("support index out of range [1, n]")
            if np.any(np.diff(idx) <= 0):
                raise ValueError("support indices must be strictly increasing")
            if np.any(np.abs(val) <= 0.0):
                raise ValueError("support values must be non-zero")
        idx.setflags(write=False)
        val.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @classmethod
    def from_entries(cls, n: int, entries: dict[int, complex]) -> "SparseSignal":
        items = sorted(entries.items())
        idx = np.array([j for j, _ in items], dtype=np.int64)
        val = np.array([v for _, v in items], dtype=np.complex128)
        return cls(n=n, indices=idx, values=val)

    @property
    def k(self) -> int:
        return int(self.indices.size)

    @property
    def entries(self) -> dict[int, complex]:
        return {int(j): complex(v) for j, v in zip(self.indices, self.values)}

    def dense(self) -> np.ndarray:
        """Dense length-(n+1) array, slot 0 unused."""
        out = np.zeros(self.n + 1, dtype=np.complex128)
        out[self.indices] = self.values
        return out


@dataclass(frozen=True)
class MeasurementEnsemble:
    """Stage graphs plus the recomputable random-phase streams."""

    config: EnsembleConfig
    schedule: StageSchedule
    graphs: tuple
    phi_keys: tuple

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def m(self) -> int:
        return self.schedule.measurement_count

    @property
    def n_phases(self) -> int:
        return len(self.graphs)

    def phi(self, phase: int, i: int, j: int) -> float:
        """Random phase for phase graph `phase`, right node i (0-based row),
        left node j (1-based)."""
        return _rng.phi_scalar(self.phi_keys[phase], i, j)

    def phi_row(self, phase: int, i: int, cols: np.ndarray) -> np.ndarray:
        row_key = _rng.phi_row_key(self.phi_keys[phase], i)
        return _rng.phi_from_row_key(row_key, np.asarray(cols, dtype=np.uint64))


def build_ensemble(cfg: EnsembleConfig) -> MeasurementEnsemble:
    """Realize the stage schedule as concrete graphs and phase streams."""
    schedule = build_schedule(cfg)
    graphs = []
    phi_keys = []
    for phase in range(schedule.n_phases):
        edge_key = _rng.stream_key(cfg.seed, _rng.TAG_EDGE, phase)
        graphs.append(
            build_graph(
                n_left=cfg.n,
                n_right=schedule.right_counts[phase],
                edge_prob=schedule.edge_probs[phase],
                rng=edge_key,
            )
        )
        phi_keys.append(_rng.stream_key(cfg.seed, _rng.TAG_PHI, phase))
    return MeasurementEnsemble(
        config=cfg,
        schedule=schedule,
        graphs=tuple(graphs),
        phi_keys=tuple(phi_keys),
    )


@dataclass(frozen=True)
class IntensityBundle:
    """Per phase, per right node: the five non-negative intensities."""

    phases: tuple

    def __post_init__(self):
        for arr in self.phases:
            arr.setflags(write=False)

    @property
    def m(self) -> int:
        return int(sum(5 * arr.shape[0] for arr in self.phases))


def encode(ens: MeasurementEnsemble, x: SparseSignal) -> IntensityBundle:
    """Intensity measurements b = |Ax| for all phases of the ensemble.

    Cost is O(n + total edges into the support): each phase intersects its
    edge list with the support bitmap, then segment-sums the five entry
    families over the surviving edges.
    """
    if x.n != ens.n:
        raise ValueError(f"signal length {x.n} != ensemble length {ens.n}")
    n = ens.n
    cos_tab, sin_tab = angle_tables(n)

    member = np.zeros(n + 1, dtype=bool)
    member[x.indices] = True
    xval = np.zeros(n + 1, dtype=np.complex128)
    xval[x.indices] = x.values

    out = []
    for phase, graph in enumerate(ens.graphs):
        b = np.zeros((graph.n_right, 5), dtype=np.float64)
        hit = np.flatnonzero(member[graph.indices])
        if hit.size:
            cols = graph.indices[hit].astype(np.int64)
            rows = np.searchsorted(graph.indptr, hit, side="right") - 1
            occupied, starts = np.unique(rows, return_index=True)

            xv = xval[cols]
            cs = cos_tab[cols]
            sn = sin_tab[cols]
            phis = _rng.phi_edges(
                ens.phi_keys[phase],
                rows.astype(np.uint64),
                cols.astype(np.uint64),
            )

            b[occupied, 0] = np.abs(np.add.reduceat(xv * cs, starts))
            b[occupied, 1] = np.abs(np.add.reduceat(xv * sn, starts))
            b[occupied, 2] = np.abs(np.add.reduceat(xv * (cs + 1j * sn), starts))
            b[occupied, 3] = np.abs(np.add.reduceat(xv, starts))
            b[occupied, 4] = np.abs(np.add.reduceat(xv * np.exp(1j * phis), starts))
        out.append(b)
    return IntensityBundle(phases=tuple(out))
