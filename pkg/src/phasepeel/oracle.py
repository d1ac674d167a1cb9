"""Independent reference implementations used by tests and acceptance runs.

Nothing here shares code paths with the decoder: the cancel-out oracle
solves by circle intersection instead of the quadratic in cos^2(alpha),
the consistency check re-encodes from scratch, and the coupon/component
helpers implement the counting formulas directly.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from ._cancel import VALUE_FLOOR
from .measure import IntensityBundle, MeasurementEnsemble, SparseSignal, angle_tables, encode

__all__ = [
    "ORACLE_TOL",
    "exhaustive_cancel_out",
    "consistency_residual",
    "consistency_check",
    "coupon_expected_distinct",
    "coupon_tail_bound",
    "largest_component_fraction",
]

# looser than the decoder's verification tolerance on purpose: the oracle
# must never reject a solution the decoder correctly accepts
ORACLE_TOL = 1e-6


def _five_residual(b, x, j, A, B, D, E, cos_tab, sin_tab, phi_j) -> float:
    """Largest mismatch of candidate x at index j against all five rows."""
    r1 = abs(abs(A + x * cos_tab[j]) - b[0])
    r2 = abs(abs(B + x * 1j * sin_tab[j]) - b[1])
    r3 = abs(abs((A + B) + x * (cos_tab[j] + 1j * sin_tab[j])) - b[2])
    r4 = abs(abs(E + x) - b[3])
    r5 = abs(abs(D + x * cmath.exp(1j * phi_j)) - b[4])
    return max(r1, r2, r3, r4, r5)


def _circle_intersections(c1: complex, r1: float, c2: complex, r2: float):
    """Intersection points of two circles in the complex plane.

    Returns a list of 0-2 points, or None when the circles coincide
    (infinitely many solutions).
    """
    d = abs(c1 - c2)
    if d <= 1e-12 * max(1.0, r1, r2):
        if abs(r1 - r2) <= 1e-9 * max(1.0, r1, r2):
            return None
        return []
    a = (d * d + r2 * r2 - r1 * r1) / (2.0 * d)
    h2 = r2 * r2 - a * a
    slack = 1e-9 * max(1.0, r1 * r1, r2 * r2)
    if h2 < -slack:
        return []
    h = math.sqrt(max(0.0, h2))
    u = (c1 - c2) / d
    base = c2 + a * u
    perp = 1j * u
    if h == 0.0:
        return [base]
    return [base + h * perp, base - h * perp]


def exhaustive_cancel_out(b, neighbors, resolved_values, n: int, phi, grid: int = 512):
    """All single-unknown solutions consistent with every measurement row.

    For each unresolved neighbor j the unknown x_j is pinned by two
    circles in the complex plane: |x_j + E| = b4 from the unit row and
    |x_j + A/cos_j| = b1/cos_j from the cosine row (the sine row stands
    in at j = n where cos_j = 0).  Their intersections (the law-of-cosines
    construction, both signs) are then filtered against all five rows at
    ORACLE_TOL.  When the two circles coincide the b4 circle is swept at
    `grid` resolution instead.  Returns every surviving (j, x_j) pair;
    values at or below the zero floor are dropped.
    """
    res = [t for t in neighbors if t in resolved_values]
    if not res:
        return []
    cos_tab, sin_tab = angle_tables(n)
    A = 0j
    Bs = 0j
    D = 0j
    E = 0j
    for t in res:
        xt = resolved_values[t]
        A += xt * cos_tab[t]
        Bs += xt * sin_tab[t]
        D += xt * cmath.exp(1j * phi(t))
        E += xt
    B = 1j * Bs

    out: list[tuple[int, complex]] = []
    for j in neighbors:
        j = int(j)
        if j in resolved_values:
            continue
        cj = float(cos_tab[j])
        sj = float(sin_tab[j])
        c_b4, r_b4 = -E, float(b[3])
        if abs(cj) > 1e-12:
            c_other, r_other = -A / cj, float(b[0]) / cj
        else:
            # j = n: the cosine row carries no trace of x_j; use the sine row
            c_other, r_other = -B / (1j * sj), float(b[1]) / sj
        pts = _circle_intersections(c_other, r_other, c_b4, r_b4)
        if pts is None:
            # coincident circles: sweep the b4 circle directly
            pts = [
                c_b4 + r_b4 * cmath.exp(2j * math.pi * g / grid)
                for g in range(grid)
            ]
        phi_j = phi(j)
        seen: list[complex] = []
        for x in pts:
            if abs(x) <= VALUE_FLOOR:
                continue
            if _five_residual(b, x, j, A, B, D, E, cos_tab, sin_tab, phi_j) > ORACLE_TOL:
                continue
            if any(abs(x - y) <= 1e-9 * max(1.0, abs(x)) for y in seen):
                continue
            seen.append(x)
            out.append((j, x))
    return out


def consistency_residual(
    ens: MeasurementEnsemble, xhat: SparseSignal, bundle: IntensityBundle
) -> float:
    """Max absolute mismatch between re-encoded intensities and the bundle."""
    re = encode(ens, xhat)
    worst = 0.0
    for got, want in zip(re.phases, bundle.phases):
        if got.shape != want.shape:
            raise ValueError("bundle shape mismatch")
        if got.size:
            worst = max(worst, float(np.max(np.abs(got - want))))
    return worst


def consistency_check(
    ens: MeasurementEnsemble,
    xhat: SparseSignal,
    bundle: IntensityBundle,
    tol: float = 1e-6,
) -> bool:
    """b = |A xhat| reproduces the bundle within tol, all m rows."""
    return consistency_residual(ens, xhat, bundle) <= tol


def coupon_expected_distinct(V: int, M: int) -> float:
    """Expected distinct coupons after M uniform draws from V kinds."""
    if V < 1 or M < 0:
        raise ValueError("need V >= 1 and M >= 0")
    return V * (1.0 - (1.0 - 1.0 / V) ** M)


def coupon_tail_bound(V: int, eta: float) -> float:
    """Upper bound on P[full collection needs more than eta*V*log(V) draws]."""
    if V < 2 or eta <= 0:
        raise ValueError("need V >= 2 and eta > 0")
    return float(V) ** (1.0 - eta)


class _UnionFind:
    __slots__ = ("parent", "size")

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)
        self.size = np.ones(n, dtype=np.int64)

    def find(self, a: int) -> int:
        p = self.parent
        root = a
        while p[root] != root:
            root = p[root]
        while p[a] != root:
            p[a], a = root, p[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def largest_component_fraction(n_nodes: int, n_edges: int, seed: int) -> float:
    """Fraction of nodes in the largest component of a uniform random
    multigraph with n_edges edges (self-loops allowed, harmless)."""
    rng = np.random.default_rng(seed)
    us = rng.integers(0, n_nodes, size=n_edges)
    vs = rng.integers(0, n_nodes, size=n_edges)
    uf = _UnionFind(n_nodes)
    for u, v in zip(us, vs):
        uf.union(int(u), int(v))
    best = 0
    for i in range(n_nodes):
        if uf.parent[i] == i and uf.size[i] > best:
            best = int(uf.size[i])
    return best / n_nodes
