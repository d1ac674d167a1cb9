"""Shared builders for forward-simulated instances.

Tests construct measurement tuples directly from planted signals so the
decoder / oracle are exercised against ground truth that was never
produced by the code under test.
"""

import cmath
import math

import numpy as np

from phasepeel import _rng
from phasepeel.ensemble import BipartiteGraph


def five_tuple(entries, n, phi_of):
    """Measurements (b1..b5) of one right node.

    entries: list of (j, x_j) pairs hitting the node.
    phi_of:  callable j -> phi in [0, pi/2) for the random-phase row.
    """
    unit = math.pi / (2.0 * n)
    s1 = s2 = s3 = s4 = s5 = 0.0 + 0.0j
    for j, x in entries:
        a = j * unit
        s1 += math.cos(a) * x
        s2 += math.sin(a) * x  # the i factor drops out of the modulus
        s3 += cmath.exp(1j * a) * x
        s4 += x
        s5 += cmath.exp(1j * phi_of(j)) * x
    return (abs(s1), abs(s2), abs(s3), abs(s4), abs(s5))


def make_cancel_instance(rng, n, n_resolved, n_unknown, key=0xD1CE, row=0):
    """Random cancelling-out instance with planted ground truth.

    Returns (b, neighbors, resolved_values, phi, unknowns) where
    unknowns is the list of (j, x_j) pairs not present in
    resolved_values.
    """
    total = n_resolved + n_unknown
    support = sorted(rng.choice(np.arange(1, n + 1), size=total, replace=False))
    moduli = rng.uniform(0.5, 10.0, size=total)
    args = rng.uniform(0.0, 2.0 * math.pi, size=total)
    values = [m * cmath.exp(1j * a) for m, a in zip(moduli, args)]
    entries = list(zip((int(j) for j in support), values))

    which = rng.permutation(total)
    resolved_values = {entries[t][0]: entries[t][1] for t in which[:n_resolved]}
    unknowns = [entries[t] for t in which[n_resolved:]]

    phi = lambda j: _rng.phi_scalar(key, row, j)
    b = five_tuple(entries, n, phi)
    neighbors = [j for j, _ in entries]
    return b, neighbors, resolved_values, phi, unknowns


def graph_from_rows(n_left, rows):
    """BipartiteGraph with explicit adjacency lists (each sorted)."""
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    for i, r in enumerate(rows):
        indptr[i + 1] = indptr[i] + len(r)
    flat = [j for r in rows for j in r]
    indices = np.asarray(flat, dtype=np.int32)
    return BipartiteGraph(n_left=n_left, indptr=indptr, indices=indices)


def seeding_rows(n, singletons, doubletons, phi_key):
    """Craft a seeding-phase instance from planted rows.

    singletons: list of (j, mag); one right node each.
    doubletons: list of (u, v, mag_u, mag_v, delta) with delta the
        phase of v relative to u; one right node each, adjacency {u, v}.
    Returns (graph, b_block) ready for run_seeding.
    """
    unit = math.pi / (2.0 * n)
    rows = []
    bs = []
    for j, m in singletons:
        rows.append([j])
        bs.append([m * math.cos(j * unit), m * math.sin(j * unit), m, m, m])
    for u, v, mu, mv, delta in doubletons:
        i = len(rows)
        rows.append(sorted((u, v)))
        xu, xv = mu, mv * cmath.exp(1j * delta)
        phi_u = _rng.phi_scalar(phi_key, i, u)
        phi_v = _rng.phi_scalar(phi_key, i, v)
        b1 = abs(math.cos(u * unit) * xu + math.cos(v * unit) * xv)
        b2 = abs(math.sin(u * unit) * xu + math.sin(v * unit) * xv)
        b3 = abs(cmath.exp(1j * u * unit) * xu + cmath.exp(1j * v * unit) * xv)
        b4 = abs(xu + xv)
        b5 = abs(cmath.exp(1j * phi_u) * xu + cmath.exp(1j * phi_v) * xv)
        bs.append([b1, b2, b3, b4, b5])
    graph = graph_from_rows(n, rows)
    return graph, np.asarray(bs, dtype=np.float64)
