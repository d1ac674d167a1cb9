"""Closed form for recovering the single unknown inside one measurement group.

Setting: a right node whose five intensities b1..b5 mix a set of already
resolved components (with partial sums A over the cosine row, B over the
sine row, D over the random-phase row) and exactly one unknown component
x_j at unknown index j.  Writing alpha = j*pi/2n,

    b1 = |A + x_j cos(alpha)|      b2 = |B + x_j i sin(alpha)|
    b3 = |(A+B) + x_j e^{i alpha}|

Eliminating x_j between the first two rows gives U = M V with
U = A + x_j cos(alpha), V = B + x_j i sin(alpha), |M| = b1/b2 and the
angle of M known up to sign from the law of cosines on (b1, b2, b3).
Substituting x_j = (BM - A)/(cos(alpha) - i M sin(alpha)) back into
|U| = b1 and squaring twice yields a quadratic in S = cos^2(alpha):

    ((P - Q)^2 + 4 R^2) S^2 + (2PQ - 2Q^2 - 4R^2) S + Q^2 = 0

with P = b2^2 - |B|^2, Q = b1^2 - |A|^2 and
R = Im(A) Re(B) - Re(A) Im(B) - b2^2 Im(M).  Each real root in [0, 1]
proposes an index j = round(alpha/(pi/2n)); wrong sign branches and
spurious roots are killed by verifying the b1 and b5 rows directly.
"""

from __future__ import annotations

import cmath
import math

# integer test on recovered indices (absolute, in units of pi/2n)
TOL_INT = 1e-6
# relative tolerance of the b1/b5 verification tests
TOL_VERIFY = 1e-8
# leading quadratic coefficient below this is treated as linear
LEAD_EPS = 1e-12
# |BM - A| below this (relative) means no unknown is present; skip
DEGEN_EPS = 1e-10
# recovered values this small are indistinguishable from zero entries
VALUE_FLOOR = 1e-9
# two recoveries of the same index disagreeing beyond this (relative)
# mean a verification false positive; the trial is marked failed
CONFLICT_TOL = 1e-6
# cosine-table values at or below this are treated as an exact zero
# (only the j = n boundary angle pi/2 lands here)
COS_EPS = 1e-12


def candidate_solutions(
    b1: float, b2: float, b3: float, A: complex, B: complex, n: int
) -> tuple[list[tuple[int, complex, float, float]], bool]:
    """Enumerate closed-form candidates (j, x_j, cos_a, sin_a).

    Returns (candidates, degenerate_seen).  Candidates pass the
    integer-index test with j in [1, n]; adjacency membership,
    resolved-state filtering and the b1/b5 verification are up to the
    caller.  At most four candidates are produced (two sign choices of
    the law-of-cosines angle, two roots each).
    """
    if b1 <= 0.0 or b2 <= 0.0:
        return [], False

    cpsi = (b3 * b3 - b1 * b1 - b2 * b2) / (2.0 * b1 * b2)
    if abs(cpsi) > 1.0 + 1e-9:
        # no triangle with these side lengths: not a resolvable multiton
        return [], False
    cpsi = min(1.0, max(-1.0, cpsi))
    psi = math.acos(cpsi)
    ratio = b1 / b2
    unit = math.pi / (2.0 * n)

    absA, absB = abs(A), abs(B)
    scale = max(1.0, absA, absB * ratio)
    out: list[tuple[int, complex, float, float]] = []
    degenerate = False

    signs = (1.0,) if psi == 0.0 or psi == math.pi else (1.0, -1.0)
    for sgn in signs:
        M = complex(ratio * math.cos(psi), sgn * ratio * math.sin(psi))
        P = b2 * b2 - absB * absB
        Q = b1 * b1 - absA * absA
        R = A.imag * B.real - A.real * B.imag - b2 * b2 * M.imag
        a2 = (P - Q) * (P - Q) + 4.0 * R * R
        a1 = 2.0 * P * Q - 2.0 * Q * Q - 4.0 * R * R
        a0 = Q * Q

        if abs(a2) < LEAD_EPS:
            if abs(a1) < LEAD_EPS:
                degenerate = True
                continue
            roots = [-a0 / a1]
        else:
            disc = a1 * a1 - 4.0 * a2 * a0
            if disc < 0.0:
                if disc > -1e-12 * (a1 * a1 + abs(4.0 * a2 * a0)):
                    disc = 0.0
                else:
                    continue
            sq = math.sqrt(disc)
            roots = [(-a1 + sq) / (2.0 * a2), (-a1 - sq) / (2.0 * a2)]
            # one Newton step per root to tighten S before the index test
            for idx, S in enumerate(roots):
                d = 2.0 * a2 * S + a1
                if d != 0.0:
                    roots[idx] = S - (a2 * S * S + a1 * S + a0) / d

        for S in roots:
            if S < 0.0:
                if S < -1e-12:
                    continue
                S = 0.0
            if S > 1.0:
                if S > 1.0 + 1e-12:
                    continue
                S = 1.0
            ca = math.sqrt(S)
            sa = math.sqrt(max(0.0, 1.0 - S))
            alpha = math.atan2(sa, ca)
            jf = alpha / unit
            j = round(jf)
            if abs(jf - j) > TOL_INT or j < 1 or j > n:
                continue
            num = B * M - A
            if abs(num) <= DEGEN_EPS * scale:
                # nothing left to cancel out: the unknown is absent
                degenerate = True
                continue
            # snap to the integer angle before solving for the value; for a
            # true candidate this is the exact alpha and sharpens x_j
            csj = math.cos(j * unit)
            snj = math.sin(j * unit)
            den = complex(csj, 0.0) - 1j * M * snj
            if abs(den) < 1e-14:
                continue
            x = num / den
            if abs(x) <= VALUE_FLOOR:
                continue
            out.append((j, x, csj, snj))

    return out, degenerate


def verify_candidate(
    A: complex,
    D: complex,
    b1: float,
    b5: float,
    x: complex,
    cos_a: float,
    phi_j: float,
) -> bool:
    """Check a candidate against the b1 row and the random-phase b5 row."""
    if abs(abs(A + x * cos_a) - b1) > TOL_VERIFY * max(1.0, b1):
        return False
    return abs(abs(D + x * cmath.exp(1j * phi_j)) - b5) <= TOL_VERIFY * max(1.0, b5)


def select_unique(
    verified: list[tuple[int, complex]],
) -> tuple[int, complex] | None:
    """Collapse duplicates; return the single surviving candidate or None."""
    if not verified:
        return None
    first_j, first_x = verified[0]
    for j, x in verified[1:]:
        if j != first_j or abs(x - first_x) > 1e-6 * max(1.0, abs(first_x)):
            return None
    return first_j, first_x
