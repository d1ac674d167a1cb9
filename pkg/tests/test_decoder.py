"""Decoder sub-steps against forward-simulated ground truth.

Synthetic seeding instances are crafted row by row (see conftest) so
singleton, doubleton, giant-component, demotion, and fail-fast behavior
can each be pinned deterministically.
"""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import five_tuple, make_cancel_instance, seeding_rows
from phasepeel import _rng
from phasepeel.cli import gen_signal
from phasepeel.decoder import (
    DecoderState,
    cancel_out,
    decode,
    doubleton_relative_phase,
    equal_up_to_global_phase,
    giant_component,
    resolve_doubleton_sign,
    run_seeding,
    try_singleton,
    verify_singleton,
)
from phasepeel.ensemble import EnsembleConfig
from phasepeel.measure import SparseSignal, angle_tables, build_ensemble, encode
from phasepeel.oracle import consistency_check


def fresh_state(n, k, phi_key):
    cos_tab, sin_tab = angle_tables(n)
    return DecoderState(
        n=n,
        k=k,
        phi_keys=(phi_key,),
        cos_tab=cos_tab,
        sin_tab=sin_tab,
        value=np.zeros(n + 1, dtype=np.complex128),
        mag=np.zeros(n + 1, dtype=np.float64),
        resolved=np.zeros(n + 1, dtype=np.uint8),
        _new_buf=np.empty(max(1, k), dtype=np.int64),
    )


def singleton_b(j, m, n):
    unit = math.pi / (2.0 * n)
    return (m * math.cos(j * unit), m * math.sin(j * unit), m, m, m)


# ---------------------------------------------------------------- try_singleton


def test_try_singleton_exhaustive_small_n():
    n = 64
    for j in range(1, n + 1):
        for m in (1e-3, 0.5, 1.0, 7.25, 1e3, 1e6):
            got = try_singleton(singleton_b(j, m, n), n)
            assert got is not None
            gj, gm = got
            assert gj == j
            assert gm == pytest.approx(m, rel=1e-9)


@settings(max_examples=200, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=100000),
    jfrac=st.floats(min_value=0.0, max_value=1.0, exclude_max=True),
    m=st.floats(min_value=1e-3, max_value=1e6),
)
def test_try_singleton_property_large_n(n, jfrac, m):
    j = 1 + int(jfrac * n)
    got = try_singleton(singleton_b(j, m, n), n)
    assert got is not None
    assert got[0] == j
    assert got[1] == pytest.approx(m, rel=1e-9)


def test_try_singleton_zeroton_and_boundary():
    assert try_singleton((0.0, 0.0, 0.0, 0.0, 0.0), 16) is None
    # j = n sits on the cos = 0 boundary; magnitude must come from b2
    got = try_singleton(singleton_b(16, 3.0, 16), 16)
    assert got == (16, pytest.approx(3.0, rel=1e-9))


def test_try_singleton_generic_doubleton_rejected():
    # two non-zeros at j=2 and j=5 with generic values: the angle ratio
    # is not near an integer, or the candidate fails verification
    n = 16
    phi = lambda j: 0.3 + 0.1 * j
    b = five_tuple([(2, 1.3 + 0.4j), (5, -0.7 + 2.1j)], n, phi)
    got = try_singleton(b, n)
    if got is not None:
        assert not verify_singleton(got, b[4])


# ---------------------------------------------------------------- verify_singleton


def test_verify_singleton_accept_reject():
    assert verify_singleton((3, 2.0), 2.0)
    assert verify_singleton((3, 2.0), 2.0 + 1e-9)
    assert not verify_singleton((3, 2.0), 1.5)
    assert not verify_singleton((3, 2.0), 2.0 + 1e-6)


def test_verify_singleton_no_false_accepts_on_doubletons():
    # random two-sparse rows must never be accepted as singletons
    n = 8
    key = _rng.stream_key(31, _rng.TAG_PHI, 0)
    rng = np.random.default_rng(606)
    accepts = 0
    for t in range(30000):
        u, v = sorted(rng.choice(np.arange(1, n + 1), size=2, replace=False))
        xu = rng.uniform(1, 5) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        xv = rng.uniform(1, 5) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        phi = lambda j, t=t: _rng.phi_scalar(key, t, j)
        b = five_tuple([(int(u), xu), (int(v), xv)], n, phi)
        got = try_singleton(b, n)
        if got is not None and verify_singleton(got, b[4]):
            accepts += 1
    assert accepts == 0


# ---------------------------------------------------------------- doubletons


def test_doubleton_relative_phase_unit_cases():
    assert doubleton_relative_phase(1.0, 1.0, 2.0) == pytest.approx(0.0, abs=1e-9)
    assert doubleton_relative_phase(1.0, 1.0, 0.0) == pytest.approx(
        math.pi, abs=1e-9
    )
    assert doubleton_relative_phase(1.0, 1.0, math.sqrt(2.0)) == pytest.approx(
        math.pi / 2, abs=1e-9
    )


def test_doubleton_relative_phase_rejects_impossible():
    # |b4| far above |x_u| + |x_v| cannot come from a doubleton
    assert doubleton_relative_phase(1.0, 1.0, 2.5) is None
    assert doubleton_relative_phase(1.0, 1.0, 2.0 + 1e-12) is not None


def test_resolve_doubleton_sign_recovers_planted():
    key = _rng.stream_key(17, _rng.TAG_PHI, 0)
    mu, mv, delta = 2.0, 3.0, 0.9
    phi_u = _rng.phi_scalar(key, 4, 3)
    phi_v = _rng.phi_scalar(key, 4, 11)
    b4 = abs(mu + mv * cmath.exp(1j * delta))
    b5 = abs(mu * cmath.exp(1j * phi_u) + mv * cmath.exp(1j * (phi_v + delta)))
    theta = doubleton_relative_phase(mu, mv, b4)
    assert theta == pytest.approx(delta, abs=1e-9)
    got = resolve_doubleton_sign(3, 11, mu, mv, theta, phi_u, phi_v, b5)
    assert got == pytest.approx(+0.9, abs=1e-9)
    # flipped planted sign comes back negative
    b5m = abs(mu * cmath.exp(1j * phi_u) + mv * cmath.exp(1j * (phi_v - delta)))
    got = resolve_doubleton_sign(3, 11, mu, mv, theta, phi_u, phi_v, b5m)
    assert got == pytest.approx(-0.9, abs=1e-9)


def test_resolve_doubleton_sign_tripleton_rejected():
    key = _rng.stream_key(17, _rng.TAG_PHI, 0)
    phi = lambda j: _rng.phi_scalar(key, 9, j)
    entries = [(3, 2.0 + 0j), (7, 1.5 * cmath.exp(0.8j)), (11, 2.5 * cmath.exp(2.2j))]
    b = five_tuple(entries, 16, phi)
    # pretend the row were the doubleton (3, 11)
    theta = doubleton_relative_phase(2.0, 2.5, b[3])
    if theta is not None:
        got = resolve_doubleton_sign(3, 11, 2.0, 2.5, theta, phi(3), phi(11), b[4])
        assert got is None


def test_resolve_doubleton_sign_zero_theta():
    key = _rng.stream_key(17, _rng.TAG_PHI, 1)
    phi_u, phi_v = _rng.phi_scalar(key, 0, 1), _rng.phi_scalar(key, 0, 2)
    b5 = abs(1.0 * cmath.exp(1j * phi_u) + 1.0 * cmath.exp(1j * phi_v))
    got = resolve_doubleton_sign(1, 2, 1.0, 1.0, 0.0, phi_u, phi_v, b5)
    assert got == 0.0


# ---------------------------------------------------------------- giant component


def test_giant_component_chain_phases():
    comp, phases = giant_component([1, 2, 3], [(1, 2, 0.3), (2, 3, 0.4)])
    assert comp == {1, 2, 3}
    assert phases[1] == pytest.approx(0.0, abs=1e-12)
    assert phases[2] == pytest.approx(0.3, abs=1e-12)
    assert phases[3] == pytest.approx(0.7, abs=1e-12)


def test_giant_component_picks_largest():
    edges = [(1, 2, 0.1), (2, 3, 0.1), (3, 4, 0.1), (4, 5, 0.1), (6, 7, 0.2), (7, 8, 0.2)]
    comp, _ = giant_component([1, 2, 3, 4, 5, 6, 7, 8], edges)
    assert comp == {1, 2, 3, 4, 5}


def test_giant_component_tie_and_isolated():
    comp, phases = giant_component([1, 2, 3, 4], [(1, 2, 0.1), (3, 4, 0.2)])
    assert comp == {1, 2}  # tie broken toward the smallest root
    comp, phases = giant_component([7], [])
    assert comp == {7}
    assert phases == {7: 0.0}
    comp, phases = giant_component([], [])
    assert comp == set()
    assert phases == {}


def test_giant_component_edge_phases_signed():
    # negative edge phase propagates with its sign
    comp, phases = giant_component([4, 9], [(4, 9, -1.1)])
    assert comp == {4, 9}
    assert phases[9] - phases[4] == pytest.approx(-1.1, abs=1e-12)


# ---------------------------------------------------------------- run_seeding


SEED_KEY = _rng.stream_key(9, _rng.TAG_PHI, 0)


def test_run_seeding_consistent_cycle():
    graph, b = seeding_rows(
        8,
        singletons=[(1, 1.0), (2, 1.0), (3, 1.0)],
        doubletons=[
            (1, 2, 1.0, 1.0, 0.7),
            (2, 3, 1.0, 1.0, 0.9),
            (1, 3, 1.0, 1.0, 1.6),  # agrees with 0.7 + 0.9
        ],
        phi_key=SEED_KEY,
    )
    st_ = fresh_state(8, 3, SEED_KEY)
    run_seeding(b, graph, st_)
    assert not st_.failed
    assert st_.stats.n_singletons == 3
    assert st_.resolved_set == {1, 2, 3}
    assert st_.value[1] == pytest.approx(1.0 + 0j, abs=1e-9)
    assert st_.value[2] == pytest.approx(cmath.exp(0.7j), abs=1e-9)
    assert st_.value[3] == pytest.approx(cmath.exp(1.6j), abs=1e-9)


def test_run_seeding_inconsistent_cycle_fails():
    graph, b = seeding_rows(
        8,
        singletons=[(1, 1.0), (2, 1.0), (3, 1.0)],
        doubletons=[
            (1, 2, 1.0, 1.0, 0.7),
            (2, 3, 1.0, 1.0, 0.9),
            (1, 3, 1.0, 1.0, 0.5),  # contradicts 0.7 + 0.9
        ],
        phi_key=SEED_KEY,
    )
    st_ = fresh_state(8, 3, SEED_KEY)
    run_seeding(b, graph, st_)
    assert st_.failed
    assert st_.failure_reason == "inconsistent phase cycle in H"


def test_run_seeding_demotes_non_giant():
    graph, b = seeding_rows(
        8,
        singletons=[(1, 1.0), (2, 2.0), (3, 3.0), (5, 4.0)],
        doubletons=[(1, 2, 1.0, 2.0, 0.4), (2, 3, 2.0, 3.0, 0.6)],
        phi_key=SEED_KEY,
    )
    st_ = fresh_state(8, 4, SEED_KEY)
    run_seeding(b, graph, st_)
    assert not st_.failed
    assert st_.stats.n_singletons == 4
    assert st_.resolved_set == {1, 2, 3}
    assert st_.stats.giant_size == 3
    # node 5 was verified but is outside the giant component: demoted
    assert st_.mag[5] == 0.0
    assert st_.resolved[5] == 0


def test_run_seeding_conflicting_magnitudes_fail():
    graph, b = seeding_rows(
        8,
        singletons=[(3, 2.0), (3, 2.5)],  # two witnesses disagree
        doubletons=[],
        phi_key=SEED_KEY,
    )
    st_ = fresh_state(8, 2, SEED_KEY)
    run_seeding(b, graph, st_)
    assert st_.failed
    assert st_.failure_reason == "conflicting singleton magnitudes"


def test_run_seeding_repeated_consistent_witnesses_ok():
    graph, b = seeding_rows(
        8,
        singletons=[(3, 2.0), (3, 2.0), (5, 1.0)],
        doubletons=[(3, 5, 2.0, 1.0, 1.2)],
        phi_key=SEED_KEY,
    )
    st_ = fresh_state(8, 2, SEED_KEY)
    run_seeding(b, graph, st_)
    assert not st_.failed
    assert st_.stats.n_singletons == 2
    assert st_.resolved_set == {3, 5}


# ---------------------------------------------------------------- cancel_out


def test_cancel_out_reference_instance():
    # one resolved x_2 = 1, one unknown x_5 = 3 e^{i 1.1}, n = 16
    n = 16
    key = _rng.stream_key(13, _rng.TAG_PHI, 1)
    phi = lambda j: _rng.phi_scalar(key, 0, j)
    x5 = 3.0 * cmath.exp(1.1j)
    b = five_tuple([(2, 1.0 + 0j), (5, x5)], n, phi)
    got = cancel_out(b, [2, 5], {2: 1.0 + 0j}, n, phi)
    assert got is not None
    j, val = got
    assert j == 5
    assert val == pytest.approx(x5, abs=1e-9)


def test_cancel_out_zero_resolved_returns_none():
    n = 16
    phi = lambda j: 0.2 * j
    b = five_tuple([(5, 3.0 * cmath.exp(1.1j))], n, phi)
    assert cancel_out(b, [5], {}, n, phi) is None


def test_cancel_out_two_unknowns_returns_none():
    n = 16
    key = _rng.stream_key(13, _rng.TAG_PHI, 2)
    phi = lambda j: _rng.phi_scalar(key, 3, j)
    entries = [(2, 1.0 + 0j), (5, 3.0 * cmath.exp(1.1j)), (9, 2.0 * cmath.exp(0.4j))]
    b = five_tuple(entries, n, phi)
    assert cancel_out(b, [2, 5, 9], {2: 1.0 + 0j}, n, phi) is None


def test_cancel_out_candidate_must_be_neighbor():
    n = 16
    key = _rng.stream_key(13, _rng.TAG_PHI, 3)
    phi = lambda j: _rng.phi_scalar(key, 0, j)
    x5 = 3.0 * cmath.exp(1.1j)
    b = five_tuple([(2, 1.0 + 0j), (5, x5)], n, phi)
    # same measurements, but the adjacency claims 5 is not a neighbor
    assert cancel_out(b, [2, 9], {2: 1.0 + 0j}, n, phi) is None


def test_cancel_out_randomized_recovery():
    rng = np.random.default_rng(4242)
    hits = 0
    for t in range(300):
        b, nbrs, res, phi, unknowns = make_cancel_instance(
            rng, n=48, n_resolved=int(rng.integers(1, 5)), n_unknown=1, row=t
        )
        got = cancel_out(b, nbrs, res, 48, phi)
        if got is not None:
            hits += 1
            j, val = got
            assert j == unknowns[0][0]
            assert val == pytest.approx(unknowns[0][1], abs=1e-6)
    # the closed form succeeds on all but degenerate instances
    assert hits >= 295


# ---------------------------------------------------------------- decode


def planted_trial(n, k, c, seed, declared_k=None, L=1):
    cfg = EnsembleConfig(n=n, k=k if declared_k is None else declared_k, c=c, L=L, seed=seed)
    ens = build_ensemble(cfg)
    rng = np.random.default_rng(seed)
    x = gen_signal(n, k, rng, 1.0, 10.0)
    bundle = encode(ens, x)
    return ens, x, bundle


def test_decode_k1_single_singleton_suffices():
    cfg = EnsembleConfig(n=32, k=1, c=16.0, L=1, seed=11)
    ens = build_ensemble(cfg)
    x = SparseSignal.from_entries(32, {19: 2.5 * cmath.exp(0.3j)})
    res = decode(ens, encode(ens, x), 1)
    assert res.success
    assert equal_up_to_global_phase(res.estimate, x, 1e-9)
    # the recovered entry carries the reference phase 0
    assert res.estimate.values[0] == pytest.approx(2.5 + 0j, abs=1e-9)


def test_decode_planted_small_instance():
    ok = 0
    for seed in range(25):
        ens, x, bundle = planted_trial(64, 4, 16.0, seed)
        res = decode(ens, bundle, 4)
        if res.success:
            ok += 1
            assert equal_up_to_global_phase(res.estimate, x, 1e-6)
            assert consistency_check(ens, res.estimate, bundle, 1e-6)
            assert res.stats.resolved_count == 4
            assert res.stats.conflicts == 0
            assert res.stats.failure_reason is None
    assert ok >= 20


def test_decode_soundness_and_stats_midsize():
    for seed in range(8):
        ens, x, bundle = planted_trial(256, 16, 10.0, 100 + seed, L=2)
        res = decode(ens, bundle, 16)
        st_ = res.stats
        assert len(st_.stage_resolved) == 2
        assert st_.decode_ns > 0
        # resolution accounting: giant component plus stage and cleanup
        # recoveries make up the resolved count
        total = st_.giant_size + sum(st_.stage_resolved) + st_.cleanup_resolved
        assert total == st_.resolved_count
        assert res.success == (st_.resolved_count == 16 and st_.failure_reason is None)
        if res.success:
            assert equal_up_to_global_phase(res.estimate, x, 1e-6)
            assert consistency_check(ens, bundle=bundle, xhat=res.estimate, tol=1e-6)


def test_decode_wrong_k_declared_is_caught():
    # a (k+1)-sparse signal declared as k must not yield an unsound
    # success: either decode fails or the estimate is inconsistent
    for seed in range(10):
        ens, x, bundle = planted_trial(64, 5, 16.0, 200 + seed, declared_k=4)
        res = decode(ens, bundle, 4)
        assert (not res.success) or not consistency_check(
            ens, res.estimate, bundle, 1e-6
        )


def test_decode_shape_validation():
    ens, x, bundle = planted_trial(64, 4, 16.0, 0)
    with pytest.raises(ValueError):
        decode(ens, bundle, 0)
    cfg2 = EnsembleConfig(n=64, k=4, c=16.0, L=2, seed=0)
    ens2 = build_ensemble(cfg2)
    with pytest.raises(ValueError):
        decode(ens2, bundle, 4)  # phase count mismatch


# ------------------------------------------------- equal_up_to_global_phase


def sig(n, entries):
    return SparseSignal.from_entries(n, entries)


def test_equal_up_to_global_phase_examples():
    x = sig(16, {2: 1 + 1j, 9: 2.0 * cmath.exp(0.5j)})
    rot = sig(16, {2: (1 + 1j) * cmath.exp(2.3j), 9: 2.0 * cmath.exp((0.5 + 2.3) * 1j)})
    assert equal_up_to_global_phase(rot, x, 1e-9)
    assert equal_up_to_global_phase(x, x, 1e-12)

    conj = sig(16, {2: 1 + 1j, 9: 2.0 * cmath.exp(-0.5j)})
    assert not equal_up_to_global_phase(conj, x, 1e-6)

    other_support = sig(16, {2: 1 + 1j, 10: 2.0 * cmath.exp(0.5j)})
    assert not equal_up_to_global_phase(other_support, x, 1e-6)


def test_equal_up_to_global_phase_empty_and_mismatch():
    empty = SparseSignal(
        n=16, indices=np.array([], dtype=np.int64), values=np.array([], dtype=complex)
    )
    x = sig(16, {2: 1 + 1j})
    assert not equal_up_to_global_phase(empty, x, 1e-6)
    assert equal_up_to_global_phase(empty, empty, 1e-6)
    with pytest.raises(ValueError):
        equal_up_to_global_phase(sig(8, {2: 1 + 1j}), x, 1e-6)


def test_equal_up_to_global_phase_tolerance_edge():
    x = sig(16, {2: 1 + 0j})
    near = sig(16, {2: (1 + 5e-7) + 0j})
    assert equal_up_to_global_phase(near, x, 1e-6)
    far = sig(16, {2: (1 + 5e-5) + 0j})
    assert not equal_up_to_global_phase(far, x, 1e-6)
