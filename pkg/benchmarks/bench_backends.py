"""Compare the compiled kernels against the pure-Python fallback.

Times the two hot kernels in isolation and the full decode end to end.
Run from the repository root:

    python benchmarks/bench_backends.py
    python benchmarks/bench_backends.py --k 512 --trials 8
"""

import argparse
import math
import statistics
import time

import numpy as np

import phasepeel._kernels as kernels
import phasepeel.ensemble
from phasepeel._kernels import _pykernels
from phasepeel.cli import gen_signal
from phasepeel.decoder import DecoderState, decode, run_seeding
from phasepeel.ensemble import EnsembleConfig, default_stage_count
from phasepeel.measure import build_ensemble, encode

try:
    from phasepeel._kernels import _ckernels
except ImportError:
    _ckernels = None


def timeit(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_sample_rows(impl, n_left, n_right, p, repeat):
    ilq = 1.0 / math.log1p(-p)
    return timeit(lambda: impl.sample_rows(n_left, n_right, p, ilq, 12345), repeat)


def prepare_sweep_instance(k, c, seed=7):
    cfg = EnsembleConfig(n=16 * k, k=k, c=c, L=default_stage_count(k), seed=seed)
    ens = build_ensemble(cfg)
    x = gen_signal(cfg.n, cfg.k, np.random.default_rng(seed), 1.0, 10.0)
    bundle = encode(ens, x)
    state = DecoderState.for_ensemble(ens, cfg.k)
    run_seeding(np.asarray(bundle.phases[0]), ens.graphs[0], state)
    g = ens.graphs[1]
    return (
        g.indptr,
        g.indices,
        np.asarray(bundle.phases[1]),
        state.n,
        ens.phi_keys[1],
        state.cos_tab,
        state.sin_tab,
        state.value,
        state.mag,
        state.resolved,
        state.resolved_count,
        cfg.k,
    )


def bench_sweep(impl, inst, repeat):
    (ip, ix, b, n, key, ct, st_, value, mag, resolved, rcount, k) = inst
    buf = np.empty(k, dtype=np.int64)

    def run():
        impl.multiton_sweep(
            ip, ix, b, n, key, ct, st_,
            value.copy(), mag.copy(), resolved.copy(), rcount, k, True, buf,
        )

    return timeit(run, repeat)


def bench_decode(impl, k, c, trials, monkey):
    monkey(impl)
    cfg = EnsembleConfig(n=16 * k, k=k, c=c, L=default_stage_count(k), seed=0)
    times = []
    for t in range(trials):
        ens = build_ensemble(
            EnsembleConfig(n=cfg.n, k=cfg.k, c=cfg.c, L=cfg.L, seed=1000 + t)
        )
        x = gen_signal(cfg.n, cfg.k, np.random.default_rng(t), 1.0, 10.0)
        bundle = encode(ens, x)
        res = decode(ens, bundle, cfg.k)
        times.append(res.stats.decode_ns / 1e6)
    return statistics.median(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=512)
    ap.add_argument("--c", type=float, default=10.0)
    ap.add_argument("--trials", type=int, default=6)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if _ckernels is None:
        print("compiled extension not available; nothing to compare")
        print("(python fallback is the active backend)")
        return

    print(f"active backend: {kernels.BACKEND}")
    k, c = args.k, args.c
    n = 16 * k

    p = 1.0 / k
    t_py = bench_sample_rows(_pykernels, n, 10 * k, p, args.repeat)
    t_c = bench_sample_rows(_ckernels, n, 10 * k, p, args.repeat)
    print(f"\nsample_rows  n_left={n} n_right={10 * k} p=1/{k}")
    print(f"  python   {1e3 * t_py:9.3f} ms")
    print(f"  compiled {1e3 * t_c:9.3f} ms   ({t_py / t_c:5.1f}x)")

    inst = prepare_sweep_instance(k, c)
    s_py = bench_sweep(_pykernels, inst, args.repeat)
    s_c = bench_sweep(_ckernels, inst, args.repeat)
    print(f"\nmultiton_sweep  stage-1 graph at k={k}, c={c}")
    print(f"  python   {1e3 * s_py:9.3f} ms")
    print(f"  compiled {1e3 * s_c:9.3f} ms   ({s_py / s_c:5.1f}x)")

    def monkey(impl):
        phasepeel.ensemble.sample_rows = impl.sample_rows
        kernels.multiton_sweep = impl.multiton_sweep

    d_py = bench_decode(_pykernels, k, c, args.trials, monkey)
    d_c = bench_decode(_ckernels, k, c, args.trials, monkey)
    monkey(kernels._impl)  # restore the auto-selected backend
    print(f"\ndecode (median of {args.trials})  n={n} k={k} c={c}")
    print(f"  python   {d_py:9.3f} ms")
    print(f"  compiled {d_c:9.3f} ms   ({d_py / d_c:5.1f}x)")


if __name__ == "__main__":
    main()
