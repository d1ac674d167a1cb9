"""Package surface: exports, version, and the README usage example."""

import numpy as np

import phasepeel


def test_all_exports_resolve():
    for name in phasepeel.__all__:
        assert hasattr(phasepeel, name), name


def test_version_string():
    parts = phasepeel.__version__.split(".")
    assert len(parts) == 3
    assert all(p.isdigit() for p in parts)


def test_readme_example():
    cfg = phasepeel.EnsembleConfig(n=4096, k=64, c=10.0, L=3, seed=42)
    ens = phasepeel.build_ensemble(cfg)
    x = phasepeel.gen_signal(cfg.n, cfg.k, np.random.default_rng(0), 1.0, 10.0)
    result = phasepeel.decode(ens, phasepeel.encode(ens, x), cfg.k)
    assert result.success
    assert phasepeel.equal_up_to_global_phase(result.estimate, x, 1e-6)
