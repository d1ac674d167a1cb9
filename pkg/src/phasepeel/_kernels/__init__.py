"""Hot-loop kernels with a compiled core and a pure-Python fallback.

Two implementations of the same two functions:

  sample_rows(n_left, n_right, edge_prob, inv_log_q, key)
      geometric-skip sampling of one bipartite graph, CSR output
  multiton_sweep(...)
      one sequential resolve sweep over a stage/cleanup graph

The compiled module is preferred when importable.  Set
PHASEPEEL_BACKEND=python (or =c) to force a choice; forcing the
compiled backend raises if the extension is missing.
"""

import os

_choice = os.environ.get("PHASEPEEL_BACKEND", "auto").lower()

if _choice in ("python", "py"):
    from . import _pykernels as _impl

    BACKEND = "python"
elif _choice in ("c", "compiled", "ext"):
    from . import _ckernels as _impl  # type: ignore[no-redef]

    BACKEND = "c"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "c"
    except ImportError:
        from . import _pykernels as _impl

        BACKEND = "python"

sample_rows = _impl.sample_rows
multiton_sweep = _impl.multiton_sweep
