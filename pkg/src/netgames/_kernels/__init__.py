"""Hot inner loops with a compiled core and a pure numpy fallback.

The compiled extension (``netgames._kernels._core``, built from Cython) is
preferred when importable; otherwise the numpy implementation in
``_fallback`` is used.  Set ``NETGAMES_PURE_PYTHON=1`` to force the fallback.

Both backends implement the same contract:

- ``run_br``   sequential best-response loop (gated or exact)
- ``run_gp``   simultaneous projected-gradient loop (gated, exact, or
               fixed-step with tolerance stop)
- ``deviation_scan``  max state-change mismatch between utility and the
               quadratic potential over sampled unilateral deviations
- ``jacobi_spectrum`` eigenvalues of a symmetric matrix by cyclic Jacobi

Termination codes: 0 = gate_silent, 1 = max_iters, 2 = numeric_convergence.
"""

import os

from . import _fallback

if os.environ.get("NETGAMES_PURE_PYTHON"):
    _impl = _fallback
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _fallback

BACKEND = _impl.BACKEND
run_br = _impl.run_br
run_gp = _impl.run_gp
deviation_scan = _impl.deviation_scan
jacobi_spectrum = _impl.jacobi_spectrum

TERM_GATE_SILENT = 0
TERM_MAX_ITERS = 1
TERM_CONVERGED = 2
