"""Selectable contraction kernels: numba-compiled with a numpy fallback.

The environment variable ``BICSIM_KERNELS`` picks the backend:

* ``auto`` (default) -- numba if importable, else numpy with a warning;
* ``numba`` -- require the compiled kernels, fail loudly otherwise;
* ``numpy`` -- force the pure-numpy reference implementation.

Both modules expose identical signatures, so tests can import them
side by side and assert bit-level agreement.
"""

import os
import warnings

from . import numpy_impl
from .numpy_impl import DEGENERACY_TOL, NOISE_FLOOR

_choice = os.environ.get("BICSIM_KERNELS", "auto").strip().lower()
if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"BICSIM_KERNELS must be 'auto', 'numba', or 'numpy', got {_choice!r}"
    )

if _choice == "numpy":
    _impl = numpy_impl
    BACKEND = "numpy"
else:
    try:
        from . import numba_impl as _impl

        BACKEND = "numba"
    except ImportError as exc:
        if _choice == "numba":
            raise
        warnings.warn(
            f"numba kernels unavailable ({exc}); falling back to numpy",
            RuntimeWarning,
            stacklevel=2,
        )
        _impl = numpy_impl
        BACKEND = "numpy"

select_rank = _impl.select_rank
split_theta = _impl.split_theta
contract_pair = _impl.contract_pair
apply_gate2 = _impl.apply_gate2
apply_swap = _impl.apply_swap
apply_gate3 = _impl.apply_gate3
shift_center_right = _impl.shift_center_right
shift_center_left = _impl.shift_center_left

__all__ = [
    "BACKEND",
    "DEGENERACY_TOL",
    "NOISE_FLOOR",
    "apply_gate2",
    "apply_gate3",
    "apply_swap",
    "contract_pair",
    "numpy_impl",
    "select_rank",
    "shift_center_left",
    "shift_center_right",
    "split_theta",
]
