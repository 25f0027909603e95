"""Kernel backend selection.

Two interchangeable implementations of the hot kernels exist:

* ``udalab.backend._speedups`` — Cython extension built at install time;
* ``udalab.backend.numpy_kernels`` — pure NumPy, always importable.

The active one is chosen once at import. Set ``UDALAB_KERNELS=numpy`` to
force the fallback, ``UDALAB_KERNELS=compiled`` to insist on the extension
(raises if it was not built). Matrix products are not part of the backend:
they go through BLAS either way.
"""

import os

from . import numpy_kernels

_requested = os.environ.get("UDALAB_KERNELS", "auto")

if _requested not in ("auto", "compiled", "numpy"):
    raise ValueError(
        f"UDALAB_KERNELS must be 'auto', 'compiled' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    _impl = numpy_kernels
else:
    try:
        from . import _speedups as _impl
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = numpy_kernels

ACTIVE = _impl.NAME

relu = _impl.relu
relu_backward = _impl.relu_backward
sigmoid = _impl.sigmoid
sigmoid_backward = _impl.sigmoid_backward
clip = _impl.clip
clip_backward = _impl.clip_backward
softmax_rows = _impl.softmax_rows
softmax_rows_backward = _impl.softmax_rows_backward
sgd_momentum_update = _impl.sgd_momentum_update


def available_backends():
    """Names of the backends importable in this environment."""
    names = ["numpy"]
    try:
        from . import _speedups  # noqa: F401

        names.append("compiled")
    except ImportError:
        pass
    return names
