"""Hot-loop kernel dispatch.

The numba backend is used when numba imports cleanly; set
``TEXTCLF_DISABLE_NUMBA=1`` to force the pure-numpy path. Both backends
expose identical functions, see ``_kernels_numpy`` for the contracts.
"""
import importlib
import os

KERNEL_NAMES = (
    "sigmoid",
    "conv1d_forward",
    "conv1d_backward",
    "max_time_forward",
    "max_time_backward",
    "scatter_add_rows",
    "bag_forward",
    "bag_backward",
    "lstm_forward",
    "lstm_backward",
    "adam_update",
    "fnv1a_ngrams",
)


def numba_available():
    try:
        importlib.import_module("numba")
    except ImportError:
        return False
    return True


def get_backend(name):
    """Return the kernel module for ``"numpy"`` or ``"numba"``."""
    if name == "numpy":
        return importlib.import_module("textclf._kernels_numpy")
    if name == "numba":
        return importlib.import_module("textclf._kernels_numba")
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    if os.environ.get("TEXTCLF_DISABLE_NUMBA", "") not in ("", "0") or not numba_available():
        return "numpy"
    return "numba"


BACKEND = _select()
_impl = get_backend(BACKEND)

sigmoid = _impl.sigmoid
conv1d_forward = _impl.conv1d_forward
conv1d_backward = _impl.conv1d_backward
max_time_forward = _impl.max_time_forward
max_time_backward = _impl.max_time_backward
scatter_add_rows = _impl.scatter_add_rows
bag_forward = _impl.bag_forward
bag_backward = _impl.bag_backward
lstm_forward = _impl.lstm_forward
lstm_backward = _impl.lstm_backward
adam_update = _impl.adam_update
fnv1a_ngrams = _impl.fnv1a_ngrams
