"""Selects the active implementation of the hot numeric kernels.

Two interchangeable backends exist: jitted kernels (``_kernels_numba``)
and pure-numpy fallbacks (``_kernels_numpy``). The environment variable
``MTVERIFY_NUMBA`` picks one at import time:

    MTVERIFY_NUMBA=auto   use the jitted kernels when numba imports (default)
    MTVERIFY_NUMBA=0      force the numpy fallback
    MTVERIFY_NUMBA=1      require the jitted kernels; fail loudly otherwise

``benchmarks/bench_kernels.py`` times the two backends against each other.
"""

import os

from . import _kernels_numpy
from .errors import ConfigError

_FORCE_OFF = ("0", "false", "no", "off")
_FORCE_ON = ("1", "true", "yes", "on", "require")


def _resolve():
    flag = os.environ.get("MTVERIFY_NUMBA", "auto").strip().lower()
    if flag in _FORCE_OFF:
        return _kernels_numpy, "numpy"
    try:
        from . import _kernels_numba
        return _kernels_numba, "numba"
    except ImportError as exc:
        if flag in _FORCE_ON:
            raise ConfigError(f"MTVERIFY_NUMBA={flag} but numba is unavailable: {exc}") from exc
        return _kernels_numpy, "numpy"


_impl, _name = _resolve()

linear_gram = _impl.linear_gram
rbf_gram = _impl.rbf_gram
smo_solve = _impl.smo_solve
conv2d_valid = _impl.conv2d_valid
conv2d_valid_grad_w = _impl.conv2d_valid_grad_w
conv2d_valid_grad_x = _impl.conv2d_valid_grad_x


def active_backend():
    """Name of the kernel backend in use: 'numba' or 'numpy'."""
    return _name


def get_backend(name):
    """Fetch a backend module by name, independent of the active choice."""
    if name == "numpy":
        return _kernels_numpy
    if name == "numba":
        from . import _kernels_numba
        return _kernels_numba
    raise ConfigError(f"unknown backend {name!r}; expected 'numpy' or 'numba'")
