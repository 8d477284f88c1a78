"""Backend dispatch for the numeric kernels.

Set ``WINDCURVE_BACKEND=numpy`` to force the pure-numpy path; the default is
the numba-compiled path when numba is importable.
"""

import os

_requested = os.environ.get("WINDCURVE_BACKEND", "auto").lower()

if _requested == "numpy":
    from . import numpy_impl as _impl
elif _requested in ("auto", "numba"):
    try:
        from . import numba_impl as _impl
    except ImportError:
        if _requested == "numba":
            raise
        from . import numpy_impl as _impl
else:
    raise ValueError(
        f"unknown WINDCURVE_BACKEND {_requested!r}; expected 'numba' or 'numpy'"
    )

BACKEND_NAME = _impl.BACKEND_NAME
interp_uniform = _impl.interp_uniform
knn_search = _impl.knn_search
