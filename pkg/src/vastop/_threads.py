"""Honor VASTOP_THREADS before any BLAS-backed import happens.

Imported first by the package __init__ so that setting VASTOP_THREADS in the
environment caps the worker pools of whatever BLAS numpy was built against.
"""

import os

_cap = os.environ.get("VASTOP_THREADS")
if _cap:
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS", "VECLIB_MAXIMUM_THREADS"):
        os.environ.setdefault(var, _cap)
