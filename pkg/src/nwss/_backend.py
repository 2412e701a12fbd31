"""Kernel backend selection.

The compiled extension is used when it imports; setting ``NWSS_PURE_PYTHON=1``
forces the numpy fallback.
"""

import os

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def available():
    return ["compiled", "python"] if _compiled is not None else ["python"]


def load(name=None):
    """Return the kernel module called `name` (``"compiled"`` or ``"python"``)."""
    if name is None:
        force_py = os.environ.get("NWSS_PURE_PYTHON", "").strip() not in ("", "0")
        name = "python" if force_py or _compiled is None else "compiled"
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    if name == "python":
        return _kernels_py
    raise ValueError(f"unknown backend {name!r}")


kernels = load()
BACKEND = kernels.NAME


def minor_dets(mat, subsets):
    mat = np.ascontiguousarray(mat, dtype=np.complex128)
    subsets = np.ascontiguousarray(subsets, dtype=np.intp)
    if subsets.ndim != 2:
        raise ValueError("subsets must be a 2-D index array")
    if subsets.shape[1] == 0:
        return np.ones(subsets.shape[0])
    return kernels.minor_dets(mat, subsets)


def gram_logdet(G, mu):
    G = np.ascontiguousarray(G, dtype=np.complex128)
    out = kernels.gram_logdet(G, float(mu))
    if np.isnan(out).any():
        raise np.linalg.LinAlgError("Cholesky failed: I + mu*G^H G is not positive definite")
    return out
