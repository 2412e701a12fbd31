"""Pure numpy versions of the compiled kernels (same signatures)."""

import numpy as np

NAME = "python"


def minor_dets(mat, subsets):
    """Real part of ``det(mat[s][:, s])`` for every row ``s`` of `subsets`."""
    subsets = np.asarray(subsets, dtype=np.intp)
    n, k = subsets.shape
    if k == 0:
        return np.ones(n)
    sub = np.asarray(mat)[subsets[:, :, None], subsets[:, None, :]]
    return np.linalg.det(sub).real


def gram_logdet(G, mu):
    """Natural ``log det(I + mu G^H G)`` per matrix via batched Cholesky."""
    G = np.asarray(G)
    n, M, K = G.shape
    if K <= M:
        C = mu * (G.conj().transpose(0, 2, 1) @ G)
    else:
        C = mu * (G @ G.conj().transpose(0, 2, 1))
    d = C.shape[-1]
    C[:, np.arange(d), np.arange(d)] += 1.0
    try:
        L = np.linalg.cholesky(C)
    except np.linalg.LinAlgError:
        return np.full(n, np.nan)
    return 2.0 * np.log(np.diagonal(L, axis1=1, axis2=2).real).sum(axis=1)
