"""Argument checks shared by the operator modules.

Operators are plain 2-D numpy arrays or scipy.sparse matrices. Structure
(self-adjoint, positive, projection) is verified at call time against the
tolerances below instead of being carried as flags.
"""

import numpy as np
import scipy.sparse as sp

from .exceptions import DimensionMismatch, NotSelfAdjoint

SELFADJOINT_RTOL = 1e-12
POSITIVE_RTOL = 1e-10
PROJECTION_TOL = 1e-10


def is_sparse(T):
    return sp.issparse(T)


def as_operator(T, name="T"):
    """Return `T` as a square 2-D array or CSR matrix.

    Raises
    ------
    DimensionMismatch
        If `T` is not two-dimensional and square.
    """
    if sp.issparse(T):
        T = sp.csr_matrix(T)
    else:
        T = np.asarray(T)
        if T.dtype.kind not in "fc":
            T = T.astype(float)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {T.shape}")
    return T


def check_same_dim(*ops):
    dims = {op.shape for op in ops}
    if len(dims) > 1:
        raise DimensionMismatch(f"operator shapes differ: {sorted(dims)}")


def max_abs(T):
    if sp.issparse(T):
        return float(abs(T).max()) if T.nnz else 0.0
    return float(np.max(np.abs(T))) if T.size else 0.0


def adjoint(T):
    return T.conj().T.tocsr() if sp.issparse(T) else T.conj().T


def check_selfadjoint(T, name="T", rtol=SELFADJOINT_RTOL):
    """Raise NotSelfAdjoint unless ``max|T - T*| <= rtol * max|T|``."""
    scale = max_abs(T)
    dev = max_abs(T - adjoint(T))
    if dev > rtol * scale:
        raise NotSelfAdjoint(
            f"{name} is not self-adjoint: max|T - T*| = {dev:.3e}, "
            f"allowed {rtol * scale:.3e}"
        )


def hermitian_part(T):
    H = (T + adjoint(T)) * 0.5
    return H.tocsr() if sp.issparse(H) else H


def is_diagonal(T):
    if sp.issparse(T):
        coo = T.tocoo()
        return bool(np.all(coo.row[coo.data != 0] == coo.col[coo.data != 0]))
    return bool(np.count_nonzero(T - np.diag(np.diag(T))) == 0)


def identity_like(T):
    n = T.shape[0]
    if sp.issparse(T):
        return sp.identity(n, dtype=complex, format="csr")
    return np.eye(n, dtype=complex)


def diag_like(values, like):
    if sp.issparse(like):
        return sp.diags(np.asarray(values), format="csr")
    return np.diag(np.asarray(values))


def to_dense(T):
    return T.toarray() if sp.issparse(T) else np.asarray(T)
