"""Hermitian spectral kernel: eigensystems, functional calculus and powers.

Every routine accepts a dense ``numpy.ndarray`` or a ``scipy.sparse`` matrix.
Sparse input is split into the connected components of its sparsity graph
and each component is diagonalised densely; blocks of equal size are solved
as one batched LAPACK call. The truncated models in :mod:`nclab.triples`
are block diagonal with blocks of size one or two, so this keeps memory
linear in the dimension.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from ._validation import (
    POSITIVE_RTOL,
    as_operator,
    check_selfadjoint,
    hermitian_part,
    is_diagonal,
)
from .exceptions import DomainError, NumericalFailure

__all__ = [
    "EigenSystem",
    "SingularSpectrum",
    "eig_hermitian",
    "singular_values",
    "func_calculus",
    "complex_power",
    "support_power",
    "power_map",
    "sign_operator",
    "abs_operator",
    "kernel_projection",
    "eigenvalues",
    "trace_norm",
    "op_norm",
]


@dataclass(frozen=True)
class EigenSystem:
    """Spectral resolution ``T = U diag(values) U*`` of a self-adjoint T.

    Attributes
    ----------
    values : ndarray of float, shape (n,)
        Eigenvalues in ascending order, ties ordered by original index.
    vectors : ndarray or sparse matrix, shape (n, n)
        Unitary whose columns are the eigenvectors.
    """

    values: np.ndarray
    vectors: object

    @property
    def dim(self):
        return self.values.shape[0]

    @property
    def sparse(self):
        return sp.issparse(self.vectors)

    def apply(self, fvals):
        """Return ``U diag(fvals) U*``."""
        U = self.vectors
        if sp.issparse(U):
            return (U @ sp.diags(fvals) @ U.conj().T).tocsr()
        return (U * fvals) @ U.conj().T

    def reconstruct(self):
        return self.apply(self.values)

    def diag_of(self, X):
        """Diagonal of ``U* X U`` without forming the full product."""
        U = self.vectors
        XU = X @ U
        if sp.issparse(U):
            prod = U.conj().multiply(XU)
            return np.asarray(prod.sum(axis=0)).ravel()
        return np.einsum("ij,ij->j", U.conj(), XU)


@dataclass(frozen=True)
class SingularSpectrum:
    """Non-increasing singular-value sequence.

    Attributes
    ----------
    mu : ndarray of float
        ``mu[0] >= mu[1] >= ... >= 0``.
    source_dim : int or None
        Dimension of the operator the sequence came from, if any.
    """

    mu: np.ndarray
    source_dim: int | None = None

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        if mu.ndim != 1:
            raise ValueError("mu must be one-dimensional")
        if mu.size and (mu[-1] < 0 or np.any(np.diff(mu) > 0)):
            raise ValueError("mu must be non-increasing and non-negative")
        object.__setattr__(self, "mu", mu)

    @classmethod
    def from_values(cls, values, source_dim=None):
        """Build from arbitrary reals by sorting their moduli."""
        mu = np.sort(np.abs(np.asarray(values, dtype=complex)).astype(float))[::-1]
        return cls(np.ascontiguousarray(mu), source_dim)

    def __len__(self):
        return self.mu.shape[0]

    def scaled(self, t):
        return SingularSpectrum(self.mu * t, self.source_dim)


# --------------------------------------------------------------------------
# block decomposition of sparse operators


def _groups(labels, n_comp):
    """Group components by size.

    Returns a dict ``size -> (m, size)`` index array; rows of the array are
    the members of one component in ascending order.
    """
    order = np.argsort(labels, kind="stable")
    counts = np.bincount(labels, minlength=n_comp)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    out = {}
    for size in np.unique(counts):
        if size == 0:
            continue
        comps = np.flatnonzero(counts == size)
        out[int(size)] = order[starts[comps][:, None] + np.arange(size)]
    return out, counts


def _hermitian_blocks(T):
    """Yield ``(idx, blocks)`` for the components of a square sparse T."""
    n = T.shape[0]
    pattern = (abs(T) + abs(T).T).tocsr()
    n_comp, labels = connected_components(pattern, directed=False)
    groups, _ = _groups(labels, n_comp)
    coo = T.tocoo()
    slot = np.empty(n, dtype=np.int64)
    pos = np.empty(n, dtype=np.int64)
    size_of = np.empty(n, dtype=np.int64)
    for size, idx in groups.items():
        slot[idx] = np.arange(idx.shape[0])[:, None]
        pos[idx] = np.arange(size)[None, :]
        size_of[idx] = size
    for size, idx in groups.items():
        blocks = np.zeros((idx.shape[0], size, size), dtype=T.dtype)
        sel = size_of[coo.row] == size
        r, c, v = coo.row[sel], coo.col[sel], coo.data[sel]
        np.add.at(blocks, (slot[r], pos[r], pos[c]), v)
        yield idx, blocks


def _rect_blocks(T):
    """Yield ``(ridx, cidx, blocks)`` for the bipartite components of T."""
    n = T.shape[0]
    A = abs(T).tocsr()
    graph = sp.bmat([[None, A], [A.T, None]], format="csr")
    n_comp, labels = connected_components(graph, directed=False)
    lr, lc = labels[:n], labels[n:]
    cr = np.bincount(lr, minlength=n_comp)
    cc = np.bincount(lc, minlength=n_comp)
    order_r = np.argsort(lr, kind="stable")
    order_c = np.argsort(lc, kind="stable")
    start_r = np.concatenate([[0], np.cumsum(cr)[:-1]])
    start_c = np.concatenate([[0], np.cumsum(cc)[:-1]])
    shapes = np.stack([cr, cc], axis=1)
    coo = T.tocoo()
    for nr, nc in np.unique(shapes, axis=0):
        if nr == 0 or nc == 0:
            continue
        comps = np.flatnonzero((cr == nr) & (cc == nc))
        ridx = order_r[start_r[comps][:, None] + np.arange(nr)]
        cidx = order_c[start_c[comps][:, None] + np.arange(nc)]
        slot = np.full(n_comp, -1)
        slot[comps] = np.arange(comps.size)
        pos_r = np.empty(n, dtype=np.int64)
        pos_c = np.empty(n, dtype=np.int64)
        pos_r[ridx] = np.arange(nr)[None, :]
        pos_c[cidx] = np.arange(nc)[None, :]
        sel = slot[lr[coo.row]] >= 0
        r, c, v = coo.row[sel], coo.col[sel], coo.data[sel]
        blocks = np.zeros((comps.size, nr, nc), dtype=T.dtype)
        np.add.at(blocks, (slot[lr[r]], pos_r[r], pos_c[c]), v)
        yield ridx, cidx, blocks


def _sorted_eigensystem(values, keys, rows, cols, data, n):
    """Assemble a sparse eigensystem from per-block pieces."""
    order = np.lexsort((keys, values))
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    U = sp.csc_matrix((data, (rows, rank[cols])), shape=(n, n))
    U.eliminate_zeros()
    return EigenSystem(values[order], U)


# --------------------------------------------------------------------------
# public operations


def eig_hermitian(T, check=True):
    """Eigendecomposition of a self-adjoint operator.

    Parameters
    ----------
    T : ndarray or sparse matrix
        Self-adjoint operator.
    check : bool
        Verify self-adjointness to ``1e-12`` relative in max norm.

    Returns
    -------
    EigenSystem
        Ascending eigenvalues and a unitary of eigenvectors.

    Raises
    ------
    NotSelfAdjoint
        If the self-adjointness check fails.
    NumericalFailure
        If LAPACK does not converge.
    """
    T = as_operator(T)
    if check:
        check_selfadjoint(T)
    n = T.shape[0]
    try:
        if not sp.issparse(T):
            vals, vecs = np.linalg.eigh(hermitian_part(T))
            return EigenSystem(vals, vecs)
        if is_diagonal(T):
            d = np.real(T.diagonal())
            order = np.argsort(d, kind="stable")
            U = sp.csc_matrix((np.ones(n), (order, np.arange(n))), shape=(n, n))
            return EigenSystem(d[order], U)
        H = hermitian_part(T)
        vals, keys, rows, cols, data = [], [], [], [], []
        col0 = 0
        for idx, blocks in _hermitian_blocks(H):
            m, s = idx.shape
            w, v = np.linalg.eigh(blocks)
            vals.append(w.ravel())
            keys.append(idx.ravel())
            gcol = col0 + np.arange(m * s).reshape(m, s)
            rows.append(np.repeat(idx, s, axis=1).ravel())
            cols.append(np.broadcast_to(gcol[:, None, :], (m, s, s)).ravel())
            data.append(v.ravel())
            col0 += m * s
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc
    return _sorted_eigensystem(
        np.concatenate(vals),
        np.concatenate(keys),
        np.concatenate(rows),
        np.concatenate(cols),
        np.concatenate(data),
        n,
    )


def _eval(f, x):
    try:
        y = np.asarray(f(x))
        if y.shape == x.shape:
            return y
    except (TypeError, ValueError):
        pass
    return np.array([f(t) for t in x])


def func_calculus(T, f, eigsys=None, check=True):
    """Apply a scalar function to a self-adjoint operator.

    Parameters
    ----------
    T : ndarray or sparse matrix
        Self-adjoint operator.
    f : callable
        Real-to-complex function, vectorised over arrays if possible.
    eigsys : EigenSystem, optional
        Precomputed eigensystem of `T`.

    Returns
    -------
    ndarray or sparse matrix
        ``U f(diag) U*``, of the same storage kind as `T`.
    """
    T = as_operator(T)
    if eigsys is None and is_diagonal(T):
        if check:
            check_selfadjoint(T)
        d = np.real(T.diagonal())
        fv = _eval(f, d)
        return sp.diags(fv, format="csr") if sp.issparse(T) else np.diag(fv)
    es = eigsys if eigsys is not None else eig_hermitian(T, check=check)
    return es.apply(_eval(f, es.values))


def power_map(values, z, zero_tol=0.0):
    """Scalar power ``t -> t**z`` with the convention ``0**z = 0``.

    Values at or below `zero_tol` are treated as zero, so the map acts as the
    support projection for purely imaginary `z`.
    """
    values = np.asarray(values, dtype=float)
    z = complex(z)
    pos = values > zero_tol
    if z.imag == 0:
        out = np.zeros(values.shape)
        out[pos] = values[pos] ** z.real
    else:
        out = np.zeros(values.shape, dtype=complex)
        out[pos] = np.exp(z * np.log(values[pos]))
    return out


def _positive_spectrum(es, name="P"):
    scale = np.max(np.abs(es.values)) if es.dim else 0.0
    tol = POSITIVE_RTOL * scale
    if es.dim and es.values[0] < -tol:
        raise DomainError(
            f"{name} is not positive: min eigenvalue {es.values[0]:.3e} < -{tol:.3e}"
        )
    return np.clip(es.values, 0.0, None), tol


def support_power(P, z, eigsys=None, check=True):
    """Power ``P**z`` for any complex z, with ``0**z := 0`` on ker P.

    Eigenvalues within the positivity tolerance of zero count as kernel, so
    for ``Re z <= 0`` the result is computed on the support of P only.
    """
    P = as_operator(P)
    es = eigsys if eigsys is not None else eig_hermitian(P, check=check)
    vals, tol = _positive_spectrum(es)
    return es.apply(power_map(vals, z, zero_tol=tol))


def complex_power(P, z, eigsys=None, check=True):
    """Complex power of a positive operator, ``Re z > 0``.

    Parameters
    ----------
    P : ndarray or sparse matrix
        Positive operator. Eigenvalues in ``[-1e-10 ||P||, 0)`` are clamped.
    z : complex
        Exponent with positive real part.

    Raises
    ------
    DomainError
        If ``Re z <= 0`` or P is not positive.
    """
    if complex(z).real <= 0:
        raise DomainError(f"complex_power needs Re z > 0, got {z}")
    return support_power(P, z, eigsys=eigsys, check=check)


def _kernel_tol(es, tol):
    if tol is not None:
        return tol
    scale = np.max(np.abs(es.values)) if es.dim else 0.0
    return POSITIVE_RTOL * scale


def sign_operator(T, eigsys=None, tol=None):
    """Sign ``chi_(0,inf)(T) - chi_(-inf,0)(T)``, zero on the kernel."""
    T = as_operator(T)
    es = eigsys if eigsys is not None else eig_hermitian(T)
    tol = _kernel_tol(es, tol)
    v = es.values
    return es.apply(np.where(v > tol, 1.0, np.where(v < -tol, -1.0, 0.0)))


def abs_operator(T, eigsys=None):
    T = as_operator(T)
    es = eigsys if eigsys is not None else eig_hermitian(T)
    return es.apply(np.abs(es.values))


def kernel_projection(T, eigsys=None, tol=None):
    """Spectral projection of T at eigenvalue zero."""
    T = as_operator(T)
    es = eigsys if eigsys is not None else eig_hermitian(T)
    tol = _kernel_tol(es, tol)
    return es.apply((np.abs(es.values) <= tol).astype(float))


def singular_values(T):
    """Singular values of T in non-increasing order.

    Raises
    ------
    NumericalFailure
        If the SVD does not converge.
    """
    T = as_operator(T)
    n = T.shape[0]
    try:
        if not sp.issparse(T):
            s = np.linalg.svd(T, compute_uv=False)
            return SingularSpectrum(s, n)
        T = T.tocsr()
        T.eliminate_zeros()
        row_nnz = np.diff(T.indptr)
        col_nnz = np.bincount(T.indices, minlength=n)
        if row_nnz.max(initial=0) <= 1 and col_nnz.max(initial=0) <= 1:
            vals = np.abs(T.data)
        else:
            parts = []
            for _, _, blocks in _rect_blocks(T):
                parts.append(np.linalg.svd(blocks, compute_uv=False).ravel())
            vals = np.concatenate(parts) if parts else np.zeros(0)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD failed: {exc}") from exc
    mu = np.zeros(n)
    mu[: vals.size] = np.sort(vals)[::-1]
    return SingularSpectrum(mu, n)


def eigenvalues(T):
    """Eigenvalues of a general operator.

    Ordered by non-increasing modulus; ties broken by descending real part.
    """
    T = as_operator(T)
    try:
        if not sp.issparse(T):
            lam = np.linalg.eigvals(T)
        elif is_diagonal(T):
            lam = np.asarray(T.diagonal())
        else:
            lam = np.concatenate(
                [np.linalg.eigvals(b).ravel() for _, b in _hermitian_blocks(T)]
            )
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue solve failed: {exc}") from exc
    lam = np.asarray(lam, dtype=complex)
    order = np.lexsort((-lam.real, -np.abs(lam)))
    return lam[order]


def trace_norm(T):
    return float(np.sum(singular_values(T).mu))


def op_norm(T):
    mu = singular_values(T).mu
    return float(mu[0]) if mu.size else 0.0
