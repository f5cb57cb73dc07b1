"""Double operator integrals on finite matrices.

The spectral form multiplies the matrix of A in the eigenbases of X and Y
entrywise by the symbol. The integral form sums ``w_j a(X, s_j) A b(Y, s_j)``
over quadrature nodes, forming each ``a(X, s_j)`` as an operator.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import as_operator, check_selfadjoint, to_dense
from .exceptions import DimensionMismatch, DivergentDecomposition, SymbolSingular
from .opcore import eig_hermitian

__all__ = ["doi_spectral", "IntegralDecomposition", "doi_integral"]


def _symbol_grid(phi, lam, mu):
    vals = np.asarray(phi(lam[:, None], mu[None, :]))
    return np.broadcast_to(vals, (lam.size, mu.size))


def doi_spectral(X, Y, phi, A, eig_x=None, eig_y=None):
    """Spectral double operator integral ``T_phi^{X,Y}(A)``.

    Parameters
    ----------
    X, Y : ndarray
        Self-adjoint operators.
    phi : callable
        Symbol ``phi(lam, mu)``, broadcast over a column of X-eigenvalues and
        a row of Y-eigenvalues. Divided differences must supply their own
        diagonal values.
    A : ndarray
        Operator from the eigenspaces of Y to those of X.

    Returns
    -------
    ndarray

    Raises
    ------
    NotSelfAdjoint
        If X or Y is not self-adjoint.
    SymbolSingular
        If phi is not finite at some spectral pair.
    """
    X, Y = to_dense(as_operator(X, "X")), to_dense(as_operator(Y, "Y"))
    A = to_dense(A)
    if A.shape != (X.shape[0], Y.shape[0]):
        raise DimensionMismatch(f"A has shape {A.shape}, expected {(X.shape[0], Y.shape[0])}")
    ex = eig_x if eig_x is not None else eig_hermitian(X)
    ey = eig_y if eig_y is not None else eig_hermitian(Y)
    grid = _symbol_grid(phi, ex.values, ey.values)
    if not np.all(np.isfinite(grid)):
        bad = np.argwhere(~np.isfinite(grid))[0]
        raise SymbolSingular(
            f"symbol not finite at ({ex.values[bad[0]]}, {ey.values[bad[1]]})"
        )
    Ux, Uy = ex.vectors, ey.vectors
    At = Ux.conj().T @ A @ Uy
    return Ux @ (grid * At) @ Uy.conj().T


@dataclass(frozen=True)
class IntegralDecomposition:
    """Discretised separation of variables ``phi = int a(., s) b(., s) dk(s)``.

    Attributes
    ----------
    a, b : callable
        ``a(lam, s)`` and ``b(mu, s)``, vectorised in the first argument.
    nodes : ndarray
        Quadrature nodes ``s_j``.
    weights : ndarray
        Complex weights ``w_j`` approximating the measure.
    """

    a: object
    b: object
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.atleast_1d(np.asarray(self.nodes, dtype=float))
        weights = np.atleast_1d(np.asarray(self.weights, dtype=complex))
        if nodes.shape != weights.shape:
            raise ValueError("nodes and weights must have the same shape")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def summability_bound(self, spec_x, spec_y):
        """``sum_j |w_j| sup|a(spec_x, s_j)| sup|b(spec_y, s_j)|``."""
        total = 0.0
        for s, w in zip(self.nodes, self.weights):
            sa = np.max(np.abs(self.a(spec_x, s)))
            sb = np.max(np.abs(self.b(spec_y, s)))
            total += abs(w) * sa * sb
        return float(total)

    def symbol(self, lam, mu):
        """Symbol represented by the discrete decomposition."""
        lam, mu = np.asarray(lam, dtype=float), np.asarray(mu, dtype=float)
        out = 0.0
        for s, w in zip(self.nodes, self.weights):
            out = out + w * self.a(lam, s) * self.b(mu, s)
        return out


def doi_integral(X, Y, d, A, eig_x=None, eig_y=None):
    """Integral-form double operator integral ``sum_j w_j a(X,s_j) A b(Y,s_j)``.

    Parameters
    ----------
    X, Y : ndarray
        Self-adjoint operators.
    d : IntegralDecomposition
    A : ndarray

    Returns
    -------
    ndarray

    Raises
    ------
    DivergentDecomposition
        If the discrete summability bound is not finite.
    """
    X, Y = to_dense(as_operator(X, "X")), to_dense(as_operator(Y, "Y"))
    check_selfadjoint(X, "X")
    check_selfadjoint(Y, "Y")
    A = to_dense(A)
    ex = eig_x if eig_x is not None else eig_hermitian(X)
    ey = eig_y if eig_y is not None else eig_hermitian(Y)
    bound = d.summability_bound(ex.values, ey.values)
    if not np.isfinite(bound):
        raise DivergentDecomposition(f"summability bound is {bound}")
    out = np.zeros((X.shape[0], Y.shape[0]), dtype=complex)
    # summed in node order so the result is deterministic
    for s, w in zip(d.nodes, d.weights):
        aX = ex.apply(np.asarray(d.a(ex.values, s), dtype=complex))
        bY = ey.apply(np.asarray(d.b(ey.values, s), dtype=complex))
        out += w * (aX @ A @ bY)
    return out
