"""Truncated spectral-triple models and the derivations built from D.

Models are stored as CSR matrices. Shifts that would leave the mode box are
discarded (zero-padded), so every generator records an interior mask: the
basis vectors on which it and its inverse act without truncation.
"""

from dataclasses import dataclass, field
from functools import cached_property
import itertools

import numpy as np
import scipy.sparse as sp
from scipy import stats

from ._validation import as_operator, check_same_dim, is_sparse
from .exceptions import DimensionMismatch, DomainError, WindowError
from .opcore import eig_hermitian, trace_norm

__all__ = [
    "TripleModel",
    "build_circle",
    "build_torus2",
    "build_moyal_lattice",
    "double",
    "moyal_unitary",
    "clifford_gammas",
    "delta_op",
    "partial_op",
    "L_op",
    "lambda_op",
    "d0_operator",
    "DecayProbe",
    "hypothesis_probe",
]

SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True, eq=False)
class TripleModel:
    """Truncated spectral triple.

    Attributes
    ----------
    name : str
    D : sparse matrix
        Self-adjoint Dirac operator.
    gamma : sparse matrix
        Grading; the identity for odd models.
    p : int
        Declared dimension.
    parity : {"even", "odd"}
    algebra : dict
        Generator label to operator.
    trunc : int
        Truncation parameter N.
    cutoff : float
        Smallest |D| eigenvalue discarded by the truncation, up to one step.
    interior : dict
        Generator label to boolean mask of untruncated basis vectors.
    params : dict
        Construction parameters.
    experimental : bool
    """

    name: str
    D: object
    gamma: object
    p: int
    parity: str
    algebra: dict
    trunc: int
    cutoff: float
    interior: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    experimental: bool = False

    @property
    def dim_H(self):
        return self.D.shape[0]

    @cached_property
    def eig(self):
        return eig_hermitian(self.D)

    @cached_property
    def abs_D(self):
        return self.eig.apply(np.abs(self.eig.values))

    @cached_property
    def F(self):
        v = self.eig.values
        return self.eig.apply(np.sign(v) * (np.abs(v) > 1e-12))

    @cached_property
    def kernel_proj(self):
        return self.eig.apply((np.abs(self.eig.values) <= 1e-12).astype(float))

    @cached_property
    def D2(self):
        return (self.D @ self.D).tocsr()

    def func(self, f):
        """``f(D)`` through the cached eigensystem."""
        return self.eig.apply(np.asarray(f(self.eig.values)))

    def identity(self):
        return sp.identity(self.dim_H, dtype=complex, format="csr")

    def generator(self, label):
        if label in ("1", "I"):
            return self.identity()
        try:
            return self.algebra[label]
        except KeyError:
            raise KeyError(
                f"unknown generator {label!r}; available: {sorted(self.algebra)}"
            ) from None

    @cached_property
    def interior_all(self):
        """Basis vectors interior for every generator."""
        mask = np.ones(self.dim_H, dtype=bool)
        for m in self.interior.values():
            mask &= m
        return mask


def _shift(n_box, k):
    """Truncated shift ``e_n -> e_{n+k}`` on the index box ``-N..N``."""
    M = n_box.size
    src = np.arange(M)
    dst = src + k
    ok = (dst >= 0) & (dst < M)
    return sp.csr_matrix((np.ones(ok.sum()), (dst[ok], src[ok])), shape=(M, M))


def build_circle(N, labels=(1, -1)):
    """Truncated circle triple on ``span{e_n : |n| <= N}``.

    Parameters
    ----------
    N : int
        Truncation, at least 4.
    labels : sequence of int
        Winding numbers k; generator ``"u^k"`` is the truncated shift by k.

    Returns
    -------
    TripleModel
        Odd model with ``D = diag(n)``, ``p = 1``.
    """
    if int(N) != N or N < 4:
        raise DomainError(f"circle needs integer N >= 4, got {N}")
    N = int(N)
    n = np.arange(-N, N + 1)
    D = sp.diags(n.astype(float), format="csr")
    algebra, interior = {}, {}
    for k in labels:
        k = int(k)
        if abs(k) > N:
            raise DomainError(f"winding {k} exceeds truncation {N}")
        lab = f"u^{k}"
        algebra[lab] = _shift(n, k).astype(complex)
        interior[lab] = np.abs(n) <= N - abs(k)
    return TripleModel(
        name="circle",
        D=D,
        gamma=sp.identity(n.size, dtype=complex, format="csr"),
        p=1,
        parity="odd",
        algebra=algebra,
        trunc=N,
        cutoff=float(N),
        interior=interior,
        params={"N": N, "labels": [int(k) for k in labels]},
    )


def clifford_gammas(p):
    """Self-adjoint anticommuting gammas of size ``2**(p//2)``, p even."""
    if p % 2:
        raise DomainError(f"need even p, got {p}")
    half = p // 2
    gammas = []
    for j in range(half):
        for s in (SIGMA[0], SIGMA[1]):
            factors = [SIGMA[2]] * j + [s] + [np.eye(2)] * (half - j - 1)
            g = np.array([[1.0 + 0j]])
            for f in factors:
                g = np.kron(g, f)
            gammas.append(g)
    return gammas


def _grading(gammas):
    p = len(gammas)
    g = np.eye(gammas[0].shape[0], dtype=complex)
    for gk in gammas:
        g = g @ gk
    return (-1j) ** (p // 2) * g


def build_torus2(N, gamma_unitary=None):
    """Truncated flat 2-torus with ``D = g1 (x) diag(n1) + g2 (x) diag(n2)``.

    Parameters
    ----------
    N : int
        Modes ``|n1|, |n2| <= N``, N >= 2.
    gamma_unitary : (2, 2) ndarray, optional
        Conjugates the Pauli pair ``(sigma1, sigma2)``; the grading is
        ``-i g1 g2``.

    Returns
    -------
    TripleModel
        Even model with ``p = 2``, generators ``U1, U2`` and adjoints.
        Basis order is spinor-major: index ``s * M**2 + i1 * M + i2``.
    """
    if int(N) != N or N < 2:
        raise DomainError(f"torus needs integer N >= 2, got {N}")
    N = int(N)
    V = np.eye(2) if gamma_unitary is None else np.asarray(gamma_unitary, dtype=complex)
    if np.max(np.abs(V.conj().T @ V - np.eye(2))) > 1e-12:
        raise DomainError("gamma_unitary must be unitary")
    g1, g2 = (V @ s @ V.conj().T for s in SIGMA[:2])
    M = 2 * N + 1
    n = np.arange(-N, N + 1)
    n1 = np.repeat(n, M).astype(float)
    n2 = np.tile(n, M).astype(float)
    D = (sp.kron(g1, sp.diags(n1)) + sp.kron(g2, sp.diags(n2))).tocsr()
    gamma = sp.kron(sp.csr_matrix(-1j * g1 @ g2), sp.identity(M * M)).tocsr()
    I2 = sp.identity(2, format="csr")
    S = _shift(n, 1)
    IM = sp.identity(M, format="csr")
    U1 = sp.kron(I2, sp.kron(S, IM)).tocsr().astype(complex)
    U2 = sp.kron(I2, sp.kron(IM, S)).tocsr().astype(complex)
    inner = np.tile((np.abs(n1) <= N - 1) & (np.abs(n2) <= N - 1), 2)
    algebra = {"U1": U1, "U1*": U1.T.tocsr(), "U2": U2, "U2*": U2.T.tocsr()}
    return TripleModel(
        name="torus2",
        D=D,
        gamma=gamma,
        p=2,
        parity="even",
        algebra=algebra,
        trunc=N,
        cutoff=float(N),
        interior={k: inner for k in algebra},
        params={"N": N, "gamma_unitary": V},
    )


def _lattice(N, p):
    pts = np.array(list(itertools.product(range(-N, N + 1), repeat=p)), dtype=int)
    return pts


def moyal_unitary(model, m):
    """Twisted shift ``U(t)``, ``t = h m``, on a Moyal lattice model.

    ``(U(t) xi)(r) = exp(-(i/2) (t, theta r)) xi(r - t)``, sites leaving the
    lattice are discarded.
    """
    N, p, h = model.params["N"], model.p, model.params["spacing"]
    theta = model.params["theta"]
    pts = model.params["points"]
    m = np.asarray(m, dtype=int).reshape(p)
    M = 2 * N + 1
    dst = pts + m
    ok = np.all(np.abs(dst) <= N, axis=1)
    src_idx = np.flatnonzero(ok)
    dst_idx = np.ravel_multi_index((dst[ok] + N).T, (M,) * p)
    t = h * m
    r = h * dst[ok]
    phase = np.exp(-0.5j * (r @ theta.T @ t))
    U = sp.csr_matrix((phase, (dst_idx, src_idx)), shape=(pts.shape[0],) * 2)
    spin = model.params["spin_dim"]
    return sp.kron(sp.identity(spin), U).tocsr()


def build_moyal_lattice(N, p=2, theta=None, spacing=1.0):
    """Moyal-plane lattice model (EXPERIMENTAL).

    Parameters
    ----------
    N : int
        Lattice sites ``t in h Z^p`` with ``|t_k| <= N h``.
    p : int
        Even dimension.
    theta : (p, p) ndarray
        Real antisymmetric deformation matrix.
    spacing : float
        Lattice spacing h.

    Returns
    -------
    TripleModel
        ``D = sum_k g_k (x) diag(t_k)``; generators ``"U[k]"`` and
        ``"U[k]*"`` are ``U(+-h e_k)``.

    Notes
    -----
    The phase carries a factor 1/2 so that
    ``U(t+s) = exp(i/2 (t, theta s)) U(t) U(s)``.
    """
    if p % 2 or p < 2:
        raise DomainError(f"Moyal lattice needs even p >= 2, got {p}")
    if int(N) != N or N < 2:
        raise DomainError(f"Moyal lattice needs integer N >= 2, got {N}")
    N = int(N)
    theta = np.zeros((p, p)) if theta is None else np.asarray(theta, dtype=float)
    if theta.shape != (p, p) or np.max(np.abs(theta + theta.T)) > 0:
        raise DomainError("theta must be a real antisymmetric p x p matrix")
    if spacing <= 0:
        raise DomainError("spacing must be positive")
    pts = _lattice(N, p)
    gammas = clifford_gammas(p)
    spin = gammas[0].shape[0]
    D = sum(
        sp.kron(sp.csr_matrix(g), sp.diags(spacing * pts[:, k].astype(float)))
        for k, g in enumerate(gammas)
    ).tocsr()
    gamma = sp.kron(sp.csr_matrix(_grading(gammas)), sp.identity(pts.shape[0])).tocsr()
    model = TripleModel(
        name="moyal",
        D=D,
        gamma=gamma,
        p=p,
        parity="even",
        algebra={},
        trunc=N,
        cutoff=float(N * spacing),
        params={"N": N, "theta": theta, "spacing": float(spacing), "points": pts,
                "spin_dim": spin},
        experimental=True,
    )
    inner = np.tile(np.all(np.abs(pts) <= N - 1, axis=1), spin)
    for k in range(p):
        e = np.zeros(p, dtype=int)
        e[k] = 1
        model.algebra[f"U[{k}]"] = moyal_unitary(model, e)
        model.algebra[f"U[{k}]*"] = moyal_unitary(model, -e)
        model.interior[f"U[{k}]"] = inner
        model.interior[f"U[{k}]*"] = inner
    return model


def double(m):
    """Doubled model on ``C^2 (x) H`` whose sign operator is ``F_0``.

    The Dirac operator is ``[[D, P], [P, -D]]``; its square is
    ``(D^2 + P) (x) 1``, so its sign is exactly ``[[F, P], [P, -F]]``.
    The grading is ``diag(G, (-1)^deg G)`` with deg 1 for even models, and
    generators act as ``diag(a, 0)``.
    """
    P = m.kernel_proj
    D0 = sp.bmat([[m.D, P], [P, -m.D]], format="csr")
    sgn = -1.0 if m.parity == "even" else 1.0
    gamma = sp.block_diag([m.gamma, sgn * m.gamma], format="csr")
    n = m.dim_H
    Z = sp.csr_matrix((n, n), dtype=complex)
    algebra = {k: sp.block_diag([a, Z], format="csr") for k, a in m.algebra.items()}
    interior = {k: np.concatenate([v, v]) for k, v in m.interior.items()}
    return TripleModel(
        name=m.name + "_doubled",
        D=D0,
        gamma=gamma,
        p=m.p,
        parity=m.parity,
        algebra=algebra,
        trunc=m.trunc,
        cutoff=m.cutoff,
        interior=interior,
        params=dict(m.params, doubled=True),
        experimental=m.experimental,
    )


def pi_op(m, a):
    """Representation ``a -> diag(a, 0)`` on the doubled space."""
    n = m.dim_H
    return sp.block_diag([sp.csr_matrix(a), sp.csr_matrix((n, n))], format="csr")


# --------------------------------------------------------------------------
# derivations


def _check(m, T):
    T = as_operator(T)
    if T.shape != m.D.shape:
        raise DimensionMismatch(f"operator shape {T.shape} does not match H of dim {m.dim_H}")
    return T


def _like(T, R):
    if is_sparse(T):
        return sp.csr_matrix(R)
    return R.toarray() if sp.issparse(R) else np.asarray(R)


def _comm(X, T):
    return _like(T, X @ T - T @ X)


def delta_op(m, T):
    """``[|D|, T]``."""
    return _comm(m.abs_D, _check(m, T))


def partial_op(m, T):
    """``[D, T]``."""
    return _comm(m.D, _check(m, T))


def L_op(m, T):
    """``[D, T] - F [|D|, T]``."""
    T = _check(m, T)
    return _like(T, partial_op(m, T) - m.F @ delta_op(m, T))


def lambda_op(m, T):
    """``(1 + D^2)^(-1/2) [D^2, T]``."""
    T = _check(m, T)
    R = m.func(lambda t: (1.0 + t * t) ** -0.5)
    return _like(T, R @ _comm(m.D2, T))


def d0_operator(m):
    """``F (1 + D^2)^(1/2)`` with the sign taken as +1 on ker D.

    With this convention ``|D_0| = (1 + D^2)^(1/2)`` and ``D_0`` has a
    spectral gap at zero.
    """
    return m.func(lambda t: np.where(t >= 0, 1.0, -1.0) * np.sqrt(1.0 + t * t))


# --------------------------------------------------------------------------
# decay probe


@dataclass(frozen=True)
class DecayProbe:
    """Trace norms of ``X (D + i lam)^(-p-1)`` on a lambda grid.

    Attributes
    ----------
    lambdas : ndarray
    norms : ndarray
        For ``X = delta^k(a)``.
    slope, slope_ci : float
        Log-log least-squares slope and its standard error.
    partial_norms : ndarray
        For ``X = [D, delta^k(a)]``.
    partial_slope, partial_slope_ci : float
    """

    lambdas: np.ndarray
    norms: np.ndarray
    slope: float
    slope_ci: float
    partial_norms: np.ndarray
    partial_slope: float
    partial_slope_ci: float


def _loglog(lams, vals):
    vals = np.asarray(vals)
    if np.any(vals <= 0):
        return float("nan"), float("nan")
    res = stats.linregress(np.log(lams), np.log(vals))
    return float(res.slope), float(res.stderr)


def hypothesis_probe(m, a_label, k, lambda_grid):
    """Probe the decay of ``||delta^k(a) (D + i lam)^(-p-1)||_1`` in lam.

    Raises
    ------
    WindowError
        If any lambda is below 1, the grid is not ascending, or
        ``max(lambda) > N / 4``.
    """
    lams = np.asarray(lambda_grid, dtype=float)
    if lams.size < 2 or np.any(lams < 1) or np.any(np.diff(lams) <= 0):
        raise WindowError("lambda grid must be ascending with values >= 1")
    if lams[-1] > m.trunc / 4:
        raise WindowError(f"lambda_max={lams[-1]} exceeds N/4={m.trunc / 4}")
    X = m.generator(a_label)
    for _ in range(int(k)):
        X = delta_op(m, X)
    dX = partial_op(m, X)
    norms, pnorms = [], []
    for lam in lams:
        R = m.func(lambda t: (t + 1j * lam) ** (-m.p - 1))
        norms.append(trace_norm(X @ R))
        pnorms.append(trace_norm(dX @ R))
    norms, pnorms = np.array(norms), np.array(pnorms)
    s, se = _loglog(lams, norms)
    ps, pse = _loglog(lams, pnorms)
    return DecayProbe(lams, norms, s, se, pnorms, ps, pse)
