"""Hochschild chains over a matrix algebra and the maps built on them.

Chains are formal term lists; merging of equal factor tuples happens only
inside :meth:`TensorChain.collect`. Zero tests on chains use the Frobenius
norm of the tensor ``sum_i c_i a_i0 (x) ... (x) a_in``, evaluated through
the Gram matrix of the terms so the tensor is never formed.
"""

from dataclasses import dataclass
import warnings

import numpy as np
import scipy.sparse as sp

from ._validation import is_sparse, max_abs
from .exceptions import ArityMismatch, CycleWarning, DegreeError, DimensionMismatch
from .triples import delta_op

__all__ = [
    "TensorChain",
    "boundary",
    "chain_norm",
    "is_cycle",
    "omega_map",
    "ch_map",
    "w_map",
    "n_count",
    "chern",
    "MultilinearFunctional",
    "coboundary",
    "coboundary_pair",
    "trace_functional",
    "heat_functionals",
]


def _prod(ops):
    out = ops[0]
    for op in ops[1:]:
        out = out @ op
    return out


def _inner(A, B):
    """Frobenius inner product ``sum A conj(B)``."""
    if is_sparse(A) or is_sparse(B):
        A, B = sp.csr_matrix(A), sp.csr_matrix(B)
        return complex(A.multiply(B.conj()).sum())
    return complex(np.vdot(B, A))


def _compress(A, mask):
    if mask is None:
        return A
    idx = np.flatnonzero(mask)
    if is_sparse(A):
        return sp.csr_matrix(A)[idx][:, idx]
    return A[np.ix_(idx, idx)]


@dataclass(frozen=True)
class TensorChain:
    """Formal combination of elementary tensors ``a_0 (x) ... (x) a_n``.

    Attributes
    ----------
    degree : int
        n, so each term has n + 1 factors.
    terms : tuple of (complex, tuple of operators)
    """

    degree: int
    terms: tuple = ()

    def __post_init__(self):
        terms = tuple((complex(c), tuple(f)) for c, f in self.terms)
        shape = None
        for _, factors in terms:
            if len(factors) != self.degree + 1:
                raise DegreeError(
                    f"term has {len(factors)} factors, degree {self.degree} needs "
                    f"{self.degree + 1}"
                )
            for a in factors:
                if shape is None:
                    shape = a.shape
                elif a.shape != shape:
                    raise DimensionMismatch(f"factor shapes differ: {shape} vs {a.shape}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def elementary(cls, *factors, coef=1.0):
        return cls(len(factors) - 1, ((coef, factors),))

    @classmethod
    def from_labels(cls, model, spec):
        """Build from ``[(coef, [label, ...]), ...]`` over model generators."""
        terms = [(c, tuple(model.generator(l) for l in labels)) for c, labels in spec]
        if not terms:
            raise DegreeError("empty chain spec has no degree; use TensorChain(n)")
        return cls(len(terms[0][1]) - 1, tuple(terms))

    @property
    def dim(self):
        return self.terms[0][1][0].shape[0] if self.terms else None

    def __add__(self, other):
        if other.degree != self.degree:
            raise DegreeError(f"cannot add degree {self.degree} and {other.degree}")
        return TensorChain(self.degree, self.terms + other.terms)

    def __mul__(self, scalar):
        return TensorChain(self.degree, tuple((scalar * c, f) for c, f in self.terms))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __len__(self):
        return len(self.terms)

    def collect(self, tol=1e-12):
        """Merge terms with equal factor tuples and drop small coefficients.

        Factors count as equal when they agree entrywise to `tol` times the
        largest entry among them.
        """
        reps = []
        for c, factors in self.terms:
            for rep in reps:
                if all(
                    max_abs(a - b) <= tol * max(max_abs(a), max_abs(b), 1e-300)
                    for a, b in zip(rep[1], factors)
                ):
                    rep[0] += c
                    break
            else:
                reps.append([c, factors])
        scale = max((abs(c) for c, _ in self.terms), default=0.0)
        kept = tuple((c, f) for c, f in reps if abs(c) > tol * max(scale, 1.0))
        return TensorChain(self.degree, kept)


def boundary(c):
    """Hochschild boundary, including the cyclic last term.

    Raises
    ------
    DegreeError
        On degree 0.
    """
    n = c.degree
    if n < 1:
        raise DegreeError("boundary needs degree >= 1")
    out = []
    for coef, a in c.terms:
        for k in range(n):
            f = a[:k] + (a[k] @ a[k + 1],) + a[k + 2 :]
            out.append(((-1) ** k * coef, f))
        out.append(((-1) ** n * coef, (a[n] @ a[0],) + a[1:n]))
    return TensorChain(n - 1, tuple(out))


def chain_norm(c, mask=None):
    """Frobenius norm of the tensor represented by `c`.

    Parameters
    ----------
    mask : boolean ndarray, optional
        Compress every factor to these rows and columns first, e.g. to drop
        truncation-edge modes.
    """
    if not c.terms:
        return 0.0
    coefs = np.array([t[0] for t in c.terms])
    facs = [[_compress(a, mask) for a in t[1]] for t in c.terms]
    T = len(facs)
    G = np.ones((T, T), dtype=complex)
    for i in range(T):
        for j in range(i, T):
            g = 1.0 + 0j
            for a, b in zip(facs[i], facs[j]):
                g *= _inner(a, b)
                if g == 0:
                    break
            G[i, j] = g
            G[j, i] = np.conj(g)
    val = np.real(coefs @ G @ coefs.conj())
    return float(np.sqrt(max(val, 0.0)))


def is_cycle(c, tol, mask=None):
    """Whether ``b(c)`` vanishes to `tol`.

    The Frobenius norm of the collected boundary tensor bounds every entry,
    so this test is at least as strict as an entrywise check.
    """
    return chain_norm(boundary(c).collect(), mask=mask) <= tol


def _check_model(c, m):
    if c.degree != m.p:
        raise DegreeError(f"chain degree {c.degree} differs from model dimension {m.p}")
    if c.terms and c.dim != m.dim_H:
        raise DimensionMismatch(f"chain acts on dim {c.dim}, model on {m.dim_H}")


def _sum(ops, shape):
    out = sp.csr_matrix(shape, dtype=complex)
    for op in ops:
        out = out + op
    return sp.csr_matrix(out)


def omega_map(c, m):
    """``sum coef * G a_0 [D, a_1] ... [D, a_p]``."""
    _check_model(c, m)
    D, G = m.D, m.gamma
    ops = []
    for coef, a in c.terms:
        ops.append(coef * _prod([G, a[0]] + [D @ x - x @ D for x in a[1:]]))
    return _sum(ops, m.D.shape)


def ch_map(c, m, F=None):
    """``sum coef * G F [F, a_0] ... [F, a_p]``."""
    _check_model(c, m)
    F = m.F if F is None else F
    ops = []
    for coef, a in c.terms:
        ops.append(coef * _prod([m.gamma, F] + [F @ x - x @ F for x in a]))
    return _sum(ops, m.D.shape)


def w_map(c, m, A):
    """``sum coef * G a_0 b_1(a_1) ... b_p(a_p)``.

    ``b_k`` is ``delta`` for k in `A` and ``[F, .]`` otherwise.
    """
    _check_model(c, m)
    A = set(A)
    if not A <= set(range(1, m.p + 1)):
        raise ValueError(f"A must be a subset of 1..{m.p}")
    F = m.F
    ops = []
    for coef, a in c.terms:
        fac = [m.gamma, a[0]]
        for k in range(1, m.p + 1):
            x = a[k]
            fac.append(delta_op(m, x) if k in A else F @ x - x @ F)
        ops.append(coef * _prod(fac))
    return _sum(ops, m.D.shape)


def n_count(A, p):
    """``#{(j, k) : j < k, j in A, k not in A}`` with j, k in 1..p."""
    A = set(A)
    return sum(1 for j in A for k in range(j + 1, p + 1) if k not in A)


def _doubled_pieces(m):
    n = m.dim_H
    P = sp.csr_matrix(m.kernel_proj)
    F = sp.csr_matrix(m.F)
    F0 = sp.bmat([[F, P], [P, -F]], format="csr")
    sgn = -1.0 if m.parity == "even" else 1.0
    G0 = sp.block_diag([m.gamma, sgn * m.gamma], format="csr")
    Z = sp.csr_matrix((n, n), dtype=complex)
    return F0, G0, lambda a: sp.block_diag([sp.csr_matrix(a), Z], format="csr")


def chern(c, m, cycle_tol=1e-8, mask="interior"):
    """Chern character through the doubling trick.

    ``Ch(c) = 1/2 (Tr_2 (x) Tr)(G_0 F_0 prod_k [F_0, pi(a_k)])`` on
    ``C^2 (x) H`` with ``F_0 = [[F, P], [P, -F]]``.

    Parameters
    ----------
    cycle_tol : float or None
        Warn with CycleWarning if ``||b(c)||`` exceeds this; None skips.
    mask : "interior", None or boolean ndarray
        Modes used for the cycle test; "interior" excludes truncation edges.

    Returns
    -------
    complex
        When ``P = 0`` the undoubled value ``Tr(ch(c)) / 2`` is computed too
        and must agree to 1e-10 relative.
    """
    _check_model(c, m)
    if cycle_tol is not None and c.terms:
        msk = m.interior_all if isinstance(mask, str) else mask
        if not is_cycle(c, cycle_tol, mask=msk):
            warnings.warn("chern called on a chain that is not a cycle", CycleWarning,
                          stacklevel=2)
    F0, G0, pi = _doubled_pieces(m)
    total = 0j
    for coef, a in c.terms:
        ops = [G0, F0] + [F0 @ pi(x) - pi(x) @ F0 for x in a]
        total += coef * _prod(ops).diagonal().sum()
    value = 0.5 * total
    if m.kernel_proj.nnz == 0 or max_abs(m.kernel_proj) == 0:
        direct = 0.5 * ch_map(c, m).diagonal().sum()
        if abs(direct - value) > 1e-10 * max(1.0, abs(value)):
            raise AssertionError(f"doubled Ch {value} differs from direct {direct}")
    return complex(value)


@dataclass(frozen=True)
class MultilinearFunctional:
    """Multilinear functional on ``arity``-tuples of algebra elements."""

    arity: int
    eval: object

    def __call__(self, c):
        """Evaluate linearly on a chain with ``arity`` factors per term."""
        if c.degree + 1 != self.arity:
            raise ArityMismatch(f"functional arity {self.arity}, chain has {c.degree + 1} factors")
        return complex(sum(coef * self.eval(*a) for coef, a in c.terms))

    def check_linearity(self, rng, dim, trials=3, rtol=1e-9):
        """Spot-check linearity in each slot on random matrices."""
        def rnd():
            return rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))

        for _ in range(trials):
            base = [rnd() for _ in range(self.arity)]
            for k in range(self.arity):
                x, y = rnd(), rnd()
                al, be = rng.standard_normal(2) + 1j * rng.standard_normal(2)
                lhs = self.eval(*base[:k], al * x + be * y, *base[k + 1 :])
                rhs = al * self.eval(*base[:k], x, *base[k + 1 :]) + be * self.eval(
                    *base[:k], y, *base[k + 1 :]
                )
                if abs(lhs - rhs) > rtol * max(abs(lhs), abs(rhs), 1.0):
                    return False
        return True


def coboundary(theta):
    """Hochschild coboundary ``b theta`` as a functional of arity + 1."""
    n = theta.arity

    def ev(*a):
        out = 0j
        for k in range(n):
            out += (-1) ** k * theta.eval(*a[:k], a[k] @ a[k + 1], *a[k + 2 :])
        out += (-1) ** n * theta.eval(a[n] @ a[0], *a[1:n])
        return out

    return MultilinearFunctional(n + 1, ev)


def coboundary_pair(theta, c):
    """``theta(b c)``, which equals ``(b theta)(c)``.

    Raises
    ------
    ArityMismatch
        Unless ``theta.arity`` equals the degree of `c`.
    """
    if theta.arity != c.degree:
        raise ArityMismatch(f"functional arity {theta.arity}, chain degree {c.degree}")
    return theta(boundary(c))


def _trace(X):
    return complex(X.diagonal().sum())


def trace_functional(arity, weight=None):
    """``(a_0, ..., a_n) -> Tr(W a_0 ... a_n)``."""
    def ev(*a):
        X = _prod(list(a))
        return _trace(X if weight is None else weight @ X)

    return MultilinearFunctional(arity, ev)


def heat_functionals(m, s):
    """Heat functionals ``L_s`` (arity p) and ``K_s`` (arity p + 1).

    With ``T = F exp(-s^2 D^2)``::

        L_s(a_0, ..., a_{p-1}) = Tr(G a_0 [F,a_1] ... [F,a_{p-1}] T)
        K_s(a_0, ..., a_p)     = Tr(G a_0 [F,a_1] ... [F,a_{p-1}] [T, a_p])

    Their Hochschild coboundary relation is ``b L_s = (-1)^p K_s``.
    """
    F = m.F
    T = sp.csr_matrix(F @ m.func(lambda t: np.exp(-(s * t) ** 2)))

    def comm(x):
        return F @ x - x @ F

    def L(*a):
        return _trace(_prod([m.gamma, a[0]] + [comm(x) for x in a[1:]] + [T]))

    def K(*a):
        tail = T @ a[-1] - a[-1] @ T
        return _trace(_prod([m.gamma, a[0]] + [comm(x) for x in a[1:-1]] + [tail]))

    return MultilinearFunctional(m.p, L), MultilinearFunctional(m.p + 1, K)
