"""Singular-value functionals: weak Schatten and Lorentz norms,
submajorization, Dixmier means and the log-sum measurability fit.

Extended limits cannot be realised numerically. The full sequence of
log-Cesaro means is exposed instead, together with a least-squares fit of
eigenvalue partial sums against ``log n``; a bounded remainder across the
fit window is the finite stand-in for universal measurability.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, InsufficientData
from .opcore import SingularSpectrum, eigenvalues, singular_values

__all__ = [
    "SingularSpectrum",
    "weak_norm",
    "lorentz_q1_norm",
    "submajorizes",
    "dixmier_mean",
    "dixmier_means",
    "MeasurabilityFit",
    "measurability_fit",
    "eigen_partial_sums",
    "spectrum_of",
]


def spectrum_of(T):
    """Singular spectrum of an operator, or pass a spectrum through."""
    if isinstance(T, SingularSpectrum):
        return T
    return singular_values(T)


def weak_norm(s, p):
    """Weak Schatten quasi-norm ``sup_k (k+1)**(1/p) mu[k]``.

    Parameters
    ----------
    s : SingularSpectrum
    p : float
        Exponent, at least 1.
    """
    if p < 1:
        raise DomainError(f"weak_norm needs p >= 1, got {p}")
    mu = spectrum_of(s).mu
    if mu.size == 0:
        return 0.0
    k = np.arange(1, mu.size + 1, dtype=float)
    return float(np.max(k ** (1.0 / p) * mu))


def lorentz_q1_norm(s, q):
    """Lorentz norm ``sum_k mu[k] (1+k)**(1/q - 1)``, q > 1."""
    if q <= 1:
        raise DomainError(f"lorentz_q1_norm needs q > 1, got {q}")
    mu = spectrum_of(s).mu
    k = np.arange(1, mu.size + 1, dtype=float)
    return float(np.sum(mu * k ** (1.0 / q - 1.0)))


def submajorizes(a, b, mode="hardy_littlewood", rtol=1e-12):
    """Whether `a` submajorizes `b`.

    Parameters
    ----------
    a, b : SingularSpectrum
    mode : {"hardy_littlewood", "logarithmic"}
        Compare partial sums, or partial products of the sequences.
    rtol : float
        Relative slack for rounding in the partial sums (or log-sums).

    Returns
    -------
    bool
        True iff every partial sum (product) of `b` is dominated by the
        corresponding one of `a`.

    Notes
    -----
    The shorter sequence is padded with zeros. In logarithmic mode the
    log-sums are compared only over indices where both entries are positive,
    and the comparison fails if `b` has more positive entries than `a`.
    """
    x = spectrum_of(a).mu
    y = spectrum_of(b).mu
    n = max(x.size, y.size)
    x = np.pad(x, (0, n - x.size))
    y = np.pad(y, (0, n - y.size))
    if mode == "hardy_littlewood":
        sa, sb = np.cumsum(x), np.cumsum(y)
        return bool(np.all(sb <= sa + rtol * np.maximum(np.abs(sa), 1e-300)))
    if mode == "logarithmic":
        na, nb = np.count_nonzero(x > 0), np.count_nonzero(y > 0)
        if nb > na:
            return False
        m = min(na, nb)
        la, lb = np.cumsum(np.log(x[:m])), np.cumsum(np.log(y[:m]))
        slack = rtol * np.maximum(np.abs(la), 1.0)
        return bool(np.all(lb <= la + slack))
    raise DomainError(f"unknown submajorization mode {mode!r}")


def dixmier_means(s):
    """All log-Cesaro means ``sum_{k<=n} mu[k] / log(2+n)``."""
    mu = spectrum_of(s).mu
    n = np.arange(mu.size, dtype=float)
    return np.cumsum(mu) / np.log(2.0 + n)


def dixmier_mean(s, n):
    """Log-Cesaro mean of the singular values at index `n`."""
    mu = spectrum_of(s).mu
    if not 0 <= n < mu.size:
        raise IndexError(f"index {n} outside spectrum of length {mu.size}")
    return float(np.sum(mu[: n + 1]) / np.log(2.0 + n))


def eigen_partial_sums(T, ns=None):
    """Partial sums of eigenvalues ordered by non-increasing modulus.

    Returns ``(ns, sums)`` with ``sums[i] = sum_{k <= ns[i]} lambda(k, T)``.
    """
    lam = eigenvalues(T)
    csum = np.cumsum(lam)
    if ns is None:
        ns = np.arange(lam.size)
    ns = np.asarray(ns, dtype=int)
    return ns, csum[ns]


@dataclass(frozen=True)
class MeasurabilityFit:
    """Least-squares fit ``S(n) = c log n + b`` of eigenvalue partial sums.

    Attributes
    ----------
    c : complex
        Log coefficient.
    intercept : complex
        Fitted constant.
    remainder_sup : float
        ``max |S(n) - c log n|`` over the window.
    window : tuple of int
        Smallest and largest n used.
    trend : float
        Slope of ``|S(n) - c log n|`` against ``log n`` over the upper half
        of the window; near zero when the remainder is bounded.
    ns, sums : ndarray
        The samples inside the window.
    """

    c: complex
    intercept: complex
    remainder_sup: float
    window: tuple
    trend: float
    ns: np.ndarray
    sums: np.ndarray

    def remainders(self):
        return np.abs(self.sums - self.c * np.log(self.ns))


def measurability_fit(eigen_sums, window=None, min_points=8, min_decades=2.0):
    """Fit eigenvalue partial sums against ``log n``.

    Parameters
    ----------
    eigen_sums : sequence of (n, S(n))
        Index and partial sum ``sum_{k<=n} lambda(k)``, with n >= 1.
    window : (n_lo, n_hi), optional
        Range of n used in the fit. Defaults to the upper half of the
        supplied n values.
    min_points : int
        Minimum number of samples supplied.
    min_decades : float
        Minimum span ``log10(n_max / n_min)`` of the supplied samples.

    Returns
    -------
    MeasurabilityFit

    Raises
    ------
    InsufficientData
        If fewer than `min_points` samples or the n range is too narrow.
    """
    data = list(eigen_sums)
    if len(data) < min_points:
        raise InsufficientData(f"need at least {min_points} samples, got {len(data)}")
    ns = np.array([float(n) for n, _ in data])
    sums = np.array([complex(v) for _, v in data])
    order = np.argsort(ns, kind="stable")
    ns, sums = ns[order], sums[order]
    if np.any(ns < 1):
        raise InsufficientData("sample indices must be >= 1")
    if np.log10(ns[-1] / ns[0]) < min_decades:
        raise InsufficientData(
            f"n must span {min_decades} decades, got {np.log10(ns[-1] / ns[0]):.2f}"
        )
    if window is None:
        sel = np.arange(ns.size // 2, ns.size)
    else:
        sel = np.flatnonzero((ns >= window[0]) & (ns <= window[1]))
    if sel.size < 3:
        raise InsufficientData("fit window holds fewer than 3 samples")
    x, y = np.log(ns[sel]), sums[sel]
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    c, b = coef
    if np.all(np.isreal(sums)):
        c, b = c.real, b.real
    rem = np.abs(y - c * x)
    half = np.arange(rem.size // 2, rem.size)
    trend = float(np.polyfit(x[half], rem[half], 1)[0]) if half.size >= 2 else 0.0
    return MeasurabilityFit(
        c=c,
        intercept=b,
        remainder_sup=float(np.max(rem)),
        window=(int(ns[sel[0]]), int(ns[sel[-1]])),
        trend=trend,
        ns=ns[sel],
        sums=y,
    )
