"""Heat-trace and zeta asymptotics, the g_z kernel and the csz identity,
and the Subkhankulov Tauberian kernel.

Fourier convention: ``g(t) = int ghat(s) exp(i s t) ds`` with
``ghat(s) = (1/2pi) int g(t) exp(-i s t) dt``.
"""

from dataclasses import dataclass
import warnings

import numpy as np
from scipy import integrate

from ._validation import as_operator, to_dense
from .exceptions import (
    DomainError,
    IllConditioned,
    InsufficientData,
    QuadratureFailure,
    TruncationError,
    TruncationWarning,
)
from .opcore import eig_hermitian, power_map

__all__ = [
    "spectral_trace",
    "heat_trace",
    "min_admissible_s",
    "PowerLawFit",
    "fit_power",
    "zeta",
    "richardson_tail",
    "residue_estimate",
    "g_kernel",
    "KernelSample",
    "g_hat",
    "s_grid_for",
    "csz_check",
    "subkhankulov_kernel",
    "subkhankulov_contour",
    "laplace_logsum",
    "logsum_step",
]

HEAT_TRUNC_TOL = 1e-12


# --------------------------------------------------------------------------
# traces against functions of D


def spectral_trace(m, X, f):
    """``Tr(X f(D))`` through the eigenbasis of D."""
    X = as_operator(X, "X")
    es = m.eig
    return complex(np.sum(np.asarray(f(es.values)) * es.diag_of(X)))


def min_admissible_s(m, tol=HEAT_TRUNC_TOL):
    """Smallest s with ``exp(-s^2 N^2) dim_H <= tol``."""
    return float(np.sqrt(np.log(m.dim_H / tol)) / m.cutoff)


def heat_trace(m, X, s, check=True):
    """``Tr(X (1 + D^2)^(1 - p/2) exp(-s^2 D^2))``.

    Raises
    ------
    TruncationError
        If ``exp(-s^2 N^2) dim_H > 1e-12``; the minimal admissible s is
        attached as ``min_admissible``.
    """
    if s <= 0:
        raise DomainError(f"s must be positive, got {s}")
    if check and np.exp(-(s * m.cutoff) ** 2) * m.dim_H > HEAT_TRUNC_TOL:
        smin = min_admissible_s(m)
        raise TruncationError(
            f"s={s} too small for N={m.trunc}; need s >= {smin:.4g}", smin
        )
    p = m.p
    return spectral_trace(
        m, X, lambda t: (1.0 + t * t) ** (1.0 - p / 2.0) * np.exp(-(s * t) ** 2)
    )


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares fit of ``sum_k c_k s^{e_k}``.

    Attributes
    ----------
    exponents : ndarray
    coefficients : ndarray of complex
    residual_sup : float
        Largest absolute residual over the samples.
    window : (float, float)
        Range of s.
    cond : float
        Condition number of the design matrix.
    """

    exponents: np.ndarray
    coefficients: np.ndarray
    residual_sup: float
    window: tuple
    cond: float

    def coef(self, e):
        idx = np.flatnonzero(np.isclose(self.exponents, e))
        if idx.size == 0:
            raise KeyError(f"exponent {e} not in fit")
        return self.coefficients[idx[0]]

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return sum(c * s**e for c, e in zip(self.coefficients, self.exponents))


def fit_power(samples, exponents, max_cond=1e10):
    """Fit ``value(s) = sum_k c_k s^{e_k}`` by least squares.

    Raises
    ------
    InsufficientData
        Fewer than ``2 * len(exponents)`` samples or non-positive s.
    IllConditioned
        Design matrix condition number above `max_cond`.
    """
    samples = list(samples)
    exps = np.asarray(exponents, dtype=float)
    if len(samples) < 2 * exps.size:
        raise InsufficientData(f"need {2 * exps.size} samples, got {len(samples)}")
    s = np.array([float(x) for x, _ in samples])
    y = np.array([complex(v) for _, v in samples])
    if np.any(s <= 0):
        raise InsufficientData("s-window must be strictly positive")
    A = s[:, None] ** exps[None, :]
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > max_cond:
        raise IllConditioned(f"design matrix condition number {cond:.3e} > {max_cond:.1e}")
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    if np.all(np.isreal(y)):
        coef = coef.real
    resid = float(np.max(np.abs(A @ coef - y)))
    return PowerLawFit(exps, coef, resid, (float(s.min()), float(s.max())), cond)


def zeta(m, X, z):
    """``Tr(X (1 + D^2)^(-z/2))``.

    Values with ``Re z <= p`` are computable at finite truncation but depend
    on N; a TruncationWarning flags them.
    """
    z = complex(z)
    if z.real <= m.p:
        warnings.warn(
            f"Re z = {z.real} <= p = {m.p}: value is truncation-sensitive",
            TruncationWarning,
            stacklevel=2,
        )
    return spectral_trace(m, X, lambda t: np.exp(-0.5 * z * np.log1p(t * t)))


def richardson_tail(value_n, value_half, exponent):
    """Remove a tail ``C N^{-exponent}`` using values at N and N/2.

    Returns ``(v_N - 2^{-a} v_{N/2}) / (1 - 2^{-a})`` with a = exponent.
    """
    r = 2.0 ** (-complex(exponent))
    return (value_n - r * value_half) / (1.0 - r)


def residue_estimate(samples, pole, degree=2):
    """Residue at `pole` from samples of a function with a simple pole.

    Fits ``(z - pole) zeta(z) = r + c_1 (z - pole) + ... + c_d (z - pole)^d``
    and returns r.

    Raises
    ------
    InsufficientData
        Fewer than ``max(4, degree + 1)`` samples, or a sample with
        ``Re z <= pole``.
    """
    samples = list(samples)
    if len(samples) < max(4, degree + 1):
        raise InsufficientData(f"need at least {max(4, degree + 1)} samples")
    z = np.array([complex(a) for a, _ in samples])
    v = np.array([complex(b) for _, b in samples])
    if np.any(z.real <= pole):
        raise InsufficientData("all samples must lie right of the pole")
    x = z - pole
    A = x[:, None] ** np.arange(degree + 1)[None, :]
    coef, *_ = np.linalg.lstsq(A, x * v, rcond=None)
    return complex(coef[0])


# --------------------------------------------------------------------------
# g_z kernel and the csz identity


def g_kernel(z, t):
    """The kernel ``g_z(t)``, with ``g_z(0) = 1 - z/2``.

    Evaluated as ``(e^{-w|t|} - e^{-|t|}) / ((1 + e^{-w|t|})(1 - e^{-|t|}))``
    with ``w = z - 1``, which is the defining ratio rewritten to avoid
    overflow; a Taylor series is used for ``|t| < 1e-4``.

    Raises
    ------
    DomainError
        If ``Re z <= 1``.
    """
    z = complex(z)
    if z.real <= 1:
        raise DomainError(f"g_z needs Re z > 1, got {z}")
    w = z - 1.0
    t = np.abs(np.asarray(t, dtype=float))
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    out = np.empty(t.shape, dtype=complex)
    small = t < 1e-4
    x2 = (t[small] / 2.0) ** 2
    ratio = w * (1 + (1 - w * w) * x2 / 3 + (6 * w * w + 1) * (w * w - 1) * x2 * x2 / 45)
    out[small] = 0.5 * (1.0 - ratio)
    tb = t[~small]
    num = np.exp(-tb) * np.expm1(-(w - 1.0) * tb)
    den = (1.0 + np.exp(-w * tb)) * -np.expm1(-tb)
    out[~small] = num / den
    return out[0] if scalar else out


def _decay_rate(z):
    return min(1.0, (complex(z) - 1.0).real)


@dataclass(frozen=True)
class KernelSample:
    """Samples of ``g_z`` and of its Fourier transform.

    Attributes
    ----------
    z : complex
    s_grid, g_hat_values : ndarray
        Uniform s-grid and ``ghat_z`` on it.
    t_grid, g_values : ndarray
        Check points and ``g_z`` there.
    roundtrip_error : float
        ``max |g(t) - sum_j w_j ghat(s_j) e^{i s_j t}|`` over `t_grid`.
    quad_error : float
        Largest error estimate reported by the quadrature.
    """

    z: complex
    s_grid: np.ndarray
    g_hat_values: np.ndarray
    t_grid: np.ndarray
    g_values: np.ndarray
    roundtrip_error: float
    quad_error: float

    def weights(self):
        return _trapezoid_weights(self.s_grid)


def _trapezoid_weights(s):
    s = np.asarray(s, dtype=float)
    w = np.zeros_like(s)
    if s.size > 1:
        d = np.diff(s)
        w[:-1] += d / 2
        w[1:] += d / 2
    return w


def _ghat_one(z, s, T, tol):
    parts = []
    err = 0.0
    for part in (np.real, np.imag):
        def f(t):
            return float(part(g_kernel(z, t)))

        val, e = integrate.quad(f, 0.0, T, weight="cos", wvar=abs(s),
                                epsabs=tol, epsrel=0.0, limit=500)
        parts.append(val)
        err = max(err, e)
    return (parts[0] + 1j * parts[1]) / np.pi, err / np.pi


_GHAT_CACHE = {}


def g_hat(z, s_grid, tol=1e-10, roundtrip_tol=1e-6, t_check=(0.0, 0.5, 1.0, 2.0)):
    """Fourier transform ``ghat_z(s) = (1/2pi) int g_z(t) e^{-ist} dt``.

    ``g_z`` is even, so the transform is a cosine integral over ``[0, T]``
    with T chosen so that the discarded tail is below `tol`.

    Parameters
    ----------
    z : complex
        ``Re z > 1``.
    s_grid : array_like
        Ascending grid, used for the round-trip check by the trapezoid rule.
    tol : float
        Absolute tolerance of each quadrature and of the t-tail.
    roundtrip_tol : float
        Allowed round-trip error; only meaningful when `s_grid` is a
        symmetric uniform grid wide enough to resolve ghat.

    Raises
    ------
    QuadratureFailure
        If a quadrature misses `tol` or the round trip misses
        `roundtrip_tol`.
    """
    z = complex(z)
    if z.real <= 1:
        raise DomainError(f"g_hat needs Re z > 1, got {z}")
    s_grid = np.asarray(s_grid, dtype=float)
    kappa = _decay_rate(z)
    T = np.log(4.0 / (np.pi * kappa * tol)) / kappa + 5.0
    if abs(g_kernel(z, T)) > kappa * tol:
        raise QuadratureFailure(f"tail of g_z not below tolerance at T={T}")
    vals = np.empty(s_grid.size, dtype=complex)
    qerr = 0.0
    for i, s in enumerate(s_grid):
        key = (z, float(abs(s)), tol)
        if key not in _GHAT_CACHE:
            _GHAT_CACHE[key] = _ghat_one(z, s, T, tol)
        vals[i], e = _GHAT_CACHE[key]
        qerr = max(qerr, e)
    if qerr > 10 * tol:
        raise QuadratureFailure(f"quadrature error estimate {qerr:.2e} exceeds {tol:.1e}")
    t_grid = np.asarray(t_check, dtype=float)
    g_vals = g_kernel(z, t_grid)
    w = _trapezoid_weights(s_grid)
    rec = (w * vals) @ np.exp(1j * np.outer(s_grid, t_grid))
    rt = float(np.max(np.abs(rec - g_vals)))
    if roundtrip_tol is not None and rt > roundtrip_tol:
        raise QuadratureFailure(f"Fourier round trip error {rt:.2e} > {roundtrip_tol:.1e}")
    return KernelSample(z, s_grid, vals, t_grid, g_vals, rt, qerr)


def s_grid_for(z, ds=0.25, tol=1e-10, s_max=200.0):
    """Symmetric uniform s-grid for the csz integral.

    The half-width S is the first multiple of 5 with
    ``|ghat_z(S)| (1 + S) <= tol / 10``.
    """
    S = 5.0
    while S < s_max:
        gh = g_hat(z, [S], tol=tol * 1e-2, roundtrip_tol=None).g_hat_values[0]
        if abs(gh) * (1 + S) <= tol / 10:
            break
        S += 5.0
    n = int(round(S / ds))
    return ds * np.arange(-n, n + 1)


def csz_check(A, B, z, s_grid=None, ghat=None, full_output=False, tol=1e-10):
    """Residual of the csz integral representation.

    Checks ``B^z A^z - Y^z = T_z(0) - int T_z(s) ghat_z(s) ds`` with
    ``Y = A^(1/2) B A^(1/2)``, powers of zero taken as zero.

    Parameters
    ----------
    A, B : ndarray
        Positive matrices.
    z : complex
        ``Re z > 1``.
    s_grid : ndarray, optional
        Uniform symmetric grid; defaults to ``s_grid_for(z)``.
    ghat : KernelSample, optional
        Precomputed transform on `s_grid`.
    full_output : bool
        Also return the integral term.

    Returns
    -------
    float
        Frobenius norm of LHS - RHS; with `full_output`, a tuple
        ``(residual, integral_term)``.
    """
    z = complex(z)
    if z.real <= 1:
        raise DomainError(f"csz_check needs Re z > 1, got {z}")
    A, B = to_dense(as_operator(A, "A")), to_dense(as_operator(B, "B"))
    ea, eb = eig_hermitian(A), eig_hermitian(B)
    for e, name in ((ea, "A"), (eb, "B")):
        if e.values[0] < -1e-10 * max(abs(e.values[-1]), 1.0):
            raise DomainError(f"{name} is not positive")
    av = np.clip(ea.values, 0, None)
    bv = np.clip(eb.values, 0, None)
    ztol_a = 1e-10 * av.max()
    ztol_b = 1e-10 * bv.max()

    def Apow(w):
        return ea.apply(power_map(av, w, ztol_a))

    def Bpow(w):
        return eb.apply(power_map(bv, w, ztol_b))

    Ah = Apow(0.5)
    Y = Ah @ B @ Ah
    ey = eig_hermitian((Y + Y.conj().T) / 2)
    yv = np.clip(ey.values, 0, None)
    ztol_y = 1e-10 * yv.max()

    def Ypow(w):
        return ey.apply(power_map(yv, w, ztol_y))

    BA = B @ Ah

    def comm(X, Z):
        return X @ Z - Z @ X

    lhs = Bpow(z) @ Apow(z) - Ypow(z)
    T0 = Bpow(z - 1) @ comm(BA, Apow(z - 0.5)) + comm(BA, Ah) @ Ypow(z - 1)

    if s_grid is None:
        s_grid = ghat.s_grid if ghat is not None else s_grid_for(z, tol=tol)
    s_grid = np.asarray(s_grid, dtype=float)
    if ghat is None:
        ghat = g_hat(z, s_grid, tol=tol)
    w = _trapezoid_weights(s_grid) * ghat.g_hat_values
    integral = np.zeros_like(lhs, dtype=complex)
    for s, wj in zip(s_grid, w):
        if wj == 0:
            continue
        if s == 0:
            Ts = T0
        else:
            Ts = Bpow(z - 1 + 1j * s) @ comm(BA, Apow(z - 0.5 + 1j * s)) @ Ypow(-1j * s)
            Ts = Ts + Bpow(1j * s) @ comm(BA, Apow(0.5 + 1j * s)) @ Ypow(z - 1 - 1j * s)
        integral += wj * Ts
    resid = float(np.linalg.norm(lhs - (T0 - integral)))
    if full_output:
        return resid, integral
    return resid


# --------------------------------------------------------------------------
# Subkhankulov kernel


def _check_u(u):
    if not 0 < u < 1:
        raise DomainError(f"u must lie in (0, 1), got {u}")


def subkhankulov_kernel(u, v, epsrel=1e-12):
    """``(1/2pi) int_{-1}^{1} (1-t^2)^2 / (u+it) exp((u+it) v) dt``.

    The imaginary part cancels by parity, leaving
    ``(e^{uv}/pi) int_0^1 (1-t^2)^2 (u cos vt + t sin vt) / (u^2+t^2) dt``.

    Raises
    ------
    QuadratureFailure
        If the quadrature error estimate exceeds the tolerance.
    """
    _check_u(u)

    def h_cos(t):
        return (1 - t * t) ** 2 * u / (u * u + t * t)

    def h_sin(t):
        return (1 - t * t) ** 2 * t / (u * u + t * t)

    opts = dict(epsabs=0.0, epsrel=epsrel, limit=400)
    with warnings.catch_warnings():
        # roundoff warnings at epsrel=1e-12 are expected; the error estimate
        # is checked below instead
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if v == 0:
            a, ea = integrate.quad(h_cos, 0.0, 1.0, points=[u], **opts)
            b, eb = 0.0, 0.0
        else:
            a, ea = integrate.quad(h_cos, 0.0, 1.0, weight="cos", wvar=v, **opts)
            b, eb = integrate.quad(h_sin, 0.0, 1.0, weight="sin", wvar=v, **opts)
    val = a + b
    err = ea + eb
    if err > max(1e3 * epsrel * (abs(a) + abs(b)), 1e-14):
        raise QuadratureFailure(f"kernel quadrature error {err:.2e} too large")
    return complex(np.exp(u * v) * val / np.pi)


def _path_integral(func, z_of, dz_of, a, b, epsabs):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re, _ = integrate.quad(lambda x: (func(z_of(x)) * dz_of(x)).real, a, b,
                               epsabs=epsabs, epsrel=1e-13, limit=400)
        im, _ = integrate.quad(lambda x: (func(z_of(x)) * dz_of(x)).imag, a, b,
                               epsabs=epsabs, epsrel=1e-13, limit=400)
    return re + 1j * im


def subkhankulov_contour(u, v):
    """The same kernel by deforming the segment ``[-i, i]``.

    For ``v >= 0`` the segment is moved left around the pole at ``-u``, along
    the boundary of the unit neighbourhood of ``[-1, 0]``; for ``v < 0`` it
    is moved right onto the unit half-circle. With
    ``f(z) = (1 + z^2)^2 / (u + z)``::

        v >= 0:  K = (1+u^2)^2 - e^{uv}/(2 pi i) int_{gamma_0} f e^{zv} dz
        v <  0:  K = -e^{uv}/(2 pi i) int_{gamma_2} f e^{zv} dz

    both paths running from ``i`` to ``-i``.
    """
    _check_u(u)

    def f(z):
        return (1 + z * z) ** 2 / (u + z) * np.exp(z * v)

    eps = 1e-15
    if v >= 0:
        total = _path_integral(f, lambda x: -x + 1j, lambda x: -1.0, 0.0, 1.0, eps)
        total += _path_integral(
            f,
            lambda p: -1.0 + np.exp(1j * p),
            lambda p: 1j * np.exp(1j * p),
            np.pi / 2,
            3 * np.pi / 2,
            eps,
        )
        total += _path_integral(f, lambda x: -1.0 + x - 1j, lambda x: 1.0, 0.0, 1.0, eps)
        return complex((1 + u * u) ** 2 - np.exp(u * v) * total / (2j * np.pi))
    total = _path_integral(
        f, lambda p: np.exp(1j * p), lambda p: 1j * np.exp(1j * p), np.pi / 2, -np.pi / 2, eps
    )
    return complex(-np.exp(u * v) * total / (2j * np.pi))


# --------------------------------------------------------------------------
# log-sum Laplace transform


def _pairs(eigen_pairs):
    arr = np.asarray(list(eigen_pairs), dtype=complex)
    if arr.size == 0:
        return np.zeros(0, complex), np.zeros(0)
    a, mu = arr[:, 0], arr[:, 1].real
    if np.any(mu <= 0) or np.any(np.diff(mu) > 0):
        raise DomainError("mu must be positive and non-increasing")
    return a, mu


def laplace_logsum(eigen_pairs, z):
    """``sum_k <A e_k, e_k> mu_k^{1+z}``, the finite ``Tr(A V^{1+z})``.

    Parameters
    ----------
    eigen_pairs : sequence of (complex, float)
        Diagonal entry of A in the eigenbasis of V, and the eigenvalue
        ``mu(k, V)``, with mu positive and non-increasing.
    z : complex
        ``Re z > 0``.
    """
    z = complex(z)
    if z.real <= 0:
        raise DomainError(f"laplace_logsum needs Re z > 0, got {z}")
    a, mu = _pairs(eigen_pairs)
    return complex(np.sum(a * np.exp((1 + z) * np.log(mu))))


def logsum_step(eigen_pairs, t):
    """Step function ``b(t) = sum_{mu_k > e^{-t}} <A e_k, e_k> mu_k``."""
    a, mu = _pairs(eigen_pairs)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    csum = np.concatenate([[0], np.cumsum(a * mu)])
    # mu is non-increasing, so the count with mu > e^{-t} is a prefix
    counts = np.searchsorted(-mu, -np.exp(-t), side="left")
    out = csum[counts]
    return out[0] if out.size == 1 else out
