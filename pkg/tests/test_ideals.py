import numpy as np
import pytest

from nclab import ideals, opcore, props, triples
from nclab.exceptions import DomainError, InsufficientData
from nclab.opcore import SingularSpectrum


def spec(v):
    return SingularSpectrum.from_values(v)


# norms


def test_weak_norm_examples():
    n = 50
    assert ideals.weak_norm(spec(1.0 / np.arange(1, n + 1)), 1) == pytest.approx(1.0)
    for p in (1, 2, 5.5):
        assert ideals.weak_norm(spec([1.0, 0, 0]), p) == 1.0
    with pytest.raises(DomainError):
        ideals.weak_norm(spec([1.0]), 0.5)


def test_weak_norm_homogeneous():
    s = spec(np.random.default_rng(0).uniform(0, 1, 20))
    for t in (0.3, 7.0):
        assert ideals.weak_norm(s.scaled(t), 2) == pytest.approx(t * ideals.weak_norm(s, 2), rel=1e-15)


def test_lorentz_examples():
    assert ideals.lorentz_q1_norm(spec([1.0, 0, 0, 0]), 2) == 1.0
    assert ideals.lorentz_q1_norm(spec([1.0, 1.0]), 2) == pytest.approx(1 + 2**-0.5)
    with pytest.raises(DomainError):
        ideals.lorentz_q1_norm(spec([1.0]), 1.0)


def test_weak_holder_with_recorded_constant():
    measured, threshold, _ = props.prop_weak_holder(np.random.default_rng(1))
    assert measured < threshold


def test_lorentz_holder():
    measured, threshold, _ = props.prop_lorentz_holder(np.random.default_rng(2))
    assert measured < threshold


# submajorization


def test_submajorizes_reflexive():
    s = spec([3.0, 2.0, 0.5])
    for mode in ("hardy_littlewood", "logarithmic"):
        assert ideals.submajorizes(s, s, mode)


def test_submajorizes_padding_and_zero_handling():
    a = spec([2.0, 1.0])
    assert ideals.submajorizes(a, spec([1.5, 1.0, 0.4]), "hardy_littlewood")
    assert not ideals.submajorizes(a, spec([2.5, 0.6, 0.1]), "hardy_littlewood")
    assert ideals.submajorizes(spec([2.0, 1.0, 0.0]), spec([1.0, 1.0, 1.0]), "logarithmic") is False
    assert ideals.submajorizes(spec([2.0, 1.0, 1.0]), spec([1.0, 1.0, 0.0]), "logarithmic")


def test_hardy_littlewood_partial_order():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a, b, c = (spec(rng.uniform(0, 1, 6)) for _ in range(3))
        if ideals.submajorizes(a, b) and ideals.submajorizes(b, c):
            assert ideals.submajorizes(a, c)
        ab = ideals.submajorizes(a, b) and ideals.submajorizes(b, a)
        if ab:
            np.testing.assert_allclose(a.mu, b.mu, atol=1e-12)


def test_alt_r2():
    rng = np.random.default_rng(4)
    for _ in range(20):
        A, B = props.random_positive(rng, 8), props.random_positive(rng, 8)
        lhs = SingularSpectrum(opcore.singular_values(A @ B).mu ** 2)
        rhs = opcore.singular_values(opcore.complex_power(A, 2) @ opcore.complex_power(B, 2))
        assert ideals.submajorizes(rhs, lhs, "logarithmic", rtol=1e-10)


def test_log_majorization_weak_norm_bound():
    measured, threshold, _ = props.prop_log_weak(np.random.default_rng(5), pairs=30)
    assert measured < threshold


# Dixmier means


def test_dixmier_harmonic():
    n = 10**5
    mu = SingularSpectrum(1.0 / np.arange(1, n + 2))
    assert abs(ideals.dixmier_mean(mu, n) - 1) <= 0.10
    means = ideals.dixmier_means(mu)
    for k in (100, 1000, 10**4, 10**5):
        assert abs(means[k] - 1) <= 3 / np.log(k)


def test_dixmier_trace_class_vanishes():
    mu = SingularSpectrum(2.0 ** -np.arange(60))
    m = ideals.dixmier_means(mu)
    assert m[59] < m[10] < m[1]
    assert m[59] < 0.5


def test_dixmier_circle():
    m = triples.build_circle(10**5)
    s = opcore.singular_values(m.func(lambda x: (1 + x * x) ** -0.5))
    assert abs(ideals.dixmier_mean(s, 10**5) - 2) <= 0.04


def test_dixmier_index_error():
    with pytest.raises(IndexError):
        ideals.dixmier_mean(spec([1.0, 0.5]), 2)


def test_dixmier_additivity_surrogate():
    rng = np.random.default_rng(6)
    n = 64
    k = np.arange(n)
    for _ in range(5):
        U, _ = np.linalg.qr(props.random_matrix(rng, n))
        A = np.diag(1.0 / (k + 1))
        B = (U * (rng.uniform(0.5, 1.0, n) / (k + 1))) @ U.conj().T
        C = ideals.weak_norm(opcore.singular_values(A + B), 1)
        for j in (10, 30, 63):
            gap = (ideals.dixmier_mean(A + B, j) - ideals.dixmier_mean(A, j)
                   - ideals.dixmier_mean(B, j))
            assert abs(gap) <= C / np.log(2 + j) + 1e-12


# measurability fit


def harmonic_sums(lam, ns):
    csum = np.cumsum(lam)
    return [(n, csum[n]) for n in ns]


NS = np.unique(np.geomspace(1, 10**5, 40).astype(int))


def test_fit_harmonic():
    k = np.arange(10**5 + 1)
    fit = ideals.measurability_fit(harmonic_sums(1.0 / (k + 1), NS))
    assert fit.c.real == pytest.approx(1.0, abs=1e-3)
    assert fit.remainder_sup <= 1.0
    # remainder recomputed exactly from inputs
    np.testing.assert_allclose(fit.remainder_sup, fit.remainders().max())


def test_fit_alternating():
    k = np.arange(10**5 + 1)
    fit = ideals.measurability_fit(harmonic_sums((-1.0) ** k / (k + 1), NS))
    assert abs(fit.c) <= 1e-3
    assert fit.remainder_sup <= 1.0


def test_fit_flags_unbounded_remainder():
    k = np.arange(10**5 + 1)
    lam = 1 / (k + 1) + 1 / np.sqrt(k + 1)
    fit = ideals.measurability_fit(harmonic_sums(lam, NS))
    assert fit.remainder_sup > 100
    assert abs(fit.trend) > 10
    # remainder_sup grows like n^(1/2) per decade of window (the ratio
    # approaches sqrt(10) from above as the log part becomes negligible)
    sups = [ideals.measurability_fit(harmonic_sums(lam, NS[NS <= top])).remainder_sup
            for top in (10**3, 10**4, 10**5)]
    ratios = np.array(sups[1:]) / np.array(sups[:-1])
    assert np.all((ratios > 3.0) & (ratios < 4.5)), ratios


def test_fit_insufficient_data():
    with pytest.raises(InsufficientData):
        ideals.measurability_fit([(n, 1.0) for n in range(1, 5)])
    with pytest.raises(InsufficientData):
        ideals.measurability_fit([(n, 1.0) for n in range(1, 20)])  # < 2 decades


def test_eigen_partial_sums_ordering():
    T = np.diag([0.5, -2.0, 1.0 + 1.0j])
    ns, sums = ideals.eigen_partial_sums(T)
    np.testing.assert_allclose(sums, np.cumsum([-2.0, 1.0 + 1.0j, 0.5]))
