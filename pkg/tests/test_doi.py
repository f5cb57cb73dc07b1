import numpy as np
import pytest

from nclab import doi, props
from nclab.exceptions import DivergentDecomposition, NotSelfAdjoint, SymbolSingular


@pytest.fixture
def inst():
    rng = np.random.default_rng(11)
    return props._doi_instance(rng)


def test_identity_symbol(inst):
    X, Y, A = inst
    np.testing.assert_allclose(doi.doi_spectral(X, Y, lambda l, m: np.ones_like(l * m), A), A,
                               atol=1e-13)


def test_separated_variables(inst):
    X, Y, A = inst
    np.testing.assert_allclose(doi.doi_spectral(X, Y, lambda l, m: l * m, A), X @ A @ Y,
                               atol=1e-12)


def test_divided_difference_example():
    X = np.diag([1.0, 2.0])
    A = np.array([[0.0, 1.0], [1.0, 0.0]])

    def dd(l, m):
        with np.errstate(invalid="ignore", divide="ignore"):
            q = (l**2 - m**2) / (l - m)
        return np.where(l == m, 2 * l, q)  # diagonal value supplied explicitly

    np.testing.assert_allclose(doi.doi_spectral(X, X, dd, A), [[0, 3], [3, 0]], atol=1e-14)
    # matches the commutator quotient entrywise: (X^2 A - A X^2)_{jk} / (x_j - x_k)
    C = X @ X @ A - A @ X @ X
    assert C[0, 1] / (1 - 2) == 3


def test_symbol_singular(inst):
    X, Y, A = inst
    with pytest.raises(SymbolSingular), np.errstate(divide="ignore"):
        doi.doi_spectral(X, Y, lambda l, m: 1.0 / (l - l), A)


def test_requires_selfadjoint(inst):
    X, Y, A = inst
    with pytest.raises(NotSelfAdjoint):
        doi.doi_spectral(X + 1j * np.triu(np.ones_like(X), 1), Y, lambda l, m: l + m, A)


def test_unitary_covariance(inst):
    X, Y, A = inst
    rng = np.random.default_rng(12)
    U, _ = np.linalg.qr(props.random_matrix(rng, 8))
    V, _ = np.linalg.qr(props.random_matrix(rng, 8))
    phi = lambda l, m: np.exp(-l * m) + l / (1 + m)
    lhs = doi.doi_spectral(U @ X @ U.conj().T, V @ Y @ V.conj().T, phi, U @ A @ V.conj().T)
    rhs = U @ doi.doi_spectral(X, Y, phi, A) @ V.conj().T
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_algebraic_laws():
    rng = np.random.default_rng(13)
    assert props.prop_doi_additivity(rng)[0] <= 1e-13
    assert props.prop_doi_multiplicativity(rng)[0] <= 1e-10


def test_single_node_integral(inst):
    X, Y, A = inst
    d = doi.IntegralDecomposition(lambda l, s: l, lambda m, s: m, [0.0], [1.0])
    np.testing.assert_allclose(doi.doi_integral(X, Y, d, A), X @ A @ Y, atol=1e-12)


def test_integral_norm_bound(inst):
    X, Y, A = inst
    d = props.g_decomposition(3.0)
    ex, ey = np.linalg.eigvalsh(X), np.linalg.eigvalsh(Y)
    bound = d.summability_bound(ex, ey)
    out = doi.doi_integral(X, Y, d, A)
    assert np.linalg.norm(out, 2) <= bound * np.linalg.norm(A, 2)


@pytest.mark.parametrize("z", [2.5, 3.0, 4.0 + 1.0j])
def test_g_symbol_integral_matches_spectral(inst, z):
    X, Y, A = inst
    lhs = doi.doi_integral(X, Y, props.g_decomposition(z), A)
    rhs = doi.doi_spectral(X, Y, props.phi_symbol(z), A)
    assert np.linalg.norm(lhs - rhs) <= 1e-6


def test_refinement_reduces_error(inst):
    X, Y, A = inst
    z = 2.5
    rhs = doi.doi_spectral(X, Y, props.phi_symbol(z), A)
    err = [np.linalg.norm(doi.doi_integral(X, Y, props.g_decomposition(z, ds), A) - rhs)
           for ds in (0.25, 0.125)]
    assert err[0] >= 4 * err[1]


def test_divergent_decomposition(inst):
    X, Y, A = inst
    d = doi.IntegralDecomposition(lambda l, s: l, lambda m, s: m, [0.0, 1.0], [1.0, np.inf])
    with pytest.raises(DivergentDecomposition):
        doi.doi_integral(X, Y, d, A)


def test_decomposition_symbol():
    d = doi.IntegralDecomposition(lambda l, s: l**s, lambda m, s: m, [1.0, 2.0], [0.5, 2.0])
    assert d.symbol(3.0, 2.0) == pytest.approx(0.5 * 3 * 2 + 2 * 9 * 2)
    with pytest.raises(ValueError):
        doi.IntegralDecomposition(lambda l, s: l, lambda m, s: m, [0.0, 1.0], [1.0])
