from math import comb

import numpy as np
import pytest
import scipy.sparse as sp

from nclab import asym, hochschild as hs, opcore, props, triples
from nclab._validation import to_dense
from nclab.exceptions import DomainError, WindowError


def dense(X):
    return to_dense(X)


# circle


def test_circle_basics():
    N = 10
    m = triples.build_circle(N, labels=(1, -1, 2))
    np.testing.assert_array_equal(np.sort(m.eig.values), np.arange(-N, N + 1))
    assert (m.p, m.parity, m.dim_H) == (1, "odd", 2 * N + 1)
    n = np.arange(-N, N + 1)
    for k in (1, 2):
        uk = m.generator(f"u^{k}")
        prod = dense(uk @ uk.T)  # u^k u^-k, the shift is real
        dev = np.abs(prod - np.eye(2 * N + 1))
        # deviation confined to |k| edge entries (u u^-1 misses the bottom k modes)
        assert np.count_nonzero(dev) == k
        assert np.all(np.abs(n[np.nonzero(dev.diagonal())[0]]) > N - k)


def test_circle_shift_relation():
    m = triples.build_circle(12)
    u = m.generator("u^1")
    du = dense(triples.partial_op(m, u))
    np.testing.assert_allclose(du, dense(u), atol=0)
    mask = m.interior["u^1"]
    np.testing.assert_allclose(du[np.ix_(mask, mask)], dense(u)[np.ix_(mask, mask)])


def test_circle_domain():
    with pytest.raises(DomainError):
        triples.build_circle(2)
    with pytest.raises(DomainError):
        triples.build_circle(8, labels=(9,))


def test_model_invariants():
    for m in (triples.build_circle(6), triples.build_torus2(3)):
        G, D = dense(m.gamma), dense(m.D)
        np.testing.assert_allclose(G @ G, np.eye(m.dim_H), atol=1e-12)
        np.testing.assert_allclose(G, G.conj().T, atol=1e-12)
        if m.parity == "even":
            assert np.abs(G @ D + D @ G).max() <= 1e-12
        for a in m.algebra.values():
            assert np.abs(G @ dense(a) - dense(a) @ G).max() <= 1e-12
        F, P, A = dense(m.F), dense(m.kernel_proj), dense(m.abs_D)
        np.testing.assert_allclose(F, F.conj().T, atol=1e-14)
        np.testing.assert_allclose(F @ F @ F, F, atol=1e-14)
        np.testing.assert_allclose(F @ F, np.eye(m.dim_H) - P, atol=1e-14)
        np.testing.assert_allclose(D @ A, A @ D, atol=1e-12)
        np.testing.assert_allclose(D @ F, F @ D, atol=1e-12)
        np.testing.assert_allclose(F @ A, D, atol=1e-12)


# torus


def test_torus_structure():
    N = 4
    m = triples.build_torus2(N)
    n = np.arange(-N, N + 1)
    n1, n2 = np.meshgrid(n, n, indexing="ij")
    lap = (n1**2 + n2**2).ravel().astype(float)
    np.testing.assert_allclose(dense(m.D2), np.kron(np.eye(2), np.diag(lap)), atol=1e-14)
    assert np.abs(dense(m.gamma @ m.D + m.D @ m.gamma)).max() <= 1e-14
    absd = np.sort(np.abs(np.linalg.eigvalsh(dense(m.D))))
    np.testing.assert_allclose(absd, np.sort(np.repeat(np.sqrt(lap), 2)), atol=1e-12)


def test_torus_gamma_pair_invariance():
    rng = np.random.default_rng(0)
    V, _ = np.linalg.qr(props.random_matrix(rng, 2))
    a, b = triples.build_torus2(12), triples.build_torus2(12, gamma_unitary=V)
    spec = [
        (1, ("U1*", "U1", "U2")),
        (-1, ("U1*", "U2", "U1")),
    ]
    vals = []
    for m in (a, b):
        c = hs.TensorChain.from_labels(m, spec)
        X = hs.omega_map(c, m)
        vals.append((hs.chern(c, m, cycle_tol=None), asym.heat_trace(m, X, 0.8)))
    np.testing.assert_allclose(vals[0], vals[1], atol=1e-10)
    with pytest.raises(DomainError):
        triples.build_torus2(3, gamma_unitary=np.array([[1.0, 1.0], [0.0, 1.0]]))


# Moyal lattice


def interior_cols(m, shifts):
    pts = m.params["points"]
    N = m.params["N"]
    ok = np.ones(len(pts), dtype=bool)
    acc = np.zeros(m.p, dtype=int)
    for s in shifts:
        acc = acc + np.asarray(s)
        ok &= np.all(np.abs(pts + acc) <= N, axis=1)
    return np.tile(ok, m.params["spin_dim"])


def test_moyal_ccr():
    theta = np.array([[0.0, 0.7], [-0.7, 0.0]])
    m = triples.build_moyal_lattice(5, theta=theta, spacing=0.5)
    assert m.experimental
    h = 0.5
    for t, s in (((1, 0), (0, 1)), ((2, -1), (1, 3)), ((0, 2), (-1, 0))):
        Ut, Us = triples.moyal_unitary(m, t), triples.moyal_unitary(m, s)
        Uts = triples.moyal_unitary(m, np.add(t, s))
        phase = np.exp(0.5j * (h * np.asarray(t)) @ theta @ (h * np.asarray(s)))
        cols = interior_cols(m, [s, t])
        diff = dense(Uts - phase * (Ut @ Us))[:, cols]
        assert np.abs(diff).max() <= 1e-12


def test_moyal_derivation():
    m = triples.build_moyal_lattice(4, theta=np.array([[0.0, 1.0], [-1.0, 0.0]]))
    pts, spin, h = m.params["points"], m.params["spin_dim"], m.params["spacing"]
    for k in range(2):
        Dk = sp.kron(sp.identity(spin), sp.diags(h * pts[:, k].astype(float)))
        for t in ((1, 0), (0, -1), (1, 1)):
            U = triples.moyal_unitary(m, t)
            lhs = dense(Dk @ U - U @ Dk)
            np.testing.assert_allclose(lhs, h * t[k] * dense(U), atol=1e-12)


def test_moyal_theta_zero_is_plain_shift():
    m = triples.build_moyal_lattice(3)
    U = dense(m.generator("U[0]"))
    assert set(np.unique(U)) <= {0, 1}
    with pytest.raises(DomainError):
        triples.build_moyal_lattice(3, theta=np.array([[0.0, 1.0], [1.0, 0.0]]))


# derivations


def test_delta_examples():
    m = triples.build_circle(9)
    assert abs(triples.delta_op(m, m.func(lambda t: np.abs(t) ** 3))).max() <= 1e-12
    u = dense(m.generator("u^1"))
    du = dense(triples.delta_op(m, u))
    n = np.arange(-9, 10)
    # (delta u)_{n+1, n} = (|n+1| - |n|) u_{n+1, n}
    rows, cols = np.nonzero(u)
    np.testing.assert_allclose(du[rows, cols], (np.abs(n[rows]) - np.abs(n[cols])) * u[rows, cols])
    rng = np.random.default_rng(1)
    T = props.random_matrix(rng, m.dim_H)
    np.testing.assert_allclose(triples.delta_op(m, T.conj().T), -triples.delta_op(m, T).conj().T,
                               atol=1e-12)


def test_leibniz_rules():
    rng = np.random.default_rng(2)
    m = triples.build_circle(7)
    T, S = props.random_matrix(rng, m.dim_H), props.random_matrix(rng, m.dim_H)
    for op in (triples.delta_op, triples.partial_op):
        np.testing.assert_allclose(op(m, T @ S), op(m, T) @ S + T @ op(m, S), atol=1e-10)
    assert abs(triples.partial_op(m, m.identity())).max() == 0


def test_left_to_right_binomial():
    rng = np.random.default_rng(3)
    m = triples.build_torus2(2)
    x = props.random_matrix(rng, m.dim_H)
    A = dense(m.abs_D)
    for p in range(4):
        lhs = np.linalg.matrix_power(A, p) @ x
        rhs = np.zeros_like(lhs)
        for k in range(p + 1):
            d = x
            for _ in range(p - k):
                d = triples.delta_op(m, d)
            rhs = rhs + comb(p, k) * d @ np.linalg.matrix_power(A, k)
        np.testing.assert_allclose(lhs, rhs, atol=1e-9 * np.abs(lhs).max())


def test_L_op():
    rng = np.random.default_rng(4)
    N = 6
    n = np.arange(-N, N + 1)
    base = triples.build_circle(N)
    m = triples.TripleModel(
        name="half-shift", D=sp.diags(n + 0.5, format="csr"), gamma=base.gamma, p=1,
        parity="odd", algebra=base.algebra, trunc=N, cutoff=N + 1.5,
    )
    T = props.random_matrix(rng, m.dim_H)
    F, A = dense(m.F), dense(m.abs_D)
    np.testing.assert_allclose(triples.L_op(m, T), (F @ T - T @ F) @ A, atol=1e-10)
    f = m.func(lambda t: np.exp(-np.abs(t)))
    np.testing.assert_allclose(dense(triples.L_op(m, f)), dense(triples.partial_op(m, f)), atol=1e-14)
    assert np.abs(dense(triples.L_op(m, m.func(lambda t: t**2 + np.abs(t))))).max() <= 1e-12


def test_lambda_identity():
    rng = np.random.default_rng(5)
    for m in (triples.build_circle(8), triples.build_torus2(2)):
        T = props.random_matrix(rng, m.dim_H)
        D0 = dense(triples.d0_operator(m))
        X = dense(opcore.abs_operator(D0))
        np.testing.assert_allclose(X, dense(m.func(lambda t: np.sqrt(1 + t * t))), atol=1e-12)
        d0 = X @ T - T @ X
        d00 = X @ d0 - d0 @ X
        rhs = 2 * d0 - np.linalg.solve(X, d00)
        np.testing.assert_allclose(triples.lambda_op(m, T), rhs, atol=1e-10 * np.abs(rhs).max())
        assert np.abs(dense(triples.lambda_op(m, m.func(lambda t: np.cos(t * t))))).max() <= 1e-12
        S = props.random_matrix(rng, m.dim_H)
        np.testing.assert_allclose(triples.lambda_op(m, T + 2 * S),
                                   triples.lambda_op(m, T) + 2 * triples.lambda_op(m, S),
                                   atol=1e-10)


def test_double_structure():
    m = triples.build_torus2(2)
    md = triples.double(m)
    n = m.dim_H
    P, F = dense(m.kernel_proj), dense(m.F)
    np.testing.assert_allclose(dense(md.F), np.block([[F, P], [P, -F]]), atol=1e-14)
    G = dense(m.gamma)
    np.testing.assert_allclose(dense(md.gamma), np.block([[G, 0 * G], [0 * G, -G]]))
    a = dense(m.generator("U1"))
    np.testing.assert_allclose(dense(triples.pi_op(m, a)), np.block([[a, 0 * a], [0 * a, 0 * a]]))
    assert md.dim_H == 2 * n


# decay probe


def test_probe_circle_slope():
    m = triples.build_circle(4096)
    pr = triples.hypothesis_probe(m, "u^1", 0, np.geomspace(2, 512, 10))
    assert abs(pr.slope + 1) <= 0.1
    np.testing.assert_allclose(
        pr.norms, [opcore.trace_norm(m.func(lambda t: (t + 1j * l) ** -2)) for l in pr.lambdas],
        rtol=0.05,
    )


def test_probe_identity_exact():
    m = triples.build_circle(256)
    lams = np.geomspace(2, 64, 6)
    pr = triples.hypothesis_probe(m, "1", 0, lams)
    ref = [np.sum(np.abs(np.arange(-256, 257) + 1j * l) ** -2.0) for l in lams]
    np.testing.assert_allclose(pr.norms, ref, rtol=1e-12)
    assert np.all(pr.partial_norms > 0) or np.isnan(pr.partial_slope)


def test_probe_torus_slope():
    m = triples.build_torus2(64)
    pr = triples.hypothesis_probe(m, "U1", 0, np.geomspace(2, 8, 6))
    assert abs(pr.slope + 1) <= 0.15


def test_probe_window_errors():
    m = triples.build_circle(64)
    with pytest.raises(WindowError):
        triples.hypothesis_probe(m, "u^1", 0, [2.0, 32.0])
    with pytest.raises(WindowError):
        triples.hypothesis_probe(m, "u^1", 0, [0.5, 4.0])
    with pytest.raises(WindowError):
        triples.hypothesis_probe(m, "u^1", 0, [4.0, 2.0])
