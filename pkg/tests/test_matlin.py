"""Tests for the dense linear-algebra kernel."""

import numpy as np
import pytest

from cmcsep import matlin
from cmcsep.matlin import MatrixError


def random_hermitian(n, rng):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (m + m.conj().T) / 2


def reference_partial_transpose(rho, dims, side="B"):
    """Element-by-element partial transpose, independent of the kernel."""
    da, db = dims
    out = np.zeros_like(rho)
    for i in range(da):
        for j in range(db):
            for k in range(da):
                for l in range(db):
                    if side == "B":
                        out[i * db + l, k * db + j] = rho[i * db + j, k * db + l]
                    else:
                        out[k * db + j, i * db + l] = rho[i * db + j, k * db + l]
    return out


def test_hermitian_eig_identity():
    """Identity has a flat unit spectrum."""
    spec = matlin.hermitian_eig(np.eye(2))
    np.testing.assert_allclose(spec.eigenvalues, [1.0, 1.0])


def test_hermitian_eig_sigma_z():
    """Diagonal matrices return their sorted diagonal."""
    spec = matlin.hermitian_eig(np.diag([1.0, -1.0]))
    np.testing.assert_allclose(spec.eigenvalues, [1.0, -1.0])


def test_hermitian_eig_trace_identity():
    """Eigenvalue sum equals the trace computed directly."""
    rng = np.random.default_rng(11)
    for _ in range(20):
        m = random_hermitian(9, rng)
        spec = matlin.hermitian_eig(m)
        assert abs(np.sum(spec.eigenvalues) - np.real(np.trace(m))) < 1e-10


def test_hermitian_eig_reconstruction_and_orthonormality():
    rng = np.random.default_rng(12)
    m = random_hermitian(7, rng)
    spec = matlin.hermitian_eig(m)
    err = np.linalg.norm(spec.reconstruct() - m)
    assert err <= 1e-10 * np.linalg.norm(m)
    v = spec.eigenvectors
    assert np.max(np.abs(v.conj().T @ v - np.eye(7))) < 1e-10


def test_hermitian_eig_rejects_asymmetry():
    m = np.array([[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(MatrixError, match="asymmetry"):
        matlin.hermitian_eig(m)


def test_svd_zero_matrix():
    _, s, _ = matlin.svd(np.zeros((3, 4)))
    np.testing.assert_allclose(s, 0.0)


def test_svd_sign_absorbed():
    """Singular values of diag(3, -2) are (3, 2)."""
    _, s, _ = matlin.svd(np.diag([3.0, -2.0]))
    np.testing.assert_allclose(s, [3.0, 2.0])


def test_svd_reconstruction():
    rng = np.random.default_rng(13)
    m = rng.normal(size=(4, 9)) + 1j * rng.normal(size=(4, 9))
    u, s, v = matlin.svd(m)
    assert np.linalg.norm(u @ np.diag(s) @ v.conj().T - m) <= 1e-10 * np.linalg.norm(m)


def test_trace_norm_against_gram_eigenvalues():
    """Oracle: singular values are the square roots of the nonzero Gram
    eigenvalues (small side, so no spurious zeros enter the square root)."""
    rng = np.random.default_rng(14)
    m = rng.normal(size=(4, 9)) + 1j * rng.normal(size=(4, 9))
    gram_eigs = np.linalg.eigvalsh(m @ m.conj().T)
    expected = np.sum(np.sqrt(np.clip(gram_eigs, 0.0, None)))
    assert abs(matlin.trace_norm(m) - expected) < 1e-10


def test_trace_norm_diag_half():
    assert abs(matlin.trace_norm(np.eye(4) / 2) - 2.0) < 1e-14


def test_ky_fan_direct():
    assert abs(matlin.ky_fan_norm(np.diag([3.0, 2.0, 1.0]), 2) - 5.0) < 1e-14


def test_ky_fan_monotone_in_k():
    rng = np.random.default_rng(15)
    for _ in range(100):
        m = rng.normal(size=(6, 6))
        vals = [matlin.ky_fan_norm(m, k) for k in range(1, 7)]
        assert all(vals[i] <= vals[i + 1] + 1e-12 for i in range(5))


def test_ky_fan_range_check():
    with pytest.raises(MatrixError):
        matlin.ky_fan_norm(np.eye(3), 4)
    with pytest.raises(MatrixError):
        matlin.ky_fan_norm(np.eye(3), 0)


def test_norm_special_cases_agree():
    rng = np.random.default_rng(16)
    m = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    assert abs(matlin.operator_norm(m) - matlin.ky_fan_norm(m, 1)) < 1e-12
    assert abs(matlin.trace_norm(m) - matlin.ky_fan_norm(m, 5)) < 1e-12


def test_partial_trace_product_state():
    rng = np.random.default_rng(17)
    a = random_hermitian(2, rng)
    a = a @ a.conj().T
    a /= np.trace(a)
    b = random_hermitian(3, rng)
    b = b @ b.conj().T
    b /= np.trace(b)
    rho = np.kron(a, b)
    np.testing.assert_allclose(matlin.partial_trace(rho, (2, 3), "A"), a, atol=1e-12)
    np.testing.assert_allclose(matlin.partial_trace(rho, (2, 3), "B"), b, atol=1e-12)


def test_partial_trace_bell():
    """A maximally entangled state has maximally mixed marginals."""
    v = np.array([1, 0, 0, 1]) / np.sqrt(2)
    rho = np.outer(v, v)
    np.testing.assert_allclose(matlin.partial_trace(rho, (2, 2), "A"),
                               np.eye(2) / 2, atol=1e-14)


def test_partial_trace_preserves_trace():
    rng = np.random.default_rng(18)
    m = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    m = m @ m.conj().T
    m /= np.trace(m)
    assert abs(np.trace(matlin.partial_trace(m, (3, 3), "B")) - 1.0) < 1e-12


def test_partial_trace_dimension_mismatch():
    with pytest.raises(MatrixError):
        matlin.partial_trace(np.eye(5), (2, 3))


def test_partial_transpose_matches_reference():
    rng = np.random.default_rng(19)
    for dims in [(2, 2), (2, 3), (3, 3)]:
        n = dims[0] * dims[1]
        m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        for side in ("A", "B"):
            np.testing.assert_allclose(
                matlin.partial_transpose(m, dims, side),
                reference_partial_transpose(m, dims, side), atol=1e-14)


def test_partial_transpose_separable_psd():
    rng = np.random.default_rng(20)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    a = a @ a.conj().T
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = b @ b.conj().T
    rho = np.kron(a, b)
    rho /= np.trace(rho)
    w = np.linalg.eigvalsh(matlin.partial_transpose(rho, (2, 2)))
    assert w[0] > -1e-12


def test_partial_transpose_bell_eigenvalue():
    """PT of the Bell projector is SWAP/2 with minimal eigenvalue -1/2."""
    v = np.array([1, 0, 0, 1]) / np.sqrt(2)
    pt = matlin.partial_transpose(np.outer(v, v), (2, 2))
    swap_half = np.array([[1, 0, 0, 0],
                          [0, 0, 1, 0],
                          [0, 1, 0, 0],
                          [0, 0, 0, 1]]) / 2.0
    np.testing.assert_allclose(pt, swap_half, atol=1e-14)
    assert abs(np.linalg.eigvalsh(pt)[0] + 0.5) < 1e-12


def test_partial_transpose_involution():
    rng = np.random.default_rng(21)
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    twice = matlin.partial_transpose(matlin.partial_transpose(m, (2, 3)), (2, 3))
    assert np.max(np.abs(twice - m)) < 1e-14


def test_realign_product_rank_one():
    rng = np.random.default_rng(22)
    a = random_hermitian(3, rng)
    b = random_hermitian(3, rng)
    r = matlin.realign(np.kron(a, b), (3, 3))
    s = np.linalg.svd(r, compute_uv=False)
    assert np.sum(s > 1e-10 * s[0]) == 1


def test_realign_bell_trace_norm():
    """Oracle: sqrt of Gram eigenvalues of the realigned Bell projector."""
    v = np.array([1, 0, 0, 1]) / np.sqrt(2)
    r = matlin.realign(np.outer(v, v), (2, 2))
    gram = np.linalg.eigvalsh(r.conj().T @ r)
    assert abs(np.sum(np.sqrt(np.clip(gram, 0, None))) - 2.0) < 1e-12


def test_realign_frobenius_isometry():
    rng = np.random.default_rng(23)
    for _ in range(100):
        m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        assert abs(np.linalg.norm(matlin.realign(m, (2, 3)))
                   - np.linalg.norm(m)) < 1e-12


def test_swap_subsystems():
    rng = np.random.default_rng(24)
    a = random_hermitian(2, rng)
    b = random_hermitian(3, rng)
    np.testing.assert_allclose(matlin.swap_subsystems(np.kron(a, b), (2, 3)),
                               np.kron(b, a), atol=1e-14)
