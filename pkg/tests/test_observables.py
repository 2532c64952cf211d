"""Tests for observable bases and the orthogonal representation of
unitaries."""

import numpy as np
import pytest

from cmcsep import observables as obs
from cmcsep.matlin import MatrixError


def random_unitary(d, rng):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.mark.parametrize("d", [2, 3, 4])
def test_standard_basis_gram(d):
    basis = obs.standard_basis(d)
    assert len(basis) == d * d
    np.testing.assert_allclose(basis.gram(), np.eye(d * d), atol=1e-12)


def test_standard_basis_traceless_except_projectors():
    basis = obs.standard_basis(4)
    traces = basis.traces()
    np.testing.assert_allclose(traces[:4], 1.0, atol=1e-14)
    np.testing.assert_allclose(traces[4:], 0.0, atol=1e-14)
    herm = np.max(np.abs(basis.ops - basis.ops.conj().transpose(0, 2, 1)))
    assert herm < 1e-14


def test_standard_basis_rejects_d1():
    with pytest.raises(MatrixError):
        obs.standard_basis(1)


def test_pauli_basis_exact():
    basis = obs.pauli_basis()
    np.testing.assert_allclose(basis.gram(), np.eye(4), atol=1e-14)
    np.testing.assert_allclose(basis.ops[0], np.eye(2) / np.sqrt(2), atol=1e-15)
    assert abs(basis.traces()[0] - np.sqrt(2)) < 1e-14


def test_pauli_commutator():
    """[sigma_x, sigma_y]/2 = i sigma_z carries over to the normalized set."""
    m = obs.pauli_basis().ops
    comm = m[1] @ m[2] - m[2] @ m[1]
    np.testing.assert_allclose(comm, 1j * np.sqrt(2) * m[3], atol=1e-14)


def test_gellmann_matches_pauli_for_qubits():
    gm = obs.gellmann_like_basis(2)
    pauli = obs.pauli_basis()
    np.testing.assert_allclose(gm.ops[0], pauli.ops[0], atol=1e-15)
    # same traceless span, possibly reordered
    found = [any(np.allclose(g, p, atol=1e-12) for p in pauli.ops[1:])
             for g in gm.ops[1:]]
    assert all(found)


def test_gellmann_traceless_and_orthonormal():
    basis = obs.gellmann_like_basis(3)
    np.testing.assert_allclose(basis.gram(), np.eye(9), atol=1e-12)
    np.testing.assert_allclose(basis.traces()[1:], 0.0, atol=1e-14)


def test_weyl_parity_basis_orthonormal():
    basis = obs.weyl_parity_basis(3)
    assert len(basis) == 9
    np.testing.assert_allclose(basis.gram(), np.eye(9), atol=1e-12)


def test_weyl_parity_reflection_action():
    p0 = obs.parity_operator(5)
    for x in range(5):
        e = np.zeros(5)
        e[x] = 1.0
        out = p0 @ e
        expected = np.zeros(5)
        expected[(-x) % 5] = 1.0
        np.testing.assert_allclose(out, expected, atol=1e-15)


def test_weyl_parity_involutions():
    """Each displaced reflection squares to the identity before scaling."""
    basis = obs.weyl_parity_basis(3)
    for op in basis.ops:
        p = op * np.sqrt(3)
        np.testing.assert_allclose(p @ p, np.eye(3), atol=1e-12)


def test_weyl_parity_rejects_even():
    with pytest.raises(MatrixError):
        obs.weyl_parity_basis(4)


def test_gamma_isometry_unitary():
    for basis in [obs.standard_basis(3), obs.gellmann_like_basis(3),
                  obs.weyl_parity_basis(3)]:
        g = obs.gamma_isometry(basis)
        np.testing.assert_allclose(g.conj().T @ g, np.eye(9), atol=1e-10)
        np.testing.assert_allclose(g @ g.conj().T, np.eye(9), atol=1e-10)


def test_unitary_to_orthogonal_identity():
    basis = obs.standard_basis(3)
    np.testing.assert_allclose(obs.unitary_to_orthogonal(np.eye(3), basis),
                               np.eye(9), atol=1e-12)


def test_unitary_to_orthogonal_z_rotation():
    """exp(-i theta sigma_z / 2) rotates the (x, y) pair and fixes 1, z."""
    theta = 0.7
    u = np.diag([np.exp(-1j * theta / 2), np.exp(1j * theta / 2)])
    basis = obs.pauli_basis()
    o = obs.unitary_to_orthogonal(u, basis)
    # oracle: conjugate each element directly and re-expand
    expected = np.zeros((4, 4))
    for i in range(4):
        h = u @ basis.ops[i] @ u.conj().T
        for j in range(4):
            expected[i, j] = np.real(np.trace(h @ basis.ops[j]))
    np.testing.assert_allclose(o, expected, atol=1e-10)
    np.testing.assert_allclose(o[0], [1, 0, 0, 0], atol=1e-12)
    np.testing.assert_allclose(o[3], [0, 0, 0, 1], atol=1e-12)
    block = o[1:3, 1:3]
    np.testing.assert_allclose(block @ block.T, np.eye(2), atol=1e-12)
    assert abs(np.linalg.det(block) - 1.0) < 1e-12


def test_unitary_to_orthogonal_random():
    rng = np.random.default_rng(30)
    basis = obs.standard_basis(3)
    for _ in range(50):
        u = random_unitary(3, rng)
        o = obs.unitary_to_orthogonal(u, basis)
        assert np.linalg.norm(o.T @ o - np.eye(9)) < 1e-9
        # conjugation expands over the basis with coefficients O
        k = rng.integers(0, 9)
        h = u @ basis.ops[k] @ u.conj().T
        expansion = np.einsum("j,jab->ab", o[k], basis.ops)
        assert np.max(np.abs(h - expansion)) < 1e-10


def test_unitary_to_orthogonal_composition():
    """Representation property of the conjugation action.  With the
    expansion convention U M_i U^dag = sum_j O_ij M_j the factors compose in
    reverse order, O(U1 U2) = O(U2) O(U1)."""
    rng = np.random.default_rng(31)
    basis = obs.gellmann_like_basis(3)
    for _ in range(10):
        u1 = random_unitary(3, rng)
        u2 = random_unitary(3, rng)
        o12 = obs.unitary_to_orthogonal(u1 @ u2, basis)
        prod = obs.unitary_to_orthogonal(u2, basis) @ obs.unitary_to_orthogonal(u1, basis)
        assert np.max(np.abs(o12 - prod)) < 1e-9


def test_unitary_to_orthogonal_rejects_nonunitary():
    with pytest.raises(MatrixError, match="unitary"):
        obs.unitary_to_orthogonal(np.diag([1.0, 2.0]), obs.pauli_basis())


def test_make_basis_dispatch():
    assert obs.make_basis("pauli", 2).kind == "pauli"
    assert obs.make_basis("standard", 3).kind == "standard"
    assert obs.make_basis("gellmann", 4).kind == "gellmann"
    assert obs.make_basis("weyl", 3).kind == "weyl"
    with pytest.raises(MatrixError):
        obs.make_basis("pauli", 3)
    with pytest.raises(MatrixError):
        obs.make_basis("nope", 2)
