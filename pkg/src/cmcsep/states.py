"""Generators for the bound-entangled families under study and for random
test ensembles.  Every generator takes an explicit rng where randomness is
involved; sampling streams are reproducible from the seed alone."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matlin import MatrixError, as_matrix

# Eigenvalues in (-PSD_CLIP, 0) are treated as rounding and clipped; anything
# more negative is a generator error.
PSD_CLIP = 1e-12


def validate_density(rho, dims: tuple[int, int] | None = None) -> np.ndarray:
    """Check Hermiticity, unit trace, and positivity; returns the matrix."""
    r = as_matrix(rho)
    n = r.shape[0]
    if r.shape[1] != n:
        raise MatrixError(f"density matrix must be square, got {r.shape}")
    if dims is not None and n != dims[0] * dims[1]:
        raise MatrixError(f"size {n} does not match dims {dims}")
    if np.max(np.abs(r - r.conj().T)) > 1e-10 * max(1.0, np.max(np.abs(r))):
        raise MatrixError("density matrix is not Hermitian")
    tr = complex(np.trace(r))
    if abs(tr - 1.0) > 1e-10:
        raise MatrixError(f"density matrix trace {tr} differs from 1")
    wmin = float(np.linalg.eigvalsh((r + r.conj().T) / 2)[0])
    if wmin < -1e-9:
        raise MatrixError(f"density matrix has eigenvalue {wmin:.3e} < 0")
    return r


def _normalize_psd(mat: np.ndarray) -> np.ndarray:
    """Clip tiny negative eigenvalues and normalize the trace to one."""
    h = (mat + mat.conj().T) / 2
    w, v = np.linalg.eigh(h)
    if w[0] < -PSD_CLIP * max(1.0, abs(w[-1])):
        raise MatrixError(f"generator produced eigenvalue {w[0]:.3e} < 0")
    w = np.clip(w, 0.0, None)
    h = (v * w) @ v.conj().T
    return h / np.real(np.trace(h))


def ket(entries) -> np.ndarray:
    return np.asarray(entries, dtype=complex).ravel()


def projector(vec: np.ndarray) -> np.ndarray:
    v = ket(vec)
    return np.outer(v, v.conj())


def chessboard(m: float, n: float, a: float, b: float, c: float,
               dpar: float) -> np.ndarray:
    """3x3 bound entangled chessboard state from four unnormalized vectors.

    Positive partial transpose for all real parameters; requires m, n != 0
    because two vector entries carry 1/m and 1/n.
    """
    if abs(m) < 1e-12 or abs(n) < 1e-12:
        raise MatrixError("chessboard parameters m and n must be nonzero")
    v1 = ket([m, 0, a * c / n, 0, n, 0, 0, 0, 0])
    v2 = ket([0, a, 0, b, 0, c, 0, 0, 0])
    v3 = ket([n, 0, 0, 0, -m, 0, a * dpar / m, 0, 0])
    v4 = ket([0, b, 0, -a, 0, 0, 0, dpar, 0])
    rho = sum(projector(v) for v in (v1, v2, v3, v4))
    return _normalize_psd(rho)


def sample_chessboard(rng: np.random.Generator) -> np.ndarray:
    """Chessboard state with parameters drawn from N(0, 2)."""
    params = rng.normal(0.0, 2.0, size=6)
    return chessboard(*params)


def upb_tiles(p: float) -> np.ndarray:
    """Tiles unextendible-product-basis state mixed with white noise.

    p = 1 is the bound entangled projector complement, p = 0 the maximally
    mixed state.
    """
    if not 0.0 <= p <= 1.0:
        raise MatrixError(f"mixing parameter p={p} outside [0, 1]")
    s2 = 1 / np.sqrt(2)
    e = np.eye(3)
    psis = [
        s2 * np.kron(e[0], e[0] - e[1]),
        s2 * np.kron(e[0] - e[1], e[2]),
        s2 * np.kron(e[2], e[1] - e[2]),
        s2 * np.kron(e[1] - e[2], e[0]),
        np.kron(e[0] + e[1] + e[2], e[0] + e[1] + e[2]) / 3.0,
    ]
    rho_be = (np.eye(9) - sum(projector(v) for v in psis)) / 4.0
    return p * rho_be + (1.0 - p) * np.eye(9) / 9.0


def rho_epsilon(eps: float, r: float, s: float, t: float) -> np.ndarray:
    """Two-block two-qubit family whose Bloch-inverted partner can change
    separability class; rejected when the parameters leave the state cone."""
    block = np.array([
        [1 + r, 0, 0, t],
        [0, 0, 0, 0],
        [0, 0, s - r, 0],
        [t, 0, 0, 1 - s],
    ], dtype=float)
    rest = np.zeros((4, 4))
    rest[1, 1] = 1.0
    rho = (eps / 2.0) * block + (1.0 - eps) * rest
    wmin = float(np.linalg.eigvalsh(rho)[0])
    if wmin < -PSD_CLIP:
        raise MatrixError(f"rho_epsilon parameters give eigenvalue {wmin:.3e} < 0")
    return _normalize_psd(rho.astype(complex))


def rho_epsilon_valid(eps: float, r: float, s: float, t: float) -> bool:
    """True when the rho_epsilon parameters yield a positive semidefinite
    unit-trace matrix."""
    block = np.array([
        [1 + r, 0, 0, t],
        [0, 0, 0, 0],
        [0, 0, s - r, 0],
        [t, 0, 0, 1 - s],
    ], dtype=float)
    rest = np.zeros((4, 4))
    rest[1, 1] = 1.0
    rho = (eps / 2.0) * block + (1.0 - eps) * rest
    return float(np.linalg.eigvalsh(rho)[0]) >= -PSD_CLIP


def random_density(d: int, rank: int | None = None,
                   rng: np.random.Generator | None = None) -> np.ndarray:
    """Random density matrix G G^dagger / tr with Gaussian G of given rank."""
    rng = np.random.default_rng() if rng is None else rng
    rank = d if rank is None else rank
    if not 1 <= rank <= d:
        raise MatrixError(f"rank {rank} outside [1, {d}]")
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.real(np.trace(rho))


def random_pure(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_separable(d_a: int, d_b: int, n_terms: int = 10,
                     rng: np.random.Generator | None = None) -> np.ndarray:
    """Explicit convex mixture of product pure states; separable by
    construction, used as the soundness oracle."""
    rng = np.random.default_rng() if rng is None else rng
    weights = rng.exponential(size=n_terms)
    weights /= weights.sum()
    rho = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
    for w in weights:
        va = random_pure(d_a, rng)
        vb = random_pure(d_b, rng)
        rho += w * projector(np.kron(va, vb))
    return rho


def singlet() -> np.ndarray:
    return projector(ket([0, 1, -1, 0]) / np.sqrt(2))


def bell_phi_plus() -> np.ndarray:
    return projector(ket([1, 0, 0, 1]) / np.sqrt(2))


def werner_2q(p: float) -> np.ndarray:
    """p |psi-><psi-| + (1-p) 1/4; entangled exactly for p > 1/3."""
    if not 0.0 <= p <= 1.0:
        raise MatrixError(f"Werner parameter p={p} outside [0, 1]")
    return p * singlet() + (1.0 - p) * np.eye(4) / 4.0


def bell_diagonal(c1: float, c2: float, c3: float) -> np.ndarray:
    """(1 + sum_k c_k sigma_k x sigma_k)/4; parameters must stay inside the
    Bell-diagonal tetrahedron."""
    from .observables import PAULI

    rho = np.eye(4, dtype=complex)
    for coeff, key in zip((c1, c2, c3), "XYZ"):
        rho += coeff * np.kron(PAULI[key], PAULI[key])
    rho /= 4.0
    wmin = float(np.linalg.eigvalsh(rho)[0])
    if wmin < -PSD_CLIP:
        raise MatrixError(f"Bell-diagonal coefficients give eigenvalue {wmin:.3e} < 0")
    return _normalize_psd(rho)


@dataclass(frozen=True)
class StateFamily:
    """Named generator with its parameter names and output dimensions
    (dims None when they depend on the parameters)."""

    name: str
    params: tuple
    generator: object
    dims: tuple[int, int] | None


FAMILIES = {
    f.name: f for f in (
        StateFamily("chessboard", ("m", "n", "a", "b", "c", "dpar"),
                    chessboard, (3, 3)),
        StateFamily("upb", ("p",), upb_tiles, (3, 3)),
        StateFamily("rho-eps", ("eps", "r", "s", "t"), rho_epsilon, (2, 2)),
        StateFamily("werner", ("p",), werner_2q, (2, 2)),
        StateFamily("bell-diagonal", ("c1", "c2", "c3"), bell_diagonal, (2, 2)),
        StateFamily("random", ("d", "rank", "rng"), random_density, None),
        StateFamily("separable", ("d_a", "d_b", "n_terms", "rng"),
                    random_separable, None),
    )
}
