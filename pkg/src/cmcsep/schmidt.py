"""Schmidt decomposition of bipartite density matrices in operator space."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matlin import MatrixError, hermitize
from .observables import standard_basis


@dataclass(frozen=True)
class SchmidtOperatorDecomposition:
    """rho = sum_k lambda_k G_k^A (x) G_k^B over orthonormal Hermitian
    operator families, with lambda non-negative and non-increasing.

    ``g_a``/``g_b`` carry the operator traces tr(G_k); ``swapped`` records
    that the input sides were exchanged to enforce d_A <= d_B internally.
    """

    lambdas: np.ndarray
    ops_a: np.ndarray = field(repr=False)
    ops_b: np.ndarray = field(repr=False)
    g_a: np.ndarray = field(repr=False)
    g_b: np.ndarray = field(repr=False)
    swapped: bool = False

    def reconstruct(self) -> np.ndarray:
        da = self.ops_a.shape[1]
        db = self.ops_b.shape[1]
        out = np.einsum("k,kab,kcd->acbd", self.lambdas, self.ops_a, self.ops_b,
                        optimize=True)
        return out.reshape(da * db, da * db)


def operator_schmidt(rho, d_a: int, d_b: int) -> SchmidtOperatorDecomposition:
    """Singular value decomposition of the operator-basis coefficient matrix.

    The coefficients lambda_k equal the singular values of the realignment of
    rho; signs are absorbed into the B-side operators.
    """
    r = hermitize(rho, rtol=1e-10)
    if r.shape != (d_a * d_b, d_a * d_b):
        raise MatrixError(f"state shape {r.shape} does not match dims {d_a}x{d_b}")
    if d_a > d_b:
        from .matlin import swap_subsystems

        dec = operator_schmidt(swap_subsystems(r, (d_a, d_b)), d_b, d_a)
        return SchmidtOperatorDecomposition(
            lambdas=dec.lambdas, ops_a=dec.ops_b, ops_b=dec.ops_a,
            g_a=dec.g_b, g_b=dec.g_a, swapped=True)
    basis_a = standard_basis(d_a)
    basis_b = standard_basis(d_b)
    r4 = r.reshape(d_a, d_b, d_a, d_b)
    xi = np.real(np.einsum("abcd,ica,jdb->ij", r4, basis_a.ops, basis_b.ops,
                           optimize=True))
    u, s, vt = np.linalg.svd(xi)
    ops_a = np.einsum("ik,iab->kab", u, basis_a.ops)
    ops_b = np.einsum("jk,jab->kab", vt.T[:, : d_a * d_a], basis_b.ops)
    return SchmidtOperatorDecomposition(
        lambdas=s,
        ops_a=ops_a,
        ops_b=ops_b,
        g_a=np.real(np.einsum("kaa->k", ops_a)),
        g_b=np.real(np.einsum("kaa->k", ops_b)),
        swapped=False,
    )
