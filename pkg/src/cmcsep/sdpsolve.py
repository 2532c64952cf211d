"""Small dense semidefinite-program solver for block-diagonal problems.

Solves  min c^T x  subject to  F(x) = F_0 + sum_i x_i F_i >= 0  together
with the Lagrangian dual  max -tr(F_0 Z)  s.t.  tr(F_i Z) = c_i, Z >= 0,
via an infeasible-start primal-dual path-following method (HKM direction
with a Mehrotra-style corrector).  Problem sizes here are tiny (tens of
variables, blocks of a few rows), so robustness is favored throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 200

# Fraction of the step to the positive-definite boundary actually taken.
_STEP_FRACTION = 0.98
# Farkas-type margin: a near-feasible dual ray with objective this far above
# zero certifies primal infeasibility.
_INFEASIBILITY_MARGIN = 1e-6


class SdpError(ValueError):
    """Malformed SDP data."""


@dataclass(frozen=True)
class SdpProblem:
    """Objective vector c and symmetric block-diagonal constraint matrices.

    ``f0_blocks[b]`` is the constant block; ``fi_blocks[b]`` stacks the m
    coefficient blocks as an (m, n_b, n_b) array.
    """

    c: np.ndarray
    f0_blocks: list = field(repr=False)
    fi_blocks: list = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        object.__setattr__(self, "c", c)
        f0 = [np.asarray(b, dtype=float) for b in self.f0_blocks]
        fi = [np.asarray(b, dtype=float) for b in self.fi_blocks]
        if len(f0) != len(fi) or not f0:
            raise SdpError("need matching, non-empty F0 and Fi block lists")
        for b0, bi in zip(f0, fi):
            nb = b0.shape[0]
            if b0.shape != (nb, nb):
                raise SdpError(f"F0 block has shape {b0.shape}, expected square")
            if bi.shape != (len(c), nb, nb):
                raise SdpError(
                    f"Fi block stack has shape {bi.shape}, expected "
                    f"({len(c)}, {nb}, {nb})")
            if np.max(np.abs(b0 - b0.T)) > 1e-12 * max(1.0, np.max(np.abs(b0))):
                raise SdpError("F0 block is not symmetric")
            if bi.size and np.max(np.abs(bi - bi.transpose(0, 2, 1))) > 1e-12:
                raise SdpError("an Fi block is not symmetric")
        object.__setattr__(self, "f0_blocks", f0)
        object.__setattr__(self, "fi_blocks", fi)

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def block_dims(self) -> list[int]:
        return [b.shape[0] for b in self.f0_blocks]


@dataclass(frozen=True)
class SdpSolution:
    """Primal point, dual certificate, objectives and convergence data."""

    x: np.ndarray
    z_blocks: list = field(repr=False)
    s_blocks: list = field(repr=False)
    primal_objective: float
    dual_objective: float
    gap: float
    status: str  # optimal | infeasible | max_iter
    iterations: int
    primal_residual: float
    dual_residual: float


def _min_eig_step(s: np.ndarray, ds: np.ndarray) -> float:
    """Largest alpha with s + alpha ds > 0, via the scaled eigenproblem.

    Eigendecomposition-based so that iterates grazing the cone boundary
    (rounding-level negative eigenvalues) do not abort the solve.
    """
    if s.shape[0] == 1:
        if ds[0, 0] >= 0:
            return np.inf
        return max(s[0, 0], 0.0) / -ds[0, 0]
    w, v = np.linalg.eigh(s)
    floor = max(abs(w[-1]), 1e-300) * 1e-14
    w = np.maximum(w, floor)
    isqrt = v / np.sqrt(w)
    wmin = float(np.linalg.eigvalsh(isqrt.T @ ds @ isqrt)[0])
    if wmin >= 0:
        return np.inf
    return -1.0 / wmin


def solve(problem: SdpProblem, tol: float = DEFAULT_TOL,
          max_iter: int = DEFAULT_MAX_ITER) -> SdpSolution:
    """Run the interior-point iteration until the duality gap and both
    feasibility residuals drop below ``tol``.

    A stalled run is retried on a rescaled copy of the data (same optimum,
    decorrelated trajectory): near-degenerate optimal faces make the last
    few digits of the path chaotic, and a different scaling routinely
    converges where the first attempt ground to a halt.
    """
    best = None
    for factor in (1.0, 2.0, 4.0):
        scaled = problem if factor == 1.0 else SdpProblem(
            c=problem.c * factor,
            f0_blocks=[b * factor for b in problem.f0_blocks],
            fi_blocks=[b * factor for b in problem.fi_blocks])
        sol = _solve_core(scaled, tol, max_iter)
        if factor != 1.0:
            sol = SdpSolution(
                x=sol.x,
                z_blocks=sol.z_blocks,
                s_blocks=[b / factor for b in sol.s_blocks],
                primal_objective=sol.primal_objective / factor,
                dual_objective=sol.dual_objective / factor,
                gap=sol.gap / factor,
                status=sol.status,
                iterations=sol.iterations,
                primal_residual=sol.primal_residual / factor,
                dual_residual=sol.dual_residual / factor,
            )
        if sol.status != "max_iter":
            return sol
        if best is None or abs(sol.gap) < abs(best.gap):
            best = sol
    return best


def _solve_core(problem: SdpProblem, tol: float,
                max_iter: int) -> SdpSolution:
    m = problem.n_vars
    f0 = problem.f0_blocks
    fi = problem.fi_blocks
    dims = problem.block_dims
    ntot = sum(dims)
    nblocks = len(dims)
    scale = max(1.0, max(float(np.max(np.abs(b))) for b in f0),
                float(np.max(np.abs(problem.c))) if m else 1.0)

    x = np.zeros(m)
    s = [scale * np.eye(nb) for nb in dims]
    z = [scale * np.eye(nb) for nb in dims]

    # Constraint matrix of the dual equalities tr(F_i Z) = c_i over the
    # vectorized blocks.  Dual steps are re-projected onto it exactly, so
    # roundoff from the (increasingly ill-conditioned) Schur solves never
    # accumulates in the dual residual.
    amat = np.hstack([fi[b].reshape(m, dims[b] * dims[b]) for b in range(nblocks)])
    gram = amat @ amat.T + 1e-12 * scale**2 * np.eye(m)

    def project_dz(dz, target):
        vec = np.concatenate([d.ravel() for d in dz])
        shift = amat.T @ np.linalg.solve(gram, target - amat @ vec)
        out = []
        pos = 0
        for b in range(nblocks):
            nb2 = dims[b] * dims[b]
            blk = dz[b] + shift[pos:pos + nb2].reshape(dims[b], dims[b])
            out.append((blk + blk.T) / 2)
            pos += nb2
        return out

    def fx_blocks(xv):
        return [f0[b] + np.tensordot(xv, fi[b], axes=(0, 0)) for b in range(nblocks)]

    def residuals(xv, sb, zb):
        rp = [f + 0.0 for f in fx_blocks(xv)]
        for b in range(nblocks):
            rp[b] -= sb[b]
        rd = problem.c - np.array([
            sum(np.tensordot(fi[b][i], zb[b], axes=2) for b in range(nblocks))
            for i in range(m)
        ])
        return rp, rd

    status = "max_iter"
    it = 0
    best_metric = np.inf
    best_state = None
    since_best = 0
    for it in range(1, max_iter + 1):
        rp, rd = residuals(x, s, z)
        mu = sum(np.tensordot(s[b], z[b], axes=2) for b in range(nblocks)) / ntot
        rp_norm = max(float(np.max(np.abs(b))) for b in rp)
        rd_norm = float(np.max(np.abs(rd))) if m else 0.0
        gap = float(np.dot(problem.c, x)
                    + sum(np.tensordot(f0[b], z[b], axes=2) for b in range(nblocks)))
        metric = max(rp_norm, rd_norm, abs(gap)) / scale
        if metric < best_metric:
            best_metric = metric
            best_state = (x.copy(), [b.copy() for b in s], [b.copy() for b in z])
            since_best = 0
        else:
            since_best += 1
        if metric <= tol:
            status = "optimal"
            break
        if mu < 1e-13 * scale or since_best >= 30:
            break  # numerical floor reached; fall back to the best iterate

        # Farkas check: a scaled dual ray with A*(Z) ~ 0 and tr(F0 Z) < 0
        # bounds the primal objective away from every feasible value.
        znorm = sum(float(np.linalg.norm(b)) for b in z)
        if znorm > 1e8 * scale:
            zray = [b / znorm for b in z]
            ray_feas = float(np.max(np.abs(np.array([
                sum(np.tensordot(fi[b][i], zray[b], axes=2) for b in range(nblocks))
                for i in range(m)]))))
            ray_obj = sum(np.tensordot(f0[b], zray[b], axes=2) for b in range(nblocks))
            if ray_feas <= 1e-9 and ray_obj < -_INFEASIBILITY_MARGIN:
                z = zray
                status = "infeasible"
                break

        sinv = [np.linalg.inv(b) for b in s]
        # Schur complement M_ij = sum_b tr(F_i S^-1 F_j Z), symmetrized
        mmat = np.zeros((m, m))
        for b in range(nblocks):
            g = np.einsum("ab,jbc,cd->jad", sinv[b], fi[b], z[b], optimize=True)
            mmat += np.einsum("iab,jba->ij", fi[b], g, optimize=True)
        mmat = (mmat + mmat.T) / 2
        mmat += 1e-13 * scale * np.eye(m)

        def direction(sigma_mu, corr=None):
            rhs = -rd.copy() if m else np.zeros(0)
            for b in range(nblocks):
                w = sigma_mu * sinv[b] - z[b] - sinv[b] @ rp[b] @ z[b]
                if corr is not None:
                    w -= sinv[b] @ corr[b]
                rhs += np.einsum("iab,ba->i", fi[b], w, optimize=True)
            try:
                dx = np.linalg.solve(mmat, rhs)
                dx += np.linalg.solve(mmat, rhs - mmat @ dx)  # refinement
            except np.linalg.LinAlgError:
                dx = np.linalg.lstsq(mmat, rhs, rcond=None)[0]
            ds = []
            dz = []
            for b in range(nblocks):
                dsb = np.tensordot(dx, fi[b], axes=(0, 0)) + rp[b]
                w = sigma_mu * sinv[b] - z[b] - sinv[b] @ dsb @ z[b]
                if corr is not None:
                    w -= sinv[b] @ corr[b]
                dzb = (w + w.T) / 2
                ds.append(dsb)
                dz.append(dzb)
            return dx, ds, project_dz(dz, rd)

        # predictor
        dx_a, ds_a, dz_a = direction(0.0)
        ap = min(1.0, _STEP_FRACTION * min(_min_eig_step(s[b], ds_a[b])
                                           for b in range(nblocks)))
        ad = min(1.0, _STEP_FRACTION * min(_min_eig_step(z[b], dz_a[b])
                                           for b in range(nblocks)))
        mu_aff = sum(np.tensordot(s[b] + ap * ds_a[b], z[b] + ad * dz_a[b], axes=2)
                     for b in range(nblocks)) / ntot
        sigma = min(1.0, max((mu_aff / mu) ** 3, 1e-6)) if mu > 0 else 0.1
        # keep mu above what the gap tolerance needs; driving it further
        # amplifies the Schur system and erodes dual feasibility
        mu_floor = 0.1 * tol * scale / ntot
        corr = [ds_a[b] @ dz_a[b] for b in range(nblocks)]
        dx, ds, dz = direction(max(sigma * mu, mu_floor), corr=corr)
        ap = min(1.0, _STEP_FRACTION * min(_min_eig_step(s[b], ds[b])
                                           for b in range(nblocks)))
        ad = min(1.0, _STEP_FRACTION * min(_min_eig_step(z[b], dz[b])
                                           for b in range(nblocks)))
        if min(ap, ad) < 0.05:
            # iterate has drifted off the central path and the Mehrotra step
            # collapsed; restore centrality with a pure sigma = 1 step
            dx, ds, dz = direction(max(mu, mu_floor))
            ap = min(1.0, _STEP_FRACTION * min(_min_eig_step(s[b], ds[b])
                                               for b in range(nblocks)))
            ad = min(1.0, _STEP_FRACTION * min(_min_eig_step(z[b], dz[b])
                                               for b in range(nblocks)))
        if not (np.isfinite(ap) and np.isfinite(ad)
                and all(np.all(np.isfinite(d)) for d in ds)
                and all(np.all(np.isfinite(d)) for d in dz)):
            break
        x = x + ap * dx
        s = [s[b] + ap * ds[b] for b in range(nblocks)]
        z = [z[b] + ad * dz[b] for b in range(nblocks)]

    if status != "infeasible" and best_state is not None:
        x, s, z = best_state
    rp, rd = residuals(x, s, z)
    primal_obj = float(np.dot(problem.c, x))
    dual_obj = float(-sum(np.tensordot(f0[b], z[b], axes=2) for b in range(nblocks)))
    return SdpSolution(
        x=x,
        z_blocks=z,
        s_blocks=s,
        primal_objective=primal_obj,
        dual_objective=dual_obj,
        gap=primal_obj - dual_obj,
        status=status,
        iterations=it,
        primal_residual=max(float(np.max(np.abs(b))) for b in rp),
        dual_residual=float(np.max(np.abs(rd))) if m else 0.0,
    )
