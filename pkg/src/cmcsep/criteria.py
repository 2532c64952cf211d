"""Separability criteria built on covariance matrices, plus the PPT
baseline; every test returns a CriterionVerdict whose margin is positive
exactly when the state is flagged entangled."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import filtering, matlin, sdpsolve
from .covariance import build_block_cm, transform_block_cm, two_qubit_effective_cm
from .matlin import MatrixError, hermitize
from .observables import PAULI, gellmann_like_basis
from .schmidt import operator_schmidt

EPS_MARGIN = 1e-9
SDP_EPS_MARGIN = 1e-7


@dataclass(frozen=True)
class CriterionVerdict:
    """Outcome of one separability test.

    ``margin`` is the left-hand side minus the bound of the defining
    inequality; detection means margin above ``eps_margin``.  ``status`` is
    ``ok`` unless the underlying solver failed, in which case ``detected``
    is None (undetermined, distinct from undetected).
    """

    name: str
    detected: bool | None
    margin: float
    details: dict = field(default_factory=dict, repr=False)
    eps_margin: float = EPS_MARGIN
    status: str = "ok"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "detected": self.detected,
            "margin": self.margin,
            "eps_margin": self.eps_margin,
            "status": self.status,
            "details": _json_safe(self.details),
        }


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": obj.real.tolist(), "im": obj.imag.tolist()}
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


@dataclass(frozen=True)
class CmWitness:
    """Witness acting on two-qubit covariance matrices: tr(gamma_eff Z1) >= 1
    for every separable state, so a value below one certifies entanglement."""

    z1: np.ndarray = field(repr=False)
    value: float = 0.0


@dataclass(frozen=True)
class LurSet:
    """Local observables whose joint variance sum is bounded below by
    ``bound`` on separable states; witness-derived sets have bound 1."""

    ops_a: np.ndarray = field(repr=False)
    ops_b: np.ndarray = field(repr=False)
    bound: float = 1.0


def _verdict(name: str, margin: float, details: dict,
             eps: float = EPS_MARGIN) -> CriterionVerdict:
    return CriterionVerdict(name=name, detected=bool(margin > eps),
                            margin=float(margin), details=details,
                            eps_margin=eps)


def ppt(rho, dims: tuple[int, int]) -> CriterionVerdict:
    """Positivity of the partial transpose; margin is minus its smallest
    eigenvalue."""
    r = hermitize(rho, rtol=1e-10)
    pt = matlin.partial_transpose(r, dims, side="B")
    wmin = float(np.linalg.eigvalsh((pt + pt.conj().T) / 2)[0])
    return _verdict("ppt", -wmin, {"min_eigenvalue": wmin})


def ccnr(rho, dims: tuple[int, int]) -> CriterionVerdict:
    """Realignment test: the operator Schmidt coefficients of a separable
    state sum to at most one."""
    dec = operator_schmidt(rho, *dims)
    total = float(np.sum(dec.lambdas))
    return _verdict("ccnr", total - 1.0, {"schmidt_sum": total})


def de_vicente(rho, dims: tuple[int, int]) -> CriterionVerdict:
    """Bloch-representation test: trace norm of the traceless-sector joint
    moments against sqrt((1-1/dA)(1-1/dB))."""
    da, db = dims
    basis_a = gellmann_like_basis(da)
    basis_b = gellmann_like_basis(db)
    r = hermitize(rho, rtol=1e-10)
    if r.shape != (da * db, da * db):
        raise MatrixError(f"state shape {r.shape} does not match dims {dims}")
    r4 = r.reshape(da, db, da, db)
    joint = np.real(np.einsum("abcd,ica,jdb->ij", r4, basis_a.ops[1:],
                              basis_b.ops[1:], optimize=True))
    norm = matlin.trace_norm(joint)
    bound = np.sqrt((1.0 - 1.0 / da) * (1.0 - 1.0 / db))
    return _verdict("de_vicente", norm - bound,
                    {"bloch_trace_norm": norm, "bound": float(bound)})


def _block_cm(rho, dims):
    return build_block_cm(rho, gellmann_like_basis(dims[0]),
                          gellmann_like_basis(dims[1]), kind="symmetric")


def cmc_singular_values(rho, dims: tuple[int, int]) -> CriterionVerdict:
    """||C||_tr^2 <= (1 - tr rho_A^2)(1 - tr rho_B^2) for separable states;
    basis independent by local orthogonal invariance of the trace norm."""
    bcm = _block_cm(rho, dims)
    norm = matlin.trace_norm(bcm.c)
    bound = np.sqrt(max((1.0 - bcm.purity_a) * (1.0 - bcm.purity_b), 0.0))
    return _verdict("cmc_singular_values", norm - bound,
                    {"c_trace_norm": norm, "bound": float(bound),
                     "purity_a": bcm.purity_a, "purity_b": bcm.purity_b})


def cmc_trace(rho, dims: tuple[int, int],
              index_set: list[int] | None = None) -> CriterionVerdict:
    """Trace test 2 sum |C_ii| against the purity deficits, after rotating
    both local bases so the cross block is diagonal.

    For d_A < d_B only a d_A^2-subset J of the B-side diagonal enters; the
    matching bound then keeps the full A-side purity deficit but can no
    longer subtract the B-side pure-state trace, so the B term stays at the
    bare diagonal sum over J (a valid, weaker bound).  ``index_set`` selects
    J explicitly; the default takes the largest rotated diagonal entries.
    """
    da, db = dims
    swapped = False
    if da > db:
        rho = matlin.swap_subsystems(hermitize(rho, rtol=1e-10), (da, db))
        da, db = db, da
        swapped = True
    bcm = _block_cm(rho, (da, db))
    u, sing, vt = np.linalg.svd(bcm.c)
    rot = transform_block_cm(bcm, u.T, vt)
    na = da * da
    if index_set is None:
        index_set = list(range(na))  # rotated C is diagonal, largest first
    else:
        index_set = list(index_set)
        if len(index_set) != na or len(set(index_set)) != na:
            raise MatrixError(f"index set must hold {na} distinct B indices")
        if min(index_set) < 0 or max(index_set) >= db * db:
            raise MatrixError("index set entry out of range")
    lhs = 2.0 * float(np.sum(np.abs(rot.c[np.arange(na), index_set])))
    deficit_a = 1.0 - bcm.purity_a
    if da == db and sorted(index_set) == list(range(db * db)):
        rhs = deficit_a + (1.0 - bcm.purity_b)
    else:
        rhs = deficit_a + float(np.sum(np.diag(rot.b)[index_set]))
    return _verdict("cmc_trace", lhs - rhs,
                    {"lhs": lhs, "bound": rhs,
                     "c_singular_values": sing,
                     "index_set": list(map(int, index_set)),
                     "swapped": swapped})


def cmc_schmidt(rho, dims: tuple[int, int]) -> CriterionVerdict:
    """Trace test in the operator Schmidt basis:
    2 sum |l_k - l_k^2 gA_k gB_k| <= 2 - sum l_k^2 (gA_k^2 + gB_k^2)."""
    dec = operator_schmidt(rho, *dims)
    lam, ga, gb = dec.lambdas, dec.g_a, dec.g_b
    lhs = 2.0 * float(np.sum(np.abs(lam - lam**2 * ga * gb)))
    rhs = 2.0 - float(np.sum(lam**2 * (ga**2 + gb**2)))
    return _verdict("cmc_schmidt", lhs - rhs,
                    {"lhs": lhs, "bound": rhs, "lambdas": lam})


def cmc_kyfan_weyl(rho, dims: tuple[int, int], s: int = 1) -> CriterionVerdict:
    """Ky-Fan refinement for equal dimensions: with k = d^2 - d + 1 + s the
    product (k ||A|| - s)(k ||B|| - s) dominates ||C||_KF(k)^2 on separable
    states."""
    da, db = dims
    if da != db:
        raise MatrixError("Ky-Fan refinement needs equal local dimensions")
    if not 1 <= s <= da - 1:
        raise MatrixError(f"shift s={s} outside [1, {da - 1}]")
    bcm = _block_cm(rho, dims)
    k = da * da - da + 1 + s
    c_norm = matlin.ky_fan_norm(bcm.c, k)
    a_term = k * matlin.operator_norm(bcm.a) - s
    b_term = k * matlin.operator_norm(bcm.b) - s
    return _verdict(f"cmc_kyfan_weyl_s{s}", c_norm**2 - a_term * b_term,
                    {"k": k, "s": s, "c_kyfan_norm": c_norm,
                     "a_term": a_term, "b_term": b_term})


def filter_xi_bound(dims: tuple[int, int]) -> float:
    """Largest sum of normal-form coefficients compatible with separability."""
    da, db = min(dims), max(dims)
    if da == db:
        return float(da * da - da)
    bound_drop = 0.5 * da * db * (1.0 - 1.0 / da + (da * da - 1.0) / db
                                  + min(0.0, -(db - 1.0) + (db * db - da * da) / db))
    bound_bloch = float(np.sqrt(da * db * (da - 1.0) * (db - 1.0)))
    return min(bound_drop, bound_bloch)


def cmc_filter(rho, dims: tuple[int, int], tol: float = filtering.DEFAULT_TOL,
               max_iter: int = filtering.DEFAULT_MAX_ITER,
               noise_eps: float = filtering.DEFAULT_NOISE_EPS) -> CriterionVerdict:
    """Bring the state to its filter normal form and test the coefficient
    sum against d^2 - d (equal dimensions) or the two uneven-dimension
    bounds; necessary and sufficient for two qubits."""
    da, db = dims
    r = hermitize(rho, rtol=1e-10)
    swapped = False
    if da > db:
        r = matlin.swap_subsystems(r, (da, db))
        da, db = db, da
        swapped = True
    nf = filtering.normal_form(r, (da, db), tol=tol, max_iter=max_iter,
                               noise_eps=noise_eps)
    total = float(np.sum(nf.xi))
    bound = filter_xi_bound((da, db))
    details = {
        "xi": nf.xi,
        "xi_sum": total,
        "bound": bound,
        "converged": nf.converged,
        "iterations": nf.iterations,
        "f_value": nf.f_value,
        "filter_a": nf.filter_a,
        "filter_b": nf.filter_b,
        "swapped": swapped,
    }
    return _verdict("cmc_filter", total - bound, details)


def _traceless_sym_basis_3() -> list[np.ndarray]:
    mats = [np.diag([1.0, -1.0, 0.0]), np.diag([1.0, 1.0, -2.0])]
    for i in range(3):
        for j in range(i + 1, 3):
            e = np.zeros((3, 3))
            e[i, j] = e[j, i] = 1.0
            mats.append(e)
    return mats


def _two_qubit_sdp_problem(gamma_eff: np.ndarray) -> sdpsolve.SdpProblem:
    """Program: maximize lambda over kappa_A/B = ((1+lambda)1 - rho_{A,B})/2
    with rho_{A,B} symmetric of trace 1+lambda, subject to kappa_A/B >= 0 and
    gamma_eff - kappa_A (+) kappa_B >= 0.

    The trace equalities are eliminated affinely, rho = (1+lambda)/3 1 +
    traceless part, leaving 11 variables over blocks 6 (+) 3 (+) 3; splitting
    them into scalar inequality pairs instead makes the central path
    degenerate and the gap tolerance unreachable.  kappa then reads
    (1+lambda)/3 1 - traceless/2, so the lambda column carries -1/3 on the
    big block and +1/3 on the kappa blocks.
    """
    basis = _traceless_sym_basis_3()
    m = 11
    c = np.zeros(m)
    c[0] = -1.0  # min -lambda

    f0_blocks = [gamma_eff - np.eye(6) / 3.0, np.eye(3) / 3.0, np.eye(3) / 3.0]
    fi = [np.zeros((m, 6, 6)), np.zeros((m, 3, 3)), np.zeros((m, 3, 3))]
    fi[0][0] = -np.eye(6) / 3.0
    fi[1][0] = np.eye(3) / 3.0
    fi[2][0] = np.eye(3) / 3.0
    for k, e in enumerate(basis):
        ia, ib = 1 + k, 6 + k
        fi[0][ia, :3, :3] = 0.5 * e
        fi[0][ib, 3:, 3:] = 0.5 * e
        fi[1][ia] = -0.5 * e
        fi[2][ib] = -0.5 * e
    return sdpsolve.SdpProblem(c=c, f0_blocks=f0_blocks, fi_blocks=fi)


def extract_lur_from_witness(z1: np.ndarray, cutoff: float = 1e-12) -> LurSet:
    """Spectral decomposition of a CM-witness into local uncertainty
    observables A_k = sqrt(l_k) sum alpha_l sigma_l / sqrt2 and likewise for
    B, reproducing tr(gamma_eff Z1) as the variance sum."""
    w, v = np.linalg.eigh((z1 + z1.T) / 2)
    paulis = np.array([PAULI[k] / np.sqrt(2) for k in "XYZ"])
    ops_a = []
    ops_b = []
    for k in range(6):
        if w[k] <= cutoff:
            continue
        coeff = np.sqrt(w[k]) * v[:, k]
        ops_a.append(np.einsum("l,lab->ab", coeff[:3], paulis))
        ops_b.append(np.einsum("l,lab->ab", coeff[3:], paulis))
    return LurSet(ops_a=np.array(ops_a), ops_b=np.array(ops_b), bound=1.0)


def lur_value(rho, ops_a, ops_b) -> float:
    """sum_k Var(A_k x 1 + 1 x B_k) on the given state."""
    r = hermitize(rho, rtol=1e-10)
    ops_a = np.asarray(ops_a, dtype=complex)
    ops_b = np.asarray(ops_b, dtype=complex)
    if len(ops_a) != len(ops_b):
        raise MatrixError("need matching observable lists")
    if len(ops_a) == 0:
        return 0.0
    da = ops_a.shape[1]
    db = ops_b.shape[1]
    total = 0.0
    for a, b in zip(ops_a, ops_b):
        joint = np.kron(a, np.eye(db)) + np.kron(np.eye(da), b)
        mean = float(np.real(np.trace(r @ joint)))
        sq = float(np.real(np.trace(r @ joint @ joint)))
        total += sq - mean**2
    return total


def cmc_sdp_2q(rho, tol: float = sdpsolve.DEFAULT_TOL,
               max_iter: int = sdpsolve.DEFAULT_MAX_ITER) -> CriterionVerdict:
    """Exact two-qubit covariance-matrix test as a semidefinite program; the
    dual solution doubles as a CM-witness and yields violating local
    uncertainty observables for every detected state."""
    r = hermitize(rho, rtol=1e-10)
    if r.shape != (4, 4):
        raise MatrixError("the SDP criterion is defined for two-qubit states")
    gamma_eff = two_qubit_effective_cm(r)
    problem = _two_qubit_sdp_problem(gamma_eff)
    sol = sdpsolve.solve(problem, tol=tol, max_iter=max_iter)
    if sol.status != "optimal":
        return CriterionVerdict(
            name="cmc_sdp_2q", detected=None, margin=float("nan"),
            details={"solver_status": sol.status,
                     "iterations": sol.iterations},
            eps_margin=SDP_EPS_MARGIN, status="undetermined")
    lam_star = float(sol.x[0])
    z1 = sol.z_blocks[0]
    z1 = (z1 + z1.T) / 2
    witness = CmWitness(z1=z1, value=float(np.tensordot(gamma_eff, z1, axes=2)))
    lur = extract_lur_from_witness(z1)
    details = {
        "lambda_star": lam_star,
        "witness_z1": z1,
        "witness_value": witness.value,
        "lur_ops_a": lur.ops_a,
        "lur_ops_b": lur.ops_b,
        "lur_bound": lur.bound,
        "lur_value": lur_value(r, lur.ops_a, lur.ops_b),
        "gap": sol.gap,
        "iterations": sol.iterations,
    }
    return CriterionVerdict(
        name="cmc_sdp_2q", detected=bool(lam_star < -SDP_EPS_MARGIN),
        margin=-lam_star, details=details, eps_margin=SDP_EPS_MARGIN)


CRITERION_ORDER = ("ppt", "ccnr", "de_vicente", "cmc_singular_values",
                   "cmc_trace", "cmc_schmidt", "cmc_kyfan_weyl", "cmc_filter",
                   "cmc_sdp_2q")


def run_all(rho, dims: tuple[int, int],
            criteria: list[str] | None = None) -> list[CriterionVerdict]:
    """Evaluate every applicable criterion in a fixed order.

    The Ky-Fan family expands to one verdict per shift s; the SDP only runs
    on two qubits.
    """
    da, db = dims
    wanted = list(CRITERION_ORDER) if criteria is None else list(criteria)
    out: list[CriterionVerdict] = []
    for name in wanted:
        if name == "ppt":
            out.append(ppt(rho, dims))
        elif name == "ccnr":
            out.append(ccnr(rho, dims))
        elif name == "de_vicente":
            out.append(de_vicente(rho, dims))
        elif name == "cmc_singular_values":
            out.append(cmc_singular_values(rho, dims))
        elif name == "cmc_trace":
            out.append(cmc_trace(rho, dims))
        elif name == "cmc_schmidt":
            out.append(cmc_schmidt(rho, dims))
        elif name == "cmc_kyfan_weyl":
            if da == db:
                for s in range(1, da):
                    out.append(cmc_kyfan_weyl(rho, dims, s=s))
        elif name == "cmc_filter":
            out.append(cmc_filter(rho, dims))
        elif name == "cmc_sdp_2q":
            if (da, db) == (2, 2):
                out.append(cmc_sdp_2q(rho))
        else:
            raise MatrixError(f"unknown criterion {name!r}")
    return out
