"""Command-line surface: state files, detection reports, threshold
bisection, the seeded chessboard benchmark, and the Bloch-inversion grid
scan.  All commands are deterministic given their flags and seed."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

import numpy as np

from . import __version__, criteria, filtering, states
from .matlin import MatrixError

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_INPUT = 2

# CLI spellings of the criteria; kyfan expands per shift s at evaluation.
CLI_CRITERIA = {
    "ppt": "ppt",
    "ccnr": "ccnr",
    "de-vicente": "de_vicente",
    "cmc-sv": "cmc_singular_values",
    "cmc-trace": "cmc_trace",
    "cmc-schmidt": "cmc_schmidt",
    "cmc-kyfan": "cmc_kyfan_weyl",
    "cmc-filter": "cmc_filter",
    "cmc-sdp": "cmc_sdp_2q",
}

BENCHMARK_CRITERIA = ("cmc-filter", "cmc-sv", "cmc-trace", "cmc-schmidt",
                      "ccnr", "de-vicente")


class InputError(Exception):
    """Bad command-line input or state file; maps to exit code 2."""


def load_statefile(path: str) -> tuple[np.ndarray, tuple[int, int], dict]:
    """Parse a JSON state file into (rho, dims, metadata)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    for key in ("dims", "matrix"):
        if key not in doc:
            raise InputError(f"{path}: missing required key {key!r}")
    dims = doc["dims"]
    if (not isinstance(dims, list) or len(dims) != 2
            or not all(isinstance(d, int) and d >= 1 for d in dims)):
        raise InputError(f"{path}: dims must be two positive integers")
    try:
        raw = np.asarray(doc["matrix"], dtype=float)
        if raw.ndim != 3 or raw.shape[2] != 2:
            raise ValueError(f"matrix must be n x n x [re, im], got {raw.shape}")
        rho = raw[..., 0] + 1j * raw[..., 1]
        rho = states.validate_density(rho, (dims[0], dims[1]))
    except (ValueError, MatrixError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    return rho, (dims[0], dims[1]), doc.get("metadata", {})


def write_statefile(path: str, rho: np.ndarray, dims: tuple[int, int],
                    metadata: dict | None = None) -> None:
    doc = {
        "dims": [int(dims[0]), int(dims[1])],
        "matrix": np.stack([rho.real, rho.imag], axis=-1).tolist(),
        "metadata": metadata or {},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _emit(doc, out: str | None) -> None:
    text = json.dumps(doc, indent=1, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _worker_count() -> int:
    env = os.environ.get("CMCSEP_THREADS", "")
    if env.strip():
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"CMCSEP_THREADS={env!r} is not an integer")
    return max(1, os.cpu_count() or 1)


def cmd_detect(args) -> int:
    rho, dims, _ = load_statefile(args.statefile)
    if args.criteria == "all":
        wanted = None
    else:
        names = [n.strip() for n in args.criteria.split(",") if n.strip()]
        unknown = [n for n in names if n not in CLI_CRITERIA]
        if unknown:
            raise InputError(f"unknown criteria: {', '.join(unknown)}")
        wanted = [CLI_CRITERIA[n] for n in names]
    verdicts = criteria.run_all(rho, dims, criteria=wanted)
    doc = [v.to_json() for v in verdicts]
    if args.basis:
        from .covariance import build_block_cm, cm_to_json
        from .observables import make_basis

        try:
            bcm = build_block_cm(rho, make_basis(args.basis, dims[0]),
                                 make_basis(args.basis, dims[1]),
                                 kind="symmetric")
        except MatrixError as exc:
            raise InputError(f"cannot build CM in basis {args.basis!r}: {exc}")
        doc = {"verdicts": doc, "block_cm": cm_to_json(bcm)}
    _emit(doc, args.output)
    return EXIT_OK


def cmd_witness(args) -> int:
    rho, dims, _ = load_statefile(args.statefile)
    if dims != (2, 2):
        raise InputError("the witness command needs a two-qubit state")
    verdict = criteria.cmc_sdp_2q(rho)
    if verdict.status != "ok":
        print(json.dumps({"status": verdict.status}), file=sys.stderr)
        return EXIT_NUMERICAL
    _emit(verdict.to_json(), args.output)
    return EXIT_OK


def cmd_normal_form(args) -> int:
    rho, dims, _ = load_statefile(args.statefile)
    nf = filtering.normal_form(rho, dims, tol=args.tol, max_iter=args.max_iter,
                               noise_eps=args.noise_eps)
    doc = {
        "xi": nf.xi.tolist(),
        "xi_sum": float(np.sum(nf.xi)),
        "filter_a": {"re": nf.filter_a.real.tolist(),
                     "im": nf.filter_a.imag.tolist()},
        "filter_b": {"re": nf.filter_b.real.tolist(),
                     "im": nf.filter_b.imag.tolist()},
        "converged": nf.converged,
        "f_value": nf.f_value,
        "iterations": nf.iterations,
        "noise_eps": nf.noise_eps,
        "dims": list(nf.dims),
        "schedule": "alternating exact marginal balancing",
    }
    _emit(doc, args.output)
    return EXIT_OK


def _gen_state(args) -> tuple[np.ndarray, tuple[int, int], dict]:
    family = args.family
    meta: dict = {"family": family}
    if family == "chessboard":
        if args.params:
            params = [float(x) for x in args.params.split(",")]
            if len(params) != 6:
                raise InputError("chessboard needs 6 comma-separated parameters")
            rho = states.chessboard(*params)
            meta["params"] = params
        else:
            rng = np.random.default_rng(args.seed)
            rho = states.sample_chessboard(rng)
            meta["seed"] = args.seed
        return rho, (3, 3), meta
    if family == "upb":
        rho = states.upb_tiles(args.p)
        meta["p"] = args.p
        return rho, (3, 3), meta
    if family == "rho-eps":
        rho = states.rho_epsilon(args.eps, args.r, args.s, args.t)
        meta.update(eps=args.eps, r=args.r, s=args.s, t=args.t)
        return rho, (2, 2), meta
    if family == "werner":
        rho = states.werner_2q(args.p)
        meta["p"] = args.p
        return rho, (2, 2), meta
    if family == "random":
        da, db = _parse_dims(args.dims)
        rng = np.random.default_rng(args.seed)
        rho = states.random_density(da * db, rank=args.rank, rng=rng)
        meta.update(seed=args.seed, rank=args.rank)
        return rho, (da, db), meta
    if family == "separable":
        da, db = _parse_dims(args.dims)
        rng = np.random.default_rng(args.seed)
        rho = states.random_separable(da, db, n_terms=args.terms, rng=rng)
        meta.update(seed=args.seed, terms=args.terms)
        return rho, (da, db), meta
    raise InputError(f"unknown family {family!r}")


def _parse_dims(spec: str) -> tuple[int, int]:
    try:
        da, db = (int(x) for x in spec.split(","))
    except ValueError:
        raise InputError(f"dims must look like '2,3', got {spec!r}") from None
    if da < 2 or db < 2:
        raise InputError("local dimensions must be at least 2")
    return da, db


def cmd_gen(args) -> int:
    rho, dims, meta = _gen_state(args)
    meta["version"] = __version__
    write_statefile(args.output, rho, dims, meta)
    return EXIT_OK


def _threshold_eval(family: str, crit_name: str, p: float) -> bool:
    if family == "upb":
        rho, dims = states.upb_tiles(p), (3, 3)
    elif family == "werner":
        rho, dims = states.werner_2q(p), (2, 2)
    else:
        raise InputError(f"threshold scan supports upb and werner, not {family!r}")
    verdicts = criteria.run_all(rho, dims, criteria=[CLI_CRITERIA[crit_name]])
    return any(v.detected for v in verdicts)


def bisect_threshold(family: str, crit_name: str, p_lo: float, p_hi: float,
                     tol: float = 1e-4, presweep: int = 20) -> float:
    """Locate the detection onset by bisection after a monotonicity presweep."""
    flags = [_threshold_eval(family, crit_name, p)
             for p in np.linspace(p_lo, p_hi, presweep)]
    if flags[0] or not flags[-1]:
        raise InputError(
            f"detection is not bracketed on [{p_lo}, {p_hi}] for {crit_name}")
    first = flags.index(True)
    if any(flags[i] and not flags[i + 1] for i in range(first, presweep - 1)):
        raise InputError("detection is not monotone on the requested interval")
    grid = np.linspace(p_lo, p_hi, presweep)
    lo, hi = grid[first - 1], grid[first]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _threshold_eval(family, crit_name, mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def cmd_threshold(args) -> int:
    if args.criterion not in CLI_CRITERIA:
        raise InputError(f"unknown criterion {args.criterion!r}")
    p_star = bisect_threshold(args.family, args.criterion, args.p_lo, args.p_hi,
                              tol=args.tol)
    _emit({"family": args.family, "criterion": args.criterion,
           "p_star": p_star, "tol": args.tol, "version": __version__},
          args.output)
    return EXIT_OK


def _benchmark_one(task) -> list[tuple[int, str, float, bool]]:
    seed, index, crit_names = task
    rng = np.random.default_rng([seed, index])
    rho = states.sample_chessboard(rng)
    rows = []
    for cname in crit_names:
        vs = criteria.run_all(rho, (3, 3), criteria=[CLI_CRITERIA[cname]])
        for v in vs:
            rows.append((index, cname, float(v.margin), bool(v.detected)))
    return rows


def run_benchmark(n: int, seed: int, crit_names: list[str],
                  workers: int | None = None):
    """Evaluate the chessboard ensemble; returns (rows, fractions).

    Rows are ordered by sample index whatever the worker count; each sample
    draws from its own rng stream keyed by (seed, index).
    """
    workers = _worker_count() if workers is None else workers
    tasks = [(seed, i, crit_names) for i in range(n)]
    if workers > 1 and n > 1:
        import multiprocessing as mp

        with mp.Pool(workers) as pool:
            per_state = pool.map(_benchmark_one, tasks, chunksize=64)
    else:
        per_state = [_benchmark_one(t) for t in tasks]
    rows = [row for chunk in per_state for row in chunk]
    fractions = {}
    for cname in crit_names:
        hits = sum(1 for r in rows if r[1] == cname and r[3])
        total = sum(1 for r in rows if r[1] == cname)
        fractions[cname] = hits / total if total else 0.0
    return rows, fractions


def cmd_benchmark(args) -> int:
    names = (list(BENCHMARK_CRITERIA) if args.criteria == "default"
             else [x.strip() for x in args.criteria.split(",") if x.strip()])
    unknown = [x for x in names if x not in CLI_CRITERIA]
    if unknown:
        raise InputError(f"unknown criteria: {', '.join(unknown)}")
    if args.n < 0:
        raise InputError("sample count must be non-negative")
    t0 = time.time()
    rows, fractions = run_benchmark(args.n, args.seed, names)
    wall = time.time() - t0
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "criterion", "margin", "detected"])
            for index, cname, margin, detected in rows:
                writer.writerow([index, cname, repr(margin), int(detected)])
    report = {
        "family": "chessboard",
        "n_samples": args.n,
        "seed": args.seed,
        "criteria": names,
        "detection_fractions": fractions,
        "wall_time_s": wall,
        "version": __version__,
    }
    _emit(report, args.output)
    return EXIT_OK


def fig1_scan(grid_step: float, s: float = 0.45, t: float = 1.0 / 16.0):
    """Classify the Bloch-inversion behaviour of rho_epsilon on an
    (epsilon, r) grid; parameter points that are not states are skipped."""
    from .covariance import bloch_invert
    from .criteria import ppt

    rows = []
    grid = np.arange(0.0, 1.0 + 0.5 * grid_step, grid_step)
    for eps in grid:
        for r in grid:
            if not states.rho_epsilon_valid(eps, r, s, t):
                continue
            rho = states.rho_epsilon(eps, r, s, t)
            inv, wmin = bloch_invert(rho, side="A")
            if wmin < -1e-12:
                region = "NotAState"
            else:
                ent = ppt(rho, (2, 2)).detected
                ent_inv = ppt(inv, (2, 2)).detected
                region = "Same" if ent == ent_inv else "Different"
            rows.append((float(eps), float(r), region))
    return rows


def cmd_fig1(args) -> int:
    rows = fig1_scan(args.grid_step)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["epsilon", "r", "region"])
    for eps, r, region in rows:
        writer.writerow([repr(eps), repr(r), region])
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmcsep",
        description="Covariance-matrix separability tests for bipartite states")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run separability criteria on a state file")
    p.add_argument("statefile")
    p.add_argument("--criteria", default="all",
                   help="comma-separated list (default: all applicable)")
    p.add_argument("--basis", default=None,
                   choices=["standard", "pauli", "gellmann", "weyl"],
                   help="also export the symmetric block CM in this basis "
                        "(criteria themselves are basis independent)")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("witness", help="two-qubit CM-witness and LUR extraction")
    p.add_argument("statefile")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("normal-form", help="filter a state to its normal form")
    p.add_argument("statefile")
    p.add_argument("--tol", type=float, default=filtering.DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=filtering.DEFAULT_MAX_ITER)
    p.add_argument("--noise-eps", type=float, default=filtering.DEFAULT_NOISE_EPS)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_normal_form)

    p = sub.add_parser("gen", help="generate a state file")
    p.add_argument("--family", required=True,
                   choices=["chessboard", "upb", "rho-eps", "werner", "random",
                            "separable"])
    p.add_argument("--params", default=None, help="chessboard: m,n,a,b,c,d")
    p.add_argument("--p", type=float, default=1.0, help="upb/werner mixing")
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--s", type=float, default=0.45)
    p.add_argument("--t", type=float, default=0.0625)
    p.add_argument("--dims", default="3,3")
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--terms", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("threshold", help="bisect a detection threshold in p")
    p.add_argument("--family", default="upb", choices=["upb", "werner"])
    p.add_argument("--criterion", required=True)
    p.add_argument("--p-lo", type=float, default=0.0)
    p.add_argument("--p-hi", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("benchmark", help="seeded chessboard detection fractions")
    p.add_argument("--family", default="chessboard", choices=["chessboard"])
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--criteria", default="default")
    p.add_argument("--csv", default=None, help="per-sample margin CSV path")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("fig1", help="Bloch-inversion region scan of rho_epsilon")
    p.add_argument("--grid-step", type=float, default=0.005)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_fig1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (MatrixError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
