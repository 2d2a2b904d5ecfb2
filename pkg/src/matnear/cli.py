"""Command-line front end.

Subcommands cover the solver families: ``psa`` (pseudospectral abscissa),
``boundary`` (boundary tracing to CSV), ``stabradius``, ``singdist``,
``dissipradius``, ``epsstabradius`` and ``coprime``.  Matrices are read
from Matrix Market files; results are written as key-value reports plus
optional per-iteration trace CSVs and rendered figures.  Exit codes:
0 converged, 1 input error, 2 solver did not converge (report still
written).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import structures as st
from .eigfree import coprimality_radius, dissipativity_radius, singularity_distance_mvp
from .errors import MatnearError
from .linalg import rightmost, target_eigentriple
from .mmio import read_matrix, write_matrix
from .objectives import neg_real_part
from .pseudospectra import (
    BoundaryPoint,
    boundary_normal,
    crisscross_abscissa,
    rank1_abscissa,
    trace_boundary,
)
from .rank1 import FlowConfig, run_rank1_flow, steepest_descent_state
from .reports import write_boundary_csv, write_report, write_trace
from .structured import run_structured_flow, structured_steepest_descent
from .twolevel import (
    OuterConfig,
    SolveReport,
    eps_stability_radius,
    singularity_distance_eig,
    stability_radius,
)

DEFAULT_SEED = 20240


def _structure_from_args(args, data, n) -> st.StructureSpace | None:
    kind = getattr(args, "structure", None)
    if kind in (None, "full-complex"):
        return None if kind is None else st.full_complex(n)
    if kind == "full-real":
        return st.full_real(n)
    if kind in ("sparse-real", "sparse-complex"):
        src = getattr(args, "pattern", "from-matrix")
        if src == "from-matrix":
            if data.pattern is not None:
                pattern = data.pattern
            else:
                pattern = st.SparsityPattern.from_matrix(data.matrix)
        else:
            pattern = read_matrix(src).pattern or st.SparsityPattern.from_matrix(
                read_matrix(src).matrix
            )
        maker = st.sparse_real if kind == "sparse-real" else st.sparse_complex
        return maker(pattern, n)
    if kind in ("toeplitz-real", "toeplitz-complex"):
        return st.toeplitz_real(n) if kind == "toeplitz-real" else st.toeplitz_complex(n)
    if kind == "hamiltonian":
        if n % 2:
            raise MatnearError("hamiltonian structure needs an even dimension")
        return st.hamiltonian_real(n // 2)
    if kind == "sylvester":
        if n % 2:
            raise MatnearError("sylvester structure needs an even dimension")
        return st.sylvester_real(n // 2)
    if kind == "range-corange":
        if not (args.range_b and args.corange_c):
            raise MatnearError("range-corange needs --range-b and --corange-c files")
        B = read_matrix(args.range_b).matrix.real
        C = read_matrix(args.corange_c).matrix.real
        return st.range_corange(B, C)
    raise MatnearError(f"unknown structure {kind!r}")


def _outer_cfg(args) -> OuterConfig:
    kwargs = {}
    if getattr(args, "eps0", None) is not None:
        kwargs["eps0"] = args.eps0
    if getattr(args, "tol", None) is not None:
        kwargs["tol_min"] = args.tol
    return OuterConfig(**kwargs)


def _emit_solve(args, report: SolveReport, fields: dict) -> int:
    fields["status"] = report.status
    fields["iterations"] = len(report.rows)
    if report.rows:
        fields["phi_final"] = report.rows[-1].phi
        fields["inner_eigs_total"] = sum(r.inner_eigs for r in report.rows)
    write_report(args.out, fields)
    if getattr(args, "trace", None):
        write_trace(args.trace, report.rows)
    if getattr(args, "perturbation_out", None) and report.perturbation is not None:
        write_matrix(args.perturbation_out, report.perturbation)
    if getattr(args, "plot", None) and report.rows:
        from .plots import plot_outer_trace

        plot_outer_trace(report.rows, args.plot)
    return 0 if report.status == "converged" else 2


def _cmd_psa(args) -> int:
    data = read_matrix(args.matrix)
    A = data.matrix
    n = A.shape[0]
    fields = {"command": "psa", "method": args.method, "eps": args.eps}
    if args.method == "crisscross":
        alpha, trace = crisscross_abscissa(A, args.eps, tol=args.tol or 1e-10)
        fields["alpha"] = alpha
        fields["iterations"] = len(trace.alphas)
        fields["status"] = "converged"
        write_report(args.out, fields)
        return 0
    if args.method in ("rank1", "monotone"):
        mode = "plain" if args.method == "rank1" else "monotone"
        res = rank1_abscissa(A, args.eps, mode=mode, tol=args.tol or 1e-12)
        fields["alpha"] = res.r
        fields["lambda"] = res.triple.lam
        fields["iterations"] = len(res.trace)
        fields["status"] = res.status
        write_report(args.out, fields)
        return 0 if res.status == "converged" else 2
    if args.method == "flow":
        triple = target_eigentriple(A, rightmost())
        init = steepest_descent_state(neg_real_part(), triple)
        res = run_rank1_flow(
            A,
            args.eps,
            neg_real_part(),
            rightmost(),
            init,
            FlowConfig(tol_stationary=args.tol or 1e-11),
        )
        fields["alpha"] = -res.f
        fields["lambda"] = res.triple.lam
        fields["iterations"] = len(res.trace)
        fields["status"] = res.status
        write_report(args.out, fields)
        return 0 if res.status == "converged" else 2
    if args.method == "structured":
        space = _structure_from_args(args, data, n)
        if space is None:
            raise MatnearError("--structure is required for method 'structured'")
        triple = target_eigentriple(A, rightmost())
        init = structured_steepest_descent(space, neg_real_part(), triple)
        res = run_structured_flow(
            A,
            args.eps,
            neg_real_part(),
            rightmost(),
            space,
            init,
            FlowConfig(tol_stationary=args.tol or 1e-11),
        )
        fields["alpha"] = -res.f
        fields["lambda"] = res.triple.lam
        fields["iterations"] = len(res.trace)
        fields["status"] = res.status
        write_report(args.out, fields)
        return 0 if res.status == "converged" else 2
    raise MatnearError(f"unknown psa method {args.method!r}")


def _cmd_boundary(args) -> int:
    data = read_matrix(args.matrix)
    A = data.matrix
    space = _structure_from_args(args, data, A.shape[0])
    if space is not None and space.kind == "full-complex":
        space = None
    # starting point: rightmost boundary point of the (structured) set
    if space is None:
        res = rank1_abscissa(A, args.eps, mode="monotone", tol=1e-13)
        start = BoundaryPoint(
            res.triple.lam, boundary_normal(res.state.u, res.state.v), res.state
        )
    else:
        triple = target_eigentriple(A, rightmost())
        init = structured_steepest_descent(space, neg_real_part(), triple)
        res = run_structured_flow(
            A, args.eps, neg_real_part(), rightmost(), space, init,
            FlowConfig(tol_stationary=1e-12),
        )
        start = BoundaryPoint(
            res.triple.lam, boundary_normal(res.state.u, res.state.v), res.state
        )
    method = "tangential-transversal" if args.method == "tt" else args.method
    points = trace_boundary(
        A,
        args.eps,
        start,
        method=method,
        step=args.step,
        n_points=args.n,
        space=space,
        direction=args.direction,
    )
    write_boundary_csv(args.out, points)
    if args.plot:
        from .plots import plot_boundary

        plot_boundary(points, np.linalg.eigvals(A), args.plot)
    return 0


def _cmd_stabradius(args) -> int:
    data = read_matrix(args.matrix)
    A = data.matrix
    space = _structure_from_args(args, data, A.shape[0])
    report = stability_radius(A, space, flavor=args.flavor, cfg=_outer_cfg(args))
    return _emit_solve(
        args,
        report,
        {
            "command": "stabradius",
            "flavor": args.flavor,
            "structure": args.structure or "full-complex",
            "eps_star": report.eps_star,
        },
    )


def _cmd_singdist(args) -> int:
    data = read_matrix(args.matrix)
    A = data.matrix
    space = _structure_from_args(args, data, A.shape[0])
    if args.route == "mvp":
        if space is None:
            raise MatnearError("--structure is required for the mvp route")
        report = singularity_distance_mvp(A.real, space, _outer_cfg(args))
    else:
        report = singularity_distance_eig(A, space, _outer_cfg(args))
    return _emit_solve(
        args,
        report,
        {
            "command": "singdist",
            "route": args.route,
            "structure": args.structure or "full-complex",
            "eps_star": report.eps_star,
        },
    )


def _cmd_dissipradius(args) -> int:
    data = read_matrix(args.matrix)
    A = data.matrix
    space = _structure_from_args(args, data, A.shape[0]) or st.full_complex(
        A.shape[0]
    )
    report = dissipativity_radius(A, space, _outer_cfg(args) if args.eps0 else None)
    return _emit_solve(
        args,
        report,
        {
            "command": "dissipradius",
            "structure": args.structure or "full-complex",
            "eps_star": report.eps_star,
        },
    )


def _cmd_epsstabradius(args) -> int:
    data = read_matrix(args.matrix)
    A = data.matrix
    space = _structure_from_args(args, data, A.shape[0])
    if space is None:
        raise MatnearError("--structure is required for epsstabradius")
    if args.solve_for == "delta":
        if args.eps is None:
            raise MatnearError("--eps is required when solving for delta")
        report = eps_stability_radius(A, space, eps=args.eps, cfg=_outer_cfg(args))
        fields = {
            "command": "epsstabradius",
            "solve_for": "delta",
            "eps": args.eps,
            "delta_star": report.eps_star,
        }
    else:
        if args.delta is None:
            raise MatnearError("--delta is required when solving for eps")
        report = eps_stability_radius(A, space, delta=args.delta, cfg=_outer_cfg(args))
        fields = {
            "command": "epsstabradius",
            "solve_for": "eps",
            "delta": args.delta,
            "eps_star": report.eps_star,
        }
    fields["structure"] = args.structure
    return _emit_solve(args, report, fields)


def _parse_coeffs(text: str) -> np.ndarray:
    items = [t for chunk in text.split(",") for t in chunk.split()]
    try:
        return np.array([float(t) for t in items])
    except ValueError:
        raise MatnearError(f"bad coefficient list {text!r}") from None


def _cmd_coprime(args) -> int:
    p = _parse_coeffs(args.p)
    q = _parse_coeffs(args.q)
    result = coprimality_radius(p, q, route=args.route)
    fields = {
        "command": "coprime",
        "rho_co": result.rho_co,
        "eps_star": result.eps_star,
    }
    for i, c in enumerate(result.p_perturbed):
        fields[f"p_hat_{result.p_perturbed.size - 1 - i}"] = float(c)
    for i, c in enumerate(result.q_perturbed):
        fields[f"q_hat_{result.q_perturbed.size - 1 - i}"] = float(c)
    for i, z in enumerate(np.sort_complex(result.common_zeros)):
        fields[f"common_zero_{i}"] = complex(z)
    fields["status"] = result.report.status
    write_report(args.out, fields)
    if args.trace and result.report.rows:
        write_trace(args.trace, result.report.rows)
    if args.plot:
        from .plots import plot_points

        plot_points(result.common_zeros, args.plot, label="common zeros")
    return 0 if result.report.status == "converged" else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matnear",
        description="Eigenvalue optimization and matrix nearness solvers",
    )
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="random seed")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, structure=True, outer=True):
        p.add_argument("--out", required=True, help="report output path")
        p.add_argument("--trace", help="per-iteration trace CSV path")
        p.add_argument("--plot", help="figure output path")
        if structure:
            p.add_argument(
                "--structure",
                choices=[
                    "full-complex",
                    "full-real",
                    "sparse-complex",
                    "sparse-real",
                    "toeplitz-complex",
                    "toeplitz-real",
                    "hamiltonian",
                    "sylvester",
                    "range-corange",
                ],
            )
            p.add_argument(
                "--pattern",
                default="from-matrix",
                help="sparsity pattern: 'from-matrix' or a Matrix Market file",
            )
            p.add_argument("--range-b", help="Matrix Market file with the B factor")
            p.add_argument("--corange-c", help="Matrix Market file with the C factor")
        if outer:
            p.add_argument("--eps0", type=float, help="starting perturbation size")
            p.add_argument("--tol", type=float, help="outer tolerance")
            p.add_argument(
                "--perturbation-out",
                help="write the extremal perturbation as a Matrix Market file",
            )

    p = sub.add_parser("psa", help="pseudospectral abscissa")
    p.add_argument("--matrix", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument(
        "--method",
        default="crisscross",
        choices=["crisscross", "rank1", "monotone", "flow", "structured"],
    )
    p.add_argument("--tol", type=float)
    add_common(p, outer=False)
    p.set_defaults(func=_cmd_psa)

    p = sub.add_parser("boundary", help="trace the pseudospectrum boundary")
    p.add_argument("--matrix", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--method", default="ladder", choices=["tt", "ladder"])
    p.add_argument("--n", type=int, default=20, help="number of boundary points")
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--direction", default="right", choices=["left", "right"])
    add_common(p, outer=False)
    p.set_defaults(func=_cmd_boundary)

    p = sub.add_parser("stabradius", help="distance to instability")
    p.add_argument("--matrix", required=True)
    p.add_argument("--flavor", default="hurwitz", choices=["hurwitz", "schur"])
    add_common(p)
    p.set_defaults(func=_cmd_stabradius)

    p = sub.add_parser("singdist", help="structured distance to singularity")
    p.add_argument("--matrix", required=True)
    p.add_argument("--route", default="eig", choices=["eig", "mvp"])
    add_common(p)
    p.set_defaults(func=_cmd_singdist)

    p = sub.add_parser("dissipradius", help="structured dissipativity radius")
    p.add_argument("--matrix", required=True)
    add_common(p)
    p.set_defaults(func=_cmd_dissipradius)

    p = sub.add_parser("epsstabradius", help="structured eps-stability radius")
    p.add_argument("--matrix", required=True)
    p.add_argument("--solve-for", default="delta", choices=["delta", "eps"])
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    add_common(p)
    p.set_defaults(func=_cmd_epsstabradius)

    p = sub.add_parser("coprime", help="coprimality radius of a polynomial pair")
    p.add_argument("--p", required=True, help="coefficients, highest degree first")
    p.add_argument("--q", required=True, help="coefficients, highest degree first")
    p.add_argument("--route", default="eig", choices=["eig", "mvp"])
    add_common(p, structure=False, outer=False)
    p.set_defaults(func=_cmd_coprime)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    np.random.seed(args.seed % (2**32))
    try:
        return args.func(args)
    except (MatnearError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
