"""Command line entry point: ``opbvp <command> --config <path> [--epsilon v]* [--order N] [--out dir]``."""

import argparse
import json
import os
import sys
import warnings

import numpy as np

from .boundary import apply_functional, boundary_defect
from .config import load_problem
from .errors import BvpError, ConfigError, DivergenceWarning
from .evolution import TrajectoryTable
from .linear_bvp import analyze_problem, classify_solvability, quasisolve, solve_family
from .oracle import direct_solve
from .perturbation import assemble_B0, evaluate_series, residual_report, series_solve

COMMANDS = ("analyze", "solve", "perturb", "oracle", "sweep")
SWEEP_DEFAULT = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3]


def _fmt(x):
    return format(float(x), ".17g")


def write_csv(path, traj):
    n = traj.n
    header = ["t"] + [f"y_{i + 1}" for i in range(n)] + [f"dy_{i + 1}" for i in range(n)]
    lines = [",".join(header)]
    for t, row in zip(traj.grid.nodes, traj.states):
        lines.append(",".join([_fmt(t)] + [_fmt(v) for v in row]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path, doc):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _eps_tag(eps):
    return format(eps, ".6g")


def _coeff_tag(i):
    return f"m{-i}" if i < 0 else str(i)


def _q_summary(qa):
    return {
        "Q": qa.Q.tolist(),
        "singular_values": qa.bundle.singular_values.tolist(),
        "rank": qa.bundle.numeric_rank,
        "kernel_dim": qa.kernel_dim,
        "cokernel_dim": qa.cokernel_dim,
    }


def _analysis(spec):
    prob = spec.build()
    qa = analyze_problem(prob, spec.rank_tol)
    b = boundary_defect(prob)
    report = classify_solvability(qa, b, spec.tol, prob.alpha)
    return prob, qa, b, report


def cmd_analyze(spec, out):
    prob, qa, b, report = _analysis(spec)
    b0a = assemble_B0(prob, qa, spec.rank_tol)
    doc = {
        "problem": spec.name,
        "solvability": report.as_dict(),
        "boundary_defect": b.tolist(),
        "Q": _q_summary(qa),
        "B0": b0a.as_dict(),
        "bifurcation_holds": b0a.bifurcation_norm <= spec.bifurcation_tol,
        "cond_max_U": prob.table.cond_max,
    }
    write_json(os.path.join(out, "report.json"), doc)
    print(f"{spec.name}: {report.classification}, defect {report.defect_norm:.10g}, "
          f"kernel_dim {report.kernel_dim}, cokernel_dim {report.cokernel_dim}")
    print(f"B0 rank {b0a.bundle.numeric_rank}, bifurcation norm {b0a.bifurcation_norm:.3g}, rho {b0a.rho}")
    return 0


def cmd_solve(spec, out):
    prob, qa, b, report = _analysis(spec)
    if report.solvable:
        c = spec.c_free if spec.c_free is not None else np.zeros(prob.phase.dim)
        traj = solve_family(prob, qa, c, spec.tol)
        residual = float(np.linalg.norm(prob.alpha - apply_functional(prob.form, traj)))
    else:
        traj, residual = quasisolve(prob, qa)
    ode, _ = residual_report(prob, traj, 0.0)
    write_csv(os.path.join(out, "solution.csv"), traj)
    write_json(os.path.join(out, "report.json"), {
        "problem": spec.name,
        "solvability": report.as_dict(),
        "boundary_residual": residual,
        "ode_residual": ode,
    })
    print(f"{spec.name}: {report.classification}, boundary residual {residual:.6g}")
    return 0


def _series(spec):
    prob, qa, b, report = _analysis(spec)
    b0a = assemble_B0(prob, qa, spec.rank_tol)
    sol = series_solve(prob, qa, b0a, spec.branch, spec.order, spec.c_rho, spec.tol, spec.bifurcation_tol)
    return prob, qa, b0a, sol


def cmd_perturb(spec, out):
    prob, qa, b0a, sol = _series(spec)
    for i in sol.indices:
        write_csv(os.path.join(out, f"coeff_{_coeff_tag(i)}.csv"),
                  TrajectoryTable(sol.grid, sol.coefficient(i)))
    evals = []
    for eps in spec.epsilons:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", DivergenceWarning)
            traj, ratio = evaluate_series(sol, eps)
        ode, bnd = residual_report(prob, traj, eps)
        write_csv(os.path.join(out, f"series_eps_{_eps_tag(eps)}.csv"), traj)
        evals.append({"epsilon": eps, "ratio": ratio, "diverging": bool(caught),
                      "ode_residual": ode, "boundary_residual": bnd})
        print(f"eps {eps:g}: ratio {ratio:.3g}, ode residual {ode:.3g}, boundary residual {bnd:.3g}")
    write_json(os.path.join(out, "perturb_report.json"), {
        "problem": spec.name,
        "branch": sol.branch,
        "start": sol.start,
        "order": sol.order,
        "rho": sol.rho,
        "B0": b0a.as_dict(),
        "cbar": {str(i): c.tolist() for i, c in zip(sol.indices, sol.cbar)},
        "term_norms": dict(zip(map(str, sol.indices), sol.term_norms)),
        "evaluations": evals,
    })
    print(f"{spec.name}: {sol.branch} series, orders {sol.start}..{sol.order}, rho {sol.rho}")
    return 0


def cmd_oracle(spec, out):
    prob = spec.build()
    docs = []
    for eps in spec.epsilons or [0.0]:
        traj, report = direct_solve(prob, eps, spec.rank_tol, spec.tol)
        write_csv(os.path.join(out, f"oracle_eps_{_eps_tag(eps)}.csv"), traj)
        docs.append({"epsilon": eps, "solvability": report.as_dict()})
        print(f"eps {eps:g}: {report.classification}, defect {report.defect_norm:.6g}")
    write_json(os.path.join(out, "oracle_report.json"), {"problem": spec.name, "runs": docs})
    return 0


def cmd_sweep(spec, out):
    prob, qa, b0a, sol = _series(spec)
    lines = ["epsilon,sup_error,relative_error,ratio"]
    for eps in spec.epsilons or SWEEP_DEFAULT:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DivergenceWarning)
            traj, ratio = evaluate_series(sol, eps)
        ref, _ = direct_solve(prob, eps, spec.rank_tol, spec.tol)
        err = float(np.abs(traj.states - ref.states).max())
        rel = err / max(float(np.abs(ref.states).max()), np.finfo(float).tiny)
        lines.append(",".join(_fmt(v) for v in (eps, err, rel, ratio)))
        print(f"eps {eps:g}: sup error {err:.3e} (relative {rel:.3e})")
    with open(os.path.join(out, "sweep.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return 0


HANDLERS = {
    "analyze": cmd_analyze,
    "solve": cmd_solve,
    "perturb": cmd_perturb,
    "oracle": cmd_oracle,
    "sweep": cmd_sweep,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="opbvp", description=__doc__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="YAML problem configuration")
    parser.add_argument("--epsilon", type=float, action="append", help="small parameter (repeatable)")
    parser.add_argument("--order", type=int, help="series truncation order N")
    parser.add_argument("--out", help="output directory")
    return parser


def run(command, spec, out=None):
    """Execute ``command`` on a loaded ProblemSpec; returns the exit status."""
    out = out or spec.out_dir
    os.makedirs(out, exist_ok=True)
    return HANDLERS[command](spec, out)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        spec = load_problem(args.config)
        if args.epsilon:
            spec.epsilons = list(args.epsilon)
        if args.order is not None:
            if args.order < 0:
                raise ConfigError("--order", "must be non-negative")
            spec.order = args.order
        return run(args.command, spec, args.out)
    except ConfigError as exc:
        print(f"error: ConfigError: {exc}", file=sys.stderr)
        return 2
    except BvpError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
