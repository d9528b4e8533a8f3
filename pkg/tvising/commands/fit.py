import argparse
import logging

from ..estimator import build_model, certificate_failures, fit_nodes
from ..models import EdgeRule, Method, PenaltyConfig
from ..storage import (
    SIGN_FILTERS,
    edge_frame,
    load_dataset,
    save_estimated,
    save_solutions,
    save_stationarity_report,
    write_csv,
)
from .options import add_model_flags, add_solver_flags, solver_options

logger = logging.getLogger(__name__)


def cmd_fit(args: argparse.Namespace) -> int:
    """Fit one (λ1, λ2) pair; exit 2 if any node fails its stationarity certificate."""
    dataset = load_dataset(args.dataset)
    method = Method(args.method)
    lambda1 = 0.0 if method == Method.per_timestamp else args.lambda1
    penalty = PenaltyConfig(lambda1=lambda1, lambda2=args.lambda2, fused_norm=method.fused_norm)
    opts = solver_options(args)

    solutions = fit_nodes(dataset, penalty, opts, args.threads)
    model = build_model(solutions, args.tau_cp, args.tau_sparse, EdgeRule(args.edge_rule))
    save_estimated(args.out, model)
    if args.edges:
        write_csv(args.edges, edge_frame(model, args.sign))

    limits = [opts.tol_stationarity * (1.0 + abs(s.objective)) for s in solutions]
    if args.report:
        save_stationarity_report(args.report, solutions, limits)
    if args.solutions:
        save_solutions(args.solutions, solutions)
    failed = certificate_failures(solutions, opts)
    print(f"{len(model.change_points)} change-points: {model.change_points}")
    if failed:
        logger.error("stationarity certificate above tolerance for nodes %s", failed)
        return 2
    return 0


def register(subparsers):
    parser = subparsers.add_parser("fit", help="fit a time-varying model for one (lambda1, lambda2)")
    parser.add_argument("dataset", help="SpinDataset (.json or long-form .csv)")
    parser.add_argument("--lambda1", type=float, required=True)
    parser.add_argument("--lambda2", type=float, required=True)
    parser.add_argument("--out", default="model.json")
    parser.add_argument("--report", default=None, help="per-node stationarity report (JSON)")
    parser.add_argument("--edges", default=None, help="per-segment edge list (CSV)")
    parser.add_argument("--solutions", default=None, help="per-node β̂ with objective and certificate (JSON)")
    parser.add_argument("--sign", choices=SIGN_FILTERS, default="all")
    add_model_flags(parser)
    add_solver_flags(parser)
    parser.set_defaults(handler=cmd_fit)
