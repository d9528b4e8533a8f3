"""Flags shared by several subcommands."""

import argparse

from ..config import DEFAULT_TAU_CP, DEFAULT_TAU_SPARSE
from ..models import EdgeRule, Method, SolverOptions, StepRule


def add_solver_flags(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("solver")
    group.add_argument("--max-iter", type=int, default=SolverOptions.model_fields["max_outer_iter"].default)
    group.add_argument("--tol", type=float, default=SolverOptions.model_fields["tol_outer"].default,
                       help="relative objective decrease that counts as stalled")
    group.add_argument("--inner-tol", type=float, default=SolverOptions.model_fields["tol_inner"].default)
    group.add_argument("--stationarity-tol", type=float,
                       default=SolverOptions.model_fields["tol_stationarity"].default)
    group.add_argument("--step", choices=[s.value for s in StepRule], default=StepRule.fixed.value)
    group.add_argument("--threads", type=int, default=None, help="worker cap (also TVISING_THREADS)")


def add_model_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--method", choices=[m.value for m in Method], default=Method.tvifl.value)
    parser.add_argument("--tau-cp", type=float, default=DEFAULT_TAU_CP)
    parser.add_argument("--tau-sparse", type=float, default=DEFAULT_TAU_SPARSE)
    parser.add_argument("--edge-rule", choices=[r.value for r in EdgeRule], default=EdgeRule.max.value)


def solver_options(args: argparse.Namespace) -> SolverOptions:
    return SolverOptions(
        max_outer_iter=args.max_iter,
        tol_outer=args.tol,
        tol_inner=args.inner_tol,
        tol_stationarity=args.stationarity_tol,
        step_rule=StepRule(args.step),
    )
