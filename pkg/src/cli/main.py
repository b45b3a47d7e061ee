"""Unified command-line interface for the sparse-recovery solvers and the MEG experiment."""

from __future__ import annotations

import functools
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, Tuple

import click
import numpy as np
from pydantic import ValidationError

from src.config import (
    ExperimentConfig,
    MEGCase,
    SolverConfig,
    get_default_solver_config,
    load_experiment_config,
    load_solver_config,
)
from src.errors import ConfigurationError, DivergenceError, SparseRecoveryError
from src.linops import LinearMap, dense, read_dense, read_vector
from src.meg import run_experiment
from src.prox import joint_threshold, project_l1_ball, project_linf, soft_threshold
from src.solvers import (
    PenaltyKind,
    ProblemSpec,
    RunReport,
    check_step_conditions,
    solve_basis_pursuit,
    solve_cista,
    solve_constrained_gist,
    solve_gist,
    solve_ista,
    solve_l1_constrained,
)
from src.utils import dumps_report, setup_run_logger, write_json_report, write_trace_csv

LOG_LEVELS = [logging.WARNING, logging.INFO, logging.DEBUG]

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_ITERATION_CAP = 2
EXIT_DIVERGED = 3

logger = logging.getLogger(__name__)


def _configure_logging(verbose: int, quiet: bool, log_dir: Optional[Path]) -> None:
    level_index = min(verbose, len(LOG_LEVELS) - 1)
    level = LOG_LEVELS[level_index]
    if quiet:
        level = logging.ERROR
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s - %(message)s",
    )
    # The run log may lower package loggers to DEBUG; keep the console at ``level``.
    for handler in logging.getLogger().handlers:
        if type(handler) is logging.StreamHandler:
            handler.setLevel(level)
    if log_dir is not None:
        setup_run_logger("src", log_dir)


def _handle_errors(command: Callable[..., int]) -> Callable[..., None]:
    """Run ``command`` and translate its result and library errors into exit codes."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> None:
        ctx = click.get_current_context()
        try:
            code = command(*args, **kwargs)
        except DivergenceError as exc:
            click.echo(f"error: numerical divergence: {exc}", err=True)
            ctx.exit(EXIT_DIVERGED)
        except (SparseRecoveryError, ValidationError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_INPUT_ERROR)
        ctx.exit(code)

    return wrapper


def _parse_penalty(text: str) -> PenaltyKind:
    if text == "l1":
        return PenaltyKind.separable()
    name, _, size = text.partition(":")
    if name == "joint" and size.isdigit():
        return PenaltyKind.joint(int(size))
    raise ConfigurationError(f"unknown penalty {text!r}; use 'l1' or 'joint:m'")


def _read_map(path: Optional[Path]) -> Optional[LinearMap]:
    return dense(read_dense(path)) if path is not None else None


def _solver_config(ctx: click.Context, **overrides: Any) -> SolverConfig:
    config_path = ctx.obj.get("config") if ctx.obj else None
    base = load_solver_config(str(config_path)) if config_path else get_default_solver_config()
    return base.with_overrides(**overrides)


def _finish(report: RunReport, out: Path) -> int:
    write_json_report(out / "report.json", report.to_dict())
    write_trace_csv(out / "trace.csv", report.trace_rows())
    click.echo(dumps_report(report.to_dict()))
    if not report.converged:
        click.echo(
            f"warning: stopped at the iteration cap ({report.iterations_run}) before converging",
            err=True,
        )
        return EXIT_ITERATION_CAP
    return EXIT_OK


def solver_options(command: Callable[..., Any]) -> Callable[..., Any]:
    """Step-size and stopping flags shared by the solving commands."""
    options = [
        click.option("--alpha", type=float, default=None, help="Multiplier relaxation, > 1/2"),
        click.option("--tau1", type=float, default=None),
        click.option("--tau2", type=float, default=None),
        click.option("--tau3", type=float, default=None),
        click.option("--max-iter", type=int, default=None),
        click.option("--rel-tol", type=float, default=None),
        click.option("--trace-every", type=int, default=None),
        click.option("--seed", type=int, default=None, help="Seed of the norm estimates"),
        click.option("--out", type=click.Path(path_type=Path), default=Path("out"),
                     help="Directory for report.json and trace.csv"),
    ]
    for option in reversed(options):
        command = option(command)
    return command


@click.group()
@click.option("--verbose", "-v", count=True, help="Increase verbosity (use up to -vv)")
@click.option("--quiet", "-q", is_flag=True, help="Only show errors")
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None,
              help="YAML file with a 'solver:' mapping")
@click.option("--log-dir", type=click.Path(path_type=Path), default=None,
              help="Also write JSON-lines logs to this directory")
@click.pass_context
def cli(
    ctx: click.Context,
    verbose: int,
    quiet: bool,
    config_path: Optional[Path],
    log_dir: Optional[Path],
) -> None:
    """Solve constrained ℓ1-penalized least-squares problems and run the MEG experiment."""
    _configure_logging(verbose, quiet, log_dir)
    ctx.obj = {"verbose": verbose, "quiet": quiet, "config": config_path}


@cli.command()
@click.option("--K", "k_path", type=click.Path(path_type=Path), required=True)
@click.option("--y", "y_path", type=click.Path(path_type=Path), required=True)
@click.option("--A", "a_path", type=click.Path(path_type=Path), default=None,
              help="Penalty map; identity when omitted")
@click.option("--B", "b_map_path", type=click.Path(path_type=Path), default=None)
@click.option("--b", "b_path", type=click.Path(path_type=Path), default=None)
@click.option("--lambda", "lam", type=float, required=True)
@click.option("--penalty", default="l1", show_default=True, help="'l1' or 'joint:m'")
@solver_options
@click.pass_context
@_handle_errors
def solve(
    ctx: click.Context,
    k_path: Path,
    y_path: Path,
    a_path: Optional[Path],
    b_map_path: Optional[Path],
    b_path: Optional[Path],
    lam: float,
    penalty: str,
    out: Path,
    **overrides: Any,
) -> int:
    """min ‖Kx - y‖² + 2λ·H(Ax) subject to Bx = b, from dense text files."""
    if b_map_path is not None and b_path is None:
        raise ConfigurationError("constraint map --B needs a right-hand side --b")
    if b_path is not None and b_map_path is None:
        raise ConfigurationError("right-hand side --b given without a constraint map --B")

    A = _read_map(a_path)
    B = _read_map(b_map_path)
    problem = ProblemSpec(
        K=dense(read_dense(k_path)),
        y=read_vector(y_path),
        lam=lam,
        A=A,
        B=B,
        b=read_vector(b_path) if b_path is not None else None,
        penalty=_parse_penalty(penalty),
    )
    config = _solver_config(ctx, **overrides)
    if A is not None:
        solver = solve_constrained_gist if B is not None else solve_gist
    else:
        solver = solve_cista if B is not None else solve_ista
    return _finish(solver(problem, config), out)


@cli.command()
@click.option("--B", "b_map_path", type=click.Path(path_type=Path), required=True)
@click.option("--b", "b_path", type=click.Path(path_type=Path), required=True)
@click.option("--radius", type=float, default=None,
              help="Minimize ‖Kx - y‖² over the ℓ1 ball of this radius instead")
@click.option("--K", "k_path", type=click.Path(path_type=Path), default=None,
              help="Data map for --radius; zero when omitted")
@click.option("--y", "y_path", type=click.Path(path_type=Path), default=None)
@click.option("--lambda", "lam", type=float, default=1.0, show_default=True,
              help="Internal thresholding scale")
@solver_options
@click.pass_context
@_handle_errors
def bp(
    ctx: click.Context,
    b_map_path: Path,
    b_path: Path,
    radius: Optional[float],
    k_path: Optional[Path],
    y_path: Optional[Path],
    lam: float,
    out: Path,
    **overrides: Any,
) -> int:
    """Basis pursuit: min ‖x‖₁ subject to Bx = b."""
    B = dense(read_dense(b_map_path))
    b = read_vector(b_path)
    config = _solver_config(ctx, **overrides)
    if radius is None:
        return _finish(solve_basis_pursuit(B, b, config, lam=lam), out)

    if (k_path is None) != (y_path is None):
        raise ConfigurationError("--K and --y must be given together")
    if k_path is not None:
        K, y = dense(read_dense(k_path)), read_vector(y_path)
    else:
        K, y = dense(np.zeros((1, B.cols))), np.zeros(1)
    return _finish(solve_l1_constrained(K, y, B, b, radius, config), out)


@cli.command()
@click.option("--K", "k_path", type=click.Path(path_type=Path), required=True)
@click.option("--y", "y_path", type=click.Path(path_type=Path), required=True)
@click.option("--B", "b_map_path", type=click.Path(path_type=Path), default=None)
@click.option("--b", "b_path", type=click.Path(path_type=Path), default=None)
@click.option("--radius", type=float, required=True)
@solver_options
@click.pass_context
@_handle_errors
def l1c(
    ctx: click.Context,
    k_path: Path,
    y_path: Path,
    b_map_path: Optional[Path],
    b_path: Optional[Path],
    radius: float,
    out: Path,
    **overrides: Any,
) -> int:
    """min ‖Kx - y‖² subject to ‖x‖₁ ≤ R (and Bx = b when given)."""
    if (b_map_path is None) != (b_path is None):
        raise ConfigurationError("constraint map --B and right-hand side --b go together")
    B = _read_map(b_map_path)
    b = read_vector(b_path) if b_path is not None else None
    config = _solver_config(ctx, **overrides)
    report = solve_l1_constrained(
        dense(read_dense(k_path)), read_vector(y_path), B, b, radius, config
    )
    return _finish(report, out)


@cli.command()
@click.option("--config", "experiment_path", type=click.Path(path_type=Path), default=None,
              help="Experiment document (.json or .yaml); desk defaults when omitted")
@click.option("--out", type=click.Path(path_type=Path), default=Path("out/meg"), show_default=True)
@click.option("--cases", "case_names", multiple=True, type=click.Choice([c.value for c in MEGCase]),
              help="Run only these cases (repeatable)")
@click.option("--seed", "seeds", multiple=True, type=int, help="Noise seeds (repeatable)")
@click.option("--convergence", is_flag=True, help="Also write iterate-convergence profiles")
@click.pass_context
@_handle_errors
def meg(
    ctx: click.Context,
    experiment_path: Optional[Path],
    out: Path,
    case_names: Tuple[str, ...],
    seeds: Tuple[int, ...],
    convergence: bool,
) -> int:
    """Reconstruct synthetic cortical currents for cases a-d and write the per-case metrics."""
    config = (
        load_experiment_config(str(experiment_path)) if experiment_path else ExperimentConfig()
    )
    updates = {}
    if case_names:
        updates["cases"] = [MEGCase(name) for name in case_names]
    if seeds:
        updates["seeds"] = list(seeds)
    if updates:
        config = ExperimentConfig(**{**config.model_dump(), **updates})

    show_progress = not ctx.obj.get("quiet", False)
    result = run_experiment(config, out_dir=out, convergence=convergence, show_progress=show_progress)
    click.echo(result.summary.to_string(index=False))
    for case, comparison in result.convergence.items():
        click.echo(
            f"case {case.value}: {comparison.iterations_to_threshold} iterations "
            f"to relative distance {comparison.threshold:g}"
        )
    return EXIT_OK


def _format_values(values: np.ndarray) -> str:
    return " ".join(repr(float(v)) for v in np.ravel(values))


@cli.command()
@click.argument("values", nargs=-1, type=float)
@click.option("--z", "z_path", type=click.Path(path_type=Path), default=None,
              help="Dense text file instead of VALUES (rows are groups for --joint)")
@click.option("--soft", "op", flag_value="soft", help="Soft thresholding S_λ")
@click.option("--linf", "op", flag_value="linf", help="Projection onto the ℓ∞ ball of radius λ")
@click.option("--l1ball", "op", flag_value="l1ball", help="Projection onto the ℓ1 ball of radius λ")
@click.option("--joint", "group_size", type=int, default=None,
              help="Joint thresholding of rows of this length")
@click.option("--lambda", "lam", type=float, required=True, help="Threshold or radius")
@_handle_errors
def prox(
    values: Sequence[float],
    z_path: Optional[Path],
    op: Optional[str],
    group_size: Optional[int],
    lam: float,
) -> int:
    """Apply a thresholding or projection operator and print the result."""
    if (op is None) == (group_size is None):
        raise ConfigurationError("choose exactly one of --soft, --linf, --l1ball, --joint M")
    z = read_dense(z_path) if z_path is not None else np.asarray(values, dtype=np.float64)
    if z.size == 0:
        raise ConfigurationError("no input values; pass VALUES or --z")

    if group_size is not None:
        if group_size < 1 or z.size % group_size:
            raise ConfigurationError(f"{z.size} values do not split into rows of {group_size}")
        for row in z.reshape(-1, group_size):
            click.echo(_format_values(joint_threshold(row, lam)))
        return EXIT_OK

    operators = {"soft": soft_threshold, "linf": project_linf, "l1ball": project_l1_ball}
    click.echo(_format_values(operators[op](np.ravel(z), lam)))
    return EXIT_OK


@cli.command()
@click.option("--K", "k_path", type=click.Path(path_type=Path), required=True)
@click.option("--A", "a_path", type=click.Path(path_type=Path), default=None)
@click.option("--B", "b_map_path", type=click.Path(path_type=Path), default=None)
@click.option("--tau1", type=float, default=None)
@click.option("--tau2", type=float, default=None)
@click.option("--tau3", type=float, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.pass_context
@_handle_errors
def normcheck(
    ctx: click.Context,
    k_path: Path,
    a_path: Optional[Path],
    b_map_path: Optional[Path],
    **overrides: Any,
) -> int:
    """Estimate the operator norms and check the step-size conditions."""
    K = dense(read_dense(k_path))
    B = _read_map(b_map_path)
    problem = ProblemSpec(
        K=K,
        y=np.zeros(K.rows),
        A=_read_map(a_path),
        B=B,
        b=np.zeros(B.rows) if B is not None else None,
    )
    config = _solver_config(ctx, **overrides)
    report = check_step_conditions(problem, config)
    click.echo(report.describe())
    click.echo("conditions satisfied" if report.ok else "conditions VIOLATED")
    return EXIT_OK


def main() -> None:  # pragma: no cover - console entry point
    try:
        code = cli.main(prog_name="sparserec", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        sys.exit(EXIT_INPUT_ERROR)
    except click.ClickException as exc:
        # Usage errors map onto the input-error code, not click's default 2
        exc.show()
        sys.exit(EXIT_INPUT_ERROR)
    sys.exit(code or EXIT_OK)


if __name__ == "__main__":  # pragma: no cover - script entrypoint
    main()
