"""Synthetic MEG reconstruction: setup, λ tuning, the four cases and convergence profiles.

Unknowns are wavelet coefficients of the tangent current field. The forward
map K·W⁻¹ and the data are scaled by 1/‖K·W⁻¹‖, the constraint map D·W⁻¹ by
its own norm; the unnormalized λ is reported as lambda_physical.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.config import ExperimentConfig, MEGCase, SolverConfig
from src.errors import BracketError, ConfigurationError, SparseRecoveryError
from src.linops import LinearMap, Vector, compose, dense, estimate_sq_norm, scale
from src.linops.operators import CallbackMap, DenseMap
from src.meg.divergence import divergence_operator
from src.meg.forward import biot_savart_operator
from src.meg.grid import CubedSphereGrid, build_grid
from src.meg.model import add_noise, make_input_model
from src.meg.sensors import SensorArray, sample_sensors
from src.meg.wavelets import WaveletTransform
from src.solvers import (
    ConvergenceProfile,
    ConvergenceRecorder,
    PenaltyKind,
    ProblemSpec,
    RunReport,
    SolverState,
    check_step_conditions,
    fista_step,
    solve_cista,
    solve_fista,
)
from src.utils.report_utils import (
    summary_frame,
    write_json_report,
    write_snapshot,
    write_trace_csv,
)

logger = logging.getLogger(__name__)

Solver = Callable[..., RunReport]

LAMBDA_FLOOR = 1e-6
NNZ_THRESHOLD = 1e-12
MAX_BISECTIONS = 40
BRACKET_GROWTH = 2.0
# Final tuning at the full budget starts from the coarse λ and widens by this factor
FINE_GROWTH = 1.1
COARSE_BUDGET_DIVISOR = 10
CONVERGENCE_THRESHOLD = 1e-6
LIMIT_BUDGET_FACTOR = 3
# FISTA on case a against the constrained solver on case b
CONVERGENCE_CASES = (MEGCase.A, MEGCase.B)


@dataclass(frozen=True)
class MEGSetup:
    config: ExperimentConfig
    grid: CubedSphereGrid
    sensors: SensorArray
    transform: WaveletTransform
    forward: DenseMap
    divergence: CallbackMap
    coefficient_map: DenseMap  # K·W⁻¹ / k_scale
    k_scale: float
    constraint: LinearMap  # D·W⁻¹ / constraint_scale
    constraint_scale: float
    j_in: Vector
    y_clean: Vector

    @property
    def coefficient_count(self) -> int:
        return self.transform.size

    def layout(self, kind: str) -> Dict[str, object]:
        """Sidecar description of a flat field or coefficient vector."""
        return {
            "kind": kind,
            "order": ["channel", "face", "xi_row", "eta_column"],
            "channels": ["t1", "t2"],
            "faces": 6,
            "n_face": self.grid.n_face,
            "wavelet_levels": self.transform.levels,
        }


def prepare_setup(config: ExperimentConfig, show_progress: bool = False) -> MEGSetup:
    grid = build_grid(config.n_face, config.outer_radius, config.thickness)
    sensors = sample_sensors(config.sensors, config.sensor_radius, config.sensor_seed)
    forward = biot_savart_operator(
        grid, sensors, workers=config.workers, show_progress=show_progress
    )
    transform = WaveletTransform(config.n_face, config.wavelet_levels)

    k_total = transform.inverse_adjoint(forward.matrix)
    k_scale = math.sqrt(estimate_sq_norm(dense(k_total)).value)
    if k_scale == 0.0:
        raise SparseRecoveryError("forward operator vanishes; sensors see no current")

    divergence = divergence_operator(grid)
    raw_constraint = compose(divergence, transform.synthesis_map())
    constraint_scale = math.sqrt(estimate_sq_norm(raw_constraint).value)

    j_in = make_input_model(grid, seed=config.model_seed)
    y_clean = forward.matvec(j_in)
    logger.info(
        "MEG setup: %d voxels, %d sensors, %d coefficients, ||K W^-1|| = %.4g",
        grid.voxel_count, sensors.count, transform.size, k_scale,
        extra={"data": {"k_scale": k_scale, "constraint_scale": constraint_scale}},
    )
    return MEGSetup(
        config=config,
        grid=grid,
        sensors=sensors,
        transform=transform,
        forward=forward,
        divergence=divergence,
        coefficient_map=dense(k_total / k_scale),
        k_scale=k_scale,
        constraint=scale(raw_constraint, 1.0 / constraint_scale),
        constraint_scale=constraint_scale,
        j_in=j_in,
        y_clean=y_clean,
    )


def case_problem(setup: MEGSetup, case: MEGCase, y: Vector, lam: float = 0.0) -> ProblemSpec:
    """Normalized problem for ``case``; ``y`` is already divided by k_scale."""
    penalty = PenaltyKind.joint(2) if case.joint else PenaltyKind.separable()
    if case.constrained:
        return ProblemSpec(
            K=setup.coefficient_map, y=y, lam=lam, penalty=penalty,
            B=setup.constraint, b=np.zeros(setup.constraint.rows),
        )
    return ProblemSpec(K=setup.coefficient_map, y=y, lam=lam, penalty=penalty)


def case_solver(case: MEGCase) -> Solver:
    return solve_cista if case.constrained else solve_fista


def case_solver_config(setup: MEGSetup, case: MEGCase, problem: ProblemSpec) -> SolverConfig:
    """Iteration budget for ``case`` with step sizes fixed once, so λ sweeps reuse them."""
    budget = setup.config.budgets.constrained if case.constrained else setup.config.budgets.fista
    config = SolverConfig(max_iter=budget, rel_tol=setup.config.rel_tol)
    if case.constrained:
        steps = check_step_conditions(problem, config).suggested
        return config.with_overrides(tau1=steps.tau1, tau3=steps.tau3)
    return config.with_overrides(tau1=fista_step(problem, config))


def lambda_max(problem: ProblemSpec) -> float:
    """Smallest λ for which x = 0 solves the unconstrained problem."""
    return problem.penalty.dual_bound(problem.K.rmatvec(problem.y))


def data_residual(problem: ProblemSpec, x: Vector) -> float:
    return float(np.linalg.norm(problem.K.matvec(x) - problem.y))


@dataclass
class LambdaTuning:
    lam: float
    report: RunReport
    residual: float
    target: float
    history: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def evaluations(self) -> int:
        return len(self.history)


def tune_lambda(
    problem: ProblemSpec,
    solve: Solver,
    target: float,
    config: SolverConfig,
    tol_rel: float = 0.02,
    max_bisections: int = MAX_BISECTIONS,
    show_progress: bool = False,
    initial_lambda: Optional[float] = None,
    initial_state: Optional[SolverState] = None,
    growth: float = BRACKET_GROWTH,
) -> LambdaTuning:
    """Geometric bisection on λ until ‖Kx_λ - y‖ is within tol_rel of ``target``.

    Without ``initial_lambda`` the bracket is [LAMBDA_FLOOR·λ_max, λ_max]. With it,
    the search starts there and steps outward by ``growth`` until the target is
    bracketed. The residual grows with λ. Each solve starts from the state of the
    previous one, the first from ``initial_state``.
    """
    if not target > 0:
        raise ConfigurationError(f"residual target must be positive, got {target}")
    if not growth > 1:
        raise ConfigurationError(f"bracket growth must exceed 1, got {growth}")
    lam_max = lambda_max(problem)
    if lam_max == 0.0:
        raise ConfigurationError("data vector is orthogonal to the range of K; lambda_max = 0")
    lam_floor = LAMBDA_FLOOR * lam_max

    history: List[Tuple[float, float]] = []
    warm: Optional[SolverState] = initial_state

    def evaluate(lam: float) -> Tuple[RunReport, float]:
        nonlocal warm
        report = solve(problem.with_lambda(lam), config, initial_state=warm)
        residual = data_residual(problem, report.x)
        history.append((lam, residual))
        warm = report.final_state
        logger.debug("lambda %.6g -> residual %.6g (target %.6g)", lam, residual, target)
        return report, residual

    def hit(residual: float) -> bool:
        return abs(residual - target) <= tol_rel * target

    if initial_lambda is None:
        lam_hi = lam_max
        report_hi, r_hi = evaluate(lam_hi)
        if hit(r_hi):
            return LambdaTuning(lam_hi, report_hi, r_hi, target, history)
        lam_lo = lam_floor
        report_lo, r_lo = evaluate(lam_lo)
        if hit(r_lo):
            return LambdaTuning(lam_lo, report_lo, r_lo, target, history)
        if not r_lo < target < r_hi:
            raise BracketError(target, r_lo, r_hi)
        best = (abs(r_lo - target), lam_lo, report_lo, r_lo)
    else:
        lam = min(max(initial_lambda, lam_floor), lam_max)
        report, residual = evaluate(lam)
        if hit(residual):
            return LambdaTuning(lam, report, residual, target, history)
        best = (abs(residual - target), lam, report, residual)
        first_residual = residual
        below = residual < target
        while True:
            edge = lam_max if below else lam_floor
            if lam == edge:
                low, high = (first_residual, residual) if below else (residual, first_residual)
                raise BracketError(target, low, high)
            previous = lam
            lam = min(lam * growth, lam_max) if below else max(lam / growth, lam_floor)
            report, residual = evaluate(lam)
            if hit(residual):
                return LambdaTuning(lam, report, residual, target, history)
            if abs(residual - target) < best[0]:
                best = (abs(residual - target), lam, report, residual)
            if (residual < target) != below:
                lam_lo, lam_hi = (previous, lam) if below else (lam, previous)
                break

    with tqdm(total=max_bisections, desc="Tuning lambda", disable=not show_progress) as bar:
        for _ in range(max_bisections):
            lam = math.sqrt(lam_lo * lam_hi)
            report, residual = evaluate(lam)
            bar.update(1)
            if hit(residual):
                return LambdaTuning(lam, report, residual, target, history)
            if abs(residual - target) < best[0]:
                best = (abs(residual - target), lam, report, residual)
            if residual < target:
                lam_lo = lam
            else:
                lam_hi = lam

    logger.warning(
        "Lambda tuning stopped after %d bisections; closest residual %.6g vs target %.6g",
        max_bisections, best[3], target,
    )
    return LambdaTuning(best[1], best[2], best[3], target, history)


@dataclass(frozen=True)
class MEGReport:
    case: MEGCase
    seed: int
    e_rec: float
    div_norm: float
    div_relative: float
    nnz: int
    residual: float
    noise_norm: float
    lambda_used: float
    lambda_physical: float
    iterations: int
    converged: bool
    tuning_evaluations: int
    coefficient_count: int

    def to_dict(self) -> Dict[str, object]:
        data = asdict(self)
        data["case"] = self.case.value
        return data


@dataclass
class CaseResult:
    report: MEGReport
    run: RunReport
    coefficients: Vector
    j_rec: Vector


def _noisy_data(setup: MEGSetup, seed: int) -> Tuple[Vector, Vector]:
    return add_noise(setup.y_clean, setup.config.noise_level, seed)


def run_case(
    setup: MEGSetup,
    case: MEGCase,
    seed: int,
    show_progress: bool = False,
    lambda_hint: Optional[float] = None,
) -> CaseResult:
    """Tune λ to the noise level, solve ``case`` and score the reconstruction.

    Tuning runs first on a reduced iteration budget, then once more at the full
    budget starting from the coarse λ and its state. ``lambda_hint`` (a λ already
    tuned for a related case or seed) seeds the coarse search.
    """
    y_noisy, noise = _noisy_data(setup, seed)
    y = y_noisy / setup.k_scale
    problem = case_problem(setup, case, y)
    solve = case_solver(case)
    config = case_solver_config(setup, case, problem)

    target = float(np.linalg.norm(noise)) / setup.k_scale
    if target > 0:
        tol_rel = setup.config.lambda_tol
        coarse_config = config.with_overrides(
            max_iter=max(1, config.max_iter // COARSE_BUDGET_DIVISOR)
        )
        coarse = tune_lambda(
            problem, solve, target, coarse_config,
            tol_rel=tol_rel, show_progress=show_progress, initial_lambda=lambda_hint,
        )
        tuning = tune_lambda(
            problem, solve, target, config,
            tol_rel=tol_rel, show_progress=show_progress,
            initial_lambda=coarse.lam, initial_state=coarse.report.final_state,
            growth=FINE_GROWTH,
        )
        lam, run = tuning.lam, tuning.report
        evaluations = coarse.evaluations + tuning.evaluations
    else:
        lam = LAMBDA_FLOOR * lambda_max(problem)
        run, evaluations = solve(problem.with_lambda(lam), config), 1

    coefficients = run.x
    j_rec = setup.transform.inverse(coefficients)
    div_norm = float(np.linalg.norm(setup.divergence.matvec(j_rec)))
    j_norm = float(np.linalg.norm(j_rec))
    report = MEGReport(
        case=case,
        seed=seed,
        e_rec=float(np.linalg.norm(setup.j_in - j_rec) / np.linalg.norm(setup.j_in)),
        div_norm=div_norm,
        div_relative=div_norm / j_norm if j_norm > 0 else 0.0,
        nnz=int(np.count_nonzero(np.abs(coefficients) > NNZ_THRESHOLD)),
        residual=float(np.linalg.norm(setup.forward.matvec(j_rec) - y_noisy)),
        noise_norm=float(np.linalg.norm(noise)),
        lambda_used=lam,
        lambda_physical=lam * setup.k_scale**2,
        iterations=run.iterations_run,
        converged=run.converged,
        tuning_evaluations=evaluations,
        coefficient_count=setup.coefficient_count,
    )
    logger.info(
        "Case %s seed %d: e_rec=%.4f div=%.3e nnz=%d lambda=%.4g",
        case.value, seed, report.e_rec, report.div_norm, report.nnz, lam,
        extra={"data": report.to_dict()},
    )
    return CaseResult(report=report, run=run, coefficients=coefficients, j_rec=j_rec)


@dataclass(frozen=True)
class ConvergenceComparison:
    case: MEGCase
    lam: float
    profile: ConvergenceProfile
    threshold: float

    @property
    def iterations_to_threshold(self) -> Optional[int]:
        return self.profile.iterations_to(self.threshold)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "iteration": self.profile.iterations,
                "rel_distance": self.profile.rel_distance,
                "functional_gap": self.profile.functional_gap,
            }
        )


def compare_convergence(
    setup: MEGSetup,
    lambdas: Dict[MEGCase, float],
    seed: int,
    threshold: float = CONVERGENCE_THRESHOLD,
    budget_factor: int = LIMIT_BUDGET_FACTOR,
    limit_starts: Optional[Dict[MEGCase, SolverState]] = None,
) -> Dict[MEGCase, ConvergenceComparison]:
    """Profile each case's iterates against a limit computed with budget_factor × its budget.

    ``limit_starts`` warm-starts the limit runs, typically from the tuned solves.
    """
    y_noisy, _ = _noisy_data(setup, seed)
    y = y_noisy / setup.k_scale
    limit_starts = limit_starts or {}
    comparisons: Dict[MEGCase, ConvergenceComparison] = {}
    for case, lam in lambdas.items():
        problem = case_problem(setup, case, y, lam)
        solve = case_solver(case)
        config = case_solver_config(setup, case, problem)

        limit_config = config.with_overrides(
            max_iter=config.max_iter * budget_factor, rel_tol=min(config.rel_tol, 1e-14)
        )
        limit = solve(problem, limit_config, initial_state=limit_starts.get(case)).x
        recorder = ConvergenceRecorder(problem, limit)
        solve(problem, config.with_overrides(rel_tol=0.0), callback=recorder)
        comparisons[case] = ConvergenceComparison(case, lam, recorder.profile(), threshold)
        logger.info(
            "Case %s reaches relative distance %.0e after %s iterations",
            case.value, threshold, comparisons[case].iterations_to_threshold,
        )
    return comparisons


@dataclass
class ExperimentResult:
    setup: MEGSetup
    cases: List[CaseResult]
    summary: pd.DataFrame
    convergence: Dict[MEGCase, ConvergenceComparison] = field(default_factory=dict)

    @property
    def reports(self) -> List[MEGReport]:
        return [result.report for result in self.cases]


def run_experiment(
    config: ExperimentConfig,
    out_dir: Optional[Path] = None,
    convergence: bool = False,
    show_progress: bool = False,
    cases: Optional[Sequence[MEGCase]] = None,
) -> ExperimentResult:
    """Run every (case, seed) pair and write reports, traces and snapshots to ``out_dir``."""
    setup = prepare_setup(config, show_progress=show_progress)
    cases = list(cases or config.cases)
    results: List[CaseResult] = []
    tuned: Dict[Tuple[MEGCase, int], float] = {}
    latest: Dict[MEGCase, float] = {}
    for seed in config.seeds:
        for case in cases:
            hint = tuned.get((case.unconstrained, seed)) if case.constrained else None
            if hint is None:
                hint = latest.get(case)
            result = run_case(setup, case, seed, show_progress=show_progress, lambda_hint=hint)
            results.append(result)
            tuned[(case, seed)] = latest[case] = result.report.lambda_used
            if out_dir is not None:
                _write_case(Path(out_dir), setup, result)

    records = [result.report.to_dict() for result in results]
    summary = summary_frame(
        records, group_by="case", columns=["e_rec", "div_norm", "nnz", "residual", "lambda_used"]
    )

    comparisons: Dict[MEGCase, ConvergenceComparison] = {}
    if convergence:
        first = [r for r in results if r.report.seed == config.seeds[0]]
        compared = [r for r in first if r.report.case in CONVERGENCE_CASES]
        comparisons = compare_convergence(
            setup,
            {r.report.case: r.report.lambda_used for r in compared},
            config.seeds[0],
            limit_starts={r.report.case: r.run.final_state for r in compared},
        )

    if out_dir is not None:
        out = Path(out_dir)
        _write_setup(out, setup)
        pd.DataFrame(records).to_csv(out / "runs.csv", index=False)
        summary.to_csv(out / "summary.csv", index=False)
        for case, comparison in comparisons.items():
            comparison.frame().to_csv(out / f"convergence_{case.value}.csv", index=False)
        if comparisons:
            write_json_report(
                out / "convergence.json",
                {
                    case.value: {
                        "lambda": c.lam,
                        "threshold": c.threshold,
                        "iterations_to_threshold": c.iterations_to_threshold,
                    }
                    for case, c in comparisons.items()
                },
            )
    return ExperimentResult(setup=setup, cases=results, summary=summary, convergence=comparisons)


def _write_setup(out: Path, setup: MEGSetup) -> None:
    write_json_report(
        out / "setup.json",
        {
            "config": setup.config.model_dump(mode="json"),
            "voxels": setup.grid.voxel_count,
            "coefficients": setup.coefficient_count,
            "k_scale": setup.k_scale,
            "constraint_scale": setup.constraint_scale,
            "input_div_norm": float(np.linalg.norm(setup.divergence.matvec(setup.j_in))),
        },
    )
    write_snapshot(out / "j_in.txt", setup.j_in, setup.layout("field"))


def _write_case(out: Path, setup: MEGSetup, result: CaseResult) -> None:
    tag = f"{result.report.case.value}_seed{result.report.seed}"
    write_json_report(
        out / f"report_{tag}.json",
        {"metrics": result.report.to_dict(), "run": result.run.to_dict()},
    )
    write_trace_csv(out / f"trace_{tag}.csv", result.run.trace_rows())
    write_snapshot(out / f"j_rec_{tag}.txt", result.j_rec, setup.layout("field"))
    write_snapshot(out / f"w_rec_{tag}.txt", result.coefficients, setup.layout("wavelet"))
