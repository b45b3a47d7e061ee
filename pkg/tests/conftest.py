import sys
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pytest

PROJECT_ROOT = Path(__file__).resolve().parents[1]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from src.config import SolverConfig  # noqa: E402
from src.linops import dense  # noqa: E402
from src.solvers import ProblemSpec  # noqa: E402


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption(
        "--run-slow", action="store_true", default=False, help="run acceptance-scale tests"
    )


def pytest_collection_modifyitems(config: pytest.Config, items: list) -> None:
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def isolated_solver_config(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    """Keep tests independent of a developer's config/solver_defaults.yaml or .env."""
    monkeypatch.setenv("SPARSEREC_SOLVER_CONFIG", str(tmp_path / "no_solver_config.yaml"))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)


@pytest.fixture
def tight_config() -> SolverConfig:
    """Enough iterations and a tolerance small enough to compare against oracles."""
    return SolverConfig(max_iter=200_000, rel_tol=1e-13, trace_every=50)


@pytest.fixture
def random_problem(rng: np.random.Generator) -> Callable[..., ProblemSpec]:
    """Factory for small random problems with optional penalty and constraint maps."""

    def build(
        rows: int = 6,
        n: int = 4,
        lam: float = 0.3,
        penalty_rows: Optional[int] = None,
        constraints: int = 0,
    ) -> ProblemSpec:
        K = dense(rng.standard_normal((rows, n)))
        y = rng.standard_normal(rows)
        A = dense(rng.standard_normal((penalty_rows, n))) if penalty_rows else None
        if constraints:
            B = dense(rng.standard_normal((constraints, n)))
            b = B.matvec(rng.standard_normal(n))
            return ProblemSpec(K=K, y=y, lam=lam, A=A, B=B, b=b)
        return ProblemSpec(K=K, y=y, lam=lam, A=A)

    return build
