import math
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional

# =============================================================================
# CONSTANTS
# =============================================================================

MAX_QUBITS = 12
DEFAULT_SEED = 0
DEFAULT_MODE = "reduced"
MODES = ("reduced", "full")

# Rank threshold: tau = RANK_REL_TOL * max(sigma_max, RANK_FLOOR) on unit-norm states
RANK_REL_TOL = 1e-9
RANK_FLOOR = 1.0

FD_STEP = 1e-5
DEFAULT_TRIALS = 1000
DEFAULT_SAMPLES = 3
DEFAULT_CASE_SAMPLES = 20

DEFAULT_RESTARTS = 32
OPTIMIZER_FATOL = 1e-12
OPTIMIZER_MAXITER = 20000
CANONICAL_TARGET = 1e-10

FINGERPRINT_TOL = 1e-8
FLIP_TOL = 1e-10
WITNESS_TOL = 1e-6
DEGENERATE_TOL = 1e-9

MAX_WORKERS = 8


# =============================================================================
# POLICY OBJECTS
# =============================================================================

@dataclass(frozen=True)
class RankPolicy:
    """Singular values above rel_tol * max(sigma_max, floor) count towards the rank."""
    rel_tol: float = RANK_REL_TOL
    floor: float = RANK_FLOOR

    def threshold(self, sigma_max: float) -> float:
        return self.rel_tol * max(float(sigma_max), self.floor)

    def to_dict(self) -> Dict[str, float]:
        return {"rel_tol": self.rel_tol, "floor": self.floor}


DEFAULT_POLICY = RankPolicy()


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for the multi-start Nelder-Mead searches over local unitaries."""
    restarts: int = DEFAULT_RESTARTS
    fatol: float = OPTIMIZER_FATOL
    maxiter: int = OPTIMIZER_MAXITER
    target: float = CANONICAL_TARGET
    seed: int = DEFAULT_SEED
    analytic_seed: bool = True
    max_workers: int = MAX_WORKERS

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


DEFAULT_OPTIMIZER = OptimizerConfig()


@dataclass
class RunConfig:
    """Effective CLI configuration, echoed under "config" in every JSON document."""
    command: str
    inputs: List[str] = field(default_factory=list)
    seed: int = DEFAULT_SEED
    mode: str = DEFAULT_MODE
    rel_tol: float = RANK_REL_TOL
    output: str = "text"
    trials: int = DEFAULT_TRIALS
    witness: bool = False
    restarts: int = DEFAULT_RESTARTS
    samples: Optional[int] = None
    n: Optional[int] = None

    @property
    def policy(self) -> RankPolicy:
        return RankPolicy(rel_tol=self.rel_tol)

    @property
    def optimizer(self) -> OptimizerConfig:
        return OptimizerConfig(restarts=self.restarts, seed=self.seed)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        if not math.isfinite(data["rel_tol"]):
            data["rel_tol"] = None
        return data
