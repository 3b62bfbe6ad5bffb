"""
Structure of stabilizer algebras: dimension, derived algebra, closure under the
bracket, the all-spins flip, and the three-qubit family case table.
"""
import concurrent.futures
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.linalg

from .config import DEFAULT_CASE_SAMPLES, DEFAULT_MODE, DEFAULT_POLICY, DEFAULT_SEED, FLIP_TOL, MAX_WORKERS, RankPolicy
from .errors import DimensionError
from .lie_action import LieElement, StabilizerBasis, numerical_rank, stabilizer_basis
from .statespace import QubitState, catalog_state, norm_sq

logger = logging.getLogger("orbit_forge.orbit_classify")

CASE_TABLE_COLUMNS = ["case", "params", "expected_dim", "measured_dim", "derived_dim", "label", "flip"]

# =============================================================================
# BRACKETS AND LABELS
# =============================================================================


def bracket(a: LieElement, b: LieElement) -> LieElement:
    """-i[A, B]; different sites commute, so only same-site blocks contribute."""
    if a.n != b.n:
        raise DimensionError(f"cannot bracket elements on {a.n} and {b.n} qubits")
    blocks = -1j * (np.matmul(a.blocks, b.blocks) - np.matmul(b.blocks, a.blocks))
    return LieElement(a.n, blocks, 0.0, f"[{a.label},{b.label}]")


def stabilizer_label(dim: int, derived_dim: int) -> str:
    if dim == 0:
        return "trivial"
    if derived_dim == 0:
        return "u1" if dim == 1 else f"u1^{dim}"
    if (dim, derived_dim) == (3, 3):
        return "su2"
    if (dim, derived_dim) == (4, 3):
        return "u1+su2"
    return f"unclassified({dim},{derived_dim})"


def flip_symmetry(state: QubitState) -> Tuple[bool, Optional[float]]:
    """Whether sigma_x on every site maps the state to a phase multiple of itself, and that phase."""
    psi = state.amplitudes
    flipped = psi[::-1]
    theta = float(np.angle(np.vdot(psi, flipped)))
    if theta <= -math.pi:
        theta += 2 * math.pi
    gap = float(np.linalg.norm(flipped - np.exp(1j * theta) * psi))
    if gap <= FLIP_TOL * math.sqrt(norm_sq(state)):
        return True, theta
    return False, None


# =============================================================================
# CLASSIFICATION
# =============================================================================

@dataclass
class StabilizerReport:
    n: int
    mode: str
    dim: int
    derived_dim: int
    closure_residual: float
    label: str
    flip_symmetric: bool
    basis: StabilizerBasis
    flip_phase: Optional[float] = None

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "mode": self.mode,
            "dim": self.dim,
            "derived_dim": self.derived_dim,
            "closure_residual": self.closure_residual,
            "label": self.label,
            "flip_symmetric": self.flip_symmetric,
            "flip_phase": self.flip_phase,
            "basis": self.basis.to_dict(),
        }


def _span_residual(vectors: np.ndarray, span: np.ndarray) -> float:
    """Largest norm of the part of a row of vectors outside the column span of span."""
    if vectors.size == 0:
        return 0.0
    if span.size == 0:
        return float(np.max(np.linalg.norm(vectors, axis=1)))
    q = scipy.linalg.orth(span)
    outside = vectors - (vectors @ q) @ q.T
    return float(np.max(np.linalg.norm(outside, axis=1)))


def classify_stabilizer(state: QubitState, policy: RankPolicy = DEFAULT_POLICY,
                        mode: str = DEFAULT_MODE) -> StabilizerReport:
    start_time = time.time()
    basis = stabilizer_basis(state, mode, policy)
    elements = basis.elements
    brackets = [bracket(elements[i], elements[j]).coordinates()
                for i in range(len(elements)) for j in range(i + 1, len(elements))]
    bracket_rows = np.array(brackets) if brackets else np.zeros((0, 3 * state.n + 1))
    derived_dim = numerical_rank(bracket_rows, policy) if brackets else 0

    span = np.array([e.coordinates() for e in elements]).T if elements else np.zeros((3 * state.n + 1, 0))
    closure = _span_residual(bracket_rows, span)

    flip, phase = flip_symmetry(state)
    label = stabilizer_label(basis.dim, derived_dim)
    if closure > 1e-8 and not label.startswith("unclassified"):
        logger.warning(f"⚠️ Stabilizer brackets leave the span by {closure:.2e} (label {label})")
    elapsed = time.time() - start_time
    logger.info(f"✅ Stabilizer {label} (dim {basis.dim}, derived {derived_dim}) in {elapsed:.4f} seconds")
    return StabilizerReport(
        n=state.n,
        mode=mode,
        dim=basis.dim,
        derived_dim=derived_dim,
        closure_residual=closure,
        label=label,
        flip_symmetric=flip,
        basis=basis,
        flip_phase=phase,
    )


# =============================================================================
# FAMILY CASE TABLE
# =============================================================================
# family4(a, b, c, d) = a e1e1e1 + b e2e2e2 + c e1e1e2 + d e2e1e1

def _draw(rng: np.random.Generator) -> complex:
    """Magnitude log-uniform in [0.3, 3], uniform phase."""
    magnitude = math.exp(rng.uniform(math.log(0.3), math.log(3.0)))
    phase = rng.uniform(-math.pi, math.pi)
    return magnitude * complex(math.cos(phase), math.sin(phase))


def _same_modulus(rng: np.random.Generator, z: complex) -> complex:
    phi = rng.uniform(-math.pi, math.pi)
    return abs(z) * complex(math.cos(phi), math.sin(phi))


def _generic(rng):
    return _draw(rng), _draw(rng), _draw(rng), _draw(rng)


def _a_zero(rng):
    return 0j, _draw(rng), _draw(rng), _draw(rng)


def _ab_zero(rng):
    return 0j, 0j, _draw(rng), _draw(rng)


def _ab_zero_equal(rng):
    c = _draw(rng)
    return 0j, 0j, c, _same_modulus(rng, c)


def _ab_zero_one_of_cd(rng):
    value = _draw(rng)
    return (0j, 0j, value, 0j) if rng.random() < 0.5 else (0j, 0j, 0j, value)


def _cd_zero(rng):
    return _draw(rng), _draw(rng), 0j, 0j


def _cd_zero_equal(rng):
    a = _draw(rng)
    return a, a, 0j, 0j


def _d_zero(rng):
    return _draw(rng), _draw(rng), _draw(rng), 0j


def _ad_zero(rng):
    return 0j, _draw(rng), _draw(rng), 0j


def _ad_zero_equal(rng):
    b = _draw(rng)
    return 0j, b, _same_modulus(rng, b), 0j


def _bd_zero(rng):
    return _draw(rng), 0j, _draw(rng), 0j


def _acd_zero(rng):
    return 0j, _draw(rng), 0j, 0j


@dataclass(frozen=True)
class FamilyCase:
    name: str
    draw: Callable[[np.random.Generator], Tuple[complex, complex, complex, complex]]
    expected_dim: int
    expected_label: str
    expected_flip: bool = False


FAMILY4_CASES: Tuple[FamilyCase, ...] = (
    FamilyCase("generic", _generic, 0, "trivial"),
    FamilyCase("a=0", _a_zero, 1, "u1"),
    FamilyCase("a=b=0, |c|!=|d|", _ab_zero, 2, "u1^2"),
    FamilyCase("a=b=0, |c|=|d|", _ab_zero_equal, 4, "u1+su2"),
    FamilyCase("a=b=0, c=0 xor d=0", _ab_zero_one_of_cd, 3, "u1^3"),
    FamilyCase("d=c=0, a!=b", _cd_zero, 2, "u1^2"),
    FamilyCase("d=c=0, a=b", _cd_zero_equal, 2, "u1^2", expected_flip=True),
    FamilyCase("d=0", _d_zero, 1, "u1"),
    FamilyCase("d=a=0, |b|!=|c|", _ad_zero, 2, "u1^2"),
    FamilyCase("d=a=0, |b|=|c|", _ad_zero_equal, 4, "u1+su2"),
    FamilyCase("d=b=0", _bd_zero, 3, "u1^3"),
    FamilyCase("d=c=a=0", _acd_zero, 3, "u1^3"),
)


def family_case(name: str) -> FamilyCase:
    for case in FAMILY4_CASES:
        if case.name == name:
            return case
    raise KeyError(name)


def specialization_chains() -> List[Tuple[str, ...]]:
    """Case sequences where each step imposes further constraints on (a, b, c, d)."""
    return [
        ("generic", "a=0", "a=b=0, |c|!=|d|", "a=b=0, |c|=|d|"),
        ("generic", "a=0", "a=b=0, |c|!=|d|", "a=b=0, c=0 xor d=0"),
        ("generic", "d=c=0, a!=b", "d=c=0, a=b"),
        ("d=c=0, a!=b", "d=c=a=0"),
        ("generic", "d=0", "d=a=0, |b|!=|c|", "d=a=0, |b|=|c|"),
        ("d=0", "d=b=0"),
    ]


def _measure_case(case: FamilyCase, stream: np.random.SeedSequence, policy: RankPolicy) -> Dict:
    params = case.draw(np.random.default_rng(stream))
    report = classify_stabilizer(catalog_state("family4", params), policy)
    return {
        "case": case.name,
        "params": list(params),
        "expected_dim": case.expected_dim,
        "measured_dim": report.dim,
        "derived_dim": report.derived_dim,
        "label": report.label,
        "flip": report.flip_symmetric,
    }


def family4_case_table(samples: int = DEFAULT_CASE_SAMPLES, seed: int = DEFAULT_SEED,
                       policy: RankPolicy = DEFAULT_POLICY,
                       cases: Sequence[FamilyCase] = FAMILY4_CASES) -> pd.DataFrame:
    """One row per (case, sample); every row draws from its own spawned seed stream."""
    start_time = time.time()
    streams = np.random.SeedSequence(seed).spawn(len(cases) * samples)
    jobs = [(case, streams[i * samples + k]) for i, case in enumerate(cases) for k in range(samples)]

    with concurrent.futures.ThreadPoolExecutor(max_workers=MAX_WORKERS) as executor:
        rows = list(executor.map(lambda job: _measure_case(job[0], job[1], policy), jobs))

    table = pd.DataFrame(rows, columns=CASE_TABLE_COLUMNS)
    mismatches = int((table["expected_dim"] != table["measured_dim"]).sum())
    if mismatches:
        logger.warning(f"⚠️ {mismatches} of {len(table)} case rows differ from the expected dimension")
    logger.info(f"✅ Measured {len(table)} case rows in {time.time() - start_time:.2f} seconds")
    return table


def render_case_table(table: pd.DataFrame) -> str:
    """Aligned text columns, parameters rounded for display."""
    shown = table.copy()
    shown["params"] = shown["params"].map(lambda ps: "(" + ", ".join(f"{complex(p):.3f}" for p in ps) + ")")
    return shown.to_string(index=False)
