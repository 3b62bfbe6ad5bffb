"""
The local Lie algebra u(1) + su(2)^n (reduced) or u(2)^n (full) acting on n-qubit
states: generators, tangent vectors i T psi, orbit dimension by numerical rank,
parameter-count bounds and the stabilizer algebra as the kernel of the tangent map.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
import scipy.linalg

from .config import DEFAULT_MODE, DEFAULT_POLICY, MODES, RankPolicy
from .errors import DimensionError, NumericalError, ParameterError
from .statespace import QubitState, RealEmbedding, check_size, embed_real, kron_all

logger = logging.getLogger("orbit_forge.lie_action")

# =============================================================================
# PAULI BASIS
# =============================================================================

IDENTITY = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

PAULIS = (("x", SIGMA_X), ("y", SIGMA_Y), ("z", SIGMA_Z))

HERMITIAN_TOL = 1e-12


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


# =============================================================================
# LIE ELEMENTS
# =============================================================================

@dataclass(frozen=True, eq=False)
class LieElement:
    """
    Element T = sum_k (1 x .. x A_k x .. x 1) + phase * 1 of the local algebra.

    Every element of u(2)^n has this form, so only the n Hermitian 2x2 blocks and
    the global phase coefficient are stored; the dense 2^n x 2^n matrix is built on
    demand.
    """
    n: int
    blocks: np.ndarray
    phase: float = 0.0
    label: str = ""

    def __post_init__(self):
        blocks = np.array(self.blocks, dtype=np.complex128).reshape(self.n, 2, 2)
        drift = np.max(np.abs(blocks - np.conj(np.transpose(blocks, (0, 2, 1))))) if self.n else 0.0
        if drift >= HERMITIAN_TOL * max(1.0, float(np.max(np.abs(blocks)))):
            raise ParameterError(f"element {self.label!r} is not Hermitian (drift {drift:.3g})")
        blocks.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "phase", float(self.phase))

    @property
    def matrix(self) -> np.ndarray:
        dim = 2 ** self.n
        result = self.phase * np.eye(dim, dtype=np.complex128)
        for k in range(self.n):
            if np.any(self.blocks[k]):
                factors = [IDENTITY] * self.n
                factors[k] = self.blocks[k]
                result = result + kron_all(factors)
        return result

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        """T applied to a flat amplitude vector, site by site."""
        tensor = np.asarray(amplitudes, dtype=np.complex128).reshape((2,) * self.n)
        result = self.phase * tensor
        for k in range(self.n):
            block = self.blocks[k]
            if np.any(block):
                result = result + np.moveaxis(np.tensordot(block, tensor, axes=([1], [k])), 0, k)
        return np.asarray(result).reshape(-1)

    def coordinates(self) -> np.ndarray:
        """Real coordinates in the reduced basis (x, y, z per site, then identity)."""
        coords = np.zeros(3 * self.n + 1)
        identity_total = self.phase
        for k in range(self.n):
            block = self.blocks[k]
            for a, (_, pauli) in enumerate(PAULIS):
                coords[3 * k + a] = 0.5 * np.trace(pauli @ block).real
            identity_total += 0.5 * np.trace(block).real
        coords[-1] = identity_total
        return coords

    def to_dict(self) -> Dict:
        return {"label": self.label, "coordinates": self.coordinates().tolist()}


def single_site(n: int, site: int, block: np.ndarray, label: str) -> LieElement:
    blocks = np.zeros((n, 2, 2), dtype=np.complex128)
    blocks[site] = block
    return LieElement(n, blocks, 0.0, label)


def global_identity(n: int) -> LieElement:
    return LieElement(n, np.zeros((n, 2, 2), dtype=np.complex128), 1.0, "identity")


def combine(coefficients: Sequence[float], elements: Sequence[LieElement], label: str = "") -> LieElement:
    """Real linear combination sum_i c_i T_i."""
    if len(coefficients) != len(elements):
        raise DimensionError(f"{len(coefficients)} coefficients for {len(elements)} elements")
    n = elements[0].n
    blocks = np.zeros((n, 2, 2), dtype=np.complex128)
    phase = 0.0
    for c, element in zip(coefficients, elements):
        blocks = blocks + float(c) * element.blocks
        phase += float(c) * element.phase
    return LieElement(n, blocks, phase, label)


@dataclass(frozen=True)
class GeneratorSet:
    n: int
    mode: str
    elements: Tuple[LieElement, ...]

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    @property
    def labels(self) -> List[str]:
        return [e.label for e in self.elements]


def generators(n: int, mode: str = DEFAULT_MODE) -> GeneratorSet:
    """Site-major x, y, z (plus the per-site identity in full mode); reduced mode ends with one global identity."""
    n = check_size(n)
    check_mode(mode)
    elements = []
    for k in range(n):
        for name, pauli in PAULIS:
            elements.append(single_site(n, k, pauli, f"σ{name}@{k + 1}"))
        if mode == "full":
            elements.append(single_site(n, k, IDENTITY, f"1@{k + 1}"))
    if mode == "reduced":
        elements.append(global_identity(n))
    return GeneratorSet(n, mode, tuple(elements))


# =============================================================================
# TANGENT VECTORS
# =============================================================================

def _check_same_n(element_n: int, state: QubitState):
    if element_n != state.n:
        raise DimensionError(f"generator acts on {element_n} qubits, state has {state.n}")


def tangent_vector(element: LieElement, state: QubitState) -> RealEmbedding:
    """embed_real(i T psi): the coefficient vector u of the field u . grad."""
    _check_same_n(element.n, state)
    return embed_real(QubitState(state.n, 1j * element.apply(state.amplitudes)))


def tangent_matrix(gens: GeneratorSet, state: QubitState) -> np.ndarray:
    """Row i is the tangent vector of generator i at the state."""
    _check_same_n(gens.n, state)
    rows = np.empty((len(gens), 2 * state.dim))
    for i, element in enumerate(gens):
        rows[i] = tangent_vector(element, state).coords
    return rows


# =============================================================================
# RANK
# =============================================================================

def singular_values(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    if not np.all(np.isfinite(matrix)):
        raise NumericalError("matrix has non-finite entries")
    if matrix.size == 0:
        return np.zeros(0)
    return scipy.linalg.svdvals(matrix)


def numerical_rank(matrix: np.ndarray, policy: RankPolicy = DEFAULT_POLICY) -> int:
    sigma = singular_values(matrix)
    if sigma.size == 0:
        return 0
    return int(np.sum(sigma > policy.threshold(sigma[0])))


# =============================================================================
# ORBITS
# =============================================================================

@dataclass
class OrbitReport:
    n: int
    mode: str
    orbit_dim: int
    invariant_count: int
    stabilizer_dim: int
    tolerance: float
    singular_values: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "mode": self.mode,
            "orbit_dim": self.orbit_dim,
            "invariant_count": self.invariant_count,
            "stabilizer_dim": self.stabilizer_dim,
            "tolerance": self.tolerance,
            "singular_values": list(self.singular_values),
        }


def orbit_report(state: QubitState, mode: str = DEFAULT_MODE, policy: RankPolicy = DEFAULT_POLICY) -> OrbitReport:
    start_time = time.time()
    gens = generators(state.n, mode)
    if state.is_zero():
        return OrbitReport(state.n, mode, 0, 2 * state.dim, len(gens), policy.threshold(0.0),
                           [0.0] * min(len(gens), 2 * state.dim))

    sigma = singular_values(tangent_matrix(gens, state.normalized()))
    tau = policy.threshold(sigma[0])
    rank = int(np.sum(sigma > tau))
    logger.debug(f"n={state.n} mode={mode} singular values {np.array2string(sigma, precision=3)}")
    logger.info(f"✅ Orbit rank {rank} of {len(gens)} generators in {time.time() - start_time:.4f} seconds")
    return OrbitReport(
        n=state.n,
        mode=mode,
        orbit_dim=rank,
        invariant_count=2 * state.dim - rank,
        stabilizer_dim=len(gens) - rank,
        tolerance=tau,
        singular_values=[float(s) for s in sigma],
    )


def orbit_dimension(state: QubitState, mode: str = DEFAULT_MODE, policy: RankPolicy = DEFAULT_POLICY) -> int:
    """Rank of the tangent matrix at the normalized state; 0 for the zero state."""
    return orbit_report(state, mode, policy).orbit_dim


def invariant_count(state: QubitState, mode: str = DEFAULT_MODE, policy: RankPolicy = DEFAULT_POLICY) -> int:
    """2^(n+1) minus the orbit dimension; the norm is one of the counted invariants."""
    return orbit_report(state, mode, policy).invariant_count


def count_bounds(n: int) -> Tuple[int, int]:
    """(2^(n+1) - 4n, 2^(n+1) - (3n+1)), raw, not clamped."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n!r}")
    total = 2 ** (n + 1)
    return total - 4 * n, total - (3 * n + 1)


# =============================================================================
# STABILIZER
# =============================================================================

@dataclass(frozen=True, eq=False)
class StabilizerBasis:
    coefficients: np.ndarray  # (dim, |G|), orthonormal rows
    elements: Tuple[LieElement, ...]
    tol: float
    mode: str = DEFAULT_MODE

    @property
    def dim(self) -> int:
        return len(self.elements)

    def to_dict(self) -> Dict:
        return {
            "mode": self.mode,
            "dim": self.dim,
            "tol": self.tol,
            "coefficients": np.asarray(self.coefficients).tolist(),
        }


def stabilizer_basis(state: QubitState, mode: str = DEFAULT_MODE,
                     policy: RankPolicy = DEFAULT_POLICY) -> StabilizerBasis:
    """
    Orthonormal basis of all real lambda with |sum_i lambda_i X_{T_i}(psi)| <= tau,
    i.e. the right singular vectors of the transposed tangent matrix below tau.
    """
    gens = generators(state.n, mode)
    size = len(gens)
    if state.is_zero():
        coefficients = np.eye(size)
        tau = policy.threshold(0.0)
    else:
        matrix = tangent_matrix(gens, state.normalized())
        if not np.all(np.isfinite(matrix)):
            raise NumericalError("tangent matrix has non-finite entries")
        # lambda^T M = 0  <=>  M^T lambda = 0; rows of vh span the coefficient space
        _, sigma, vh = scipy.linalg.svd(matrix.T, full_matrices=True)
        tau = policy.threshold(sigma[0] if sigma.size else 0.0)
        rank = int(np.sum(sigma > tau))
        coefficients = vh[rank:]

    elements = tuple(
        combine(row, gens.elements, label=f"S{i + 1}") for i, row in enumerate(coefficients)
    )
    logger.debug(f"Stabilizer of n={state.n} state has dimension {len(elements)}")
    return StabilizerBasis(np.asarray(coefficients), elements, float(tau), mode)
