"""
Pure n-qubit states: construction, the named catalog, JSON state files and the
real-coordinate embedding the tangent computations work in.

Flat index convention: qubit 1 is the most significant bit and e1 maps to bit 0,
so amplitude i belongs to e_{i1} x ... x e_{in} with i = sum_k b_k 2^(n-k).
"""
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import MAX_QUBITS
from .errors import CatalogError, DimensionError, ParameterError, StateParseError, UnsupportedSizeError

logger = logging.getLogger("orbit_forge.statespace")

# =============================================================================
# DOMAIN TYPES
# =============================================================================


def check_size(n) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise UnsupportedSizeError(f"n must be an integer, got {n!r}")
    if n < 1 or n > MAX_QUBITS:
        raise UnsupportedSizeError(f"n={n} outside 1..{MAX_QUBITS}")
    return int(n)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class QubitState:
    """Amplitude vector of an n-qubit pure state; not necessarily normalized."""
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        check_size(self.n)
        amplitudes = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amplitudes.size != 2 ** self.n:
            raise DimensionError(f"{amplitudes.size} amplitudes for n={self.n}, expected {2 ** self.n}")
        object.__setattr__(self, "amplitudes", _frozen(amplitudes))

    @property
    def dim(self) -> int:
        return 2 ** self.n

    @property
    def tensor(self) -> np.ndarray:
        """Amplitudes as an n-slot (2, ..., 2) tensor, slot k = qubit k+1."""
        return self.amplitudes.reshape((2,) * self.n)

    def normalized(self) -> "QubitState":
        norm = math.sqrt(norm_sq(self))
        if norm == 0.0:
            return self
        return QubitState(self.n, self.amplitudes / norm)

    def scaled(self, factor: complex) -> "QubitState":
        return QubitState(self.n, self.amplitudes * factor)

    def is_zero(self) -> bool:
        return not np.any(self.amplitudes)

    def to_dict(self) -> Dict:
        return {"n": self.n, "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes]}

    def __repr__(self):
        return f"QubitState(n={self.n}, norm_sq={norm_sq(self):.6g})"


@dataclass(frozen=True, eq=False)
class RealEmbedding:
    """Interleaved (Re, Im) coordinates of the amplitudes, length 2^(n+1)."""
    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "coords", _frozen(coords))

    @property
    def n(self) -> int:
        return int(round(math.log2(self.coords.size))) - 1


# =============================================================================
# EMBEDDING / NORM
# =============================================================================

def embed_real(state: QubitState) -> RealEmbedding:
    coords = np.empty(2 * state.dim, dtype=np.float64)
    coords[0::2] = state.amplitudes.real
    coords[1::2] = state.amplitudes.imag
    return RealEmbedding(coords)


def unembed_real(embedding: Union[RealEmbedding, np.ndarray]) -> QubitState:
    coords = embedding.coords if isinstance(embedding, RealEmbedding) else np.asarray(embedding, dtype=np.float64)
    if coords.size < 4 or coords.size & (coords.size - 1):
        raise DimensionError(f"{coords.size} real coordinates is not 2^(n+1)")
    amplitudes = coords[0::2] + 1j * coords[1::2]
    return QubitState(int(round(math.log2(amplitudes.size))), amplitudes)


def norm_sq(state: QubitState) -> float:
    return float(np.vdot(state.amplitudes, state.amplitudes).real)


# =============================================================================
# STATE FILES
# =============================================================================

def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise StateParseError(f"non-numeric entry {value!r} at {where}")
    try:
        number = float(value)
    except OverflowError as e:
        raise StateParseError(f"entry at {where} does not fit a float") from e
    if not math.isfinite(number):
        raise StateParseError(f"non-finite entry {value!r} at {where}")
    return number


def parse_state(document: str) -> QubitState:
    """Parse the JSON state schema {"n": int, "amplitudes": [[re, im], ...]}; no normalization."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as e:
        raise StateParseError(f"invalid JSON: {e}") from e
    if not isinstance(data, dict) or "n" not in data or "amplitudes" not in data:
        raise StateParseError("expected an object with keys 'n' and 'amplitudes'")

    n = check_size(data["n"])
    pairs = data["amplitudes"]
    if not isinstance(pairs, list):
        raise StateParseError("'amplitudes' must be a list of [re, im] pairs")
    if len(pairs) != 2 ** n:
        raise DimensionError(f"{len(pairs)} amplitudes for n={n}, expected {2 ** n}")

    amplitudes = np.empty(2 ** n, dtype=np.complex128)
    for i, pair in enumerate(pairs):
        if not isinstance(pair, list) or len(pair) != 2:
            raise StateParseError(f"amplitude {i} is not a [re, im] pair: {pair!r}")
        amplitudes[i] = complex(_number(pair[0], f"amplitudes[{i}][0]"), _number(pair[1], f"amplitudes[{i}][1]"))
    return QubitState(n, amplitudes)


def dump_state(state: QubitState) -> str:
    """Serialize with 17 significant digits so parse_state(dump_state(s)) is bit-exact."""
    pairs = ", ".join(f"[{a.real:.17g}, {a.imag:.17g}]" for a in state.amplitudes)
    return f'{{"n": {state.n}, "amplitudes": [{pairs}]}}\n'


def load_state(path: Union[str, Path]) -> QubitState:
    logger.debug(f"Reading state file {path}")
    try:
        document = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise StateParseError(f"{path} is not UTF-8 text: {e}") from e
    return parse_state(document)


def save_state(state: QubitState, path: Union[str, Path]) -> None:
    Path(path).write_text(dump_state(state), encoding="utf-8")
    logger.info(f"💾 Wrote n={state.n} state to {path}")


# =============================================================================
# CATALOG
# =============================================================================

def _basis_index(bits: Sequence[int]) -> int:
    index = 0
    for b in bits:
        index = (index << 1) | b
    return index


def _singlet(n: int, params: Sequence[complex]) -> np.ndarray:
    amplitudes = np.zeros(4, dtype=np.complex128)
    amplitudes[1] = 1 / math.sqrt(2)
    amplitudes[2] = -1 / math.sqrt(2)
    return amplitudes


def _schmidt2(n: int, params: Sequence[complex]) -> np.ndarray:
    N, phi = (complex(p).real for p in params)
    amplitudes = np.zeros(4, dtype=np.complex128)
    amplitudes[0] = N * math.cos(phi)
    amplitudes[3] = N * math.sin(phi)
    return amplitudes


def _family4(n: int, params: Sequence[complex]) -> np.ndarray:
    a, b, c, d = (complex(p) for p in params)
    amplitudes = np.zeros(8, dtype=np.complex128)
    amplitudes[0] = a  # e1 e1 e1
    amplitudes[7] = b  # e2 e2 e2
    amplitudes[1] = c  # e1 e1 e2
    amplitudes[4] = d  # e2 e1 e1
    return amplitudes


def _ghz(n: int, params: Sequence[complex]) -> np.ndarray:
    amplitudes = np.zeros(2 ** n, dtype=np.complex128)
    amplitudes[0] = amplitudes[-1] = 1 / math.sqrt(2)
    return amplitudes


def _w(n: int, params: Sequence[complex]) -> np.ndarray:
    amplitudes = np.zeros(2 ** n, dtype=np.complex128)
    for k in range(n):
        amplitudes[1 << k] = 1 / math.sqrt(n)
    return amplitudes


def _product(n: int, params: Sequence[complex]) -> np.ndarray:
    amplitudes = np.zeros(2 ** n, dtype=np.complex128)
    amplitudes[0] = 1.0
    return amplitudes


def _canonical3(n: int, params: Sequence[complex]) -> np.ndarray:
    N, alpha, beta, gamma, delta, eta = (complex(p).real for p in params)
    amplitudes = np.zeros(8, dtype=np.complex128)
    amplitudes[_basis_index((0, 0, 0))] = N * math.cos(alpha) * math.cos(beta)
    amplitudes[_basis_index((0, 1, 1))] = N * math.cos(alpha) * math.sin(beta)
    amplitudes[_basis_index((1, 0, 0))] = N * math.sin(alpha) * math.cos(gamma) * math.sin(beta)
    amplitudes[_basis_index((1, 1, 1))] = -N * math.sin(alpha) * math.cos(gamma) * math.cos(beta)
    amplitudes[_basis_index((1, 0, 1))] = N * math.sin(alpha) * math.sin(gamma) * math.cos(delta)
    amplitudes[_basis_index((1, 1, 0))] = (N * math.sin(alpha) * math.sin(gamma) * math.sin(delta)
                                           * complex(math.cos(eta), math.sin(eta)))
    return amplitudes


@dataclass(frozen=True)
class CatalogEntry:
    builder: Callable[[int, Sequence[complex]], np.ndarray]
    arity: int
    default_n: int
    sizes: Tuple[int, int]  # allowed n range, inclusive
    real: bool = False


CATALOG: Dict[str, CatalogEntry] = {
    "singlet": CatalogEntry(_singlet, 0, 2, (2, 2)),
    "schmidt2": CatalogEntry(_schmidt2, 2, 2, (2, 2), real=True),
    "family4": CatalogEntry(_family4, 4, 3, (3, 3)),
    "ghz": CatalogEntry(_ghz, 0, 3, (2, MAX_QUBITS)),
    "w": CatalogEntry(_w, 0, 3, (2, MAX_QUBITS)),
    "product": CatalogEntry(_product, 0, 3, (1, MAX_QUBITS)),
    "canonical3": CatalogEntry(_canonical3, 6, 3, (3, 3), real=True),
}


def catalog_names() -> List[str]:
    return sorted(CATALOG)


def catalog_state(name: str, params: Sequence[complex] = (), n: Optional[int] = None) -> QubitState:
    """Exact amplitudes of a named construction; n is only free for ghz, w and product."""
    entry = CATALOG.get(name)
    if entry is None:
        raise CatalogError(f"unknown catalog state {name!r}; known: {', '.join(catalog_names())}")
    params = list(params)
    if len(params) != entry.arity:
        raise ParameterError(f"{name} takes {entry.arity} parameters, got {len(params)}")
    if entry.real:
        imaginary = [p for p in params if complex(p).imag != 0]
        if imaginary:
            raise ParameterError(f"{name} takes real parameters, got {imaginary[0]!r}")
    if n is None:
        n = entry.default_n
    n = check_size(n)
    low, high = entry.sizes
    if not low <= n <= high:
        raise ParameterError(f"{name} is defined for n in {low}..{high}, got n={n}")
    return QubitState(n, entry.builder(n, params))


# =============================================================================
# RANDOM STATES AND LOCAL UNITARIES
# =============================================================================

def random_state(n: int, seed: int) -> QubitState:
    """Haar-random unit vector: Gaussian real and imaginary parts, then normalized."""
    n = check_size(n)
    rng = np.random.default_rng(seed)
    real = rng.standard_normal(2 ** n)
    imag = rng.standard_normal(2 ** n)
    amplitudes = real + 1j * imag
    return QubitState(n, amplitudes / np.linalg.norm(amplitudes))


def haar_su2(rng: np.random.Generator) -> np.ndarray:
    """Haar SU(2) element from a uniformly random unit quaternion."""
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    a = complex(q[0], q[3])
    b = complex(q[2], q[1])
    return np.array([[a, b], [-b.conjugate(), a.conjugate()]], dtype=np.complex128)


def random_local_unitaries(n: int, rng: np.random.Generator, phase: bool = True) -> List[np.ndarray]:
    """Independent Haar SU(2) per site; the first factor carries a random global phase."""
    unitaries = [haar_su2(rng) for _ in range(n)]
    if phase:
        unitaries[0] = unitaries[0] * np.exp(1j * rng.uniform(-math.pi, math.pi))
    return unitaries


def apply_local(state: QubitState, unitaries: Sequence[np.ndarray]) -> QubitState:
    """(U1 x ... x Un) state, one tensordot per site."""
    if len(unitaries) != state.n:
        raise DimensionError(f"{len(unitaries)} local operators for n={state.n}")
    tensor = state.tensor
    for k, u in enumerate(unitaries):
        u = np.asarray(u, dtype=np.complex128)
        if u.shape != (2, 2):
            raise DimensionError(f"local operator {k + 1} has shape {u.shape}, expected (2, 2)")
        tensor = np.moveaxis(np.tensordot(u, tensor, axes=([1], [k])), 0, k)
    return QubitState(state.n, tensor.reshape(-1))


def kron_all(factors: Sequence[np.ndarray]) -> np.ndarray:
    result = np.ones((1, 1), dtype=np.complex128)
    for f in factors:
        result = np.kron(result, f)
    return result
