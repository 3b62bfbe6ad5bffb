"""
Normal forms under local unitaries: the two-qubit Schmidt form, the six-parameter
three-qubit form, and LU-equivalence verdicts with optional witnesses.
"""
import concurrent.futures
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.optimize

from .config import (DEFAULT_OPTIMIZER, DEFAULT_POLICY, DEGENERATE_TOL, FINGERPRINT_TOL, WITNESS_TOL,
                     OptimizerConfig, RankPolicy)
from .errors import DimensionError
from .invariants import fingerprint
from .statespace import QubitState, apply_local, catalog_state, norm_sq

logger = logging.getLogger("orbit_forge.canonical_forms")

# =============================================================================
# SU(2) PARAMETRISATION
# =============================================================================


def su2_from_angles(theta: float, phi: float, lam: float) -> np.ndarray:
    """Rz(phi) Ry(theta) Rz(lam), determinant one."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([
        [np.exp(-0.5j * (phi + lam)) * c, -np.exp(-0.5j * (phi - lam)) * s],
        [np.exp(0.5j * (phi - lam)) * s, np.exp(0.5j * (phi + lam)) * c],
    ], dtype=np.complex128)


def local_from_angles(angles: np.ndarray, n: int) -> List[np.ndarray]:
    angles = np.asarray(angles, dtype=np.float64).reshape(n, 3)
    return [su2_from_angles(*row) for row in angles]


def _compose_local(outer: Sequence[np.ndarray], inner: Sequence[np.ndarray]) -> List[np.ndarray]:
    return [o @ i for o, i in zip(outer, inner)]


def _dagger_all(unitaries: Sequence[np.ndarray]) -> List[np.ndarray]:
    return [u.conj().T for u in unitaries]


@dataclass
class SearchResult:
    unitaries: List[np.ndarray]
    objective: float
    restart: int


def multistart_search(objective: Callable[[List[np.ndarray]], float], n: int, config: OptimizerConfig,
                      base: Optional[Sequence[np.ndarray]] = None) -> SearchResult:
    """
    Nelder-Mead over 3n SU(2) angles applied on top of base. Restart 0 starts at
    the identity, the others at seeded random angles; stops early once an
    objective reaches config.target**2.
    """
    base = [np.eye(2, dtype=np.complex128) for _ in range(n)] if base is None else list(base)
    rng = np.random.default_rng(config.seed)
    starts = [np.zeros(3 * n)] + [rng.uniform(-math.pi, math.pi, 3 * n) for _ in range(config.restarts - 1)]

    def run(index_start) -> SearchResult:
        index, x0 = index_start
        fun = lambda x: objective(_compose_local(local_from_angles(x, n), base))
        result = scipy.optimize.minimize(fun, x0, method="Nelder-Mead",
                                         options={"fatol": config.fatol, "xatol": 1e-10,
                                                  "maxiter": config.maxiter, "maxfev": config.maxiter,
                                                  "adaptive": True})
        logger.debug(f"Restart {index}: objective {result.fun:.3e} after {result.nfev} evaluations")
        return SearchResult(_compose_local(local_from_angles(result.x, n), base), float(result.fun), index)

    best: Optional[SearchResult] = None
    batch = max(1, config.max_workers)
    indexed = list(enumerate(starts))
    # restarts run in seeded batches; results are ranked by (objective, restart index)
    for offset in range(0, len(indexed), batch):
        with concurrent.futures.ThreadPoolExecutor(max_workers=batch) as executor:
            results = list(executor.map(run, indexed[offset:offset + batch]))
        for result in results:
            if best is None or (result.objective, result.restart) < (best.objective, best.restart):
                best = result
        if best.objective <= config.target ** 2:
            break
    return best


# =============================================================================
# TWO QUBITS
# =============================================================================

@dataclass
class SchmidtForm:
    N: float
    phi: float
    local_unitaries: Tuple[np.ndarray, np.ndarray]
    coefficients: Tuple[float, float] = (0.0, 0.0)

    def to_dict(self) -> Dict:
        return {"N": self.N, "phi": self.phi, "coefficients": list(self.coefficients),
                "unitaries": list(self.local_unitaries)}


def _fix_singular_phases(u: np.ndarray, vh: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Make the first nonzero entry of each right-singular vector real positive."""
    u, v = u.copy(), vh.conj().T.copy()
    for k in range(v.shape[1]):
        column = v[:, k]
        nonzero = np.flatnonzero(np.abs(column) > 1e-14)
        if nonzero.size:
            phase = column[nonzero[0]] / abs(column[nonzero[0]])
            v[:, k] = column / phase
            u[:, k] = u[:, k] / phase
    return u, v.conj().T


def schmidt_2q(state: QubitState) -> SchmidtForm:
    """SVD of the 2x2 amplitude matrix: (U1 x U2) psi = N (cos phi e1e1 + sin phi e2e2)."""
    if state.n != 2:
        raise DimensionError(f"Schmidt form needs n=2, got n={state.n}")
    matrix = state.amplitudes.reshape(2, 2)
    u, sigma, vh = scipy.linalg.svd(matrix)
    u, vh = _fix_singular_phases(u, vh)
    # (A x B) psi has matrix A M B^T; A = U^dagger, B = conj(Vh) gives diag(sigma)
    u1 = u.conj().T
    u2 = vh.conj()
    s1, s2 = float(sigma[0]), float(sigma[1])
    return SchmidtForm(
        N=math.hypot(s1, s2),
        phi=math.atan2(s2, s1),
        local_unitaries=(u1, u2),
        coefficients=(s1, s2),
    )


# =============================================================================
# THREE QUBITS
# =============================================================================

VANISHING_SLOTS = (1, 2)
REAL_NONNEGATIVE_SLOTS = (0, 3, 4, 5)


@dataclass
class CanonicalForm3:
    N: float
    alpha: float
    beta: float
    gamma: float
    delta: float
    eta: float
    local_unitaries: Tuple[np.ndarray, np.ndarray, np.ndarray]
    residual: float
    degenerate: bool = False

    @property
    def params(self) -> Tuple[float, float, float, float, float, float]:
        return (self.N, self.alpha, self.beta, self.gamma, self.delta, self.eta)

    def state(self) -> QubitState:
        return catalog_state("canonical3", self.params)

    def to_dict(self) -> Dict:
        return {
            "N": self.N, "alpha": self.alpha, "beta": self.beta, "gamma": self.gamma,
            "delta": self.delta, "eta": self.eta, "residual": self.residual,
            "unitaries": list(self.local_unitaries), "degenerate": self.degenerate,
        }


def _dephase(amplitudes: np.ndarray) -> np.ndarray:
    """Remove the global phase so amplitude 0 is real nonnegative."""
    if abs(amplitudes[0]) > 0:
        return amplitudes * (abs(amplitudes[0]) / amplitudes[0])
    return amplitudes


def canonical_objective(amplitudes: np.ndarray) -> float:
    """
    Zero exactly on the canonical three-qubit form (up to global phase): slots 1, 2
    vanish, 3, 4, 5 real nonnegative, 7 real, and the (0,3) and (4,7) branches orthogonal.
    """
    a = _dephase(amplitudes)
    value = sum(abs(a[k]) ** 2 for k in VANISHING_SLOTS)
    value += sum(a[k].imag ** 2 + min(0.0, a[k].real) ** 2 for k in REAL_NONNEGATIVE_SLOTS)
    value += a[7].imag ** 2
    value += abs(np.conj(a[0]) * a[4] + np.conj(a[3]) * a[7]) ** 2
    return float(value)


def analytic_reduction(state: QubitState) -> List[np.ndarray]:
    """
    Local unitaries taking the state to the canonical form: diagonalise the qubit-1
    reduced state (dominant branch first), Schmidt-decompose that branch on qubits
    2 and 3, then fix the two remaining relative phases.
    """
    psi = state.amplitudes.reshape(2, 4)
    rho1 = psi @ psi.conj().T
    _, vectors = np.linalg.eigh(rho1)
    u1 = vectors[:, ::-1].conj().T
    rows = u1 @ psi

    u, _, vh = scipy.linalg.svd(rows[0].reshape(2, 2))
    u, vh = _fix_singular_phases(u, vh)
    u2, u3 = u.conj().T, vh.conj()
    unitaries = [u1, u2, u3]
    amplitudes = apply_local(state, unitaries).amplitudes

    # qubit-1 phase: make amplitude 4 real nonnegative, or amplitude 7 real negative when 4 vanishes
    scale = max(1.0, float(np.max(np.abs(amplitudes))))
    if abs(amplitudes[4]) > DEGENERATE_TOL * scale:
        chi = -np.angle(amplitudes[4])
    elif abs(amplitudes[7]) > DEGENERATE_TOL * scale:
        chi = math.pi - np.angle(amplitudes[7])
    else:
        chi = 0.0
    unitaries[0] = np.diag([1.0, np.exp(1j * chi)]) @ unitaries[0]

    # opposite phases on qubits 2 and 3 keep slots 0 and 3 and rotate slot 5 against slot 6
    amplitudes = apply_local(state, unitaries).amplitudes
    theta = np.angle(amplitudes[5]) if abs(amplitudes[5]) > DEGENERATE_TOL * scale else 0.0
    unitaries[1] = np.diag([1.0, np.exp(1j * theta)]) @ unitaries[1]
    unitaries[2] = np.diag([1.0, np.exp(-1j * theta)]) @ unitaries[2]
    return unitaries


def _angle(y: float, x: float) -> float:
    return math.atan2(max(0.0, y), max(0.0, x))


def _read_parameters(a: np.ndarray, scale: float) -> Tuple[Tuple[float, ...], bool]:
    """(N, alpha, beta, gamma, delta, eta) from amplitudes already in canonical form."""
    tiny = DEGENERATE_TOL * max(scale, 1e-300)
    N = float(np.linalg.norm(a))
    head = math.hypot(abs(a[0]), abs(a[3]))
    branch = math.hypot(abs(a[4]), abs(a[7]))
    offdiag = math.hypot(abs(a[5]), abs(a[6]))
    tail = math.hypot(branch, offdiag)
    alpha = _angle(tail, head)
    degenerate = head <= tiny or tail <= tiny
    if head > tiny:
        beta = _angle(a[3].real, a[0].real)
    elif branch > tiny:
        beta = _angle(a[4].real, -a[7].real)
    else:
        beta = 0.0
        degenerate = True
    gamma = _angle(offdiag, branch)
    if branch <= tiny or offdiag <= tiny:
        degenerate = True
    delta = _angle(abs(a[6]), a[5].real)
    eta = float(np.angle(a[6])) if abs(a[6]) > tiny else 0.0
    # eta is free when either off-diagonal slot vanishes
    if abs(a[5]) <= tiny or abs(a[6]) <= tiny:
        degenerate = True
    return (N, alpha, beta, gamma, delta, eta), degenerate


def _finish(state: QubitState, unitaries: Sequence[np.ndarray]) -> CanonicalForm3:
    transformed = apply_local(state, unitaries).amplitudes
    phase = abs(transformed[0]) / transformed[0] if abs(transformed[0]) > 0 else 1.0
    unitaries = [unitaries[0] * phase] + list(unitaries[1:])
    transformed = transformed * phase
    scale = math.sqrt(norm_sq(state))
    params, degenerate = _read_parameters(transformed, scale)
    rebuilt = catalog_state("canonical3", params).amplitudes
    residual = float(np.max(np.abs(transformed - rebuilt))) if transformed.size else 0.0
    return CanonicalForm3(*params, local_unitaries=tuple(unitaries), residual=residual, degenerate=degenerate)


def canonical_3q(state: QubitState, config: OptimizerConfig = DEFAULT_OPTIMIZER) -> CanonicalForm3:
    """
    Reduce a three-qubit state to
      N cos a e1(cos b e1e1 + sin b e2e2) + N sin a cos g e2(sin b e1e1 - cos b e2e2)
      + N sin a sin g e2(cos d e1e2 + e^{i eta} sin d e2e1).
    The analytic reduction seeds the search; Nelder-Mead restarts run only when its
    residual misses config.target (or when analytic seeding is off).
    """
    if state.n != 3:
        raise DimensionError(f"canonical form needs n=3, got n={state.n}")
    start_time = time.time()
    if state.is_zero():
        identity = tuple(np.eye(2, dtype=np.complex128) for _ in range(3))
        return CanonicalForm3(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, identity, 0.0, True)

    scale = math.sqrt(norm_sq(state))
    candidate = None
    if config.analytic_seed:
        candidate = _finish(state, analytic_reduction(state))
        if candidate.residual <= config.target * scale:
            elapsed = time.time() - start_time
            logger.info(f"✅ Canonical form by reduction, residual {candidate.residual:.2e} in {elapsed:.4f} seconds")
            return candidate
        logger.warning(f"⚠️ Reduction residual {candidate.residual:.2e} above target; starting restarts")

    unit = state.normalized()
    base = list(candidate.local_unitaries) if candidate is not None else None
    search = multistart_search(lambda us: canonical_objective(apply_local(unit, us).amplitudes), 3, config, base)
    searched = _finish(state, search.unitaries)
    if candidate is None or searched.residual < candidate.residual:
        candidate = searched
    if candidate.residual > config.target * scale:
        logger.warning(f"⚠️ Canonical form residual {candidate.residual:.2e} after {config.restarts} restarts")
    logger.info(f"Canonical form residual {candidate.residual:.2e} in {time.time() - start_time:.2f} seconds")
    return candidate


# =============================================================================
# EQUIVALENCE
# =============================================================================

@dataclass
class Witness:
    unitaries: List[np.ndarray]
    phase: float
    residual: float

    def to_dict(self) -> Dict:
        return {"unitaries": list(self.unitaries), "phase": self.phase, "residual": self.residual}


@dataclass
class EquivVerdict:
    fingerprints_match: bool
    max_component_gap: float
    witness: Optional[Witness] = None
    witness_searched: bool = False

    @property
    def witnessed(self) -> bool:
        return self.witness is not None and self.witness.residual <= WITNESS_TOL

    def to_dict(self) -> Dict:
        return {
            "fingerprints_match": self.fingerprints_match,
            "max_component_gap": self.max_component_gap,
            "witness_searched": self.witness_searched,
            "witness": self.witness.to_dict() if self.witness is not None else None,
        }


def witness_residual(source: QubitState, target: QubitState, unitaries: Sequence[np.ndarray]) -> Tuple[float, float]:
    """min over theta of |(x U_k) source - e^{i theta} target|, and the minimising theta."""
    moved = apply_local(source, unitaries).amplitudes
    overlap = np.vdot(target.amplitudes, moved)
    theta = float(np.angle(overlap))
    return float(np.linalg.norm(moved - np.exp(1j * theta) * target.amplitudes)), theta


def _normal_form_unitaries(state: QubitState, config: OptimizerConfig) -> Optional[List[np.ndarray]]:
    if state.n == 1:
        a, b = state.amplitudes
        norm = math.sqrt(norm_sq(state))
        if norm == 0.0:
            return [np.eye(2, dtype=np.complex128)]
        return [np.array([[np.conj(a), np.conj(b)], [-b, a]]) / norm]
    if state.n == 2:
        return list(schmidt_2q(state).local_unitaries)
    if state.n == 3:
        return list(canonical_3q(state, config).local_unitaries)
    return None


def find_witness(source: QubitState, target: QubitState, config: OptimizerConfig = DEFAULT_OPTIMIZER) -> Witness:
    """Local unitaries mapping source to target up to phase: normal forms first, then restarts."""
    seed = None
    to_source = _normal_form_unitaries(source, config)
    to_target = _normal_form_unitaries(target, config)
    if to_source is not None and to_target is not None:
        seed = _compose_local(_dagger_all(to_target), to_source)
        residual, theta = witness_residual(source, target, seed)
        if residual <= WITNESS_TOL * max(1.0, math.sqrt(norm_sq(target))):
            return Witness(seed, theta, residual)
        logger.info(f"Normal forms disagree (residual {residual:.2e}); searching")

    def objective(unitaries):
        return witness_residual(source, target, unitaries)[0] ** 2

    search = multistart_search(objective, source.n, config, seed)
    residual, theta = witness_residual(source, target, search.unitaries)
    return Witness(search.unitaries, theta, residual)


def lu_equivalent(first: QubitState, second: QubitState, search: bool = False,
                  config: OptimizerConfig = DEFAULT_OPTIMIZER, tol: float = FINGERPRINT_TOL,
                  policy: RankPolicy = DEFAULT_POLICY) -> EquivVerdict:
    """Fingerprint comparison (necessary condition); with search, a witness is sought when they match."""
    if first.n != second.n:
        raise DimensionError(f"cannot compare n={first.n} with n={second.n}")
    fp_first, fp_second = fingerprint(first, policy), fingerprint(second, policy)
    gap = fp_first.gap(fp_second)
    match = fp_first.matches(fp_second, tol)
    verdict = EquivVerdict(fingerprints_match=match, max_component_gap=gap)
    if search and match:
        verdict.witness = find_witness(first, second, config)
        verdict.witness_searched = True
        logger.info(f"Witness residual {verdict.witness.residual:.2e}")
    return verdict
