"""
Polynomial local-unitary invariants built by contracting d copies of the amplitude
tensor with d conjugated copies, every index paired with an index on the same slot.
"""
import concurrent.futures
import functools
import itertools
import json
import logging
import math
import string
import time
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Sequence, Tuple, Union

import numpy as np

from .config import (DEFAULT_MODE, DEFAULT_POLICY, DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TRIALS, FD_STEP,
                     MAX_WORKERS, RankPolicy)
from .errors import DimensionError, ParameterError, StateParseError
from .lie_action import numerical_rank, orbit_report
from .statespace import (QubitState, apply_local, check_size, embed_real, norm_sq, random_local_unitaries,
                         random_state, unembed_real)

logger = logging.getLogger("orbit_forge.invariants")

LETTERS = string.ascii_letters

# =============================================================================
# CONTRACTION PATTERNS
# =============================================================================

Perm = Tuple[int, ...]


def _identity(d: int) -> Perm:
    return tuple(range(d))


def _cycle(d: int, shift: int = 1) -> Perm:
    return tuple((k + shift) % d for k in range(d))


def _inverse(p: Perm) -> Perm:
    inv = [0] * len(p)
    for k, m in enumerate(p):
        inv[m] = k
    return tuple(inv)


def _compose(p: Perm, q: Perm) -> Perm:
    """(p o q)(k) = p(q(k))"""
    return tuple(p[q[k]] for k in range(len(q)))


@dataclass(frozen=True)
class ContractionPattern:
    """
    perms[s][k] is the conjugate copy whose slot-s index is summed against the
    slot-s index of copy k (0-based here, 1-based in JSON).
    """
    n: int
    degree: int
    perms: Tuple[Perm, ...]
    label: str = ""

    def __post_init__(self):
        if self.degree < 1:
            raise ParameterError(f"degree must be >= 1, got {self.degree}")
        perms = tuple(tuple(int(x) for x in p) for p in self.perms)
        if len(perms) != self.n:
            raise DimensionError(f"pattern has {len(perms)} slot permutations for n={self.n}")
        for s, p in enumerate(perms):
            if sorted(p) != list(range(self.degree)):
                raise ParameterError(f"slot {s + 1} permutation {p} is not a bijection on {self.degree} copies")
        object.__setattr__(self, "perms", perms)

    def to_dict(self) -> Dict:
        return {"n": self.n, "degree": self.degree, "perms": [[m + 1 for m in p] for p in self.perms],
                "label": self.label}


def pattern_from_json(document: str, label: str = "custom") -> ContractionPattern:
    """{"n", "degree", "perms": [[...], ...]} with 1-based permutation images."""
    try:
        data = json.loads(document)
        n, degree, perms = int(data["n"]), int(data["degree"]), data["perms"]
        perms = tuple(tuple(int(m) - 1 for m in p) for p in perms)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise StateParseError(f"invalid pattern document: {e}") from e
    return ContractionPattern(n, degree, perms, data.get("label", label))


def pattern_to_json(pattern: ContractionPattern) -> str:
    return json.dumps(pattern.to_dict())


def trace_power_pattern(k: int) -> ContractionPattern:
    """Tr((alpha alpha^dagger)^k) for two qubits."""
    return ContractionPattern(2, k, (_identity(k), _cycle(k)), f"I{k}")


def broken_probe(state: QubitState) -> complex:
    """alpha_{11..1} conj(alpha_{22..2}); not an invariant, used as a negative control."""
    return complex(state.amplitudes[0] * np.conj(state.amplitudes[-1]))


# =============================================================================
# EVALUATION
# =============================================================================

@functools.lru_cache(maxsize=None)
def _contraction_plan(n: int, degree: int, perms: Tuple[Perm, ...]) -> Tuple[str, list]:
    if n * degree > len(LETTERS):
        raise ParameterError(f"pattern with n*degree={n * degree} exceeds {len(LETTERS)} contraction labels")
    letter = lambda k, s: LETTERS[k * n + s]
    inverses = [_inverse(p) for p in perms]
    alpha_terms = ["".join(letter(k, s) for s in range(n)) for k in range(degree)]
    conj_terms = ["".join(letter(inverses[s][m], s) for s in range(n)) for m in range(degree)]
    subscripts = ",".join(alpha_terms + conj_terms) + "->"
    dummy = np.ones((2,) * n)
    path, _ = np.einsum_path(subscripts, *([dummy] * (2 * degree)), optimize="greedy")
    return subscripts, path


def _check_slots(pattern: ContractionPattern, state: QubitState):
    if pattern.n != state.n:
        raise DimensionError(f"pattern has {pattern.n} slots, state has {state.n} qubits")


def evaluate_invariant(pattern: ContractionPattern, state: QubitState) -> complex:
    """Iterated pairwise contraction along a precomputed einsum path."""
    _check_slots(pattern, state)
    subscripts, path = _contraction_plan(pattern.n, pattern.degree, pattern.perms)
    tensor = state.tensor
    conj = np.conj(tensor)
    operands = [tensor] * pattern.degree + [conj] * pattern.degree
    return complex(np.einsum(subscripts, *operands, optimize=path))


def brute_force_invariant(pattern: ContractionPattern, state: QubitState) -> complex:
    """Direct sum over all 2^(n d) index assignments; exponential, for cross-checks only."""
    _check_slots(pattern, state)
    n, d = pattern.n, pattern.degree
    tensor = state.tensor
    inverses = [_inverse(p) for p in pattern.perms]
    total = 0j
    for flat in itertools.product((0, 1), repeat=n * d):
        indices = [flat[k * n:(k + 1) * n] for k in range(d)]
        term = 1 + 0j
        for k in range(d):
            term *= tensor[indices[k]]
        for m in range(d):
            term *= np.conj(tensor[tuple(indices[inverses[s][m]][s] for s in range(n))])
        total += term
    return complex(total)


# =============================================================================
# PATTERN STRUCTURE
# =============================================================================

def _relabel(perms: Sequence[Perm], tau: Perm) -> Tuple[Perm, ...]:
    tau_inv = _inverse(tau)
    return tuple(_compose(tau, _compose(p, tau_inv)) for p in perms)


def is_self_conjugate(pattern: ContractionPattern) -> bool:
    """True when swapping the roles of alpha and alpha* gives an equivalent pattern, so the value is real."""
    d = pattern.degree
    inverted = tuple(_inverse(p) for p in pattern.perms)
    for sigma in itertools.permutations(range(d)):
        for tau in itertools.permutations(range(d)):
            tau_inv = _inverse(tau)
            if all(_compose(sigma, _compose(q, tau_inv)) == p for q, p in zip(inverted, pattern.perms)):
                return True
    return False


def is_connected(pattern: ContractionPattern) -> bool:
    """False when the copies split into groups closed under every slot pairing (a product of smaller invariants)."""
    d = pattern.degree
    parent = list(range(d))

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    first_inverse = _inverse(pattern.perms[0])
    for p in pattern.perms[1:]:
        # alpha copy k and alpha copy first_inverse[p[k]] share a conjugate copy
        for k in range(d):
            a, b = find(k), find(first_inverse[p[k]])
            parent[a] = b
    return len({find(k) for k in range(d)}) == 1


# =============================================================================
# BUILT-IN PATTERNS
# =============================================================================

def norm_pattern(n: int) -> ContractionPattern:
    return ContractionPattern(n, 1, tuple((0,) for _ in range(n)), "I1")


def quartic_pattern(n: int, swapped: Sequence[int], label: str) -> ContractionPattern:
    perms = tuple((1, 0) if s in swapped else (0, 1) for s in range(n))
    return ContractionPattern(n, 2, perms, label)


def _swap_subsets(n: int) -> Iterator[Tuple[int, ...]]:
    # a subset and its complement give the same value; keep the smaller, and on ties the one without slot 1
    for size in range(1, n // 2 + 1):
        for subset in itertools.combinations(reversed(range(n)), size):
            if 2 * size == n and 0 in subset:
                continue
            yield subset


def quartic_patterns(n: int) -> List[ContractionPattern]:
    patterns = []
    for subset in _swap_subsets(n):
        slots = ",".join(str(s + 1) for s in sorted(subset))
        patterns.append(quartic_pattern(n, subset, f"Q[{slots}]"))
    return patterns


def _three_qubit_candidates() -> List[ContractionPattern]:
    d = 3
    ident, cyc, cyc_inv = _identity(d), _cycle(d), _cycle(d, -1)
    return [
        norm_pattern(3),
        quartic_pattern(3, (2,), "J1"),
        quartic_pattern(3, (1,), "J2"),
        quartic_pattern(3, (0,), "J3"),
        ContractionPattern(3, 3, (ident, cyc, cyc_inv), "K6"),
        ContractionPattern(3, 3, (cyc, cyc, cyc), "C6"),
    ]


def _octic_candidates(n: int) -> Iterator[ContractionPattern]:
    d = 4
    ident = _identity(d)
    deferred = []
    for tail in itertools.product(itertools.permutations(range(d)), repeat=n - 1):
        if any(p == ident for p in tail) or len(set(tail)) < len(tail):
            continue
        pattern = ContractionPattern(n, d, (ident,) + tuple(tail), "")
        if not is_connected(pattern):
            continue
        if is_self_conjugate(pattern):
            yield pattern
        else:
            deferred.append(pattern)
    # real parts of non-self-conjugate patterns, only reached if no self-conjugate one helps
    for pattern in deferred:
        yield pattern


def generic_invariant_count(n: int, seed: int = DEFAULT_SEED, policy: RankPolicy = DEFAULT_POLICY) -> int:
    return orbit_report(random_state(n, seed), DEFAULT_MODE, policy).invariant_count


@functools.lru_cache(maxsize=None)
def builtin_patterns(n: int) -> Tuple[ContractionPattern, ...]:
    """
    n=1: I1.  n=2: I1, I2.  n=3: I1, J1, J2, J3 and higher-degree patterns completed
    to the generic invariant count.  n>=4: I1 and every quartic swap pattern.
    """
    n = check_size(n)
    if n == 1:
        return (norm_pattern(1),)
    if n == 2:
        return (norm_pattern(2), quartic_pattern(2, (1,), "I2"))
    if n == 3:
        return tuple(complete_patterns(_three_qubit_candidates(), n, generic_invariant_count(n)))
    return (norm_pattern(n),) + tuple(quartic_patterns(n))


# =============================================================================
# FUNCTIONAL INDEPENDENCE
# =============================================================================

def _real_value(pattern, state: QubitState) -> float:
    if isinstance(pattern, ContractionPattern):
        return evaluate_invariant(pattern, state).real
    return complex(pattern(state)).real


def gradient_row(pattern, state: QubitState, step: float = FD_STEP) -> np.ndarray:
    """Gradient of Re p on the real embedding, fourth-order central differences."""
    x = embed_real(state).coords.copy()
    grad = np.empty_like(x)
    for j in range(x.size):
        values = []
        for offset in (2.0, 1.0, -1.0, -2.0):
            shifted = x.copy()
            shifted[j] += offset * step
            values.append(_real_value(pattern, unembed_real(shifted)))
        f2, f1, fm1, fm2 = values
        grad[j] = (-f2 + 8.0 * f1 - 8.0 * fm1 + fm2) / (12.0 * step)
    return grad


def _sample_states(n: int, samples: int, seed: int) -> List[QubitState]:
    seeds = np.random.SeedSequence(seed).generate_state(samples)
    return [random_state(n, int(s)) for s in seeds]


def _set_rank(rows_per_sample: List[List[np.ndarray]], policy: RankPolicy) -> int:
    if not rows_per_sample or not rows_per_sample[0]:
        return 0
    return max(numerical_rank(np.vstack(rows), policy) for rows in rows_per_sample)


def functional_independence(patterns: Sequence, n: int, samples: int = DEFAULT_SAMPLES,
                            seed: int = DEFAULT_SEED, policy: RankPolicy = DEFAULT_POLICY) -> int:
    """Max over sampled random states of the numerical rank of the invariants' Jacobian."""
    for p in patterns:
        if isinstance(p, ContractionPattern) and p.n != n:
            raise DimensionError(f"pattern {p.label!r} has {p.n} slots, expected {n}")
    states = _sample_states(n, samples, seed)
    rows = [[gradient_row(p, s) for p in patterns] for s in states]
    return _set_rank(rows, policy)


def complete_patterns(candidates: Sequence[ContractionPattern], n: int, target: int,
                      samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                      policy: RankPolicy = DEFAULT_POLICY) -> List[ContractionPattern]:
    """
    Keep the candidates that raise the Jacobian rank, then add degree-4 patterns
    until the rank reaches target.
    """
    start_time = time.time()
    states = _sample_states(n, samples, seed)
    chosen: List[ContractionPattern] = []
    rows: List[List[np.ndarray]] = [[] for _ in states]
    rank = 0

    def try_add(pattern: ContractionPattern) -> bool:
        nonlocal rank
        trial = [r + [gradient_row(pattern, s)] for r, s in zip(rows, states)]
        trial_rank = _set_rank(trial, policy)
        if trial_rank <= rank:
            logger.debug(f"Pattern {pattern.label} {pattern.perms} adds no rank; dropped")
            return False
        rows[:] = trial
        rank = trial_rank
        chosen.append(pattern)
        return True

    for pattern in candidates:
        if rank >= target:
            break
        if not try_add(pattern):
            logger.info(f"Built-in pattern {pattern.label} is functionally dependent; replacing it")

    extra = 0
    for pattern in _octic_candidates(n):
        if rank >= target:
            break
        labelled = ContractionPattern(pattern.n, pattern.degree, pattern.perms, f"K8{chr(ord('a') + extra)}")
        if try_add(labelled):
            extra += 1
            logger.info(f"Added degree-4 pattern {labelled.to_dict()['perms']}")

    if rank < target:
        logger.warning(f"⚠️ Pattern completion reached rank {rank} of {target} for n={n}")
    logger.info(f"✅ {rank} independent patterns for n={n} in {time.time() - start_time:.2f} seconds")
    return chosen


# =============================================================================
# INVARIANCE CHECKS
# =============================================================================

def check_I3_relation(state: QubitState) -> float:
    """|I3 - (3 I1 I2 - I1^3)/2| / max(1, |I3|) from Cayley-Hamilton on the 2x2 alpha alpha^dagger."""
    if state.n != 2:
        raise DimensionError(f"the I3 relation needs n=2, got n={state.n}")
    i1 = evaluate_invariant(trace_power_pattern(1), state).real
    i2 = evaluate_invariant(trace_power_pattern(2), state).real
    i3 = evaluate_invariant(trace_power_pattern(3), state).real
    return abs(i3 - 0.5 * (3.0 * i1 * i2 - i1 ** 3)) / max(1.0, abs(i3))


def invariance_test(pattern: Union[ContractionPattern, Callable[[QubitState], complex]], state: QubitState,
                    trials: int = DEFAULT_TRIALS, seed: int = DEFAULT_SEED) -> float:
    """Max relative deviation of the pattern value over seeded random local unitaries."""
    evaluate = (lambda s: evaluate_invariant(pattern, s)) if isinstance(pattern, ContractionPattern) else pattern
    reference = complex(evaluate(state))
    scale = max(1.0, abs(reference))
    streams = np.random.SeedSequence(seed).spawn(trials)

    def deviation(stream) -> float:
        rng = np.random.default_rng(stream)
        moved = apply_local(state, random_local_unitaries(state.n, rng))
        return abs(complex(evaluate(moved)) - reference) / scale

    with concurrent.futures.ThreadPoolExecutor(max_workers=MAX_WORKERS) as executor:
        deviations = list(executor.map(deviation, streams))
    return max(deviations) if deviations else 0.0


# =============================================================================
# FINGERPRINTS
# =============================================================================

@dataclass(frozen=True)
class InvariantFingerprint:
    n: int
    norm_sq: float
    values: Tuple[Tuple[str, float], ...]
    orbit_dim: int
    stabilizer_dim: int

    def value(self, label: str) -> float:
        for name, v in self.values:
            if name == label:
                return v
        raise KeyError(label)

    def gap(self, other: "InvariantFingerprint") -> float:
        """Largest componentwise difference; the norm is compared relatively."""
        if self.n != other.n or [l for l, _ in self.values] != [l for l, _ in other.values]:
            return math.inf
        gaps = [abs(self.norm_sq - other.norm_sq) / max(1.0, abs(self.norm_sq), abs(other.norm_sq))]
        gaps.extend(abs(a - b) for (_, a), (_, b) in zip(self.values, other.values))
        return max(gaps)

    def matches(self, other: "InvariantFingerprint", tol: float) -> bool:
        return (self.orbit_dim == other.orbit_dim and self.stabilizer_dim == other.stabilizer_dim
                and self.gap(other) <= tol)

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "norm_sq": self.norm_sq,
            "values": [{"label": label, "value": value} for label, value in self.values],
            "orbit_dim": self.orbit_dim,
            "stabilizer_dim": self.stabilizer_dim,
        }


def fingerprint(state: QubitState, policy: RankPolicy = DEFAULT_POLICY) -> InvariantFingerprint:
    """Built-in invariants of the normalized state, the norm kept separately, plus orbit data."""
    unit = state.normalized()
    values = tuple((p.label, evaluate_invariant(p, unit).real) for p in builtin_patterns(state.n))
    report = orbit_report(state, DEFAULT_MODE, policy)
    return InvariantFingerprint(
        n=state.n,
        norm_sq=norm_sq(state),
        values=values,
        orbit_dim=report.orbit_dim,
        stabilizer_dim=report.stabilizer_dim,
    )
