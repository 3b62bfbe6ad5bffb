"""
End-to-end checks of the published numbers at reduced batch sizes; thresholds are unchanged.
"""
import math

import numpy as np
import pytest

from orbit_forge.canonical_forms import canonical_3q, lu_equivalent, schmidt_2q
from orbit_forge.config import OptimizerConfig
from orbit_forge.invariants import (broken_probe, builtin_patterns, check_I3_relation, evaluate_invariant,
                                    fingerprint, invariance_test, trace_power_pattern)
from orbit_forge.lie_action import count_bounds, invariant_count, orbit_dimension, stabilizer_basis
from orbit_forge.orbit_classify import classify_stabilizer, family4_case_table, family_case
from orbit_forge.statespace import apply_local, catalog_state, random_local_unitaries, random_state

SEEDS = range(30)


@pytest.mark.parametrize("n, orbit, invariants", [(1, 3, 1), (2, 6, 2), (3, 10, 6)])
def test_generic_orbit_dimensions_and_invariant_counts(n, orbit, invariants):
    for seed in SEEDS:
        state = random_state(n, 1000 + seed)
        assert orbit_dimension(state) == orbit
        assert invariant_count(state) == invariants
        assert stabilizer_basis(state).dim + orbit == 3 * n + 1


def test_bounds_table():
    assert [count_bounds(n) for n in range(1, 7)] == [(0, 0), (0, 1), (4, 6), (16, 19), (44, 48), (104, 109)]


def test_i3_relation_batch():
    assert max(check_I3_relation(random_state(2, seed)) for seed in range(300)) <= 1e-10


def test_schmidt_consistency_batch():
    for seed in range(300):
        state = random_state(2, seed)
        form = schmidt_2q(state)
        i1 = evaluate_invariant(trace_power_pattern(1), state).real
        i2 = evaluate_invariant(trace_power_pattern(2), state).real
        assert i1 == pytest.approx(form.N ** 2, rel=1e-10)
        assert i2 == pytest.approx(form.N ** 4 * (math.cos(form.phi) ** 4 + math.sin(form.phi) ** 4), rel=1e-10)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_invariance_suite(n):
    for seed in range(3):
        state = random_state(n, 500 + seed)
        for pattern in builtin_patterns(n):
            assert invariance_test(pattern, state, trials=100, seed=seed) <= 1e-9


def test_negative_control():
    deviations = [invariance_test(broken_probe, random_state(3, seed), trials=10, seed=seed) for seed in range(60)]
    assert sum(d >= 1e-3 for d in deviations) >= 0.95 * len(deviations)


def test_case_table_dimensions():
    table = family4_case_table(samples=5, seed=2024)
    assert (table["measured_dim"] == table["expected_dim"]).all()
    for row in table.itertuples():
        case = family_case(row.case)
        assert row.label == case.expected_label
        assert bool(row.flip) == case.expected_flip


def test_singlet_stabilizer():
    singlet = catalog_state("singlet")
    report = classify_stabilizer(singlet)
    assert (report.dim, report.label) == (3, "su2")
    for element in report.basis.elements:
        assert np.max(np.abs(element.apply(singlet.amplitudes))) <= 1e-12


def test_canonicalization_batch():
    for seed in range(30):
        state = random_state(3, 2000 + seed)
        form = canonical_3q(state)
        assert form.residual <= 1e-8
        assert fingerprint(form.state()).gap(fingerprint(state)) <= 1e-8


@pytest.mark.slow
def test_equivalence_decisions():
    config = OptimizerConfig(restarts=4, seed=1)
    rng = np.random.default_rng(77)
    for seed in range(20):
        state = random_state(3, 3000 + seed)
        partner = apply_local(state, random_local_unitaries(3, rng))
        verdict = lu_equivalent(state, partner, search=True, config=config)
        assert verdict.fingerprints_match
        assert verdict.witness.residual <= 1e-6

        stranger = random_state(3, 4000 + seed)
        assert not lu_equivalent(state, stranger).fingerprints_match


@pytest.mark.slow
def test_four_qubit_generic_orbit_is_constant():
    dims = {orbit_dimension(random_state(4, seed)) for seed in range(20)}
    assert len(dims) == 1
    assert dims.pop() == 13
    assert count_bounds(4)[1] == 19
