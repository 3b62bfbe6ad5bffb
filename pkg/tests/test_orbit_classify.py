import math

import numpy as np
import pytest

from orbit_forge.errors import DimensionError
from orbit_forge.lie_action import SIGMA_X, SIGMA_Y, SIGMA_Z, LieElement, generators, orbit_dimension, single_site
from orbit_forge.orbit_classify import (CASE_TABLE_COLUMNS, FAMILY4_CASES, bracket, classify_stabilizer, family_case,
                                        family4_case_table, flip_symmetry, render_case_table,
                                        specialization_chains, stabilizer_label)
from orbit_forge.statespace import QubitState, catalog_state, random_state


def test_pauli_bracket():
    x, y = single_site(1, 0, SIGMA_X, "x"), single_site(1, 0, SIGMA_Y, "y")
    np.testing.assert_allclose(bracket(x, y).blocks[0], 2 * SIGMA_Z, atol=1e-15)


def test_bracket_is_antisymmetric():
    gens = generators(2)
    mixed = gens[0]
    for element in gens:
        np.testing.assert_allclose(bracket(element, element).matrix, 0, atol=1e-15)
        np.testing.assert_allclose(bracket(mixed, element).coordinates(), -bracket(element, mixed).coordinates(),
                                   atol=1e-15)


def test_disjoint_sites_commute():
    a = single_site(2, 0, SIGMA_X, "x1")
    b = single_site(2, 1, SIGMA_Y, "y2")
    np.testing.assert_allclose(bracket(a, b).matrix, 0, atol=1e-15)


def test_bracket_matches_dense_commutator(rng):
    gens = list(generators(3))
    a = LieElement(3, sum(c * g.blocks for c, g in zip(rng.normal(size=10), gens)), 0.3, "a")
    b = LieElement(3, sum(c * g.blocks for c, g in zip(rng.normal(size=10), gens)), -1.0, "b")
    dense = -1j * (a.matrix @ b.matrix - b.matrix @ a.matrix)
    np.testing.assert_allclose(bracket(a, b).matrix, dense, atol=1e-12)


def test_bracket_needs_same_size():
    with pytest.raises(DimensionError):
        bracket(generators(1)[0], generators(2)[0])


@pytest.mark.parametrize("dim, derived, label", [
    (0, 0, "trivial"), (1, 0, "u1"), (2, 0, "u1^2"), (3, 0, "u1^3"), (5, 0, "u1^5"),
    (3, 3, "su2"), (4, 3, "u1+su2"), (6, 6, "unclassified(6,6)"), (2, 1, "unclassified(2,1)"),
])
def test_label_mapping(dim, derived, label):
    assert stabilizer_label(dim, derived) == label


def test_singlet_is_su2(singlet):
    report = classify_stabilizer(singlet)
    assert (report.dim, report.derived_dim, report.label) == (3, 3, "su2")
    assert report.closure_residual <= 1e-8


def test_product_is_abelian(product3):
    report = classify_stabilizer(product3)
    assert (report.dim, report.derived_dim, report.label) == (3, 0, "u1^3")


def test_generic_state_is_trivial(random3):
    report = classify_stabilizer(random3)
    assert report.label == "trivial"
    assert report.closure_residual == 0.0


def test_ghz(ghz):
    report = classify_stabilizer(ghz)
    assert report.label == "u1^2"
    assert report.flip_symmetric
    assert report.flip_phase == pytest.approx(0.0, abs=1e-15)
    assert report.to_dict()["basis"]["dim"] == 2


def test_flip_symmetry_examples(ghz, product3):
    flag, phase = flip_symmetry(ghz)
    assert flag and phase == pytest.approx(0.0, abs=1e-15)

    flag, phase = flip_symmetry(catalog_state("family4", (1 / math.sqrt(2), -1 / math.sqrt(2), 0, 0)))
    assert flag and phase == pytest.approx(math.pi)

    assert flip_symmetry(product3) == (False, None)


def test_maximally_entangled_pair_with_spectator():
    report = classify_stabilizer(catalog_state("family4", (0, 0, 0.6, 0.6j)))
    assert (report.dim, report.derived_dim, report.label) == (4, 3, "u1+su2")
    assert report.closure_residual <= 1e-8


def test_rank_nullity_for_fixtures(singlet, ghz, product3, random3):
    for state in (singlet, ghz, product3, random3, catalog_state("w"), random_state(4, 0)):
        assert classify_stabilizer(state).dim + orbit_dimension(state) == 3 * state.n + 1


def test_labels_are_local_unitary_invariant(singlet, ghz, product3, rotate):
    fixtures = [singlet, ghz, product3, catalog_state("family4", (0, 0, 0.6, 0.6j)), catalog_state("w")]
    for state in fixtures:
        expected = classify_stabilizer(state)
        for seed in range(10):
            moved = classify_stabilizer(rotate(state, seed))
            assert (moved.dim, moved.derived_dim, moved.label) == (expected.dim, expected.derived_dim,
                                                                   expected.label)


def test_full_mode_report(singlet):
    report = classify_stabilizer(singlet, mode="full")
    assert report.mode == "full"
    assert report.dim == 8 - orbit_dimension(singlet, "full")


def test_zero_state_is_everything():
    report = classify_stabilizer(QubitState(1, [0, 0]))
    assert report.dim == 4
    assert report.flip_symmetric


# =============================================================================
# CASE TABLE
# =============================================================================

@pytest.fixture(scope="module")
def case_table():
    return family4_case_table(samples=4, seed=11)


def test_case_table_shape(case_table):
    assert list(case_table.columns) == CASE_TABLE_COLUMNS
    assert len(case_table) == 4 * len(FAMILY4_CASES)


def test_case_table_dimensions(case_table):
    for row in case_table.itertuples():
        case = family_case(row.case)
        assert row.measured_dim == case.expected_dim, row.case
        assert row.label == case.expected_label, row.case
        assert row.flip == case.expected_flip, row.case


def test_case_table_is_seeded():
    first = family4_case_table(samples=1, seed=3)
    second = family4_case_table(samples=1, seed=3)
    assert first.equals(second)


def test_specialization_never_loses_symmetry(case_table):
    dims = case_table.groupby("case")["measured_dim"]
    low, high = dims.min(), dims.max()
    for chain in specialization_chains():
        for general, special in zip(chain, chain[1:]):
            assert high[general] <= low[special], (general, special)


def test_render_case_table(case_table):
    text = render_case_table(case_table)
    assert text.splitlines()[0].split() == CASE_TABLE_COLUMNS
    assert "u1+su2" in text
