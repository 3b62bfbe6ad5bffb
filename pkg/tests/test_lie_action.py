import numpy as np
import pytest

from orbit_forge.config import RankPolicy
from orbit_forge.errors import DimensionError, NumericalError, ParameterError
from orbit_forge.lie_action import (SIGMA_X, SIGMA_Y, SIGMA_Z, combine, count_bounds, generators,
                                    invariant_count, numerical_rank, orbit_dimension, orbit_report, single_site,
                                    stabilizer_basis, tangent_matrix, tangent_vector)
from orbit_forge.statespace import QubitState, catalog_state, embed_real, random_state


def test_generator_counts_and_labels():
    reduced = generators(3)
    assert len(reduced) == 10
    assert reduced.labels[:3] == ["σx@1", "σy@1", "σz@1"]
    assert reduced.labels[-1] == "identity"

    full = generators(3, "full")
    assert len(full) == 12
    assert full.labels[3] == "1@1"


def test_unknown_mode():
    with pytest.raises(ParameterError):
        generators(2, "half")


def test_generator_coordinates_are_unit_vectors():
    coords = np.array([g.coordinates() for g in generators(2)])
    np.testing.assert_allclose(coords, np.eye(7), atol=1e-15)


def test_element_must_be_hermitian():
    with pytest.raises(ParameterError):
        single_site(1, 0, np.array([[0, 1], [0, 0]]), "raising")


def test_apply_matches_dense_matrix(rng):
    state = random_state(3, 2)
    element = combine(rng.normal(size=10), list(generators(3)), "mix")
    np.testing.assert_allclose(element.apply(state.amplitudes), element.matrix @ state.amplitudes, atol=1e-13)


def test_single_spin_tangent_vectors(rng):
    gens = generators(1, "full")
    for _ in range(20):
        c1, d1, c2, d2 = rng.normal(size=4)
        state = QubitState(1, [c1 + 1j * d1, c2 + 1j * d2])
        expected = {
            "σx@1": [-d2, c2, -d1, c1],
            "σy@1": [c2, d2, -c1, -d1],
            "σz@1": [-d1, c1, d2, -c2],
            "1@1": [-d1, c1, -d2, c2],
        }
        for element in gens:
            np.testing.assert_allclose(tangent_vector(element, state).coords, expected[element.label], atol=1e-14)


def test_single_spin_dependence_relation(rng):
    # (r . sigma) psi = |psi|^2 psi with r the unnormalised Bloch vector
    gens = generators(1, "full")
    for _ in range(100):
        state = QubitState(1, rng.normal(size=2) + 1j * rng.normal(size=2))
        psi = state.amplitudes
        bloch = [np.vdot(psi, p @ psi).real for p in (SIGMA_X, SIGMA_Y, SIGMA_Z)]
        rows = tangent_matrix(gens, state)
        relation = bloch[0] * rows[0] + bloch[1] * rows[1] + bloch[2] * rows[2] - np.vdot(psi, psi).real * rows[3]
        assert np.max(np.abs(relation)) <= 1e-12


def test_two_qubit_tangent_vectors_match_dense_action():
    state = random_state(2, 11)
    for element in generators(2):
        dense = embed_real(QubitState(2, 1j * element.matrix @ state.amplitudes)).coords
        np.testing.assert_allclose(tangent_vector(element, state).coords, dense, atol=1e-14)


def test_first_spin_sigma_x_tangent_vector(rng):
    element = single_site(2, 0, SIGMA_X, "x1")
    for _ in range(20):
        c11, c12, c21, c22, d11, d12, d21, d22 = rng.normal(size=8)
        state = QubitState(2, [c11 + 1j * d11, c12 + 1j * d12, c21 + 1j * d21, c22 + 1j * d22])
        expected = [-d21, c21, -d22, c22, -d11, c11, -d12, c12]
        np.testing.assert_allclose(tangent_vector(element, state).coords, expected, atol=1e-14)


def test_tangent_vector_checks_sizes():
    with pytest.raises(DimensionError):
        tangent_vector(generators(2)[0], random_state(3, 0))


@pytest.mark.parametrize("n, orbit, invariants", [(1, 3, 1), (2, 6, 2), (3, 10, 6)])
def test_generic_orbit_dimensions(n, orbit, invariants):
    for seed in range(20):
        state = random_state(n, seed)
        assert orbit_dimension(state) == orbit
        assert invariant_count(state) == invariants


def test_full_mode_gives_same_orbit():
    state = random_state(3, 5)
    report = orbit_report(state, "full")
    assert report.orbit_dim == 10
    assert report.stabilizer_dim == 2


def test_orbit_dimension_ignores_norm():
    state = random_state(2, 3)
    assert orbit_dimension(state.scaled(1e-6)) == orbit_dimension(state.scaled(1e6)) == 6


def test_zero_state_report():
    report = orbit_report(QubitState(2, np.zeros(4)))
    assert report.orbit_dim == 0
    assert report.stabilizer_dim == 7
    assert report.invariant_count == 8


def test_ghz_report(ghz):
    report = orbit_report(ghz)
    assert (report.orbit_dim, report.invariant_count, report.stabilizer_dim) == (8, 8, 2)
    assert report.to_dict()["mode"] == "reduced"


@pytest.mark.parametrize("n", range(1, 7))
def test_count_bounds_formula(n):
    assert count_bounds(n) == (2 ** (n + 1) - 4 * n, 2 ** (n + 1) - (3 * n + 1))


def test_count_bounds_values():
    assert count_bounds(1) == (0, 0)
    assert count_bounds(2) == (0, 1)
    assert count_bounds(3) == (4, 6)
    assert count_bounds(4) == (16, 19)


@pytest.mark.parametrize("n", [0, -1, 1.5, True])
def test_count_bounds_rejects_bad_n(n):
    with pytest.raises(ParameterError):
        count_bounds(n)


def test_numerical_rank_policy():
    matrix = np.diag([1.0, 1e-6, 1e-12])
    assert numerical_rank(matrix) == 2
    assert numerical_rank(matrix, RankPolicy(rel_tol=1e-3)) == 1
    assert numerical_rank(np.zeros((0, 3))) == 0


def test_numerical_rank_rejects_nan():
    with pytest.raises(NumericalError):
        numerical_rank(np.array([[1.0, np.nan]]))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_rank_nullity(n):
    for seed in range(5):
        state = random_state(n, seed)
        assert stabilizer_basis(state).dim + orbit_dimension(state) == 3 * n + 1


def test_singlet_stabilizer_spans_diagonal_rotations(singlet):
    basis = stabilizer_basis(singlet)
    assert basis.dim == 3
    for element in basis.elements:
        assert np.max(np.abs(element.apply(singlet.amplitudes))) <= 1e-12
    projector = basis.coefficients.T @ basis.coefficients
    for a in range(3):
        diagonal = np.zeros(7)
        diagonal[a] = diagonal[3 + a] = 1 / np.sqrt(2)
        np.testing.assert_allclose(projector @ diagonal, diagonal, atol=1e-10)


def test_stabilizer_of_family_with_a_zero():
    state = catalog_state("family4", (0, 0.7 + 0.2j, 1.1, -0.4j))
    basis = stabilizer_basis(state)
    assert basis.dim == 1
    expected = np.zeros(10)
    expected[[2, 5, 8, 9]] = [1, -1, 1, 1]
    expected /= 2
    assert abs(basis.coefficients[0] @ expected) == pytest.approx(1.0, abs=1e-10)


def test_stabilizer_of_ghz(ghz):
    basis = stabilizer_basis(ghz)
    assert basis.dim == 2
    for element in basis.elements:
        assert np.max(np.abs(element.apply(ghz.amplitudes))) <= 1e-12


def test_stabilizer_of_zero_state_is_everything():
    basis = stabilizer_basis(QubitState(1, [0, 0]))
    assert basis.dim == 4
    assert basis.to_dict()["dim"] == 4
