import math
import os
import sys
import unittest

import numpy as np

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "..")))
from gksl_moments.algebra import ModeSystem, QuadraticCoefficient, Statistics
from gksl_moments.errors import InputError, SizeLimitError, StateValidityError, TruncationError
from gksl_moments.linalg import anticomm
from gksl_moments.oracle.fock import (
    DensityMatrix,
    annihilation,
    build_rep,
    check_density,
    edge_population,
    extract_moments,
    linear_form,
    purity,
    quadratic_operator,
    state_factory,
)
from gksl_moments.schemas import InitSpec, from_array

BOSON_1 = ModeSystem(1, Statistics.BOSON)
FERMION_1 = ModeSystem(1, Statistics.FERMION)
FERMION_2 = ModeSystem(2, Statistics.FERMION)
E1 = np.array([[0, 1], [1, 0]], dtype=complex)
K_FERMION = np.array([[0, 1], [-1, 0]], dtype=complex)


class TestRepresentation(unittest.TestCase):
    """
    Operator matrices for bosonic and fermionic modes
    """

    def test_ladder_matrix(self):
        a = annihilation(4)
        np.testing.assert_allclose(np.diag(a, k=1), np.sqrt([1, 2, 3]))
        commutator = a @ a.conj().T - a.conj().T @ a
        np.testing.assert_allclose(np.diag(commutator)[:3], np.ones(3), atol=1e-14)
        self.assertAlmostEqual(commutator[3, 3].real, -3.0, places=14)

    def test_fermion_anticommutators(self):
        rep = build_rep(FERMION_2)
        c = rep.ops[:2]
        eye = np.eye(4)
        for i in range(2):
            for j in range(2):
                np.testing.assert_array_equal(anticomm(c[i], c[j].conj().T), eye * (i == j))
                np.testing.assert_array_equal(anticomm(c[i], c[j]), np.zeros((4, 4)))

    def test_jordan_wigner_string(self):
        rep = build_rep(FERMION_2)
        sigma_minus = np.array([[0, 1], [0, 0]])
        np.testing.assert_array_equal(rep.ops[0], np.kron(sigma_minus, np.eye(2)))
        np.testing.assert_array_equal(rep.ops[1], np.kron(np.diag([1, -1]), sigma_minus))

    def test_mode_one_most_significant(self):
        rep = build_rep(ModeSystem(2), cutoff=3)
        np.testing.assert_array_equal(rep.occupations[:4], [[0, 0], [0, 1], [0, 2], [1, 0]])
        self.assertEqual(rep.dim, 9)

    def test_dimension_cap(self):
        with self.assertRaises(SizeLimitError):
            build_rep(ModeSystem(3), cutoff=10)
        with self.assertRaises(SizeLimitError):
            build_rep(ModeSystem(9, Statistics.FERMION))

    def test_cutoff_too_small(self):
        with self.assertRaises(InputError):
            build_rep(BOSON_1, cutoff=1)

    def test_quadratic_operator_fermion_dephasing(self):
        rep = build_rep(FERMION_1)
        c = quadratic_operator(QuadraticCoefficient(K_FERMION, FERMION_1), rep)
        np.testing.assert_array_equal(c, np.diag([0.5, -0.5]))

    def test_quadratic_operator_boson_number(self):
        rep = build_rep(BOSON_1, cutoff=5)
        c = quadratic_operator(QuadraticCoefficient(E1, BOSON_1), rep)
        # a a^+ loses its top entry under truncation
        np.testing.assert_allclose(np.diag(c).real, [0.5, 1.5, 2.5, 3.5, 2.0], atol=1e-14)

    def test_linear_form(self):
        rep = build_rep(BOSON_1, cutoff=3)
        f = linear_form([2.0, 1j], rep)
        np.testing.assert_allclose(f, 2 * rep.ops[0] + 1j * rep.ops[1])

    def test_system_mismatch(self):
        rep = build_rep(FERMION_1)
        with self.assertRaises(InputError):
            quadratic_operator(QuadraticCoefficient(E1, BOSON_1), rep)


class TestStates(unittest.TestCase):
    """
    Initial-state factory and density-matrix checks
    """

    def test_vacuum_moments(self):
        rep = build_rep(BOSON_1, cutoff=6)
        rho = state_factory(InitSpec(kind="vacuum"), rep)
        y = extract_moments(rho, rep, 2)
        np.testing.assert_allclose(y.values, [0, 1, 0, 0], atol=1e-15)
        self.assertEqual(purity(rho), 1.0)

    def test_coherent_moments(self):
        rep = build_rep(BOSON_1, cutoff=30)
        rho = state_factory(InitSpec(kind="coherent", alpha=[0.5]), rep)
        y1 = extract_moments(rho, rep, 1)
        np.testing.assert_allclose(y1.values, [0.5, 0.5], atol=1e-12)
        y2 = extract_moments(rho, rep, 2)
        np.testing.assert_allclose(y2.values, [0.25, 1.25, 0.25, 0.25], atol=1e-12)

    def test_coherent_truncation_alarm(self):
        rep = build_rep(BOSON_1, cutoff=4)
        with self.assertRaises(TruncationError) as ctx:
            state_factory(InitSpec(kind="coherent", alpha=[1.5]), rep)
        self.assertGreater(ctx.exception.tail_mass, 1e-6)

    def test_coherent_fermion_rejected(self):
        with self.assertRaises(InputError):
            state_factory(InitSpec(kind="coherent", alpha=[0.5]), build_rep(FERMION_1))

    def test_thermal_occupation(self):
        rep = build_rep(BOSON_1, cutoff=40)
        rho = state_factory(InitSpec(kind="thermal", lambdas=[1.0]), rep)
        self.assertAlmostEqual(
            extract_moments(rho, rep, 2).at(2, 1).real, 1 / (math.e - 1), places=12
        )

    def test_fock_state(self):
        rep = build_rep(ModeSystem(2), cutoff=3)
        rho = state_factory(InitSpec(kind="fock", occupations=[1, 2]), rep)
        y = extract_moments(rho, rep, 2)
        self.assertAlmostEqual(y.at(3, 1).real, 1.0)
        self.assertAlmostEqual(y.at(4, 2).real, 2.0)

    def test_fock_out_of_range(self):
        with self.assertRaises(InputError):
            state_factory(InitSpec(kind="fock", occupations=[3]), build_rep(BOSON_1, cutoff=3))

    def test_gaussian_boson_trace(self):
        rep = build_rep(BOSON_1, cutoff=40)
        rho = state_factory(InitSpec(kind="gaussian", m_matrix=from_array(-E1)), rep)
        self.assertAlmostEqual(rho.trace.real, 1.0, delta=1e-6)

    def test_gaussian_matches_thermal_up_to_the_cutoff(self):
        rep = build_rep(BOSON_1, cutoff=20)
        for lam in (1.0, 0.8):
            init = InitSpec(kind="gaussian", m_matrix=from_array(-lam * E1))
            gaussian = state_factory(init, rep)
            thermal = state_factory(InitSpec(kind="thermal", lambdas=[lam]), rep)
            expected = np.exp(-lam * np.arange(20)) * (1 - np.exp(-lam))
            np.testing.assert_allclose(np.diag(gaussian.rho).real, expected, atol=1e-12)
            np.testing.assert_allclose(gaussian.rho, thermal.rho, atol=1e-6)
            self.assertLessEqual(gaussian.trace.real, 1.0 + 1e-12)
            self.assertAlmostEqual(gaussian.trace.real, 1 - np.exp(-20 * lam), delta=1e-12)

    def test_gaussian_fermion_maximally_mixed(self):
        rep = build_rep(FERMION_2)
        rho = state_factory(InitSpec(kind="gaussian", m_matrix=from_array(np.zeros((4, 4)))), rep)
        np.testing.assert_allclose(rho.rho, np.eye(4) / 4, atol=1e-15)

    def test_gaussian_invalid_exponent(self):
        with self.assertRaises(StateValidityError):
            state_factory(
                InitSpec(kind="gaussian", m_matrix=from_array(E1)), build_rep(BOSON_1, cutoff=5)
            )

    def test_random_valid(self):
        for system, cutoff in ((FERMION_2, 2), (ModeSystem(2), 5)):
            rep = build_rep(system, cutoff=cutoff)
            rho = state_factory(InitSpec(kind="random-valid", seed=11), rep)
            self.assertAlmostEqual(rho.trace.real, 1.0, places=12)
            self.assertLess(rho.hermiticity_defect(), 1e-12)
            self.assertGreater(rho.min_eigenvalue(), -1e-12)
            self.assertEqual(edge_population(rho), 0.0)

    def test_random_valid_reproducible(self):
        rep = build_rep(FERMION_2)
        a = state_factory(InitSpec(kind="random-valid", seed=3), rep)
        b = state_factory(InitSpec(kind="random-valid", seed=3), rep)
        np.testing.assert_array_equal(a.rho, b.rho)

    def test_check_density_rejects_non_positive(self):
        rep = build_rep(FERMION_1)
        with self.assertRaises(StateValidityError):
            check_density(DensityMatrix(np.diag([1.5, -0.5]), rep))
        with self.assertRaises(StateValidityError):
            check_density(DensityMatrix(np.diag([0.5, 0.4]), rep))

    def test_edge_population(self):
        rep = build_rep(BOSON_1, cutoff=3)
        rho = DensityMatrix(np.diag([0.5, 0.3, 0.2]), rep)
        self.assertAlmostEqual(edge_population(rho), 0.2)
        self.assertEqual(edge_population(DensityMatrix(np.eye(2) / 2, build_rep(FERMION_1))), 0.0)


class TestMomentExtraction(unittest.TestCase):
    def test_operator_order(self):
        """Moments are tr(op_i op_j rho) with op_i applied last."""
        rep = build_rep(FERMION_1)
        rho = state_factory(InitSpec(kind="fock", occupations=[1]), rep)
        y = extract_moments(rho, rep, 2)
        # <c c^+> = 0 and <c^+ c> = 1 in the occupied state
        self.assertAlmostEqual(y.at(1, 2), 0.0)
        self.assertAlmostEqual(y.at(2, 1), 1.0)

    def test_cap(self):
        rep = build_rep(BOSON_1, cutoff=3)
        rho = state_factory(InitSpec(kind="vacuum"), rep)
        with self.assertRaises(SizeLimitError):
            extract_moments(rho, rep, 3, cap=4)


if __name__ == "__main__":
    unittest.main()
