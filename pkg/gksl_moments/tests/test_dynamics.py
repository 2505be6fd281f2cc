import os
import sys
import unittest

import numpy as np

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "..")))
from gksl_moments.algebra import (
    GeneratorSpec,
    ModeSystem,
    Statistics,
    random_coefficient,
)
from gksl_moments.config import get_settings
from gksl_moments.errors import InputError, IntegrationError, SizeLimitError, TruncationError
from gksl_moments.oracle.dynamics import (
    RK4,
    SUPEROP_EXPM,
    apply_generator,
    apply_generator_to,
    evolve,
    liouvillian,
)
from gksl_moments.oracle.fock import DensityMatrix, build_rep, extract_moments, purity, state_factory
from gksl_moments.schemas import InitSpec

BOSON_1 = ModeSystem(1, Statistics.BOSON)
FERMION_1 = ModeSystem(1, Statistics.FERMION)
FERMION_2 = ModeSystem(2, Statistics.FERMION)
E1 = np.array([[0, 1], [1, 0]], dtype=complex)
K_FERMION = np.array([[0, 1], [-1, 0]], dtype=complex)


def _unit_spec(system, terms, rng):
    matrices = []
    for _ in range(terms):
        k = random_coefficient(system, rng)
        matrices.append(k / np.linalg.norm(k))
    return GeneratorSpec.from_matrices(system, matrices)


class TestGenerator(unittest.TestCase):
    """
    Action of the double-commutator generator on matrices
    """

    def test_fermion_dephasing_kills_coherence(self):
        rep = build_rep(FERMION_1)
        spec = GeneratorSpec.from_matrices(FERMION_1, [K_FERMION])
        rho = DensityMatrix(0.5 * np.ones((2, 2)), rep)
        out = apply_generator(spec, rho)
        np.testing.assert_allclose(out, [[0, -0.25], [-0.25, 0]], atol=1e-15)

    def test_unital(self):
        rng = np.random.default_rng(8)
        for system, cutoff in ((FERMION_2, 2), (BOSON_1, 10)):
            rep = build_rep(system, cutoff=cutoff)
            spec = _unit_spec(system, 2, rng)
            out = apply_generator_to(spec, rep, np.eye(rep.dim) / rep.dim)
            self.assertLess(np.linalg.norm(out), 1e-12)

    def test_liouvillian_matches_direct_action(self):
        rng = np.random.default_rng(9)
        rep = build_rep(FERMION_2)
        spec = _unit_spec(FERMION_2, 2, rng)
        x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        lv = liouvillian(spec, rep)
        np.testing.assert_allclose(
            (lv @ x.reshape(-1)).reshape(4, 4), apply_generator_to(spec, rep, x), atol=1e-13
        )

    def test_liouvillian_cap(self):
        rep = build_rep(BOSON_1, cutoff=10)
        spec = GeneratorSpec.from_matrices(BOSON_1, [E1])
        with self.assertRaises(SizeLimitError):
            liouvillian(spec, rep, dim_cap=8)


class TestEvolve(unittest.TestCase):
    """
    Oracle integration of the master equation
    """

    def test_dephasing_coherent_state(self):
        rep = build_rep(BOSON_1, cutoff=30)
        spec = GeneratorSpec.from_matrices(BOSON_1, [E1])
        rho0 = state_factory(InitSpec(kind="coherent", alpha=[0.5]), rep)
        times = np.linspace(0, 2, 5)
        states = evolve(spec, rho0, times)
        for t, rho in zip(times, states):
            y = extract_moments(rho, rep, 1)
            self.assertAlmostEqual(y.at(1), 0.5 * np.exp(-t / 2), places=9)

    def test_physical_invariants(self):
        rng = np.random.default_rng(10)
        rep = build_rep(FERMION_2)
        spec = _unit_spec(FERMION_2, 3, rng)
        rho0 = state_factory(InitSpec(kind="random-valid", seed=4), rep)
        states = evolve(spec, rho0, np.linspace(0, 3, 13))
        previous = purity(rho0)
        for rho in states:
            self.assertLess(abs(rho.trace - 1), 1e-9)
            self.assertLess(rho.hermiticity_defect(), 1e-9)
            current = purity(rho)
            self.assertLessEqual(current, previous + 1e-9)
            previous = current

    def test_rk4_agrees_with_superoperator(self):
        rng = np.random.default_rng(11)
        rep = build_rep(FERMION_2)
        spec = _unit_spec(FERMION_2, 2, rng)
        rho0 = state_factory(InitSpec(kind="random-valid", seed=5), rep)
        times = [0.0, 0.4, 1.0]
        exact = evolve(spec, rho0, times, method=SUPEROP_EXPM)
        stepped = evolve(spec, rho0, times, method=RK4)
        for a, b in zip(exact, stepped):
            np.testing.assert_allclose(a.rho, b.rho, atol=1e-6)

    def test_non_uniform_grid(self):
        rep = build_rep(FERMION_1)
        spec = GeneratorSpec.from_matrices(FERMION_1, [K_FERMION])
        rho0 = DensityMatrix(0.5 * np.ones((2, 2)), rep)
        times = [0.0, 0.5, 2.0]
        for rho, t in zip(evolve(spec, rho0, times), times):
            self.assertAlmostEqual(rho.rho[0, 1].real, 0.5 * np.exp(-0.5 * t), places=12)

    def test_default_method_falls_back_to_rk4(self):
        rep = build_rep(FERMION_2)
        spec = GeneratorSpec.from_matrices(FERMION_2, [np.zeros((4, 4))])
        rho0 = state_factory(InitSpec(kind="random-valid", seed=6), rep)
        states = evolve(spec, rho0, [0.0, 1.0], dim_cap=2)
        np.testing.assert_allclose(states[1].rho, rho0.rho)

    def test_rk4_step_budget(self):
        rep = build_rep(BOSON_1, cutoff=20)
        spec = GeneratorSpec.from_matrices(BOSON_1, [E1])
        rho0 = state_factory(InitSpec(kind="vacuum"), rep)
        budget = get_settings().rk4_max_steps
        # ||L|| grows like cutoff^2, so a long horizon overruns the budget
        with self.assertRaises(IntegrationError):
            evolve(spec, rho0, [0.0, budget], method=RK4)

    def test_truncation_alarm(self):
        rep = build_rep(BOSON_1, cutoff=3)
        spec = GeneratorSpec.from_matrices(BOSON_1, [E1])
        rho0 = state_factory(InitSpec(kind="fock", occupations=[2]), rep)
        with self.assertRaises(TruncationError):
            evolve(spec, rho0, [0.0, 1.0])

    def test_unknown_method(self):
        rep = build_rep(FERMION_1)
        spec = GeneratorSpec.from_matrices(FERMION_1, [K_FERMION])
        rho0 = state_factory(InitSpec(kind="vacuum"), rep)
        with self.assertRaises(InputError):
            evolve(spec, rho0, [0.0, 1.0], method="euler")

    def test_system_mismatch(self):
        rep = build_rep(FERMION_1)
        spec = GeneratorSpec.from_matrices(BOSON_1, [E1])
        rho0 = state_factory(InitSpec(kind="vacuum"), rep)
        with self.assertRaises(InputError):
            evolve(spec, rho0, [0.0, 1.0])


if __name__ == "__main__":
    unittest.main()
