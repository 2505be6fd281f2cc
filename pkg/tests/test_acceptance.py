import math
import os
import sys
import time
import unittest

import numpy as np

# Add the parent directory to the path to import the package
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from gksl_moments.algebra import (  # noqa: E402
    GeneratorSpec,
    ModeSystem,
    QuadraticCoefficient,
    Statistics,
    drift_matrix,
    random_coefficient,
)
from gksl_moments.gaussian import (  # noqa: E402
    GaussianStateSpec,
    gibbs_candidate,
    normalization,
    stationarity_residuals,
)
from gksl_moments.moments import (  # noqa: E402
    kron_sum,
    moment_generator,
    moment_generator_double_sum,
    propagate_moments,
)
from gksl_moments.oracle import (  # noqa: E402
    apply_generator,
    build_rep,
    evolve,
    extract_moments,
    purity,
    state_factory,
)
from gksl_moments.oracle.dynamics import apply_generator_to  # noqa: E402
from gksl_moments.schemas import InitSpec, Scenario, from_array  # noqa: E402
from gksl_moments.services.scenario_service import ScenarioService  # noqa: E402

BOSON_1 = ModeSystem(1, Statistics.BOSON)
E1 = np.array([[0, 1], [1, 0]], dtype=complex)
DEPHASING = GeneratorSpec.from_matrices(BOSON_1, [E1])


def _unit_spec(system, terms, rng):
    matrices = []
    for _ in range(terms):
        k = random_coefficient(system, rng)
        matrices.append(k / np.linalg.norm(k))
    return GeneratorSpec.from_matrices(system, matrices)


class InvariantChecks:
    """Physical invariants every oracle trajectory must satisfy"""

    def assert_physical(self, spec, states):
        previous = None
        for state in states:
            self.assertLess(abs(state.trace - 1), 1e-9)
            self.assertLess(state.hermiticity_defect(), 1e-9)
            p = purity(state)
            if previous is not None:
                self.assertLessEqual(p, previous + 1e-9)
            previous = p
        rep = states[0].rep
        identity = np.eye(rep.dim) / rep.dim
        self.assertLess(np.linalg.norm(apply_generator_to(spec, rep, identity)), 1e-12)


class TestDephasingAgainstOracle(unittest.TestCase, InvariantChecks):
    """
    Coherent state under a single dephasing term
    """

    @classmethod
    def setUpClass(cls):
        cls.rep = build_rep(BOSON_1, cutoff=30)
        cls.rho0 = state_factory(InitSpec(kind="coherent", alpha=[0.5]), cls.rep)
        cls.times = np.linspace(0.0, 5.0, 51)
        start = time.perf_counter()
        cls.states = evolve(DEPHASING, cls.rho0, cls.times)
        cls.oracle_seconds = time.perf_counter() - start

    def _deviation(self, order):
        closed = propagate_moments(
            DEPHASING, extract_moments(self.rho0, self.rep, order), self.times
        )
        oracle = [extract_moments(rho, self.rep, order) for rho in self.states]
        return max(np.max(np.abs(a.values - b.values)) for a, b in zip(closed, oracle))

    def test_first_order(self):
        start = time.perf_counter()
        self.assertLess(self._deviation(1), 1e-6)
        self.assertLess(self.oracle_seconds + time.perf_counter() - start, 10.0)

    def test_second_order(self):
        self.assertLess(self._deviation(2), 1e-6)
        np.testing.assert_allclose(
            moment_generator(DEPHASING, 2), -np.diag([2, 0, 0, 2]), atol=1e-13
        )

    def test_invariants(self):
        self.assert_physical(DEPHASING, self.states)


class TestFermionMomentsAgainstOracle(unittest.TestCase, InvariantChecks):
    def test_random_specs(self):
        rng = np.random.default_rng(2024)
        times = np.linspace(0.0, 1.0, 6)
        start = time.perf_counter()
        for index in range(20):
            system = ModeSystem(1 + index % 3, Statistics.FERMION)
            spec = _unit_spec(system, 1 + index % 3, rng)
            rep = build_rep(system)
            rho0 = state_factory(InitSpec(kind="random-valid", seed=index), rep)
            states = evolve(spec, rho0, times)
            self.assert_physical(spec, states)
            for order in (1, 2):
                closed = propagate_moments(spec, extract_moments(rho0, rep, order), times)
                for a, rho in zip(closed, states):
                    b = extract_moments(rho, rep, order)
                    self.assertLess(np.max(np.abs(a.values - b.values)), 1e-8)
        self.assertLess(time.perf_counter() - start, 60.0)


class TestStructureIdentity(unittest.TestCase):
    def test_double_sum_is_kron_sum_square(self):
        rng = np.random.default_rng(50)
        for index in range(50):
            statistics = Statistics.BOSON if index % 2 else Statistics.FERMION
            system = ModeSystem(1 + index % 2, statistics)
            m = 1 + index % 3
            spec = _unit_spec(system, 1, rng)
            a = drift_matrix(spec.coefficients[0])
            square = kron_sum(a, m) @ kron_sum(a, m)
            double_sum = -2.0 * moment_generator_double_sum(spec, m)
            self.assertLess(np.linalg.norm(double_sum - square), 1e-12)


class TestGibbsStationarity(unittest.TestCase):
    """
    Gaussian states with M = beta K are annihilated by the generator
    """

    def test_fermion(self):
        rng = np.random.default_rng(5)
        for index in range(20):
            system = ModeSystem(1 + index % 2, Statistics.FERMION)
            spec = _unit_spec(system, 1, rng)
            g = gibbs_candidate(spec.coefficients[0], rng.uniform(-1.0, 1.0))
            rep = build_rep(system)
            rho = state_factory(
                InitSpec(kind="gaussian", m_matrix=from_array(g.m_matrix), s=g.s), rep
            )
            self.assertLess(np.linalg.norm(apply_generator(spec, rho)), 1e-8)

    def test_boson(self):
        rng = np.random.default_rng(6)
        rep = build_rep(BOSON_1, cutoff=40)
        for _ in range(20):
            k = random_coefficient(BOSON_1, rng)
            coeff = QuadraticCoefficient(k / np.linalg.norm(k) + 2 * E1, BOSON_1)
            spec = GeneratorSpec(BOSON_1, (coeff,))
            g = gibbs_candidate(coeff, rng.uniform(-1.0, -0.5))
            rho = state_factory(
                InitSpec(kind="gaussian", m_matrix=from_array(g.m_matrix), s=g.s), rep
            )
            self.assertLess(np.linalg.norm(apply_generator(spec, rho)), 1e-6)


class TestCounterexample(unittest.TestCase):
    def test_squeezed_exponent_detected(self):
        m_matrix = np.array([[0.3, -1.0], [-1.0, 0.3]], dtype=complex)
        g = GaussianStateSpec.from_exponent(m_matrix, BOSON_1)
        self.assertGreater(stationarity_residuals(DEPHASING, g)[0], 1e-2)
        rep = build_rep(BOSON_1, cutoff=40)
        rho = state_factory(InitSpec(kind="gaussian", m_matrix=from_array(m_matrix)), rep)
        self.assertGreater(np.linalg.norm(apply_generator(DEPHASING, rho)), 1e-4)


class TestNormalization(unittest.TestCase):
    def test_boson_thermal(self):
        m_matrix = -E1
        s = normalization(m_matrix, BOSON_1)
        self.assertLess(abs(math.exp(s.real) - (math.exp(0.5) - math.exp(-0.5))), 1e-9)
        rep = build_rep(BOSON_1, cutoff=40)
        rho = state_factory(InitSpec(kind="gaussian", m_matrix=from_array(m_matrix)), rep)
        self.assertLess(abs(rho.trace - 1), 1e-6)

    def test_fermion(self):
        system = ModeSystem(1, Statistics.FERMION)
        k = np.array([[0, 1], [-1, 0]], dtype=complex)
        s = normalization(k, system)
        self.assertLess(abs(math.exp(-s.real) - (math.exp(0.5) + math.exp(-0.5))), 1e-12)


class TestIdentitySuite(unittest.TestCase):
    """
    Twenty seeded instances of every operator identity
    """

    def _run(self, statistics, n):
        scenario = Scenario.model_validate(
            {"system": {"statistics": statistics, "n": n}, "lemma_instances": 20, "seed": 11}
        )
        report = ScenarioService(scenario).verify_lemmas()
        for result in report.results:
            self.assertLess(result.max_residual, 1e-10, result.kind)
        self.assertTrue(report.passed)

    def test_fermion(self):
        self._run("fermion", 2)

    def test_boson(self):
        self._run("boson", 1)


if __name__ == "__main__":
    unittest.main()
