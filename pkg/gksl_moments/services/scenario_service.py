"""
Scenario Service

Runs the closed-form and oracle pipelines described by a Scenario and turns
their results into CSV trajectories and report models.
"""

import os
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel

from ..algebra import GeneratorSpec, ModeSystem, QuadraticCoefficient, Statistics, random_coefficient
from ..errors import ConfigurationError, TruncationError
from ..gaussian import GaussianStateSpec, normalization, stationarity_report, validate_exponent
from ..linalg import fro_norm
from ..moments import MomentTensor, moment_index_labels, propagate_moments
from ..oracle.dynamics import apply_generator, evolve
from ..oracle.fock import DensityMatrix, FockRep, build_rep, extract_moments, state_factory
from ..oracle.identities import (
    IdentityKind,
    random_linear_forms,
    random_number_conserving_exponent,
    verify_identity,
)
from ..schemas import (
    CompareReport,
    IdentityResult,
    InitSpec,
    LemmaReport,
    OrderDeviation,
    Scenario,
    StationaryReport,
    from_array,
    to_array,
    to_vector,
)
from ..utils.log_helpers import log_artifact_written, log_check_result
from ..utils.logging_config import get_logger

logger = get_logger(__name__)

# Bosonic identity checks use at most this cutoff; the protected block
# stays large enough while products keep rounding well below 1e-10.
LEMMA_BOSON_CUTOFF = 12


class ScenarioService:
    """Service executing one scenario"""

    def __init__(self, scenario: Scenario):
        """Initialize with a validated scenario"""
        self.scenario = scenario
        self.system = ModeSystem(scenario.system.n, Statistics(scenario.system.statistics))
        self.times = scenario.times.points()
        self._spec: Optional[GeneratorSpec] = None
        self._rep: Optional[FockRep] = None

    @property
    def spec(self) -> GeneratorSpec:
        """Generator built from explicit and/or seeded random coefficients."""
        if self._spec is None:
            matrices = [to_array(k) for k in self.scenario.coefficients]
            if self.scenario.random_coefficients:
                rng = np.random.default_rng(self.scenario.seed)
                matrices += [
                    random_coefficient(self.system, rng)
                    for _ in range(self.scenario.random_coefficients)
                ]
            self._spec = GeneratorSpec.from_matrices(
                self.system, matrices, tol=self.scenario.tolerances.symmetry
            )
            logger.info(
                f"Generator built with {len(self._spec)} terms",
                extra={"statistics": self.system.statistics.value, "n": self.system.n},
            )
        return self._spec

    @property
    def rep(self) -> FockRep:
        if self._rep is None:
            oracle = self.scenario.oracle
            self._rep = build_rep(self.system, oracle.cutoff, dim_cap=oracle.dim_cap)
        return self._rep

    def initial_state(self) -> DensityMatrix:
        init = self.scenario.initial
        if init.kind == "random-valid" and init.seed is None:
            init = init.model_copy(update={"seed": self.scenario.seed})
        return state_factory(init, self.rep)

    def initial_moments(self, order: int, state: Optional[DensityMatrix] = None) -> MomentTensor:
        """
        Explicit moments from the scenario, else extracted from the oracle state.
        """
        explicit = self.scenario.explicit_moments or {}
        if order in explicit:
            return MomentTensor(order, self.system, to_vector(explicit[order]))
        if state is None:
            state = self.initial_state()
        return extract_moments(state, self.rep, order)

    def propagate(self) -> Dict[int, List[MomentTensor]]:
        """Closed-form trajectories for every requested order."""
        state = None
        explicit = self.scenario.explicit_moments or {}
        if any(order not in explicit for order in self.scenario.moment_orders):
            state = self.initial_state()
        return {
            order: propagate_moments(
                self.spec,
                self.initial_moments(order, state),
                self.times,
                jobs=self.scenario.jobs,
                reuse_step=self.scenario.jobs == 1,
            )
            for order in self.scenario.moment_orders
        }

    def oracle_moments(self, state: Optional[DensityMatrix] = None) -> Dict[int, List[MomentTensor]]:
        """Oracle trajectories reduced to moments for every requested order."""
        if state is None:
            state = self.initial_state()
        states = evolve(
            self.spec,
            state,
            self.times,
            method=self.scenario.oracle.method,
            dim_cap=self.scenario.oracle.superop_dim_cap,
        )
        return {
            order: [extract_moments(rho, self.rep, order) for rho in states]
            for order in self.scenario.moment_orders
        }

    def compare(self) -> CompareReport:
        """
        Run both pipelines from the same initial state and compare per time.

        A truncation alarm yields verdict 'truncation-alarm' with no pass/fail.
        """
        tolerance = self.scenario.tolerances.compare
        base = dict(
            seed=self.scenario.seed,
            statistics=self.system.statistics.value,
            n=self.system.n,
            tolerance=tolerance,
        )
        try:
            state = self.initial_state()
            oracle = self.oracle_moments(state)
        except TruncationError as e:
            logger.warning(f"Comparison aborted by truncation alarm: {e}")
            return CompareReport(
                **base, verdict="truncation-alarm", tail_mass=e.tail_mass, message=str(e)
            )

        orders = []
        for order in self.scenario.moment_orders:
            closed = propagate_moments(
                self.spec,
                extract_moments(state, self.rep, order),
                self.times,
                jobs=self.scenario.jobs,
                reuse_step=self.scenario.jobs == 1,
            )
            per_time = [
                float(np.max(np.abs(a.values - b.values)))
                for a, b in zip(closed, oracle[order])
            ]
            worst = max(per_time)
            passed = log_check_result(f"moments m={order}", worst, tolerance, order=order)
            orders.append(
                OrderDeviation(order=order, max_deviation=worst, per_time=per_time, passed=passed)
            )

        verdict = "pass" if all(o.passed for o in orders) else "fail"
        return CompareReport(**base, verdict=verdict, orders=orders)

    def stationary(self) -> StationaryReport:
        """
        Stationarity residuals of the scenario's Gaussian exponent, with an
        oracle check of ||L(rho_M)||_F when the oracle is enabled.
        """
        config = self.scenario.stationary
        if config is None:
            raise ConfigurationError("scenario has no 'stationary' section")
        m_matrix = to_array(config.m_matrix)
        validate_exponent(m_matrix, self.system, self.scenario.tolerances.symmetry)
        coefficients = self.spec.coefficients
        s = normalization(
            m_matrix,
            self.system,
            use_literal_k=config.literal_k_normalization,
            k=coefficients[0].k if coefficients else None,
        )
        state = GaussianStateSpec(m_matrix, s, self.system)
        report = stationarity_report(self.spec, state, self.scenario.tolerances.stationarity)

        generator_norm = None
        if self.scenario.oracle.enabled:
            # the oracle state always carries the true normalization of M
            rho = state_factory(InitSpec(kind="gaussian", m_matrix=from_array(m_matrix)), self.rep)
            generator_norm = fro_norm(apply_generator(self.spec, rho))
            log_check_result("||L(rho_M)||_F", generator_norm, self.scenario.tolerances.generator)

        return StationaryReport(
            seed=self.scenario.seed,
            statistics=self.system.statistics.value,
            n=self.system.n,
            residuals=report.residuals,
            relative_residuals=report.relative_residuals,
            s=(s.real, s.imag),
            generator_norm=generator_norm,
            tolerance=report.tolerance,
            verdict="stationary" if report.stationary else "not stationary",
        )

    def verify_lemmas(self) -> LemmaReport:
        """Worst residual of every operator identity over seeded random instances."""
        rng = np.random.default_rng(self.scenario.seed)
        tolerance = self.scenario.tolerances.identity
        instances = self.scenario.lemma_instances
        cutoff = None
        if self.system.is_boson:
            cutoff = min(self.scenario.oracle.cutoff, LEMMA_BOSON_CUTOFF)
        rep = build_rep(self.system, cutoff or 2, dim_cap=self.scenario.oracle.dim_cap)

        results = []
        for kind in IdentityKind:
            worst = 0.0
            for index in range(instances):
                residual = self._identity_instance(kind, index, rep, rng, tolerance)
                worst = max(worst, residual)
            results.append(
                IdentityResult(
                    kind=kind.value,
                    instances=instances,
                    max_residual=worst,
                    passed=log_check_result(kind.value, worst, tolerance),
                )
            )

        return LemmaReport(
            seed=self.scenario.seed,
            statistics=self.system.statistics.value,
            n=self.system.n,
            cutoff=cutoff,
            tolerance=tolerance,
            results=results,
            passed=all(r.passed for r in results),
        )

    def _identity_instance(self, kind, index, rep, rng, tolerance) -> float:
        coeff = self._unit_coefficient(rng)
        if kind is IdentityKind.ADJOINT_DUALITY:
            spec = GeneratorSpec(
                self.system, tuple(self._unit_coefficient(rng) for _ in range(1 + index % 3))
            )
            rho = state_factory(InitSpec(kind="random-valid", seed=int(rng.integers(2**31))), rep)
            x = rng.normal(size=(rep.dim, rep.dim)) + 1j * rng.normal(size=(rep.dim, rep.dim))
            report = verify_identity(
                kind, rep, spec=spec, rho=rho.rho, x=x / np.linalg.norm(x), tol=tolerance
            )
        elif kind is IdentityKind.GAUSSIAN_CONJUGATION:
            if self.system.is_boson:
                m_matrix = random_number_conserving_exponent(self.system.n, rng)
            else:
                m_matrix = 0.5 * self._unit_coefficient(rng).k
            report = verify_identity(kind, rep, coeff=coeff, m_matrix=m_matrix, tol=tolerance)
        else:
            m = 1 if kind is IdentityKind.LINEAR_COMMUTATOR else 1 + index % 2
            fs = random_linear_forms(m, self.system.dim, rng)
            report = verify_identity(kind, rep, coeff=coeff, fs=fs, tol=tolerance)
        return report.residual

    def _unit_coefficient(self, rng) -> QuadraticCoefficient:
        k = random_coefficient(self.system, rng)
        return QuadraticCoefficient(k / np.linalg.norm(k), self.system)

    def write_trajectory_csv(
        self, out_dir, name: str, order: int, tensors: Sequence[MomentTensor]
    ) -> Path:
        """
        Write one moment trajectory as CSV: t, re[label], im[label], ...
        """
        labels = moment_index_labels(order, self.system.n)
        values = np.array([y.values for y in tensors])
        columns = {"t": self.times}
        for index, label in enumerate(labels):
            columns[f"re[{label}]"] = values[:, index].real
            columns[f"im[{label}]"] = values[:, index].imag

        path = Path(out_dir) / f"{name}_m{order}.csv"
        os.makedirs(path.parent, exist_ok=True)
        pd.DataFrame(columns).to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
        log_artifact_written("csv", path, rows=len(tensors), order=order)
        return path

    def write_report(self, out_dir, name: str, report: BaseModel) -> Path:
        path = Path(out_dir) / f"{name}.json"
        os.makedirs(path.parent, exist_ok=True)
        path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
        log_artifact_written("json", path)
        return path
