"""
Invariant suites run by ``qetlab verify``.

Each suite raises ``InvariantViolation`` naming the broken property. Random
parameter draws use fixed seeds so a run is reproducible.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from qetlab import circuits, config
from qetlab.exceptions import InvariantViolation, QETError
from qetlab.hamiltonian import (
    ModelParams,
    build_hamiltonian,
    ground_state,
    max_extractable_energy,
    printed_extraction_formula,
)
from qetlab.noise import NoiseParams, PerturbationSpec, noisy_unitary_qet, perturbation_sweep
from qetlab.operators import (
    PAIR,
    QubitLabel,
    commutator,
    density,
    embed,
    expectation,
    hermitian_eig,
    is_unitary,
    max_abs,
)
from qetlab.passivity import slp_probe
from qetlab.protocols import (
    best_blind_unitary_extraction,
    equivalence_report,
    measurement_operators,
    run_minimal_qet,
    run_unitary_qet,
)
from qetlab.timing import timing_check, timing_check_durations

logger = logging.getLogger(__name__)

Suite = Callable[[], None]
SUITES: dict[str, Suite] = {}

KAPPA_OVER_H = (0.05, 0.1, 0.2, 0.5, 1.0)
# strong local passivity is certified on the reference point plus this many random draws
SLP_DRAWS = 10
SLP_BUDGET = 5000
EXPECTED_ORDERING = circuits.GateOrdering(
    ana=(QubitLabel.AN, QubitLabel.A),
    ban=(QubitLabel.B, QubitLabel.AN),
)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str = ""


def suite(name: str) -> Callable[[Suite], Suite]:
    def register(fn: Suite) -> Suite:
        SUITES[name] = fn
        return fn

    return register


def random_params(n: int, seed: int) -> list[ModelParams]:
    """Draws with h_A, h_B in [0.1, 2] and kappa in [0, 2]."""
    rng = np.random.default_rng(seed)
    return [
        ModelParams(h_a=rng.uniform(0.1, 2.0), h_b=rng.uniform(0.1, 2.0), kappa=rng.uniform(0.0, 2.0))
        for _ in range(n)
    ]


def reference_grid() -> list[ModelParams]:
    return [ModelParams(h_a=1.0, h_b=0.4, kappa=k) for k in KAPPA_OVER_H]


def _require(condition: bool, invariant: str, detail: str = "") -> None:
    if not condition:
        raise InvariantViolation(invariant, detail)


@suite("unitarity")
def check_unitarity() -> None:
    for p in reference_grid() + random_params(10, seed=1):
        c = circuits.build_circuit(p)
        gates = {
            "Y(theta)": c.y_theta,
            "U_prep(AB)": c.u_prep_pair,
            "U_prep": c.u_prep,
            "U_AnA": c.u_ana,
            "U_RotV": c.u_rot_v,
            "U_diag": c.u_diag,
            "U_BAn": c.u_ban,
        }
        gates.update({f"U_B({mu:+d})": u for mu, u in c.u_b_cond.items()})
        for name, u in gates.items():
            _require(is_unitary(u), "unitarity", f"{name} at {p}")


@suite("povm_completeness")
def check_povm() -> None:
    projectors = measurement_operators()
    _require(max_abs(sum(projectors) - np.eye(4)) <= config.VALIDITY_TOL, "povm_completeness", "sum P != 1")
    for proj in projectors:
        _require(max_abs(proj @ proj - proj) <= config.VALIDITY_TOL, "povm_completeness", "P^2 != P")


@suite("commutation")
def check_commutation() -> None:
    for p in reference_grid():
        hs = build_hamiltonian(p)
        for proj in measurement_operators():
            _require(max_abs(commutator(proj, hs.v)) <= config.VALIDITY_TOL, "commutation", f"[P, V] at {p}")
            _require(max_abs(commutator(proj, hs.h_b)) <= config.VALIDITY_TOL, "commutation", f"[P, H_B] at {p}")


@suite("ground_state_energy")
def check_ground_state() -> None:
    for p in random_params(100, seed=2):
        hs = build_hamiltonian(p)
        rho = density(ground_state(p))
        for name, term in (("H", hs.h), ("H_A", hs.h_a), ("H_B", hs.h_b), ("V", hs.v)):
            value = expectation(rho, term)
            _require(abs(value) <= config.EIGEN_TOL, "ground_state_energy", f"<g|{name}|g> = {value:.3e} at {p}")
        lowest = hermitian_eig(hs.h)[0][0]
        _require(abs(lowest) <= config.EIGEN_TOL, "ground_state_energy", f"min eig H = {lowest:.3e} at {p}")


@suite("sign_audit")
def check_extraction_formula() -> None:
    for p in random_params(100, seed=3):
        oracle = -build_hamiltonian(p).lambda_min
        _require(
            abs(oracle - max_extractable_energy(p)) <= config.EIGEN_TOL,
            "sign_audit",
            f"-lambda_min oracle {oracle:.12g} vs closed form at {p}",
        )
        printed = printed_extraction_formula(p)
        _require(
            abs(printed + oracle) <= config.EIGEN_TOL,
            "sign_audit",
            f"printed formula {printed:.12g} no longer equals the eigenvalue lambda_min {-oracle:.12g} at {p}",
        )


@suite("optimality")
def check_optimality() -> None:
    for p in reference_grid():
        extracted = run_minimal_qet(p).energy_extracted
        bound = max_extractable_energy(p)
        _require(abs(extracted - bound) <= config.EIGEN_TOL, "optimality", f"{extracted:.12g} vs {bound:.12g} at {p}")


@suite("ordering_resolution")
def check_ordering() -> None:
    ordering = circuits.resolve_ordering()
    _require(ordering == EXPECTED_ORDERING, "ordering_resolution", ordering.describe())
    for p in reference_grid():
        gate = circuits.u_ban(p)
        _require(
            max_abs(gate.decomposition.reconstruct() - gate.matrix) <= config.EIGEN_TOL,
            "ordering_resolution",
            f"U_BAn blocks do not reassemble at {p}",
        )


@suite("equivalence")
def check_equivalence() -> None:
    for p in random_params(50, seed=4):
        report = equivalence_report(p)
        _require(report.rho_b_diff <= config.STATE_TOL, "equivalence", f"rho_B diff {report.rho_b_diff:.3e} at {p}")
        _require(report.max_residual <= config.STATE_TOL, "equivalence", f"ancilla projection residual at {p}")


@suite("injection_ordering")
def check_injection() -> None:
    for p in reference_grid() + random_params(20, seed=5):
        for result in (run_minimal_qet(p), run_unitary_qet(p)):
            _require(
                result.e_a_injected >= result.energy_extracted - config.EIGEN_TOL,
                "injection_ordering",
                f"E_A {result.e_a_injected:.6g} < extraction {result.energy_extracted:.6g} at {p}",
            )


@suite("no_feedback")
def check_no_feedback() -> None:
    p = ModelParams()
    best = best_blind_unitary_extraction(p, samples=1000, seed=6).best_extraction
    _require(best <= config.STATE_TOL, "no_feedback", f"blind unitary extracted {best:.3e}")


@suite("slp_certification")
def check_slp() -> None:
    for i, p in enumerate([ModelParams()] + random_params(SLP_DRAWS, seed=7)):
        report = slp_probe(p, budget=SLP_BUDGET, seed=i)
        _require(report.certified_slp, "slp_certification", f"local channel extracted {report.best_extraction:.3e} at {p}")


@suite("robustness")
def check_robustness() -> None:
    rows = perturbation_sweep(ModelParams(), PerturbationSpec(), KAPPA_OVER_H)
    for row in rows:
        _require(row.extraction > 0, "robustness", f"no extraction at epsilon={row.epsilon}, kappa={row.kappa}")


@suite("noiseless_limit")
def check_noiseless_limit() -> None:
    noise = NoiseParams.uniform(1e9, 1e9)
    for p in reference_grid():
        diff = abs(noisy_unitary_qet(p, noise).energy_extracted - max_extractable_energy(p))
        _require(diff <= 1e-6, "noiseless_limit", f"diff {diff:.3e} at {p}")


@suite("timing")
def check_timing() -> None:
    report = timing_check()
    _require(report.passed, "timing", f"t_total={report.t_total:.4g} s vs t_c={report.t_c:.4g} s")
    _require(timing_check_durations().passed, "timing", "main-text gate durations")


def run_suites(names: Iterable[str] | None = None) -> list[SuiteResult]:
    """
    Run the named suites (all by default) and collect their outcomes.

    Library errors inside a suite count as a failure of that suite.
    """
    selected = list(SUITES) if names is None else list(names)
    unknown = [n for n in selected if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suites: {', '.join(unknown)}")

    results = []
    for name in selected:
        try:
            SUITES[name]()
        except InvariantViolation as exc:
            results.append(SuiteResult(name, False, str(exc)))
        except (QETError, ValueError, np.linalg.LinAlgError) as exc:
            results.append(SuiteResult(name, False, f"{name}: {type(exc).__name__}: {exc}"))
        else:
            results.append(SuiteResult(name, True))
        logger.info("Suite %s: %s", name, "pass" if results[-1].passed else "FAIL")
    return results
