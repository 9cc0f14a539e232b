"""
Minimal (measure, communicate, rotate) and fully unitary QET protocols.

The minimal protocol acts on A(x)B:

    rho_f = sum_mu U_B(mu) P(mu) rho_0 P(mu) U_B(mu)^dagger,
    P(mu) = (1 - mu sigma_x^A) / 2.

The fully unitary protocol replaces the measurement and the classical channel
by the ancilla An and runs U_prep, U_AnA, U_BAn on the [B, An, A] register.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable, Mapping

import numpy as np
import numpy.typing as npt
from scipy.stats import unitary_group

from qetlab import config
from qetlab.circuits import GateStage, build_circuit
from qetlab.exceptions import DegenerateOperatorError, DimensionError
from qetlab.hamiltonian import HamiltonianSet, ModelParams, build_hamiltonian, ground_state
from qetlab.operators import (
    IDENTITY,
    PAIR,
    PROJ_0,
    REGISTER,
    SIGMA_X,
    SIGMA_Z,
    ComplexMatrix,
    QubitLabel,
    StateVector,
    dagger,
    density,
    embed,
    expectation,
    hermitian_eig,
    ket,
    kron,
    max_abs,
    orthogonal_complement,
    partial_trace,
    permute_operator,
    permute_state,
    require_density_matrix,
    require_unitary,
)

logger = logging.getLogger(__name__)

A, B, AN = QubitLabel.A, QubitLabel.B, QubitLabel.AN

StageMap = Callable[[ComplexMatrix, GateStage], ComplexMatrix]


class MeasurementOutcome(IntEnum):
    """Outcome label mu of the sigma_x^A measurement."""

    PLUS = +1
    MINUS = -1


OUTCOMES = (MeasurementOutcome.PLUS, MeasurementOutcome.MINUS)


@dataclass(frozen=True)
class ProtocolResult:
    """
    Outcome of one protocol run.

    ``energy_extracted`` is the drop of Tr[(H_B + V) rho] over the run. The
    protocols start from a state with zero local energy by default, in which
    case it equals -Tr[(H_B + V) rho_final].
    """

    rho_final: ComplexMatrix
    rho_b: ComplexMatrix
    e_a_injected: float
    energy_extracted: float
    exp_zb: float
    exp_xaxb: float
    outcome_probs: dict[int, float]
    initial_local_energy: float = 0.0
    ancilla_energy_change: float = 0.0
    register_state: ComplexMatrix | None = field(default=None, repr=False)

    @property
    def neg_exp_xaxb(self) -> float:
        return -self.exp_xaxb

    @property
    def final_local_energy(self) -> float:
        return self.initial_local_energy - self.energy_extracted

    def summary(self) -> dict[str, float | dict[int, float]]:
        return {
            "e_a_injected": self.e_a_injected,
            "energy_extracted": self.energy_extracted,
            "exp_zb": self.exp_zb,
            "exp_xaxb": self.exp_xaxb,
            "neg_exp_xaxb": self.neg_exp_xaxb,
            "ancilla_energy_change": self.ancilla_energy_change,
            "outcome_probs": dict(self.outcome_probs),
        }


@dataclass(frozen=True)
class EquivalenceReport:
    """Comparison of the minimal and fully unitary protocols at one point."""

    rho_b_diff: float
    control_basis: str
    projection_constants: dict[int, float]
    projection_residuals: dict[int, float]
    printed_constant: float = 1 / math.sqrt(2)

    @property
    def max_residual(self) -> float:
        return max(self.projection_residuals.values())


@dataclass(frozen=True)
class BlindSearchResult:
    best_extraction: float
    best_unitary: ComplexMatrix
    samples: int


def measurement_operators() -> tuple[ComplexMatrix, ComplexMatrix]:
    """Projectors [P(+1), P(-1)] on A(x)B."""
    x_a = embed(SIGMA_X, A, PAIR)
    identity = np.eye(4, dtype=np.complex128)
    return tuple((identity - mu * x_a) / 2 for mu in OUTCOMES)


def conditional_state(p: ModelParams, mu: int) -> StateVector:
    """Normalised state of B after outcome mu on |g>: (F+|0> + mu F-|1>)/sqrt2."""
    d = p.derived()
    return np.array([d.f_plus, mu * d.f_minus], dtype=np.complex128) / math.sqrt(2)


def conditional_operator(p: ModelParams, mu: int) -> ComplexMatrix:
    """
    H_B + V seen by B once A has been projected by P(mu).

    P(mu) selects the sigma_x^A eigenvalue m = -mu, so the result is
    -h_B sigma_z + 2 kappa m sigma_x + c0.
    """
    hs = build_hamiltonian(p)
    projector_a = (IDENTITY - mu * SIGMA_X) / 2
    weighted = kron(projector_a, IDENTITY) @ hs.local_b
    return partial_trace(weighted, [B], PAIR)


def rotate_onto_ground(state: npt.ArrayLike, operator: npt.ArrayLike) -> ComplexMatrix:
    """
    Unitary sending ``state`` to the ground vector of a 2x2 Hermitian operator.

    The ground vector's phase is chosen so that its overlap with ``state`` is
    real and nonnegative; the orthogonal complement follows by the same
    (a, b) -> (-b*, a*) map.

    Raises:
        DegenerateOperatorError: if the operator has no unique ground vector.
    """
    state = np.asarray(state, dtype=np.complex128)
    eigenvalues, vectors = hermitian_eig(operator)
    if eigenvalues[1] - eigenvalues[0] <= config.EIGEN_TOL:
        raise DegenerateOperatorError("conditional operator is proportional to the identity")
    target = vectors[:, 0]
    overlap = np.vdot(target, state)
    if abs(overlap) > config.EIGEN_TOL:
        target = target * overlap / abs(overlap)
    return np.outer(target, state.conj()) + np.outer(
        orthogonal_complement(target), orthogonal_complement(state).conj()
    )


def optimal_conditional_unitary(p: ModelParams, mu: int) -> ComplexMatrix:
    mu = MeasurementOutcome(mu)
    return rotate_onto_ground(conditional_state(p, mu), conditional_operator(p, mu))


def optimal_feedback(p: ModelParams) -> dict[MeasurementOutcome, ComplexMatrix]:
    return {mu: optimal_conditional_unitary(p, mu) for mu in OUTCOMES}


def _check_pair_state(rho0: npt.ArrayLike | None, p: ModelParams) -> ComplexMatrix:
    if rho0 is None:
        return density(ground_state(p))
    rho0 = require_density_matrix(rho0, "rho0", tol=config.EIGEN_TOL)
    if rho0.shape != (4, 4):
        raise DimensionError(f"rho0 must live on A(x)B, got shape {rho0.shape}")
    return rho0


def _pair_observables(rho_ab: ComplexMatrix) -> tuple[float, float]:
    z_b = embed(SIGMA_Z, B, PAIR)
    xx = embed(SIGMA_X, A, PAIR) @ embed(SIGMA_X, B, PAIR)
    return expectation(rho_ab, z_b), expectation(rho_ab, xx)


def run_minimal_qet(
    p: ModelParams,
    ub: Mapping[int, npt.ArrayLike] | None = None,
    rho0: npt.ArrayLike | None = None,
) -> ProtocolResult:
    """
    Run the measurement-feedback protocol on A(x)B.

    Args:
        p: Model parameters
        ub: Conditional unitaries on B keyed by outcome; the optimal ones by default
        rho0: Initial state on A(x)B; the ground state by default

    Raises:
        InvalidOperatorError: if a feedback operator is not unitary or rho0 is invalid
    """
    hs = build_hamiltonian(p)
    rho0 = _check_pair_state(rho0, p)
    feedback = optimal_feedback(p) if ub is None else ub
    unitaries = {
        mu: require_unitary(feedback[mu], f"U_B({int(mu):+d})") for mu in OUTCOMES
    }
    for mu, u in unitaries.items():
        if u.shape != (2, 2):
            raise DimensionError(f"U_B({int(mu):+d}) must act on B alone, got shape {u.shape}")

    measured = np.zeros((4, 4), dtype=np.complex128)
    rho_f = np.zeros((4, 4), dtype=np.complex128)
    probs: dict[int, float] = {}
    for mu, projector in zip(OUTCOMES, measurement_operators()):
        branch = projector @ rho0 @ projector
        probs[int(mu)] = float(np.trace(branch).real)
        local = embed(unitaries[mu], B, PAIR)
        measured += branch
        rho_f += local @ branch @ dagger(local)

    initial_local = expectation(rho0, hs.local_b)
    exp_zb, exp_xaxb = _pair_observables(rho_f)
    return ProtocolResult(
        rho_final=rho_f,
        rho_b=partial_trace(rho_f, [B], PAIR),
        e_a_injected=expectation(measured, hs.h) - expectation(rho0, hs.h),
        energy_extracted=initial_local - expectation(rho_f, hs.local_b),
        exp_zb=exp_zb,
        exp_xaxb=exp_xaxb,
        outcome_probs=probs,
        initial_local_energy=initial_local,
    )


def conjugate(rho: ComplexMatrix, stage: GateStage) -> ComplexMatrix:
    return stage.unitary @ rho @ dagger(stage.unitary)


def register_from_pair(rho_ab: npt.ArrayLike) -> ComplexMatrix:
    """rho_AB (x) |0><0|_An laid out over the register."""
    return permute_operator(np.kron(np.asarray(rho_ab, dtype=np.complex128), PROJ_0), (A, B, AN), REGISTER)


def run_unitary_qet(
    p: ModelParams,
    an_energy_scale: float | None = None,
    hamiltonian: HamiltonianSet | None = None,
    initial_pair: npt.ArrayLike | None = None,
    apply_stage: StageMap = conjugate,
) -> ProtocolResult:
    """
    Run U_prep, U_AnA and U_BAn on |000> of the [B, An, A] register.

    With ``initial_pair`` the preparation is skipped and the circuit starts
    from initial_pair (x) |0>_An. ``hamiltonian`` replaces the energy ledger
    (used by the perturbation study). ``apply_stage`` advances the register
    through one gate; the default is plain conjugation.
    """
    circuit = build_circuit(p)
    hs = hamiltonian or build_hamiltonian(p)
    h_an = config.AN_ENERGY_SCALE if an_energy_scale is None else an_energy_scale

    if initial_pair is None:
        rho = density(ket("000"))
        nominal_pair = density(ground_state(p))
    else:
        nominal_pair = _check_pair_state(initial_pair, p)
        rho = register_from_pair(nominal_pair)

    rho_start = rho
    before_ana = after_ana = rho
    for stage in circuit.stages(include_prep=initial_pair is None):
        if stage.name == "U_AnA":
            before_ana = rho
        rho = apply_stage(rho, stage)
        if stage.name == "U_AnA":
            after_ana = rho

    rho_ab = partial_trace(rho, PAIR, REGISTER)
    ancilla_after_ana = partial_trace(after_ana, [AN], REGISTER)
    probs = {
        int(mu): float(np.real(np.vdot(circuit.an_inputs[mu], ancilla_after_ana @ circuit.an_inputs[mu])))
        for mu in OUTCOMES
    }
    h_ancilla = -h_an * SIGMA_Z
    ancilla_change = expectation(partial_trace(rho, [AN], REGISTER), h_ancilla) - expectation(
        partial_trace(rho_start, [AN], REGISTER), h_ancilla
    )

    initial_local = expectation(nominal_pair, hs.local_b)
    exp_zb, exp_xaxb = _pair_observables(rho_ab)
    return ProtocolResult(
        rho_final=rho_ab,
        rho_b=partial_trace(rho, [B], REGISTER),
        e_a_injected=expectation(partial_trace(after_ana, PAIR, REGISTER), hs.h)
        - expectation(partial_trace(before_ana, PAIR, REGISTER), hs.h),
        energy_extracted=initial_local - expectation(rho_ab, hs.local_b),
        exp_zb=exp_zb,
        exp_xaxb=exp_xaxb,
        outcome_probs=probs,
        initial_local_energy=initial_local,
        ancilla_energy_change=ancilla_change,
        register_state=rho,
    )


def equivalence_report(p: ModelParams) -> EquivalenceReport:
    """
    Compare rho_B of both protocols and check the ancilla projection identity.

    Projecting the ancilla onto its control-basis vector v_mu after U_AnA
    leaves c (1 - mu sigma_x^A)|g> on A(x)B; the fitted |c| is reported for
    each outcome together with the residual of the fit.
    """
    circuit = build_circuit(p)
    minimal = run_minimal_qet(p)
    unitary = run_unitary_qet(p)
    diff = max_abs(minimal.rho_b - unitary.rho_b)

    stages = {stage.name: stage.unitary for stage in circuit.stages()}
    psi = stages["U_AnA"] @ stages["U_prep"] @ ket("000")
    x_a = embed(SIGMA_X, A, PAIR)
    g = ground_state(p)

    constants: dict[int, float] = {}
    residuals: dict[int, float] = {}
    tensor = psi.reshape(2, 2, 2)
    for mu in OUTCOMES:
        v = circuit.an_inputs[mu]
        projected_ba = np.einsum("m,bma->ba", v.conj(), tensor).reshape(4)
        projected = permute_state(projected_ba, (B, A), PAIR)
        target = g - mu * (x_a @ g)
        c = np.vdot(target, projected) / np.vdot(target, target).real
        constants[int(mu)] = float(abs(c))
        residuals[int(mu)] = max_abs(projected - c * target)

    logger.debug("Equivalence at %s: rho_B diff %.3e, constants %s", p, diff, constants)
    return EquivalenceReport(
        rho_b_diff=diff,
        control_basis=circuit.control_basis,
        projection_constants=constants,
        projection_residuals=residuals,
    )


def best_blind_unitary_extraction(p: ModelParams, samples: int = 1000, seed: int = 0) -> BlindSearchResult:
    """
    Random search over outcome-independent unitaries on B.

    Without feedback the post-measurement state is blind to mu, so no
    unitary should extract energy from the ground state.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    hs = build_hamiltonian(p)
    rho0 = density(ground_state(p))
    measured = sum(proj @ rho0 @ proj for proj in measurement_operators())
    initial = expectation(rho0, hs.local_b)

    draws = unitary_group.rvs(2, size=samples, random_state=np.random.default_rng(seed))
    draws = np.asarray(draws, dtype=np.complex128).reshape(-1, 2, 2)
    best_value, best_u = -math.inf, draws[0]
    for u in draws:
        local = embed(u, B, PAIR)
        value = initial - expectation(local @ measured @ dagger(local), hs.local_b)
        if value > best_value:
            best_value, best_u = value, u
    return BlindSearchResult(best_extraction=best_value, best_unitary=best_u, samples=samples)
