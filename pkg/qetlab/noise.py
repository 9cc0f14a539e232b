"""
Decoherence and Hamiltonian-perturbation studies of the unitary protocol.

Relaxation is Markovian and acts on each qubit independently: amplitude
damping with time constant T1 followed by pure dephasing at rate
1/T2 - 1/(2 T1). Channels are applied after every gate (``per_gate``) or after
every dt slice of a gate split into U^(1/n) steps (``per_step``).
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, field_validator, model_validator
from scipy.linalg import schur

from qetlab import config
from qetlab.circuits import GateStage
from qetlab.hamiltonian import ModelParams, build_hamiltonian, max_extractable_energy
from qetlab.operators import (
    REGISTER,
    ComplexMatrix,
    QubitLabel,
    dagger,
    density,
    embed,
    hermitian_eig,
)
from qetlab.protocols import ProtocolResult, run_unitary_qet

logger = logging.getLogger(__name__)

STAGE_NAMES = ("U_prep", "U_AnA", "U_BAn")
_KRAUS_FLOOR = 1e-15


def _per_qubit(value: float) -> dict[QubitLabel, float]:
    return {q: value for q in REGISTER}


class NoiseParams(BaseModel):
    """Relaxation times per qubit and gate durations, all in seconds."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    t1: dict[QubitLabel, PositiveFloat] = Field(default_factory=lambda: _per_qubit(config.DEFAULT_T1))
    t2: dict[QubitLabel, PositiveFloat] = Field(default_factory=lambda: _per_qubit(config.DEFAULT_T2))
    dt: PositiveFloat = config.DEFAULT_DT
    gate_durations: dict[str, PositiveFloat] = Field(
        default_factory=lambda: {"U_prep": config.T_PREP, "U_AnA": config.T_ANA, "U_BAn": config.T_BAN}
    )
    mode: Literal["per_gate", "per_step"] = "per_gate"

    @field_validator("t1", "t2")
    @classmethod
    def _covers_register(cls, v: dict[QubitLabel, float]) -> dict[QubitLabel, float]:
        missing = set(REGISTER) - set(v)
        if missing:
            raise ValueError(f"relaxation times missing for {sorted(q.value for q in missing)}")
        return v

    @field_validator("gate_durations")
    @classmethod
    def _covers_gates(cls, v: dict[str, float]) -> dict[str, float]:
        missing = set(STAGE_NAMES) - set(v)
        if missing:
            raise ValueError(f"gate durations missing for {sorted(missing)}")
        return v

    @model_validator(mode="after")
    def _physical(self) -> "NoiseParams":
        for q in REGISTER:
            if self.t2[q] > 2 * self.t1[q] * (1 + 1e-12):
                raise ValueError(f"T2 > 2 T1 on qubit {q.value}")
        if any(d < self.dt for d in self.gate_durations.values()):
            raise ValueError("every gate duration must be at least dt")
        return self

    @classmethod
    def uniform(cls, t1: float, t2: float, **kwargs) -> "NoiseParams":
        return cls(t1=_per_qubit(t1), t2=_per_qubit(t2), **kwargs)

    def scaled_durations(self, factor: float) -> "NoiseParams":
        return self.model_copy(
            update={"gate_durations": {k: v * factor for k, v in self.gate_durations.items()}}
        )

    def scaled_relaxation(self, factor: float) -> "NoiseParams":
        return self.model_copy(
            update={
                "t1": {q: v * factor for q, v in self.t1.items()},
                "t2": {q: v * factor for q, v in self.t2.items()},
            }
        )


class PerturbationSpec(BaseModel):
    """Grid of relative errors epsilon on the local sigma_z terms."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    epsilons: tuple[float, ...] = (-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3)
    sides: Literal["both", "A", "B"] = "both"

    @field_validator("epsilons")
    @classmethod
    def _sorted_grid(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if not v:
            raise ValueError("epsilon grid is empty")
        if any(e <= -1 for e in v):
            raise ValueError("epsilon must exceed -1 so the local fields keep their sign")
        return tuple(sorted(v))

    def z_scales(self, epsilon: float) -> tuple[float, float]:
        scale = 1.0 + epsilon
        return (scale if self.sides in ("both", "A") else 1.0, scale if self.sides in ("both", "B") else 1.0)


@dataclass(frozen=True)
class PerturbationRow:
    epsilon: float
    kappa: float
    extraction: float
    ideal: float
    relative_deviation: float


def relaxation_channel(q: QubitLabel, t: float, noise: NoiseParams) -> list[ComplexMatrix]:
    """
    Kraus operators of free relaxation of qubit ``q`` for a time ``t``.

    Operators with vanishing norm are dropped, so t = 0 yields [1].
    """
    if t < 0:
        raise ValueError("relaxation time must be nonnegative")
    t1, t2 = noise.t1[QubitLabel(q)], noise.t2[QubitLabel(q)]
    gamma = -math.expm1(-t / t1)
    dephasing_rate = max(1.0 / t2 - 1.0 / (2.0 * t1), 0.0)
    lam = 1.0 if dephasing_rate == 0.0 else math.exp(-t * dephasing_rate)

    damping = [
        np.array([[1, 0], [0, math.sqrt(1 - gamma)]], dtype=np.complex128),
        np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=np.complex128),
    ]
    dephasing = [
        math.sqrt((1 + lam) / 2) * np.eye(2, dtype=np.complex128),
        math.sqrt((1 - lam) / 2) * np.diag([1, -1]).astype(np.complex128),
    ]
    kraus = [d @ a for d in dephasing for a in damping]
    return [k for k in kraus if np.linalg.norm(k) > _KRAUS_FLOOR]


def _lifted_relaxation(t: float, noise: NoiseParams) -> list[list[ComplexMatrix]]:
    return [[embed(k, q, REGISTER) for k in relaxation_channel(q, t, noise)] for q in REGISTER]


def _relax(rho: ComplexMatrix, lifted: Sequence[Sequence[ComplexMatrix]]) -> ComplexMatrix:
    for kraus in lifted:
        rho = sum(k @ rho @ dagger(k) for k in kraus)
    return rho


def unitary_root(u: npt.ArrayLike, n: int) -> ComplexMatrix:
    """Principal n-th root of a unitary from its complex Schur form."""
    t, z = schur(np.asarray(u, dtype=np.complex128), output="complex")
    return z @ np.diag(np.diag(t) ** (1.0 / n)) @ dagger(z)


class _RelaxingStages:
    """Stage map that follows each gate (or each gate slice) by relaxation."""

    def __init__(self, noise: NoiseParams):
        self.noise = noise

    def __call__(self, rho: ComplexMatrix, stage: GateStage) -> ComplexMatrix:
        duration = self.noise.gate_durations[stage.name]
        if self.noise.mode == "per_gate":
            rho = stage.unitary @ rho @ dagger(stage.unitary)
            return _relax(rho, _lifted_relaxation(duration, self.noise))

        steps = max(1, math.ceil(duration / self.noise.dt - 1e-9))
        step = unitary_root(stage.unitary, steps)
        lifted = _lifted_relaxation(duration / steps, self.noise)
        logger.debug("%s split into %d steps", stage.name, steps)
        for _ in range(steps):
            rho = _relax(step @ rho @ dagger(step), lifted)
        return rho


def noisy_unitary_qet(
    p: ModelParams,
    noise: NoiseParams | None = None,
    an_energy_scale: float | None = None,
) -> ProtocolResult:
    """Run the unitary protocol with independent relaxation on all three qubits."""
    noise = noise or NoiseParams()
    return run_unitary_qet(p, an_energy_scale=an_energy_scale, apply_stage=_RelaxingStages(noise))


def perturbed_run(p: ModelParams, epsilon: float, sides: str = "both") -> ProtocolResult:
    """
    Run the circuit built for epsilon = 0 on the Hamiltonian perturbed by epsilon.

    The register starts in the ground state of the perturbed Hamiltonian with
    An in |0>; extraction is the drop of the perturbed (H_B + V) over the run.
    """
    z_a, z_b = PerturbationSpec(epsilons=(epsilon,), sides=sides).z_scales(epsilon)
    true_h = build_hamiltonian(p, z_scale_a=z_a, z_scale_b=z_b)
    _, vectors = hermitian_eig(true_h.h)
    return run_unitary_qet(p, hamiltonian=true_h, initial_pair=density(vectors[:, 0]))


def perturbation_sweep(
    p: ModelParams,
    spec: PerturbationSpec,
    kappa_grid: Sequence[float],
) -> list[PerturbationRow]:
    """
    Extraction on a grid of (epsilon, kappa) with the sigma_z terms of H scaled
    by (1 + epsilon) on the selected sides. See ``perturbed_run``.
    """
    rows = []
    for epsilon in spec.epsilons:
        for kappa in kappa_grid:
            pk = p.model_copy(update={"kappa": float(kappa)})
            result = perturbed_run(pk, epsilon, spec.sides)
            ideal = max_extractable_energy(pk)
            deviation = (result.energy_extracted - ideal) / ideal if ideal > 0 else 0.0
            rows.append(
                PerturbationRow(
                    epsilon=epsilon,
                    kappa=float(kappa),
                    extraction=result.energy_extracted,
                    ideal=ideal,
                    relative_deviation=deviation,
                )
            )
    logger.info("Perturbation sweep: %d points", len(rows))
    return rows
