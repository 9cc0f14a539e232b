"""
Two-qubit model Hamiltonian with a strong local passive ground state.

H = H_A + H_B + V on A(x)B with
    H_nu = -h_nu sigma_z^nu + h_nu f 1
    V    = 2 kappa sigma_x^A sigma_x^B + (4 kappa^2 / (h_A + h_B)) f 1
    f    = (4 kappa^2 / (h_A + h_B)^2 + 1)^(-1/2)

The identity offsets make every term vanish on the ground state, so H >= 0
with lowest eigenvalue 0. Energies are dimensionless with hbar = 1.
"""

import math
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from qetlab.operators import (
    PAIR,
    SIGMA_X,
    SIGMA_Z,
    ComplexMatrix,
    QubitLabel,
    StateVector,
    embed,
    hermitian_eig,
    ket,
)


class ModelParams(BaseModel):
    """Model parameters (h_A, h_B, kappa). kappa = 0 is the uncoupled limit."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    h_a: float = Field(1.0, gt=0, description="local field on A")
    h_b: float = Field(0.4, gt=0, description="local field on B")
    kappa: float = Field(0.2, ge=0, description="A-B coupling")

    @property
    def h_sum(self) -> float:
        return self.h_a + self.h_b

    def derived(self) -> "DerivedConstants":
        return DerivedConstants.from_params(self)


class DerivedConstants(BaseModel):
    """Amplitudes of the ground state (F+-) and of the extraction gate (F2+-)."""

    model_config = ConfigDict(frozen=True)

    f: float
    f_plus: float
    f_minus: float
    f2_plus: float
    f2_minus: float

    @classmethod
    def from_params(cls, p: ModelParams) -> "DerivedConstants":
        f = coupling_f(p)
        g = p.h_b / math.sqrt(p.h_b**2 + 4 * p.kappa**2)
        return cls(
            f=f,
            f_plus=math.sqrt(1 + f),
            f_minus=math.sqrt(max(1 - f, 0.0)),
            f2_plus=math.sqrt(1 + g),
            f2_minus=math.sqrt(max(1 - g, 0.0)),
        )


@dataclass(frozen=True)
class HamiltonianSet:
    """Terms of H on A(x)B plus the most negative eigenvalue of H_B + V."""

    h_a: ComplexMatrix
    h_b: ComplexMatrix
    v: ComplexMatrix
    h: ComplexMatrix
    lambda_min: float

    @property
    def local_b(self) -> ComplexMatrix:
        """H_B + V, the energy reachable by operations on B."""
        return self.h_b + self.v


def coupling_f(p: ModelParams) -> float:
    return 1.0 / math.sqrt(4 * p.kappa**2 / p.h_sum**2 + 1)


def build_hamiltonian(p: ModelParams, z_scale_a: float = 1.0, z_scale_b: float = 1.0) -> HamiltonianSet:
    """
    Build H_A, H_B, V and H on A(x)B.

    ``z_scale_a`` / ``z_scale_b`` multiply the -h sigma_z terms only; the
    identity offsets keep their nominal values. Both default to 1.
    """
    f = coupling_f(p)
    identity = np.eye(4, dtype=np.complex128)
    h_a = -z_scale_a * p.h_a * embed(SIGMA_Z, QubitLabel.A, PAIR) + p.h_a * f * identity
    h_b = -z_scale_b * p.h_b * embed(SIGMA_Z, QubitLabel.B, PAIR) + p.h_b * f * identity
    v = (
        2 * p.kappa * embed(SIGMA_X, QubitLabel.A, PAIR) @ embed(SIGMA_X, QubitLabel.B, PAIR)
        + (4 * p.kappa**2 / p.h_sum) * f * identity
    )
    eigenvalues, _ = hermitian_eig(h_b + v)
    return HamiltonianSet(h_a=h_a, h_b=h_b, v=v, h=h_a + h_b + v, lambda_min=float(eigenvalues[0]))


def ground_state(p: ModelParams) -> StateVector:
    """|g> = (F+ |00> - F- |11>) / sqrt(2) on A(x)B."""
    d = p.derived()
    return (d.f_plus * ket("00") - d.f_minus * ket("11")) / math.sqrt(2)


def lambda_min_analytic(p: ModelParams) -> float:
    """
    Most negative eigenvalue of H_B + V.

    -h_B sigma_z^B + 2 kappa sigma_x^A sigma_x^B has eigenvalues
    +-sqrt(h_B^2 + 4 kappa^2); the identity offsets of H_B and V shift them.
    """
    f = coupling_f(p)
    offset = p.h_b * f + (4 * p.kappa**2 / p.h_sum) * f
    return offset - math.sqrt(p.h_b**2 + 4 * p.kappa**2)


def printed_extraction_formula(p: ModelParams) -> float:
    """
    The maximum-extraction expression exactly as it is usually printed.

    Term by term it reads -sqrt(h_B^2 + 4 kappa^2) + [h_B (h_A + h_B) + 4 kappa^2]
    / sqrt((h_A + h_B)^2 + 4 kappa^2), which is lambda_min (<= 0): the
    extraction bound with the overall sign flipped. Kept for the sign audit.
    """
    h_sum = p.h_a + p.h_b
    return -math.sqrt(p.h_b**2 + 4 * p.kappa**2) + (p.h_b * h_sum + 4 * p.kappa**2) / math.sqrt(
        h_sum**2 + 4 * p.kappa**2
    )


def max_extractable_energy(p: ModelParams) -> float:
    """-lambda_min: the tight bound on energy extracted from B on average."""
    return max(-lambda_min_analytic(p), 0.0)


def injected_energy(p: ModelParams) -> float:
    """E_A = h_A / sqrt(1 + 4 kappa^2 / (h_A + h_B)^2) = h_A f."""
    return p.h_a / math.sqrt(1 + 4 * p.kappa**2 / p.h_sum**2)
