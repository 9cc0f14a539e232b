"""
Pydantic schemas for API responses.
"""

from typing import Dict, List

from pydantic import BaseModel

from qetlab.hamiltonian import DerivedConstants
from qetlab.protocols import EquivalenceReport, ProtocolResult


class ParamsEcho(BaseModel):
    h_a: float
    h_b: float
    kappa: float


class ModelResponse(BaseModel):
    """Closed-form quantities of the model at one parameter point."""

    params: ParamsEcho
    derived: DerivedConstants
    lambda_min: float
    max_extractable_energy: float
    printed_extraction_formula: float
    injected_energy: float


class ProtocolSummary(BaseModel):
    """Scalar outcome of a protocol run; density matrices are not serialised."""

    e_a_injected: float
    energy_extracted: float
    exp_zb: float
    exp_xaxb: float
    neg_exp_xaxb: float
    ancilla_energy_change: float
    outcome_probs: Dict[str, float]

    @classmethod
    def from_result(cls, result: ProtocolResult) -> "ProtocolSummary":
        summary = result.summary()
        summary["outcome_probs"] = {f"{mu:+d}": prob for mu, prob in result.outcome_probs.items()}
        return cls(**summary)


class EquivalenceResponse(BaseModel):
    rho_b_diff: float
    control_basis: str
    projection_constants: Dict[str, float]
    projection_residuals: Dict[str, float]
    printed_constant: float

    @classmethod
    def from_report(cls, report: EquivalenceReport) -> "EquivalenceResponse":
        return cls(
            rho_b_diff=report.rho_b_diff,
            control_basis=report.control_basis,
            projection_constants={f"{mu:+d}": c for mu, c in report.projection_constants.items()},
            projection_residuals={f"{mu:+d}": r for mu, r in report.projection_residuals.items()},
            printed_constant=report.printed_constant,
        )


class ProbeResponse(BaseModel):
    best_extraction: float
    evaluations: int
    certified_slp: bool
    kraus_rank: int
    progress: List[float]


class NoisyRunResponse(BaseModel):
    noisy: ProtocolSummary
    ideal_extraction: float
