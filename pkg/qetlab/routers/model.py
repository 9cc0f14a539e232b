"""
Model router: closed-form energies of the two-qubit Hamiltonian.
"""

from fastapi import APIRouter, Depends, Query

from qetlab.hamiltonian import (
    ModelParams,
    injected_energy,
    lambda_min_analytic,
    max_extractable_energy,
    printed_extraction_formula,
)
from qetlab.schemas import ModelResponse, ParamsEcho

router = APIRouter(prefix="/api/model", tags=["model"])


def get_model_params(
    h_a: float = Query(1.0, gt=0, allow_inf_nan=False, description="Local field on A"),
    h_b: float = Query(0.4, gt=0, allow_inf_nan=False, description="Local field on B"),
    kappa: float = Query(0.2, ge=0, allow_inf_nan=False, description="A-B coupling"),
) -> ModelParams:
    """Shared dependency turning query parameters into ModelParams."""
    return ModelParams(h_a=h_a, h_b=h_b, kappa=kappa)


@router.get("", response_model=ModelResponse, summary="Closed-form model quantities")
def get_model(p: ModelParams = Depends(get_model_params)) -> ModelResponse:
    """
    Derived constants and energies at one parameter point.

    ``printed_extraction_formula`` is the usual printed maximum-extraction
    expression, which carries the opposite sign of ``max_extractable_energy``.
    """
    return ModelResponse(
        params=ParamsEcho(h_a=p.h_a, h_b=p.h_b, kappa=p.kappa),
        derived=p.derived(),
        lambda_min=lambda_min_analytic(p),
        max_extractable_energy=max_extractable_energy(p),
        printed_extraction_formula=printed_extraction_formula(p),
        injected_energy=injected_energy(p),
    )
