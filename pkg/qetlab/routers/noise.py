"""
Noise router: unitary protocol under independent qubit relaxation.
"""

from typing import Literal

from fastapi import APIRouter, Depends, HTTPException, Query
from pydantic import ValidationError

from qetlab import config
from qetlab.exceptions import QETError
from qetlab.hamiltonian import ModelParams, max_extractable_energy
from qetlab.noise import NoiseParams, noisy_unitary_qet
from qetlab.routers.model import get_model_params
from qetlab.schemas import NoisyRunResponse, ProtocolSummary

router = APIRouter(prefix="/api/noise", tags=["noise"])


@router.get("/unitary", response_model=NoisyRunResponse)
def noisy_unitary(
    p: ModelParams = Depends(get_model_params),
    t1: float = Query(config.DEFAULT_T1, gt=0, description="T1 of every qubit in seconds"),
    t2: float = Query(config.DEFAULT_T2, gt=0, description="T2 of every qubit in seconds"),
    scale: float = Query(1.0, gt=0, le=10, description="Factor applied to every gate duration"),
    mode: Literal["per_gate", "per_step"] = Query("per_gate"),
) -> NoisyRunResponse:
    """
    Run the unitary protocol with relaxation after every gate.

    Raises:
        HTTPException: 400 for unphysical relaxation times (T2 > 2 T1)
    """
    try:
        noise = NoiseParams.uniform(t1, t2, mode=mode).scaled_durations(scale)
    except ValidationError as exc:
        raise HTTPException(status_code=400, detail=exc.errors()[0]["msg"])
    try:
        result = noisy_unitary_qet(p, noise)
    except QETError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return NoisyRunResponse(noisy=ProtocolSummary.from_result(result), ideal_extraction=max_extractable_energy(p))
