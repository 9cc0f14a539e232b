"""
Passivity router.
"""

from fastapi import APIRouter, Depends, HTTPException, Query

from qetlab.exceptions import QETError
from qetlab.hamiltonian import ModelParams
from qetlab.passivity import MAX_KRAUS_RANK, slp_probe
from qetlab.routers.model import get_model_params
from qetlab.schemas import ProbeResponse

router = APIRouter(prefix="/api/passivity", tags=["passivity"])

MAX_API_BUDGET = 20000


@router.get("/probe", response_model=ProbeResponse, summary="Search local channels on B for extractable energy")
def probe(
    p: ModelParams = Depends(get_model_params),
    budget: int = Query(2000, ge=1, le=MAX_API_BUDGET, description="Energy evaluations"),
    seed: int = Query(0, ge=0, description="Seed of the multistart"),
    kraus_rank: int = Query(MAX_KRAUS_RANK, ge=1, le=MAX_KRAUS_RANK),
) -> ProbeResponse:
    """
    Probe the ground state for strong local passivity.

    Raises:
        HTTPException: 400 if the probe fails
    """
    try:
        report = slp_probe(p, budget=budget, seed=seed, kraus_rank=kraus_rank)
    except QETError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return ProbeResponse(
        best_extraction=report.best_extraction,
        evaluations=report.evaluations,
        certified_slp=report.certified_slp,
        kraus_rank=report.best_channel.kraus_rank,
        progress=list(report.progress),
    )
