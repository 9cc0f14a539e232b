"""
Protocol router: minimal and fully unitary QET runs, equivalence and timing.
"""

from fastapi import APIRouter, Depends, HTTPException, Query

from qetlab import config
from qetlab.exceptions import QETError
from qetlab.hamiltonian import ModelParams
from qetlab.protocols import equivalence_report, run_minimal_qet, run_unitary_qet
from qetlab.routers.model import get_model_params
from qetlab.schemas import EquivalenceResponse, ProtocolSummary
from qetlab.timing import TimingReport, timing_check

router = APIRouter(prefix="/api/protocols", tags=["protocols"])


@router.get("/minimal", response_model=ProtocolSummary, summary="Measurement-feedback protocol")
def minimal(p: ModelParams = Depends(get_model_params)) -> ProtocolSummary:
    """Run the minimal protocol from the ground state with optimal feedback."""
    try:
        return ProtocolSummary.from_result(run_minimal_qet(p))
    except QETError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


@router.get("/unitary", response_model=ProtocolSummary, summary="Fully unitary protocol")
def unitary(
    p: ModelParams = Depends(get_model_params),
    an_energy_scale: float = Query(config.AN_ENERGY_SCALE, description="h_An of the ancilla Hamiltonian"),
) -> ProtocolSummary:
    try:
        return ProtocolSummary.from_result(run_unitary_qet(p, an_energy_scale=an_energy_scale))
    except QETError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


@router.get("/equivalence", response_model=EquivalenceResponse)
def equivalence(p: ModelParams = Depends(get_model_params)) -> EquivalenceResponse:
    try:
        return EquivalenceResponse.from_report(equivalence_report(p))
    except QETError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


@router.get("/timing", response_model=TimingReport, summary="Protocol time against 1/J_AB")
def timing(
    j_ab: float = Query(config.J_AB, gt=0, description="J_AB in Hz"),
    j_ana: float = Query(config.J_ANA, gt=0, description="J_AnA in Hz"),
    j_ban: float = Query(config.J_BAN, gt=0, description="J_BAn in Hz"),
    t_pulse: float = Query(config.T_PULSE, gt=0, description="Pulse time in seconds"),
) -> TimingReport:
    return timing_check(j_ab, j_ana, j_ban, t_pulse)
