"""
Time-scale argument for the NMR realisation.

The protocol only demonstrates energy teleportation if it finishes well before
energy can travel from A to B through the J_AB coupling, i.e. t_total << 1/J_AB.
"""

import logging
from typing import Sequence

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat

from qetlab import config

logger = logging.getLogger(__name__)


class CouplingConstants(BaseModel):
    """Scalar J couplings in Hz and the single-qubit pulse time in seconds."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    j_ab: PositiveFloat = Field(config.J_AB)
    j_ana: PositiveFloat = Field(config.J_ANA)
    j_ban: PositiveFloat = Field(config.J_BAN)
    t_pulse: PositiveFloat = Field(config.T_PULSE)


class TimingReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    t_total: float = Field(..., description="protocol duration in seconds")
    t_c: float = Field(..., description="A-B energy propagation time 1/J_AB")
    margin: float = Field(..., description="required ratio t_c / t_total")
    passed: bool

    @property
    def ratio(self) -> float:
        return self.t_c / self.t_total


def _report(t_total: float, j_ab: float, margin: float | None) -> TimingReport:
    margin = config.TIMING_MARGIN if margin is None else margin
    t_c = 1.0 / j_ab
    report = TimingReport(t_total=t_total, t_c=t_c, margin=margin, passed=t_total <= t_c / margin)
    logger.info("Timing: t_total=%.4g s, t_c=%.4g s, pass=%s", t_total, t_c, report.passed)
    return report


def timing_check(
    j_ab: float = config.J_AB,
    j_ana: float = config.J_ANA,
    j_ban: float = config.J_BAN,
    t_pulse: float = config.T_PULSE,
    margin: float | None = None,
) -> TimingReport:
    """
    t_total = 1/J_AnA + 1/J_BAn + t_pulse against t_c = 1/J_AB.

    Raises:
        ValidationError: if any input is not strictly positive.
    """
    c = CouplingConstants(j_ab=j_ab, j_ana=j_ana, j_ban=j_ban, t_pulse=t_pulse)
    return _report(1.0 / c.j_ana + 1.0 / c.j_ban + c.t_pulse, c.j_ab, margin)


def timing_check_durations(
    j_ab: float = config.J_AB,
    durations: Sequence[float] = (config.T_ANA, config.T_BAN),
    margin: float | None = None,
) -> TimingReport:
    """Same check from measured gate durations instead of J couplings."""
    if not durations or any(d <= 0 for d in durations):
        raise ValueError("durations must be a non-empty sequence of positive times")
    c = CouplingConstants(j_ab=j_ab)
    return _report(float(sum(durations)), c.j_ab, margin)
