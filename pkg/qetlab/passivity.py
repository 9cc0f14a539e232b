"""
Strong local passivity probe.

A state is strongly locally passive for B when no quantum channel acting on B
alone lowers the total energy. The probe searches over CPTP maps on B,
parametrised through a Stinespring isometry, for the largest energy drop.
"""

import logging
import math
from typing import Sequence

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.optimize import minimize

from qetlab import config
from qetlab.exceptions import ChannelError, DimensionError
from qetlab.hamiltonian import ModelParams, build_hamiltonian, ground_state, max_extractable_energy
from qetlab.operators import (
    PAIR,
    ComplexMatrix,
    QubitLabel,
    dagger,
    density,
    embed,
    expectation,
    max_abs,
    require_density_matrix,
)

logger = logging.getLogger(__name__)

MAX_KRAUS_RANK = 4
EVALS_PER_RESTART = 1000
MAX_RESTARTS = 8


class _BudgetExhausted(Exception):
    pass


class LocalChannelParams(BaseModel):
    """
    Rank-r channel on B from 8r reals.

    The reals fill a complex (2r x 2) matrix X (real parts first, then
    imaginary parts). Its QR factor W has orthonormal columns, so the 2x2 row
    blocks K_i = W[2i:2i+2] satisfy sum_i K_i^dagger K_i = 1.
    """

    model_config = ConfigDict(frozen=True)

    kraus_rank: int = Field(..., ge=1, le=MAX_KRAUS_RANK)
    params: tuple[float, ...]

    @field_validator("params")
    @classmethod
    def _finite(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if not all(math.isfinite(x) for x in v):
            raise ValueError("channel parameters must be finite")
        return v

    @model_validator(mode="after")
    def _length_matches_rank(self) -> "LocalChannelParams":
        if len(self.params) != 8 * self.kraus_rank:
            raise ValueError(f"rank {self.kraus_rank} needs {8 * self.kraus_rank} parameters, got {len(self.params)}")
        return self

    @classmethod
    def from_vector(cls, kraus_rank: int, x: npt.ArrayLike) -> "LocalChannelParams":
        return cls(kraus_rank=kraus_rank, params=tuple(float(v) for v in np.ravel(x)))

    @classmethod
    def random(cls, kraus_rank: int, rng: np.random.Generator) -> "LocalChannelParams":
        return cls.from_vector(kraus_rank, rng.standard_normal(8 * kraus_rank))

    @classmethod
    def from_kraus(cls, kraus: Sequence[npt.ArrayLike]) -> "LocalChannelParams":
        """
        Parameters reproducing a given Kraus set exactly.

        Raises:
            ChannelError: if the set is empty, too large or not trace preserving.
        """
        ops = [np.asarray(k, dtype=np.complex128) for k in kraus]
        if not 1 <= len(ops) <= MAX_KRAUS_RANK or any(k.shape != (2, 2) for k in ops):
            raise ChannelError(f"expected 1 to {MAX_KRAUS_RANK} Kraus operators of shape 2x2")
        check_completeness(ops)
        stacked = np.vstack(ops)
        return cls.from_vector(len(ops), np.concatenate([stacked.real.ravel(), stacked.imag.ravel()]))

    @classmethod
    def identity(cls, kraus_rank: int = 1) -> "LocalChannelParams":
        ops = [np.eye(2)] + [np.zeros((2, 2))] * (kraus_rank - 1)
        stacked = np.vstack(ops)
        return cls.from_vector(kraus_rank, np.concatenate([stacked.ravel(), np.zeros(stacked.size)]))

    def isometry(self) -> ComplexMatrix:
        x = np.asarray(self.params)
        half = 4 * self.kraus_rank
        matrix = (x[:half] + 1j * x[half:]).reshape(2 * self.kraus_rank, 2)
        q, r = np.linalg.qr(matrix)
        diag = np.diag(r)
        if np.min(np.abs(diag)) < 1e-12:
            raise ChannelError("channel parameters do not define an isometry")
        # R with a positive diagonal makes the map from parameters to W unique.
        return q * (diag / np.abs(diag))

    def kraus_operators(self) -> list[ComplexMatrix]:
        w = self.isometry()
        return [w[2 * i : 2 * i + 2, :] for i in range(self.kraus_rank)]

    def padded(self, kraus_rank: int) -> "LocalChannelParams":
        """The same channel written with ``kraus_rank`` operators, the extra ones zero."""
        if kraus_rank == self.kraus_rank:
            return self
        if kraus_rank < self.kraus_rank:
            raise ChannelError(f"cannot write a rank {self.kraus_rank} channel with {kraus_rank} operators")
        zeros = [np.zeros((2, 2), dtype=np.complex128)] * (kraus_rank - self.kraus_rank)
        return LocalChannelParams.from_kraus(self.kraus_operators() + zeros)


class ProbeReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    best_extraction: float
    best_channel: LocalChannelParams
    evaluations: int
    certified_slp: bool
    progress: tuple[float, ...] = Field(default=(), description="best extraction after each restart")


def check_completeness(kraus: Sequence[ComplexMatrix], tol: float | None = None) -> None:
    tol = config.EIGEN_TOL if tol is None else tol
    total = sum(dagger(k) @ k for k in kraus)
    if max_abs(total - np.eye(2)) > tol:
        raise ChannelError("Kraus operators violate sum K^dagger K = 1")


def _apply_kraus(rho: ComplexMatrix, kraus: Sequence[ComplexMatrix]) -> ComplexMatrix:
    out = np.zeros_like(rho)
    for k in kraus:
        local = embed(k, QubitLabel.B, PAIR)
        out += local @ rho @ dagger(local)
    return out


def apply_local_channel(rho: npt.ArrayLike, ch: LocalChannelParams) -> ComplexMatrix:
    """sum_i (1_A (x) K_i) rho (1_A (x) K_i)^dagger on A(x)B."""
    rho = require_density_matrix(rho, tol=config.EIGEN_TOL)
    if rho.shape != (4, 4):
        raise DimensionError(f"local channels act on A(x)B states, got shape {rho.shape}")
    kraus = ch.kraus_operators()
    check_completeness(kraus)
    return _apply_kraus(rho, kraus)


def slp_probe(
    p: ModelParams,
    rho0: npt.ArrayLike | None = None,
    budget: int = 5000,
    seed: int = 0,
    kraus_rank: int = MAX_KRAUS_RANK,
    restarts: int | None = None,
) -> ProbeReport:
    """
    Search for the local channel on B that extracts the most energy from rho0.

    The do-nothing channel is evaluated first as the baseline. The remaining
    budget is split over seeded Nelder-Mead restarts from random isometries
    plus a closing restart that polishes the best point found. Restart i
    searches rank ``1 + i % kraus_rank`` and draws from the i-th child of
    ``SeedSequence(seed)``; lower ranks are embedded in rank ``kraus_rank``
    by zero Kraus operators, so the reported channel always has that rank.

    Args:
        p: Model parameters
        rho0: State on A(x)B; the ground state by default
        budget: Total number of energy evaluations
        seed: Seed of the restart generators
        kraus_rank: Largest number of Kraus operators searched
        restarts: Number of random restarts; derived from the budget when omitted
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if not 1 <= kraus_rank <= MAX_KRAUS_RANK:
        raise ValueError(f"kraus_rank must be in 1..{MAX_KRAUS_RANK}")
    hs = build_hamiltonian(p)
    rho0 = density(ground_state(p)) if rho0 is None else require_density_matrix(rho0, tol=config.EIGEN_TOL)
    initial = expectation(rho0, hs.h)

    evaluations = 0
    best_value = -math.inf
    best_rank = 1
    best_x = np.asarray(LocalChannelParams.identity(1).params)

    def extraction(x: np.ndarray, rank: int) -> float:
        nonlocal evaluations, best_value, best_rank, best_x
        if evaluations >= budget:
            raise _BudgetExhausted
        evaluations += 1
        try:
            kraus = LocalChannelParams.from_vector(rank, x).kraus_operators()
        except ChannelError:
            return -math.inf
        value = initial - expectation(_apply_kraus(rho0, kraus), hs.h)
        if value > best_value:
            best_value, best_rank, best_x = value, rank, np.array(x, dtype=float)
        return value

    def objective(x: np.ndarray, rank: int) -> float:
        value = extraction(x, rank)
        return math.inf if value == -math.inf else -value

    def search(x0: np.ndarray, rank: int, maxfev: int) -> None:
        try:
            minimize(
                objective,
                x0,
                args=(rank,),
                method="Nelder-Mead",
                options={"maxfev": max(maxfev, 1), "xatol": 1e-10, "fatol": 1e-14, "adaptive": True},
            )
        except _BudgetExhausted:
            pass

    extraction(best_x, best_rank)
    remaining = budget - evaluations
    n_restarts = restarts or max(1, min(MAX_RESTARTS, remaining // EVALS_PER_RESTART))
    progress = [best_value]
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(n_restarts)):
        left = budget - evaluations
        if left <= 0:
            break
        rank = 1 + i % kraus_rank
        # one share stays reserved for the polishing restart
        search(np.random.default_rng(child).standard_normal(8 * rank), rank, left // (n_restarts + 1 - i))
        progress.append(best_value)
        logger.debug("SLP restart %d (rank %d): best extraction %.3e after %d evaluations", i, rank, best_value, evaluations)

    if budget - evaluations > 0:
        search(best_x.copy(), best_rank, budget - evaluations)
        progress.append(best_value)

    report = ProbeReport(
        best_extraction=best_value,
        best_channel=LocalChannelParams.from_vector(best_rank, best_x).padded(kraus_rank),
        evaluations=evaluations,
        certified_slp=best_value <= config.PASSIVITY_TOL,
        progress=tuple(progress),
    )
    logger.info(
        "SLP probe at %s: best extraction %.3e over %d evaluations (certified=%s)",
        p,
        report.best_extraction,
        report.evaluations,
        report.certified_slp,
    )
    return report


def activation_gap(p: ModelParams, budget: int = 1000, seed: int = 0) -> float:
    """Energy unlocked by feedback: -lambda_min minus the best unaided local extraction."""
    probe = slp_probe(p, budget=budget, seed=seed)
    return max_extractable_energy(p) - probe.best_extraction
