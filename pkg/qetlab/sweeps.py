"""
Parameter sweeps over kappa / h at fixed h_B / h_A.
"""

import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, model_validator

from qetlab import config
from qetlab.exceptions import InvariantViolation
from qetlab.hamiltonian import ModelParams, build_hamiltonian, lambda_min_analytic, max_extractable_energy
from qetlab.noise import NoiseParams, noisy_unitary_qet, perturbed_run
from qetlab.operators import expectation
from qetlab.protocols import ProtocolResult, run_unitary_qet

logger = logging.getLogger(__name__)

SweepMode = Literal["ideal", "noisy", "perturbed"]


class SweepConfig(BaseModel):
    """Grid and mode of a sweep. kappa values are given as kappa / h_A."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False, extra="forbid")

    h_a: PositiveFloat = 1.0
    h_b_ratio: PositiveFloat = 0.4
    kappa_start: float = Field(0.0, ge=0)
    kappa_stop: float = Field(1.0, ge=0)
    kappa_steps: int = Field(51, ge=2)
    mode: SweepMode = "ideal"
    noise: NoiseParams | None = None
    epsilon: float | None = Field(None, gt=-1)
    workers: PositiveInt = Field(default_factory=lambda: max(config.SWEEP_WORKERS, 1))
    output: Path | None = None
    svg: Path | None = None

    @model_validator(mode="after")
    def _ordered_grid(self) -> "SweepConfig":
        if self.kappa_stop <= self.kappa_start:
            raise ValueError("kappa_stop must exceed kappa_start")
        return self

    @classmethod
    def from_toml(cls, path: Path, **overrides: Any) -> "SweepConfig":
        """
        Load a config file; keyword overrides that are not None win.

        The file holds the sweep keys at top level (or under ``[sweep]``) and an
        optional ``[noise]`` table with ``t1``/``t2`` (seconds, all qubits),
        ``dt``, ``mode`` and a ``gate_durations`` table.
        """
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        values = dict(data.get("sweep", {k: v for k, v in data.items() if k != "noise"}))
        if "noise" in data:
            noise = dict(data["noise"])
            t1 = noise.pop("t1", config.DEFAULT_T1)
            t2 = noise.pop("t2", config.DEFAULT_T2)
            values["noise"] = NoiseParams.uniform(t1, t2, **noise)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def kappa_over_h(self) -> np.ndarray:
        return np.linspace(self.kappa_start, self.kappa_stop, self.kappa_steps)

    def params_at(self, kappa_over_h: float) -> ModelParams:
        return ModelParams(h_a=self.h_a, h_b=self.h_b_ratio * self.h_a, kappa=float(kappa_over_h) * self.h_a)


@dataclass(frozen=True)
class SweepRow:
    kappa_over_h: float
    neg_exp_xaxb: float
    exp_zb: float
    energy_extracted: float
    e_a_injected: float
    lambda_min: float
    max_extractable: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def values(self) -> tuple[float, ...]:
        return astuple(self)


def run_point(cfg: SweepConfig, p: ModelParams) -> ProtocolResult:
    if cfg.mode == "noisy":
        return noisy_unitary_qet(p, cfg.noise or NoiseParams())
    if cfg.mode == "perturbed":
        return perturbed_run(p, cfg.epsilon or 0.0)
    return run_unitary_qet(p)


def compute_row(cfg: SweepConfig, kappa_over_h: float) -> SweepRow:
    """
    One sweep row, with its invariants checked.

    Raises:
        InvariantViolation: if the row breaks the energy ledger, the injection
            ordering, or (ideal mode) the extraction bound.
    """
    p = cfg.params_at(kappa_over_h)
    hs = build_hamiltonian(p)
    result = run_point(cfg, p)
    bound = max_extractable_energy(p)

    if cfg.mode != "perturbed":
        ledger = result.energy_extracted + expectation(result.rho_final, hs.local_b)
        if abs(ledger - result.initial_local_energy) > config.EIGEN_TOL:
            raise InvariantViolation("energy_ledger", f"kappa/h={kappa_over_h:g}: residual {ledger:.3e}")
    if result.e_a_injected < result.energy_extracted - config.EIGEN_TOL:
        raise InvariantViolation("injection_ordering", f"kappa/h={kappa_over_h:g}")
    if cfg.mode == "ideal" and abs(result.energy_extracted - bound) > config.STATE_TOL:
        raise InvariantViolation(
            "optimality", f"kappa/h={kappa_over_h:g}: {result.energy_extracted:.12g} vs bound {bound:.12g}"
        )
    if cfg.mode == "noisy" and result.energy_extracted > bound + config.STATE_TOL:
        raise InvariantViolation("noise_bound", f"kappa/h={kappa_over_h:g}")

    return SweepRow(
        kappa_over_h=float(kappa_over_h),
        neg_exp_xaxb=result.neg_exp_xaxb,
        exp_zb=result.exp_zb,
        energy_extracted=result.energy_extracted,
        e_a_injected=result.e_a_injected,
        lambda_min=lambda_min_analytic(p),
        max_extractable=bound,
    )


def run_sweep(cfg: SweepConfig) -> list[SweepRow]:
    """All rows in grid order; points are computed on a thread pool."""
    grid = cfg.kappa_over_h()
    logger.info("Sweep (%s): %d points on %d worker(s)", cfg.mode, len(grid), cfg.workers)
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(lambda k: compute_row(cfg, k), grid))
