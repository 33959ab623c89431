"""Experiment configuration model and SNR-to-system mapping."""

from typing import Literal, Optional, Union

from pydantic import BaseModel, field_validator, model_validator

from src.domain.system import SystemConfig

ExperimentName = Literal[
    "static_demo",
    "static_sweep_K",
    "static_sweep_snr",
    "fading_sweep_K",
    "fading_sweep_snr",
    "waterfilling_profile",
    "lowcomplexity_compare",
]

FADING_EXPERIMENTS = ("fading_sweep_K", "fading_sweep_snr", "waterfilling_profile", "lowcomplexity_compare")

# Receive SNRs (dB) of five consecutive devices in the heterogeneous profile.
HETEROGENEOUS_PATTERN_DB = (2.7, 4.5, 5.0, 5.4, 6.4)

QUICK_N = 300
QUICK_REPLICATES = 2
QUICK_K = [5, 10, 20]
QUICK_SNR_DB = [0.0, 10.0, 20.0, 30.0]


class ExperimentConfig(BaseModel):
    """Validated configuration of one experiment run.

    Scalar K / snr_db values are accepted and stored as one-element lists.
    """

    model_config = {"frozen": True, "extra": "forbid"}

    experiment: ExperimentName
    K: list[int] = [20]
    snr_db: list[float] = [5.0]
    snr_profile: Literal["uniform", "heterogeneous"] = "uniform"
    N: int = 5000
    seed: int = 2024
    sigma_h_sq: float = 1.0
    replicates: int = 5
    out_dir: str = "results"
    plots: bool = False
    workers: int = 1
    quick: bool = False
    solver_method: Literal["auto", "ellipsoid", "quasi_newton", "subgradient"] = "auto"
    tol: float = 1e-6
    description: Optional[str] = None

    @field_validator("K", "snr_db", mode="before")
    @classmethod
    def _as_list(cls, value: Union[int, float, list]):
        return value if isinstance(value, (list, tuple)) else [value]

    @model_validator(mode="after")
    def _check(self) -> "ExperimentConfig":
        if not self.K:
            raise ValueError("K list must not be empty")
        if not self.snr_db:
            raise ValueError("snr_db list must not be empty")
        if any(k < 1 for k in self.K):
            raise ValueError(f"every K must be positive, got {self.K}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.N < 1:
            raise ValueError(f"N must be positive, got {self.N}")
        if self.experiment in FADING_EXPERIMENTS and self.N < 100:
            raise ValueError(f"fading experiments need N >= 100, got {self.N}")
        if self.snr_profile == "heterogeneous" and any(k % 5 for k in self.K):
            raise ValueError(f"the heterogeneous profile needs K divisible by 5, got {self.K}")
        if self.sigma_h_sq <= 0:
            raise ValueError(f"sigma_h_sq must be positive, got {self.sigma_h_sq}")
        if self.replicates < 1:
            raise ValueError(f"replicates must be positive, got {self.replicates}")
        if self.workers < 1:
            raise ValueError(f"workers must be positive, got {self.workers}")
        if self.tol <= 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        return self

    def effective(self) -> "ExperimentConfig":
        """Configuration with quick-mode reductions applied."""
        if not self.quick:
            return self
        update = {
            "N": min(self.N, QUICK_N),
            "replicates": min(self.replicates, QUICK_REPLICATES),
        }
        if len(self.K) > len(QUICK_K):
            update["K"] = [k for k in QUICK_K if self.snr_profile == "uniform" or k % 5 == 0]
        if len(self.snr_db) > len(QUICK_SNR_DB):
            update["snr_db"] = QUICK_SNR_DB
        return self.model_copy(update=update)


def system_for_snr(K: int, snr_db: float, profile: str = "uniform") -> SystemConfig:
    """System whose receive SNRs follow the given profile.

    uniform: P_k = 1 and sigma^2 = 10^(-snr/10).
    heterogeneous: sigma^2 = 1 and P_k = 10^(rho_k/10) where rho_k repeats the
    five-device pattern, shifted so the total budget equals K * 10^(snr/10),
    the total of the uniform profile at the same noise level.
    """
    if profile == "uniform":
        return SystemConfig.uniform(K, noise_var=10 ** (-snr_db / 10.0), budget=1.0)
    if profile == "heterogeneous":
        if K % 5:
            raise ValueError(f"the heterogeneous profile needs K divisible by 5, got {K}")
        linear = [10 ** (rho / 10.0) for rho in HETEROGENEOUS_PATTERN_DB]
        scale = 10 ** (snr_db / 10.0) / (sum(linear) / len(linear))
        budgets = tuple(linear[k % 5] * scale for k in range(K))
        return SystemConfig(K=K, noise_var=1.0, power_budgets=budgets)
    raise ValueError(f"unknown snr profile {profile!r}")
