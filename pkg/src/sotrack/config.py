"""Tracker configuration with validated defaults."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from sotrack.errors import ConfigError
from sotrack.localsearch import KcfParams
from sotrack.proposals import DEFAULT_PROPOSAL_COUNT, DEFAULT_THRESHOLDS, DEFAULT_VARIANCES, HpsParams

MODES = ("st", "lt")


@dataclass(frozen=True)
class TrackerConfig:
    variances: tuple[float, float, float, float] = DEFAULT_VARIANCES
    num_proposals: int = DEFAULT_PROPOSAL_COUNT
    hps_thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    objectness_floor: float = 0.2
    patch_side: int = 64
    kcf_sigma: float = 0.5
    kcf_lambda: float = 1e-4
    kcf_padding: float = 2.5
    kcf_label_factor: float = 0.1
    tau_v: float = 0.08
    psr_min: float | None = 20.0
    tau_sim: float | None = None
    use_lsm: bool = True
    arbitrate_fallback: bool = True
    mode: str = "st"
    rng_seed: int = 0

    def __post_init__(self):
        try:
            object.__setattr__(self, "variances", tuple(float(v) for v in self.variances))
            object.__setattr__(self, "hps_thresholds", tuple(float(t) for t in self.hps_thresholds))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if len(self.variances) != 4 or any(v < 0 or not math.isfinite(v) for v in self.variances):
            raise ConfigError(f"variances must be four non-negative numbers, got {self.variances}")
        if self.num_proposals < 1:
            raise ConfigError("num_proposals must be at least 1")
        try:
            HpsParams(self.hps_thresholds)
            KcfParams(self.kcf_sigma, self.kcf_lambda, self.kcf_padding, self.kcf_label_factor)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not 0.0 <= self.objectness_floor <= 1.0:
            raise ConfigError("objectness_floor must lie in [0, 1]")
        if self.patch_side < 8:
            raise ConfigError("patch_side must be at least 8")
        if self.tau_sim is not None and not -1.0 <= self.tau_sim <= 1.0:
            raise ConfigError("tau_sim must lie in [-1, 1]")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")

    @property
    def hps(self) -> HpsParams:
        return HpsParams(self.hps_thresholds)

    @property
    def kcf(self) -> KcfParams:
        return KcfParams(self.kcf_sigma, self.kcf_lambda, self.kcf_padding, self.kcf_label_factor)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]
