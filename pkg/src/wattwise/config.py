"""Engine configuration: thresholds, timing constants and rule toggles.

All durations are integer seconds so they round-trip bit-exact through the
JSON config file; floats survive exactly via repr-based JSON encoding.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields

from .model import canonical_json


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    # Trigger rules
    absence_threshold_s: int = 300          # unoccupied time before a user-away trigger
    extended_use_s: int = 10800             # continuous on-time marking extended use
    cooling_delta_c: float = 1.0            # outdoor must be this much below indoor
    natural_light_lux: float = 10000.0      # outdoor lux making room lights redundant
    occupancy_cutoff: float = 0.5           # next-slot presence probability gate
    rule_user_away: bool = True
    rule_outdoor_cooling: bool = True
    rule_natural_light: bool = True

    # Response lifecycle timing
    response_window_s: int = 20
    ignore_cooldown_s: int = 600
    reject_cooldown_s: int = 3600
    episode_max_s: int = 3600
    eval_cadence_s: int = 60

    # Repeated-response rules
    auto_accept_threshold: int = 5          # accepts before automation candidacy
    permanent_pause_threshold: int = 3      # consecutive rejects before permanent pause
    auto_execute: bool = False              # candidates actuate without asking when True

    # Persuasion profile adaptation
    profile_step: float = 0.1
    profile_floor: float = 0.1

    # Savings facts
    tariff_label: str = "greece-2020"
    tariff_eur_per_kwh: float = 0.165
    emission_kg_per_kwh: float = 0.3
    projection_policy: str = "uniform"      # "uniform" or "fixed:<actual|monthly|annual>"

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "EngineConfig":
        known = {f.name: f.type for f in fields(cls)}
        unknown = set(obj) - set(known)
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**obj)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "EngineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"line {exc.lineno}: {exc.msg}") from exc
        return cls.from_json(obj)

    def validate(self) -> None:
        if self.response_window_s <= 0 or self.response_window_s > self.eval_cadence_s:
            raise ConfigError("response window must be positive and fit inside one evaluation tick")
        if self.ignore_cooldown_s < self.response_window_s:
            raise ConfigError("ignore cooldown shorter than the response window")
        if self.profile_floor <= 0:
            raise ConfigError("profile floor must be positive")
        if self.projection_policy != "uniform":
            prefix, _, level = self.projection_policy.partition(":")
            if prefix != "fixed" or level not in ("actual", "monthly", "annual"):
                raise ConfigError(f"bad projection policy: {self.projection_policy!r}")

    def fingerprint(self) -> str:
        return canonical_json(self.to_json())
