"""Scenario and persona definitions for the office-week simulation.

A scenario bundles everything exogenous to one session: the hour-level
occupancy grid per weekday, the outdoor weather curve parameters, the
appliance inventory, indoor initial conditions, the scripted user-behaviour
parameters and a tariff preset. Both scenarios and personas round-trip
through JSON files; the shipped office-week scenario lives in
`wattwise/data/scenario_office_week.json`.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from importlib import resources

from ..config import EngineConfig
from ..explain import MODES, PROJECTIONS
from ..model import at

DAY_KEYS = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")


class ScenarioError(ValueError):
    """Malformed scenario: schedule or curve gap, bad parameter."""


@dataclass(frozen=True)
class WeatherParams:
    """Sinusoidal summer profile: 24 h temperature cosine peaking at
    `temp_peak_hour`, half-sine daylight arch between sunrise and sunset."""

    temp_min_c: float = 15.0
    temp_max_c: float = 33.0
    temp_peak_hour: float = 15.0
    lux_max: float = 30000.0
    sunrise_hour: float = 6.0
    sunset_hour: float = 20.0


@dataclass(frozen=True)
class DynamicsParams:
    """First-order indoor response (time constants in seconds)."""

    tau_ac_s: float = 900.0
    tau_room_s: float = 3600.0
    ac_setpoint_c: float = 24.0
    window_factor: float = 0.05
    lights_lux: float = 400.0


@dataclass(frozen=True)
class UserParams:
    """Scripted occupant: acts only on arrival/departure edges."""

    comfort_on_temp_c: float = 26.0   # A/C goes on at arrival above this
    lux_on_threshold: float = 800.0   # lights go on at arrival below this
    leave_on_p: dict = field(default_factory=lambda: {"ac": 0.65, "lights": 0.6, "monitor": 0.85})


@dataclass(frozen=True)
class ApplianceSpec:
    id: str
    kind: str
    rated_kw: float


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    occupancy: dict                      # day key -> sorted list of occupied hours
    weather: WeatherParams
    appliances: tuple
    indoor_initial_temp_c: float = 27.0
    indoor_initial_lux: float = 0.0
    dynamics: DynamicsParams = DynamicsParams()
    user: UserParams = UserParams()
    motion_dropout_p: float = 0.05
    tariff_label: str = "greece-2020"
    tariff_eur_per_kwh: float = 0.165
    emission_kg_per_kwh: float = 0.3
    session_start: int = at(0, 0, 8)     # Monday 08:00
    session_end: int = at(0, 4, 22)      # Friday 22:00
    trace_weeks: int = 1
    seed: int = 1

    def occupied_hours(self, day: int) -> frozenset:
        return frozenset(self.occupancy.get(DAY_KEYS[day], ()))

    def engine_config(self, base: EngineConfig | None = None) -> EngineConfig:
        """Engine config with this scenario's tariff preset applied."""
        base = base or EngineConfig()
        return replace(base, tariff_label=self.tariff_label,
                       tariff_eur_per_kwh=self.tariff_eur_per_kwh,
                       emission_kg_per_kwh=self.emission_kg_per_kwh)

    def validate(self) -> None:
        for key, hours in self.occupancy.items():
            if key not in DAY_KEYS:
                raise ScenarioError(f"occupancy schedule: unknown day {key!r}")
            for h in hours:
                if not isinstance(h, int) or not 0 <= h <= 23:
                    raise ScenarioError(f"occupancy schedule: bad hour {h!r} on {key}")
        w = self.weather
        if w.sunset_hour <= w.sunrise_hour:
            raise ScenarioError("weather curve gap: sunset not after sunrise")
        if w.temp_max_c < w.temp_min_c:
            raise ScenarioError("weather curve gap: temp_max below temp_min")
        if not self.appliances:
            raise ScenarioError("no appliances in inventory")
        ids = [a.id for a in self.appliances]
        if len(set(ids)) != len(ids):
            raise ScenarioError("duplicate appliance ids")
        for a in self.appliances:
            if a.rated_kw <= 0:
                raise ScenarioError(f"appliance {a.id}: rated power must be positive")
        if not 0.0 <= self.motion_dropout_p < 1.0:
            raise ScenarioError("motion dropout probability out of range")
        if self.session_end <= self.session_start:
            raise ScenarioError("session end not after start")

    def to_json(self) -> dict:
        return {
            "v": 1,
            "name": self.name,
            "occupancy": {k: list(v) for k, v in self.occupancy.items()},
            "weather": asdict(self.weather),
            "appliances": [asdict(a) for a in self.appliances],
            "indoor_initial": {"temperature_c": self.indoor_initial_temp_c,
                               "lux": self.indoor_initial_lux},
            "dynamics": asdict(self.dynamics),
            "user": asdict(self.user),
            "motion_dropout_p": self.motion_dropout_p,
            "tariff": {"label": self.tariff_label,
                       "eur_per_kwh": self.tariff_eur_per_kwh,
                       "co2_kg_per_kwh": self.emission_kg_per_kwh},
            "session_start": self.session_start,
            "session_end": self.session_end,
            "trace_weeks": self.trace_weeks,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ScenarioSpec":
        try:
            indoor = obj.get("indoor_initial", {})
            tariff = obj.get("tariff", {})
            spec = cls(
                name=obj["name"],
                occupancy={k: sorted(v) for k, v in obj["occupancy"].items()},
                weather=WeatherParams(**obj.get("weather", {})),
                appliances=tuple(ApplianceSpec(**a) for a in obj["appliances"]),
                indoor_initial_temp_c=indoor.get("temperature_c", 27.0),
                indoor_initial_lux=indoor.get("lux", 0.0),
                dynamics=DynamicsParams(**obj.get("dynamics", {})),
                user=UserParams(**obj.get("user", {})),
                motion_dropout_p=obj.get("motion_dropout_p", 0.05),
                tariff_label=tariff.get("label", "greece-2020"),
                tariff_eur_per_kwh=tariff.get("eur_per_kwh", 0.165),
                emission_kg_per_kwh=tariff.get("co2_kg_per_kwh", 0.3),
                session_start=obj.get("session_start", at(0, 0, 8)),
                session_end=obj.get("session_end", at(0, 4, 22)),
                trace_weeks=obj.get("trace_weeks", 1),
                seed=obj.get("seed", 1),
            )
        except (KeyError, TypeError) as exc:
            raise ScenarioError(f"bad scenario file: {exc}") from exc
        spec.validate()
        return spec

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "ScenarioSpec":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ScenarioError(f"line {exc.lineno}: {exc.msg}") from exc
        return cls.from_json(obj)


def load_bundled_scenario(name: str = "office-week") -> ScenarioSpec:
    filename = {"office-week": "scenario_office_week.json"}.get(name)
    if filename is None:
        raise ScenarioError(f"unknown bundled scenario {name!r}")
    raw = resources.files("wattwise.data").joinpath(filename).read_text("utf-8")
    return ScenarioSpec.from_json(json.loads(raw))


@dataclass(frozen=True)
class Persona:
    """Scripted evaluator: memoryless per recommendation.

    `accept` maps mode -> probability table; for plain mode it is a scalar,
    otherwise fact type -> projection -> probability (scalars are accepted
    anywhere as a shorthand for a uniform table). Latency is uniform in
    [latency_min_s, latency_max_s], always inside the response window.
    """

    name: str
    p_ignore: float = 0.0
    accept: dict = field(default_factory=lambda: {"plain": 0.5, "persuasive": 0.5,
                                                  "explainable": 0.5})
    latency_min_s: int = 2
    latency_max_s: int = 18

    def p_accept(self, mode: str, fact_type: str | None, projection: str | None) -> float:
        table = self.accept[mode]
        if isinstance(table, (int, float)):
            return float(table)
        sub = table[fact_type]
        if isinstance(sub, (int, float)):
            return float(sub)
        return float(sub[projection])

    def draw(self, mode: str, fact, streams) -> tuple[str, int | None]:
        """Returns (response, latency seconds or None when ignored)."""
        if streams["persona"].uniform() < self.p_ignore:
            return "ignore", None
        p = self.p_accept(mode, fact.fact_type if fact else None,
                          fact.projection if fact else None)
        response = "accept" if streams["persona"].uniform() < p else "reject"
        return response, streams["latency"].randint(self.latency_min_s, self.latency_max_s)

    def validate(self) -> None:
        if not 0.0 <= self.p_ignore <= 1.0:
            raise ScenarioError("p_ignore out of [0,1]")
        if not 0 <= self.latency_min_s <= self.latency_max_s:
            raise ScenarioError("bad latency range")
        for mode in MODES:
            if mode not in self.accept:
                raise ScenarioError(f"persona accept table missing mode {mode!r}")
            table = self.accept[mode]
            probs = []
            if isinstance(table, (int, float)):
                probs.append(table)
            else:
                for fact_type, sub in table.items():
                    if isinstance(sub, (int, float)):
                        probs.append(sub)
                    else:
                        probs.extend(sub[p] for p in PROJECTIONS)
            if any(not 0.0 <= p <= 1.0 for p in probs):
                raise ScenarioError(f"persona accept probability out of [0,1] for {mode}")

    def to_json(self) -> dict:
        return {"v": 1, "name": self.name, "p_ignore": self.p_ignore, "accept": self.accept,
                "latency_s": [self.latency_min_s, self.latency_max_s]}

    @classmethod
    def from_json(cls, obj: dict) -> "Persona":
        try:
            lat = obj.get("latency_s", [2, 18])
            persona = cls(name=obj["name"], p_ignore=obj.get("p_ignore", 0.0),
                          accept=obj["accept"], latency_min_s=lat[0], latency_max_s=lat[1])
        except (KeyError, TypeError, IndexError) as exc:
            raise ScenarioError(f"bad persona file: {exc}") from exc
        persona.validate()
        return persona

    @classmethod
    def load(cls, path) -> "Persona":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ScenarioError(f"line {exc.lineno}: {exc.msg}") from exc
        return cls.from_json(obj)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")


def uniform_persona(name: str, p_by_mode: dict, p_ignore: float = 0.0,
                    latency: tuple = (2, 18)) -> Persona:
    """Persona with one acceptance probability per mode (all cells equal)."""
    return Persona(name=name, p_ignore=p_ignore, accept=dict(p_by_mode),
                   latency_min_s=latency[0], latency_max_s=latency[1])


def load_bundled_persona(name: str) -> Persona:
    filename = {
        "agreeable": "personas/agreeable.json",
        "scenario-means": "personas/scenario_means.json",
        "eco-row": "personas/eco_row.json",
    }.get(name)
    if filename is None:
        raise ScenarioError(f"unknown bundled persona {name!r}")
    raw = resources.files("wattwise.data").joinpath(filename).read_text("utf-8")
    return Persona.from_json(json.loads(raw))
