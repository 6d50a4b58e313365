"""Knowledge abstraction: slot aggregates, occupancy/habit profiles and
micro-moment detection.

Raw readings are summarized per (weekday, 5-minute slot) cell. A cell counts
as observed in a week when any motion reading fell into it that week, and as
present when any of those readings was motion=1. Profiles are rebuilt between
sessions from a readings file; nothing here updates incrementally mid-run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .config import EngineConfig
from .model import (
    DAY_SECONDS,
    SLOTS_PER_DAY,
    WEEK_SECONDS,
    ContextSnapshot,
    SensorReading,
    canonical_json,
    day_of_week,
    slot_of,
    week_of,
)


class InsufficientHistoryError(ValueError):
    pass


@dataclass
class SlotAggregate:
    """Accumulated statistics for one (weekday, slot) cell."""

    day: int
    slot: int
    value_sums: dict = field(default_factory=dict)    # (kind, placement) -> sum
    value_counts: dict = field(default_factory=dict)  # (kind, placement) -> n
    presence_weeks: set = field(default_factory=set)
    observed_weeks: set = field(default_factory=set)

    @property
    def presence_count(self) -> int:
        return len(self.presence_weeks)

    @property
    def observation_count(self) -> int:
        return len(self.observed_weeks)

    def mean(self, kind: str, placement: str) -> float | None:
        key = (kind, placement)
        n = self.value_counts.get(key, 0)
        return self.value_sums[key] / n if n else None

    def merge(self, other: "SlotAggregate") -> None:
        for key, s in other.value_sums.items():
            self.value_sums[key] = self.value_sums.get(key, 0.0) + s
            self.value_counts[key] = self.value_counts.get(key, 0) + other.value_counts[key]
        self.presence_weeks |= other.presence_weeks
        self.observed_weeks |= other.observed_weeks


@dataclass
class AggregateSet:
    cells: dict = field(default_factory=dict)  # (day, slot) -> SlotAggregate
    rejected: int = 0
    t_min: int | None = None
    t_max: int | None = None

    def cell(self, day: int, slot: int) -> SlotAggregate:
        key = (day, slot)
        agg = self.cells.get(key)
        if agg is None:
            agg = self.cells[key] = SlotAggregate(day, slot)
        return agg

    @property
    def weeks(self) -> set:
        out = set()
        for agg in self.cells.values():
            out |= agg.observed_weeks
        return out

    def merge(self, other: "AggregateSet") -> "AggregateSet":
        merged = AggregateSet(rejected=self.rejected + other.rejected)
        for src in (self, other):
            for (day, slot), agg in src.cells.items():
                merged.cell(day, slot).merge(agg)
        spans = [s for s in (self.t_min, self.t_max, other.t_min, other.t_max) if s is not None]
        if spans:
            merged.t_min, merged.t_max = min(spans), max(spans)
        return merged


def aggregate(readings) -> AggregateSet:
    """Fold a reading stream into per-cell aggregates.

    Out-of-range readings are skipped and tallied in `rejected`.
    """
    out = AggregateSet()
    for r in readings:
        if not r.in_range():
            out.rejected += 1
            continue
        if out.t_min is None or r.t < out.t_min:
            out.t_min = r.t
        if out.t_max is None or r.t > out.t_max:
            out.t_max = r.t
        agg = out.cell(day_of_week(r.t), slot_of(r.t))
        week = week_of(r.t)
        key = (r.kind, r.placement)
        agg.value_sums[key] = agg.value_sums.get(key, 0.0) + r.value
        agg.value_counts[key] = agg.value_counts.get(key, 0) + 1
        if r.kind == "motion":
            agg.observed_weeks.add(week)
            if r.value:
                agg.presence_weeks.add(week)
    return out


@dataclass
class OccupancyProfile:
    """Presence probability per (weekday, slot); unobserved cells are 0."""

    grid: list  # 7 lists of 288 floats
    window_weeks: int

    def p(self, day: int, slot: int) -> float:
        return self.grid[day][slot]

    def p_at(self, t: int) -> float:
        return self.grid[day_of_week(t)][slot_of(t)]

    def p_next_slot(self, t: int) -> float:
        return self.p_at(t + 300)

    def to_json(self) -> dict:
        return {"window_weeks": self.window_weeks, "grid": self.grid}

    @classmethod
    def from_json(cls, obj: dict) -> "OccupancyProfile":
        return cls(obj["grid"], obj["window_weeks"])


def occupancy_profile(aggregates: AggregateSet) -> OccupancyProfile:
    """presence / observations per cell; requires at least one full week of
    aggregated history."""
    if not aggregates.cells:
        raise InsufficientHistoryError("insufficient history: no aggregates")
    span = (aggregates.t_max or 0) - (aggregates.t_min or 0)
    if span + DAY_SECONDS // SLOTS_PER_DAY < WEEK_SECONDS:
        raise InsufficientHistoryError(
            f"insufficient history: {span} s of readings, need a full week")
    grid = [[0.0] * SLOTS_PER_DAY for _ in range(7)]
    for (day, slot), agg in aggregates.cells.items():
        if agg.observation_count:
            grid[day][slot] = agg.presence_count / agg.observation_count
    return OccupancyProfile(grid, len(aggregates.weeks))


@dataclass
class ApplianceUsage:
    """Habit summary for one appliance."""

    weekly_on_hours: float
    typical_on_slots: list  # sorted slot indices where turn-ons concentrate
    typical_on_outdoor_temp: float | None

    def to_json(self) -> dict:
        return {"weekly_on_hours": self.weekly_on_hours,
                "typical_on_slots": self.typical_on_slots,
                "typical_on_outdoor_temp": self.typical_on_outdoor_temp}

    @classmethod
    def from_json(cls, obj: dict) -> "ApplianceUsage":
        return cls(obj["weekly_on_hours"], obj["typical_on_slots"],
                   obj["typical_on_outdoor_temp"])


@dataclass
class HabitProfile:
    usage: dict  # appliance id -> ApplianceUsage
    window_weeks: int

    def weekly_on_hours(self, appliance_id: str) -> float:
        entry = self.usage.get(appliance_id)
        return entry.weekly_on_hours if entry else 0.0

    def to_json(self) -> dict:
        return {"window_weeks": self.window_weeks,
                "usage": {aid: u.to_json() for aid, u in sorted(self.usage.items())}}

    @classmethod
    def from_json(cls, obj: dict) -> "HabitProfile":
        return cls({aid: ApplianceUsage.from_json(u) for aid, u in obj["usage"].items()},
                   obj["window_weeks"])


def appliance_transitions(readings, appliance_ids):
    """Extract on/off transitions per appliance from power readings.

    Returns {appliance id: [(t, on, outdoor_temp_at_t), ...]} in time order.
    The outdoor temperature attached to a turn-on is the latest one seen at
    or before it, for the habit profile's contextual condition.
    """
    ids = set(appliance_ids)
    transitions: dict = {aid: [] for aid in ids}
    was_on = {aid: False for aid in ids}
    outdoor_temp = None
    for r in readings:
        if r.kind == "temperature" and r.placement == "outdoor" and r.in_range():
            outdoor_temp = r.value
        elif r.kind == "power" and r.sensor_id in ids and r.in_range():
            on = r.value > 0.0
            if on != was_on[r.sensor_id]:
                transitions[r.sensor_id].append((r.t, on, outdoor_temp))
                was_on[r.sensor_id] = on
    return transitions


def habit_profile(aggregates: AggregateSet, transitions: dict, weeks: int | None = None,
                  typicality: float = 0.5) -> HabitProfile:
    """Expected on-hours per week plus the slots where turn-ons concentrate.

    A slot counts as typical when it saw a turn-on in at least `typicality`
    of the observed weeks. Appliances with no history get zero hours and an
    empty slot set.
    """
    if weeks is None:
        weeks = max(1, len(aggregates.weeks))
    if weeks < 1:
        raise InsufficientHistoryError("habit profile needs at least one week of history")
    span_end = aggregates.t_max
    usage = {}
    for aid, events in sorted(transitions.items()):
        on_seconds = 0
        on_at: int | None = None
        slot_weeks: dict = {}
        on_temps = []
        for t, on, outdoor in events:
            if on:
                if on_at is None:
                    on_at = t
                slot_weeks.setdefault(slot_of(t), set()).add(week_of(t))
                if outdoor is not None:
                    on_temps.append(outdoor)
            elif on_at is not None:
                on_seconds += t - on_at
                on_at = None
        if on_at is not None and span_end is not None and span_end > on_at:
            on_seconds += span_end - on_at
        needed = typicality * weeks
        slots = sorted(s for s, wks in slot_weeks.items() if len(wks) >= needed)
        mean_temp = sum(on_temps) / len(on_temps) if on_temps else None
        usage[aid] = ApplianceUsage(on_seconds / 3600.0 / weeks, slots, mean_temp)
    return HabitProfile(usage, weeks)


MM_USER_EXIT = "user_exit"
MM_USER_ENTER = "user_enter"
MM_DEVICE_ON_EXTENDED = "device_on_extended"
MM_CONTEXT_FAVORABLE = "context_favorable"


@dataclass(frozen=True, slots=True)
class MicroMoment:
    t: int
    kind: str
    appliance_id: str | None
    snapshot: ContextSnapshot


def _favorable(snap: ContextSnapshot, config: EngineConfig) -> bool:
    return (snap.outdoor_temp <= snap.indoor_temp - config.cooling_delta_c
            or snap.outdoor_lux >= config.natural_light_lux)


def detect_micro_moments(prev: ContextSnapshot | None, cur: ContextSnapshot,
                         config: EngineConfig) -> list:
    """Edge-triggered moments of interest between two consecutive snapshots.

    Returns [] during warm-up (incomplete snapshots). Re-evaluating the same
    pair yields the same list; steady conditions never re-emit.
    """
    if prev is None or not prev.complete or not cur.complete:
        return []
    moments = []
    thr = config.absence_threshold_s
    if prev.absence_seconds < thr <= cur.absence_seconds:
        moments.append(MicroMoment(cur.t, MM_USER_EXIT, None, cur))
    if prev.absence_seconds >= thr and cur.occupied:
        moments.append(MicroMoment(cur.t, MM_USER_ENTER, None, cur))
    for state in cur.appliances:
        if not state.is_on or state.on_since is None:
            continue
        if cur.t - state.on_since < config.extended_use_s:
            continue
        before = prev.appliance(state.id)
        was_extended = (before is not None and before.is_on and before.on_since is not None
                        and prev.t - before.on_since >= config.extended_use_s)
        if not was_extended:
            moments.append(MicroMoment(cur.t, MM_DEVICE_ON_EXTENDED, state.id, cur))
    if _favorable(cur, config) and not _favorable(prev, config):
        moments.append(MicroMoment(cur.t, MM_CONTEXT_FAVORABLE, None, cur))
    return moments


@dataclass
class KnowledgeBase:
    """The knowledge-base snapshot consumed by the trigger engine."""

    occupancy: OccupancyProfile
    habits: HabitProfile
    thresholds: dict
    generated_at: int
    persuasion: dict = field(default_factory=dict)  # user id -> {"w_eco", "w_econ"}

    def to_json(self) -> dict:
        return {
            "v": 1,
            "generated_at": self.generated_at,
            "occupancy": self.occupancy.to_json(),
            "habits": self.habits.to_json(),
            "thresholds": self.thresholds,
            "persuasion": self.persuasion,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "KnowledgeBase":
        return cls(
            occupancy=OccupancyProfile.from_json(obj["occupancy"]),
            habits=HabitProfile.from_json(obj["habits"]),
            thresholds=obj.get("thresholds", {}),
            generated_at=obj.get("generated_at", 0),
            persuasion=obj.get("persuasion", {}),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "KnowledgeBase":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))

    def fingerprint(self) -> str:
        return canonical_json(self.to_json())

    def persuasion_weights(self, user_id: str) -> tuple[float, float] | None:
        entry = self.persuasion.get(user_id)
        if entry is None:
            return None
        return entry["w_eco"], entry["w_econ"]

    def with_persuasion(self, user_id: str, w_eco: float, w_econ: float) -> "KnowledgeBase":
        """Copy with one user's persuasion weights stored, for persisting
        profiles across sessions."""
        persuasion = {**self.persuasion, user_id: {"w_eco": w_eco, "w_econ": w_econ}}
        return KnowledgeBase(self.occupancy, self.habits, self.thresholds,
                             self.generated_at, persuasion)


def build_kb(readings, appliance_ids, weeks: int | None = None,
             config: EngineConfig | None = None) -> KnowledgeBase:
    """Build a knowledge-base snapshot from a readings stream."""
    config = config or EngineConfig()
    readings = list(readings)
    aggs = aggregate(readings)
    occ = occupancy_profile(aggs)
    transitions = appliance_transitions(readings, appliance_ids)
    habits = habit_profile(aggs, transitions, weeks)
    thresholds = {
        "absence_threshold_s": config.absence_threshold_s,
        "extended_use_s": config.extended_use_s,
        "cooling_delta_c": config.cooling_delta_c,
        "natural_light_lux": config.natural_light_lux,
        "occupancy_cutoff": config.occupancy_cutoff,
    }
    return KnowledgeBase(occ, habits, thresholds, generated_at=aggs.t_max or 0)
