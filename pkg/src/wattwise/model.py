"""Core domain types: simulated time, sensor readings, appliances, context
snapshots and the append-only session event log.

Simulated time is an integer count of seconds since Monday 00:00:00 of week
zero (1-second resolution). Days split into 288 five-minute slots, the
granularity at which presence/usage knowledge is kept.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

SLOT_SECONDS = 300
SLOTS_PER_DAY = 288
DAY_SECONDS = 86400
WEEK_SECONDS = 7 * DAY_SECONDS

DAY_NAMES = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")

SENSOR_KINDS = ("temperature", "humidity", "luminosity", "motion", "power")
PLACEMENTS = ("indoor", "outdoor")
APPLIANCE_KINDS = ("ac", "lights", "monitor")

# A motion reading covers one sampling interval: the room counts as occupied
# for this many seconds after the last motion=1 signal.
OCCUPANCY_HOLD_S = 60


class OrderingError(ValueError):
    """Event violates the append-only ordering contract."""


class LogFormatError(ValueError):
    """A serialized event line is malformed or has the wrong schema version."""


def slot_of(t: int) -> int:
    """5-minute slot index within the day, 0..287."""
    return (t % DAY_SECONDS) // SLOT_SECONDS


def day_of_week(t: int) -> int:
    """0=Monday .. 6=Sunday."""
    return (t % WEEK_SECONDS) // DAY_SECONDS


def week_of(t: int) -> int:
    return t // WEEK_SECONDS


def hour_of(t: int) -> int:
    return (t % DAY_SECONDS) // 3600


def at(week: int, day: int, hour: int, minute: int = 0, second: int = 0) -> int:
    """Build a timestamp from calendar-ish parts."""
    return week * WEEK_SECONDS + day * DAY_SECONDS + hour * 3600 + minute * 60 + second


def fmt_time(t: int) -> str:
    """Readable instant, e.g. 'Tuesday 09:07:30 (week 1)'."""
    sec = t % DAY_SECONDS
    label = f"{DAY_NAMES[day_of_week(t)]} {sec // 3600:02d}:{(sec % 3600) // 60:02d}:{sec % 60:02d}"
    week = week_of(t)
    return f"{label} (week {week + 1})" if week else label


def fmt_clock(t: int) -> str:
    """Short display form for messages, e.g. 'Tuesday 09:07'."""
    sec = t % DAY_SECONDS
    return f"{DAY_NAMES[day_of_week(t)]} {sec // 3600:02d}:{(sec % 3600) // 60:02d}"


@dataclass(frozen=True, slots=True)
class SensorReading:
    """One timestamped measurement from a sensor.

    Power readings use the appliance id as their sensor id, which is how
    appliance on/off state is inferred downstream.
    """

    t: int
    sensor_id: str
    kind: str
    placement: str
    value: float

    def in_range(self) -> bool:
        if self.kind == "temperature":
            return -40.0 <= self.value <= 80.0
        if self.kind == "humidity":
            return 0.0 <= self.value <= 100.0
        if self.kind == "luminosity":
            return self.value >= 0.0
        if self.kind == "motion":
            return self.value in (0.0, 1.0)
        if self.kind == "power":
            return self.value >= 0.0
        return False

    def to_json(self) -> dict:
        return {"t": self.t, "sensor": self.sensor_id, "kind": self.kind,
                "place": self.placement, "value": self.value}

    @classmethod
    def from_json(cls, obj: dict) -> "SensorReading":
        return cls(obj["t"], obj["sensor"], obj["kind"], obj["place"], float(obj["value"]))


@dataclass
class Appliance:
    """A controllable device. `on_since` is None while off."""

    id: str
    kind: str
    rated_kw: float
    is_on: bool = False
    last_toggle: int = 0
    on_since: int | None = None

    def turn_on(self, now: int) -> None:
        if not self.is_on:
            self.is_on = True
            self.on_since = now
            self.last_toggle = now

    def turn_off(self, now: int) -> None:
        if self.is_on:
            self.is_on = False
            self.on_since = None
            self.last_toggle = now

    @property
    def power_kw(self) -> float:
        return self.rated_kw if self.is_on else 0.0


@dataclass(frozen=True, slots=True)
class ApplianceState:
    """Immutable view of one appliance inside a context snapshot."""

    id: str
    kind: str
    rated_kw: float
    is_on: bool
    on_since: int | None


@dataclass(frozen=True, slots=True)
class ContextSnapshot:
    """Latest known conditions at `t`; complete once warm-up has seen every
    sensor at least once."""

    t: int
    indoor_temp: float | None
    outdoor_temp: float | None
    indoor_lux: float | None
    outdoor_lux: float | None
    last_motion_at: int | None
    motion_seen: bool
    appliances: tuple[ApplianceState, ...]

    @property
    def occupied(self) -> bool:
        return self.last_motion_at is not None and (self.t - self.last_motion_at) < OCCUPANCY_HOLD_S

    @property
    def absence_seconds(self) -> int:
        """Seconds since the last motion signal (a large number if never seen)."""
        if self.last_motion_at is None:
            return self.t + DAY_SECONDS
        return self.t - self.last_motion_at

    @property
    def complete(self) -> bool:
        return (self.indoor_temp is not None and self.outdoor_temp is not None
                and self.indoor_lux is not None and self.outdoor_lux is not None
                and self.motion_seen)

    def appliance(self, appliance_id: str) -> ApplianceState | None:
        for a in self.appliances:
            if a.id == appliance_id:
                return a
        return None


class ContextTracker:
    """Folds the reading stream into the current context.

    Appliance on/off state is inferred from power readings (value > 0 means
    on); `on_since` is the time of the most recent off-to-on transition seen
    in the stream. The same class is used live and during log replay so both
    paths derive identical context.
    """

    def __init__(self, appliances: dict[str, tuple[str, float]]):
        # appliance id -> (kind, rated_kw)
        self._registry = dict(appliances)
        self.t: int = 0
        self.indoor_temp: float | None = None
        self.outdoor_temp: float | None = None
        self.indoor_lux: float | None = None
        self.outdoor_lux: float | None = None
        self.last_motion_at: int | None = None
        self._on_since: dict[str, int | None] = {aid: None for aid in self._registry}
        self._ever_motion_reading = False

    def ingest_batch(self, t: int, data: dict) -> None:
        """Apply one per-tick reading batch (the event-log form)."""
        self.t = t
        self.indoor_temp = data["indoor_temp"]
        self.outdoor_temp = data["outdoor_temp"]
        self.indoor_lux = data["indoor_lux"]
        self.outdoor_lux = data["outdoor_lux"]
        self._ever_motion_reading = True
        if data["motion"]:
            self.last_motion_at = t
        for aid, kw in data["power"].items():
            if kw > 0.0:
                if self._on_since.get(aid) is None:
                    self._on_since[aid] = t
            else:
                self._on_since[aid] = None

    def ingest_reading(self, reading: SensorReading) -> None:
        """Apply one standalone reading (trace-file path)."""
        self.t = max(self.t, reading.t)
        kind, place = reading.kind, reading.placement
        if kind == "temperature":
            if place == "indoor":
                self.indoor_temp = reading.value
            else:
                self.outdoor_temp = reading.value
        elif kind == "luminosity":
            if place == "indoor":
                self.indoor_lux = reading.value
            else:
                self.outdoor_lux = reading.value
        elif kind == "motion":
            self._ever_motion_reading = True
            if reading.value:
                self.last_motion_at = reading.t
        elif kind == "power":
            aid = reading.sensor_id
            if aid in self._registry:
                if reading.value > 0.0:
                    if self._on_since.get(aid) is None:
                        self._on_since[aid] = reading.t
                else:
                    self._on_since[aid] = None

    def note_actuation(self, appliance_id: str, now: int) -> None:
        """An accepted turn-off takes effect immediately, ahead of the next
        power reading."""
        if appliance_id in self._on_since:
            self._on_since[appliance_id] = None

    def snapshot(self, t: int | None = None) -> ContextSnapshot:
        now = self.t if t is None else t
        states = tuple(
            ApplianceState(aid, kind, kw, self._on_since[aid] is not None, self._on_since[aid])
            for aid, (kind, kw) in self._registry.items()
        )
        return ContextSnapshot(now, self.indoor_temp, self.outdoor_temp,
                               self.indoor_lux, self.outdoor_lux,
                               self.last_motion_at, self._ever_motion_reading, states)

    def state_dict(self) -> dict:
        return {
            "t": self.t,
            "indoor_temp": self.indoor_temp,
            "outdoor_temp": self.outdoor_temp,
            "indoor_lux": self.indoor_lux,
            "outdoor_lux": self.outdoor_lux,
            "last_motion_at": self.last_motion_at,
            "on_since": dict(sorted(self._on_since.items())),
        }


# Event kinds carried by the session log.
EV_SESSION_STARTED = "session_started"
EV_READINGS = "reading_ingested"
EV_MICRO_MOMENT = "micro_moment_detected"
EV_RECOMMENDATION = "recommendation_issued"
EV_RESPONSE = "response_recorded"
EV_ACTUATION = "actuation_applied"
EV_PROFILE = "profile_updated"
EV_SESSION_FINISHED = "session_finished"

EVENT_KINDS = (EV_SESSION_STARTED, EV_READINGS, EV_MICRO_MOMENT, EV_RECOMMENDATION,
               EV_RESPONSE, EV_ACTUATION, EV_PROFILE, EV_SESSION_FINISHED)


@dataclass(frozen=True, slots=True)
class SessionEvent:
    """One append-only log record (schema version 1 on the wire)."""

    seq: int
    t: int
    kind: str
    data: dict

    def to_json(self) -> dict:
        return {"v": 1, "seq": self.seq, "t": self.t, "kind": self.kind, "data": self.data}

    @classmethod
    def from_json(cls, obj: dict) -> "SessionEvent":
        if obj.get("v") != 1:
            raise LogFormatError(f"unsupported event schema version: {obj.get('v')!r}")
        return cls(obj["seq"], obj["t"], obj["kind"], obj["data"])


def canonical_json(obj) -> str:
    """Stable serialization: sorted keys, no whitespace. Used everywhere a
    byte-identical artifact is promised."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def state_hash(state: dict) -> str:
    return hashlib.sha256(canonical_json(state).encode("utf-8")).hexdigest()


class EventLog:
    """Append-only, strictly ordered event list with JSONL persistence."""

    def __init__(self, events: list[SessionEvent] | None = None):
        self.events: list[SessionEvent] = []
        if events:
            for ev in events:
                self.append(ev)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @property
    def last_seq(self) -> int:
        return self.events[-1].seq if self.events else 0

    @property
    def last_t(self) -> int:
        return self.events[-1].t if self.events else 0

    def append(self, event: SessionEvent) -> SessionEvent:
        if event.seq != self.last_seq + 1:
            raise OrderingError(
                f"event seq {event.seq} does not follow {self.last_seq}")
        if self.events and event.t < self.last_t:
            raise OrderingError(
                f"event time {event.t} precedes log time {self.last_t}")
        self.events.append(event)
        return event

    def to_lines(self) -> list[str]:
        return [canonical_json(ev.to_json()) for ev in self.events]

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for line in self.to_lines():
                fh.write(line + "\n")

    @classmethod
    def read(cls, path) -> "EventLog":
        log = cls()
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    log.append(SessionEvent.from_json(json.loads(line)))
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise LogFormatError(f"line {lineno}: {exc}") from exc
        return log


def write_readings_jsonl(path, readings) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in readings:
            fh.write(canonical_json(r.to_json()) + "\n")


def read_readings_jsonl(path):
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(SensorReading.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise LogFormatError(f"line {lineno}: {exc}") from exc
    return out
