"""Baseline trace generation: the sensor record of the office week without
any recommendation engine in the loop.

Emits one reading per sensor per minute over whole weeks (Monday 00:00
onward), which is what the knowledge builder consumes. Two runs with the
same spec are byte-identical.
"""

from __future__ import annotations

from ..config import EngineConfig
from ..knowledge import ApplianceUsage, HabitProfile, KnowledgeBase, OccupancyProfile, build_kb
from ..model import SLOTS_PER_DAY, WEEK_SECONDS, Appliance, SensorReading
from ..rng import StreamSet
from .environment import STEP_S, Exogenous, Room
from .scenario import ScenarioSpec


def generate_trace(spec: ScenarioSpec):
    """Yield one week's (or `spec.trace_weeks`) readings, minute by minute."""
    spec.validate()
    streams = StreamSet(spec.seed)
    t_start = 0
    t_end = spec.trace_weeks * WEEK_SECONDS - STEP_S
    exo = Exogenous(spec, t_start, t_end, streams["motion"])
    room = Room(spec, exo)
    appliances = {a.id: Appliance(a.id, a.kind, a.rated_kw) for a in spec.appliances}
    user = spec.user
    sched_prev = 0

    def any_on(kind):
        return any(a.kind == kind and a.is_on for a in appliances.values())

    for i in range(exo.n):
        t = t_start + i * STEP_S
        room.advance_to(t, any_on("ac"), any_on("lights"))
        sched = exo.occupied[i]
        if sched != sched_prev:
            if sched:
                for app in sorted(appliances.values(), key=lambda a: a.id):
                    if app.kind == "monitor":
                        app.turn_on(t)
                    elif app.kind == "ac" and room.state.temperature_c > user.comfort_on_temp_c:
                        app.turn_on(t)
                    elif app.kind == "lights" and room.state.lux < user.lux_on_threshold:
                        app.turn_on(t)
            else:
                for app in sorted(appliances.values(), key=lambda a: a.id):
                    if app.is_on and streams["user"].uniform() >= user.leave_on_p.get(
                            app.id, user.leave_on_p.get(app.kind, 0.5)):
                        app.turn_off(t)
            sched_prev = sched
            room.refresh_lux(t, any_on("lights"))
        yield SensorReading(t, "temp-indoor", "temperature", "indoor", room.state.temperature_c)
        yield SensorReading(t, "temp-outdoor", "temperature", "outdoor", exo.temps[i])
        yield SensorReading(t, "lux-indoor", "luminosity", "indoor", room.state.lux)
        yield SensorReading(t, "lux-outdoor", "luminosity", "outdoor", exo.luxes[i])
        yield SensorReading(t, "motion-1", "motion", "indoor", float(exo.motion[i]))
        for aid, app in sorted(appliances.items()):
            yield SensorReading(t, aid, "power", "indoor", app.power_kw)


def default_kb(spec: ScenarioSpec, config: EngineConfig | None = None) -> KnowledgeBase:
    """Knowledge base built the long way: generate the baseline trace and
    aggregate it."""
    config = config or spec.engine_config()
    return build_kb(generate_trace(spec), [a.id for a in spec.appliances],
                    weeks=spec.trace_weeks, config=config)


_KIND_DUTY = {"monitor": 1.0, "lights": 0.6, "ac": 0.5}


def schedule_kb(spec: ScenarioSpec, config: EngineConfig | None = None) -> KnowledgeBase:
    """Cheap synthetic knowledge base derived straight from the schedule:
    occupancy probability 1 in scheduled hours, habitual on-hours estimated
    from scheduled presence. Used where building the kb from a full trace per
    session would dominate runtime (randomized batch harnesses)."""
    config = config or spec.engine_config()
    grid = [[0.0] * SLOTS_PER_DAY for _ in range(7)]
    weekly_hours = 0
    for day in range(7):
        hours = spec.occupied_hours(day)
        weekly_hours += len(hours)
        for h in hours:
            for slot in range(h * 12, (h + 1) * 12):
                grid[day][slot] = 1.0
    usage = {}
    for a in spec.appliances:
        duty = _KIND_DUTY.get(a.kind, 0.5)
        slots = sorted({h * 12 for d in range(7) for h in spec.occupied_hours(d)})
        usage[a.id] = ApplianceUsage(weekly_hours * duty, slots, None)
    thresholds = {
        "absence_threshold_s": config.absence_threshold_s,
        "extended_use_s": config.extended_use_s,
        "cooling_delta_c": config.cooling_delta_c,
        "natural_light_lux": config.natural_light_lux,
        "occupancy_cutoff": config.occupancy_cutoff,
    }
    return KnowledgeBase(OccupancyProfile(grid, spec.trace_weeks),
                         HabitProfile(usage, spec.trace_weeks), thresholds,
                         generated_at=0)
