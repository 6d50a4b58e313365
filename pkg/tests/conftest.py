import pytest

from wattwise.config import EngineConfig
from wattwise.knowledge import ApplianceUsage, HabitProfile, KnowledgeBase, OccupancyProfile
from wattwise.model import SLOTS_PER_DAY, ApplianceState, ContextSnapshot, at
from wattwise.sim import (
    ApplianceSpec,
    ScenarioSpec,
    UserParams,
    WeatherParams,
    load_bundled_scenario,
    schedule_kb,
)


@pytest.fixture(scope="session")
def office_spec():
    return load_bundled_scenario("office-week")


@pytest.fixture(scope="session")
def office_kb(office_spec):
    return schedule_kb(office_spec)


@pytest.fixture(scope="session")
def dense_spec():
    """Alternating one-hour presence blocks: many exits, many triggers."""
    return ScenarioSpec(
        name="dense",
        occupancy={d: [8, 10, 12, 14, 16, 18, 20] for d in ("mon", "tue", "wed", "thu", "fri")},
        weather=WeatherParams(temp_min_c=18.0, temp_max_c=34.0),
        appliances=(ApplianceSpec("ac", "ac", 3.2),
                    ApplianceSpec("lights", "lights", 0.12),
                    ApplianceSpec("monitor", "monitor", 0.06)),
        user=UserParams(comfort_on_temp_c=24.0, lux_on_threshold=800.0,
                        leave_on_p={"ac": 0.95, "lights": 0.95, "monitor": 0.95}),
        session_start=at(0, 0, 8),
        session_end=at(0, 2, 22),
    )


@pytest.fixture(scope="session")
def dense_kb(dense_spec):
    return schedule_kb(dense_spec)


def make_kb(p_occ: float = 0.0, weekly_hours: float = 10.0) -> KnowledgeBase:
    """Uniform-probability kb for driving the engine by hand."""
    grid = [[p_occ] * SLOTS_PER_DAY for _ in range(7)]
    usage = {aid: ApplianceUsage(weekly_hours, [96], None)
             for aid in ("ac", "lights", "monitor")}
    return KnowledgeBase(OccupancyProfile(grid, 1), HabitProfile(usage, 1), {}, 0)


def make_snapshot(t, indoor_temp=26.0, outdoor_temp=30.0, indoor_lux=800.0,
                  outdoor_lux=5000.0, last_motion_at=None, appliances=()):
    """Hand-built context; `appliances` is a list of (id, kind, kw, on, on_since)."""
    states = tuple(ApplianceState(*a) for a in appliances)
    if last_motion_at is None:
        last_motion_at = t  # occupied right now
    return ContextSnapshot(t, indoor_temp, outdoor_temp, indoor_lux, outdoor_lux,
                           last_motion_at, True, states)


@pytest.fixture
def default_config():
    return EngineConfig()
