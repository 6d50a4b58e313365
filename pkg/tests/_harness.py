"""Worker functions for the acceptance suite's batch harnesses.

Module-level so multiprocessing can import them; chunked so worker IPC stays
negligible next to the simulation work.
"""

from __future__ import annotations

from dataclasses import replace

from wattwise.audit import audit_events
from wattwise.config import EngineConfig
from wattwise.explain import MODES
from wattwise.model import EV_RECOMMENDATION, EV_RESPONSE, at
from wattwise.rng import Stream, derive_seed
from wattwise.sim import (
    ApplianceSpec,
    Persona,
    ScenarioSpec,
    Session,
    UserParams,
    WeatherParams,
    schedule_kb,
    uniform_persona,
)

DAY_KEYS = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")


def dense_spec(days=3):
    """Alternating one-hour presence blocks: the trigger-dense harness
    scenario (many exits, hot afternoons, everything left on)."""
    return ScenarioSpec(
        name="harness-dense",
        occupancy={d: [8, 10, 12, 14, 16, 18, 20] for d in DAY_KEYS[:5]},
        weather=WeatherParams(temp_min_c=18.0, temp_max_c=34.0),
        appliances=(ApplianceSpec("ac", "ac", 3.2),
                    ApplianceSpec("lights", "lights", 0.12),
                    ApplianceSpec("monitor", "monitor", 0.06)),
        user=UserParams(comfort_on_temp_c=24.0, lux_on_threshold=800.0,
                        leave_on_p={"ac": 0.95, "lights": 0.95, "monitor": 0.95}),
        session_start=at(0, 0, 8),
        session_end=at(0, days - 1, 22),
    )


def harness_config(spec, **overrides) -> EngineConfig:
    """Engine config for statistical harnesses: profile adaptation frozen and
    permanent pauses disabled so response streams stay stationary."""
    return replace(spec.engine_config(), profile_step=0.0,
                   permanent_pause_threshold=10**9, auto_accept_threshold=10**9,
                   **overrides)


def random_setup(seed: int):
    """One randomized (spec, config, persona, mode) tuple for the timing
    criterion. Timing constants stay at protocol defaults; everything else
    varies."""
    rng = Stream(derive_seed(seed, "setup"))
    day = rng.randint(0, 6)
    start_h = rng.randint(5, 10)
    end_h = start_h + rng.randint(3, 7)
    hours = [h for h in range(5, 23) if rng.uniform() < 0.5]
    spec = ScenarioSpec(
        name=f"rand-{seed}",
        occupancy={DAY_KEYS[day]: hours},
        weather=WeatherParams(
            temp_min_c=5.0 + 15.0 * rng.uniform(),
            temp_max_c=23.0 + 17.0 * rng.uniform(),
            temp_peak_hour=13.0 + 4.0 * rng.uniform(),
            lux_max=5000.0 + 55000.0 * rng.uniform(),
            sunrise_hour=4.0 + 4.0 * rng.uniform(),
            sunset_hour=17.0 + 5.0 * rng.uniform(),
        ),
        appliances=(ApplianceSpec("ac", "ac", 1.0 + 3.0 * rng.uniform()),
                    ApplianceSpec("lights", "lights", 0.05 + 0.25 * rng.uniform()),
                    ApplianceSpec("monitor", "monitor", 0.03 + 0.07 * rng.uniform())),
        user=UserParams(comfort_on_temp_c=22.0 + 5.0 * rng.uniform(),
                        lux_on_threshold=300.0 + 900.0 * rng.uniform(),
                        leave_on_p={"ac": 0.3 + 0.65 * rng.uniform(),
                                    "lights": 0.3 + 0.65 * rng.uniform(),
                                    "monitor": 0.3 + 0.65 * rng.uniform()}),
        motion_dropout_p=0.1 * rng.uniform(),
        session_start=at(0, day, start_h),
        session_end=at(0, day, end_h),
        seed=seed,
    )
    config = replace(
        spec.engine_config(),
        cooling_delta_c=0.5 + 1.5 * rng.uniform(),
        natural_light_lux=6000.0 + 14000.0 * rng.uniform(),
        occupancy_cutoff=0.3 + 0.4 * rng.uniform(),
        auto_execute=rng.uniform() < 0.2,
        auto_accept_threshold=3 + rng.randint(0, 3),
    )
    persona = uniform_persona(
        f"rand-{seed}",
        {mode: 0.2 + 0.75 * rng.uniform() for mode in MODES},
        p_ignore=0.4 * rng.uniform(),
    )
    mode = MODES[seed % 3]
    return spec, config, persona, mode


def run_random_chunk(seeds) -> dict:
    """Run+audit a block of randomized sessions; returns violation strings
    and coverage counters."""
    violations = []
    issued = 0
    sessions = 0
    for seed in seeds:
        spec, config, persona, mode = random_setup(seed)
        session = Session(spec, schedule_kb(spec, config), mode, seed,
                          config=config, persona=persona)
        result = session.run()
        sessions += 1
        issued += result.stats["issued"]
        for v in audit_events(result.events):
            violations.append(f"seed={seed}: {v}")
    return {"sessions": sessions, "issued": issued, "violations": violations}


def run_cell_chunk(args) -> dict:
    """Explainable sessions with a per-cell persona; returns pooled
    (fact, projection) -> [accepted, rejected, ignored] counts."""
    seeds, persona_json, days = args
    spec = dense_spec(days)
    config = harness_config(spec)
    kb = schedule_kb(spec, config)
    persona = Persona.from_json(persona_json)
    cells: dict = {}
    for seed in seeds:
        session = Session(spec, kb, "explainable", seed, config=config, persona=persona)
        result = session.run()
        facts = {}
        for ev in result.events:
            if ev.kind == EV_RECOMMENDATION:
                fact = ev.data["rec"]["fact"]
                facts[ev.data["rec"]["id"]] = (fact["fact_type"], fact["projection"])
            elif ev.kind == EV_RESPONSE:
                key = facts[ev.data["rec_id"]]
                cell = cells.setdefault(key, [0, 0, 0])
                idx = {"accept": 0, "reject": 1, "ignore": 2}[ev.data["response"]]
                cell[idx] += 1
    return cells


def run_mode_block(args) -> float | None:
    """One persona's pooled acceptance ratio over `n_sessions` in one mode."""
    mode, persona_json, seeds, days = args
    spec = dense_spec(days)
    config = harness_config(spec)
    kb = schedule_kb(spec, config)
    persona = Persona.from_json(persona_json)
    accepted = rejected = 0
    for seed in seeds:
        session = Session(spec, kb, mode, seed, config=config, persona=persona)
        result = session.run()
        accepted += result.stats["accepted"]
        rejected += result.stats["rejected"]
    return accepted / (accepted + rejected) if accepted + rejected else None
