"""Exogenous environment and first-order indoor dynamics.

The outdoor curves and the motion stream are precomputed for the whole
session on a 1-minute grid (this is the hot path the compiled kernels
serve). Indoor temperature relaxes toward the A/C setpoint while cooling and
toward the outdoor temperature otherwise; indoor light is memoryless:
window_factor * outdoor lux plus a fixed contribution while the lights are
on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .. import kernels
from ..model import DAY_SECONDS, day_of_week
from .scenario import DynamicsParams, ScenarioSpec

STEP_S = 60


@dataclass(frozen=True, slots=True)
class IndoorState:
    temperature_c: float
    lux: float


def step_dynamics(state: IndoorState, outdoor_temp: float, outdoor_lux: float,
                  ac_on: bool, lights_on: bool, params: DynamicsParams,
                  dt_s: float = STEP_S) -> IndoorState:
    """Advance the indoor state by one step."""
    if ac_on:
        temp = kernels.step_temp(state.temperature_c, params.ac_setpoint_c, dt_s, params.tau_ac_s)
    else:
        temp = kernels.step_temp(state.temperature_c, outdoor_temp, dt_s, params.tau_room_s)
    lux = params.window_factor * outdoor_lux + (params.lights_lux if lights_on else 0.0)
    return IndoorState(temp, lux)


class Exogenous:
    """Minute-gridded outdoor temperature/lux, schedule occupancy and the
    noisy motion signal for [t_start, t_end]."""

    def __init__(self, spec: ScenarioSpec, t_start: int, t_end: int, motion_stream):
        self.t_start = t_start
        self.n = (t_end - t_start) // STEP_S + 1
        w = spec.weather
        self.temps, self.luxes = kernels.weather_series(
            self.n, t_start, STEP_S, w.temp_min_c, w.temp_max_c, w.temp_peak_hour,
            w.lux_max, w.sunrise_hour, w.sunset_hour)
        occupied = []
        day_hours = [spec.occupied_hours(d) for d in range(7)]
        for i in range(self.n):
            t = t_start + i * STEP_S
            occupied.append(1 if ((t % DAY_SECONDS) // 3600) in day_hours[day_of_week(t)] else 0)
        self.occupied = occupied
        self.motion, motion_stream.state, motion_stream.count = kernels.motion_series(
            occupied, spec.motion_dropout_p, motion_stream.state, motion_stream.count)

    def index(self, t: int) -> int:
        return (t - self.t_start) // STEP_S

    def next_occupied_after(self, t: int) -> int | None:
        """First minute strictly after t where the schedule says present."""
        i = self.index(t) + 1
        while i < self.n:
            if self.occupied[i]:
                return self.t_start + i * STEP_S
            i += 1
        return None


class Room:
    """Indoor state stepped along the exogenous grid."""

    def __init__(self, spec: ScenarioSpec, exo: Exogenous):
        self.params = spec.dynamics
        self.exo = exo
        self.state = IndoorState(spec.indoor_initial_temp_c, spec.indoor_initial_lux)
        self._coeff_ac = math.exp(-STEP_S / spec.dynamics.tau_ac_s)
        self._coeff_room = math.exp(-STEP_S / spec.dynamics.tau_room_s)
        self._last_index = 0

    def advance_to(self, t: int, ac_on: bool, lights_on: bool) -> IndoorState:
        """Step the room minute by minute up to grid index of `t`, holding the
        given appliance states across the interval."""
        i = self.exo.index(t)
        if i > self._last_index:
            temp = self.state.temperature_c
            if ac_on:
                # Constant target: iterate the same per-minute step the
                # general path takes, without touching the outdoor array.
                setpoint = self.params.ac_setpoint_c
                for _ in range(i - self._last_index):
                    temp = setpoint + (temp - setpoint) * self._coeff_ac
            else:
                temp = kernels.relax_through(temp, self.exo.temps,
                                             self._last_index + 1, i + 1, self._coeff_room)
            lux = self.params.window_factor * self.exo.luxes[i] + (
                self.params.lights_lux if lights_on else 0.0)
            self.state = IndoorState(temp, lux)
            self._last_index = i
        return self.state

    def refresh_lux(self, t: int, lights_on: bool) -> IndoorState:
        """Indoor light reacts instantly to toggles within the same minute."""
        i = self.exo.index(t)
        lux = self.params.window_factor * self.exo.luxes[i] + (
            self.params.lights_lux if lights_on else 0.0)
        self.state = replace(self.state, lux=lux)
        return self.state
