"""Pure-Python reference implementations of the simulator hot loops.

The compiled twin in `_core.pyx` must stay line-for-line equivalent: both
backends are required to produce bit-identical floats (same libm calls, same
operation order), otherwise deterministic replay across installs breaks.
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_INV53 = 1.1102230246251565e-16  # 2**-53

TWO_PI = 6.283185307179586


def weather_series(n, t0, step_s, temp_min, temp_max, temp_peak_hour, lux_max,
                   sunrise_h, sunset_h):
    """Outdoor temperature and luminosity sampled every `step_s` seconds.

    Temperature is a 24 h cosine peaking at `temp_peak_hour`; luminosity is a
    half-sine daylight arch between sunrise and sunset, zero at night.
    """
    mid = (temp_min + temp_max) * 0.5
    amp = (temp_max - temp_min) * 0.5
    span = sunset_h - sunrise_h
    temps = []
    luxes = []
    for i in range(n):
        t = t0 + i * step_s
        hour = (t % 86400) / 3600.0
        temps.append(mid + amp * math.cos(TWO_PI * (hour - temp_peak_hour) / 24.0))
        if sunrise_h < hour < sunset_h:
            luxes.append(lux_max * math.sin(math.pi * (hour - sunrise_h) / span))
        else:
            luxes.append(0.0)
    return temps, luxes


def motion_series(occupied, dropout_p, state, count):
    """Motion bits for a run of minutes: 1 inside occupied minutes except for
    seeded one-minute dropouts, always 0 outside.

    `state`/`count` are the SplitMix64 stream position; one draw is consumed
    per occupied minute. Returns (bits, state, count).
    """
    bits = []
    for occ in occupied:
        if occ:
            state = (state + _GAMMA) & _MASK
            count += 1
            z = state
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
            z = z ^ (z >> 31)
            u = (z >> 11) * _INV53
            bits.append(0 if u < dropout_p else 1)
        else:
            bits.append(0)
    return bits, state, count


def step_temp(value, target, dt_s, tau_s):
    """One first-order relaxation step toward `target`."""
    return target + (value - target) * math.exp(-dt_s / tau_s)


def relax_through(value, targets, start, end, coeff):
    """Relax `value` through targets[start:end] with a fixed per-step
    coefficient (coeff = exp(-dt/tau)). Used to catch up across skipped
    idle periods one minute at a time."""
    for i in range(start, end):
        target = targets[i]
        value = target + (value - target) * coeff
    return value
