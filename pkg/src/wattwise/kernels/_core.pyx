# cython: language_level=3
"""Compiled twin of `_ref.py`. Keep the float operation order identical to
the reference: both must produce bit-identical results (no fast-math)."""

from libc.math cimport cos, sin, exp, ldexp

cdef extern from "math.h":
    double M_PI

cdef double TWO_PI = 6.283185307179586
cdef double INV53 = ldexp(1.0, -53)
cdef unsigned long long GAMMA = 0x9E3779B97F4A7C15ULL


def weather_series(Py_ssize_t n, long long t0, long long step_s,
                   double temp_min, double temp_max, double temp_peak_hour,
                   double lux_max, double sunrise_h, double sunset_h):
    """Outdoor temperature and luminosity sampled every `step_s` seconds."""
    cdef double mid = (temp_min + temp_max) * 0.5
    cdef double amp = (temp_max - temp_min) * 0.5
    cdef double span = sunset_h - sunrise_h
    cdef list temps = []
    cdef list luxes = []
    cdef Py_ssize_t i
    cdef long long t
    cdef double hour
    for i in range(n):
        t = t0 + i * step_s
        hour = (t % 86400) / 3600.0
        temps.append(mid + amp * cos(TWO_PI * (hour - temp_peak_hour) / 24.0))
        if sunrise_h < hour < sunset_h:
            luxes.append(lux_max * sin(M_PI * (hour - sunrise_h) / span))
        else:
            luxes.append(0.0)
    return temps, luxes


def motion_series(occupied, double dropout_p, unsigned long long state,
                  long long count):
    """Motion bits with seeded one-minute dropouts inside occupied minutes."""
    cdef list bits = []
    cdef unsigned long long z
    cdef double u
    for occ in occupied:
        if occ:
            state = state + GAMMA
            count += 1
            z = state
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
            z = z ^ (z >> 31)
            u = <double>(z >> 11) * INV53
            bits.append(0 if u < dropout_p else 1)
        else:
            bits.append(0)
    return bits, state, count


def step_temp(double value, double target, double dt_s, double tau_s):
    """One first-order relaxation step toward `target`."""
    return target + (value - target) * exp(-dt_s / tau_s)


def relax_through(double value, list targets, Py_ssize_t start, Py_ssize_t end,
                  double coeff):
    """Relax `value` through targets[start:end] minute by minute."""
    cdef Py_ssize_t i
    cdef double target
    for i in range(start, end):
        target = targets[i]
        value = target + (value - target) * coeff
    return value
