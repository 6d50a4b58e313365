import math

import pytest

from wattwise import kernels
from wattwise.kernels import _ref
from wattwise.rng import Stream, derive_seed

compiled = pytest.mark.skipif(kernels.BACKEND != "cython",
                              reason="compiled extension not built")


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "pure-python", "pure-python (forced)")


def test_weather_series_shape_and_bounds():
    temps, luxes = _ref.weather_series(1440, 0, 60, 15.0, 33.0, 15.0, 30000.0, 6.0, 20.0)
    assert len(temps) == len(luxes) == 1440
    assert min(temps) >= 15.0 - 1e-9 and max(temps) <= 33.0 + 1e-9
    # peak hour hits the maximum, night lux is exactly zero
    assert temps[15 * 60] == pytest.approx(33.0)
    assert luxes[0] == 0.0 and luxes[23 * 60] == 0.0
    assert max(luxes) <= 30000.0 + 1e-9


def test_motion_series_only_in_occupied_minutes():
    occupied = [1, 1, 0, 0, 1, 0, 1, 1, 1, 0]
    bits, _, count = _ref.motion_series(occupied, 0.0, 123, 0)
    assert bits == occupied  # no dropout at p=0
    assert count == sum(occupied)
    bits_all_drop, _, _ = _ref.motion_series(occupied, 1.0, 123, 0)
    assert bits_all_drop == [0] * len(occupied)


def test_motion_series_matches_stream_draws():
    seed = derive_seed(42, "motion")
    stream = Stream(seed)
    expected = [0 if stream.uniform() < 0.3 else 1 for _ in range(20)]
    bits, state, count = _ref.motion_series([1] * 20, 0.3, seed, 0)
    assert bits == expected
    assert (state, count) == (stream.state, stream.count)


def test_step_temp_closed_form():
    got = _ref.step_temp(30.0, 24.0, 60.0, 900.0)
    assert got == pytest.approx(30.0 + (24.0 - 30.0) * (1.0 - math.exp(-60.0 / 900.0)),
                                abs=1e-12)


def test_relax_through_equals_stepping():
    targets = [20.0 + i * 0.1 for i in range(100)]
    coeff = math.exp(-60.0 / 3600.0)
    value = 30.0
    for i in range(100):
        value = targets[i] + (value - targets[i]) * coeff
    assert _ref.relax_through(30.0, targets, 0, 100, coeff) == value


@compiled
def test_compiled_weather_bit_identical():
    args = (5000, 28800, 60, 15.0, 33.0, 15.0, 30000.0, 6.0, 20.0)
    assert kernels.weather_series(*args) == _ref.weather_series(*args)


@compiled
def test_compiled_motion_bit_identical():
    occupied = [i % 3 != 0 for i in range(5000)]
    a = kernels.motion_series(occupied, 0.05, 987654321, 0)
    b = _ref.motion_series(occupied, 0.05, 987654321, 0)
    assert a == b


@compiled
def test_compiled_relax_bit_identical():
    targets = [15.0 + math.sin(i / 50.0) * 9.0 for i in range(2000)]
    coeff = math.exp(-60.0 / 3600.0)
    assert kernels.relax_through(31.0, targets, 3, 1997, coeff) == \
        _ref.relax_through(31.0, targets, 3, 1997, coeff)


@compiled
def test_compiled_step_bit_identical():
    for value, target, tau in ((30.0, 24.0, 900.0), (18.3, 27.9, 3600.0), (24.0, 24.0, 900.0)):
        assert kernels.step_temp(value, target, 60.0, tau) == \
            _ref.step_temp(value, target, 60.0, tau)
