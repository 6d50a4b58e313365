import json

import pytest

from wattwise.model import (
    DAY_SECONDS,
    EventLog,
    OrderingError,
    SensorReading,
    SessionEvent,
    at,
    canonical_json,
    day_of_week,
    fmt_clock,
    slot_of,
    state_hash,
)


def test_slot_of_base_cases():
    assert slot_of(0) == 0
    assert slot_of(at(0, 0, 23, 59, 59)) == 287
    # 09:07:30 -> floor(32850 / 300) = 109
    assert slot_of(at(0, 0, 9, 7, 30)) == 109


def test_slot_of_covers_every_slot_and_is_monotone():
    seen = set()
    prev = -1
    for sec in range(0, DAY_SECONDS, 30):
        s = slot_of(sec)
        assert 0 <= s <= 287
        assert s >= prev
        prev = s
        seen.add(s)
    assert seen == set(range(288))


def test_day_of_week_and_clock():
    assert day_of_week(0) == 0
    assert day_of_week(at(1, 2, 0)) == 2
    assert fmt_clock(at(0, 1, 9, 7)) == "Tuesday 09:07"


def test_reading_ranges():
    ok = SensorReading(0, "temp-indoor", "temperature", "indoor", 25.0)
    assert ok.in_range()
    assert not SensorReading(0, "t", "temperature", "indoor", 81.0).in_range()
    assert not SensorReading(0, "h", "humidity", "indoor", -1.0).in_range()
    assert not SensorReading(0, "m", "motion", "indoor", 0.5).in_range()
    assert not SensorReading(0, "p", "power", "indoor", -0.1).in_range()
    assert SensorReading(0, "l", "luminosity", "outdoor", 0.0).in_range()


def test_append_base_case():
    log = EventLog()
    log.append(SessionEvent(1, 0, "reading_ingested", {}))
    assert len(log) == 1


def test_append_rejects_sequence_gap():
    log = EventLog()
    for seq in range(1, 6):
        log.append(SessionEvent(seq, seq, "reading_ingested", {}))
    with pytest.raises(OrderingError):
        log.append(SessionEvent(7, 10, "reading_ingested", {}))


def test_append_rejects_time_regression():
    log = EventLog()
    log.append(SessionEvent(1, 100, "reading_ingested", {}))
    with pytest.raises(OrderingError):
        log.append(SessionEvent(2, 99, "reading_ingested", {}))


def test_event_jsonl_round_trip_is_byte_stable(tmp_path):
    log = EventLog()
    for seq in range(1, 1001):
        log.append(SessionEvent(seq, seq * 7, "reading_ingested",
                                {"motion": seq % 2, "indoor_temp": 20.0 + (seq % 9) / 3.0,
                                 "outdoor_temp": 30.0, "indoor_lux": 1.5, "outdoor_lux": 2.0,
                                 "power": {"ac": 3.2 if seq % 3 else 0.0}}))
    path = tmp_path / "log.jsonl"
    log.write(path)
    reread = EventLog.read(path)
    assert reread.to_lines() == log.to_lines()
    # applying the same events twice lands in the same terminal state
    assert (reread.last_seq, reread.last_t) == (log.last_seq, log.last_t)
    assert state_hash({"lines": log.to_lines()}) == state_hash({"lines": reread.to_lines()})


def test_event_schema_version_enforced():
    with pytest.raises(Exception):
        SessionEvent.from_json({"v": 2, "seq": 1, "t": 0, "kind": "x", "data": {}})
    obj = json.loads(canonical_json(SessionEvent(1, 0, "reading_ingested", {}).to_json()))
    assert obj["v"] == 1
