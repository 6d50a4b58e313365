"""Standalone log auditor.

Verifies, from the log alone, every timing and accounting promise the engine
makes: response windows, ignore/reject cooldowns, the one-hour episode cap,
that trigger conditions were actually true at every (re)issue, that messages
match their scenario mode, and that claimed savings never exceed metered
consumption. The rule conditions are re-derived here from the raw reading
events on purpose: the auditor must not trust any state the engine logged
about itself. A final check replays the log and compares state hashes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import EngineConfig
from .explain import validate_message, CompositionError
from .knowledge import KnowledgeBase
from .model import (
    EV_ACTUATION,
    EV_READINGS,
    EV_RECOMMENDATION,
    EV_RESPONSE,
    EV_SESSION_FINISHED,
    EV_SESSION_STARTED,
    OCCUPANCY_HOLD_S,
    state_hash,
)

REASONS = ("user_away", "outdoor_cooling_available", "natural_light_available")


@dataclass(frozen=True)
class Violation:
    code: str
    t: int
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] t={self.t}: {self.message}"


class _World:
    """Minimal reading-derived context, independent of the engine's own
    context tracking."""

    def __init__(self, appliance_kinds: dict):
        self.kinds = appliance_kinds
        self.t = None
        self.last_motion = None
        self.indoor_temp = None
        self.outdoor_temp = None
        self.indoor_lux = None
        self.outdoor_lux = None
        self.on = {aid: False for aid in appliance_kinds}

    def apply(self, t: int, data: dict) -> None:
        self.t = t
        self.indoor_temp = data["indoor_temp"]
        self.outdoor_temp = data["outdoor_temp"]
        self.indoor_lux = data["indoor_lux"]
        self.outdoor_lux = data["outdoor_lux"]
        if data["motion"]:
            self.last_motion = t
        for aid, kw in data["power"].items():
            self.on[aid] = kw > 0.0

    def occupied(self, t: int) -> bool:
        return self.last_motion is not None and t - self.last_motion < OCCUPANCY_HOLD_S

    def absence_s(self, t: int) -> float:
        return float("inf") if self.last_motion is None else t - self.last_motion

    def condition(self, aid: str, reason: str, t: int, kb: KnowledgeBase,
                  cfg: EngineConfig) -> bool:
        if not self.on.get(aid, False) or self.t is None:
            return False
        kind = self.kinds[aid]
        if reason == "user_away":
            return (cfg.rule_user_away
                    and self.absence_s(t) >= cfg.absence_threshold_s
                    and kb.occupancy.p_next_slot(t) < cfg.occupancy_cutoff)
        if reason == "outdoor_cooling_available":
            return (cfg.rule_outdoor_cooling and kind == "ac" and self.occupied(t)
                    and self.outdoor_temp <= self.indoor_temp - cfg.cooling_delta_c)
        if reason == "natural_light_available":
            return (cfg.rule_natural_light and kind == "lights" and self.occupied(t)
                    and self.outdoor_lux >= cfg.natural_light_lux)
        return False


def audit_events(events, check_replay: bool = True) -> list:
    """Run every check against one session log; returns violations."""
    events = list(events)
    out: list[Violation] = []
    if not events:
        return [Violation("empty-log", 0, "log has no events")]
    if events[0].kind != EV_SESSION_STARTED:
        return [Violation("no-header", events[0].t, "log does not start with session_started")]
    head = events[0].data
    try:
        cfg = EngineConfig.from_json(head["config"])
        kb = KnowledgeBase.from_json(head["kb"])
    except (KeyError, ValueError) as exc:
        return [Violation("bad-header", events[0].t, f"unusable session header: {exc}")]
    mode = head["mode"]
    appliance_kinds = {a["id"]: a["kind"] for a in head["spec"]["appliances"]}
    world = _World(appliance_kinds)

    seq_prev = 0
    t_prev = events[0].t
    pending = None                   # rec dict awaiting its response
    last_issue: dict = {}            # (aid, reason) -> t of last issue
    last_block_end: dict = {}        # (aid, reason) -> earliest legal next issue
    episode_anchor: dict = {}        # (aid, reason) -> first issue t of open episode
    condition_broken_at: dict = {}   # (aid, reason) -> last t condition seen false
    claims: dict = {}                # (aid, computed_at) -> kwh
    power_integral = 0.0
    power_last = 0.0
    power_last_t = None
    finished = False
    logged_hash = None

    for ev in events:
        if ev.seq != seq_prev + 1:
            out.append(Violation("seq-gap", ev.t, f"seq {ev.seq} after {seq_prev}"))
        seq_prev = ev.seq
        if ev.t < t_prev:
            out.append(Violation("time-regression", ev.t, f"t={ev.t} after t={t_prev}"))
        t_prev = ev.t

        if ev.kind == EV_READINGS:
            if power_last_t is not None:
                power_integral += power_last * (ev.t - power_last_t) / 3600.0
            power_last = sum(ev.data["power"].values())
            power_last_t = ev.t
            world.apply(ev.t, ev.data)
            # Track condition lapses for every pair so episode boundaries are
            # re-derived from data, not from engine claims.
            for aid in appliance_kinds:
                for reason in REASONS:
                    if not world.condition(aid, reason, ev.t, kb, cfg):
                        condition_broken_at[(aid, reason)] = ev.t

        elif ev.kind == EV_RECOMMENDATION:
            rec = ev.data["rec"]
            key = (rec["appliance_id"], rec["reason"]["kind"])
            if pending is not None:
                out.append(Violation("overlapping-pending", ev.t,
                                     f"{rec['id']} issued while {pending['id']} pending"))
            if rec["mode"] != mode:
                out.append(Violation("mode-mismatch", ev.t,
                                     f"{rec['id']} carries mode {rec['mode']}, session is {mode}"))
            if (rec["fact"] is None) != (mode == "plain"):
                out.append(Violation("fact-presence", ev.t,
                                     f"{rec['id']}: fact presence inconsistent with mode {mode}"))
            try:
                validate_message(ev.data["message"], mode)
            except CompositionError as exc:
                out.append(Violation("message-sections", ev.t, f"{rec['id']}: {exc}"))
            if rec["deadline"] != ev.t + cfg.response_window_s:
                out.append(Violation("bad-deadline", ev.t,
                                     f"{rec['id']}: deadline {rec['deadline']} != issue+window"))
            if not world.condition(key[0], key[1], ev.t, kb, cfg):
                out.append(Violation("condition-not-valid", ev.t,
                                     f"{rec['id']}: {key[1]} condition false for {key[0]} at issue"))
            prev_t = last_issue.get(key)
            if prev_t is not None and ev.t - prev_t < cfg.ignore_cooldown_s:
                out.append(Violation("min-spacing", ev.t,
                                     f"{key} reissued {ev.t - prev_t} s after previous issue"))
            block_end = last_block_end.get(key)
            if block_end is not None and ev.t < block_end:
                out.append(Violation("cooldown", ev.t,
                                     f"{key} reissued {block_end - ev.t} s before cooldown end"))
            broke = condition_broken_at.get(key)
            anchor = episode_anchor.get(key)
            if anchor is None or (broke is not None and broke >= anchor and prev_t is not None
                                  and broke >= prev_t):
                episode_anchor[key] = ev.t
            elif ev.t - anchor > cfg.episode_max_s:
                out.append(Violation("episode-overrun", ev.t,
                                     f"{key} issued {ev.t - anchor} s after episode start"))
            if rec["fact"] and rec["fact"]["projection"] == "actual":
                fact = rec["fact"]
                claims[(rec["appliance_id"], fact["computed_at"])] = fact["energy_kwh"]
            last_issue[key] = ev.t
            pending = rec

        elif ev.kind == EV_RESPONSE:
            rec_id = ev.data["rec_id"]
            if pending is None or pending["id"] != rec_id:
                out.append(Violation("orphan-response", ev.t,
                                     f"response for {rec_id} with no matching pending"))
                continue
            response = ev.data["response"]
            key = (pending["appliance_id"], pending["reason"]["kind"])
            if response in ("accept", "reject") and ev.t > pending["deadline"]:
                out.append(Violation("window-overrun", ev.t,
                                     f"{rec_id} answered {ev.t - pending['deadline']} s late"))
            if response == "ignore":
                if ev.t < pending["deadline"]:
                    out.append(Violation("early-ignore", ev.t,
                                         f"{rec_id} marked ignored before its deadline"))
                last_block_end[key] = ev.t + cfg.ignore_cooldown_s
            elif response == "reject":
                last_block_end[key] = ev.t + cfg.reject_cooldown_s
            pending = None

        elif ev.kind == EV_ACTUATION:
            pass

        elif ev.kind == EV_SESSION_FINISHED:
            finished = True
            logged_hash = ev.data.get("state_hash")

    if pending is not None and finished:
        out.append(Violation("unresolved-pending", t_prev,
                             f"session finished with {pending['id']} still pending"))
    total_claimed = sum(claims.values())
    if total_claimed > power_integral + 1e-9:
        out.append(Violation("energy-closure", t_prev,
                             f"claimed {total_claimed:.6f} kWh exceeds metered "
                             f"{power_integral:.6f} kWh"))

    if check_replay and finished and logged_hash is not None and not out:
        from .sim.session import Session

        try:
            replayed = Session.replay(events)
            if state_hash(replayed.state_dict()) != logged_hash:
                out.append(Violation("replay-divergence", t_prev,
                                     "replayed state hash differs from logged final hash"))
        except Exception as exc:  # replay must never crash the auditor
            out.append(Violation("replay-error", t_prev, f"replay failed: {exc}"))
    return out
