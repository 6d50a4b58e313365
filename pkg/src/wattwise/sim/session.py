"""One simulated (or live) session: couples the environment, the scripted
user, the trigger engine, a response channel and the append-only log.

Event-sourcing discipline: every state change is either a logged event or a
deterministic consequence of one, so replaying a log through `Session.replay`
rebuilds the exact final state. Batch runs resolve each recommendation with
a persona draw inside the issuing tick; live runs leave it pending for the
service to resolve. When nothing can possibly trigger (room empty, every
appliance off, no pending recommendation) a batch run fast-forwards to the
next scheduled arrival.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..adapt import PersuasionProfile, acceptance_stats
from ..config import EngineConfig
from ..engine import Engine, Recommendation, TriggerCandidate, TriggerReason, actuate
from ..explain import PersuasiveFact, compose_message
from ..knowledge import KnowledgeBase, detect_micro_moments
from ..model import (
    EV_ACTUATION,
    EV_MICRO_MOMENT,
    EV_PROFILE,
    EV_READINGS,
    EV_RECOMMENDATION,
    EV_RESPONSE,
    EV_SESSION_FINISHED,
    EV_SESSION_STARTED,
    Appliance,
    ContextTracker,
    EventLog,
    SessionEvent,
    state_hash,
)
from ..rng import StreamSet
from .environment import STEP_S, Exogenous, Room
from .scenario import Persona, ScenarioSpec

APPLIANCE_LABELS = {"ac": "A/C", "lights": "lights", "monitor": "monitor"}


@dataclass
class SessionResult:
    session_id: str
    events: list
    stats: dict
    final_state_hash: str


class Session:
    """A single-user session, deterministic given (spec, persona, seed,
    config, mode)."""

    def __init__(self, spec: ScenarioSpec, kb: KnowledgeBase, mode: str, seed: int,
                 config: EngineConfig | None = None, persona: Persona | None = None,
                 session_id: str | None = None, live: bool = False,
                 user_id: str = "default", speedup: float = 1.0, _replay: bool = False):
        spec.validate()
        self.spec = spec
        self.kb = kb
        self.mode = mode
        self.seed = seed
        self.config = config or spec.engine_config()
        self.config.validate()
        self.persona = persona
        self.live = live
        self.user_id = user_id
        self.speedup = speedup
        self.session_id = session_id or f"s{seed:08x}"
        self.log = EventLog()
        self.listeners: list = []
        self.t = spec.session_start
        self.finished = False
        self.prev_snapshot = None
        self._sched_prev = 0

        self.appliances = {a.id: Appliance(a.id, a.kind, a.rated_kw, last_toggle=spec.session_start)
                           for a in spec.appliances}
        self.context = ContextTracker({a.id: (a.kind, a.rated_kw) for a in spec.appliances})
        self._replay_mode = _replay
        if _replay:
            self.streams = None
            self.exo = None
            self.room = None
        else:
            self.streams = StreamSet(seed)
            self.exo = Exogenous(spec, spec.session_start, spec.session_end, self.streams["motion"])
            self.room = Room(spec, self.exo)
        self.engine = Engine(self.config, kb, mode, self.streams)
        stored = kb.persuasion_weights(user_id)
        if stored is not None:
            self.engine.profile = PersuasionProfile(w_eco=stored[0], w_econ=stored[1])

        self.counts = {"issued": 0, "accepted": 0, "rejected": 0, "ignored": 0}
        self.history: list = []           # (rec id, fact type, projection, response)
        self.kwh_consumed = 0.0           # last-value-hold integral over power readings
        self.kwh_claimed = 0.0            # distinct actual-fact energies
        self._last_power_total = 0.0
        self._last_reading_t: int | None = None

    # -- event plumbing --------------------------------------------------------

    def _emit(self, kind: str, t: int, data: dict) -> SessionEvent:
        ev = SessionEvent(self.log.last_seq + 1, t, kind, data)
        self.log.append(ev)
        self.t = t
        for listener in self.listeners:
            listener(ev)
        return ev

    # -- lifecycle -------------------------------------------------------------

    def start(self) -> SessionEvent:
        return self._emit(EV_SESSION_STARTED, self.spec.session_start, {
            "session_id": self.session_id,
            "mode": self.mode,
            "seed": self.seed,
            "live": self.live,
            "user_id": self.user_id,
            "speedup": self.speedup,
            "config": self.config.to_json(),
            "kb": self.kb.to_json(),
            "spec": self.spec.to_json(),
            "persona": self.persona.to_json() if self.persona else None,
        })

    def run(self) -> SessionResult:
        """Batch execution to completion (requires a persona)."""
        if self.live:
            raise RuntimeError("live sessions are driven by the service, not run()")
        if self.persona is None:
            raise RuntimeError("batch sessions need a persona")
        self.start()
        t = self.spec.session_start
        end = self.spec.session_end
        while t <= end:
            self.step_minute(t)
            nxt = t + STEP_S
            skip = self._skip_target(t)
            if skip is not None:
                nxt = skip
            t = nxt
        return self.finish()

    def _skip_target(self, t: int) -> int | None:
        """Fast-forward target when no recommendation can possibly fire:
        room empty (exit already registered), everything switched off."""
        if self.engine.pending is not None:
            return None
        i = self.exo.index(t)
        if self.exo.occupied[i]:
            return None
        if any(a.is_on for a in self.appliances.values()):
            return None
        snap = self.prev_snapshot
        if snap is None or snap.absence_seconds < self.config.absence_threshold_s:
            return None
        nxt = self.exo.next_occupied_after(t)
        if nxt is None:
            return self.spec.session_end + STEP_S
        return nxt if nxt > t + STEP_S else None

    def step_minute(self, t: int) -> Recommendation | None:
        """Advance the world to minute `t`, log readings/micro-moments, and
        evaluate triggers. Returns a newly issued recommendation, already
        resolved if a persona drives this session."""
        i = self.exo.index(t)
        self.room.advance_to(t, self._any_on("ac"), self._any_on("lights"))
        sched = self.exo.occupied[i]
        if sched != self._sched_prev:
            if sched:
                self._user_arrive(t)
            else:
                self._user_depart(t)
            self._sched_prev = sched
            self.room.refresh_lux(t, self._any_on("lights"))

        data = {
            "outdoor_temp": self.exo.temps[i],
            "outdoor_lux": self.exo.luxes[i],
            "indoor_temp": self.room.state.temperature_c,
            "indoor_lux": self.room.state.lux,
            "motion": self.exo.motion[i],
            "power": {aid: app.power_kw for aid, app in sorted(self.appliances.items())},
        }
        ev = self._emit(EV_READINGS, t, data)
        snap = self._fold_readings(ev)
        for mm in detect_micro_moments(self.prev_snapshot, snap, self.config):
            self._emit(EV_MICRO_MOMENT, t, {"kind": mm.kind, "appliance_id": mm.appliance_id})
        self.engine.tick_maintenance(snap)
        issued = None
        if self.engine.pending is None:
            candidates = self.engine.candidates(snap)
            if candidates:
                issued = self._issue(candidates[0], snap)
        self.prev_snapshot = snap
        return issued

    def finish(self) -> SessionResult:
        # The session clock lands on the finish instant before hashing, so a
        # replayed log (whose last event carries that instant) folds to the
        # same state.
        self.t = max(self.t, self.spec.session_end)
        stats = self.stats()
        final_hash = state_hash(self.state_dict())
        self._emit(EV_SESSION_FINISHED, self.t, {"stats": stats, "state_hash": final_hash})
        self.finished = True
        return SessionResult(self.session_id, self.log.events, stats, final_hash)

    # -- scripted user ----------------------------------------------------------

    def _any_on(self, kind: str) -> bool:
        return any(a.kind == kind and a.is_on for a in self.appliances.values())

    def _user_arrive(self, t: int) -> None:
        user = self.spec.user
        for app in sorted(self.appliances.values(), key=lambda a: a.id):
            if app.kind == "monitor":
                app.turn_on(t)
            elif app.kind == "ac" and self.room.state.temperature_c > user.comfort_on_temp_c:
                app.turn_on(t)
            elif app.kind == "lights" and self.room.state.lux < user.lux_on_threshold:
                app.turn_on(t)

    def _user_depart(self, t: int) -> None:
        user = self.spec.user
        for app in sorted(self.appliances.values(), key=lambda a: a.id):
            if not app.is_on:
                continue
            p_leave = user.leave_on_p.get(app.id, user.leave_on_p.get(app.kind, 0.5))
            if self.streams["user"].uniform() >= p_leave:
                app.turn_off(t)

    # -- issuing and responses ---------------------------------------------------

    def _issue(self, candidate: TriggerCandidate, snap) -> Recommendation:
        prev_claim = self.engine.last_claim_end.get(candidate.appliance.id)
        rec = self.engine.issue(candidate, snap)
        self._note_claim(rec, prev_claim)
        message = compose_message(self.mode, APPLIANCE_LABELS.get(candidate.appliance.kind,
                                                                  candidate.appliance.kind),
                                  rec.reason.kind, rec.reason.values, rec.fact, snap)
        self._emit(EV_RECOMMENDATION, rec.created_at, {
            "rec": rec.to_json(),
            "message": message.to_json(),
            "rng": {"fact": self.streams["fact"].count,
                    "projection": self.streams["projection"].count},
        })
        self.counts["issued"] += 1
        if rec.automated:
            self.respond(rec.id, "accept", rec.created_at, automated=True)
        elif self.persona is not None:
            response, latency = self.persona.draw(self.mode, rec.fact, self.streams)
            if response == "ignore":
                self.respond(rec.id, "ignore", rec.deadline)
            else:
                self.respond(rec.id, response, rec.created_at + latency)
        return rec

    def _note_claim(self, rec: Recommendation, prev_claim: int | None) -> None:
        # A fresh actual fact moved the claim anchor; count its energy once.
        if rec.fact is not None and rec.fact.projection == "actual":
            new_claim = self.engine.last_claim_end.get(rec.appliance_id)
            if new_claim is not None and new_claim != prev_claim:
                self.kwh_claimed += rec.fact.energy_kwh

    def respond(self, rec_id: str, response: str, at: int, automated: bool = False):
        """Resolve the pending recommendation (raises StaleResponseError when
        it is not pending or out of window)."""
        outcome = self.engine.record_response(rec_id, response, at)
        self._emit(EV_RESPONSE, at, {"rec_id": rec_id, "response": response,
                                     "automated": automated})
        self._fold_response(outcome.recommendation, response)
        if outcome.actuate:
            app = self.appliances[outcome.recommendation.appliance_id]
            result = actuate(app, at)
            self.context.note_actuation(app.id, at)
            self._emit(EV_ACTUATION, at, {**result, "rec_id": rec_id})
        if outcome.profile is not None:
            fact = outcome.recommendation.fact
            self._emit(EV_PROFILE, at, {
                "rec_id": rec_id, "fact_type": fact.fact_type, "projection": fact.projection,
                "response": response, "w_eco": outcome.profile.w_eco,
                "w_econ": outcome.profile.w_econ,
            })
        return outcome

    # -- shared fold (live + replay) ----------------------------------------------

    def _fold_readings(self, ev: SessionEvent):
        data = ev.data
        if self._last_reading_t is not None:
            self.kwh_consumed += self._last_power_total * (ev.t - self._last_reading_t) / 3600.0
        self._last_power_total = sum(data["power"].values())
        self._last_reading_t = ev.t
        self.context.ingest_batch(ev.t, data)
        for aid, kw in data["power"].items():
            app = self.appliances[aid]
            if kw > 0.0 and not app.is_on:
                app.turn_on(ev.t)
            elif kw == 0.0 and app.is_on:
                app.turn_off(ev.t)
        return self.context.snapshot()

    def _fold_response(self, rec: Recommendation, response: str) -> None:
        key = {"accept": "accepted", "reject": "rejected", "ignore": "ignored"}[response]
        self.counts[key] += 1
        fact = rec.fact
        self.history.append((rec.id, fact.fact_type if fact else "none",
                             fact.projection if fact else "none", response))

    # -- state, stats ----------------------------------------------------------------

    def state_dict(self) -> dict:
        """Replay-comparable state. Stream counters are deliberately absent:
        they are resumption metadata, not engine state."""
        return {
            "t": self.t,
            "engine": self.engine.state_dict(),
            "context": self.context.state_dict(),
            "appliances": {aid: {"is_on": a.is_on, "on_since": a.on_since,
                                 "last_toggle": a.last_toggle}
                           for aid, a in sorted(self.appliances.items())},
            "counts": dict(self.counts),
            "history": [list(h) for h in self.history],
            "kwh_consumed": self.kwh_consumed,
            "kwh_claimed": self.kwh_claimed,
        }

    def stats(self) -> dict:
        acc = acceptance_stats(self.history)
        answered = self.counts["accepted"] + self.counts["rejected"]
        return {
            "session_id": self.session_id,
            "mode": self.mode,
            "issued": self.counts["issued"],
            "accepted": self.counts["accepted"],
            "rejected": self.counts["rejected"],
            "ignored": self.counts["ignored"],
            "acceptance_ratio": self.counts["accepted"] / answered if answered else None,
            "ignored_fraction": acc["ignored_fraction"],
            "kwh_consumed": self.kwh_consumed,
            "kwh_claimed": self.kwh_claimed,
            "w_eco": self.engine.profile.w_eco,
            "w_econ": self.engine.profile.w_econ,
        }

    # -- replay ----------------------------------------------------------------------

    @classmethod
    def replay(cls, events) -> "Session":
        """Rebuild a session's exact state by folding its log."""
        events = list(events)
        if not events or events[0].kind != EV_SESSION_STARTED:
            raise ValueError("log does not begin with a session_started event")
        head = events[0].data
        spec = ScenarioSpec.from_json(head["spec"])
        kb = KnowledgeBase.from_json(head["kb"])
        config = EngineConfig.from_json(head["config"])
        persona = Persona.from_json(head["persona"]) if head.get("persona") else None
        session = cls(spec, kb, head["mode"], head["seed"], config=config, persona=persona,
                      session_id=head["session_id"], live=head.get("live", False),
                      user_id=head.get("user_id", "default"),
                      speedup=head.get("speedup", 1.0), _replay=True)
        for ev in events:
            session.log.append(ev)
            session._apply_event(ev)
        return session

    def _apply_event(self, ev: SessionEvent) -> None:
        self.t = ev.t
        if ev.kind == EV_READINGS:
            snap = self._fold_readings(ev)
            self.engine.tick_maintenance(snap)
            self.prev_snapshot = snap
        elif ev.kind == EV_RECOMMENDATION:
            rec = recommendation_from_json(ev.data["rec"])
            prev_claim = self.engine.last_claim_end.get(rec.appliance_id)
            self.engine.apply_issued(rec)
            self._note_claim(rec, prev_claim)
            self.counts["issued"] += 1
        elif ev.kind == EV_RESPONSE:
            outcome = self.engine.record_response(ev.data["rec_id"], ev.data["response"], ev.t)
            self._fold_response(outcome.recommendation, ev.data["response"])
        elif ev.kind == EV_ACTUATION:
            if ev.data["status"] == "ok":
                self.appliances[ev.data["appliance_id"]].turn_off(ev.t)
                self.context.note_actuation(ev.data["appliance_id"], ev.t)
        elif ev.kind == EV_SESSION_FINISHED:
            self.finished = True
        # micro-moment and profile events carry no independent state


def recommendation_from_json(obj: dict) -> Recommendation:
    fact = PersuasiveFact.from_json(obj["fact"]) if obj.get("fact") else None
    return Recommendation(
        id=obj["id"],
        created_at=obj["created_at"],
        appliance_id=obj["appliance_id"],
        reason=TriggerReason(obj["reason"]["kind"], obj["reason"]["values"]),
        mode=obj["mode"],
        fact=fact,
        deadline=obj["deadline"],
        action=obj.get("action", "turn_off"),
        automated=obj.get("automated", False),
    )
