"""Action triggering: rule evaluation, the re-issue/pause state machine and
response handling.

Three rules fire turn-off recommendations, in fixed priority order with at
most one reason per appliance per evaluation:

  R1 user_away          room empty past the absence threshold, appliance on,
                        and the user not expected back in the next slot
  R2 outdoor_cooling    occupied, A/C on, outdoor enough below indoor that a
                        window does the job
  R3 natural_light      occupied, lights on, daylight above the lux threshold

Lifecycle timing: a recommendation stays pending for 20 s; no response means
ignored and a 10-minute hold, a reject pauses the pair for an hour, and an
episode (one continuous stretch of the trigger condition) stops issuing one
hour after its first recommendation. Re-issues only ever happen by the rule
firing again, so trigger conditions are revalidated by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .adapt import PersuasionProfile, update_profile
from .config import EngineConfig
from .explain import (
    MODE_PLAIN,
    PersuasiveFact,
    compute_savings,
    select_fact_type,
    select_projection,
)
from .knowledge import KnowledgeBase
from .model import Appliance, ApplianceState, ContextSnapshot

REASON_USER_AWAY = "user_away"
REASON_OUTDOOR_COOLING = "outdoor_cooling_available"
REASON_NATURAL_LIGHT = "natural_light_available"
REASON_KINDS = (REASON_USER_AWAY, REASON_OUTDOOR_COOLING, REASON_NATURAL_LIGHT)

PENDING = "pending"
ACCEPTED = "accepted"
REJECTED = "rejected"
IGNORED = "ignored"
CEASED = "ceased"


class StaleResponseError(ValueError):
    """Response for a recommendation that is not pending (or out of window)."""


@dataclass(frozen=True, slots=True)
class TriggerReason:
    kind: str
    values: dict

    def to_json(self) -> dict:
        return {"kind": self.kind, "values": self.values}


@dataclass(frozen=True, slots=True)
class TriggerCandidate:
    appliance: ApplianceState
    reason: TriggerReason
    automated: bool = False


@dataclass
class Recommendation:
    id: str
    created_at: int
    appliance_id: str
    reason: TriggerReason
    mode: str
    fact: PersuasiveFact | None
    deadline: int
    action: str = "turn_off"
    lifecycle: str = PENDING
    automated: bool = False

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "created_at": self.created_at,
            "appliance_id": self.appliance_id,
            "action": self.action,
            "reason": self.reason.to_json(),
            "mode": self.mode,
            "fact": self.fact.to_json() if self.fact else None,
            "deadline": self.deadline,
            "lifecycle": self.lifecycle,
            "automated": self.automated,
        }


@dataclass
class ReissueState:
    """Lifecycle bookkeeping for one (appliance, reason kind) pair."""

    last_issue_at: int | None = None
    paused_until: int | None = None
    episode_started_at: int | None = None
    episode_fact: PersuasiveFact | None = None
    episode_ceased: bool = False
    accept_count: int = 0
    consecutive_rejects: int = 0
    permanently_paused: bool = False
    automation_candidate: bool = False

    def close_episode(self) -> None:
        self.episode_started_at = None
        self.episode_fact = None
        self.episode_ceased = False

    def state_dict(self) -> dict:
        return {
            "last_issue_at": self.last_issue_at,
            "paused_until": self.paused_until,
            "episode_started_at": self.episode_started_at,
            "episode_fact": self.episode_fact.to_json() if self.episode_fact else None,
            "episode_ceased": self.episode_ceased,
            "accept_count": self.accept_count,
            "consecutive_rejects": self.consecutive_rejects,
            "permanently_paused": self.permanently_paused,
            "automation_candidate": self.automation_candidate,
        }


def actuate(appliance: Appliance, now: int) -> dict:
    """Send the turn-off signal. Already-off appliances (a race with a manual
    action) produce a warning no-op instead of an error."""
    if appliance.is_on:
        appliance.turn_off(now)
        return {"appliance_id": appliance.id, "status": "ok"}
    return {"appliance_id": appliance.id, "status": "noop_already_off"}


def apply_profile_rules(pair: ReissueState, config: EngineConfig) -> ReissueState:
    """Repeated-response rules: enough accepts flag the pair for automation,
    enough consecutive rejects pause it permanently."""
    if pair.accept_count >= config.auto_accept_threshold:
        pair.automation_candidate = True
    if pair.consecutive_rejects >= config.permanent_pause_threshold:
        pair.permanently_paused = True
    return pair


def rule_predicate(reason_kind: str, appliance: ApplianceState, snapshot: ContextSnapshot,
                   kb: KnowledgeBase, config: EngineConfig) -> bool:
    """Does this rule hold for this appliance right now? Shared by evaluation
    and episode maintenance so both see identical conditions."""
    if not appliance.is_on:
        return False
    if reason_kind == REASON_USER_AWAY:
        return (config.rule_user_away
                and snapshot.absence_seconds >= config.absence_threshold_s
                and kb.occupancy.p_next_slot(snapshot.t) < config.occupancy_cutoff)
    if reason_kind == REASON_OUTDOOR_COOLING:
        return (config.rule_outdoor_cooling
                and appliance.kind == "ac"
                and snapshot.occupied
                and snapshot.outdoor_temp <= snapshot.indoor_temp - config.cooling_delta_c)
    if reason_kind == REASON_NATURAL_LIGHT:
        return (config.rule_natural_light
                and appliance.kind == "lights"
                and snapshot.occupied
                and snapshot.outdoor_lux >= config.natural_light_lux)
    raise ValueError(f"unknown reason kind {reason_kind!r}")


def _reason_values(reason_kind: str, appliance: ApplianceState,
                   snapshot: ContextSnapshot, kb: KnowledgeBase) -> dict:
    if reason_kind == REASON_USER_AWAY:
        return {"absence_min": snapshot.absence_seconds // 60,
                "p_occ_next": kb.occupancy.p_next_slot(snapshot.t)}
    if reason_kind == REASON_OUTDOOR_COOLING:
        return {"outdoor_temp": round(snapshot.outdoor_temp, 1),
                "indoor_temp": round(snapshot.indoor_temp, 1)}
    return {"outdoor_lux": round(snapshot.outdoor_lux),
            "indoor_lux": round(snapshot.indoor_lux)}


@dataclass
class ResponseOutcome:
    recommendation: Recommendation
    response: str
    actuate: bool
    profile: PersuasionProfile | None  # new profile when a fact was shown


class Engine:
    """Deterministic per-session trigger state machine.

    All mutations flow through `issue`/`apply_issued` and `record_response`,
    which is what makes log replay reproduce the exact engine state.
    """

    def __init__(self, config: EngineConfig, kb: KnowledgeBase, mode: str,
                 streams=None, profile: PersuasionProfile | None = None):
        self.config = config
        self.kb = kb
        self.mode = mode
        self.streams = streams
        self.profile = profile or PersuasionProfile()
        self.reissue: dict[tuple[str, str], ReissueState] = {}
        self.last_claim_end: dict[str, int] = {}
        self.pending: Recommendation | None = None
        self.issued_count = 0

    def pair(self, appliance_id: str, reason_kind: str) -> ReissueState:
        key = (appliance_id, reason_kind)
        state = self.reissue.get(key)
        if state is None:
            state = self.reissue[key] = ReissueState()
        return state

    # -- per-tick maintenance -------------------------------------------------

    def tick_maintenance(self, snapshot: ContextSnapshot) -> None:
        """Close episodes whose condition lapsed; mark over-age episodes
        ceased. Runs once per evaluation tick, never while a recommendation
        is pending."""
        now = snapshot.t
        for (aid, reason_kind), pair in self.reissue.items():
            if pair.episode_started_at is None:
                continue
            appliance = snapshot.appliance(aid)
            if appliance is None or not rule_predicate(reason_kind, appliance, snapshot,
                                                       self.kb, self.config):
                pair.close_episode()
            elif now - pair.episode_started_at >= self.config.episode_max_s:
                pair.episode_ceased = True

    # -- rule evaluation ------------------------------------------------------

    def candidates(self, snapshot: ContextSnapshot) -> list[TriggerCandidate]:
        """Evaluate R1 > R2 > R3 against the snapshot, one reason per
        appliance, suppressed by the re-issue state. Pure: identical inputs
        give an identical list."""
        if not snapshot.complete:
            return []
        now = snapshot.t
        out = []
        claimed: set[str] = set()
        for reason_kind in REASON_KINDS:
            for appliance in sorted(snapshot.appliances, key=lambda a: a.id):
                if appliance.id in claimed:
                    continue
                if not rule_predicate(reason_kind, appliance, snapshot, self.kb, self.config):
                    continue
                claimed.add(appliance.id)
                pair = self.reissue.get((appliance.id, reason_kind))
                if pair is not None and not self._may_issue(pair, now):
                    continue
                automated = (pair is not None and pair.automation_candidate
                             and self.config.auto_execute)
                reason = TriggerReason(reason_kind,
                                       _reason_values(reason_kind, appliance, snapshot, self.kb))
                out.append(TriggerCandidate(appliance, reason, automated))
        return out

    def _may_issue(self, pair: ReissueState, now: int) -> bool:
        if pair.permanently_paused or pair.episode_ceased:
            return False
        if pair.paused_until is not None and now < pair.paused_until:
            return False
        # Blanket floor: never two issues of the same pair within the ignore
        # cooldown, whatever resolved the previous one.
        if pair.last_issue_at is not None and now - pair.last_issue_at < self.config.ignore_cooldown_s:
            return False
        if (pair.episode_started_at is not None
                and now - pair.episode_started_at >= self.config.episode_max_s):
            return False
        return True

    # -- issuing --------------------------------------------------------------

    def issue(self, candidate: TriggerCandidate, snapshot: ContextSnapshot) -> Recommendation:
        """Create the recommendation for a candidate, drawing the persuasive
        fact for a fresh episode and reusing it on re-issues."""
        now = snapshot.t
        appliance = candidate.appliance
        pair = self.pair(appliance.id, candidate.reason.kind)
        fact = None
        if self.mode != MODE_PLAIN:
            if pair.episode_started_at is not None and pair.episode_fact is not None:
                fact = pair.episode_fact
            else:
                fact_type = select_fact_type(self.profile.w_eco, self.profile.w_econ,
                                             self.streams["fact"])
                projection = select_projection(self.config.projection_policy,
                                               self.streams["projection"])
                claim_from = appliance.on_since if appliance.on_since is not None else now
                prev_end = self.last_claim_end.get(appliance.id)
                if prev_end is not None and prev_end > claim_from:
                    claim_from = prev_end
                fact = compute_savings(
                    appliance.rated_kw, appliance.id, claim_from, now,
                    self.config.tariff_eur_per_kwh, self.config.emission_kg_per_kwh,
                    self.kb.habits.weekly_on_hours(appliance.id),
                    projection, fact_type)
        self.issued_count += 1
        rec = Recommendation(
            id=f"r{self.issued_count}",
            created_at=now,
            appliance_id=appliance.id,
            reason=candidate.reason,
            mode=self.mode,
            fact=fact,
            deadline=now + self.config.response_window_s,
            automated=candidate.automated,
        )
        self._apply_issue(rec)
        return rec

    def apply_issued(self, rec: Recommendation) -> None:
        """Replay path: adopt a logged recommendation without redrawing."""
        self.issued_count += 1
        self._apply_issue(rec)

    def _apply_issue(self, rec: Recommendation) -> None:
        if self.pending is not None:
            raise StaleResponseError("a recommendation is already pending")
        pair = self.pair(rec.appliance_id, rec.reason.kind)
        pair.last_issue_at = rec.created_at
        if pair.episode_started_at is None:
            pair.episode_started_at = rec.created_at
        pair.episode_fact = rec.fact
        if rec.fact is not None and rec.fact.projection == "actual" and rec.fact.claim_from is not None:
            prev = self.last_claim_end.get(rec.appliance_id)
            if prev is None or rec.fact.computed_at > prev:
                self.last_claim_end[rec.appliance_id] = rec.fact.computed_at
        self.pending = rec

    # -- responses ------------------------------------------------------------

    def record_response(self, rec_id: str, response: str, now: int) -> ResponseOutcome:
        """Resolve the pending recommendation.

        accept/reject must land inside the response window; `ignore` is the
        no-response outcome recorded at (or after) the deadline.
        """
        rec = self.pending
        if rec is None or rec.id != rec_id:
            raise StaleResponseError(f"recommendation {rec_id} is not pending")
        if response in ("accept", "reject"):
            if now > rec.deadline:
                raise StaleResponseError(f"response window elapsed for {rec_id}")
        elif response == "ignore":
            if now < rec.deadline:
                raise StaleResponseError("cannot ignore before the deadline")
        else:
            raise ValueError(f"unknown response {response!r}")

        pair = self.pair(rec.appliance_id, rec.reason.kind)
        actuate = False
        if response == "accept":
            rec.lifecycle = ACCEPTED
            pair.accept_count += 1
            pair.consecutive_rejects = 0
            pair.close_episode()
            actuate = True
        elif response == "reject":
            rec.lifecycle = REJECTED
            pair.consecutive_rejects += 1
            pair.paused_until = now + self.config.reject_cooldown_s
        else:
            rec.lifecycle = IGNORED
            pair.paused_until = now + self.config.ignore_cooldown_s
        if (pair.episode_started_at is not None
                and now - pair.episode_started_at >= self.config.episode_max_s):
            pair.episode_ceased = True
        apply_profile_rules(pair, self.config)

        new_profile = None
        if rec.fact is not None:
            self.profile = update_profile(
                self.profile, rec.id, rec.fact.fact_type, rec.fact.projection, response,
                step=self.config.profile_step, floor=self.config.profile_floor)
            new_profile = self.profile
        self.pending = None
        return ResponseOutcome(rec, response, actuate, new_profile)

    # -- state ----------------------------------------------------------------

    def state_dict(self) -> dict:
        return {
            "mode": self.mode,
            "issued_count": self.issued_count,
            "pending": self.pending.to_json() if self.pending else None,
            "profile": {"w_eco": self.profile.w_eco, "w_econ": self.profile.w_econ,
                        "history_len": len(self.profile.history)},
            "last_claim_end": dict(sorted(self.last_claim_end.items())),
            "reissue": {f"{aid}|{reason}": pair.state_dict()
                        for (aid, reason), pair in sorted(self.reissue.items())},
        }
