"""Persuasive facts and message composition.

A fact quantifies what the current usage costs, either in euros (econ) or in
kg of CO2 (eco), at one of three projection levels: the energy accrued so far
(actual), or a monthly/annual extrapolation from habitual weekly on-hours
(monthly = weekly * 52/12, so annual is exactly 12x monthly). Values are
stored unrounded; display rounding is half-up to 2 decimals.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources

from .model import ContextSnapshot, fmt_clock

logger = logging.getLogger("wattwise.explain")

FACT_ECO = "eco"
FACT_ECON = "econ"
FACT_TYPES = (FACT_ECO, FACT_ECON)

PROJ_ACTUAL = "actual"
PROJ_MONTHLY = "monthly"
PROJ_ANNUAL = "annual"
PROJECTIONS = (PROJ_ACTUAL, PROJ_MONTHLY, PROJ_ANNUAL)

MODE_PLAIN = "plain"
MODE_PERSUASIVE = "persuasive"
MODE_EXPLAINABLE = "explainable"
MODES = (MODE_PLAIN, MODE_PERSUASIVE, MODE_EXPLAINABLE)

WEEKS_PER_MONTH = 52.0 / 12.0
WEEKS_PER_YEAR = 52.0


class CompositionError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class PersuasiveFact:
    fact_type: str               # eco | econ
    projection: str              # actual | monthly | annual
    energy_kwh: float
    value: float                 # EUR for econ, kg CO2 for eco
    duration_h: float
    rate: float                  # tariff or emission factor actually used
    appliance_id: str
    computed_at: int
    claim_from: int | None       # start of the accrual window (actual facts)
    fallback_reason: str | None = None

    @property
    def unit(self) -> str:
        return "EUR" if self.fact_type == FACT_ECON else "kg CO2"

    def display_value(self) -> str:
        return str(Decimal(repr(self.value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))

    def to_json(self) -> dict:
        return {
            "fact_type": self.fact_type,
            "projection": self.projection,
            "energy_kwh": self.energy_kwh,
            "value": self.value,
            "duration_h": self.duration_h,
            "rate": self.rate,
            "appliance_id": self.appliance_id,
            "computed_at": self.computed_at,
            "claim_from": self.claim_from,
            "fallback_reason": self.fallback_reason,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PersuasiveFact":
        return cls(obj["fact_type"], obj["projection"], obj["energy_kwh"], obj["value"],
                   obj["duration_h"], obj["rate"], obj["appliance_id"], obj["computed_at"],
                   obj.get("claim_from"), obj.get("fallback_reason"))


def compute_savings(rated_kw: float, appliance_id: str, on_since: int, now: int,
                    tariff: float, emission: float, weekly_on_hours: float,
                    projection: str, fact_type: str) -> PersuasiveFact:
    """Build one persuasive fact.

    `on_since` is the start of the accrual window for actual facts; callers
    that already claimed part of the on-stretch in an earlier fact pass the
    end of the previous claim so attributed energy never double-counts.
    Monthly/annual projections with no habitual usage fall back to actual.
    """
    if now < on_since:
        raise ValueError("fact computed before the appliance turned on")
    rate = tariff if fact_type == FACT_ECON else emission
    if rate <= 0:
        raise ValueError("tariff/emission factor must be positive")
    fallback = None
    if projection != PROJ_ACTUAL and weekly_on_hours <= 0.0:
        logger.info("no habitual on-hours for %s: %s projection falls back to actual",
                    appliance_id, projection)
        fallback = f"no-habit-hours:{projection}"
        projection = PROJ_ACTUAL
    if projection == PROJ_ACTUAL:
        duration_h = (now - on_since) / 3600.0
        claim_from = on_since
    else:
        weeks = WEEKS_PER_MONTH if projection == PROJ_MONTHLY else WEEKS_PER_YEAR
        duration_h = weekly_on_hours * weeks
        claim_from = None
    energy = rated_kw * duration_h
    return PersuasiveFact(fact_type, projection, energy, energy * rate, duration_h,
                          rate, appliance_id, now, claim_from, fallback)


def p_eco(w_eco: float, w_econ: float) -> float:
    """Probability of showing an eco fact; invariant under weight scaling."""
    return w_eco / (w_eco + w_econ)


def select_fact_type(w_eco: float, w_econ: float, stream) -> str:
    """Draw eco with probability w_eco/(w_eco+w_econ); one stream draw."""
    if w_eco <= 0 or w_econ <= 0:
        raise ValueError("persuasion weights must be positive")
    return FACT_ECO if stream.uniform() < p_eco(w_eco, w_econ) else FACT_ECON


def select_projection(policy: str, stream) -> str:
    """Uniform policy draws each level with probability 1/3 (one stream
    draw); a fixed policy consumes no randomness."""
    if policy == "uniform":
        u = stream.uniform()
        if u < 1.0 / 3.0:
            return PROJ_ACTUAL
        if u < 2.0 / 3.0:
            return PROJ_MONTHLY
        return PROJ_ANNUAL
    prefix, _, level = policy.partition(":")
    if prefix == "fixed" and level in PROJECTIONS:
        return level
    raise ValueError(f"bad projection policy: {policy!r}")


_templates_cache: dict | None = None


def load_templates(path=None) -> dict:
    """Message templates keyed by reason kind and (fact type, projection)."""
    global _templates_cache
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    if _templates_cache is None:
        raw = resources.files("wattwise.data").joinpath("templates.json").read_text("utf-8")
        _templates_cache = json.loads(raw)
    return _templates_cache


def _qty(x: float) -> str:
    s = f"{x:.2f}"
    return s.rstrip("0").rstrip(".") if "." in s else s


@dataclass(frozen=True, slots=True)
class RecommendationMessage:
    """The delivered message; section presence is dictated by the mode."""

    mode: str
    timestamp: str
    prompt: str
    context: dict | None
    reason: str | None
    fact_text: str | None

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "timestamp": self.timestamp,
            "prompt": self.prompt,
            "context": self.context,
            "reason": self.reason,
            "fact": self.fact_text,
            "options": ["accept", "reject"],
        }

    def render_text(self) -> str:
        lines = [f"[{self.timestamp}]"]
        if self.context is not None:
            c = self.context
            lines.append(
                f"Indoor {c['indoor_temp']} C / outdoor {c['outdoor_temp']} C; "
                f"indoor light {c['indoor_lux']} lux / outdoor {c['outdoor_lux']} lux; "
                f"room {'occupied' if c['occupied'] else 'empty'}.")
        if self.reason is not None:
            lines.append(self.reason)
        if self.fact_text is not None:
            lines.append(self.fact_text)
        lines.append(self.prompt + " [accept/reject]")
        return "\n".join(lines)


def compose_message(mode: str, appliance_label: str, reason_kind: str | None,
                    reason_values: dict | None, fact: PersuasiveFact | None,
                    snapshot: ContextSnapshot, templates: dict | None = None) -> RecommendationMessage:
    """Assemble the sections allowed by the scenario mode."""
    if mode not in MODES:
        raise CompositionError(f"unknown mode {mode!r}")
    if (fact is None) != (mode == MODE_PLAIN):
        raise CompositionError(f"fact {'missing' if fact is None else 'forbidden'} for mode {mode}")
    templates = templates or load_templates()
    prompt = templates["prompt"].format(appliance=appliance_label)
    timestamp = fmt_clock(snapshot.t)

    context = reason = fact_text = None
    if mode != MODE_PLAIN:
        values = dict(reason_values or {})
        values.update(
            appliance=appliance_label,
            energy_kwh=_qty(fact.energy_kwh),
            value=fact.display_value(),
            since=fmt_clock(fact.claim_from) if fact.claim_from is not None else "",
            duration_h=_qty(fact.duration_h),
        )
        fact_text = templates["facts"][fact.fact_type][fact.projection].format(**values)
    if mode == MODE_EXPLAINABLE:
        if reason_kind is None:
            raise CompositionError("explainable message needs a trigger reason")
        context = {
            "indoor_temp": round(snapshot.indoor_temp, 1),
            "outdoor_temp": round(snapshot.outdoor_temp, 1),
            "indoor_lux": round(snapshot.indoor_lux),
            "outdoor_lux": round(snapshot.outdoor_lux),
            "occupied": snapshot.occupied,
        }
        values = {k: (_qty(v) if isinstance(v, float) else v)
                  for k, v in (reason_values or {}).items()}
        values["appliance"] = appliance_label
        reason = templates["reasons"][reason_kind].format(**values)
    return RecommendationMessage(mode, timestamp, prompt, context, reason, fact_text)


def validate_message(msg: dict, mode: str) -> None:
    """Schema check: a message may only carry the sections its mode allows."""
    has_context = msg.get("context") is not None
    has_reason = msg.get("reason") is not None
    has_fact = msg.get("fact") is not None
    if not msg.get("timestamp") or not msg.get("prompt"):
        raise CompositionError("message lacks timestamp or prompt")
    if mode == MODE_PLAIN and (has_context or has_reason or has_fact):
        raise CompositionError("plain message carries informative sections")
    if mode == MODE_PERSUASIVE and (has_context or has_reason or not has_fact):
        raise CompositionError("persuasive message must carry exactly the fact section")
    if mode == MODE_EXPLAINABLE and not (has_context and has_reason and has_fact):
        raise CompositionError("explainable message must carry context, reason and fact")
