"""Per-user persuasion profile: eco/econ weights updated from responses.

Accepting a recommendation bumps the weight of the fact type that was shown,
rejecting penalizes it (floored so a weight never reaches zero), ignoring
changes nothing. Updates are additive, which keeps the eco-probability
invariant under uniform scaling of both weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .explain import FACT_ECO, FACT_ECON, p_eco

RESPONSES = ("accept", "reject", "ignore")


@dataclass(frozen=True)
class PersuasionProfile:
    w_eco: float = 1.0
    w_econ: float = 1.0
    # (recommendation id, fact type, projection, response) per delivered fact
    history: tuple = field(default_factory=tuple)

    @property
    def p_eco(self) -> float:
        return p_eco(self.w_eco, self.w_econ)

    def to_json(self) -> dict:
        return {"w_eco": self.w_eco, "w_econ": self.w_econ,
                "history": [list(h) for h in self.history]}

    @classmethod
    def from_json(cls, obj: dict) -> "PersuasionProfile":
        return cls(obj["w_eco"], obj["w_econ"],
                   tuple(tuple(h) for h in obj.get("history", [])))


def update_profile(profile: PersuasionProfile, rec_id: str, fact_type: str,
                   projection: str, response: str, step: float = 0.1,
                   floor: float = 0.1) -> PersuasionProfile:
    """Apply one response to the profile; returns the updated profile."""
    if fact_type not in (FACT_ECO, FACT_ECON):
        raise ValueError(f"unknown fact type {fact_type!r}")
    if response not in RESPONSES:
        raise ValueError(f"unknown response {response!r}")
    w_eco, w_econ = profile.w_eco, profile.w_econ
    if response != "ignore":
        delta = step if response == "accept" else -step
        if fact_type == FACT_ECO:
            w_eco = max(floor, w_eco + delta)
        else:
            w_econ = max(floor, w_econ + delta)
    history = profile.history + ((rec_id, fact_type, projection, response),)
    return replace(profile, w_eco=w_eco, w_econ=w_econ, history=history)


@dataclass(frozen=True)
class AcceptanceCell:
    accepted: int = 0
    rejected: int = 0
    ignored: int = 0

    @property
    def ratio(self) -> float | None:
        """accepted / (accepted + rejected); None when that denominator is
        empty: never reported as zero."""
        n = self.accepted + self.rejected
        return self.accepted / n if n else None


def history_to_csv(history) -> str:
    """Response history as CSV for offline analysis."""
    rows = ["recommendation_id,fact_type,projection,response"]
    rows.extend(f"{rec_id},{fact_type},{projection},{response}"
                for rec_id, fact_type, projection, response in history)
    return "\n".join(rows) + "\n"


def acceptance_stats(history) -> dict:
    """Acceptance ratio per (fact type, projection) cell.

    Ignored responses are excluded from every ratio denominator and reported
    as a separate overall fraction of all delivered recommendations.
    """
    cells: dict = {}
    total = ignored = 0
    for _rec_id, fact_type, projection, response in history:
        cell = cells.setdefault((fact_type, projection), [0, 0, 0])
        idx = RESPONSES.index(response)
        cell[idx] += 1
        total += 1
        if response == "ignore":
            ignored += 1
    return {
        "cells": {key: AcceptanceCell(*counts) for key, counts in cells.items()},
        "total": total,
        "ignored_fraction": (ignored / total) if total else None,
    }
