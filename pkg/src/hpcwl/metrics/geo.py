"""Geographic usage normalization by population and technology index."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping


@dataclass(frozen=True)
class GeoRow:
    state: str
    raw: float
    per_capita: float | None
    per_capita_tech: float | None


@dataclass
class GeoTables:
    rows: list[GeoRow] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)  # "state:missing_population" etc.


def geo_normalize(usage_by_state: Mapping[str, float],
                  population_by_state: Mapping[str, float],
                  tech_index_by_state: Mapping[str, float]) -> GeoTables:
    """Raw, per-capita and technology-adjusted per-capita usage per state.

    States lacking a positive divisor keep their raw value and are flagged
    rather than dropped.
    """
    tables = GeoTables()
    for state in sorted(usage_by_state):
        raw = usage_by_state[state]
        population = population_by_state.get(state)
        per_capita = None
        if population is not None and population > 0:
            per_capita = raw / population
        else:
            tables.flags.append(f"{state}:missing_population")
        tech = tech_index_by_state.get(state)
        per_capita_tech = None
        if per_capita is not None:
            if tech is not None and tech > 0:
                per_capita_tech = per_capita / tech
            else:
                tables.flags.append(f"{state}:missing_tech_index")
        tables.rows.append(GeoRow(state=state, raw=raw, per_capita=per_capita,
                                  per_capita_tech=per_capita_tech))
    return tables
