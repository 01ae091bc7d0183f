"""Loss-given-default cascades over the weighted asset network.

A surviving country defaults when its (haircut-scaled) exposure to the
defaulted set strictly exceeds both a fraction d1 of its total external
investment and a fraction d2 of its GDP. Rounds update synchronously;
the portfolio denominator stays fixed at its initial value. Both
inequalities are strict, so at d1 = d2 = 0 any positive exposure to the
defaulted set triggers default.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .ingest import AssetSlice

COARSE_THRESHOLDS = (0.0, 0.1, 0.25, 0.5, 0.75)

FINE_D1_MAX, FINE_D1_POINTS = 0.2, 51
FINE_D2_MAX, FINE_D2_POINTS = 0.5, 51


@dataclass(frozen=True)
class LgdSpec:
    """Cascade thresholds: d1 on the portfolio share, d2 on GDP, and the
    haircut scaling losses before the comparison."""

    d1: float
    d2: float
    haircut: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.d1 <= 1.0:
            raise ValueError(f"d1 must lie in [0, 1], got {self.d1}")
        if self.d2 < 0.0:
            raise ValueError(f"d2 must be >= 0, got {self.d2}")
        if not 0.0 < self.haircut <= 1.0:
            raise ValueError(f"haircut must lie in (0, 1], got {self.haircut}")


@dataclass(frozen=True)
class CascadeResult:
    """Initial defaults, the newly defaulting set per round, and the
    fraction of countries (initial set included) that end up in default."""

    initial: frozenset[str]
    rounds: tuple[frozenset[str], ...]
    defaulted: frozenset[str]
    impact: float

    @property
    def num_rounds(self) -> int:
        return len(self.rounds)


def _cascade_mask(
    assets: np.ndarray,
    totals: np.ndarray,
    gdp: np.ndarray,
    initial: np.ndarray,
    d1: float,
    d2: float,
    haircut: float,
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Mask-level cascade; returns the final default mask and per-round masks.

    Losses are recomputed from the full defaulted set each round (a fixed
    summation order), so the fixed point is bitwise identical for
    synchronous and sequential update schedules.
    """
    defaulted = initial.copy()
    rounds: list[np.ndarray] = []
    while True:
        loss = haircut * assets[:, defaulted].sum(axis=1)
        newly = ~defaulted & (loss > d1 * totals) & (loss > d2 * gdp)
        if not newly.any():
            return defaulted, rounds
        rounds.append(newly)
        defaulted = defaulted | newly


def cascade(slice_: AssetSlice, initial: set[str] | frozenset[str], spec: LgdSpec) -> CascadeResult:
    """Run one cascade from an initial default set."""
    if not initial:
        raise ValueError("initial default set must be nonempty")
    mask = np.zeros(slice_.n, dtype=bool)
    for code in initial:
        mask[slice_.index(code)] = True
    totals = slice_.assets.sum(axis=1)
    defaulted, rounds = _cascade_mask(
        slice_.assets, totals, slice_.gdp, mask, spec.d1, spec.d2, spec.haircut
    )

    def codes(selected: np.ndarray) -> frozenset[str]:
        return frozenset(slice_.countries[i] for i in np.flatnonzero(selected))

    return CascadeResult(
        initial=frozenset(initial),
        rounds=tuple(codes(r) for r in rounds),
        defaulted=codes(defaulted),
        impact=int(defaulted.sum()) / slice_.n,
    )


@dataclass(frozen=True)
class ImpactSummary:
    """Impact distribution over all initial-default combinations of size k."""

    year: int
    spec: LgdSpec
    k: int
    n_combos: int
    mean: float
    worst5_mean: float
    worst: float
    argmax: tuple[tuple[str, ...], ...]


def enumerate_impacts(slice_: AssetSlice, spec: LgdSpec, k_max: int = 3) -> list[ImpactSummary]:
    """Cascade impacts for every initial combination of 1..k_max countries.

    Per k, reports the mean impact, the mean of the ceil(0.05 * m) worst
    impacts, the worst case, and every combination attaining it.
    """
    if k_max not in (1, 2, 3):
        raise ValueError("k_max must be 1, 2 or 3")
    assets = slice_.assets
    totals = assets.sum(axis=1)
    gdp = slice_.gdp
    n = slice_.n
    summaries = []
    for k in range(1, k_max + 1):
        combos = list(combinations(range(n), k))
        impacts = np.empty(len(combos))
        mask = np.zeros(n, dtype=bool)
        for c, combo in enumerate(combos):
            mask[:] = False
            mask[list(combo)] = True
            defaulted, _ = _cascade_mask(assets, totals, gdp, mask, spec.d1, spec.d2, spec.haircut)
            impacts[c] = int(defaulted.sum()) / n
        worst = float(impacts.max())
        argmax = tuple(
            tuple(slice_.countries[i] for i in combos[c])
            for c in np.flatnonzero(impacts == worst)
        )
        top = max(1, math.ceil(0.05 * len(combos)))
        worst5 = float(np.sort(impacts)[-top:].mean())
        summaries.append(
            ImpactSummary(
                year=slice_.year,
                spec=spec,
                k=k,
                n_combos=len(combos),
                mean=float(impacts.mean()),
                worst5_mean=worst5,
                worst=worst,
                argmax=argmax,
            )
        )
    return summaries


def sweep_grid(
    slice_: AssetSlice,
    d1_values: tuple[float, ...] = COARSE_THRESHOLDS,
    d2_values: tuple[float, ...] = COARSE_THRESHOLDS,
    k_max: int = 3,
    haircut: float = 1.0,
) -> list[ImpactSummary]:
    """Impact summaries over the (d1, d2) grid, excluding the trivial
    all-defaulting point d1 = d2 = 0."""
    if not d1_values or not d2_values:
        raise ValueError("threshold grids must be nonempty")
    summaries = []
    for d1 in d1_values:
        for d2 in d2_values:
            if d1 == 0.0 and d2 == 0.0:
                continue
            summaries.extend(enumerate_impacts(slice_, LgdSpec(d1, d2, haircut), k_max))
    return summaries


def severity_sorted(summaries: list[ImpactSummary]) -> list[ImpactSummary]:
    """Order summaries within each (year, k) by decreasing severity."""
    return sorted(
        summaries,
        key=lambda s: (s.year, s.k, -s.worst, -s.worst5_mean, -s.mean, s.spec.d1, s.spec.d2),
    )


@dataclass(frozen=True)
class FineGridCell:
    """One (initial subset, d1, d2) cascade outcome on the fine grid."""

    subset: tuple[str, ...]
    d1: float
    d2: float
    impact: float
    rounds: int


def fine_grid(
    slice_: AssetSlice,
    group: tuple[str, ...],
    d1_values: np.ndarray | None = None,
    d2_values: np.ndarray | None = None,
    max_subset: int = 3,
    haircut: float = 1.0,
) -> list[FineGridCell]:
    """Cascade impact for every nonempty subset (size <= max_subset) of a
    country group over a fine (d1, d2) grid.

    Defaults scan d1 in [0, 0.2] at 51 points and d2 in [0, 0.5] at 51
    points.
    """
    if not group:
        raise ValueError("group must be nonempty")
    if d1_values is None:
        d1_values = np.linspace(0.0, FINE_D1_MAX, FINE_D1_POINTS)
    if d2_values is None:
        d2_values = np.linspace(0.0, FINE_D2_MAX, FINE_D2_POINTS)
    members = sorted(group)
    indices = [slice_.index(code) for code in members]
    assets = slice_.assets
    totals = assets.sum(axis=1)
    gdp = slice_.gdp
    cells = []
    for size in range(1, min(max_subset, len(members)) + 1):
        for combo in combinations(range(len(members)), size):
            subset = tuple(members[i] for i in combo)
            mask = np.zeros(slice_.n, dtype=bool)
            mask[[indices[i] for i in combo]] = True
            for d1 in d1_values:
                for d2 in d2_values:
                    defaulted, rounds = _cascade_mask(
                        assets, totals, gdp, mask, float(d1), float(d2), haircut
                    )
                    cells.append(
                        FineGridCell(
                            subset=subset,
                            d1=float(d1),
                            d2=float(d2),
                            impact=int(defaulted.sum()) / slice_.n,
                            rounds=len(rounds),
                        )
                    )
    return cells


def influence_ranking(
    summaries: list[ImpactSummary],
    top_n: int = 10,
) -> dict[int, list[tuple[tuple[str, ...], int]]]:
    """Rank initial combinations by how many (year, spec) cells they won.

    Every combination tied for a cell's worst-case impact is counted.
    Returns, per k, the top_n (combination, count) pairs sorted by count
    descending, lexicographic on the combination for equal counts.
    """
    if not summaries:
        raise ValueError("need at least one impact summary")
    counters: dict[int, Counter] = {}
    for summary in summaries:
        counter = counters.setdefault(summary.k, Counter())
        for combo in summary.argmax:
            counter[combo] += 1
    return {
        k: sorted(counter.items(), key=lambda item: (-item[1], item[0]))[:top_n]
        for k, counter in sorted(counters.items())
    }
