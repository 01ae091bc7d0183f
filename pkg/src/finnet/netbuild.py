"""Binary directed networks derived from asset slices.

Two thresholding rules are supported. Rule A links holder i to issuer j
when the position s_ij strictly exceeds i's average per-counterparty
exposure, sum_k s_ik / (n - 1). Rule B links i to j when s_ij / gdp_i
strictly exceeds a fraction t. Ties never produce an edge.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .ingest import AssetSlice

# Cross-year average GDP-normalized exposure; the stock rule-B threshold.
DEFAULT_GDP_THRESHOLD = 0.0417

# Exposure-to-row-average ratios that bump an exported edge one class up.
WEIGHT_CLASS_BOUNDS = (2.0, 4.0, 8.0, 16.0)

EXPORT_FORMATS = ("edge-list", "dot")


@dataclass(frozen=True)
class BinaryNetwork:
    """Unweighted directed graph over labelled countries.

    ``adj[i, j]`` is True exactly when there is an edge from
    ``countries[i]`` to ``countries[j]``. The diagonal is always False.
    """

    countries: tuple[str, ...]
    adj: np.ndarray
    rule: str
    source_year: int | None = None

    def __post_init__(self) -> None:
        adj = np.array(self.adj, dtype=bool)
        n = len(self.countries)
        if adj.shape != (n, n):
            raise ValueError(f"adjacency shape {adj.shape} does not match {n} countries")
        if np.any(np.diagonal(adj)):
            raise ValueError("adjacency has self-loops")
        adj.flags.writeable = False
        object.__setattr__(self, "countries", tuple(self.countries))
        object.__setattr__(self, "adj", adj)

    @property
    def n(self) -> int:
        return len(self.countries)

    @property
    def num_edges(self) -> int:
        return int(self.adj.sum())

    def out_degrees(self) -> np.ndarray:
        return self.adj.sum(axis=1).astype(int)

    def in_degrees(self) -> np.ndarray:
        return self.adj.sum(axis=0).astype(int)

    def degree_sums(self) -> np.ndarray:
        return self.out_degrees() + self.in_degrees()

    def edges(self) -> list[tuple[str, str]]:
        """Edges as (source, target) code pairs, lexicographically sorted."""
        rows, cols = np.nonzero(self.adj)
        return sorted((self.countries[i], self.countries[j]) for i, j in zip(rows, cols))

    def subnetwork(self, keep: np.ndarray) -> "BinaryNetwork":
        """Induced subgraph on the nodes flagged True in ``keep``."""
        keep = np.asarray(keep, dtype=bool)
        labels = tuple(c for c, k in zip(self.countries, keep) if k)
        return BinaryNetwork(labels, self.adj[keep][:, keep], self.rule, self.source_year)


@dataclass(frozen=True)
class ThresholdRule:
    """Network construction rule: ``above-average`` (A) or ``gdp-fraction`` (B)."""

    kind: str
    t: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("above-average", "gdp-fraction"):
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if self.kind == "gdp-fraction" and (self.t is None or self.t <= 0):
            raise ValueError("gdp-fraction rule needs a threshold t > 0")

    @property
    def label(self) -> str:
        if self.kind == "above-average":
            return "A"
        return f"B(t={self.t:g})"

    @classmethod
    def from_name(cls, name: str, t: float = DEFAULT_GDP_THRESHOLD) -> "ThresholdRule":
        if name == "A":
            return cls("above-average")
        if name == "B":
            return cls("gdp-fraction", t)
        raise ValueError(f"unknown rule name {name!r}; expected A or B")

    def apply(self, slice_: AssetSlice) -> BinaryNetwork:
        if self.kind == "above-average":
            return above_average_network(slice_)
        return gdp_threshold_network(slice_, self.t)


def above_average_network(slice_: AssetSlice) -> BinaryNetwork:
    """Rule A: edge i->j when s_ij strictly exceeds row i's mean exposure."""
    row_mean = slice_.assets.sum(axis=1) / (slice_.n - 1)
    adj = slice_.assets > row_mean[:, None]
    np.fill_diagonal(adj, False)
    return BinaryNetwork(slice_.countries, adj, "A", slice_.year)


def gdp_threshold_network(slice_: AssetSlice, t: float = DEFAULT_GDP_THRESHOLD) -> BinaryNetwork:
    """Rule B: edge i->j when s_ij / gdp_i strictly exceeds t."""
    if t <= 0:
        raise ValueError("threshold t must be positive")
    adj = slice_.assets / slice_.gdp[:, None] > t
    np.fill_diagonal(adj, False)
    return BinaryNetwork(slice_.countries, adj, f"B(t={t:g})", slice_.year)


def build_network(slice_: AssetSlice, rule: ThresholdRule) -> BinaryNetwork:
    return rule.apply(slice_)


def average_gdp_exposure(slice_: AssetSlice, positive_only: bool = False) -> float:
    """Mean of s_ij / gdp_i over ordered pairs i != j.

    By default zero positions are included in the average; with
    ``positive_only`` the mean runs over strictly positive positions
    (0.0 when there are none).
    """
    ratios = slice_.assets / slice_.gdp[:, None]
    off = ~np.eye(slice_.n, dtype=bool)
    values = ratios[off]
    if positive_only:
        values = values[values > 0]
        if values.size == 0:
            return 0.0
    return float(values.mean())


def weight_class(exposure: float, row_average: float) -> int:
    """Exposure class 1..5 relative to the holder's average exposure.

    Class k covers ratios in [2^(k-1), 2^k) for k in 1..4 and class 5 is
    everything from 16x upward; ratios below 1 (possible under rule B)
    fall into class 1.
    """
    if row_average <= 0:
        return 1
    ratio = exposure / row_average
    return 1 + sum(ratio >= bound for bound in WEIGHT_CLASS_BOUNDS)


def export_graph(net: BinaryNetwork, slice_: AssetSlice, format: str = "edge-list") -> bytes:
    """Serialize a network with exposure weight classes.

    Output is deterministic: edges sorted lexicographically by
    (holder, issuer) code. Formats: ``edge-list`` CSV with a
    ``holder,issuer,weight_class`` header, or Graphviz ``dot``.
    """
    if format not in EXPORT_FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {EXPORT_FORMATS}")
    if net.countries != slice_.countries:
        raise ValueError("network and slice country lists differ")
    row_avg = slice_.assets.sum(axis=1) / (slice_.n - 1)
    index = {code: i for i, code in enumerate(net.countries)}
    classed = [
        (holder, issuer, weight_class(slice_.assets[index[holder], index[issuer]], row_avg[index[holder]]))
        for holder, issuer in net.edges()
    ]
    out = io.StringIO()
    if format == "edge-list":
        out.write("holder,issuer,weight_class\n")
        for holder, issuer, cls in classed:
            out.write(f"{holder},{issuer},{cls}\n")
    else:
        out.write("digraph {\n")
        for holder, issuer, cls in classed:
            out.write(f'  "{holder}" -> "{issuer}" [class={cls}];\n')
        out.write("}\n")
    return out.getvalue().encode("utf-8")
