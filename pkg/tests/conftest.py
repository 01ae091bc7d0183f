"""Shared fixtures and independent oracle implementations.

The oracles here deliberately avoid the library's algorithms: distances
come from exhaustive simple-path enumeration, triple statistics from
explicit loops, and cascades from randomized one-at-a-time processing.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from finnet import AssetSlice, BinaryNetwork

DATA_DIR = Path(__file__).parent / "data"

SPL_CAP = 4.0


# ---------------------------------------------------------------------------
# graph constructors


def net_from_adj(adj, labels=None) -> BinaryNetwork:
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    labels = labels or tuple(f"C{i:02d}" for i in range(n))
    return BinaryNetwork(tuple(labels), adj, "test")


def chain_net(n: int = 3) -> BinaryNetwork:
    adj = np.zeros((n, n), dtype=bool)
    for i in range(n - 1):
        adj[i, i + 1] = True
    return net_from_adj(adj)


def complete_net(n: int) -> BinaryNetwork:
    adj = ~np.eye(n, dtype=bool)
    return net_from_adj(adj)


def empty_net(n: int) -> BinaryNetwork:
    return net_from_adj(np.zeros((n, n), dtype=bool))


def random_net(n: int, p: float, rng: np.random.Generator) -> BinaryNetwork:
    adj = rng.random((n, n)) < p
    np.fill_diagonal(adj, False)
    return net_from_adj(adj)


def random_slice(n: int, rng: np.random.Generator, zero_frac: float = 0.3) -> AssetSlice:
    assets = np.round(rng.lognormal(mean=2.0, sigma=1.5, size=(n, n)), 3)
    assets[rng.random((n, n)) < zero_frac] = 0.0
    np.fill_diagonal(assets, 0.0)
    gdp = np.round(rng.uniform(50.0, 500.0, size=n), 3)
    labels = tuple(f"C{i:02d}" for i in range(n))
    return AssetSlice(2007, labels, assets, gdp, 1.0)


def load_scalefree64() -> BinaryNetwork:
    """Stored 64-node hub-heavy fixture used by the robustness tests."""
    text = (DATA_DIR / "scalefree64.csv").read_text().strip().splitlines()
    assert text[0] == "src,dst"
    n = 64
    adj = np.zeros((n, n), dtype=bool)
    for line in text[1:]:
        src, dst = line.split(",")
        adj[int(src), int(dst)] = True
    return net_from_adj(adj)


# ---------------------------------------------------------------------------
# oracles


def oracle_distances(adj: np.ndarray) -> np.ndarray:
    """Shortest directed distances by exhaustive simple-path enumeration."""
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)

    def walk(start: int, node: int, visited: frozenset[int], length: int) -> None:
        for nxt in range(n):
            if adj[node, nxt] and nxt not in visited:
                if length + 1 < dist[start, nxt]:
                    dist[start, nxt] = length + 1
                walk(start, nxt, visited | {nxt}, length + 1)

    for source in range(n):
        walk(source, source, frozenset({source}), 0)
    return dist


def oracle_distance_counts(adj: np.ndarray) -> tuple[int, int, int, int]:
    dist = oracle_distances(adj)
    n = adj.shape[0]
    off = ~np.eye(n, dtype=bool)
    values = dist[off]
    return (
        int((values == 1).sum()),
        int((values == 2).sum()),
        int((values == 3).sum()),
        n * (n - 1),
    )


def oracle_modified_aspl(adj: np.ndarray) -> float:
    c1, c2, c3, pairs = oracle_distance_counts(adj)
    return (c1 + 2 * c2 + 3 * c3 + SPL_CAP * (pairs - c1 - c2 - c3)) / pairs


def oracle_fraction_le(adj: np.ndarray, k: int) -> float:
    c1, c2, c3, pairs = oracle_distance_counts(adj)
    within = c1 + c2 if k == 2 else c1 + c2 + c3
    return within / pairs


def oracle_edge_transitivity(adj: np.ndarray) -> float:
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    two_paths = 0
    closed = 0
    for i in range(n):
        for j in range(n):
            if i == j or not adj[i, j]:
                continue
            for k in range(n):
                if k in (i, j) or not adj[j, k]:
                    continue
                two_paths += 1
                if adj[i, k]:
                    closed += 1
    if two_paths == 0:
        return math.nan
    return closed / two_paths


def oracle_avg_clustering(adj: np.ndarray) -> float:
    """Directed clustering by explicit triple enumeration."""
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    sym = adj.astype(int) + adj.T.astype(int)
    coeffs = []
    for i in range(n):
        triangles = 0
        for j in range(n):
            if j == i:
                continue
            for k in range(n):
                if k in (i, j):
                    continue
                triangles += sym[i, j] * sym[j, k] * sym[k, i]
        triangles /= 2.0
        d_total = int(adj[i].sum() + adj[:, i].sum())
        d_bidir = int((adj[i] & adj[:, i]).sum())
        denom = d_total * (d_total - 1) - 2 * d_bidir
        coeffs.append(triangles / denom if denom > 0 else 0.0)
    return float(np.mean(coeffs))


def oracle_sequential_cascade(
    slice_: AssetSlice,
    initial: set[str],
    d1: float,
    d2: float,
    haircut: float,
    rng: np.random.Generator,
) -> frozenset[str]:
    """Sequential fixed point: default one qualifying country at a time in
    random order until none qualifies."""
    totals = slice_.assets.sum(axis=1)
    defaulted = np.zeros(slice_.n, dtype=bool)
    for code in initial:
        defaulted[slice_.index(code)] = True
    while True:
        loss = haircut * slice_.assets[:, defaulted].sum(axis=1)
        eligible = np.flatnonzero(~defaulted & (loss > d1 * totals) & (loss > d2 * slice_.gdp))
        if eligible.size == 0:
            return frozenset(slice_.countries[i] for i in np.flatnonzero(defaulted))
        defaulted[eligible[rng.integers(eligible.size)]] = True


def oracle_quantile_midpoint(values: np.ndarray, q: float) -> float:
    """Empirical quantile with midpoint interpolation, from first principles."""
    ordered = np.sort(np.asarray(values, dtype=float))
    pos = q * (ordered.size - 1)
    lo = math.floor(pos)
    hi = math.ceil(pos)
    if lo == hi:
        return float(ordered[lo])
    return float((ordered[lo] + ordered[hi]) / 2.0)


# ---------------------------------------------------------------------------
# CLI fixture data


def fixture_panel_text() -> tuple[str, str]:
    """Deterministic two-year, eight-country panel as CSV text."""
    rng = np.random.default_rng(987654321)
    codes = ["AAA", "BBB", "CCC", "DDD", "EEE", "FFF", "GGG", "HHH"]
    asset_lines = ["year,holder,issuer,value_musd"]
    gdp_lines = ["year,country,gdp_musd"]
    for year in (2006, 2007):
        for country in codes:
            gdp_lines.append(f"{year},{country},{round(float(rng.uniform(100, 2000)), 1)}")
        for holder in codes:
            for issuer in codes:
                if holder == issuer:
                    continue
                if rng.random() < 0.35:
                    continue
                value = round(float(rng.lognormal(3.0, 1.4)), 1)
                asset_lines.append(f"{year},{holder},{issuer},{value}")
        # one out-of-core issuer so coverage < 1
        asset_lines.append(f"{year},AAA,XXX,{round(float(rng.uniform(5, 50)), 1)}")
    return "\n".join(asset_lines) + "\n", "\n".join(gdp_lines) + "\n"


@pytest.fixture(scope="session")
def fixture_data_dir(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("fixture_data")
    assets, gdp = fixture_panel_text()
    (path / "assets.csv").write_text(assets)
    (path / "gdp.csv").write_text(gdp)
    return path
