"""Null-model graph families and the censored log-normal asset model.

Five families are matched to first-order statistics of an empirical
network: uniform edge probability (Erdos-Renyi), per-row and per-column
edge probabilities from the empirical out-/in-degree sequences,
degree-preserving edge rewiring, and a fitted log-normal asset model
whose generated slices are re-thresholded into binary networks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ingest import AssetSlice
from .netbuild import BinaryNetwork, ThresholdRule
from .seeding import child_rng

DEFAULT_SIGMA_CORRECTION = 1.183
DEFAULT_SWAP_FACTOR = 20
CENSOR_FLOOR_MUSD = 0.5

NULL_MODEL_KINDS = ("er", "out-degree", "in-degree", "rewiring", "log-normal")


def _generic_labels(n: int) -> tuple[str, ...]:
    return tuple(f"N{i:02d}" for i in range(n))


def sample_er(
    n: int,
    mean_out_degree: float,
    rng: np.random.Generator,
    countries: tuple[str, ...] | None = None,
) -> BinaryNetwork:
    """Uniform-probability digraph with edge probability d_bar / (n - 1)."""
    p = mean_out_degree / (n - 1)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability {p} outside [0, 1]")
    adj = rng.random((n, n)) < p
    np.fill_diagonal(adj, False)
    return BinaryNetwork(countries or _generic_labels(n), adj, "er")


def sample_outdegree(
    out_seq: np.ndarray,
    rng: np.random.Generator,
    countries: tuple[str, ...] | None = None,
) -> BinaryNetwork:
    """Row-probability digraph: edge i->j with probability out_seq[i] / (n - 1)."""
    out_seq = np.asarray(out_seq)
    n = out_seq.size
    if np.any(out_seq < 0) or np.any(out_seq > n - 1):
        raise ValueError("out-degrees must lie in [0, n - 1]")
    p = out_seq / (n - 1)
    adj = rng.random((n, n)) < p[:, None]
    np.fill_diagonal(adj, False)
    return BinaryNetwork(countries or _generic_labels(n), adj, "out-degree")


def sample_indegree(
    in_seq: np.ndarray,
    rng: np.random.Generator,
    countries: tuple[str, ...] | None = None,
) -> BinaryNetwork:
    """Column-probability digraph: edge i->j with probability in_seq[j] / (n - 1)."""
    in_seq = np.asarray(in_seq)
    n = in_seq.size
    if np.any(in_seq < 0) or np.any(in_seq > n - 1):
        raise ValueError("in-degrees must lie in [0, n - 1]")
    p = in_seq / (n - 1)
    adj = rng.random((n, n)) < p[None, :]
    np.fill_diagonal(adj, False)
    return BinaryNetwork(countries or _generic_labels(n), adj, "in-degree")


def sample_rewired(
    net: BinaryNetwork,
    rng: np.random.Generator,
    swap_factor: int = DEFAULT_SWAP_FACTOR,
) -> BinaryNetwork:
    """Degree-preserving randomization by pairwise edge swaps.

    Performs ``swap_factor * |E|`` attempted swaps (a->b, c->d becomes
    a->d, c->b), rejecting any swap that would create a self-loop or a
    duplicate edge. Every node keeps its exact in- and out-degree. Graphs
    with no valid swap come back as a copy.
    """
    if swap_factor < 1:
        raise ValueError("swap_factor must be >= 1")
    rows, cols = np.nonzero(net.adj)
    edges = list(zip(rows.tolist(), cols.tolist()))
    m = len(edges)
    label = f"rewired[{net.rule}]"
    if m < 2:
        return BinaryNetwork(net.countries, net.adj, label, net.source_year)
    edge_set = set(edges)
    attempts = swap_factor * m
    picks = rng.integers(0, m, size=(attempts, 2)).tolist()
    for i1, i2 in picks:
        if i1 == i2:
            continue
        a, b = edges[i1]
        c, d = edges[i2]
        if a == d or c == b:
            continue
        new1, new2 = (a, d), (c, b)
        if new1 in edge_set or new2 in edge_set:
            continue
        edge_set.remove((a, b))
        edge_set.remove((c, d))
        edge_set.add(new1)
        edge_set.add(new2)
        edges[i1] = new1
        edges[i2] = new2
    adj = np.zeros((net.n, net.n), dtype=bool)
    idx = np.array(edges)
    adj[idx[:, 0], idx[:, 1]] = True
    return BinaryNetwork(net.countries, adj, label, net.source_year)


@dataclass(frozen=True)
class LogNormalFit:
    """Fitted two-way country-effect model of log asset positions.

    The model is ln(s_ij + 1) = alpha_i + beta_j + eps over ordered pairs
    i != j, with censored zeros included as ln(1) = 0. The issuer effect
    of ``countries[baseline]`` is pinned to zero to identify the
    coefficients; residuals and sigma do not depend on that choice.
    ``sigma_raw`` is the maximum-likelihood residual standard deviation
    (divisor N); ``sigma_corrected`` multiplies it by the censoring
    correction factor.
    """

    countries: tuple[str, ...]
    alpha: np.ndarray
    beta: np.ndarray
    sigma_raw: float
    sigma_corrected: float
    correction_factor: float
    residuals: np.ndarray
    baseline: int
    year: int | None = None
    gdp: np.ndarray | None = None

    def residual_summary(self) -> dict[str, float]:
        res = self.residuals
        mean = float(res.mean())
        std = float(res.std())
        centered = res - mean
        m2 = float((centered**2).mean())
        if m2 > 0:
            skew = float((centered**3).mean() / m2**1.5)
            kurt = float((centered**4).mean() / m2**2)
        else:
            skew = kurt = 0.0
        if m2 > 0 and res.size >= 8:
            stat, p = jarque_bera(res)
        else:
            stat = p = math.nan
        return {
            "mean": mean,
            "std": std,
            "skew": skew,
            "kurtosis": kurt,
            "jarque_bera": stat,
            "p_value": p,
        }

    def to_json_dict(self) -> dict:
        return {
            "countries": list(self.countries),
            "alpha": [float(a) for a in self.alpha],
            "beta": [float(b) for b in self.beta],
            "sigma_raw": self.sigma_raw,
            "sigma_corrected": self.sigma_corrected,
            "correction_factor": self.correction_factor,
            "baseline_issuer": self.countries[self.baseline],
            "year": self.year,
            "residual_summary": self.residual_summary(),
        }


def _offdiag_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column indices of the n*(n-1) ordered pairs, row-major."""
    rows, cols = np.nonzero(~np.eye(n, dtype=bool))
    return rows, cols


def _design_matrix(n: int, baseline: int, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Holder dummies plus issuer dummies with the baseline column dropped."""
    num_obs = rows.size
    x = np.zeros((num_obs, 2 * n - 1))
    x[np.arange(num_obs), rows] = 1.0
    issuer_col = np.where(cols < baseline, cols, cols - 1)
    keep = cols != baseline
    x[np.flatnonzero(keep), n + issuer_col[keep]] = 1.0
    return x


def fit_lognormal(
    slice_: AssetSlice,
    correction_factor: float = DEFAULT_SIGMA_CORRECTION,
    baseline: int = 0,
) -> LogNormalFit:
    """Least-squares fit of ln(s_ij + 1) on holder and issuer effects."""
    n = slice_.n
    if n < 3:
        raise ValueError("fit needs at least 3 countries")
    rows, cols = _offdiag_pairs(n)
    y = np.log1p(slice_.assets[rows, cols])
    x = _design_matrix(n, baseline, rows, cols)
    theta, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
    if rank < 2 * n - 1:
        raise ValueError("design matrix rank deficient beyond the dummy redundancy")
    residuals = y - x @ theta
    sigma_raw = float(np.sqrt((residuals**2).mean()))
    alpha = theta[:n].copy()
    beta = np.insert(theta[n:], baseline, 0.0)
    return LogNormalFit(
        countries=slice_.countries,
        alpha=alpha,
        beta=beta,
        sigma_raw=sigma_raw,
        sigma_corrected=correction_factor * sigma_raw,
        correction_factor=correction_factor,
        residuals=residuals,
        baseline=baseline,
        year=slice_.year,
        gdp=slice_.gdp,
    )


def fit_lognormal_pooled(
    slices: list[AssetSlice],
    correction_factor: float = DEFAULT_SIGMA_CORRECTION,
    baseline: int = 0,
) -> LogNormalFit:
    """One fit over several years with country effects shared across years.

    Pooled fits have no single year or GDP vector, so they cannot seed
    slice generation; use a per-year fit for that.
    """
    if not slices:
        raise ValueError("need at least one slice")
    countries = tuple(sorted({c for s in slices for c in s.countries}))
    n = len(countries)
    if n < 3:
        raise ValueError("fit needs at least 3 countries")
    index = {c: i for i, c in enumerate(countries)}
    rows_all, cols_all, y_all = [], [], []
    for s in slices:
        rows, cols = _offdiag_pairs(s.n)
        local = np.array([index[c] for c in s.countries])
        rows_all.append(local[rows])
        cols_all.append(local[cols])
        y_all.append(np.log1p(s.assets[rows, cols]))
    rows = np.concatenate(rows_all)
    cols = np.concatenate(cols_all)
    y = np.concatenate(y_all)
    x = _design_matrix(n, baseline, rows, cols)
    theta, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
    if rank < 2 * n - 1:
        raise ValueError("design matrix rank deficient beyond the dummy redundancy")
    residuals = y - x @ theta
    sigma_raw = float(np.sqrt((residuals**2).mean()))
    return LogNormalFit(
        countries=countries,
        alpha=theta[:n].copy(),
        beta=np.insert(theta[n:], baseline, 0.0),
        sigma_raw=sigma_raw,
        sigma_corrected=correction_factor * sigma_raw,
        correction_factor=correction_factor,
        residuals=residuals,
        baseline=baseline,
    )


def _censor_and_round(s: np.ndarray, censor_floor: float | None, rounding: bool) -> np.ndarray:
    if censor_floor is not None:
        s = np.where(s < censor_floor, 0.0, s)
    if rounding:
        s = np.rint(s)
    return s


def sample_lognormal_matrix(
    fit: LogNormalFit,
    rng: np.random.Generator,
    censor_floor: float | None = CENSOR_FLOOR_MUSD,
    rounding: bool = True,
) -> np.ndarray:
    """Raw asset matrix draw: exp(alpha_i + beta_j + eps) - 1, zero diagonal.

    ``censor_floor=None`` disables the floor entirely (diagnostics; raw
    draws below exp(mu) = 1 can then be negative and the matrix cannot be
    wrapped in a slice).
    """
    n = len(fit.countries)
    mu = fit.alpha[:, None] + fit.beta[None, :]
    eps = rng.normal(0.0, fit.sigma_corrected, size=(n, n))
    s = np.expm1(mu + eps)
    s = _censor_and_round(s, censor_floor, rounding)
    np.fill_diagonal(s, 0.0)
    return s


def sample_lognormal_slice(
    fit: LogNormalFit,
    rng: np.random.Generator,
    censor_floor: float | None = CENSOR_FLOOR_MUSD,
    rounding: bool = True,
) -> AssetSlice:
    """Draw a synthetic asset slice from a fitted model.

    Positions follow :func:`sample_lognormal_matrix` with
    eps ~ Normal(0, sigma_corrected); defaults censor below 0.5 and round
    to integer millions, so generated values are always nonnegative. The
    slice keeps the GDP vector captured at fit time and reports coverage
    1.0 (it is self-contained by construction).
    """
    if fit.gdp is None:
        raise ValueError("fit has no gdp vector (pooled fit); refit on a single slice")
    s = sample_lognormal_matrix(fit, rng, censor_floor, rounding)
    return AssetSlice(fit.year, fit.countries, s, fit.gdp, 1.0)


def estimate_sigma_correction(
    alpha: np.ndarray,
    beta: np.ndarray,
    sigma: float,
    censor_floor: float = CENSOR_FLOOR_MUSD,
    trials: int = 200,
    rng: np.random.Generator | None = None,
    rounding: bool = True,
) -> float:
    """Monte-Carlo estimate of the sigma bias factor due to censoring.

    Generates ``trials`` synthetic slices from (alpha, beta, sigma),
    censors and rounds them like reported data, refits, and returns the
    mean of sigma / sigma_refit. The refit sigma uses the
    degrees-of-freedom divisor N - k so an uncensored refit recovers the
    generating sigma in expectation and the returned factor isolates the
    censoring/rounding bias.
    """
    if trials < 100:
        raise ValueError("need at least 100 trials")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    n = alpha.size
    if beta.size != n or n < 3:
        raise ValueError("alpha and beta must both have length n >= 3")
    if rng is None:
        rng = np.random.default_rng()
    rows, cols = _offdiag_pairs(n)
    x = _design_matrix(n, 0, rows, cols)
    q, _ = np.linalg.qr(x)
    num_obs = rows.size
    dof = num_obs - (2 * n - 1)
    mu = (alpha[:, None] + beta[None, :])[rows, cols]
    ratios = np.empty(trials)
    for trial in range(trials):
        s = np.expm1(mu + rng.normal(0.0, sigma, size=num_obs))
        s = _censor_and_round(s, censor_floor, rounding)
        y = np.log1p(s)
        z = q.T @ y
        rss = float(y @ y - z @ z)
        if rss <= 0:
            raise ValueError("degenerate refit: censoring removed all variation")
        ratios[trial] = sigma / math.sqrt(rss / dof)
    return float(ratios.mean())


def jarque_bera(residuals: np.ndarray) -> tuple[float, float]:
    """Jarque-Bera normality statistic and its chi-squared(2) tail p-value.

    JB = (N/6) * (skew^2 + (kurtosis - 3)^2 / 4); with two degrees of
    freedom the upper tail is exp(-JB / 2).
    """
    x = np.asarray(residuals, dtype=float)
    if x.size < 8:
        raise ValueError("need at least 8 residuals")
    centered = x - x.mean()
    m2 = float((centered**2).mean())
    if m2 == 0:
        raise ValueError("zero variance residuals")
    skew = float((centered**3).mean() / m2**1.5)
    kurt = float((centered**4).mean() / m2**2)
    jb = x.size / 6.0 * (skew**2 + (kurt - 3.0) ** 2 / 4.0)
    return jb, math.exp(-jb / 2.0)


@dataclass(frozen=True)
class NullModelSpec:
    """Parameters for one null-model family, extracted from empirical data.

    ``sample(index)`` draws the index-th network of the ensemble; the
    (seed, index) pair fully determines the draw, so ensembles are
    reproducible under any scheduling.
    """

    kind: str
    seed: int
    countries: tuple[str, ...]
    mean_out_degree: float | None = None
    out_degrees: tuple[int, ...] | None = None
    in_degrees: tuple[int, ...] | None = None
    base: BinaryNetwork | None = None
    swap_factor: int = DEFAULT_SWAP_FACTOR
    fit: LogNormalFit | None = None
    rule: ThresholdRule | None = None

    def __post_init__(self) -> None:
        if self.kind not in NULL_MODEL_KINDS:
            raise ValueError(f"unknown null-model kind {self.kind!r}")
        needed = {
            "er": self.mean_out_degree is not None,
            "out-degree": self.out_degrees is not None,
            "in-degree": self.in_degrees is not None,
            "rewiring": self.base is not None,
            "log-normal": self.fit is not None and self.rule is not None,
        }
        if not needed[self.kind]:
            raise ValueError(f"incomplete parameters for {self.kind!r} null model")

    @property
    def n(self) -> int:
        return len(self.countries)

    @classmethod
    def from_empirical(
        cls,
        kind: str,
        net: BinaryNetwork,
        seed: int,
        fit: LogNormalFit | None = None,
        rule: ThresholdRule | None = None,
        swap_factor: int = DEFAULT_SWAP_FACTOR,
    ) -> "NullModelSpec":
        """Extract the first-order parameters the given family needs."""
        if kind == "er":
            return cls(kind, seed, net.countries, mean_out_degree=float(net.out_degrees().mean()))
        if kind == "out-degree":
            return cls(kind, seed, net.countries, out_degrees=tuple(net.out_degrees()))
        if kind == "in-degree":
            return cls(kind, seed, net.countries, in_degrees=tuple(net.in_degrees()))
        if kind == "rewiring":
            return cls(kind, seed, net.countries, base=net, swap_factor=swap_factor)
        if kind == "log-normal":
            if fit is None or rule is None:
                raise ValueError("log-normal model needs a fit and a thresholding rule")
            return cls(kind, seed, fit.countries, fit=fit, rule=rule)
        raise ValueError(f"unknown null-model kind {kind!r}")

    def sample(self, index: int) -> BinaryNetwork:
        rng = child_rng(self.seed, index)
        if self.kind == "er":
            return sample_er(self.n, self.mean_out_degree, rng, self.countries)
        if self.kind == "out-degree":
            return sample_outdegree(np.array(self.out_degrees), rng, self.countries)
        if self.kind == "in-degree":
            return sample_indegree(np.array(self.in_degrees), rng, self.countries)
        if self.kind == "rewiring":
            return sample_rewired(self.base, rng, self.swap_factor)
        slice_ = sample_lognormal_slice(self.fit, rng)
        return self.rule.apply(slice_)
