"""Monte Carlo harnesses for row/column fluctuations, drift, LLN and poissonization.

Each trial samples a word from its own stream, pushes it through the
compiled RSK kernel, and keeps the leading row and column lengths together
with the letter counts of the same word, so drifts are exactly coupled.
Per-trial results are concatenated in trial order before any reduction,
which makes every report independent of the worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats as sps

from .core import G, ColLetter, LinearOrder, RowLetter, ThomaParams
from .sampling import (
    PAD,
    SeededGenerator,
    default_workers,
    encode_keys,
    map_chunks,
    sample_codes,
)
from ._kernels import shapes_batch

SE_BAND = 4.0
JACKKNIFE_BLOCKS = 100
CELLS_PER_CHUNK = 2_000_000


# --------------------------------------------------------------------------
# Theory
# --------------------------------------------------------------------------


def theoretical_covariance(params: ThomaParams, K: int, L: int) -> np.ndarray:
    """Limit covariance of the scaled fluctuations of rows 1..K and columns 1..L."""
    if K < 0 or L < 0 or K > len(params.alphas) or L > len(params.betas):
        raise ValueError("K, L exceed the number of parameters")
    if not params.is_strict(K, L):
        raise ValueError("rows 1..K and columns 1..L need strictly decreasing, distinct parameters")
    a, b = params.alphas, params.betas
    d = K + L
    C = np.zeros((d, d))
    for i in range(K):
        for j in range(K):
            C[i, j] = a[i] - a[i] ** 2 if i == j else -a[i] * a[j]
        for j in range(L):
            C[i, K + j] = C[K + j, i] = -a[i] * b[j]
    for i in range(L):
        for j in range(L):
            C[K + i, K + j] = b[i] - b[i] ** 2 if i == j else -b[i] * b[j]
    return C


# --------------------------------------------------------------------------
# Sampling shapes
# --------------------------------------------------------------------------


class View:
    """Run RSK on the sampled words as they are, under (params, order)."""

    def __init__(self, params: ThomaParams, order: LinearOrder):
        self.params, self.order = params, order

    def map_codes(self, codes, gvals):
        return codes, gvals


class TransposedView:
    """Words relabelled x_i <-> y_i and read under the reversed order with L_e, L_o swapped.

    Rows of the resulting shapes are the columns of the original ones
    (for words with distinct G letters), and the alphabet is that of the
    transposed parameters.
    """

    def __init__(self, params: ThomaParams, order: LinearOrder):
        self.source = params
        self.params = params.transposed()
        swap = {}
        for i in range(len(params.alphas)):
            swap[RowLetter(i + 1)] = ColLetter(i + 1)
        for j in range(len(params.betas)):
            swap[ColLetter(j + 1)] = RowLetter(j + 1)
        t = order.transposed()
        segs = tuple(G if s is G else swap[s] for s in t.segments)
        self.order = LinearOrder(segs, frozenset(swap[s] for s in t.weak), t.g_reversed)
        A, B = len(params.alphas), len(params.betas)
        self._cmap = np.array([B + i for i in range(A)] + [j for j in range(B)], dtype=np.int32)

    def map_codes(self, codes, gvals):
        out = codes.copy()
        disc = codes >= 0
        if len(self._cmap):
            out[disc] = self._cmap[codes[disc]]
        return out, gvals


@dataclass
class ShapeBatch:
    rows: np.ndarray  # (T, nrows) leading row lengths
    cols: np.ndarray  # (T, ncols) leading column lengths
    nrows: np.ndarray  # (T,) total number of rows
    lengths: np.ndarray  # (T,) word lengths
    counts: np.ndarray  # (T, A + B) letter counts of the sampled word
    cont: np.ndarray  # (T,) number of G letters

    @classmethod
    def concat(cls, parts: Sequence[ShapeBatch]) -> ShapeBatch:
        return cls(*(np.concatenate([getattr(p, f) for p in parts]) for f in ("rows", "cols", "nrows", "lengths", "counts", "cont")))


def _shape_chunk(params, seed, experiment, n, nu, nrows, ncols, views, start, stop):
    gen = SeededGenerator(seed)
    codes, gvals, lengths = sample_codes(params, gen, experiment, range(start, stop), n=n, nu=nu)
    ndisc = len(params.masses)
    counts = np.stack([(codes == c).sum(axis=1) for c in range(ndisc)], axis=1) if ndisc else np.zeros((len(codes), 0), dtype=np.int64)
    cont = (codes == -1).sum(axis=1)
    out = []
    for view in views:
        vc, vg = view.map_codes(codes, gvals)
        keys = encode_keys(view.params, view.order, vc, vg)
        weak = np.array(view.order.weak_by_slot(), dtype=np.bool_)
        if len(weak) == 0:
            weak = np.zeros(1, dtype=np.bool_)
        rows, cols, nr = shapes_batch(np.ascontiguousarray(keys), lengths, weak, view.order.slot_offset, nrows, ncols)
        out.append(ShapeBatch(rows, cols, nr, lengths, counts.astype(np.int64), cont.astype(np.int64)))
    return out


def sample_shapes(
    params: ThomaParams,
    order: LinearOrder,
    gen: SeededGenerator,
    experiment: str,
    trials: int,
    n: int | None = None,
    nu: float | None = None,
    nrows: int = 1,
    ncols: int = 1,
    views: Sequence | None = None,
    workers: int = 1,
) -> list[ShapeBatch]:
    """RSK shapes of ``trials`` random words, one batch per view of the same words."""
    views = list(views) if views is not None else [View(params, order)]
    width = n if n is not None else int(nu + 10 * math.sqrt(nu) + 10)
    chunk = max(1, CELLS_PER_CHUNK // max(width, 1))
    fn = _ChunkFn(params, gen.seed, experiment, n, nu, nrows, ncols, views)
    parts = map_chunks(fn, trials, chunk, workers)
    if not parts:
        empty = ShapeBatch(
            np.zeros((0, nrows), np.int64), np.zeros((0, ncols), np.int64), np.zeros(0, np.int64),
            np.zeros(0, np.int64), np.zeros((0, len(params.masses)), np.int64), np.zeros(0, np.int64),
        )
        return [empty for _ in views]
    return [ShapeBatch.concat([p[v] for p in parts]) for v in range(len(views))]


class _ChunkFn:
    def __init__(self, *args):
        self.args = args

    def __call__(self, start, stop):
        return _shape_chunk(*self.args, start, stop)


# --------------------------------------------------------------------------
# Estimators
# --------------------------------------------------------------------------


def jackknife_covariance(x: np.ndarray, blocks: int = JACKKNIFE_BLOCKS) -> tuple[np.ndarray, np.ndarray]:
    """Sample covariance and delete-one-block jackknife standard errors of every entry."""
    x = np.asarray(x, dtype=np.float64)
    N, d = x.shape
    if N < 2:
        raise ValueError("need at least two trials")
    c = x - x.mean(axis=0)
    cov = c.T @ c / (N - 1)
    B = min(blocks, N)
    if B < 2:
        return cov, np.full((d, d), np.inf)
    idx = np.array_split(np.arange(N), B)
    s1 = np.stack([c[i].sum(axis=0) for i in idx])
    s2 = np.stack([c[i].T @ c[i] for i in idx])
    nb = np.array([len(i) for i in idx], dtype=np.float64)
    T1, T2 = s1.sum(axis=0), s2.sum(axis=0)
    est = np.empty((B, d, d))
    for b in range(B):
        m = N - nb[b]
        r1 = T1 - s1[b]
        est[b] = (T2 - s2[b] - np.outer(r1, r1) / m) / (m - 1)
    mean_est = est.mean(axis=0)
    se = np.sqrt((B - 1) / B * ((est - mean_est) ** 2).sum(axis=0))
    return cov, se


def ks_lattice(x: np.ndarray, sd: float, spacing: float = 0.0) -> float:
    """Kolmogorov-Smirnov distance to Normal(0, sd^2) with continuity correction.

    Samples on a lattice of the given spacing are compared at each atom
    against the normal CDF at the atom's cell edges (atom +- spacing/2);
    spacing 0 gives the usual statistic.
    """
    x = np.sort(np.asarray(x, dtype=np.float64))
    N = len(x)
    if sd <= 0:
        return float(np.mean(x != 0))
    vals, first = np.unique(x, return_index=True)
    last = np.append(first[1:], N)
    F_hi = last / N
    F_lo = first / N
    h = spacing / 2
    d_hi = np.abs(F_hi - sps.norm.cdf(vals + h, scale=sd))
    d_lo = np.abs(F_lo - sps.norm.cdf(vals - h, scale=sd))
    return float(max(d_hi.max(), d_lo.max()))


@dataclass
class CovarianceReport:
    labels: list
    trials: int
    mean: np.ndarray
    mean_se: np.ndarray
    cov: np.ndarray
    cov_se: np.ndarray
    theory: np.ndarray
    theory_mean: np.ndarray
    ks: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ks_centered: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def cov_z(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.abs(self.cov - self.theory) / self.cov_se
        return np.where(np.abs(self.cov - self.theory) == 0, 0.0, z)

    @property
    def max_cov_z(self) -> float:
        return float(self.cov_z.max()) if self.cov.size else 0.0

    @property
    def mean_z(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.abs(self.mean - self.theory_mean) / self.mean_se
        return np.where(np.abs(self.mean - self.theory_mean) == 0, 0.0, z)

    def to_dict(self) -> dict:
        return {
            "labels": self.labels,
            "trials": self.trials,
            "mean": self.mean.tolist(),
            "mean_se": self.mean_se.tolist(),
            "cov": self.cov.tolist(),
            "cov_se": self.cov_se.tolist(),
            "theory": self.theory.tolist(),
            "max_cov_dev_in_se": self.max_cov_z,
            "max_mean_dev_in_se": float(self.mean_z.max()) if self.mean.size else 0.0,
            "ks": self.ks.tolist(),
            "ks_centered": self.ks_centered.tolist(),
        }


def covariance_report(samples: np.ndarray, theory: np.ndarray, labels: list, spacing: float = 0.0) -> CovarianceReport:
    samples = np.asarray(samples, dtype=np.float64)
    N = len(samples)
    mean = samples.mean(axis=0)
    mean_se = samples.std(axis=0, ddof=1) / math.sqrt(N)
    cov, cov_se = jackknife_covariance(samples)
    sds = np.sqrt(np.clip(np.diag(theory), 0, None))
    ks = np.array([ks_lattice(samples[:, i], sds[i], spacing) for i in range(samples.shape[1])])
    ksc = np.array([ks_lattice(samples[:, i] - mean[i], sds[i], spacing) for i in range(samples.shape[1])])
    return CovarianceReport(labels, N, mean, mean_se, cov, cov_se, theory, np.zeros(len(mean)), ks, ksc)


# --------------------------------------------------------------------------
# Harnesses
# --------------------------------------------------------------------------


@dataclass
class FluctuationSample:
    values: np.ndarray  # (trials, K + L)
    labels: list

    @property
    def trials(self) -> int:
        return len(self.values)


@dataclass
class DriftSample:
    values: np.ndarray  # (trials, K + L) integer drifts
    labels: list


def _labels(K: int, L: int) -> list:
    return [f"row{i + 1}" for i in range(K)] + [f"col{j + 1}" for j in range(L)]


def fluctuations(batch: ShapeBatch, params: ThomaParams, K: int, L: int, scale: float) -> FluctuationSample:
    """((lambda_i - alpha_i s) / sqrt(s), (lambda'_j - beta_j s) / sqrt(s)) at size s."""
    centre = np.array(list(params.alphas[:K]) + list(params.betas[:L])) * scale
    obs = np.concatenate([batch.rows[:, :K], batch.cols[:, :L]], axis=1).astype(np.float64)
    return FluctuationSample((obs - centre) / math.sqrt(scale), _labels(K, L))


def drifts(batch: ShapeBatch, params: ThomaParams, K: int, L: int) -> DriftSample:
    """lambda_i - N_{x_i} and lambda'_j - N_{y_j} on the same word."""
    A = len(params.alphas)
    eps_r = batch.rows[:, :K] - batch.counts[:, :K]
    eps_c = batch.cols[:, :L] - batch.counts[:, A : A + L]
    return DriftSample(np.concatenate([eps_r, eps_c], axis=1), _labels(K, L))


def run_clt(
    params: ThomaParams,
    K: int,
    L: int,
    n: int,
    trials: int,
    order: LinearOrder | None = None,
    gen: SeededGenerator | None = None,
    workers: int = 1,
    experiment: str = "clt",
) -> tuple[FluctuationSample, CovarianceReport]:
    if n < 1 or trials < 2:
        raise ValueError("need n >= 1 and at least two trials")
    theory = theoretical_covariance(params, K, L)
    order = order or LinearOrder.p1(params)
    gen = gen or SeededGenerator(0)
    (batch,) = sample_shapes(params, order, gen, experiment, trials, n=n, nrows=max(K, 1), ncols=max(L, 1), workers=workers)
    fs = fluctuations(batch, params, K, L, n)
    return fs, covariance_report(fs.values, theory, fs.labels, spacing=1 / math.sqrt(n))


def run_clt_poisson(
    params: ThomaParams,
    K: int,
    L: int,
    nu: float,
    trials: int,
    gen: SeededGenerator | None = None,
    order: LinearOrder | None = None,
    workers: int = 1,
    experiment: str = "poisson",
) -> tuple[FluctuationSample, CovarianceReport]:
    """Poissonized fluctuations against the independent limit diag(alpha, beta)."""
    if nu <= 0:
        raise ValueError("nu must be positive")
    theoretical_covariance(params, K, L)  # same hypotheses
    theory = np.diag(list(params.alphas[:K]) + list(params.betas[:L]))
    order = order or LinearOrder.p1(params)
    gen = gen or SeededGenerator(0)
    (batch,) = sample_shapes(params, order, gen, experiment, trials, nu=nu, nrows=max(K, 1), ncols=max(L, 1), workers=workers)
    fs = fluctuations(batch, params, K, L, nu)
    return fs, covariance_report(fs.values, theory, fs.labels, spacing=1 / math.sqrt(nu))


@dataclass
class DriftReport:
    labels: list
    grid: list
    trials: int
    mean_abs: np.ndarray  # (len(grid), K + L)
    se: np.ndarray
    mean: np.ndarray  # signed means, for reference

    @property
    def growth_ratio(self) -> np.ndarray:
        """max over the grid divided by the value at the smallest size."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.mean_abs.max(axis=0) / self.mean_abs[0]

    def band_excess(self, slack: float = 0.5, k_se: float = 5.0) -> np.ndarray:
        """estimate(last) - (estimate(first) + k_se * combined SE + slack); <= 0 means no growth."""
        comb = np.sqrt(self.se[0] ** 2 + self.se[-1] ** 2)
        return self.mean_abs[-1] - (self.mean_abs[0] + k_se * comb + slack)

    def bounded(self, slack: float = 0.5, k_se: float = 5.0) -> bool:
        return bool(np.all(self.band_excess(slack, k_se) <= 0))

    def to_dict(self) -> dict:
        return {
            "labels": self.labels,
            "grid": list(self.grid),
            "trials": self.trials,
            "mean_abs": self.mean_abs.tolist(),
            "se": self.se.tolist(),
            "mean": self.mean.tolist(),
            "growth_ratio": self.growth_ratio.tolist(),
            "band_excess": self.band_excess().tolist(),
        }


def _drift_report(samples: list[DriftSample], grid: list, trials: int) -> DriftReport:
    absval = [np.abs(s.values) for s in samples]
    mean_abs = np.stack([a.mean(axis=0) for a in absval])
    se = np.stack([a.std(axis=0, ddof=1) / math.sqrt(len(a)) if len(a) > 1 else np.full(a.shape[1], np.inf) for a in absval])
    mean = np.stack([s.values.mean(axis=0) for s in samples])
    return DriftReport(samples[0].labels, list(grid), trials, mean_abs, se, mean)


def run_drift(
    params: ThomaParams,
    K: int,
    L: int,
    n_grid: Sequence[int],
    trials: int,
    order: LinearOrder | None = None,
    gen: SeededGenerator | None = None,
    workers: int = 1,
    experiment: str = "drift",
) -> DriftReport:
    if any(n_grid[i] >= n_grid[i + 1] for i in range(len(n_grid) - 1)):
        raise ValueError("n_grid must be increasing")
    order = order or LinearOrder.p1(params)
    gen = gen or SeededGenerator(0)
    samples = []
    for n in n_grid:
        (batch,) = sample_shapes(params, order, gen, f"{experiment}/n={n}", trials, n=n, nrows=max(K, 1), ncols=max(L, 1), workers=workers)
        samples.append(drifts(batch, params, K, L))
    return _drift_report(samples, n_grid, trials)


def run_drift_poisson(
    params: ThomaParams,
    K: int,
    L: int,
    nu_grid: Sequence[float],
    trials: int,
    order: LinearOrder | None = None,
    gen: SeededGenerator | None = None,
    workers: int = 1,
    experiment: str = "poisson-drift",
) -> DriftReport:
    order = order or LinearOrder.p1(params)
    gen = gen or SeededGenerator(0)
    samples = []
    for nu in nu_grid:
        (batch,) = sample_shapes(params, order, gen, f"{experiment}/nu={nu}", trials, nu=nu, nrows=max(K, 1), ncols=max(L, 1), workers=workers)
        samples.append(drifts(batch, params, K, L))
    return _drift_report(samples, nu_grid, trials)


@dataclass
class LLNReport:
    labels: list
    grid: list
    trials: int
    mean: np.ndarray  # (len(grid), K + L) means of lambda_i / n and lambda'_j / n
    se: np.ndarray
    target: np.ndarray

    def to_dict(self) -> dict:
        return {
            "labels": self.labels,
            "grid": list(self.grid),
            "trials": self.trials,
            "mean": self.mean.tolist(),
            "se": self.se.tolist(),
            "target": self.target.tolist(),
        }


def run_lln(
    params: ThomaParams,
    n_grid: Sequence[int],
    trials: int,
    order: LinearOrder | None = None,
    gen: SeededGenerator | None = None,
    K: int | None = None,
    L: int | None = None,
    workers: int = 1,
    experiment: str = "lln",
) -> LLNReport:
    K = max(1, len(params.alphas)) if K is None else K
    L = max(1, len(params.betas)) if L is None else L
    order = order or LinearOrder.p1(params)
    gen = gen or SeededGenerator(0)
    means, ses = [], []
    for n in n_grid:
        (batch,) = sample_shapes(params, order, gen, f"{experiment}/n={n}", trials, n=n, nrows=K, ncols=L, workers=workers)
        x = np.concatenate([batch.rows[:, :K], batch.cols[:, :L]], axis=1) / n
        means.append(x.mean(axis=0))
        ses.append(x.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else np.zeros(K + L))
    pad = lambda seq, k: list(seq[:k]) + [0.0] * (k - len(seq[:k]))  # noqa: E731
    target = np.array(pad(params.alphas, K) + pad(params.betas, L))
    return LLNReport(_labels(K, L), list(n_grid), trials, np.stack(means), np.stack(ses), target)


# --------------------------------------------------------------------------
# Distributional comparisons
# --------------------------------------------------------------------------


def chi2_homogeneity(a: np.ndarray, b: np.ndarray, min_expected: float = 5.0) -> tuple[float, float]:
    """Two-sample chi-square test on integer samples; sparse values are pooled into neighbours.

    Returns (statistic, p-value).
    """
    a = np.asarray(a).astype(np.int64)
    b = np.asarray(b).astype(np.int64)
    lo, hi = min(a.min(), b.min()), max(a.max(), b.max())
    ca = np.bincount(a - lo, minlength=hi - lo + 1)
    cb = np.bincount(b - lo, minlength=hi - lo + 1)
    frac = len(a) / (len(a) + len(b))
    # pool adjacent cells until each has enough expected count in both samples
    bins_a, bins_b = [], []
    acc_a = acc_b = 0
    for x, y in zip(ca, cb):
        acc_a += x
        acc_b += y
        tot = acc_a + acc_b
        if tot * min(frac, 1 - frac) >= min_expected:
            bins_a.append(acc_a)
            bins_b.append(acc_b)
            acc_a = acc_b = 0
    if acc_a or acc_b:
        if bins_a:
            bins_a[-1] += acc_a
            bins_b[-1] += acc_b
        else:
            bins_a.append(acc_a)
            bins_b.append(acc_b)
    if len(bins_a) < 2:
        return 0.0, 1.0
    res = sps.chi2_contingency(np.array([bins_a, bins_b]), correction=False)
    return float(res.statistic), float(res.pvalue)


def drift_order_test(
    params: ThomaParams,
    n: int,
    trials: int,
    orders: Sequence[LinearOrder],
    gen: SeededGenerator,
    index: int = 0,
    workers: int = 1,
    experiment: str = "order",
) -> tuple[float, float]:
    """Compare the law of the first-row drift under two orders (independent streams)."""
    if len(orders) != 2:
        raise ValueError("need exactly two orders")
    samples = []
    for k, order in enumerate(orders):
        (batch,) = sample_shapes(params, order, gen, f"{experiment}/{k}", trials, n=n, nrows=index + 1, ncols=1, workers=workers)
        samples.append(batch.rows[:, index] - batch.counts[:, index])
    return chi2_homogeneity(samples[0], samples[1])


def dominance_violations(batch: ShapeBatch, starred: ShapeBatch, kmax: int) -> int:
    """Trials where some partial row sum k <= kmax of the original exceeds the amalgamated one."""
    a = np.cumsum(batch.rows[:, :kmax], axis=1)
    b = np.cumsum(starred.rows[:, :kmax], axis=1)
    return int(np.any(a > b, axis=1).sum())


__all__ = [
    "theoretical_covariance",
    "sample_shapes",
    "ShapeBatch",
    "View",
    "TransposedView",
    "jackknife_covariance",
    "ks_lattice",
    "covariance_report",
    "CovarianceReport",
    "FluctuationSample",
    "DriftSample",
    "fluctuations",
    "drifts",
    "run_clt",
    "run_clt_poisson",
    "run_drift",
    "run_drift_poisson",
    "run_lln",
    "DriftReport",
    "LLNReport",
    "chi2_homogeneity",
    "drift_order_test",
    "dominance_violations",
    "default_workers",
    "SE_BAND",
    "PAD",
]
