"""Reflecting walks, two-letter restrictions, the result of a word, and first-row bump orders."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import ColLetter, Letter, LinearOrder, RowLetter, ThomaParams
from .rsk import _Builder
from .sampling import SeededGenerator, map_chunks
from ._kernels import walk_batch


@dataclass(frozen=True)
class WalkConfig:
    """Walk on {0, 1, ...}: right with q1, left with q3 (held at 0), stay otherwise."""

    q1: float
    q3: float

    def __post_init__(self):
        if self.q1 < 0 or self.q3 < 0:
            raise ValueError("probabilities must be nonnegative")
        if not self.q1 < self.q3:
            raise ValueError("need q1 < q3")
        if self.q1 + self.q3 > 1 + 1e-15:
            raise ValueError("q1 + q3 must not exceed 1")

    @property
    def q2(self) -> float:
        return 1.0 - self.q1 - self.q3

    @property
    def ratio(self) -> float:
        return self.q1 / self.q3

    def bound(self) -> float:
        """2 sum_i i q^i = 2q / (1 - q)^2 with q = q1 / q3."""
        q = self.ratio
        return 2 * q / (1 - q) ** 2


def walk_expectations(cfg: WalkConfig, n: int) -> np.ndarray:
    """E position after 0..n steps by iterating the distribution over states 0..n."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    dist = np.zeros(n + 2)
    dist[0] = 1.0
    states = np.arange(n + 2, dtype=np.float64)
    out = np.empty(n + 1)
    out[0] = 0.0
    q1, q2, q3 = cfg.q1, cfg.q2, cfg.q3
    for t in range(1, n + 1):
        new = q2 * dist
        new[1:] += q1 * dist[:-1]
        new[:-1] += q3 * dist[1:]
        new[0] += q3 * dist[0]
        dist = new
        out[t] = math.fsum(states * dist)
    return out


def walk_expectation_exact(cfg: WalkConfig, n: int) -> float:
    return float(walk_expectations(cfg, n)[n])


def _walk_chunk(cfg: WalkConfig, n: int, seed: int, experiment: str, start: int, stop: int) -> np.ndarray:
    gen = SeededGenerator(seed)
    u = np.stack([gen.stream(experiment, t).random(n) for t in range(start, stop)]) if stop > start else np.zeros((0, n))
    return walk_batch(u.reshape(stop - start, n), cfg.q1, cfg.q3)


def walk_positions(cfg: WalkConfig, n: int, trials: int, gen: SeededGenerator, experiment: str = "walk", workers: int = 1) -> np.ndarray:
    chunk = max(1, 2_000_000 // max(n, 1))
    fn = _Partial(_walk_chunk, cfg, n, gen.seed, experiment)
    parts = map_chunks(fn, trials, chunk, workers)
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)


def walk_position(cfg: WalkConfig, n: int, gen: SeededGenerator, trial: int = 0, experiment: str = "walk") -> int:
    return int(_walk_chunk(cfg, n, gen.seed, experiment, trial, trial + 1)[0])


class _Partial:
    """Picklable partial application for chunk workers."""

    def __init__(self, fn, *args):
        self.fn, self.args = fn, args

    def __call__(self, start, stop):
        return self.fn(*self.args, start, stop)


# --------------------------------------------------------------------------
# Two-letter restrictions
# --------------------------------------------------------------------------


def restrict_word(word: Iterable[Letter], a: Letter, b: Letter) -> tuple:
    """Keep only the letters a and b."""
    if a == b:
        raise ValueError("a and b must differ")
    return tuple(x for x in word if x == a or x == b)


def rho(word: Sequence[Letter], a: Letter, b: Letter) -> int:
    """Largest (#b - #a) over all suffixes, the empty suffix included."""
    best = diff = 0
    for x in reversed(word):
        if x == b:
            diff += 1
        elif x == a:
            diff -= 1
        else:
            raise ValueError(f"{x} is neither {a} nor {b}")
        best = max(best, diff)
    return best


def first_row_count(word: Iterable[Letter], letter: Letter, order: LinearOrder) -> int:
    b = _Builder(order)
    for x in word:
        b.insert(x)
    return sum(1 for x in (b.rows[0] if b.rows else ()) if x == letter)


def _check_adjacent(order: LinearOrder, a: Letter, b: Letter) -> None:
    if not (order.is_weak(a) and order.is_weak(b)):
        raise ValueError("a and b must both be in L_e")
    if order.position(b) != order.position(a) + 1:
        raise ValueError("need a < b adjacent in the order")


def possible_transformation(word: Iterable[Letter], a: Letter, b: Letter, order: LinearOrder) -> tuple:
    """Letters a, b in the order they leave the first row, then those left in it (row order)."""
    _check_adjacent(order, a, b)
    builder = _Builder(order)
    out: list = []

    def log(row: int, bumped: Letter) -> None:
        if row == 0 and (bumped == a or bumped == b):
            out.append(bumped)

    for x in word:
        builder.insert(x, log)
    if builder.rows:
        out.extend(x for x in builder.rows[0] if x == a or x == b)
    return tuple(out)


# --------------------------------------------------------------------------
# Conditional Gaussian
# --------------------------------------------------------------------------


def _variances(params: ThomaParams) -> np.ndarray:
    return np.array(list(params.alphas) + list(params.betas) + [params.gamma], dtype=np.float64)


def _pick(params: ThomaParams, K: int, L: int) -> list[int]:
    if K > len(params.alphas) or L > len(params.betas) or K < 0 or L < 0:
        raise ValueError("K, L exceed the number of parameters")
    A = len(params.alphas)
    return list(range(K)) + [A + j for j in range(L)]


def conditional_covariance(params: ThomaParams, K: int, L: int) -> np.ndarray:
    """Covariance of (X_1..X_K, Y_1..Y_L) given that all independent coordinates sum to 0.

    Coordinates are independent centered Gaussians with variances alpha_i,
    beta_j, gamma; conditioning on the sum subtracts sigma sigma^T / s.
    """
    var = _variances(params)
    s = math.fsum(var)
    idx = _pick(params, K, L)
    sigma = var[idx]
    return np.diag(sigma) - np.outer(sigma, sigma) / s


def conditional_covariance_mc(params: ThomaParams, K: int, L: int, draws: int, gen: SeededGenerator, experiment: str = "remark1"):
    """Monte Carlo version: project Gaussian draws onto the zero-sum hyperplane.

    Returns (covariance estimate, standard errors of its entries).
    """
    var = _variances(params)
    rng = gen.stream(experiment, 0)
    X = rng.standard_normal((draws, len(var))) * np.sqrt(var)
    S = X.sum(axis=1, keepdims=True)
    proj = X - S * var / var.sum()
    Y = proj[:, _pick(params, K, L)]
    cov = np.cov(Y.T, bias=False).reshape(len(Y[0]), len(Y[0]))
    c = Y - Y.mean(0)
    prods = c[:, :, None] * c[:, None, :]
    se = prods.std(axis=0, ddof=1) / math.sqrt(draws)
    return cov, se
