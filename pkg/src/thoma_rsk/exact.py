"""Exact finite-n measures from the Schur specialization, plus enumeration oracles.

The specialization sends the generating function of complete symmetric
functions to exp(gamma z) prod (1 + beta_j z) / (1 - alpha_i z); Schur
values follow from Jacobi-Trudi determinants, and the probability of a
diagram is the Schur value times the number of standard tableaux.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np
from scipy import stats

from .core import (
    ColLetter,
    ContLetter,
    LinearOrder,
    RowLetter,
    TableauType,
    ThomaParams,
    YoungDiagram,
    compare_arrows,
    Arrow,
    tableau_type,
    ups,
)
from .rsk import rsk

EXACT_CAP = 20
TABLEAU_CAP = 12
NEG_CLIP = 1e-12


# --------------------------------------------------------------------------
# Truncated power series
# --------------------------------------------------------------------------


class TruncatedSeries:
    """Coefficients c_0..c_N of a power series, arithmetic exact through degree N."""

    def __init__(self, coeffs: Sequence, degree: int):
        coeffs = list(coeffs)[: degree + 1]
        zero = coeffs[0] * 0 if coeffs else 0
        self.coeffs = coeffs + [zero] * (degree + 1 - len(coeffs))
        self.degree = degree

    def __getitem__(self, k: int):
        return self.coeffs[k] if 0 <= k <= self.degree else self.coeffs[0] * 0

    def _sum(self, terms):
        terms = list(terms)
        if terms and isinstance(terms[0], float):
            return math.fsum(terms)
        return sum(terms, self.coeffs[0] * 0)

    def __mul__(self, other: TruncatedSeries) -> TruncatedSeries:
        N = min(self.degree, other.degree)
        a, b = self.coeffs, other.coeffs
        return TruncatedSeries([self._sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(N + 1)], N)

    def exp(self) -> TruncatedSeries:
        """exp of a series with zero constant term, via k c_k = sum_{j=1}^k j a_j c_{k-j}."""
        if self.coeffs[0] != 0:
            raise ValueError("exp needs a zero constant term")
        a = self.coeffs
        one = a[0] * 0 + 1
        c = [one]
        for k in range(1, self.degree + 1):
            c.append(self._sum(j * a[j] * c[k - j] for j in range(1, k + 1)) / k)
        return TruncatedSeries(c, self.degree)

    @classmethod
    def geometric(cls, x, degree: int) -> TruncatedSeries:
        """1 / (1 - x z)."""
        out, p = [], x * 0 + 1
        for _ in range(degree + 1):
            out.append(p)
            p = p * x
        return cls(out, degree)


def _masses(params: ThomaParams, exact: bool):
    if exact:
        conv = lambda v: Fraction(repr(v))  # noqa: E731  decimal inputs become exact rationals
    else:
        conv = float
    return [conv(a) for a in params.alphas], [conv(b) for b in params.betas], conv(params.gamma)


@lru_cache(maxsize=256)
def _series(params: ThomaParams, N: int, exact: bool, dual: bool) -> tuple:
    alphas, betas, gamma = _masses(params, exact)
    if dual:
        alphas, betas = betas, alphas
    one = Fraction(1) if exact else 1.0
    zero = one * 0
    s = TruncatedSeries([zero, gamma], N).exp() if N >= 1 else TruncatedSeries([one], N)
    for b in betas:
        s = s * TruncatedSeries([one, b], N)
    for a in alphas:
        s = s * TruncatedSeries.geometric(a, N)
    return tuple(s.coeffs)


def h_values(params: ThomaParams, N: int, exact: bool = False) -> tuple:
    """Specialized complete symmetric functions h_0..h_N."""
    return _series(params, N, exact, False)


def e_values(params: ThomaParams, N: int, exact: bool = False) -> tuple:
    """Specialized elementary symmetric functions e_0..e_N (alphas and betas exchanged)."""
    return _series(params, N, exact, True)


def pi_h(params: ThomaParams, n: int, exact: bool = False):
    if n < 0:
        return 0.0
    return h_values(params, n, exact)[n]


# --------------------------------------------------------------------------
# Schur values and dimensions
# --------------------------------------------------------------------------


def _det_fraction(M: list[list[Fraction]]) -> Fraction:
    M = [row[:] for row in M]
    n = len(M)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            if f:
                for k in range(c, n):
                    M[r][k] -= f * M[c][k]
    return det


def jacobi_trudi(parts: Sequence[int], seq: Sequence) -> object:
    """det(seq[parts_i - i + j]) with seq[k] = 0 for k < 0."""
    r = len(parts)
    if r == 0:
        return seq[0] * 0 + 1
    zero = seq[0] * 0

    def at(k):
        return seq[k] if k >= 0 else zero

    M = [[at(parts[i] - i + j) for j in range(r)] for i in range(r)]
    if isinstance(zero, Fraction):
        return _det_fraction(M)
    if r == 1:
        return M[0][0]
    return float(np.linalg.det(np.array(M, dtype=np.float64)))


def schur_specialization(params: ThomaParams, lam: Sequence[int], exact: bool = False):
    """Specialized Schur function; equals the chance that an i.i.d. filling of lam is a tableau.

    Uses the h-determinant over rows or the e-determinant over columns,
    whichever is smaller.
    """
    lam = YoungDiagram(lam)
    if not lam:
        return Fraction(1) if exact else 1.0
    cols = lam.columns
    if len(lam) <= len(cols):
        val = jacobi_trudi(lam, h_values(params, lam[0] + len(lam), exact))
    else:
        val = jacobi_trudi(cols, e_values(params, cols[0] + len(cols), exact))
    if not exact and -NEG_CLIP <= val < 0:
        val = 0.0
    return val


def dim_hook(lam: Sequence[int]) -> int:
    """Number of standard tableaux by the hook-length formula."""
    lam = YoungDiagram(lam)
    cols = lam.columns
    hooks = 1
    for i, r in enumerate(lam):
        for j in range(r):
            hooks *= (r - j - 1) + (cols[j] - i - 1) + 1
    return math.factorial(lam.size) // hooks


@lru_cache(maxsize=None)
def dim_paths(lam: tuple) -> int:
    """Number of shortest paths from the one-box diagram, by recursion over removable boxes."""
    lam = YoungDiagram(lam)
    if lam.size <= 1:
        return 1
    return sum(dim_paths(tuple(mu)) for mu in lam.removable())


def partitions(n: int) -> Iterator[YoungDiagram]:
    """All partitions of n in reverse-lexicographic order."""
    if n == 0:
        yield YoungDiagram()
        return
    a = [n]
    while True:
        yield YoungDiagram(a)
        # find rightmost part > 1
        k = len(a) - 1
        while k >= 0 and a[k] == 1:
            k -= 1
        if k < 0:
            return
        rem = len(a) - k  # ones after a[k] plus the unit taken from a[k]
        v = a[k] - 1
        a = a[:k] + [v]
        while rem > v:
            a.append(v)
            rem -= v
        if rem:
            a.append(rem)


# --------------------------------------------------------------------------
# Measures
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ExactMeasure:
    n: int
    table: dict

    @property
    def total(self) -> float:
        return math.fsum(self.table.values())

    def __getitem__(self, lam) -> float:
        return self.table.get(YoungDiagram(lam), 0.0)

    def to_csv(self) -> str:
        """Rows "parts;probability" over the support (diagrams of probability 0 are left out)."""
        return "".join(f"{lam.to_csv_key()};{format(float(p), '.15g')}\n" for lam, p in self.table.items() if p != 0)

    @classmethod
    def from_csv(cls, text: str) -> ExactMeasure:
        table = {}
        for line in text.strip().splitlines():
            key, p = line.split(";")
            lam = YoungDiagram(int(v) for v in key.split(",") if v)
            table[lam] = float(p)
        n = next(iter(table)).size if table else 0
        return cls(n, table)


def measure_Mn(params: ThomaParams, n: int, cap: int = EXACT_CAP, exact: bool = False) -> ExactMeasure:
    """Exact law of the RSK shape of an n-letter random word."""
    if n < 0 or n > cap:
        raise ValueError(f"n={n} outside exact range [0, {cap}]")
    table = {}
    for lam in partitions(n):
        p = schur_specialization(params, lam, exact) * dim_hook(lam)
        if not exact:
            if p < -NEG_CLIP * max(1, dim_hook(lam)):
                raise ArithmeticError(f"negative probability {p} at {lam}")
            p = max(p, 0.0)
        table[lam] = p
    return ExactMeasure(n, table)


def coherency_residual(params: ThomaParams, n: int, cap: int = EXACT_CAP, exact: bool = False):
    """max over mu in Y_n of |M_n(mu) - sum_{mu -> lam} dim mu / dim lam * M_{n+1}(lam)|."""
    lower = measure_Mn(params, n, cap, exact)
    upper = measure_Mn(params, n + 1, cap, exact)
    worst = 0
    for mu, p in lower.table.items():
        dmu = dim_hook(mu)
        terms = [Fraction(dmu, dim_hook(lam)) * upper.table[lam] if exact else dmu / dim_hook(lam) * upper.table[lam] for lam in mu.addable()]
        down = sum(terms) if exact else math.fsum(terms)
        worst = max(worst, abs(p - down))
    return worst


def poisson_weight(params: ThomaParams, nu: float, lam: Sequence[int], cap: int = EXACT_CAP) -> float:
    """Poissonized mass exp(-nu) nu^|lam| / |lam|! * M_|lam|(lam)."""
    lam = YoungDiagram(lam)
    k = lam.size
    if k > cap:
        raise ValueError(f"|lambda|={k} above cap {cap}")
    if nu <= 0:
        raise ValueError("nu must be positive")
    size_weight = math.exp(-nu + k * math.log(nu) - math.lgamma(k + 1))
    return size_weight * max(float(schur_specialization(params, lam)) * dim_hook(lam), 0.0)


def poisson_truncation(nu: float, N: int) -> float:
    """Mass of sizes above N: exp(-nu) sum_{k>N} nu^k / k!."""
    return float(stats.poisson.sf(N, nu))


# --------------------------------------------------------------------------
# Tableau counting
# --------------------------------------------------------------------------


def _type_letters(ttype: TableauType, order: LinearOrder) -> list:
    """Distinct letters with multiplicities; G letters are m distinct points in increasing order."""
    out = [(RowLetter(i + 1), c) for i, c in enumerate(ttype.rows) if c]
    out += [(ColLetter(j + 1), c) for j, c in enumerate(ttype.cols) if c]
    m = ttype.cont
    out += [(ContLetter((k + 0.5) / m), 1) for k in range(m)]
    return out


def count_ap_tableaux(shape: Sequence[int], ttype: TableauType, order: LinearOrder, cap: int = TABLEAU_CAP) -> int:
    """Number of tableau fillings of ``shape`` using exactly the letters of ``ttype``."""
    shape = YoungDiagram(shape)
    if ttype.total != shape.size:
        raise ValueError("type does not fill the shape")
    if shape.size > cap:
        raise ValueError(f"shape size {shape.size} above cap {cap}")
    letters = _type_letters(ttype, order)
    for a, _ in letters:
        if not order.has(a):
            raise ValueError(f"{a} not in the order")
    counts = [c for _, c in letters]
    cells = [(i, j) for i, r in enumerate(shape) for j in range(r)]
    grid: dict = {}

    def fill(pos: int) -> int:
        if pos == len(cells):
            return 1
        i, j = cells[pos]
        total = 0
        for idx, (a, _) in enumerate(letters):
            if not counts[idx]:
                continue
            if j > 0 and not ups(order, grid[(i, j - 1)], a):
                continue
            if i > 0 and compare_arrows(order, a, grid[(i - 1, j)]) is not Arrow.DOWN:
                continue
            counts[idx] -= 1
            grid[(i, j)] = a
            total += fill(pos + 1)
            counts[idx] += 1
        return total

    return fill(0)


def type_probability(params: ThomaParams, shape: Sequence[int], ttype: TableauType, order: LinearOrder) -> float:
    """dim(shape) * d / m! * prod alpha^n_i * prod beta^n'_j."""
    shape = YoungDiagram(shape)
    d = count_ap_tableaux(shape, ttype, order)
    w = math.prod(params.alphas[i] ** c for i, c in enumerate(ttype.rows))
    w *= math.prod(params.betas[j] ** c for j, c in enumerate(ttype.cols))
    w *= params.gamma**ttype.cont / math.factorial(ttype.cont)
    return dim_hook(shape) * d * w


# --------------------------------------------------------------------------
# Exhaustive word enumeration
# --------------------------------------------------------------------------


def enumerate_words(params: ThomaParams, n: int) -> Iterator[tuple[tuple, float]]:
    """Every word of length n with its probability.

    G letters are integrated out: only the relative order of the m points
    matters, and each of the m! orders carries weight gamma^m / m!.
    """
    symbols = [(RowLetter(i + 1), a) for i, a in enumerate(params.alphas)]
    symbols += [(ColLetter(j + 1), b) for j, b in enumerate(params.betas)]
    if params.gamma > 0:
        symbols.append((None, params.gamma))
    for pattern in itertools.product(range(len(symbols)), repeat=n):
        gpos = [t for t, s in enumerate(pattern) if symbols[s][0] is None]
        m = len(gpos)
        base = math.prod(symbols[s][1] for s in pattern) / math.factorial(m)
        if m == 0:
            yield tuple(symbols[s][0] for s in pattern), base
            continue
        for ranks in itertools.permutations(range(m)):
            word = [symbols[s][0] for s in pattern]
            for t, r in zip(gpos, ranks):
                word[t] = ContLetter((r + 0.5) / m)
            yield tuple(word), base


def enumerated_measure(params: ThomaParams, n: int, order: LinearOrder) -> dict:
    """Law of the RSK shape by summing over all words."""
    acc = defaultdict(list)
    for word, w in enumerate_words(params, n):
        acc[rsk(word, order).shape].append(w)
    return {lam: math.fsum(ws) for lam, ws in acc.items()}


def enumerated_joint(params: ThomaParams, n: int, order: LinearOrder) -> dict:
    """Joint law of (shape, type of the insertion tableau) by summing over all words."""
    acc = defaultdict(list)
    for word, w in enumerate_words(params, n):
        out = rsk(word, order)
        acc[(out.shape, tableau_type(out.R).trimmed())].append(w)
    return {key: math.fsum(ws) for key, ws in acc.items()}


def max_table_gap(a: dict, b: dict) -> float:
    keys = set(a) | set(b)
    return max((abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys), default=0.0)
