"""Random words under the product measure, poissonization, and amalgamation.

Words are sampled in an encoded form shared by the Python and compiled
paths: an integer code per letter (0..A-1 for x_1..x_A, A..A+B-1 for
y_1..y_B, -1 for a point of G) plus the G value. Every trial owns an
independent stream keyed by (master seed, experiment, trial index), so
results never depend on how trials are split across workers.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import (
    G,
    ColLetter,
    ContLetter,
    Letter,
    LinearOrder,
    RowLetter,
    ThomaParams,
    format_word,
    parse_word,
    validate_params,
)

PAD = -2  # code for padding beyond a word's length
_ONE_MINUS = math.nextafter(1.0, 0.0)

__all__ = [
    "SeededGenerator",
    "sample_word",
    "sample_word_poisson",
    "sample_codes",
    "encode_keys",
    "decode_word",
    "encode_word",
    "AmalgamationSpec",
    "Amalgamation",
    "amalgamate",
    "amalgamate_word",
    "ReductionPlan",
    "reduction_plan",
    "map_chunks",
    "format_word",
    "parse_word",
]


# --------------------------------------------------------------------------
# Streams
# --------------------------------------------------------------------------


def _experiment_key(experiment: str) -> int:
    digest = hashlib.blake2b(experiment.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class SeededGenerator:
    """Master seed from which per-(experiment, trial) generators are derived."""

    seed: int

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")

    def stream(self, experiment: str, trial: int) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(_experiment_key(experiment), int(trial)))
        return np.random.Generator(np.random.PCG64(ss))


# --------------------------------------------------------------------------
# Encoded sampling
# --------------------------------------------------------------------------


def codes_from_uniforms(params: ThomaParams, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inverse transform over (alphas, betas, G); one uniform gives the letter and its G value."""
    masses = np.asarray(params.masses, dtype=np.float64)
    ndisc = len(masses)
    u = np.asarray(u, dtype=np.float64)
    if ndisc == 0:
        return np.full(u.shape, -1, dtype=np.int32), u.copy()
    cum = np.cumsum(masses)
    idx = np.searchsorted(cum, u, side="right")
    gvals = np.zeros(u.shape, dtype=np.float64)
    if params.gamma == 0:
        idx = np.minimum(idx, ndisc - 1)
        return idx.astype(np.int32), gvals
    is_g = idx >= ndisc
    codes = np.where(is_g, -1, idx).astype(np.int32)
    start = cum[-1]
    gv = np.clip((u - start) / params.gamma, 0.0, _ONE_MINUS)
    gvals[is_g] = gv[is_g]
    return codes, gvals


def _draw_one(params: ThomaParams, rng: np.random.Generator, n: int | None, nu: float | None):
    if nu is not None:
        n = int(rng.poisson(nu))
    return codes_from_uniforms(params, rng.random(n))


def sample_codes(
    params: ThomaParams,
    gen: SeededGenerator,
    experiment: str,
    trials: Iterable[int],
    n: int | None = None,
    nu: float | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Padded (codes, gvals, lengths) for a run of trials; exactly one of n / nu is given."""
    if (n is None) == (nu is None):
        raise ValueError("give exactly one of n and nu")
    draws = [_draw_one(params, gen.stream(experiment, t), n, nu) for t in trials]
    lengths = np.array([len(c) for c, _ in draws], dtype=np.int64)
    width = int(lengths.max()) if len(draws) else 0
    codes = np.full((len(draws), width), PAD, dtype=np.int32)
    gvals = np.zeros((len(draws), width), dtype=np.float64)
    for s, (c, g) in enumerate(draws):
        codes[s, : len(c)] = c
        gvals[s, : len(g)] = g
    return codes, gvals, lengths


def code_letters(params: ThomaParams) -> list[Letter]:
    return [RowLetter(i + 1) for i in range(len(params.alphas))] + [
        ColLetter(j + 1) for j in range(len(params.betas))
    ]


def decode_word(params: ThomaParams, codes: Sequence[int], gvals: Sequence[float]) -> tuple:
    letters = code_letters(params)
    out = []
    for c, g in zip(codes, gvals):
        if c == PAD:
            break
        out.append(ContLetter(float(g)) if c == -1 else letters[c])
    return tuple(out)


def encode_word(params: ThomaParams, word: Iterable[Letter]) -> tuple[np.ndarray, np.ndarray]:
    A = len(params.alphas)
    codes, gvals = [], []
    for a in word:
        if isinstance(a, RowLetter):
            codes.append(a.index - 1)
            gvals.append(0.0)
        elif isinstance(a, ColLetter):
            codes.append(A + a.index - 1)
            gvals.append(0.0)
        else:
            codes.append(-1)
            gvals.append(a.value)
    return np.array(codes, dtype=np.int32), np.array(gvals, dtype=np.float64)


def encode_keys(params: ThomaParams, order: LinearOrder, codes: np.ndarray, gvals: np.ndarray) -> np.ndarray:
    """Sort keys matching ``LinearOrder.key`` for an encoded batch (padding maps to +inf)."""
    order.check_params(params)
    table = np.array([order.key(a) for a in code_letters(params)] + [np.inf], dtype=np.float64)
    # index -1 (G) is patched below; PAD (-2) lands on the +inf sentinel via the shifted index
    idx = np.where(codes == PAD, len(table) - 1, np.maximum(codes, 0))
    keys = table[idx] if len(table) > 1 else np.full(codes.shape, np.inf)
    is_g = codes == -1
    if is_g.any():
        keys = np.where(is_g, -gvals if order.g_reversed else gvals, keys)
    return keys


def sample_word(params: ThomaParams, n: int, gen: SeededGenerator, experiment: str = "word", trial: int = 0) -> tuple:
    """n i.i.d. letters from the one-letter measure."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    codes, gvals = _draw_one(params, gen.stream(experiment, trial), n, None)
    return decode_word(params, codes, gvals)


def sample_word_poisson(params: ThomaParams, nu: float, gen: SeededGenerator, experiment: str = "word", trial: int = 0) -> tuple:
    """A word of Poisson(nu) length with i.i.d. letters."""
    if nu <= 0:
        raise ValueError("nu must be positive")
    codes, gvals = _draw_one(params, gen.stream(experiment, trial), None, nu)
    return decode_word(params, codes, gvals)


# --------------------------------------------------------------------------
# Amalgamation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AmalgamationSpec:
    """Segments first..last (inclusive, positions in the reference order) shrink to one L_e letter.

    When G lies in the range, ``g_cut = (u, v)`` restricts the merged part
    of G to values in [u, v); None means all of G.
    """

    first: int
    last: int
    g_cut: tuple[float, float] | None = None

    @classmethod
    def of_letters(cls, order: LinearOrder, letters: Iterable, g_cut=None) -> AmalgamationSpec:
        pos = sorted(order.position(a) for a in letters)
        if not pos:
            raise ValueError("empty interval")
        if pos != list(range(pos[0], pos[-1] + 1)):
            raise ValueError("letters do not form an interval of the order")
        return cls(pos[0], pos[-1], g_cut)


@dataclass(frozen=True)
class Amalgamation:
    """Result of shrinking an interval: new alphabet, order, and the letterwise map."""

    source: ThomaParams
    params: ThomaParams
    order: LinearOrder
    letter_map: dict = field(hash=False)
    new_letter: RowLetter
    g_cut: tuple[float, float] | None  # merged part of G, in old values; None when G untouched

    def map_letter(self, a: Letter) -> Letter:
        if isinstance(a, ContLetter):
            if self.g_cut is None:
                return a
            u, v = self.g_cut
            if u <= a.value < v:
                return self.new_letter
            width = v - u
            shifted = a.value - width if a.value >= v else a.value
            return ContLetter(min(shifted / (1.0 - width), _ONE_MINUS))
        return self.letter_map[a]

    def code_map(self) -> np.ndarray:
        new_codes = {a: i for i, a in enumerate(code_letters(self.params))}
        return np.array([new_codes[self.letter_map[a]] for a in code_letters(self.source)], dtype=np.int32)

    def map_codes(self, codes: np.ndarray, gvals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        cmap = self.code_map()
        out = codes.copy()
        disc = codes >= 0
        if len(cmap):
            out[disc] = cmap[codes[disc]]
        gout = gvals.copy()
        if self.g_cut is not None:
            u, v = self.g_cut
            is_g = codes == -1
            inside = is_g & (gvals >= u) & (gvals < v)
            z = code_letters(self.params).index(self.new_letter)
            out[inside] = z
            gout[inside] = 0.0
            rest = is_g & ~inside
            width = v - u
            shifted = np.where(gvals >= v, gvals - width, gvals)
            gout[rest] = np.minimum(shifted[rest] / (1.0 - width), _ONE_MINUS) if width < 1 else 0.0
        return out, gout


def amalgamate(params: ThomaParams, order: LinearOrder, spec: AmalgamationSpec) -> Amalgamation:
    order.check_params(params)
    segs = list(order.segments)
    if not 0 <= spec.first <= spec.last < len(segs):
        raise ValueError("interval outside the order")
    chosen = segs[spec.first : spec.last + 1]
    merged_g = None  # (u, v) of G values merged
    g_keep_before = g_keep_after = False
    if G in chosen:
        u, v = spec.g_cut if spec.g_cut is not None else (0.0, 1.0)
        if not 0.0 <= u < v <= 1.0:
            raise ValueError(f"bad cut of G: {spec.g_cut}")
        whole = u == 0.0 and v == 1.0
        if not whole:
            # In order terms, "low" values of G come first unless G is reversed.
            rev = order.g_reversed
            low_part = (v == 1.0) if rev else (u == 0.0)  # merged part is the order-lower end of G
            high_part = (u == 0.0) if rev else (v == 1.0)
            gi = chosen.index(G)
            at_first, at_last = gi == 0, gi == len(chosen) - 1
            if len(chosen) == 1:
                if not (u == 0.0 or v == 1.0):
                    raise ValueError("cut would split G into two pieces")
                g_keep_after = low_part
                g_keep_before = not low_part
            elif at_first and not at_last and high_part:
                g_keep_before = True
            elif at_last and not at_first and low_part:
                g_keep_after = True
            else:
                raise ValueError("partial G must sit at the end of the interval adjacent to the rest")
        merged_g = (u, v)
    elif spec.g_cut is not None:
        raise ValueError("g_cut given but G is not in the interval")

    discrete_in = [a for a in chosen if a is not G]
    mass = sum(params.alphas[a.index - 1] if isinstance(a, RowLetter) else params.betas[a.index - 1] for a in discrete_in)
    gamma = params.gamma
    if merged_g is not None:
        width = merged_g[1] - merged_g[0]
        mass += params.gamma * width
        gamma = params.gamma * (1.0 - width)

    # New alphabet: surviving letters keep their relative order; z is appended to the alphas
    # (stable sort puts it after equal existing masses).
    old_alpha = [(params.alphas[i], RowLetter(i + 1)) for i in range(len(params.alphas)) if RowLetter(i + 1) not in discrete_in]
    old_beta = [(params.betas[j], ColLetter(j + 1)) for j in range(len(params.betas)) if ColLetter(j + 1) not in discrete_in]
    tagged = old_alpha + [(mass, "z")]
    tagged_sorted = sorted(tagged, key=lambda t: -t[0])
    letter_map: dict = {}
    new_letter = None
    for i, (m, old) in enumerate(tagged_sorted, start=1):
        if old == "z":
            new_letter = RowLetter(i)
        else:
            letter_map[old] = RowLetter(i)
    for j, (m, old) in enumerate(old_beta, start=1):
        letter_map[old] = ColLetter(j)
    for a in discrete_in:
        letter_map[a] = new_letter
    new_params = validate_params([m for m, _ in tagged_sorted], [m for m, _ in old_beta], gamma if gamma > 0 else 0.0)

    mid = ([G] if g_keep_before else []) + [new_letter] + ([G] if g_keep_after else [])
    new_segs = [letter_map[a] if a is not G else G for a in segs[: spec.first]] + mid
    new_segs += [letter_map[a] if a is not G else G for a in segs[spec.last + 1 :]]
    if new_params.gamma == 0:
        new_segs = [s for s in new_segs if s is not G]
    weak = frozenset(letter_map[a] for a in order.weak if a not in discrete_in) | {new_letter}
    new_order = LinearOrder(tuple(new_segs), weak, order.g_reversed)
    return Amalgamation(params, new_params, new_order, letter_map, new_letter, merged_g)


def amalgamate_word(word: Iterable[Letter], mapping: Amalgamation) -> tuple:
    return tuple(mapping.map_letter(a) for a in word)


# --------------------------------------------------------------------------
# Reduction to finitely many distinct parameters
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionPlan:
    steps: tuple  # tuple[Amalgamation, ...], each relative to the previous step's alphabet
    params: ThomaParams
    order: LinearOrder
    l: int | None = None
    l2: int | None = None
    m: int | None = None
    deltas: tuple = ()

    def map_codes(self, codes: np.ndarray, gvals: np.ndarray):
        for step in self.steps:
            codes, gvals = step.map_codes(codes, gvals)
        return codes, gvals

    def map_word(self, word):
        for step in self.steps:
            word = amalgamate_word(word, step)
        return word


def _alpha_tail_cut(alphas: Sequence[float], K: int) -> int:
    """Smallest l with sum_{i>l} alpha_i < alpha_K and that sum different from every alpha_r."""
    for l in range(K, len(alphas) + 1):
        tail = math.fsum(alphas[l:])
        if tail < alphas[K - 1] and all(tail != a for a in alphas):
            return l
    raise AssertionError("unreachable: the empty tail always qualifies")


def split_tail_search(alphas: Sequence[float], K: int, bound: int = 200) -> tuple[int, int]:
    """Search (l1, m1) for the split used when no tail cut qualifies.

    Conditions: sum_{i>l1} alpha_i equals some alpha_r < alpha_K with r <= l1;
    alpha_r > sum of alpha_{l1+1..l1+m1} > alpha_{r+1}; and
    sum_{i>l1+m1} alpha_i < alpha_{l1}. Raises LookupError past ``bound``.
    """
    n = len(alphas)
    for l1 in range(1, min(n, bound) + 1):
        tail = math.fsum(alphas[l1:])
        rs = [r for r in range(1, l1 + 1) if alphas[r - 1] == tail and tail < alphas[K - 1]]
        if not rs:
            continue
        r = rs[0]
        nxt = alphas[r] if r < n else 0.0
        for m1 in range(1, min(n - l1, bound) + 1):
            head = math.fsum(alphas[l1 : l1 + m1])
            rest = math.fsum(alphas[l1 + m1 :])
            if alphas[r - 1] > head > nxt and rest < alphas[l1 - 1]:
                return l1, m1
    raise LookupError(f"no (l1, m1) found within search bound {bound}")


def g_slices(gamma: float, ceiling: float) -> tuple[int, tuple[float, ...]]:
    """Smallest m and offsets d_1 > ... > d_m summing to 0 with gamma/m + d_1 < ceiling and gamma/m + d_m > 0."""
    if gamma <= 0:
        return 0, ()
    m = max(1, math.floor(gamma / ceiling) + 1)
    while gamma / m >= ceiling:
        m += 1
    if m == 1:
        return 1, (0.0,)
    base = gamma / m
    step = min(ceiling - base, base) / (m - 1)
    deltas = tuple(step * ((m - 1) / 2 - k) for k in range(m))
    return m, deltas


def reduction_plan(params: ThomaParams, K: int, order: LinearOrder | None = None) -> ReductionPlan:
    """Amalgamations giving finitely many distinct parameters with the K largest alphas kept.

    Steps, applied under the order x_1 < ... < y_1 < ... < G: merge the alpha tail beyond the
    smallest admissible cut l; merge the beta tail beyond the smallest l2 whose tail mass is
    below the smallest alpha; slice G into m pieces of decreasing mass below every alpha.
    """
    if not 1 <= K <= len(params.alphas):
        raise ValueError("need 1 <= K <= number of alphas")
    if not params.is_strict(K, 0):
        raise ValueError("alphas must be strictly decreasing through K")
    order = order or LinearOrder.p1(params)
    steps = []
    cur_p, cur_o = params, order

    l = _alpha_tail_cut(params.alphas, K)
    if l < len(params.alphas):
        spec = AmalgamationSpec.of_letters(cur_o, [RowLetter(i) for i in range(l + 1, len(params.alphas) + 1)])
        step = amalgamate(cur_p, cur_o, spec)
        steps.append(step)
        cur_p, cur_o = step.params, step.order

    alpha_R = min(cur_p.alphas)
    l2 = None
    B = len(cur_p.betas)
    for cand in range(0, B + 1):
        if math.fsum(cur_p.betas[cand:]) < alpha_R:
            l2 = cand
            break
    if l2 is not None and l2 < B:
        spec = AmalgamationSpec.of_letters(cur_o, [ColLetter(j) for j in range(l2 + 1, B + 1)])
        step = amalgamate(cur_p, cur_o, spec)
        steps.append(step)
        cur_p, cur_o = step.params, step.order

    m, deltas = g_slices(cur_p.gamma, min(cur_p.alphas))
    if m:
        gamma = cur_p.gamma
        remaining = gamma
        for k, d in enumerate(deltas):
            piece = gamma / m + d
            if k == m - 1:
                cut = (0.0, 1.0)
            else:
                frac = piece / remaining
                cut = (1.0 - frac, 1.0) if cur_o.g_reversed else (0.0, frac)
            gpos = cur_o.position(G)
            spec = AmalgamationSpec(gpos, gpos, cut)
            step = amalgamate(cur_p, cur_o, spec)
            steps.append(step)
            cur_p, cur_o = step.params, step.order
            remaining -= piece
    return ReductionPlan(tuple(steps), cur_p, cur_o, l, l2, m, deltas)


# --------------------------------------------------------------------------
# Trial fan-out
# --------------------------------------------------------------------------


def default_workers() -> int:
    return os.cpu_count() or 1


def chunk_bounds(total: int, chunk: int) -> list[tuple[int, int]]:
    return [(s, min(s + chunk, total)) for s in range(0, total, chunk)]


def map_chunks(fn: Callable[[int, int], object], total: int, chunk: int, workers: int = 1) -> list:
    """Apply fn(start, stop) over fixed trial chunks; results come back in trial order.

    Chunk boundaries depend only on ``chunk``, and each trial draws from its own
    stream, so the concatenated output is identical for any worker count.
    """
    bounds = chunk_bounds(total, chunk)
    if workers <= 1 or len(bounds) <= 1:
        return [fn(a, b) for a, b in bounds]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_call, [partial(fn, a, b) for a, b in bounds]))


def _call(f):
    return f()
