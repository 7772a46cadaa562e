"""Generalized RSK insertion on ordered alphabets with L_e / L_o / G letters.

Rows are kept as parallel lists of letters and numeric keys so each row
step is a single bisection. A letter in L_e bumps the leftmost strictly
larger entry; letters in L_o and points of G also bump an equal entry.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .core import (
    ContLetter,
    InsertionTableau,
    Letter,
    LinearOrder,
    StandardTableau,
    YoungDiagram,
    shape_of,
    ups,
)

GREENE_CAP = 10


@dataclass(frozen=True)
class RskOutput:
    R: InsertionTableau
    S: StandardTableau

    @property
    def shape(self) -> YoungDiagram:
        return self.R.shape


class _Builder:
    """Mutable tableau under construction."""

    def __init__(self, order: LinearOrder, rows: Sequence[Sequence[Letter]] = ()):
        self.order = order
        self.rows = [list(r) for r in rows]
        self.keys = [[order.key(a) for a in r] for r in rows]

    def insert(self, x: Letter, on_bump: Callable[[int, Letter], None] | None = None) -> int:
        """Row-insert x and return the index of the row that grew."""
        order = self.order
        k = order.key(x)
        i = 0
        while True:
            if i == len(self.rows):
                self.rows.append([x])
                self.keys.append([k])
                return i
            keys = self.keys[i]
            j = bisect_right(keys, k) if order.is_weak(x) else bisect_left(keys, k)
            if j == len(keys):
                self.rows[i].append(x)
                keys.append(k)
                return i
            bumped = self.rows[i][j]
            self.rows[i][j] = x
            keys[j] = k
            if on_bump is not None:
                on_bump(i, bumped)
            x, k = bumped, order.key(bumped)
            i += 1

    def pop_corner(self, i: int) -> Letter:
        """Reverse-bump the last entry of row i up to the top; return the ejected letter."""
        order = self.order
        x = self.rows[i].pop()
        self.keys[i].pop()
        if not self.rows[i]:
            self.rows.pop()
            self.keys.pop()
        k = order.key(x)
        for r in range(i - 1, -1, -1):
            keys = self.keys[r]
            # rightmost y with x ↘ y
            j = (bisect_left(keys, k) if order.is_weak(x) else bisect_right(keys, k)) - 1
            if j < 0:
                raise ValueError("pair is not in the image of RSK")
            y = self.rows[r][j]
            self.rows[r][j] = x
            keys[j] = k
            x, k = y, order.key(y)
        return x

    def freeze(self) -> InsertionTableau:
        return InsertionTableau(tuple(tuple(r) for r in self.rows))


def row_insert(T: InsertionTableau, x: Letter, order: LinearOrder) -> InsertionTableau:
    """Return x → T."""
    b = _Builder(order, T.rows)
    b.insert(x)
    return b.freeze()


def rsk(word: Iterable[Letter], order: LinearOrder, check: bool = False) -> RskOutput:
    """Insert the letters left to right; S records the step at which each box appeared.

    With ``check`` set, every intermediate tableau is validated (slow).
    """
    b = _Builder(order)
    srows: list[list[int]] = []
    for step, x in enumerate(word, start=1):
        i = b.insert(x)
        if i == len(srows):
            srows.append([])
        srows[i].append(step)
        if check and not b.freeze().is_valid(order):
            raise AssertionError(f"invalid tableau after step {step}")
    return RskOutput(b.freeze(), StandardTableau(tuple(tuple(r) for r in srows)))


def rsk_shape(word: Iterable[Letter], order: LinearOrder) -> YoungDiagram:
    b = _Builder(order)
    for x in word:
        b.insert(x)
    return shape_of(b.rows)


def rsk_bijection_inverse(R: InsertionTableau, S: StandardTableau, order: LinearOrder) -> tuple:
    """Recover the word from its (R, S) pair."""
    if R.shape != S.shape:
        raise ValueError(f"shapes differ: {R.shape} vs {S.shape}")
    if not R.is_valid(order):
        raise ValueError("R is not a tableau for this order")
    if not S.is_valid():
        raise ValueError("S is not a standard tableau")
    n = R.shape.size
    where = {v: i for i, row in enumerate(S.rows) for v in row}
    b = _Builder(order, R.rows)
    out = []
    for step in range(n, 0, -1):
        i = where[step]
        out.append(b.pop_corner(i))
    return tuple(reversed(out))


def transposed_rsk(word: Iterable[Letter], order: LinearOrder) -> RskOutput:
    """RSK under the inverse order with L_e and L_o exchanged."""
    return rsk(word, order.transposed())


# --------------------------------------------------------------------------
# Greene invariants by exhaustive search
# --------------------------------------------------------------------------


def _greene(word: Sequence[Letter], k: int, related: Callable[[Letter, Letter], bool]) -> int:
    """Exhaustive search over assignments of each letter to one of k chains or to none.

    A chain only remembers its last letter, so partial assignments collapse
    to states (multiset of chain tails) -> best count so far.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if len(word) > GREENE_CAP:
        raise ValueError(f"brute-force Greene search is capped at {GREENE_CAP} letters")
    letters = sorted(set(word), key=repr)
    idx = {a: i for i, a in enumerate(letters)}
    ok = [[related(a, b) for b in letters] for a in letters]
    states = {(-1,) * min(k, len(word)): 0}
    for a in word:
        x = idx[a]
        new: dict = {}
        for tails, v in states.items():
            if new.get(tails, -1) < v:
                new[tails] = v
            for c, last in enumerate(tails):
                if c and tails[c - 1] == last:
                    continue
                if last == -1 or ok[last][x]:
                    t2 = tuple(sorted(tails[:c] + (x,) + tails[c + 1 :]))
                    if new.get(t2, -1) < v + 1:
                        new[t2] = v + 1
        states = new
    return max(states.values())


def greene_rk(word: Sequence[Letter], order: LinearOrder, k: int) -> int:
    """Largest union of k disjoint ↗-increasing subsequences."""
    return _greene(tuple(word), k, lambda a, b: ups(order, a, b))


def greene_ck(word: Sequence[Letter], order: LinearOrder, k: int) -> int:
    """Largest union of k disjoint ↘-decreasing subsequences."""
    return _greene(tuple(word), k, lambda a, b: not ups(order, a, b))


def distinct_cont(word: Iterable[Letter]) -> bool:
    vals = [a.value for a in word if isinstance(a, ContLetter)]
    return len(vals) == len(set(vals))
