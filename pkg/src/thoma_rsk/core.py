"""Domain types: Thoma parameters, letters, linear orders, diagrams, tableaux."""

from __future__ import annotations

import enum
import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

MASS_TOL = 1e-12


# --------------------------------------------------------------------------
# Thoma parameters
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ThomaParams:
    """A point (alphas, betas, gamma) of the Thoma simplex with finitely many nonzero entries.

    Build instances through :func:`validate_params` (or :meth:`from_json`);
    zero masses are stripped, so every stored index carries positive mass.
    """

    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    gamma: float

    @property
    def strictly_monotone(self) -> bool:
        return _pairwise_distinct(self.alphas) and _pairwise_distinct(self.betas)

    def is_strict(self, K: int, L: int) -> bool:
        """True when alpha_1 > ... > alpha_K > 0 and beta_1 > ... > beta_L > 0."""
        if K > len(self.alphas) or L > len(self.betas):
            return False
        head_a = self.alphas[: K + 1] if K < len(self.alphas) else self.alphas
        head_b = self.betas[: L + 1] if L < len(self.betas) else self.betas
        # alpha_K must also differ from alpha_{K+1}; otherwise row K is a tied block.
        return _pairwise_distinct(head_a) and _pairwise_distinct(head_b)

    def transposed(self) -> ThomaParams:
        return ThomaParams(self.betas, self.alphas, self.gamma)

    @property
    def masses(self) -> tuple[float, ...]:
        """Discrete masses in code order: x_1..x_A then y_1..y_B."""
        return self.alphas + self.betas

    def to_dict(self) -> dict:
        return {"alphas": list(self.alphas), "betas": list(self.betas), "gamma": self.gamma}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> ThomaParams:
        return validate_params(data.get("alphas", ()), data.get("betas", ()), data.get("gamma", 0.0))

    @classmethod
    def from_json(cls, text: str) -> ThomaParams:
        return cls.from_dict(json.loads(text))


def _pairwise_distinct(values: Sequence[float]) -> bool:
    return all(values[i] != values[i + 1] for i in range(len(values) - 1))


def validate_params(alphas: Iterable[float] = (), betas: Iterable[float] = (), gamma: float = 0.0) -> ThomaParams:
    alphas = [float(a) for a in alphas]
    betas = [float(b) for b in betas]
    gamma = float(gamma)
    for name, seq in (("alphas", alphas), ("betas", betas)):
        if any(not math.isfinite(v) or v < 0 for v in seq):
            raise ValueError(f"{name} must be finite and nonnegative: {seq}")
        if any(seq[i] < seq[i + 1] for i in range(len(seq) - 1)):
            raise ValueError(f"{name} must be weakly decreasing: {seq}")
    if not math.isfinite(gamma) or gamma < 0:
        raise ValueError(f"gamma must be finite and nonnegative: {gamma}")
    total = math.fsum(alphas) + math.fsum(betas) + gamma
    if abs(total - 1.0) > MASS_TOL:
        raise ValueError(f"Thoma parameters must sum to 1, got {total!r}")
    if any(v > 1 for v in alphas + betas) or gamma > 1:
        raise ValueError("masses cannot exceed 1")
    return ThomaParams(
        tuple(a for a in alphas if a > 0),
        tuple(b for b in betas if b > 0),
        gamma,
    )


# --------------------------------------------------------------------------
# Letters and words
# --------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class RowLetter:
    """x_i, a discrete letter whose mass is alpha_i."""

    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("letter indices start at 1")

    def __str__(self) -> str:
        return f"x{self.index}"


@dataclass(frozen=True, order=True)
class ColLetter:
    """y_j, a discrete letter whose mass is beta_j."""

    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("letter indices start at 1")

    def __str__(self) -> str:
        return f"y{self.index}"


@dataclass(frozen=True, order=True)
class ContLetter:
    """A point of the continuous part G, identified with [0, 1)."""

    value: float

    def __post_init__(self):
        if not 0.0 <= self.value < 1.0:
            raise ValueError(f"continuous letters live in [0, 1), got {self.value}")

    def __str__(self) -> str:
        return "g" + format(self.value, ".17g")


Letter = Union[RowLetter, ColLetter, ContLetter]
Word = tuple  # tuple[Letter, ...]


class _GSegment:
    """Sentinel for the continuous block inside a linear order."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "G"

    def __reduce__(self):
        return (_GSegment, ())


G = _GSegment()


def parse_letter(token: str) -> Letter:
    token = token.strip()
    if token.startswith("x"):
        return RowLetter(int(token[1:]))
    if token.startswith("y"):
        return ColLetter(int(token[1:]))
    if token.startswith("g"):
        return ContLetter(float(token[1:]))
    raise ValueError(f"cannot parse letter {token!r}")


def parse_word(text: str) -> Word:
    return tuple(parse_letter(t) for t in text.split())


def format_word(word: Iterable[Letter]) -> str:
    return " ".join(str(a) for a in word)


def check_letter(letter: Letter, params: ThomaParams) -> None:
    if isinstance(letter, RowLetter):
        if letter.index > len(params.alphas):
            raise ValueError(f"{letter} not in alphabet with {len(params.alphas)} row letters")
    elif isinstance(letter, ColLetter):
        if letter.index > len(params.betas):
            raise ValueError(f"{letter} not in alphabet with {len(params.betas)} column letters")
    elif isinstance(letter, ContLetter):
        if params.gamma == 0:
            raise ValueError("continuous letter but gamma = 0")
    else:
        raise TypeError(f"not a letter: {letter!r}")


@dataclass(frozen=True)
class LetterCounts:
    rows: tuple[int, ...]  # N_{x_i}
    cols: tuple[int, ...]  # N_{y_j}
    cont: int  # m

    @property
    def total(self) -> int:
        return sum(self.rows) + sum(self.cols) + self.cont


def letter_counts(word: Iterable[Letter], params: ThomaParams) -> LetterCounts:
    rows = [0] * len(params.alphas)
    cols = [0] * len(params.betas)
    cont = 0
    for a in word:
        check_letter(a, params)
        if isinstance(a, RowLetter):
            rows[a.index - 1] += 1
        elif isinstance(a, ColLetter):
            cols[a.index - 1] += 1
        else:
            cont += 1
    return LetterCounts(tuple(rows), tuple(cols), cont)


# --------------------------------------------------------------------------
# Linear orders
# --------------------------------------------------------------------------


class Arrow(enum.Enum):
    UP = "↗"
    DOWN = "↘"


@dataclass(frozen=True)
class LinearOrder:
    """A total order on the alphabet with G as one contiguous segment.

    ``segments`` lists discrete letters (and at most one ``G``) from smallest
    to largest. ``weak`` is the set of discrete letters in L_e: those may
    repeat along a row. All other discrete letters are in L_o. When
    ``g_reversed`` is set, continuous letters are compared by decreasing value.
    """

    segments: tuple
    weak: frozenset
    g_reversed: bool = False

    def __post_init__(self):
        seen = set()
        for s in self.segments:
            if s is not G and not isinstance(s, (RowLetter, ColLetter)):
                raise TypeError(f"bad segment {s!r}")
            if s in seen:
                raise ValueError(f"segment {s} appears twice")
            seen.add(s)
        if not self.weak <= seen:
            raise ValueError("weak letters must appear in the order")
        if G in self.weak:
            raise ValueError("G never belongs to L_e")
        pos = {s: i for i, s in enumerate(self.segments)}
        object.__setattr__(self, "_pos", pos)

    # ---- constructors ----

    @classmethod
    def p1(cls, params: ThomaParams) -> LinearOrder:
        """x_1 < x_2 < ... < y_1 < y_2 < ... < G, with L_e = row letters."""
        xs = tuple(RowLetter(i + 1) for i in range(len(params.alphas)))
        ys = tuple(ColLetter(j + 1) for j in range(len(params.betas)))
        segs = xs + ys + ((G,) if params.gamma > 0 else ())
        return cls(segs, frozenset(xs))

    @classmethod
    def from_tokens(cls, tokens: Sequence[str], weak: Iterable[str] | None = None) -> LinearOrder:
        """Build from tokens like ``["x1", "y2", "G", "y1"]``; L_e defaults to the x letters."""
        segs = tuple(G if t.strip().upper() == "G" else parse_letter(t) for t in tokens)
        if weak is None:
            weak_set = frozenset(s for s in segs if isinstance(s, RowLetter))
        else:
            weak_set = frozenset(parse_letter(t) for t in weak)
        return cls(segs, weak_set)

    def transposed(self) -> LinearOrder:
        """The inverse order with L_e and L_o swapped."""
        discrete = frozenset(s for s in self.segments if s is not G)
        return LinearOrder(tuple(reversed(self.segments)), discrete - self.weak, not self.g_reversed)

    # ---- queries ----

    def position(self, segment) -> int:
        return self._pos[segment]

    def has(self, letter: Letter) -> bool:
        if isinstance(letter, ContLetter):
            return G in self._pos
        return letter in self._pos

    def is_weak(self, letter: Letter) -> bool:
        return letter in self.weak

    @property
    def slot_offset(self) -> int:
        """Position of G (or the number of segments when G is absent)."""
        return self._pos.get(G, len(self.segments))

    def key(self, letter: Letter) -> float:
        """Numeric sort key, exact for every letter.

        Discrete letters sit on even integers 2 * (position - slot_offset),
        so those before G are <= -2 and those after are >= 2; a point of G
        keeps its own value v (or -v when G is reversed) inside (-1, 1).
        """
        if isinstance(letter, ContLetter):
            return -letter.value if self.g_reversed else letter.value
        return float(2 * (self._pos[letter] - self.slot_offset))

    def weak_by_slot(self) -> list[bool]:
        """Per-segment L_e flag; a discrete key k belongs to segment k / 2 + slot_offset."""
        return [s in self.weak for s in self.segments]

    def covers(self, params: ThomaParams) -> bool:
        need = {RowLetter(i + 1) for i in range(len(params.alphas))}
        need |= {ColLetter(j + 1) for j in range(len(params.betas))}
        if params.gamma > 0:
            need.add(G)
        return need <= set(self.segments)

    def check_params(self, params: ThomaParams) -> None:
        if not self.covers(params):
            raise ValueError("order does not cover every letter of the alphabet")

    def tokens(self) -> list[str]:
        return ["G" if s is G else str(s) for s in self.segments]

    def to_dict(self) -> dict:
        return {
            "segments": self.tokens(),
            "weak": sorted(str(s) for s in self.weak),
            "g_reversed": self.g_reversed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> LinearOrder:
        order = cls.from_tokens(data["segments"], data.get("weak"))
        if data.get("g_reversed"):
            order = LinearOrder(order.segments, order.weak, True)
        return order


def compare_arrows(order: LinearOrder, a: Letter, b: Letter) -> Arrow:
    """a ↗ b iff a < b or a = b in L_e; otherwise a ↘ b."""
    ka, kb = order.key(a), order.key(b)
    if ka < kb:
        return Arrow.UP
    if ka > kb:
        return Arrow.DOWN
    # Equal keys: same discrete letter or the same point of G.
    return Arrow.UP if order.is_weak(a) else Arrow.DOWN


def ups(order: LinearOrder, a: Letter, b: Letter) -> bool:
    return compare_arrows(order, a, b) is Arrow.UP


# --------------------------------------------------------------------------
# Diagrams and tableaux
# --------------------------------------------------------------------------


class YoungDiagram(tuple):
    """Row lengths, weakly decreasing and strictly positive."""

    def __new__(cls, rows: Iterable[int] = ()):
        rows = tuple(int(r) for r in rows)
        while rows and rows[-1] == 0:
            rows = rows[:-1]
        if any(r <= 0 for r in rows):
            raise ValueError(f"row lengths must be positive: {rows}")
        if any(rows[i] < rows[i + 1] for i in range(len(rows) - 1)):
            raise ValueError(f"row lengths must be weakly decreasing: {rows}")
        return super().__new__(cls, rows)

    @property
    def size(self) -> int:
        return sum(self)

    def row(self, i: int) -> int:
        """Length of row i (1-based), 0 beyond the last row."""
        return self[i - 1] if i <= len(self) else 0

    def col(self, j: int) -> int:
        """Length of column j (1-based)."""
        return sum(1 for r in self if r >= j)

    @property
    def columns(self) -> tuple[int, ...]:
        if not self:
            return ()
        return tuple(self.col(j) for j in range(1, self[0] + 1))

    def transpose(self) -> YoungDiagram:
        return YoungDiagram(self.columns)

    def addable(self) -> list[YoungDiagram]:
        """Diagrams with one more box (the upward edges of the Young graph)."""
        out = []
        rows = list(self)
        for i in range(len(rows) + 1):
            prev = rows[i - 1] if i > 0 else math.inf
            cur = rows[i] if i < len(rows) else 0
            if cur < prev:
                new = rows[:i] + [cur + 1] + rows[i + 1 :]
                out.append(YoungDiagram(new))
        return out

    def removable(self) -> list[YoungDiagram]:
        out = []
        rows = list(self)
        for i, r in enumerate(rows):
            nxt = rows[i + 1] if i + 1 < len(rows) else 0
            if r > nxt:
                out.append(YoungDiagram(rows[:i] + [r - 1] + rows[i + 1 :]))
        return out

    def __repr__(self) -> str:
        return f"YoungDiagram({tuple(self)!r})"

    def to_csv_key(self) -> str:
        return ",".join(str(r) for r in self)


def transpose(diagram: Iterable[int]) -> YoungDiagram:
    return YoungDiagram(diagram).transpose()


def shape_of(rows: Sequence[Sequence]) -> YoungDiagram:
    return YoungDiagram(len(r) for r in rows)


@dataclass(frozen=True)
class InsertionTableau:
    """A filling of a diagram by letters; rows read top to bottom."""

    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        shape_of(self.rows)  # raises on a non-diagram

    @property
    def shape(self) -> YoungDiagram:
        return shape_of(self.rows)

    def letters(self):
        for r in self.rows:
            yield from r

    def violations(self, order: LinearOrder) -> list[tuple[int, int, str]]:
        """Cells (row, col, direction) breaking the tableau relations; empty when valid."""
        bad = []
        for i, row in enumerate(self.rows):
            for j, a in enumerate(row):
                if j + 1 < len(row) and not ups(order, a, row[j + 1]):
                    bad.append((i, j, "row"))
                if i + 1 < len(self.rows) and j < len(self.rows[i + 1]):
                    below = self.rows[i + 1][j]
                    if compare_arrows(order, below, a) is not Arrow.DOWN:
                        bad.append((i, j, "col"))
        return bad

    def is_valid(self, order: LinearOrder) -> bool:
        return not self.violations(order)

    def ascii(self) -> str:
        cells = [[str(a) for a in r] for r in self.rows]
        width = max((len(c) for r in cells for c in r), default=1)
        return "\n".join(" ".join(c.rjust(width) for c in r) for r in cells)


@dataclass(frozen=True)
class StandardTableau:
    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(int(v) for v in r) for r in self.rows))
        shape_of(self.rows)

    @property
    def shape(self) -> YoungDiagram:
        return shape_of(self.rows)

    def is_valid(self) -> bool:
        n = sum(len(r) for r in self.rows)
        if sorted(v for r in self.rows for v in r) != list(range(1, n + 1)):
            return False
        for i, row in enumerate(self.rows):
            if any(row[j] >= row[j + 1] for j in range(len(row) - 1)):
                return False
            if i + 1 < len(self.rows):
                below = self.rows[i + 1]
                if any(below[j] <= row[j] for j in range(len(below))):
                    return False
        return True

    def ascii(self) -> str:
        width = len(str(sum(len(r) for r in self.rows))) if self.rows else 1
        return "\n".join(" ".join(str(v).rjust(width) for v in r) for r in self.rows)


@dataclass(frozen=True)
class TableauType:
    """Letter content (n_i, n'_j, m) of a tableau."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    cont: int

    @property
    def total(self) -> int:
        return sum(self.rows) + sum(self.cols) + self.cont

    def trimmed(self) -> TableauType:
        """Drop trailing zero counts so types compare independently of alphabet padding."""
        rows, cols = list(self.rows), list(self.cols)
        while rows and rows[-1] == 0:
            rows.pop()
        while cols and cols[-1] == 0:
            cols.pop()
        return TableauType(tuple(rows), tuple(cols), self.cont)


def tableau_type(R: InsertionTableau) -> TableauType:
    c = Counter()
    m = 0
    for a in R.letters():
        if isinstance(a, ContLetter):
            m += 1
        else:
            c[a] += 1
    nx = max((a.index for a in c if isinstance(a, RowLetter)), default=0)
    ny = max((a.index for a in c if isinstance(a, ColLetter)), default=0)
    return TableauType(
        tuple(c[RowLetter(i)] for i in range(1, nx + 1)),
        tuple(c[ColLetter(j)] for j in range(1, ny + 1)),
        m,
    )
