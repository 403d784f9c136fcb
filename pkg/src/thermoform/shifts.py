"""Finite Markov shifts: words, admissibility, periodic orbits, Birkhoff sums.

Symbols are 0-based integers.  Transition matrices are 0/1 with entry (i, j)
equal to 1 iff symbol j may follow symbol i.  Small alphabets use dense numpy
arrays; large synthetic graphs (loop realizations of renewal structures) may
pass a scipy.sparse matrix instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
import scipy.sparse as sp

Word = tuple[int, ...]


def _is_sparse(mat) -> bool:
    return sp.issparse(mat)


@dataclass(frozen=True)
class FiniteShift:
    """A finite Markov shift given by its alphabet size and transition matrix.

    The matrix must be square 0/1 with no all-zero row and no all-zero
    column, so every symbol has at least one successor and one predecessor.
    """

    alphabet_size: int
    transitions: object  # (m, m) ndarray of 0/1, or scipy.sparse

    def __post_init__(self):
        m = self.alphabet_size
        if m < 1:
            raise ValueError("alphabet_size must be >= 1")
        t = self.transitions
        if _is_sparse(t):
            t = t.tocsr()
            t.eliminate_zeros()
            if t.shape != (m, m):
                raise ValueError("transition matrix shape mismatch")
            if t.nnz and not np.all(t.data == 1):
                raise ValueError("transition entries must be 0 or 1")
            row = np.asarray(t.sum(axis=1)).ravel()
            col = np.asarray(t.sum(axis=0)).ravel()
            object.__setattr__(self, "transitions", t)
        else:
            t = np.asarray(t)
            if t.shape != (m, m):
                raise ValueError("transition matrix shape mismatch")
            if not np.all((t == 0) | (t == 1)):
                raise ValueError("transition entries must be 0 or 1")
            t = t.astype(np.int8)
            row = t.sum(axis=1)
            col = t.sum(axis=0)
            object.__setattr__(self, "transitions", t)
        if np.any(row == 0):
            raise ValueError("transition matrix has an all-zero row")
        if np.any(col == 0):
            raise ValueError("transition matrix has an all-zero column")

    # -- basic queries ----------------------------------------------------

    @property
    def is_sparse(self) -> bool:
        return _is_sparse(self.transitions)

    def allows(self, i: int, j: int) -> bool:
        if self.is_sparse:
            return bool(self.transitions[i, j])
        return bool(self.transitions[i][j])

    def successors(self, i: int) -> np.ndarray:
        if self.is_sparse:
            t = self.transitions
            return t.indices[t.indptr[i]:t.indptr[i + 1]]
        return np.nonzero(self.transitions[i])[0]

    def dense(self) -> np.ndarray:
        if self.is_sparse:
            return np.asarray(self.transitions.todense(), dtype=np.int8)
        return self.transitions


def full_shift(m: int) -> FiniteShift:
    """Full shift on m symbols (every transition allowed)."""
    return FiniteShift(m, np.ones((m, m), dtype=np.int8))


def golden_mean_shift() -> FiniteShift:
    """Two symbols with the word (1, 1) forbidden."""
    return FiniteShift(2, np.array([[1, 1], [1, 0]], dtype=np.int8))


def renewal_shift(num_symbols: int) -> FiniteShift:
    """Truncation of the renewal graph to symbols 0..num_symbols-1.

    Transitions: 0 -> 0, 0 -> n for every n, and n -> n-1 for n >= 1.
    """
    m = num_symbols
    if m < 2:
        raise ValueError("need at least 2 symbols")
    t = np.zeros((m, m), dtype=np.int8)
    t[0, :] = 1
    for n in range(1, m):
        t[n, n - 1] = 1
    return FiniteShift(m, t)


def cycle_shift(m: int) -> FiniteShift:
    """Deterministic m-cycle 0 -> 1 -> ... -> m-1 -> 0."""
    t = np.zeros((m, m), dtype=np.int8)
    for i in range(m):
        t[i, (i + 1) % m] = 1
    return FiniteShift(m, t)


def disjoint_union(a: FiniteShift, b: FiniteShift) -> FiniteShift:
    """Block-diagonal union; symbols of b are relabelled after a's."""
    ma, mb = a.alphabet_size, b.alphabet_size
    t = np.zeros((ma + mb, ma + mb), dtype=np.int8)
    t[:ma, :ma] = a.dense()
    t[ma:, ma:] = b.dense()
    return FiniteShift(ma + mb, t)


@dataclass(frozen=True)
class LocallyConstantPotential:
    """A potential depending on the first `depth` symbols only (values in nats).

    `values` maps every admissible depth-word to a finite real.  When a shift
    is supplied the key set is checked against the admissible words.
    """

    depth: int
    values: dict
    shift: FiniteShift | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        vals = {tuple(k): float(v) for k, v in self.values.items()}
        for k, v in vals.items():
            if len(k) != self.depth:
                raise ValueError(f"key {k} does not have length {self.depth}")
            if not math.isfinite(v):
                raise ValueError(f"value for {k} is not finite")
        object.__setattr__(self, "values", vals)
        if self.shift is not None:
            expected = set(enumerate_admissible_words(self.shift, self.depth))
            got = set(vals)
            if expected != got:
                missing = sorted(expected - got)[:4]
                extra = sorted(got - expected)[:4]
                raise ValueError(
                    f"potential keys disagree with admissible {self.depth}-words"
                    f" (missing {missing}, extra {extra})")

    def __call__(self, context: Word) -> float:
        return self.values[tuple(context)]

    def scaled(self, t: float) -> "LocallyConstantPotential":
        return LocallyConstantPotential(
            self.depth, {k: t * v for k, v in self.values.items()}, self.shift)

    @classmethod
    def from_symbol_values(cls, shift: FiniteShift, per_symbol) -> "LocallyConstantPotential":
        vals = {(i,): float(v) for i, v in enumerate(per_symbol)}
        return cls(1, vals, shift)

    @classmethod
    def constant(cls, shift: FiniteShift, value: float) -> "LocallyConstantPotential":
        return cls.from_symbol_values(shift, [value] * shift.alphabet_size)


def is_admissible(word, shift: FiniteShift) -> bool:
    """True iff every adjacent pair of symbols is an allowed transition."""
    w = tuple(int(s) for s in word)
    for s in w:
        if s < 0 or s >= shift.alphabet_size:
            raise ValueError(f"symbol {s} outside alphabet of size {shift.alphabet_size}")
    return all(shift.allows(w[i], w[i + 1]) for i in range(len(w) - 1))


def enumerate_admissible_words(shift: FiniteShift, n: int) -> list[Word]:
    """All admissible words of length n, lexicographic."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out: list[Word] = []
    stack: list[Word] = [(s,) for s in range(shift.alphabet_size - 1, -1, -1)]
    while stack:
        w = stack.pop()
        if len(w) == n:
            out.append(w)
            continue
        for j in shift.successors(w[-1])[::-1]:
            stack.append(w + (int(j),))
    return out


@dataclass(frozen=True)
class MixingVerdict:
    mixing: bool
    power: int | None  # smallest N with the N-th Boolean power all positive
    checked_up_to: int

    def __bool__(self) -> bool:
        return self.mixing


def is_topologically_mixing(shift: FiniteShift, n_max: int = 64) -> MixingVerdict:
    """Search for the smallest N <= n_max with T^N all-positive (Boolean)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if shift.is_sparse and shift.alphabet_size > 4096:
        raise ValueError("mixing scan is for small alphabets; use component analysis")
    base = shift.dense().astype(bool)
    power = base.copy()
    for n in range(1, n_max + 1):
        if power.all():
            return MixingVerdict(True, n, n_max)
        power = power @ base
    return MixingVerdict(False, None, n_max)


def enumerate_periodic_words(shift: FiniteShift, n: int,
                             first_symbol: int | None = None) -> list[Word]:
    """Admissible cyclic words of length n (wrap transition included).

    These index the period-n points of the shift.  Output is lexicographic
    and deterministic.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if first_symbol is not None and not (0 <= first_symbol < shift.alphabet_size):
        raise ValueError("first_symbol outside alphabet")
    firsts = [first_symbol] if first_symbol is not None else list(range(shift.alphabet_size))
    out: list[Word] = []
    for f in firsts:
        stack: list[Word] = [(f,)]
        while stack:
            w = stack.pop()
            if len(w) == n:
                if shift.allows(w[-1], w[0]):
                    out.append(w)
                continue
            for j in shift.successors(w[-1])[::-1]:
                stack.append(w + (int(j),))
    out.sort()
    return out


def birkhoff_sum(potential: LocallyConstantPotential, cyclic_word) -> float:
    """Sum of the potential along the periodic orbit coded by the word.

    The word is read cyclically, so every depth-k context wraps around; this
    is the genuine orbit sum S_n at the corresponding periodic point.
    """
    w = tuple(int(s) for s in cyclic_word)
    n = len(w)
    if n < 1:
        raise ValueError("empty word")
    k = potential.depth
    total = 0.0
    for i in range(n):
        ctx = tuple(w[(i + j) % n] for j in range(k))
        try:
            total += potential.values[ctx]
        except KeyError:
            raise ValueError(f"cyclic context {ctx} is not admissible") from None
    return total


def variation(potential: LocallyConstantPotential, n: int) -> float:
    """sup |phi(x) - phi(y)| over points agreeing on the first n symbols.

    Zero whenever n >= depth (the potential is locally constant at that
    level); otherwise a brute-force scan over cylinder pairs.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    k = potential.depth
    if n >= k:
        return 0.0
    groups: dict[Word, list[float]] = {}
    for w, v in potential.values.items():
        groups.setdefault(w[:n], []).append(v)
    best = 0.0
    for vals in groups.values():
        if len(vals) > 1:
            best = max(best, max(vals) - min(vals))
    return best
