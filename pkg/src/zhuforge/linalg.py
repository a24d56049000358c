"""Sparse exact row reduction.

Vectors are dicts ``coordinate -> rational``.  :class:`Echelon` keeps a fully
reduced row echelon basis whose pivot in each row is the *largest*
coordinate under a caller supplied sort key.  Rows can optionally carry a
``tag`` combination recording how they were built from the inserted
vectors, which turns the same machinery into an exact linear solver.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping

Vector = dict


def axpy(acc: dict, vec: Mapping, k=1) -> dict:
    """In place ``acc += k * vec``; zero entries are dropped."""
    for key, c in vec.items():
        v = acc.get(key, 0) + k * c
        if v:
            acc[key] = v
        else:
            acc.pop(key, None)
    return acc


def scaled(vec: Mapping, k) -> dict:
    if not k:
        return {}
    return {key: k * c for key, c in vec.items()}


class Echelon:
    """Incrementally maintained reduced row echelon form."""

    def __init__(self, key: Callable[[Hashable], object] | None = None, track: bool = False):
        self.key = key or (lambda coord: coord)
        self.track = track
        self.rows: dict[Hashable, dict] = {}  # pivot -> row (pivot entry 1)
        self.tags: dict[Hashable, dict] = {}  # pivot -> combination of inserted labels

    def __len__(self):
        return len(self.rows)

    @property
    def pivots(self) -> list:
        return sorted(self.rows, key=self.key)

    def _pivot_of(self, vec: Mapping):
        return max(vec, key=self.key)

    def reduce(self, vec: Mapping, tag: Mapping | None = None) -> tuple[dict, dict]:
        """Return ``(remainder, tag)`` with every pivot coordinate eliminated."""
        out = dict(vec)
        tag = dict(tag or {})
        # rows are fully reduced: subtracting one never re-introduces another pivot
        for p in [p for p in out if p in self.rows]:
            c = out[p]
            axpy(out, self.rows[p], -c)
            if self.track:
                axpy(tag, self.tags[p], -c)
        return out, tag

    def add(self, vec: Mapping, label: Hashable | None = None) -> bool:
        """Insert ``vec``; returns False when it was already in the span."""
        rem, tag = self.reduce(vec, {label: Fraction(1)} if self.track else None)
        if not rem:
            return False
        p = self._pivot_of(rem)
        inv = 1 / Fraction(rem[p])
        rem = scaled(rem, inv)
        tag = scaled(tag, inv)
        for q, row in self.rows.items():
            c = row.get(p)
            if c:
                axpy(row, rem, -c)
                if self.track:
                    axpy(self.tags[q], tag, -c)
        self.rows[p] = rem
        if self.track:
            self.tags[p] = tag
        return True

    def contains(self, vec: Mapping) -> bool:
        return not self.reduce(vec)[0]


def solve_combination(generators: Mapping[Hashable, Mapping], target: Mapping, key=None):
    """Find ``x`` with ``sum x[label] * generators[label] == target`` exactly.

    Returns ``(coefficients, remainder)``; the remainder is empty iff the
    target is in the span.  Coefficients of dependent generators are zero.
    """
    ech = Echelon(key=key, track=True)
    for label, vec in generators.items():
        ech.add(vec, label)
    rem, tag = ech.reduce(target)
    if rem:
        return None, rem
    coeffs = {label: -c for label, c in tag.items() if c}
    return coeffs, {}


def combine(generators: Mapping[Hashable, Mapping], coeffs: Mapping) -> dict:
    out: dict = {}
    for label, c in coeffs.items():
        axpy(out, generators[label], c)
    return out


def vec_equal(a: Mapping, b: Mapping) -> bool:
    keys = set(a) | set(b)
    return all(a.get(k, 0) == b.get(k, 0) for k in keys)


def iter_nonzero(vec: Mapping) -> Iterable:
    return ((k, c) for k, c in vec.items() if c)
