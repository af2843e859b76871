"""Ultimately periodic sequences ``stem . loop^omega``."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Generic, Iterator, TypeVar

E = TypeVar("E")


@dataclass(frozen=True)
class Lasso(Generic[E]):
    stem: tuple
    loop: tuple

    def __post_init__(self):
        object.__setattr__(self, "stem", tuple(self.stem))
        object.__setattr__(self, "loop", tuple(self.loop))
        if not self.loop:
            raise ValueError("lasso loop must be nonempty")

    def __len__(self):
        """Number of distinct positions (stem plus one loop pass)."""
        return len(self.stem) + len(self.loop)

    def __getitem__(self, i: int) -> E:
        """Element at 0-based position ``i`` of the infinite sequence."""
        s = len(self.stem)
        if i < s:
            return self.stem[i]
        return self.loop[(i - s) % len(self.loop)]

    def successor(self, p: int) -> int:
        """Successor of a canonical position (``0 <= p < len(self)``)."""
        p += 1
        return p if p < len(self) else len(self.stem)

    def elements(self) -> tuple:
        return self.stem + self.loop

    def iter_positions(self, start: int = 0) -> Iterator[int]:
        """Canonical positions visited from ``start``, one full cycle's worth."""
        p = start
        for _ in range(len(self)):
            yield p
            p = self.successor(p)

    def suffix(self, j: int) -> "Lasso[E]":
        """The lasso read from canonical position ``j`` on."""
        s = len(self.stem)
        if j < s:
            return replace(self, stem=self.stem[j:], loop=self.loop)
        k = j - s
        return replace(self, stem=(), loop=self.loop[k:] + self.loop[:k])

    def normalized(self) -> "Lasso[E]":
        """Shortest stem, then primitive loop."""
        stem, loop = list(self.stem), list(self.loop)
        while stem and stem[-1] == loop[-1]:
            stem.pop()
            loop = [loop[-1]] + loop[:-1]
        n = len(loop)
        for period in range(1, n + 1):
            if n % period == 0 and loop == loop[:period] * (n // period):
                loop = loop[:period]
                break
        return replace(self, stem=tuple(stem), loop=tuple(loop))
