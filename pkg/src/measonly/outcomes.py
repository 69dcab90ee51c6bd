"""Where measurement outcomes come from: a seeded generator, a forced script, or both.

Every sampling routine in the package accepts ``rng=`` and ``forced=``.  Forced
labels are consumed first, in order; once the script runs out the generator
takes over.  Passing neither gives an unseeded generator, which is only meant
for interactive use.
"""
from __future__ import annotations

from collections import deque
from typing import Any, Sequence

import numpy as np


class ImpossibleOutcomeError(ValueError):
    """A forced outcome has (numerically) zero probability."""


class OutcomeSource:
    """Feeds outcome choices to measurements.

    Labels are compared with ``==``, so joint outcomes can be forced as tuples
    such as ``(1, -1)``.
    """

    ZERO_PROB = 1e-12

    def __init__(self, rng: np.random.Generator | int | None = None, forced: Sequence[Any] | None = None):
        if rng is None or isinstance(rng, (int, np.integer)):
            rng = np.random.default_rng(rng)
        self.rng = rng
        self._forced = deque(forced or ())

    @classmethod
    def wrap(cls, rng=None, forced=None) -> "OutcomeSource":
        if isinstance(rng, OutcomeSource):
            if forced:
                rng._forced.extend(forced)
            return rng
        return cls(rng, forced)

    @property
    def pending_forced(self) -> int:
        return len(self._forced)

    def choose(self, labels: Sequence[Any], probs: Sequence[float]) -> int:
        """Index of the chosen outcome."""
        if self._forced:
            want = self._forced.popleft()
            try:
                idx = list(labels).index(want)
            except ValueError:
                raise ImpossibleOutcomeError(f"forced outcome {want!r} is not one of {list(labels)}") from None
            if probs[idx] <= self.ZERO_PROB:
                raise ImpossibleOutcomeError(f"forced outcome {want!r} has probability {probs[idx]:.3g}")
            return idx
        p = np.asarray(probs, dtype=float)
        cum = np.cumsum(p / p.sum())
        return int(min(np.searchsorted(cum, self.rng.random(), side="right"), len(p) - 1))
