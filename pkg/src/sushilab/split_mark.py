"""Splittings, separation thinning, and marked configurations.

Splitting is implemented *through* marking: a Bernoulli split draws one mark
per point and projects, so the split components superpose to the input
exactly, realization by realization, and marking followed by projection over
a partition of the mark alphabet is literally the same object.

Separation thinning follows a buffered-window protocol: the input must be
observed on a window extending at least kappa beyond the evaluation core on
every side, otherwise edge points have unobservable neighbors and the thin
is not well defined.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .point_process import PointConfig, Rng
from .windows import RatLike, Window, as_rat

__all__ = [
    "MarkedConfig",
    "attach_marks",
    "project_mark_set",
    "bernoulli_split",
    "separation_thin",
]


@dataclass(frozen=True)
class MarkedConfig:
    """Points with integer marks from a finite alphabet 0..mark_count-1."""

    atoms: tuple[tuple[Fraction, int], ...]
    window: Window
    mark_count: int

    def __post_init__(self):
        if self.mark_count < 1:
            raise ValueError("mark alphabet must be nonempty")
        for (a, _), (b, _) in zip(self.atoms, self.atoms[1:]):
            if not a < b:
                raise ValueError("points must be strictly increasing")
        for p, m in self.atoms:
            if not 0 <= m < self.mark_count:
                raise ValueError(f"mark {m} outside alphabet")
            if p not in self.window:
                raise ValueError(f"point {p} outside window")

    def ground(self) -> PointConfig:
        return PointConfig(tuple(p for p, _ in self.atoms), self.window)


def _validate_probs(probs: Sequence[float]) -> np.ndarray:
    arr = np.asarray([float(p) for p in probs], dtype=float)
    if arr.size == 0 or (arr < 0).any():
        raise ValueError("probabilities must be nonnegative and nonempty")
    if abs(arr.sum() - 1.0) > 1e-12:
        raise ValueError("probabilities must sum to 1")
    return arr


def attach_marks(c: PointConfig, mark_probs: Sequence[float], rng: Rng) -> MarkedConfig:
    """I.i.d. marks with law mark_probs; one uniform per point, in point order."""
    probs = _validate_probs(mark_probs)
    cum = np.cumsum(probs)
    if len(c.points) == 0:
        return MarkedConfig((), c.window, len(probs))
    us = rng.random_block(len(c.points))
    marks = np.minimum(np.searchsorted(cum, us, side="right"), len(probs) - 1)
    atoms = tuple((p, int(m)) for p, m in zip(c.points, marks))
    return MarkedConfig(atoms, c.window, len(probs))


def project_mark_set(mc: MarkedConfig, B: Iterable[int]) -> PointConfig:
    """Sub-process of points whose mark lies in B."""
    keep = set(B)
    for m in keep:
        if not 0 <= m < mc.mark_count:
            raise ValueError(f"mark {m} outside alphabet")
    return PointConfig(tuple(p for p, m in mc.atoms if m in keep), mc.window)


def bernoulli_split(c: PointConfig, probs: Sequence[float], rng: Rng) -> list[PointConfig]:
    """Independent assignment of each point to one of len(probs) components."""
    mc = attach_marks(c, probs, rng)
    return [project_mark_set(mc, {i}) for i in range(len(probs))]


def separation_thin(c: PointConfig, kappa: RatLike) -> PointConfig:
    """Keep core points whose nearest neighbor is farther than kappa.

    The evaluation core is the observed window shrunk by kappa; a tie at
    exactly kappa blocks (keeping requires strictly larger separation).
    Raises when shrinking empties the window: then every point's
    neighborhood reaches unobserved territory.
    """
    kappa = as_rat(kappa)
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    core = c.window.shrink(kappa)
    if core.is_empty and not c.window.is_empty:
        raise ValueError(
            f"window {c.window} leaves no core after buffering by {kappa}"
        )
    pts = c.points
    kept = []
    for i, p in enumerate(pts):
        if p not in core:
            continue
        if i > 0 and p - pts[i - 1] <= kappa:
            continue
        if i + 1 < len(pts) and pts[i + 1] - p <= kappa:
            continue
        kept.append(p)
    return PointConfig(tuple(kept), core)
