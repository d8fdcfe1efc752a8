"""Invertible measure-preserving transformations, applied exactly.

Two kinds of transformation are provided:

* :class:`Translation`: ``x -> x + step`` on the whole line.
* :class:`RankOneMachine`: a cutting-and-stacking construction.  The column
  at stage ``s`` is a stack of same-width rational intervals (the *levels*);
  the map sends each level onto the one above it by translation.  Growing a
  stage cuts the column into ``cuts`` equal subcolumns, adds fresh spacer
  intervals on top of each subcolumn, and stacks the subcolumns left to
  right.  The map defined at stage ``s + 1`` extends the one at stage ``s``
  wherever both are defined, so the machine is grown lazily, on demand.

All arithmetic is exact; points are rationals and images of windows are
windows.  When the partial map is still undefined at a point after growing
to ``max_stage`` stages, :class:`OrbitError` is raised; there is no silent
approximation.
"""

from __future__ import annotations

import threading
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

from .windows import Interval, RatLike, Window, as_rat

__all__ = [
    "OrbitError",
    "Translation",
    "RankOneMachine",
    "RankOneRecipe",
    "TransformHandle",
    "recipe_from_arrays",
    "chacon3_recipe",
    "infinite_chacon_recipe",
    "cesaro_overlap",
    "orbit",
    "DEFAULT_MAX_STAGE",
]

# Each stage of a 3-cut machine triples the level count, so the cap bounds
# memory at roughly 3^12 levels; raise it per call for deeper orbits.
DEFAULT_MAX_STAGE = 12

#: ``recipe(stage, height) -> (cut_count, spacer_counts)`` for the stage
#: about to be built; ``height`` is the column height entering that stage.
RankOneRecipe = Callable[[int, int], tuple[int, Sequence[int]]]


class OrbitError(RuntimeError):
    """The partial map is undefined along the requested orbit segment.

    Raised only after the machine has been grown to ``max_stage`` stages and
    the point (or some sliver of the window) is still on an undefined top or
    bottom level.
    """

    def __init__(self, point: Fraction, requested_power: int, max_stage: int):
        self.point = point
        self.requested_power = requested_power
        self.max_stage = max_stage
        super().__init__(
            f"T^{requested_power} undefined at {point} after {max_stage} stages"
        )


@dataclass(frozen=True)
class Translation:
    """The translation ``x -> x + step``, total on the line."""

    step: Fraction

    def __init__(self, step: RatLike = 1) -> None:
        object.__setattr__(self, "step", as_rat(step))

    def apply(self, x: RatLike, k: int = 1, max_stage: int = DEFAULT_MAX_STAGE) -> Fraction:
        return as_rat(x) + k * self.step

    def image_window(self, w: Window, k: int, max_stage: int = DEFAULT_MAX_STAGE) -> Window:
        return w.translate(k * self.step)

    def __str__(self) -> str:
        return f"Translation({self.step})"


def recipe_from_arrays(
    cuts: Sequence[int], spacers: Sequence[Sequence[int]]
) -> RankOneRecipe:
    """Stage-indexed recipe from explicit ``cuts`` / ``spacers`` arrays.

    Stages beyond the supplied arrays repeat the final entry, so a
    single-entry recipe is a stationary construction.
    """
    if len(cuts) != len(spacers) or not cuts:
        raise ValueError("cuts and spacers must be nonempty arrays of equal length")
    cuts_t = tuple(int(c) for c in cuts)
    spac_t = tuple(tuple(int(s) for s in row) for row in spacers)
    for c, row in zip(cuts_t, spac_t):
        if c < 2:
            raise ValueError("cut count must be at least 2")
        if len(row) != c:
            raise ValueError("spacer row length must equal the cut count")
        if any(s < 0 for s in row):
            raise ValueError("spacer counts must be nonnegative")

    def recipe(stage: int, height: int) -> tuple[int, Sequence[int]]:
        i = min(stage, len(cuts_t) - 1)
        return cuts_t[i], spac_t[i]

    return recipe


def chacon3_recipe() -> RankOneRecipe:
    """Classical Chacon recipe: 3 cuts, one spacer on the middle subcolumn."""
    return recipe_from_arrays([3], [[0, 1, 0]])


def infinite_chacon_recipe() -> RankOneRecipe:
    """Infinite-measure Chacon schedule: 3 cuts, one spacer on the middle
    subcolumn and ``3 * height`` spacers on the last."""

    def recipe(stage: int, height: int) -> tuple[int, Sequence[int]]:
        return 3, (0, 1, 3 * height)

    return recipe


class RankOneMachine:
    """Lazily grown cutting-and-stacking transformation.

    The machine starts from a single base interval (default ``[0, 1)``) and
    keeps, per built stage, the ordered list of levels of the current column.
    All levels share one width; the space is exactly ``[base.lo, frontier)``
    tiled by the levels, where fresh spacers are allocated consecutively from
    the frontier.

    Thread-safe: concurrent ``apply`` calls may trigger growth; stage
    extension is serialized internally and results are independent of the
    interleaving (growth is a deterministic function of the stage).
    """

    def __init__(
        self,
        recipe: RankOneRecipe,
        base: Interval | None = None,
        label: str | None = None,
    ) -> None:
        self._recipe = recipe
        self._base = base if base is not None else Interval(Fraction(0), Fraction(1))
        self._label = label
        self._lock = threading.Lock()
        # state tuple: (stage, width, los, sorted_los, order, frontier) where
        # los[j] is the left endpoint of level j (all levels share the width)
        self._state = (
            0,
            self._base.length,
            (self._base.lo,),
            [self._base.lo],
            [0],
            self._base.hi,
        )

    # -- introspection ----------------------------------------------------

    @property
    def stage(self) -> int:
        return self._state[0]

    @property
    def space(self) -> Window:
        """Currently materialized part of the space, ``[base.lo, frontier)``."""
        _, _, _, _, _, frontier = self._state
        return Window([Interval(self._base.lo, frontier)])

    @property
    def tower(self) -> tuple[Interval, int, tuple[Interval, ...]]:
        """(base level, height, level intervals bottom to top) at the
        deepest built stage."""
        _, width, los, _, _, _ = self._state
        levels = tuple(Interval(lo, lo + width) for lo in los)
        return levels[0], len(levels), levels

    @property
    def pieces(self) -> list[tuple[Interval, Fraction]]:
        """Piecewise map at the deepest built stage: (source level, offset)."""
        _, width, los, _, _, _ = self._state
        return [
            (Interval(los[j], los[j] + width), los[j + 1] - los[j])
            for j in range(len(los) - 1)
        ]

    def __str__(self) -> str:
        return self._label or f"RankOneMachine(stage={self.stage})"

    # -- growth -----------------------------------------------------------

    def grow_to(self, stage: int) -> None:
        """Build stages up to ``stage`` (no-op if already there)."""
        while self._state[0] < stage:
            self._grow_one(self._state[0])

    def _grow_one(self, from_stage: int) -> None:
        with self._lock:
            stage, width, los, _, _, frontier = self._state
            if stage != from_stage:
                return  # another thread already grew this stage
            cuts, spacers = self._recipe(stage, len(los))
            cuts = int(cuts)
            spacers = tuple(int(s) for s in spacers)
            if cuts < 2 or len(spacers) != cuts or any(s < 0 for s in spacers):
                raise ValueError(f"invalid recipe output at stage {stage}")
            w = width / cuts
            new_los: list[Fraction] = []
            for c in range(cuts):
                off = c * w
                new_los.extend(lo + off for lo in los)
                for _ in range(spacers[c]):
                    new_los.append(frontier)
                    frontier += w
            order = sorted(range(len(new_los)), key=new_los.__getitem__)
            sorted_los = [new_los[i] for i in order]
            self._state = (stage + 1, w, tuple(new_los), sorted_los, order, frontier)

    # -- the map ----------------------------------------------------------

    def apply(self, x: RatLike, k: int = 1, max_stage: int = DEFAULT_MAX_STAGE) -> Fraction:
        """Exact ``T^k x``; grows the tower until the orbit segment is defined."""
        x = as_rat(x)
        if x < self._base.lo:
            raise ValueError(f"point {x} is outside the machine space")
        if k == 0:
            return x
        while True:
            stage, width, los, sorted_los, order, frontier = self._state
            if x < frontier:
                pos = bisect_right(sorted_los, x) - 1
                lvl = order[pos]
                target = lvl + k
                if 0 <= target < len(los):
                    return x + (los[target] - los[lvl])
            if stage >= max_stage:
                raise OrbitError(x, k, max_stage)
            self._grow_one(stage)

    def image_window(self, w: Window, k: int, max_stage: int = DEFAULT_MAX_STAGE) -> Window:
        """Exact image ``T^k w``; length is preserved.

        Every sliver of ``w`` must reach a defined level within ``max_stage``
        stages, otherwise :class:`OrbitError` names the unresolved point.
        """
        if w.is_empty or k == 0:
            return w
        if w.parts[0].lo < self._base.lo:
            raise ValueError(f"window {w} is outside the machine space")
        while True:
            stage, width, los, sorted_los, order, frontier = self._state
            pieces: list[Interval] = []
            stuck: Fraction | None = None
            if w.hi > frontier:
                stuck = frontier
            else:
                h = len(los)
                for part in w.parts:
                    pos = bisect_right(sorted_los, part.lo) - 1
                    while stuck is None:
                        lvl = order[pos]
                        a = max(part.lo, los[lvl])
                        b = min(part.hi, los[lvl] + width)
                        target = lvl + k
                        if 0 <= target < h:
                            off = los[target] - los[lvl]
                            pieces.append(Interval(a + off, b + off))
                        else:
                            stuck = a
                        if b >= part.hi:
                            break
                        pos += 1
                    if stuck is not None:
                        break
            if stuck is None:
                return Window(pieces)
            if stage >= max_stage:
                raise OrbitError(stuck, k, max_stage)
            self._grow_one(stage)


TransformHandle = Union[Translation, RankOneMachine]


def orbit(
    T: TransformHandle, x: RatLike, k: int, max_stage: int = DEFAULT_MAX_STAGE
) -> list[tuple[int, Fraction]]:
    """Orbit segment ``[(j, T^j x)]`` for ``j`` from 0 to ``k`` inclusive."""
    x = as_rat(x)
    step = 1 if k >= 0 else -1
    out = [(0, x)]
    y = x
    for j in range(step, k + step, step):
        y = T.apply(y, step, max_stage=max_stage)
        out.append((j, y))
    return out


def cesaro_overlap(
    T: TransformHandle,
    A: Window,
    B: Window,
    L: int,
    max_stage: int = DEFAULT_MAX_STAGE,
) -> list[Fraction]:
    """Cesàro averages ``(1/l) * sum_{k=1..l} mu(T^-k A ∩ B)`` for l = 1..L.

    mu is length measure; every term is exact.  Terms are evaluated as
    ``mu(A ∩ T^k B)`` (equal by measure preservation) so that windows
    anchored at the base of a rank-one machine stay finitely resolvable;
    the backward form is used as a fallback.
    """
    if L < 1:
        raise ValueError("L must be at least 1")
    total = Fraction(0)
    out = []
    for k in range(1, L + 1):
        try:
            term = A.intersect(T.image_window(B, k, max_stage=max_stage)).length
        except OrbitError:
            term = B.intersect(T.image_window(A, -k, max_stage=max_stage)).length
        total += term
        out.append(total / k)
    return out
