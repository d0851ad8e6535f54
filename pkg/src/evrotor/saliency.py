"""Polarity-intersection saliency over a sliced event period.

A spinning rotor blade crosses a pixel so quickly that the positive and the
negative event it triggers land inside the same short time slice. Ordinary
moving edges brighten a pixel first and darken it only much later, so their
polarities land in different slices. Counting, per pixel, how many slices
have both polarities present therefore highlights rotor regions while
suppressing camera-motion clutter and background noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import ndimage

from .errors import ConfigurationError, ValidationError
from .events import BBox, EventPeriod

_EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


@dataclass(frozen=True, eq=False)
class PolaritySlicePair:
    """Binary occupancy grids of one time slice, one grid per polarity."""

    pos: np.ndarray
    neg: np.ndarray
    slice_index: int

    def __post_init__(self) -> None:
        if self.pos.shape != self.neg.shape or self.pos.ndim != 2:
            raise ValidationError("polarity grids must be two-dimensional and congruent")
        if self.slice_index < 1:
            raise ValidationError(f"slice index is 1-based, got {self.slice_index}")


@dataclass(frozen=True, eq=False)
class SaliencyMap:
    """Per-pixel intersection counts plus their 8-bit rendering."""

    counts: np.ndarray
    gray: np.ndarray
    n_slices: int

    def __post_init__(self) -> None:
        if self.counts.shape != self.gray.shape or self.counts.ndim != 2:
            raise ValidationError("saliency grids must be two-dimensional and congruent")
        if self.n_slices < 1:
            raise ValidationError(f"slice count must be positive, got {self.n_slices}")


@dataclass(frozen=True, eq=False)
class Region:
    """An 8-connected component of a thresholded saliency map.

    ``pixels`` holds (x, y) cell coordinates in row-major scan order.
    """

    bbox: BBox
    pixels: np.ndarray

    def __post_init__(self) -> None:
        pixels = np.ascontiguousarray(self.pixels, dtype=np.int32)
        if pixels.ndim != 2 or pixels.shape[1] != 2 or pixels.shape[0] < 1:
            raise ValidationError("region pixels must form a non-empty (k, 2) array")
        xs, ys = pixels[:, 0], pixels[:, 1]
        if (
            int(xs.min()) < self.bbox.x
            or int(xs.max()) >= self.bbox.right
            or int(ys.min()) < self.bbox.y
            or int(ys.max()) >= self.bbox.bottom
        ):
            raise ValidationError("region pixels fall outside the region bbox")
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @property
    def area(self) -> int:
        return int(self.pixels.shape[0])


def _check_slice_count(period: EventPeriod, n: int) -> None:
    if n < 2:
        raise ConfigurationError(f"slice count must be at least 2, got {n}")
    if n > period.duration:
        raise ConfigurationError(
            f"slice count {n} exceeds the period duration of {period.duration} us"
        )


def slice_indices(period: EventPeriod, n: int) -> np.ndarray:
    """0-based slice index of every event for an n-way split of the period."""
    _check_slice_count(period, n)
    return ((period.t - period.t_start) * n) // period.duration


def _occupancy_volumes(period: EventPeriod, n: int) -> tuple[np.ndarray, np.ndarray]:
    """(n, H, W) boolean occupancy volumes, one per polarity."""
    s = slice_indices(period, n)
    height, width = period.sensor.shape
    cell = (s * height + period.y) * width + period.x
    pos = np.zeros(n * height * width, dtype=bool)
    neg = np.zeros(n * height * width, dtype=bool)
    positive = period.p == 1
    pos[cell[positive]] = True
    neg[cell[~positive]] = True
    return pos.reshape(n, height, width), neg.reshape(n, height, width)


def partition_polarity_slices(period: EventPeriod, n: int) -> list[PolaritySlicePair]:
    """Split the period into n equal slices of per-polarity pixel occupancy."""
    pos, neg = _occupancy_volumes(period, n)
    return [PolaritySlicePair(pos[i], neg[i], i + 1) for i in range(n)]


def polarity_intersection(pair: PolaritySlicePair) -> np.ndarray:
    """Pixels occupied by both polarities within the slice."""
    return pair.pos & pair.neg


def render_gray(counts: np.ndarray, n_slices: int) -> np.ndarray:
    """Scale intersection counts to 8-bit gray: round(255 * count / n), capped."""
    if n_slices < 1:
        raise ConfigurationError(f"slice count must be positive, got {n_slices}")
    gray = np.rint(counts * 255.0 / n_slices)
    return np.clip(gray, 0, 255).astype(np.uint8)


def accumulate_saliency(intersections: Iterable[np.ndarray]) -> SaliencyMap:
    """Sum per-slice intersection grids into a saliency map."""
    grids = list(intersections)
    if not grids:
        raise ConfigurationError("cannot accumulate an empty sequence of slices")
    shape = grids[0].shape
    counts = np.zeros(shape, dtype=np.int32)
    for grid in grids:
        if grid.shape != shape:
            raise ValidationError("intersection grids must share one shape")
        counts += grid != 0
    return SaliencyMap(counts=counts, gray=render_gray(counts, len(grids)), n_slices=len(grids))


def saliency_map(period: EventPeriod, n: int) -> SaliencyMap:
    """Build the full saliency map for an n-way split of the period.

    Equivalent to partitioning, intersecting each slice, and accumulating,
    fused into array passes.
    """
    pos, neg = _occupancy_volumes(period, n)
    counts = (pos & neg).sum(axis=0, dtype=np.int32)
    return SaliencyMap(counts=counts, gray=render_gray(counts, n), n_slices=n)


def threshold_mask(smap: SaliencyMap, tau_s: int) -> np.ndarray:
    """Pixels whose gray value strictly exceeds tau_s."""
    if not 0 <= tau_s <= 255:
        raise ConfigurationError(f"tau_s must be within 0..255, got {tau_s}")
    return smap.gray > tau_s


def connected_components(mask: np.ndarray) -> list[Region]:
    """8-connected components of a binary mask, ordered by bbox top-left."""
    m = np.asarray(mask)
    if m.ndim != 2:
        raise ValidationError("mask must be two-dimensional")
    if m.dtype != bool:
        m = m != 0
    labels, _ = ndimage.label(m, structure=_EIGHT_CONNECTED)
    regions: list[Region] = []
    for index, slc in enumerate(ndimage.find_objects(labels), start=1):
        if slc is None:
            continue
        ys, xs = np.nonzero(labels[slc] == index)
        xs = (xs + slc[1].start).astype(np.int32)
        ys = (ys + slc[0].start).astype(np.int32)
        bbox = BBox(
            x=slc[1].start,
            y=slc[0].start,
            w=slc[1].stop - slc[1].start,
            h=slc[0].stop - slc[0].start,
        )
        regions.append(Region(bbox=bbox, pixels=np.column_stack([xs, ys])))
    regions.sort(key=lambda r: (r.bbox.y, r.bbox.x, r.bbox.h, r.bbox.w))
    return regions
