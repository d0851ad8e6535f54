"""Core domain types: events, bounded event periods, boxes, detector config.

Event periods keep their events in columnar numpy arrays. All detector math
runs on whole columns, so per-event objects exist only as a convenience view
for callers that want one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigurationError, ValidationError

POSITIVE = 1
NEGATIVE = 0


@dataclass(frozen=True)
class SensorGeometry:
    """Pixel dimensions of the event sensor."""

    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValidationError(
                f"sensor dimensions must be positive, got {self.width}x{self.height}"
            )

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape (height, width) for grids over this sensor."""
        return (self.height, self.width)


@dataclass(frozen=True)
class Event:
    """One camera event: timestamp in microseconds, pixel, polarity (1 or 0)."""

    t: int
    x: int
    y: int
    p: int

    def __post_init__(self) -> None:
        if self.t < 0:
            raise ValidationError(f"event timestamp must be non-negative, got {self.t}")
        if self.p not in (NEGATIVE, POSITIVE):
            raise ValidationError(f"polarity must be 0 or 1, got {self.p}")


@dataclass(frozen=True)
class BBox:
    """Axis-aligned pixel rectangle, top-left corner plus positive size."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        if self.w <= 0 or self.h <= 0:
            raise ValidationError(f"box size must be positive, got {self.w}x{self.h}")

    @property
    def right(self) -> int:
        """First column past the box."""
        return self.x + self.w

    @property
    def bottom(self) -> int:
        """First row past the box."""
        return self.y + self.h

    @property
    def area(self) -> int:
        return self.w * self.h

    def union(self, other: "BBox") -> "BBox":
        x = min(self.x, other.x)
        y = min(self.y, other.y)
        return BBox(x, y, max(self.right, other.right) - x, max(self.bottom, other.bottom) - y)

    def clamped(self, sensor: SensorGeometry) -> "BBox":
        """Intersection with the sensor frame. Raises if nothing remains."""
        x0 = max(self.x, 0)
        y0 = max(self.y, 0)
        x1 = min(self.right, sensor.width)
        y1 = min(self.bottom, sensor.height)
        if x1 <= x0 or y1 <= y0:
            raise ValidationError(f"box {self.as_tuple()} lies outside the sensor")
        return BBox(x0, y0, x1 - x0, y1 - y0)

    def contains(self, px: float, py: float) -> bool:
        """True when the point falls inside the half-open pixel extent."""
        return self.x <= px < self.right and self.y <= py < self.bottom

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.x, self.y, self.w, self.h)


class EventPeriod:
    """A bounded time window of events in columnar, timestamp-sorted form.

    Columns are read-only after construction. ``resorted`` is True when the
    input needed a stable reorder to become time-sorted.
    """

    __slots__ = ("t", "x", "y", "p", "t_start", "duration", "sensor", "resorted")

    def __init__(
        self,
        t,
        x,
        y,
        p,
        *,
        t_start: int,
        duration: int,
        sensor: SensorGeometry,
    ):
        t = np.ascontiguousarray(t, dtype=np.int64)
        x = np.ascontiguousarray(x, dtype=np.int32)
        y = np.ascontiguousarray(y, dtype=np.int32)
        p = np.ascontiguousarray(p, dtype=np.uint8)
        if not (t.ndim == x.ndim == y.ndim == p.ndim == 1):
            raise ValidationError("event columns must be one-dimensional")
        if not (t.size == x.size == y.size == p.size):
            raise ValidationError("event columns must have equal length")
        if t_start < 0:
            raise ValidationError(f"period start must be non-negative, got {t_start}")
        if duration <= 0:
            raise ValidationError(f"period duration must be positive, got {duration}")
        if t.size:
            if int(x.min()) < 0 or int(x.max()) >= sensor.width or int(y.min()) < 0 or int(y.max()) >= sensor.height:
                bad = (x < 0) | (x >= sensor.width) | (y < 0) | (y >= sensor.height)
                i = int(np.argmax(bad))
                raise ValidationError(
                    f"event {i} at ({int(x[i])},{int(y[i])}) is outside the "
                    f"{sensor.width}x{sensor.height} sensor"
                )
            if int(t.min()) < t_start or int(t.max()) >= t_start + duration:
                bad = (t < t_start) | (t >= t_start + duration)
                i = int(np.argmax(bad))
                raise ValidationError(
                    f"event {i} at t={int(t[i])} is outside the period "
                    f"[{t_start}, {t_start + duration})"
                )
            if int(p.max()) > 1:
                bad = p > 1
                i = int(np.argmax(bad))
                raise ValidationError(f"event {i} has polarity {int(p[i])}, expected 0 or 1")
        resorted = False
        if t.size > 1 and bool(np.any(np.diff(t) < 0)):
            order = np.argsort(t, kind="stable")
            t, x, y, p = t[order], x[order], y[order], p[order]
            resorted = True
        for col in (t, x, y, p):
            col.setflags(write=False)
        self.t = t
        self.x = x
        self.y = y
        self.p = p
        self.t_start = int(t_start)
        self.duration = int(duration)
        self.sensor = sensor
        self.resorted = resorted

    @classmethod
    def from_events(
        cls,
        events: Sequence[Event],
        *,
        t_start: int,
        duration: int,
        sensor: SensorGeometry,
    ) -> "EventPeriod":
        t = np.fromiter((e.t for e in events), dtype=np.int64, count=len(events))
        x = np.fromiter((e.x for e in events), dtype=np.int32, count=len(events))
        y = np.fromiter((e.y for e in events), dtype=np.int32, count=len(events))
        p = np.fromiter((e.p for e in events), dtype=np.uint8, count=len(events))
        return cls(t, x, y, p, t_start=t_start, duration=duration, sensor=sensor)

    @property
    def t_end(self) -> int:
        """First microsecond past the period."""
        return self.t_start + self.duration

    def __len__(self) -> int:
        return self.t.size

    def __getitem__(self, i: int) -> Event:
        return Event(int(self.t[i]), int(self.x[i]), int(self.y[i]), int(self.p[i]))

    def __iter__(self) -> Iterator[Event]:
        for i in range(self.t.size):
            yield self[i]

    def __repr__(self) -> str:
        return (
            f"EventPeriod({self.t.size} events, t_start={self.t_start}, "
            f"duration={self.duration}, sensor={self.sensor.width}x{self.sensor.height})"
        )


@dataclass(frozen=True)
class DetectorConfig:
    """Detector parameters.

    ``n_slices`` and ``m_slices`` may be None, in which case they resolve per
    period: one saliency slice per millisecond of duration and two feature
    slices per millisecond.
    """

    n_slices: int | None = None
    m_slices: int | None = None
    tau_s: int = 50
    tau_p: int = 3
    k_top: int = 4
    d_merge: float = 50.0
    smooth_window: int = 3
    region_margin: int = 2

    def __post_init__(self) -> None:
        if self.n_slices is not None and self.n_slices < 2:
            raise ConfigurationError(f"n_slices must be at least 2, got {self.n_slices}")
        if self.m_slices is not None and self.m_slices < 4:
            raise ConfigurationError(f"m_slices must be at least 4, got {self.m_slices}")
        if not 0 <= self.tau_s <= 255:
            raise ConfigurationError(f"tau_s must be within 0..255, got {self.tau_s}")
        if not 0 <= self.tau_p <= 6:
            raise ConfigurationError(f"tau_p must be within 0..6, got {self.tau_p}")
        if self.k_top < 1:
            raise ConfigurationError(f"k_top must be at least 1, got {self.k_top}")
        if self.d_merge < 0:
            raise ConfigurationError(f"d_merge must be non-negative, got {self.d_merge}")
        if self.smooth_window < 1 or self.smooth_window % 2 == 0:
            raise ConfigurationError(
                f"smooth_window must be an odd integer >= 1, got {self.smooth_window}"
            )
        if self.region_margin < 0:
            raise ConfigurationError(
                f"region_margin must be non-negative, got {self.region_margin}"
            )

    def slicing_for(self, period: EventPeriod) -> tuple[int, int]:
        """Resolve (n, m) slice counts for one period."""
        duration_ms = max(1, round(period.duration / 1000))
        n = self.n_slices if self.n_slices is not None else max(2, duration_ms)
        m = self.m_slices if self.m_slices is not None else max(4, 2 * duration_ms)
        if n > period.duration:
            raise ConfigurationError(
                f"n_slices={n} exceeds the period duration of {period.duration} us"
            )
        if m > period.duration:
            raise ConfigurationError(
                f"m_slices={m} exceeds the period duration of {period.duration} us"
            )
        return n, m
