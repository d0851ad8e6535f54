"""File formats: event streams (CSV and binary), box annotations, PGM dumps.

CSV streams hold one ``t_us,x,y,p`` row per event, with optional ``#``
comment lines. Writers emit ``# t_start_us=`` and ``# duration_us=`` comments
so the period bounds survive a round trip; readers fall back to deriving the
bounds from the timestamps when the comments are absent.

Binary streams open with a 24-byte little-endian header (magic ``EVD1``,
width u16, height u16, t_start u64, duration u64) followed by 16-byte
records (t u64, x u16, y u16, p u8, 3 pad bytes).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EventFormatError, ValidationError
from .events import BBox, EventPeriod, SensorGeometry

BINARY_MAGIC = b"EVD1"
_HEADER = struct.Struct("<4sHHQQ")
_RECORD_DTYPE = np.dtype(
    [("t", "<u8"), ("x", "<u2"), ("y", "<u2"), ("p", "u1"), ("pad", "V3")]
)
_CSV_HEADER = "t_us,x,y,p"

assert _RECORD_DTYPE.itemsize == 16


@dataclass(frozen=True)
class BoxRecord:
    """One annotated box; scores are present on detections, absent on GT."""

    bbox: BBox
    s_p: int | None = None
    s_s: float | None = None


@dataclass(frozen=True)
class AnnotationRecord:
    """Boxes of one period plus the metadata identifying it."""

    file: str
    width: int
    height: int
    duration_us: int
    boxes: tuple[BoxRecord, ...]


def _format_of(path: Path, fmt: str | None) -> str:
    if fmt is not None:
        if fmt not in ("csv", "binary"):
            raise ValidationError(f"unknown event format {fmt!r}")
        return fmt
    return "binary" if path.suffix.lower() in (".evd", ".bin") else "csv"


def write_events(period: EventPeriod, path, fmt: str | None = None) -> None:
    """Write a period to disk; format comes from ``fmt`` or the extension."""
    path = Path(path)
    if _format_of(path, fmt) == "binary":
        _write_binary(period, path)
    else:
        _write_csv(period, path)


def _write_csv(period: EventPeriod, path: Path) -> None:
    with open(path, "w", encoding="ascii") as handle:
        handle.write(f"# t_start_us={period.t_start}\n")
        handle.write(f"# duration_us={period.duration}\n")
        handle.write(_CSV_HEADER + "\n")
        columns = np.column_stack(
            [period.t, period.x.astype(np.int64), period.y.astype(np.int64), period.p.astype(np.int64)]
        )
        np.savetxt(handle, columns, fmt="%d", delimiter=",")


def _write_binary(period: EventPeriod, path: Path) -> None:
    if period.sensor.width > 0xFFFF or period.sensor.height > 0xFFFF:
        raise ValidationError("binary format caps sensor dimensions at 65535")
    records = np.zeros(len(period), dtype=_RECORD_DTYPE)
    records["t"] = period.t
    records["x"] = period.x
    records["y"] = period.y
    records["p"] = period.p
    with open(path, "wb") as handle:
        handle.write(
            _HEADER.pack(
                BINARY_MAGIC,
                period.sensor.width,
                period.sensor.height,
                period.t_start,
                period.duration,
            )
        )
        handle.write(records.tobytes())


def load_events(
    path,
    sensor: SensorGeometry | None = None,
    *,
    t_start: int | None = None,
    duration: int | None = None,
) -> EventPeriod:
    """Load a period from a CSV or binary event file.

    Binary files carry their own geometry and period bounds; a ``sensor``
    argument must then agree with the header. CSV files need ``sensor``, and
    take period bounds from the arguments, the metadata comments, or, as a
    last resort, the timestamp range.
    """
    path = Path(path)
    with open(path, "rb") as handle:
        magic = handle.read(4)
    if magic == BINARY_MAGIC:
        return _load_binary(path, sensor)
    if path.suffix.lower() in (".evd", ".bin"):
        raise EventFormatError(f"bad magic {magic!r}, expected {BINARY_MAGIC!r}", path=path)
    return _load_csv(path, sensor, t_start=t_start, duration=duration)


def _load_binary(path: Path, sensor: SensorGeometry | None) -> EventPeriod:
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise EventFormatError("truncated header", path=path)
    magic, width, height, t_start, duration = _HEADER.unpack_from(raw)
    if magic != BINARY_MAGIC:
        raise EventFormatError(f"bad magic {magic!r}", path=path)
    body = raw[_HEADER.size :]
    if len(body) % _RECORD_DTYPE.itemsize:
        raise EventFormatError(
            f"record section of {len(body)} bytes is not a multiple of 16", path=path
        )
    file_sensor = SensorGeometry(width, height)
    if sensor is not None and sensor != file_sensor:
        raise ValidationError(
            f"sensor {sensor.width}x{sensor.height} disagrees with file header "
            f"{width}x{height}"
        )
    records = np.frombuffer(body, dtype=_RECORD_DTYPE)
    t = records["t"]
    if t.size and int(t.max()) > np.iinfo(np.int64).max:
        raise EventFormatError("timestamp overflows signed 64-bit range", path=path)
    return EventPeriod(
        records["t"].astype(np.int64),
        records["x"].astype(np.int32),
        records["y"].astype(np.int32),
        records["p"].astype(np.uint8),
        t_start=int(t_start),
        duration=int(duration),
        sensor=file_sensor,
    )


def _load_csv(
    path: Path,
    sensor: SensorGeometry | None,
    *,
    t_start: int | None,
    duration: int | None,
) -> EventPeriod:
    if sensor is None:
        raise ValidationError("CSV event streams need explicit sensor geometry")
    meta: dict[str, int] = {}
    ts: list[int] = []
    xs: list[int] = []
    ys: list[int] = []
    ps: list[int] = []
    header_seen = False
    with open(path, "r", encoding="ascii") as handle:
        for line_no, line in enumerate(handle, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                body = text.lstrip("#").strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    try:
                        meta[key.strip()] = int(value.strip())
                    except ValueError:
                        pass
                continue
            fields = text.split(",")
            if not header_seen and not ts and fields[0].strip() and not _is_int(fields[0]):
                if [f.strip() for f in fields] != _CSV_HEADER.split(","):
                    raise EventFormatError(
                        f"unrecognized header {text!r}", path=path, line=line_no
                    )
                header_seen = True
                continue
            if len(fields) != 4:
                raise EventFormatError(
                    f"expected 4 fields, got {len(fields)}", path=path, line=line_no
                )
            try:
                row = [int(f) for f in fields]
            except ValueError:
                raise EventFormatError(
                    f"non-integer field in {text!r}", path=path, line=line_no
                ) from None
            ts.append(row[0])
            xs.append(row[1])
            ys.append(row[2])
            ps.append(row[3])
    if t_start is None:
        t_start = meta.get("t_start_us")
    if duration is None:
        duration = meta.get("duration_us")
    if t_start is None:
        t_start = min(ts) if ts else 0
    if duration is None:
        if not ts:
            raise ValidationError(
                f"{path}: cannot infer the duration of an empty stream; "
                "declare duration_us or pass duration"
            )
        duration = max(ts) - t_start + 1
    return EventPeriod(
        np.asarray(ts, dtype=np.int64),
        np.asarray(xs, dtype=np.int32),
        np.asarray(ys, dtype=np.int32),
        np.asarray(ps, dtype=np.uint8),
        t_start=t_start,
        duration=duration,
        sensor=sensor,
    )


def _is_int(text: str) -> bool:
    try:
        int(text)
    except ValueError:
        return False
    return True


def write_annotation(record: AnnotationRecord, path) -> None:
    """Write one period's boxes as a JSON record; scores only when present."""
    boxes = []
    for box in record.boxes:
        entry: dict = {
            "x": box.bbox.x,
            "y": box.bbox.y,
            "w": box.bbox.w,
            "h": box.bbox.h,
        }
        if box.s_p is not None:
            entry["s_p"] = int(box.s_p)
        if box.s_s is not None:
            entry["s_s"] = box.s_s if isinstance(box.s_s, int) else float(box.s_s)
        boxes.append(entry)
    payload = {
        "file": record.file,
        "width": record.width,
        "height": record.height,
        "duration_us": record.duration_us,
        "boxes": boxes,
    }
    with open(path, "w", encoding="ascii") as handle:
        json.dump(payload, handle)
        handle.write("\n")


def write_detections(
    detections: Sequence,
    path,
    *,
    source: str,
    sensor: SensorGeometry,
    duration_us: int,
) -> None:
    """Write ranked detections for one period as a JSON record."""
    record = AnnotationRecord(
        file=source,
        width=sensor.width,
        height=sensor.height,
        duration_us=duration_us,
        boxes=tuple(
            BoxRecord(bbox=d.bbox, s_p=int(d.s_p), s_s=d.s_s) for d in detections
        ),
    )
    write_annotation(record, path)


def load_annotations(path) -> AnnotationRecord:
    """Load a detection or ground-truth JSON record."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="ascii"))
    except json.JSONDecodeError as err:
        raise EventFormatError(f"invalid JSON: {err}", path=path) from None
    try:
        boxes = tuple(
            BoxRecord(
                bbox=BBox(int(b["x"]), int(b["y"]), int(b["w"]), int(b["h"])),
                s_p=None if b.get("s_p") is None else int(b["s_p"]),
                s_s=None if b.get("s_s") is None else b["s_s"],
            )
            for b in payload["boxes"]
        )
        return AnnotationRecord(
            file=str(payload["file"]),
            width=int(payload["width"]),
            height=int(payload["height"]),
            duration_us=int(payload["duration_us"]),
            boxes=boxes,
        )
    except (KeyError, TypeError) as err:
        raise EventFormatError(f"missing or malformed field: {err}", path=path) from None


def write_pgm(gray: np.ndarray, path) -> None:
    """Write an 8-bit grayscale image as binary PGM (P5)."""
    image = np.ascontiguousarray(gray, dtype=np.uint8)
    if image.ndim != 2:
        raise ValidationError("PGM export needs a two-dimensional gray image")
    height, width = image.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + image.tobytes())
