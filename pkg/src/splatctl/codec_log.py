"""Per-frame encoder statistics: parsing, validation, canonical container.

Two input formats are supported.

x265 CSV (``csv-log-level=1``): one header row followed by one row per
encoded frame, in encode order. Column order varies between encoder
versions, so headers are matched case-insensitively after stripping
everything that is not a letter or digit. Accepted aliases:

========== =====================================================
field       header aliases (normalized)
========== =====================================================
display     poc, displayindex, displayorder, frame, frameindex
encode      encodeorder, codingorder, order
type        type, frametype, slicetype
qp          qp, frameqp, avgqp, averageqp
bits        bits, bit, framebits, numberofbits, size
psnr_y      psnry, ypsnr
psnr_u      psnru, upsnr
psnr_v      psnrv, vpsnr
psnr_yuv    psnryuv, yuvpsnr, psnr, globalpsnr
ssim        ssim
gop_pos     gopposition, goppos, gopid
tlayer      temporallayer, temporalid, tid, layer
========== =====================================================

Unrecognized columns (skip/merge percentages, rate factors, ...) are kept
verbatim in each record's ``extras`` map and never interpreted.

Generic JSON: an array of objects whose keys mirror FrameRecord field
names; used for fixtures and as the canonical interchange format emitted
by ``serialize_generic_json``.

Parsing never enforces value-domain invariants (QP range, positive bits):
those are reported by :func:`validate`, so a log with a bad value still
parses and the caller decides whether to accept it.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import EmptyLog, MalformedRow, MissingColumn, SchemaError

QP_MAX = 63.0


class FrameType(Enum):
    I = "I"
    P = "P"
    B = "B"


class LogSource(Enum):
    X265_CSV = "x265csv"
    GENERIC_JSON = "json"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class FrameRecord:
    """Statistics of one encoded frame, keyed by presentation order."""

    display_index: int
    frame_type: FrameType
    qp: float
    bits: float
    encode_order: int = -1
    psnr_y: float | None = None
    psnr_u: float | None = None
    psnr_v: float | None = None
    psnr_yuv: float | None = None
    ssim: float | None = None
    gop_position: int | None = None
    temporal_layer: int | None = None
    extras: dict[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.encode_order < 0:
            object.__setattr__(self, "encode_order", self.display_index)


@dataclass(frozen=True)
class FrameLogSeries:
    """Frame records sorted by display index, gap-free from 0."""

    records: tuple[FrameRecord, ...]
    source: LogSource = field(default=LogSource.GENERIC_JSON, compare=False)

    def __post_init__(self):
        if not self.records:
            raise EmptyLog("series contains no frames")
        ordered = tuple(sorted(self.records, key=lambda r: r.display_index))
        object.__setattr__(self, "records", ordered)
        seen = [r.display_index for r in ordered]
        for pos, idx in enumerate(seen):
            if pos > 0 and idx == seen[pos - 1]:
                raise SchemaError(f"display_index={idx}", "duplicate display index")
            if idx != pos:
                raise SchemaError(f"display_index={idx}", f"expected {pos} (indices must run 0..N-1)")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def qps(self) -> list[float]:
        return [r.qp for r in self.records]

    def bits(self) -> list[float]:
        return [r.bits for r in self.records]


@dataclass
class ValidationReport:
    """Per-row findings; ``row`` is the record's display index."""

    errors: list[tuple[int, str, str]] = field(default_factory=list)
    warnings: list[tuple[int, str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def lines(self) -> list[str]:
        out = [f"error: row {r} field {f}: {m}" for r, f, m in self.errors]
        out += [f"warning: row {r} field {f}: {m}" for r, f, m in self.warnings]
        return out


_COLUMN_ALIASES: dict[str, tuple[str, ...]] = {
    "display_index": ("poc", "displayindex", "displayorder", "frame", "frameindex"),
    "encode_order": ("encodeorder", "codingorder", "order"),
    "frame_type": ("type", "frametype", "slicetype"),
    "qp": ("qp", "frameqp", "avgqp", "averageqp"),
    "bits": ("bits", "bit", "framebits", "numberofbits", "size"),
    "psnr_y": ("psnry", "ypsnr"),
    "psnr_u": ("psnru", "upsnr"),
    "psnr_v": ("psnrv", "vpsnr"),
    "psnr_yuv": ("psnryuv", "yuvpsnr", "psnr", "globalpsnr"),
    "ssim": ("ssim",),
    "gop_position": ("gopposition", "goppos", "gopid"),
    "temporal_layer": ("temporallayer", "temporalid", "tid", "layer"),
}

_REQUIRED = ("display_index", "frame_type", "qp", "bits")

_FRAME_TYPE_MAP = {
    "i": FrameType.I,
    "idr": FrameType.I,
    "p": FrameType.P,
    "b": FrameType.B,
}


def _normalize_header(name: str) -> str:
    return re.sub(r"[^a-z0-9]", "", name.lower())


def _match_columns(header_cells: list[str]) -> tuple[dict[str, int], dict[int, str]]:
    """Map canonical field -> column index; leftovers -> extras by index."""
    assigned: dict[str, int] = {}
    extras: dict[int, str] = {}
    normalized = [_normalize_header(c) for c in header_cells]
    for col, norm in enumerate(normalized):
        hit = None
        for fieldname, aliases in _COLUMN_ALIASES.items():
            if norm in aliases and fieldname not in assigned:
                hit = fieldname
                break
        if hit is not None:
            assigned[hit] = col
        elif norm:
            extras[col] = header_cells[col].strip()
    return assigned, extras


def _decode(text: bytes | str) -> str:
    if isinstance(text, bytes):
        return text.decode("utf-8-sig")
    return text.lstrip("﻿")


def _parse_float(cell: str, line: int, name: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise MalformedRow(line, f"field {name}: expected a number, got {cell!r}") from None


def _parse_int(cell: str, line: int, name: str) -> int:
    value = _parse_float(cell, line, name)
    if value != int(value):
        raise MalformedRow(line, f"field {name}: expected an integer, got {cell!r}")
    return int(value)


def _parse_frame_type(cell: str, line: int) -> FrameType:
    key = cell.strip().strip("-").lower().replace("slice", "").strip("-")
    if key in _FRAME_TYPE_MAP:
        return _FRAME_TYPE_MAP[key]
    raise MalformedRow(line, f"unknown frame type {cell!r}")


def parse_x265_csv(text: bytes | str) -> FrameLogSeries:
    """Parse an x265 per-frame CSV log into a canonical series.

    Raises MissingColumn, MalformedRow (with 1-based file line number), or
    EmptyLog. Rows may arrive in encode order; the result is sorted by
    display index (POC).
    """
    content = _decode(text)
    lines = [ln for ln in content.splitlines() if ln.strip().strip(",")]
    if not lines:
        raise EmptyLog("no header row found")
    header = [c.strip() for c in lines[0].split(",")]
    columns, extra_cols = _match_columns(header)
    for required in _REQUIRED:
        if required not in columns:
            raise MissingColumn(required)
    if len(lines) == 1:
        raise EmptyLog("header present but no frame rows")

    records = []
    for lineno, raw in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in raw.split(",")]
        if len(cells) < max(columns.values()) + 1:
            raise MalformedRow(lineno, f"expected at least {max(columns.values()) + 1} cells, got {len(cells)}")

        def cell(fieldname: str) -> str | None:
            col = columns.get(fieldname)
            if col is None or col >= len(cells) or not cells[col]:
                return None
            return cells[col]

        opt_float = {}
        for name in ("psnr_y", "psnr_u", "psnr_v", "psnr_yuv", "ssim"):
            value = cell(name)
            opt_float[name] = None if value is None else _parse_float(value, lineno, name)
        opt_int = {}
        for name in ("gop_position", "temporal_layer"):
            value = cell(name)
            opt_int[name] = None if value is None else _parse_int(value, lineno, name)
        encode_cell = cell("encode_order")
        display_index = _parse_int(cells[columns["display_index"]], lineno, "display_index")
        records.append(
            FrameRecord(
                display_index=display_index,
                frame_type=_parse_frame_type(cells[columns["frame_type"]], lineno),
                qp=_parse_float(cells[columns["qp"]], lineno, "qp"),
                bits=_parse_float(cells[columns["bits"]], lineno, "bits"),
                encode_order=display_index if encode_cell is None else _parse_int(encode_cell, lineno, "encode_order"),
                **opt_float,
                **opt_int,
                extras={name: cells[col] for col, name in extra_cols.items() if col < len(cells) and cells[col]},
            )
        )
    return FrameLogSeries(tuple(records), source=LogSource.X265_CSV)


_JSON_OPTIONAL_FLOAT = ("psnr_y", "psnr_u", "psnr_v", "psnr_yuv", "ssim")
_JSON_OPTIONAL_INT = ("gop_position", "temporal_layer")


def _json_number(obj: dict, key: str, path: str, required: bool = True) -> float | None:
    if key not in obj:
        if required:
            raise SchemaError(f"{path}.{key}", "missing required key")
        return None
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{path}.{key}", f"expected a number, got {type(value).__name__}")
    return float(value)


def _json_int(obj: dict, key: str, path: str, required: bool = True) -> int | None:
    value = _json_number(obj, key, path, required)
    if value is None:
        return None
    if value != int(value):
        raise SchemaError(f"{path}.{key}", f"expected an integer, got {value}")
    return int(value)


def parse_generic_json(text: bytes | str) -> FrameLogSeries:
    """Parse the array-of-objects interchange format.

    Raises SchemaError carrying the JSON path of the offending value, or
    EmptyLog for an empty array.
    """
    content = _decode(text)
    try:
        doc = json.loads(content)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from None
    if not isinstance(doc, list):
        raise SchemaError("$", f"expected an array, got {type(doc).__name__}")
    if not doc:
        raise EmptyLog("JSON array is empty")

    records = []
    for i, obj in enumerate(doc):
        path = f"$[{i}]"
        if not isinstance(obj, dict):
            raise SchemaError(path, f"expected an object, got {type(obj).__name__}")
        raw_type = obj.get("frame_type")
        if not isinstance(raw_type, str) or raw_type.upper() not in ("I", "P", "B"):
            raise SchemaError(f"{path}.frame_type", f"expected one of I/P/B, got {raw_type!r}")
        display_index = _json_int(obj, "display_index", path)
        encode_order = _json_int(obj, "encode_order", path, required=False)
        extras = obj.get("extras", {})
        if not isinstance(extras, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in extras.items()
        ):
            raise SchemaError(f"{path}.extras", "expected a string-to-string map")
        records.append(
            FrameRecord(
                display_index=display_index,
                frame_type=FrameType[raw_type.upper()],
                qp=_json_number(obj, "qp", path),
                bits=_json_number(obj, "bits", path),
                encode_order=display_index if encode_order is None else encode_order,
                **{k: _json_number(obj, k, path, required=False) for k in _JSON_OPTIONAL_FLOAT},
                **{k: _json_int(obj, k, path, required=False) for k in _JSON_OPTIONAL_INT},
                extras=dict(extras),
            )
        )
    return FrameLogSeries(tuple(records), source=LogSource.GENERIC_JSON)


def serialize_generic_json(series: FrameLogSeries) -> str:
    """Emit the canonical JSON form; parse_generic_json round-trips it."""
    rows = []
    for r in series:
        row: dict = {
            "display_index": r.display_index,
            "encode_order": r.encode_order,
            "frame_type": r.frame_type.value,
            "qp": r.qp,
            "bits": r.bits,
        }
        for name in _JSON_OPTIONAL_FLOAT + _JSON_OPTIONAL_INT:
            value = getattr(r, name)
            if value is not None:
                row[name] = value
        if r.extras:
            row["extras"] = dict(sorted(r.extras.items()))
        rows.append(row)
    return json.dumps(rows, indent=2, sort_keys=True)


def validate(series: FrameLogSeries) -> ValidationReport:
    """Check value-domain invariants; always returns a report.

    Errors: QP outside [0, 63], non-positive bits, non-finite or
    non-positive PSNR, SSIM outside [0, 1], negative GOP position or
    temporal layer. Warnings: an I-frame coded with fewer bits than an
    adjacent non-I frame (intra frames normally dominate their GOP).
    """
    report = ValidationReport()
    for r in series:
        row = r.display_index
        if not (0.0 <= r.qp <= QP_MAX):
            report.errors.append((row, "qp", f"qp {r.qp} outside [0, {QP_MAX:g}]"))
        if not r.bits > 0:
            report.errors.append((row, "bits", "bits must be positive"))
        for name in ("psnr_y", "psnr_u", "psnr_v", "psnr_yuv"):
            value = getattr(r, name)
            if value is not None and not (math.isfinite(value) and value > 0):
                report.errors.append((row, name, f"must be finite and positive, got {value}"))
        if r.ssim is not None and not (0.0 <= r.ssim <= 1.0):
            report.errors.append((row, "ssim", f"ssim {r.ssim} outside [0, 1]"))
        for name in ("gop_position", "temporal_layer"):
            value = getattr(r, name)
            if value is not None and value < 0:
                report.errors.append((row, name, "must be non-negative"))

    records = series.records
    for i, r in enumerate(records):
        if r.frame_type is not FrameType.I:
            continue
        for j in (i - 1, i + 1):
            if 0 <= j < len(records) and records[j].frame_type is not FrameType.I and r.bits < records[j].bits:
                report.warnings.append(
                    (r.display_index, "bits", f"I-frame coded smaller than neighboring {records[j].frame_type.value}-frame {records[j].display_index}")
                )
                break
    return report
