"""Frame records: the post-inference evidence for one video frame.

One frame is one JSON object per line::

    {"frame_id": 12, "timestamp_ms": 400,
     "detections": [{"label": "traffic cone", "confidence": 0.31, "box": [x, y, w, h]}],
     "texts": [{"string": "ROAD WORK AHEAD", "confidence": 0.93, "box": [x, y, w, h]}],
     "truth": {"construction": true, "site_id": 3, "angle_deg": 45, "distance_m": 8}}

``truth`` is optional, and so are the three static-grid keys inside it.
Unknown keys are ignored anywhere in the record.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, NamedTuple, Optional, Union

from .errors import ParseError, StreamError, ValidationError

SITE_IDS = range(1, 8)
ANGLES_DEG = (0, 15, 30, 45, 60, 75)
DISTANCES_M = (2, 4, 6, 8, 10)

Number = Union[int, float]


class BoundingBox(NamedTuple):
    x: Number
    y: Number
    w: Number
    h: Number

    @property
    def area(self) -> float:
        return self.w * self.h


class Detection(NamedTuple):
    label: str
    confidence: float
    box: BoundingBox


class TextObservation(NamedTuple):
    string: str
    confidence: float
    box: BoundingBox


@dataclass(frozen=True)
class GroundTruth:
    construction: bool
    site_id: Optional[int] = None
    angle_deg: Optional[int] = None
    distance_m: Optional[int] = None

    @property
    def is_static_point(self) -> bool:
        return self.site_id is not None


@dataclass(frozen=True)
class FrameRecord:
    frame_id: int
    timestamp_ms: int
    detections: tuple[Detection, ...] = ()
    texts: tuple[TextObservation, ...] = ()
    truth: Optional[GroundTruth] = None


# -- validation ---------------------------------------------------------------

def _is_int(v) -> bool:
    return type(v) is int


def _is_number(v) -> bool:
    t = type(v)
    return (t is int or t is float) and math.isfinite(v)


def _box(raw, field: str) -> BoundingBox:
    if type(raw) is not list or len(raw) != 4:
        raise ValidationError(field, "expected [x, y, w, h]")
    x, y, w, h = raw
    if not (_is_number(x) and _is_number(y) and _is_number(w) and _is_number(h)):
        raise ValidationError(field, "coordinates must be finite numbers")
    if x < 0 or y < 0:
        raise ValidationError(field, f"origin must be non-negative, got ({x}, {y})")
    if w <= 0 or h <= 0:
        raise ValidationError(field, f"width and height must be positive, got ({w}, {h})")
    return BoundingBox(x, y, w, h)


def _confidence(raw, field: str) -> float:
    if not _is_number(raw) or not 0.0 <= raw <= 1.0:
        raise ValidationError(field, f"must be a number in [0, 1], got {raw!r}")
    return raw


_NUMS = frozenset((int, float))
_INF = math.inf
_tuple_new = tuple.__new__


def _detection_slow(d, i: int) -> Detection:
    if type(d) is not dict:
        raise ValidationError(f"detections[{i}]", "expected an object")
    label = d.get("label")
    if type(label) is not str or not label.strip():
        raise ValidationError(f"detections[{i}].label", "must be a non-empty string")
    return Detection(
        label,
        _confidence(d.get("confidence"), f"detections[{i}].confidence"),
        _box(d.get("box"), f"detections[{i}].box"),
    )


def _text_slow(t, i: int) -> TextObservation:
    if type(t) is not dict:
        raise ValidationError(f"texts[{i}]", "expected an object")
    string = t.get("string")
    if type(string) is not str:
        raise ValidationError(f"texts[{i}].string", "must be a string")
    return TextObservation(
        string,
        _confidence(t.get("confidence"), f"texts[{i}].confidence"),
        _box(t.get("box"), f"texts[{i}].box"),
    )


def _valid_box(box) -> bool:
    if type(box) is not list or len(box) != 4:
        return False
    x, y, w, h = box
    nums = _NUMS
    return (type(x) in nums and type(y) in nums and type(w) in nums and type(h) in nums
            and 0 <= x < _INF and 0 <= y < _INF and 0 < w < _INF and 0 < h < _INF)


def _detections(raw) -> tuple[Detection, ...]:
    if type(raw) is not list:
        raise ValidationError("detections", "expected a list")
    out = []
    append = out.append
    nums = _NUMS
    # fast path: plain checks inline; the slow path only runs to name the bad field
    for i, d in enumerate(raw):
        try:
            label, conf, box = d["label"], d["confidence"], d["box"]
            # _valid_box inlined; this loop sees every detection of every frame
            x, y, w, h = box
            ok = (type(label) is str and type(conf) in nums and 0 <= conf <= 1
                  and type(box) is list
                  and type(x) in nums and type(y) in nums and type(w) in nums and type(h) in nums
                  and 0 <= x < _INF and 0 <= y < _INF and 0 < w < _INF and 0 < h < _INF
                  and label.strip() != "")
        except (KeyError, TypeError, ValueError):
            ok = False
        if not ok:
            append(_detection_slow(d, i))
            continue
        append(_tuple_new(Detection, (label, conf, _tuple_new(BoundingBox, box))))
    return tuple(out)


def _texts(raw) -> tuple[TextObservation, ...]:
    if type(raw) is not list:
        raise ValidationError("texts", "expected a list")
    out = []
    nums = _NUMS
    for i, t in enumerate(raw):
        try:
            string, conf, box = t["string"], t["confidence"], t["box"]
            ok = type(string) is str and type(conf) in nums and 0 <= conf <= 1 and _valid_box(box)
        except (KeyError, TypeError):
            ok = False
        if not ok:
            out.append(_text_slow(t, i))
            continue
        out.append(_tuple_new(TextObservation, (string, conf, _tuple_new(BoundingBox, box))))
    return tuple(out)


def _truth(raw) -> Optional[GroundTruth]:
    if raw is None:
        return None
    if type(raw) is not dict:
        raise ValidationError("truth", "expected an object")
    construction = raw.get("construction")
    if type(construction) is not bool:
        raise ValidationError("truth.construction", "must be a boolean")
    site, angle, dist = raw.get("site_id"), raw.get("angle_deg"), raw.get("distance_m")
    present = [v is not None for v in (site, angle, dist)]
    if any(present) and not all(present):
        raise ValidationError(
            "truth", "site_id, angle_deg and distance_m must be given together"
        )
    if all(present):
        if not _is_int(site) or site not in SITE_IDS:
            raise ValidationError("truth.site_id", f"must be an integer 1-7, got {site!r}")
        if not _is_int(angle) or angle not in ANGLES_DEG:
            raise ValidationError("truth.angle_deg", f"must be one of {ANGLES_DEG}, got {angle!r}")
        if not _is_int(dist) or dist not in DISTANCES_M:
            raise ValidationError("truth.distance_m", f"must be one of {DISTANCES_M}, got {dist!r}")
    return GroundTruth(construction, site, angle, dist)


def frame_from_obj(obj: dict) -> FrameRecord:
    """Build a validated FrameRecord from an already-decoded JSON object."""
    frame_id = obj.get("frame_id")
    if not _is_int(frame_id):
        raise ValidationError("frame_id", f"must be an integer, got {frame_id!r}")
    ts = obj.get("timestamp_ms")
    if not _is_int(ts):
        raise ValidationError("timestamp_ms", f"must be an integer, got {ts!r}")
    return FrameRecord(
        frame_id,
        ts,
        _detections(obj.get("detections", [])),
        _texts(obj.get("texts", [])),
        _truth(obj.get("truth")),
    )


def _reject_constant(name):
    raise ValueError(f"{name} is not a valid number")


_decoder = json.JSONDecoder(parse_constant=_reject_constant)


def _decode(line: str):
    try:
        return _decoder.decode(line)
    except ValueError as exc:
        if isinstance(exc, json.JSONDecodeError):
            raise
        raise json.JSONDecodeError(str(exc), line, 0) from None


def parse_frame_line(line: Union[str, bytes]) -> FrameRecord:
    if isinstance(line, (bytes, bytearray)):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("invalid UTF-8", offset=exc.start) from None
    try:
        obj = _decode(line)
    except json.JSONDecodeError as exc:
        offset = len(line[: exc.pos].encode("utf-8"))
        raise ParseError(f"malformed JSON: {exc.msg}", offset=offset) from None
    if type(obj) is not dict:
        raise ParseError("expected a JSON object", offset=0)
    return frame_from_obj(obj)


# -- serialization ------------------------------------------------------------

def frame_to_obj(frame: FrameRecord) -> dict:
    obj = {
        "frame_id": frame.frame_id,
        "timestamp_ms": frame.timestamp_ms,
        "detections": [
            {"label": d.label, "confidence": d.confidence, "box": list(d.box)}
            for d in frame.detections
        ],
        "texts": [
            {"string": t.string, "confidence": t.confidence, "box": list(t.box)}
            for t in frame.texts
        ],
    }
    if frame.truth is not None:
        truth = {"construction": frame.truth.construction}
        if frame.truth.is_static_point:
            truth["site_id"] = frame.truth.site_id
            truth["angle_deg"] = frame.truth.angle_deg
            truth["distance_m"] = frame.truth.distance_m
        obj["truth"] = truth
    return obj


def serialize_frame(frame: FrameRecord) -> str:
    """One JSONL line (without the trailing newline)."""
    return json.dumps(frame_to_obj(frame), separators=(",", ":"), ensure_ascii=False)


def write_frames(frames: Iterable[FrameRecord], out: IO[str]) -> int:
    n = 0
    for frame in frames:
        out.write(serialize_frame(frame))
        out.write("\n")
        n += 1
    return n


# -- streaming ----------------------------------------------------------------

def stream_frames(source: Union[IO, Iterable[Union[str, bytes]]]) -> Iterator[FrameRecord]:
    """Yield frames in file order from a text/binary stream or iterable of lines.

    Blank lines are skipped. Gaps in ``frame_id`` are allowed; a repeated or
    decreasing id raises StreamError.
    """
    previous = None
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        try:
            frame = parse_frame_line(line)
        except ParseError as exc:
            raise ParseError(exc.reason, offset=exc.offset, line=lineno) from None
        except ValidationError as exc:
            raise ValidationError(exc.field, exc.reason, line=lineno) from None
        if previous is not None and frame.frame_id <= previous:
            raise StreamError(previous, frame.frame_id, line=lineno)
        previous = frame.frame_id
        yield frame


def read_frames(path) -> list[FrameRecord]:
    with open(path, "rb") as fh:
        return list(stream_frames(fh))


def frames_from_text(text: str) -> list[FrameRecord]:
    return list(stream_frames(io.StringIO(text)))
