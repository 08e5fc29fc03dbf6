"""Template documents: a reference page image plus annotated field regions.

A template is stored as JSON with two top-level keys: ``shapes`` (the field
quads) and ``imageData`` (base64 PNG of the blank form).  ``imagePath`` may
stand in for ``imageData`` when the image lives next to the file.  Keys this
code does not understand are carried through serialization untouched.
"""

from __future__ import annotations

import base64
import binascii
import enum
import json
import os
from dataclasses import dataclass, field

from .imaging import RasterImage, decode_png_bytes, encode_png_bytes, read_image, ImagingError


class TemplateError(Exception):
    pass


class SchemaError(TemplateError):
    """Required key missing or of the wrong shape."""


class ValidationError(TemplateError):
    """Structurally sound JSON with inadmissible content."""


class ImageDecodeError(TemplateError):
    """imageData/imagePath present but not decodable into an image."""


class FieldType(str, enum.Enum):
    SINGLE_LINE = "Single Line"
    MULTIPLE_LINES = "Multiple Lines"
    NUMBER = "Number"
    DATE = "Date"
    DEFINED_LABEL = "Defined Label"


_KNOWN_SHAPE_KEYS = {"id", "type", "points", "possibilities"}
_KNOWN_TOP_KEYS = {"shapes", "imageData", "imagePath"}


@dataclass(eq=False)
class TemplateShape:
    shape_id: str
    field_type: FieldType
    points: list[tuple[float, float]]
    possibilities: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)


@dataclass(eq=False)
class Template:
    shapes: list[TemplateShape]
    image: RasterImage
    extra: dict = field(default_factory=dict)


def _require(obj: dict, key: str, kind, where: str):
    if key not in obj:
        raise SchemaError(f"{where}: missing key {key!r}")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise SchemaError(f"{where}: key {key!r} has wrong type {type(val).__name__}")
    return val


def _parse_points(raw, where: str) -> list[tuple[float, float]]:
    if not isinstance(raw, list) or len(raw) != 4:
        raise ValidationError(f"{where}: points must be a list of exactly 4 [x, y] pairs")
    pts = []
    for p in raw:
        if (
            not isinstance(p, (list, tuple))
            or len(p) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in p)
        ):
            raise ValidationError(f"{where}: each point must be an [x, y] number pair")
        pts.append((float(p[0]), float(p[1])))
    return pts


def _parse_shape(raw: dict, index: int) -> TemplateShape:
    where = f"shapes[{index}]"
    if not isinstance(raw, dict):
        raise SchemaError(f"{where}: shape must be an object")
    shape_id = _require(raw, "id", str, where)
    type_str = _require(raw, "type", str, where)
    try:
        ftype = FieldType(type_str)
    except ValueError:
        raise ValidationError(f"{where}: unknown field type {type_str!r}") from None
    points = _parse_points(_require(raw, "points", None, where), where)
    possibilities = raw.get("possibilities", [])
    if not isinstance(possibilities, list) or not all(isinstance(s, str) for s in possibilities):
        raise ValidationError(f"{where}: possibilities must be a list of strings")
    if ftype is FieldType.DEFINED_LABEL and len(possibilities) == 0:
        raise ValidationError(f"{where}: Defined Label fields need a non-empty possibilities list")
    extra = {k: v for k, v in raw.items() if k not in _KNOWN_SHAPE_KEYS}
    return TemplateShape(shape_id, ftype, points, list(possibilities), extra)


def parse_template(data: str | bytes | dict, base_dir: str | None = None) -> Template:
    """Parse template JSON (text, bytes or an already-decoded dict)."""
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("template root must be a JSON object")

    raw_shapes = _require(data, "shapes", list, "template")
    shapes = [_parse_shape(s, i) for i, s in enumerate(raw_shapes)]
    seen: set[str] = set()
    for s in shapes:
        if s.shape_id in seen:
            raise ValidationError(f"duplicate shape id {s.shape_id!r}")
        seen.add(s.shape_id)

    has_data = "imageData" in data
    has_path = "imagePath" in data
    if has_data and has_path:
        raise SchemaError("template carries both imageData and imagePath")
    if has_data:
        raw = data["imageData"]
        if not isinstance(raw, str):
            raise SchemaError("imageData must be a base64 string")
        try:
            png = base64.b64decode(raw, validate=True)
        except (binascii.Error, ValueError) as exc:
            raise ImageDecodeError(f"imageData is not valid base64: {exc}") from exc
        try:
            image = decode_png_bytes(png)
        except ImagingError as exc:
            raise ImageDecodeError(str(exc)) from exc
    elif has_path:
        path = data["imagePath"]
        if not isinstance(path, str):
            raise SchemaError("imagePath must be a string")
        if base_dir is not None and not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        try:
            image = read_image(path)
        except ImagingError as exc:
            raise ImageDecodeError(str(exc)) from exc
    else:
        raise SchemaError("template needs imageData or imagePath")

    extra = {k: v for k, v in data.items() if k not in _KNOWN_TOP_KEYS}
    return Template(shapes, image, extra)


def serialize_template(template: Template) -> str:
    """Canonical JSON: sorted keys, two-space indent, raw (non-escaped) unicode,
    image always inlined as base64 PNG."""
    doc: dict = dict(template.extra)
    doc["shapes"] = []
    for s in template.shapes:
        entry: dict = dict(s.extra)
        entry["id"] = s.shape_id
        entry["type"] = s.field_type.value
        entry["points"] = [[p[0], p[1]] for p in s.points]
        entry["possibilities"] = list(s.possibilities)
        doc["shapes"].append(entry)
    doc["imageData"] = base64.b64encode(encode_png_bytes(template.image)).decode("ascii")
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False)


def load_template(path: str) -> Template:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_template(text, base_dir=os.path.dirname(os.path.abspath(path)))


def save_template(template: Template, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_template(template))
