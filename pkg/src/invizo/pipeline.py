"""End-to-end document pipeline: preprocess, register, crop, recognize,
enhance.

Given a filled-in test image and a template (reference image + field
quadrilaterals), the pipeline:

1. converts both images to grayscale, keeping the originals;
2. denoises and binarizes a working copy of the test image and cleans it
   with a morphological opening on the ink;
3. detects keypoints on the two grayscale *originals*, matches their
   descriptors and estimates a template-to-test homography with RANSAC;
4. projects every template quad into test-image coordinates (falling
   back to the unprojected quads, flagged ``fallback``, when
   registration fails);
5. rectifies each quad into an axis-aligned crop, runs the recognizer on
   it (line by line for multi-line fields), and
6. applies the field-type-specific text enhancement.

Exactly one prediction is produced per template shape, in template
order, and the JSON rendering is deterministic (sorted keys).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from invizo.enhancement import Prediction, enhance
from invizo.imaging.filters import binarize, fnlm_denoise
from invizo.imaging.morphology import open_ink
from invizo.imaging.raster import RasterImage, to_grayscale
from invizo.recognizer.decoding import recognize
from invizo.recognizer.model import LineRecognizer
from invizo.recognizer.vocab import Vocabulary
from invizo.registration.homography import (
    InsufficientCorrespondences,
    RansacConfig,
    RegistrationFailed,
    estimate_homography,
    project_points,
)
from invizo.registration.keypoints import detect_keypoints
from invizo.registration.descriptors import compute_descriptors
from invizo.registration.matching import match_descriptors
from invizo.registration.warp import DegenerateRegion, warp_extract
from invizo.segmentation import segment_lines_projection
from invizo.template import FieldType, Template

REGISTERED = "homography"
FALLBACK = "fallback"


@dataclass(frozen=True)
class PipelineConfig:
    """Pipeline switches; overridable via a JSON file named by the
    ``INVIZO_CONFIG`` environment variable."""

    denoise: bool = True
    recognize_from_raw: bool = True
    split_multi_line: bool = True
    max_decode_len: int = 128
    binarize_threshold: int | None = None  # None -> automatic (Otsu)
    model_checkpoint: str | None = None
    seed: int = 0
    ransac: RansacConfig = field(default_factory=RansacConfig)

    @classmethod
    def from_env(cls) -> "PipelineConfig":
        path = os.environ.get("INVIZO_CONFIG")
        if not path:
            return cls()
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {"denoise", "recognize_from_raw", "split_multi_line",
                 "max_decode_len", "binarize_threshold", "model_checkpoint",
                 "seed"}
        unknown = set(data) - known - {"ransac"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {k: data[k] for k in known if k in data}
        if "ransac" in data:
            kwargs["ransac"] = RansacConfig(**data["ransac"])
        return cls(**kwargs)


@dataclass
class RegistrationReport:
    method: str  # "homography" or "fallback"
    n_inliers: int = 0
    mean_error: float = 0.0
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "n_inliers": self.n_inliers,
            "mean_error": self.mean_error,
            "detail": self.detail,
        }


@dataclass
class PipelineResult:
    predictions: list[Prediction]
    registration: RegistrationReport

    def to_dict(self) -> dict:
        return {
            "predictions": [p.to_dict() for p in self.predictions],
            "registration": self.registration.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(
            self.to_dict(), sort_keys=True, ensure_ascii=False, indent=2
        )


def preprocess(image: RasterImage, config: PipelineConfig) -> RasterImage:
    """Grayscale -> optional denoise -> binarize -> open the ink."""
    gray = to_grayscale(image) if image.pixels.ndim == 3 else image
    work = fnlm_denoise(gray) if config.denoise else gray
    binary = binarize(work, threshold=config.binarize_threshold).image
    return open_ink(binary)


def register(
    test_gray: RasterImage,
    template_gray: RasterImage,
    config: PipelineConfig,
) -> tuple[np.ndarray | None, RegistrationReport]:
    """Estimate the template-to-test homography from matched keypoints."""
    try:
        kp_tpl = detect_keypoints(template_gray)
        kp_test = detect_keypoints(test_gray)
        desc_tpl, idx_tpl = compute_descriptors(template_gray, kp_tpl)
        desc_test, idx_test = compute_descriptors(test_gray, kp_test)
        matches = match_descriptors(desc_tpl, desc_test)
        src = np.array(
            [[kp_tpl[idx_tpl[i]].x, kp_tpl[idx_tpl[i]].y] for i, _, _ in matches],
            dtype=np.float64,
        ).reshape(-1, 2)
        dst = np.array(
            [[kp_test[idx_test[j]].x, kp_test[idx_test[j]].y] for _, j, _ in matches],
            dtype=np.float64,
        ).reshape(-1, 2)
        result = estimate_homography(src, dst, config.ransac)
    except (InsufficientCorrespondences, RegistrationFailed) as exc:
        return None, RegistrationReport(method=FALLBACK, detail=str(exc))
    report = RegistrationReport(
        method=REGISTERED,
        n_inliers=result.n_inliers,
        mean_error=float(result.mean_error),
        detail="",
    )
    return result.matrix, report


def _clamp_quad(
    quad: np.ndarray, width: int, height: int
) -> list[tuple[float, float]]:
    xs = np.clip(quad[:, 0], 0.0, float(width))
    ys = np.clip(quad[:, 1], 0.0, float(height))
    return [(float(x), float(y)) for x, y in zip(xs, ys)]


def _recognize_crop(
    crop: RasterImage,
    field_type: FieldType,
    model: LineRecognizer,
    vocab: Vocabulary,
    config: PipelineConfig,
) -> tuple[str, list[str]]:
    """Run the recognizer; multi-line fields are split and read per line."""
    if field_type is FieldType.MULTIPLE_LINES and config.split_multi_line:
        binary = binarize(crop).image
        bands = segment_lines_projection(binary)
        if len(bands) > 1:
            texts = []
            for band in bands:
                top = int(band.quad[0][1])
                bottom = int(band.quad[2][1])  # exclusive
                sub = RasterImage(crop.pixels[top:bottom, :])
                texts.append(
                    recognize(model, vocab, sub, max_out=config.max_decode_len).text
                )
            return "\n".join(texts), texts
    text = recognize(model, vocab, crop, max_out=config.max_decode_len).text
    return text, [text]


def run_pipeline(
    image: RasterImage,
    template: Template,
    model: LineRecognizer,
    vocab: Vocabulary,
    config: PipelineConfig | None = None,
) -> PipelineResult:
    """Process one filled-in document against its template."""
    config = config if config is not None else PipelineConfig()

    test_gray = to_grayscale(image) if image.pixels.ndim == 3 else image
    template_gray = (
        to_grayscale(template.image)
        if template.image.pixels.ndim == 3
        else template.image
    )
    cleaned = preprocess(test_gray, config)
    source = test_gray if config.recognize_from_raw else cleaned

    matrix, report = register(test_gray, template_gray, config)

    h, w = test_gray.pixels.shape
    predictions: list[Prediction] = []
    for shape in template.shapes:
        quad = np.array(shape.points, dtype=np.float64)
        flags: list[str] = []
        if matrix is not None:
            quad = project_points(matrix, quad)
        quad_clamped = _clamp_quad(quad, w, h)
        try:
            crop = warp_extract(source, quad_clamped)
            raw, lines = _recognize_crop(
                crop, shape.field_type, model, vocab, config
            )
        except DegenerateRegion:
            raw, lines = "", [""]
            flags.append("DegenerateRegion")
        prediction = Prediction(
            field_id=shape.shape_id,
            raw_text=raw,
            enhanced_text=raw,
            field_type=shape.field_type,
            registration=report.method,
            line_texts=lines,
            flags=flags,
        )
        prediction = enhance(prediction, possibilities=shape.possibilities)
        predictions.append(prediction)

    return PipelineResult(predictions=predictions, registration=report)
