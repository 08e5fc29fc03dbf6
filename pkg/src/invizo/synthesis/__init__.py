"""Synthetic Arabic text-line generation: corpus cleaning, contextual
glyph shaping, rasterization, line composition, and augmentation."""

from invizo.synthesis.corpus import (
    DEFAULT_CHARSET,
    load_charset,
    load_manifest,
    normalize_corpus,
    split_dataset,
    write_manifest,
)
from invizo.synthesis.shaping import shape_text, visual_order
from invizo.synthesis.rendering import (
    FontError,
    GlyphError,
    default_font_path,
    render_line,
)
from invizo.synthesis.compose import compose_digit_sequence, compose_line
from invizo.synthesis.augment import AugmentSpec, augment

__all__ = [
    "DEFAULT_CHARSET",
    "load_charset",
    "load_manifest",
    "normalize_corpus",
    "split_dataset",
    "write_manifest",
    "shape_text",
    "visual_order",
    "FontError",
    "GlyphError",
    "default_font_path",
    "render_line",
    "compose_digit_sequence",
    "compose_line",
    "AugmentSpec",
    "augment",
]
