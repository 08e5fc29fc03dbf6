"""Template-driven Arabic document OCR."""

__version__ = "0.1.0"
