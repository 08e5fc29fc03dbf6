"""Image container, filtering, binarization and morphology."""

from .raster import (
    RasterImage,
    ImagingError,
    read_image,
    write_image,
    decode_png_bytes,
    encode_png_bytes,
    to_grayscale,
    invert,
    resize_bilinear,
    sample_bilinear,
)
from .filters import (
    gaussian_blur,
    gaussian_blur_array,
    gaussian_kernel_1d,
    fnlm_denoise,
    fnlm_normalized_weight_sum,
    binarize,
    BinarizeResult,
    otsu_threshold,
)
from .morphology import erode, dilate, open_image, open_ink

__all__ = [
    "RasterImage",
    "ImagingError",
    "read_image",
    "write_image",
    "decode_png_bytes",
    "encode_png_bytes",
    "to_grayscale",
    "invert",
    "resize_bilinear",
    "sample_bilinear",
    "gaussian_blur",
    "gaussian_blur_array",
    "gaussian_kernel_1d",
    "fnlm_denoise",
    "fnlm_normalized_weight_sum",
    "binarize",
    "BinarizeResult",
    "otsu_threshold",
    "erode",
    "dilate",
    "open_image",
    "open_ink",
]
