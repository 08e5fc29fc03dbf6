"""Keypoint-based template-to-page registration."""

from .keypoints import Keypoint, detect_keypoints, build_gaussian_pyramid, build_dog_pyramid
from .descriptors import compute_descriptors
from .matching import match_descriptors
from .homography import (
    RansacConfig,
    HomographyResult,
    RegistrationError,
    InsufficientCorrespondences,
    RegistrationFailed,
    PointAtInfinity,
    dlt_homography,
    estimate_homography,
    project_points,
)
from .warp import warp_extract, DegenerateRegion

__all__ = [
    "Keypoint",
    "detect_keypoints",
    "build_gaussian_pyramid",
    "build_dog_pyramid",
    "compute_descriptors",
    "match_descriptors",
    "RansacConfig",
    "HomographyResult",
    "RegistrationError",
    "InsufficientCorrespondences",
    "RegistrationFailed",
    "PointAtInfinity",
    "dlt_homography",
    "estimate_homography",
    "project_points",
    "warp_extract",
    "DegenerateRegion",
]
