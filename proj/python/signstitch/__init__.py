"""Stitch isolated-sign skeleton clips into continuous signing sequences."""

from ._core import (
    ANGLES,
    DEFAULT_CUTOFF_HZ,
    DEFAULT_FPS,
    KEYPOINTS,
    ConfigurationError,
    DegenerateFrameError,
    Dictionary,
    Embeddings,
    Error,
    FormatError,
    InvalidInputError,
    SchemaError,
    Skeleton,
    UnresolvableGlossError,
    butterworth_lowpass,
    forward_kinematics,
    normalize_pose,
    permute_glosses,
    read_pose_file,
    resample,
    resolve,
    scale_speed,
    score,
    stitch,
    write_sspk,
)

__all__ = [
    "ANGLES",
    "DEFAULT_CUTOFF_HZ",
    "DEFAULT_FPS",
    "KEYPOINTS",
    "ConfigurationError",
    "DegenerateFrameError",
    "Dictionary",
    "Embeddings",
    "Error",
    "FormatError",
    "InvalidInputError",
    "SchemaError",
    "Skeleton",
    "UnresolvableGlossError",
    "butterworth_lowpass",
    "forward_kinematics",
    "normalize_pose",
    "permute_glosses",
    "read_pose_file",
    "resample",
    "resolve",
    "scale_speed",
    "score",
    "stitch",
    "write_sspk",
]
