"""Computational ghost imaging with rotational motion compensation.

Simulates speckle-illuminated bucket measurements of static and
rotating objects, reconstructs images by intensity correlation, and
removes rotational blur by estimating the per-frame angle from
correlation curves and merging counter-rotated frames. Datasets travel
in a compact binary container; images in and out are P5 PGM.
"""

from .container import (
    Container,
    ContainerEntry,
    entry_from_gf,
    gf_from_entry,
    group_entries,
    read_container,
    write_container,
)
from .errors import GhostsimError
from .fma import (
    AngleEstimate,
    AngleGrid,
    MergedGroupFrame,
    PairPolicy,
    ccf,
    ccg,
    estimate_alpha,
    estimate_alpha_from_images,
    estimate_angle_gi,
    estimate_frame_angle,
    fma_merge_across,
    fma_merge_within,
)
from .forward import (
    BatchGroupFrame,
    GroupFrame,
    RotationTrajectory,
    bucket,
    make_gf,
    max_samples,
    simulate_rotation_bgfs,
)
from .imagecore import Image, as_image, normalize_minmax, normalize_zscore, rotate
from .metrics import QualityReport, psnr, report, ssim, to_scale255
from .objects import digit, gaussian_blob
from .pgm import read_pgm, write_pgm
from .reconstruct import (
    GhostImage,
    gi,
    gi_from_gf,
    gi_from_planes,
    gi_many,
    gi_progressive,
)
from .speckle import (
    Distribution,
    SpecklePattern,
    SpeckleSet,
    bgf_speckle_policy,
    derive_bgf_seed,
    derive_stream_key,
    gen_speckle_set,
)

__version__ = "0.1.0"

__all__ = [
    "AngleEstimate",
    "AngleGrid",
    "BatchGroupFrame",
    "Container",
    "ContainerEntry",
    "Distribution",
    "GhostImage",
    "GhostsimError",
    "GroupFrame",
    "Image",
    "MergedGroupFrame",
    "PairPolicy",
    "QualityReport",
    "RotationTrajectory",
    "SpecklePattern",
    "SpeckleSet",
    "as_image",
    "bgf_speckle_policy",
    "bucket",
    "ccf",
    "ccg",
    "derive_bgf_seed",
    "derive_stream_key",
    "digit",
    "entry_from_gf",
    "estimate_alpha",
    "estimate_alpha_from_images",
    "estimate_angle_gi",
    "estimate_frame_angle",
    "fma_merge_across",
    "fma_merge_within",
    "gaussian_blob",
    "gen_speckle_set",
    "gf_from_entry",
    "gi",
    "gi_from_gf",
    "gi_from_planes",
    "gi_many",
    "gi_progressive",
    "group_entries",
    "make_gf",
    "max_samples",
    "normalize_minmax",
    "normalize_zscore",
    "psnr",
    "read_container",
    "read_pgm",
    "report",
    "rotate",
    "simulate_rotation_bgfs",
    "ssim",
    "to_scale255",
    "write_container",
    "write_pgm",
]
