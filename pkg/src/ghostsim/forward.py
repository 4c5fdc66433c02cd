"""Forward imaging model.

A bucket detector sees the total intensity transmitted by the object
under one illumination pattern. A group frame (GF) stacks the m
bucket-weighted pattern images of one exposure burst; a batch group
frame (BGF) is a run of consecutive GFs sharing one speckle set. The
rotation simulator emits BGFs of a spinning object plus the sampling
limit that bounds how many samples one frame may integrate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidBGF,
    InvalidTrajectory,
    LengthMismatch,
    NonPositiveParameter,
)
from .imagecore import Image, as_image, rotate
from .speckle import (
    Distribution,
    SpecklePattern,
    SpeckleSet,
    bgf_speckle_policy,
    gen_speckle_set,
)

__all__ = [
    "GroupFrame",
    "BatchGroupFrame",
    "RotationTrajectory",
    "bucket",
    "make_gf",
    "simulate_rotation_bgfs",
    "max_samples",
]


@dataclass
class GroupFrame:
    """One m-sample group frame: buckets plus bucket-weighted planes.

    Planes are derived on demand as buckets[i] * pattern[i] from the
    referenced speckle set; an explicitly supplied plane stack (e.g.
    read back from a dataset file) takes precedence and is what the
    reconstruction-side consistency check validates.
    """

    buckets: np.ndarray
    speckle_seed: int
    distribution: Distribution
    object_id: str = ""
    speckles: SpeckleSet = field(default=None, repr=False)
    explicit_planes: np.ndarray = field(default=None, repr=False)
    image_shape: tuple = None

    def __post_init__(self):
        self.buckets = np.asarray(self.buckets, dtype=np.float64).ravel()
        self.distribution = Distribution(self.distribution)
        if self.speckles is not None:
            if self.speckles.m != self.m:
                raise LengthMismatch(
                    f"{self.m} buckets vs {self.speckles.m} patterns")
            self.image_shape = (self.speckles.height, self.speckles.width)
        if self.explicit_planes is not None:
            self.explicit_planes = np.asarray(self.explicit_planes, dtype=np.float64)
            if self.explicit_planes.shape[0] != self.m:
                raise LengthMismatch(
                    f"{self.m} buckets vs {self.explicit_planes.shape[0]} planes")
            self.image_shape = self.explicit_planes.shape[1:]
        if self.image_shape is None:
            raise DimensionMismatch("group frame needs a speckle set, planes, or image_shape")
        self.image_shape = tuple(self.image_shape)

    @property
    def m(self) -> int:
        return self.buckets.shape[0]

    @property
    def planes(self) -> np.ndarray:
        if self.explicit_planes is not None:
            return self.explicit_planes
        if self.speckles is None:
            h, w = self.image_shape
            self.speckles = gen_speckle_set(self.speckle_seed, self.m, h, w,
                                            self.distribution)
        return self.buckets[:, None, None] * self.speckles.stack


@dataclass
class BatchGroupFrame:
    """Consecutive group frames sharing one speckle set."""

    frames: tuple
    speckle_seed: int
    batch_index: int = 0

    def __post_init__(self):
        self.frames = tuple(self.frames)
        if len(self.frames) < 1:
            raise InvalidBGF("batch group frame needs at least one frame")
        first = self.frames[0]
        for gf in self.frames:
            if gf.speckle_seed != self.speckle_seed:
                raise InvalidBGF("all frames of a batch must share the batch speckle seed")
            if gf.m != first.m or gf.image_shape != first.image_shape:
                raise InvalidBGF("all frames of a batch must agree in m and image size")

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    @property
    def m(self) -> int:
        return self.frames[0].m


@dataclass(frozen=True)
class RotationTrajectory:
    """Uniform rotation sampled at a fixed frame interval."""

    omega_deg_per_ms: float
    frame_interval_ms: float
    n_frames: int
    n_batches: int
    start_angle_deg: float = 0.0

    def __post_init__(self):
        if self.n_frames < 1 or self.n_batches < 1:
            raise InvalidTrajectory("frame and batch counts must be >= 1")
        if self.n_frames % self.n_batches != 0:
            raise InvalidTrajectory(
                f"{self.n_frames} frames do not divide into {self.n_batches} batches")
        if not self.frame_interval_ms > 0:
            raise InvalidTrajectory("frame interval must be positive")

    @classmethod
    def from_frequency(cls, omega_deg_per_ms: float, f_hz: float, n_frames: int,
                       n_batches: int, start_angle_deg: float = 0.0) -> "RotationTrajectory":
        """Trajectory with the frame interval implied by a sampling rate."""
        if not f_hz > 0:
            raise InvalidTrajectory("sampling frequency must be positive")
        return cls(omega_deg_per_ms, 1000.0 / f_hz, n_frames, n_batches, start_angle_deg)

    @property
    def step_deg(self) -> float:
        """Angle advanced between consecutive frames."""
        return self.omega_deg_per_ms * self.frame_interval_ms

    @property
    def frames_per_batch(self) -> int:
        return self.n_frames // self.n_batches

    def angle_deg(self, k: int) -> float:
        """Object orientation at frame k (affine in k)."""
        return self.start_angle_deg + self.step_deg * k


def bucket(obj, pattern) -> float:
    """Total intensity seen by the bucket detector: sum of T * I."""
    p = pattern.image if isinstance(pattern, SpecklePattern) else pattern
    t, i = as_image(obj).data, as_image(p).data
    if t.shape != i.shape:
        raise DimensionMismatch(f"object {t.shape} vs pattern {i.shape}")
    return float(np.sum(t * i))


def make_gf(obj, speckles: SpeckleSet, object_id: str = "") -> GroupFrame:
    """Measure one group frame of a static object under a speckle set."""
    t = as_image(obj).data
    if t.shape != (speckles.height, speckles.width):
        raise DimensionMismatch(
            f"object {t.shape} vs patterns {(speckles.height, speckles.width)}")
    buckets = speckles.stack.reshape(speckles.m, -1) @ t.ravel()
    return GroupFrame(
        buckets=buckets,
        speckle_seed=speckles.seed,
        distribution=speckles.distribution,
        object_id=object_id,
        speckles=speckles,
    )


def simulate_rotation_bgfs(obj, traj: RotationTrajectory, samples_per_frame: int,
                           base_seed: int, distribution="uniform01") -> list:
    """Simulate a rotating object as a list of batch group frames.

    Frame k measures the object rotated to traj.angle_deg(k); frames
    are split into contiguous equal batches, each batch illuminated by
    its own derived speckle set shared across all its frames.
    """
    if samples_per_frame < 1:
        raise InvalidTrajectory("samples_per_frame must be >= 1")
    image = as_image(obj)
    h, w = image.shape
    bgfs = []
    per = traj.frames_per_batch
    for b in range(traj.n_batches):
        speckles = bgf_speckle_policy(base_seed, b, samples_per_frame, h, w, distribution)
        frames = []
        for k in range(b * per, (b + 1) * per):
            ang = traj.angle_deg(k)
            rotated = rotate(image, ang) if ang != 0.0 else image
            frames.append(make_gf(rotated, speckles, object_id=f"frame{k:04d}"))
        bgfs.append(BatchGroupFrame(frames=tuple(frames), speckle_seed=speckles.seed,
                                    batch_index=b))
    return bgfs


def max_samples(f_hz: float, omega_deg_per_s: float, theta_r_deg: float) -> int:
    """Sampling limit for one frame of a moving object.

    At sampling rate f and angular speed w, at most floor(f * theta_r / w)
    samples fit before the object moves by the resolution angle theta_r.
    """
    if not (f_hz > 0 and omega_deg_per_s > 0 and theta_r_deg > 0):
        raise NonPositiveParameter("f, omega and theta_r must all be positive")
    return int(math.floor(f_hz * theta_r_deg / omega_deg_per_s))
