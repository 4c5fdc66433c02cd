"""Trains a multi-plane-to-one-image network on ghost-imaging datasets.

Consumes GFB1 group-frame files produced by the simulation toolkit,
fits an encoder-decoder that maps each m-plane measurement stack to
one reconstructed image, and reports PSNR/SSIM under the producer's
metric conventions.
"""

from .data import (
    TrainingData,
    check_compatible,
    iter_batches,
    load_training_data,
    split_indices,
)
from .datagen import make_entries, write_dataset
from .digits import render_digit
from .errors import (
    BadShape,
    ContainerFormatError,
    DatasetTooSmall,
    GfnnError,
    ShapeMismatch,
)
from .evaluate import evaluate, infer, raw_gi, write_report
from .gfb import (
    Dataset,
    Entry,
    entry_planes,
    gen_patterns,
    read_gfb,
    stream_key,
    write_gfb,
)
from .metrics import psnr, ssim, to_scale255
from .model import GFNet, build_model, load_model, save_model
from .pgm import read_pgm, write_pgm
from .train import TrainConfig, train

__version__ = "0.1.0"

__all__ = [
    "BadShape",
    "ContainerFormatError",
    "Dataset",
    "DatasetTooSmall",
    "Entry",
    "GFNet",
    "GfnnError",
    "ShapeMismatch",
    "TrainConfig",
    "TrainingData",
    "build_model",
    "check_compatible",
    "entry_planes",
    "evaluate",
    "gen_patterns",
    "infer",
    "iter_batches",
    "load_model",
    "load_training_data",
    "make_entries",
    "psnr",
    "raw_gi",
    "read_gfb",
    "read_pgm",
    "render_digit",
    "save_model",
    "split_indices",
    "ssim",
    "stream_key",
    "to_scale255",
    "train",
    "write_dataset",
    "write_gfb",
    "write_pgm",
    "write_report",
]
