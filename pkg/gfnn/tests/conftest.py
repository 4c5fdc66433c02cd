import subprocess
import sys

import numpy as np
import pytest

from gfnn.datagen import write_dataset
from gfnn.gfb import read_gfb


@pytest.fixture(scope="session")
def producer():
    """Runs the dataset producer's CLI (the toolkit that owns GFB1)."""
    def run(*args):
        return subprocess.run([sys.executable, "-m", "ghostsim", *args],
                              capture_output=True, text=True)
    return run


@pytest.fixture(scope="session")
def trainer_cli():
    """Runs one of this package's installed console scripts."""
    def run(script, *args):
        return subprocess.run([script, *args], capture_output=True, text=True)
    return run


@pytest.fixture(scope="session")
def tiny_files(tmp_path_factory):
    """A small 32x32 m=32 dataset pair shared across tests."""
    root = tmp_path_factory.mktemp("tiny")
    train = root / "train.gfb"
    heldout = root / "heldout.gfb"
    write_dataset(train, 24, 32, 32, seed=99, heldout=6, heldout_out=heldout)
    return train, heldout


@pytest.fixture(scope="session")
def tiny_train(tiny_files):
    return read_gfb(tiny_files[0])


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(0)
