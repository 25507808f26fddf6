# Pytest configuration and fixtures
# Provides sample sets, runner instances and environment setup for all tests

import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest

from scripts.sweep import SweepRunner
from scripts.verification import VerificationRunner
from utils.core import ModelSpec, SampleSet, validate_params
from utils.file import File
from utils.geometry import Estimator
from utils.samplers import RngStream, sample_set


@pytest.fixture
def temp_directory():
    """
    Create a temporary directory for test files.

    Yields
    ------
    Path
        Path to temporary directory.
    """
    temp_dir = Path(tempfile.mkdtemp())
    yield temp_dir

    # Cleanup after test
    shutil.rmtree(temp_dir, ignore_errors=True)


@pytest.fixture
def unit_samples():
    """
    Two standard basis vectors in the plane.

    Returns
    -------
    SampleSet
        X_1 = (1, 0), X_2 = (0, 1).
    """
    return SampleSet(np.array([[1.0, 0.0], [0.0, 1.0]]), ModelSpec.gaussian())


@pytest.fixture
def gaussian_samples():
    """
    A seeded Gaussian sample set with n=8, N=200.

    Returns
    -------
    SampleSet
        Reproducible realization.
    """
    params = validate_params(8, 200, 1, 1.0)
    return sample_set(ModelSpec.gaussian(), params, RngStream(7))


@pytest.fixture
def rng():
    """Fresh seeded numpy generator."""
    return np.random.default_rng(12345)


@pytest.fixture
def estimator_instance():
    """Single-threaded Estimator utility."""
    return Estimator(instance_id=1, workers=1, bit_exact=True)


@pytest.fixture
def file_instance(temp_directory, monkeypatch):
    """
    Create a File utility instance writing under a temporary OUTPUT_PATH.

    Yields
    ------
    File
        File utility instance.
    """
    monkeypatch.setenv("OUTPUT_PATH", str(temp_directory / "output"))

    file = File(instance_id=1)
    yield file


@pytest.fixture
def sweep_runner():
    """
    Create a SweepRunner instance for testing.

    Yields
    ------
    SweepRunner
        Runner with single-threaded, bit-exact reduction.
    """
    runner = SweepRunner("test/test_sweep.log", workers=1, bit_exact=True)
    yield runner
    runner.dispose()


@pytest.fixture
def verification_runner():
    """
    Create a VerificationRunner instance for testing.

    Yields
    ------
    VerificationRunner
        Runner with single-threaded, bit-exact reduction.
    """
    runner = VerificationRunner("test/test_verification.log", workers=1, bit_exact=True)
    yield runner
    runner.dispose()


@pytest.fixture
def tiny_sweep_config(temp_directory):
    """
    A small Gaussian sweep in JSON form.

    Returns
    -------
    dict
        Two dimensions, symbolic N and ell, fixed q, a few replicates.
    """
    return {
        "model": "gaussian",
        "n": [4, 8],
        "N": ["4n"],
        "ell": [1, "N"],
        "q": [2],
        "mc": {"n_directions": 8, "n_replicates": 10, "antithetic": False},
        "master_seed": 99,
        "output_path": str(temp_directory / "sweep.csv"),
        "format": "csv",
    }


@pytest.fixture(autouse=True)
def setup_test_environment(monkeypatch):
    """
    Set up test environment variables.

    Parameters
    ----------
    monkeypatch : pytest.MonkeyPatch
        Pytest monkeypatch fixture.
    """
    test_env_vars = {
        "WORKER_THREADS": "1",
        "BIT_EXACT": "true",
        "MASTER_SEED": "20240101",
    }

    for key, value in test_env_vars.items():
        monkeypatch.setenv(key, value)
