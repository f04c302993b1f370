import warnings
from pathlib import Path

import pytest

from trisim import dataio, econometrics

REPO_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return REPO_ROOT / "data"


@pytest.fixture(scope="session")
def model_path() -> Path:
    return REPO_ROOT / "models" / "model.json"


@pytest.fixture(scope="session")
def bundled_series(data_dir):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # the 1927 stub year has one close
        bundle = dataio.load_bundle(data_dir / "manifest.json")
        return dataio.build_dataset(bundle, 10)


@pytest.fixture(scope="session")
def bundled_model(bundled_series):
    return econometrics.fit_model(bundled_series, window=10, fill_seed=0)
