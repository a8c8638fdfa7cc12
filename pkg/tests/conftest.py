import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = REPO_ROOT / "data"

sys.path.insert(0, str(Path(__file__).resolve().parent))


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def mini_dir() -> Path:
    return DATA_DIR / "mini"


@pytest.fixture(scope="session")
def sample_slam_dir() -> Path:
    return DATA_DIR / "sample_slam"
