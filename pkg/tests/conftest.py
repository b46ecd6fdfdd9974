import pathlib

import pytest

from lawmix.law_lang import load_library

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent
LAWS_DIR = REPO_ROOT / "laws"


@pytest.fixture(scope="session")
def law_library():
    return load_library(LAWS_DIR)
