import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from maps.families import Affine, AnalyticLayers, Layer
from polynorm.norms import make_l1, make_linf

settings.register_profile("default", max_examples=100, deadline=None)
settings.register_profile("fast", max_examples=10, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture
def configs_dir():
    return ROOT / "configs"


@pytest.fixture
def fixtures_dir():
    return Path(__file__).resolve().parent / "fixtures"


@pytest.fixture
def linf2():
    return make_linf(2)


@pytest.fixture
def l1_2():
    return make_l1(2)


@pytest.fixture
def rotation():
    return Affine(np.array([[0.0, -1.0], [1.0, 0.0]]))


@pytest.fixture
def sin_curve():
    """f(x) = (x1, sin x1); Fix(f) is the curve x2 = sin x1."""
    return AnalyticLayers([Layer([[1.0, 0.0], [1.0, 0.0]], activation=("identity", "sin"))])


@pytest.fixture(autouse=True)
def isolated_logs(tmp_path, monkeypatch):
    monkeypatch.setenv("POLYFIX_LOGS_DIR", str(tmp_path / "logs"))
    for key in list(os.environ):
        if key.startswith("POLYFIX_") and key != "POLYFIX_LOGS_DIR":
            monkeypatch.delenv(key)
