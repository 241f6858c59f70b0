# tests/conftest.py - Shared fixtures; puts the repository root on sys.path

import os
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from model.generators import (  # noqa: E402
    EXAMPLE41_X_TABLE,
    binary,
    binary_cpd,
    example33_cpd,
    generate_example41_model,
    generate_figure1_model,
)

MODELS_DIR = os.path.join(ROOT, "models")


@pytest.fixture
def models_dir():
    return MODELS_DIR


@pytest.fixture
def example33():
    """P(X | X-, Y-) with degree 0.91 for the split {X-} | {Y-}"""
    return example33_cpd()


@pytest.fixture
def example41_x():
    """The four-parent table P(X | X-, Y-, Z-, W-)"""
    x, y, z, w = (binary(n) for n in "XYZW")
    return binary_cpd(x, (x.previous(), y.previous(), z.previous(), w.previous()), EXAMPLE41_X_TABLE)


@pytest.fixture
def example41_model():
    return generate_example41_model()


@pytest.fixture
def separable_model():
    """Figure-1 model at alpha = 1: factorization {X}, {Y} is exact for prediction"""
    return generate_figure1_model(1.0, seed=3)


@pytest.fixture
def entangled_model():
    return generate_figure1_model(0.0, seed=3)
