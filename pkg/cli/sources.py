# cli/sources.py - Resolve model arguments: files, CPD documents and built-in models

import logging
import os
from typing import List, Optional, Union

import numpy as np

from model.dbn import DbnModel
from model.generators import (
    EXAMPLE41_FACTORIZATIONS,
    example33_cpd,
    generate_example41_model,
    generate_figure1_model,
)
from model.model_io import is_cpd_document, parse_cpd_document, parse_model
from model.two_chain import generate_two_chain_system
from probability.errors import ModelValidationError
from probability.tables import Cpd

logger = logging.getLogger(__name__)

BUILTIN_PREFIX = "builtin:"

BUILTIN_USAGE = (
    "builtin:example41[:<factorization>], builtin:figure1:<alpha>:<seed>, "
    "builtin:two-chain:<seed>, builtin:example33"
)

Source = Union[DbnModel, Cpd]


def _number(text: str, kind: type, source: str):
    try:
        return kind(text)
    except ValueError:
        raise ModelValidationError(f"{source}: {text!r} is not a valid {kind.__name__}")


def _builtin(source: str) -> Source:
    parts = source[len(BUILTIN_PREFIX):].split(":")
    name, args = parts[0], parts[1:]

    if name == "example41" and len(args) <= 1:
        factorization = args[0] if args else "{UVW,XYZ}"
        if factorization not in EXAMPLE41_FACTORIZATIONS:
            raise ModelValidationError(
                f"{source}: unknown factorization (choose from {', '.join(EXAMPLE41_FACTORIZATIONS)})"
            )
        return generate_example41_model(factorization)
    if name == "figure1" and len(args) == 2:
        alpha = _number(args[0], float, source)
        if not 0.0 <= alpha <= 1.0:
            raise ModelValidationError(f"{source}: alpha must lie in [0, 1]")
        return generate_figure1_model(alpha, _number(args[1], int, source))
    if name == "two-chain" and len(args) == 1:
        _, model = generate_two_chain_system(_number(args[0], int, source))
        return model
    if name == "example33" and not args:
        return example33_cpd()
    raise ModelValidationError(f"Unknown built-in model {source!r} (expected one of {BUILTIN_USAGE})")


def load_source(source: str) -> Source:
    """
    Load a model or a single CPD

    Args:
        source: A builtin:... name, a model file or a CPD table document

    Raises:
        FileNotFoundError: If a file source does not exist
        ModelSyntaxError, ModelValidationError: On a malformed document
    """
    if source.startswith(BUILTIN_PREFIX):
        return _builtin(source)
    with open(source, 'r', encoding='utf-8') as f:
        text = f.read()
    if is_cpd_document(text):
        logger.debug(f"{source}: single CPD document")
        return parse_cpd_document(text)
    return parse_model(text)


def load_model_source(source: str) -> DbnModel:
    """
    Like load_source, but only models are accepted

    Raises:
        ModelValidationError: If the source is a single CPD
    """
    loaded = load_source(source)
    if isinstance(loaded, Cpd):
        raise ModelValidationError(f"{source} is a single CPD table, not a model")
    return loaded


def read_observations(path: str, model: DbnModel, steps: Optional[int] = None) -> np.ndarray:
    """
    Observation file: a header naming the model's observation variables,
    then one row of integer values per step

    Raises:
        FileNotFoundError: If the file does not exist
        ModelValidationError: On a header or value that does not fit the model
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Observation file not found: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        lines = [line.strip() for line in f if line.strip() and not line.startswith("#")]
    if not lines:
        raise ModelValidationError(f"{path}: empty observation file")

    header = [h.strip() for h in lines[0].split(",")]
    expected = [var.name for var, _ in model.observations]
    if sorted(header) != sorted(expected):
        raise ModelValidationError(f"{path}: header {','.join(header)} does not name the observation "
                                   f"variables {','.join(expected)}")
    order = [header.index(name) for name in expected]

    rows: List[List[int]] = []
    for number, line in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(header):
            raise ModelValidationError(f"{path}: row {number} has {len(cells)} values, expected {len(header)}")
        try:
            values = [int(cells[k]) for k in order]
        except ValueError:
            raise ModelValidationError(f"{path}: row {number} holds a non-integer value")
        rows.append(values)
    if not rows:
        raise ModelValidationError(f"{path}: no observation rows")
    if steps is not None:
        rows = rows[:steps]
    return np.array(rows, dtype=np.int64).reshape(len(rows), len(expected))
