# model/model_io.py - JSON model documents and single-CPD table documents

import json
import logging
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from config import Tolerances
from probability.errors import ModelSyntaxError, ModelValidationError, SeparabilityError
from probability.tables import PREVIOUS_SUFFIX, Categorical, Cpd, VariableSpec, scope_size
from .dbn import DbnModel, Factorization

logger = logging.getLogger(__name__)


def _load_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelSyntaxError(e.msg, e.lineno, e.colno)


def _require(doc: Dict[str, Any], key: str, kind: type, where: str) -> Any:
    if key not in doc:
        raise ModelValidationError(f"{where}: missing key {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise ModelValidationError(f"{where}: {key!r} must be a {kind.__name__}")
    return value


def _parse_variables(entries: List[Any]) -> List[VariableSpec]:
    variables = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ModelValidationError(f"variables[{i}] must be an object")
        name = _require(entry, "name", str, f"variables[{i}]")
        card = _require(entry, "card", int, f"variables[{i}]")
        try:
            variables.append(VariableSpec(name, card))
        except SeparabilityError as e:
            raise ModelValidationError(f"variables[{i}]: {e}")
    return variables


def _checked_rows(table: Any, n_rows: int, n_cols: int, where: str) -> np.ndarray:
    """
    Validate a row-major CPD table from a document

    Rows within Tolerances.FILE_REJECT of summing to 1 are renormalized
    (with a warning beyond FILE_RENORMALIZE); rows further off are rejected.

    Raises:
        ModelValidationError: Naming the offending row
    """
    try:
        arr = np.array(table, dtype=float)
    except (TypeError, ValueError):
        raise ModelValidationError(f"{where}: table must be an array of numeric rows")
    if arr.shape != (n_rows, n_cols):
        raise ModelValidationError(f"{where}: table must have {n_rows} rows of {n_cols} values, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ModelValidationError(f"{where}: table contains non-finite values")
    for r in range(n_rows):
        row = arr[r]
        if row.min() < -Tolerances.FILE_REJECT:
            raise ModelValidationError(f"{where}: row {r} has a negative entry {row.min()!r}")
        total = row.sum()
        if abs(total - 1.0) > Tolerances.FILE_REJECT:
            raise ModelValidationError(f"{where}: row {r} sums to {total!r}")
        if abs(total - 1.0) > Tolerances.FILE_RENORMALIZE:
            logger.warning(f"{where}: row {r} sums to {total!r}, renormalizing")
            arr[r] = np.clip(row, 0.0, None) / np.clip(row, 0.0, None).sum()
    return arr


def _build_cpd(child: VariableSpec, parents: Sequence[VariableSpec], table: Any, where: str) -> Cpd:
    arr = _checked_rows(table, scope_size(tuple(parents)), child.cardinality, where)
    return Cpd((child,), tuple(parents), arr, tol=Tolerances.FILE_RENORMALIZE)


def _lookup(declared: Dict[str, VariableSpec], name: Any, where: str) -> VariableSpec:
    if not isinstance(name, str) or name not in declared:
        raise ModelValidationError(f"{where}: unknown variable {name!r}")
    return declared[name]


def _parse_factorization(factors: Any, declared: Dict[str, VariableSpec], where: str) -> Factorization:
    names_ok = isinstance(factors, list) and all(
        isinstance(f, list) and all(isinstance(n, str) for n in f) for f in factors)
    if not names_ok:
        raise ModelValidationError(f"{where} must be an array of arrays of names")
    for f in factors:
        for n in f:
            _lookup(declared, n, where)
    return Factorization(factors)


def model_from_dict(doc: Any) -> DbnModel:
    """
    Build a model from a decoded model document

    Raises:
        ModelValidationError: On any semantic problem (unknown variable,
            bad row sum, factorization that is not a partition)
    """
    if not isinstance(doc, dict):
        raise ModelValidationError("Model document must be a JSON object")

    variables = _parse_variables(_require(doc, "variables", list, "model"))
    declared = {v.name: v for v in variables}
    if len(declared) != len(variables):
        raise ModelValidationError("Duplicate variable names in 'variables'")

    factorization = _parse_factorization(_require(doc, "factorization", list, "model"), declared, "'factorization'")

    transition = []
    for i, entry in enumerate(_require(doc, "transition", list, "model")):
        where = f"transition[{i}]"
        if not isinstance(entry, dict):
            raise ModelValidationError(f"{where} must be an object")
        child = _lookup(declared, _require(entry, "child", str, where), where)
        where = f"transition CPD for {child.name}"
        parents = [_lookup(declared, p, where).previous() for p in _require(entry, "parents", list, where)]
        transition.append(_build_cpd(child, parents, _require(entry, "table", list, where), where))

    observations = []
    for i, entry in enumerate(doc.get("observations", [])):
        where = f"observations[{i}]"
        if not isinstance(entry, dict):
            raise ModelValidationError(f"{where} must be an object")
        try:
            var = VariableSpec(_require(entry, "name", str, where), _require(entry, "card", int, where))
        except SeparabilityError as e:
            raise ModelValidationError(f"{where}: {e}")
        where = f"observation CPD for {var.name}"
        parents = [_lookup(declared, p, where) for p in _require(entry, "parents", list, where)]
        observations.append((var, _build_cpd(var, parents, _require(entry, "table", list, where), where)))

    prior = _parse_prior(doc.get("prior"), variables, factorization)

    candidates = {}
    if "candidates" in doc:
        for label, factors in _require(doc, "candidates", dict, "model").items():
            candidate = _parse_factorization(factors, declared, f"candidates[{label!r}]")
            candidate.validate([v.name for v in variables])
            candidates[label] = candidate

    try:
        return DbnModel(variables, transition, observations, prior, factorization,
                        name=doc.get("name", "model"), candidates=candidates)
    except ModelValidationError:
        raise
    except SeparabilityError as e:
        raise ModelValidationError(str(e))


def _parse_prior(doc: Any, variables: List[VariableSpec], factorization: Factorization):
    declared = {v.name: v for v in variables}
    if doc is None:
        return tuple(Categorical.uniform([declared[n] for n in f]) for f in factorization)
    if not isinstance(doc, dict):
        raise ModelValidationError("'prior' must be an object")
    kind = doc.get("type")
    try:
        if kind == "joint":
            table = _require(doc, "table", list, "prior")
            return Categorical(variables, table, tol=Tolerances.FILE_REJECT)
        if kind == "product":
            tables = _require(doc, "tables", dict, "prior")
            prior = []
            for i, factor in enumerate(factorization):
                if str(i) not in tables:
                    raise ModelValidationError(f"prior: no table for factor {i}")
                prior.append(Categorical([declared[n] for n in factor], tables[str(i)], tol=Tolerances.FILE_REJECT))
            return tuple(prior)
    except ModelValidationError:
        raise
    except SeparabilityError as e:
        raise ModelValidationError(f"prior: {e}")
    raise ModelValidationError(f"prior: unknown type {kind!r} (expected 'product' or 'joint')")


def parse_model(text: str) -> DbnModel:
    """
    Parse a model document

    Args:
        text: UTF-8 JSON model document

    Returns:
        Validated DbnModel

    Raises:
        ModelSyntaxError: If the text is not valid JSON (line and column reported)
        ModelValidationError: If the document describes an invalid model
    """
    return model_from_dict(_load_json(text))


def _rows(cpd: Cpd) -> List[List[float]]:
    return [[float(x) for x in row] for row in cpd.table]


def model_to_dict(model: DbnModel) -> Dict[str, Any]:
    doc: Dict[str, Any] = {
        "name": model.name,
        "variables": [{"name": v.name, "card": v.cardinality} for v in model.state_vars],
        "factorization": [list(f) for f in model.factorization],
        "transition": [
            {"child": cpd.child_names[0], "parents": [v.base_name for v in cpd.parent_scope], "table": _rows(cpd)}
            for cpd in model.transition
        ],
        "observations": [
            {"name": var.name, "card": var.cardinality, "parents": list(cpd.parent_names), "table": _rows(cpd)}
            for var, cpd in model.observations
        ],
    }
    if isinstance(model.prior, Categorical):
        doc["prior"] = {"type": "joint", "table": [float(x) for x in model.prior_joint().values]}
    else:
        doc["prior"] = {
            "type": "product",
            "tables": {str(i): [float(x) for x in t.values] for i, t in enumerate(model.prior)},
        }
    if model.candidates:
        doc["candidates"] = {label: [list(f) for f in fac] for label, fac in model.candidates.items()}
    return doc


def serialize_model(model: DbnModel) -> str:
    """Model document text; parse_model(serialize_model(m)) reproduces m exactly"""
    return json.dumps(model_to_dict(model), indent=2)


def parse_cpd_document(text: str) -> Cpd:
    """
    Parse a single-CPD table document

    Format: {"variables": [{"name", "card"}], "child": name,
    "parents": [names], "table": rows}. Parent names may carry the
    previous-slice suffix '-'; their cardinality is looked up by base name.

    Raises:
        ModelSyntaxError: If the text is not valid JSON
        ModelValidationError: On unknown variables or bad rows
    """
    doc = _load_json(text)
    if not isinstance(doc, dict):
        raise ModelValidationError("CPD document must be a JSON object")
    declared = {v.name: v for v in _parse_variables(_require(doc, "variables", list, "cpd"))}
    child = _lookup(declared, _require(doc, "child", str, "cpd"), "cpd")
    parents = []
    for name in _require(doc, "parents", list, "cpd"):
        if isinstance(name, str) and name.endswith(PREVIOUS_SUFFIX) and name not in declared:
            parents.append(_lookup(declared, name[:-1], "cpd").previous())
        else:
            parents.append(_lookup(declared, name, "cpd"))
    try:
        return _build_cpd(child, parents, _require(doc, "table", list, "cpd"), f"CPD for {child.name}")
    except ModelValidationError:
        raise
    except SeparabilityError as e:
        raise ModelValidationError(str(e))


def serialize_cpd_document(cpd: Cpd) -> str:
    """Single-CPD table document for a one-child CPD"""
    seen: Dict[str, VariableSpec] = {}
    for v in cpd.child_scope + cpd.parent_scope:
        seen.setdefault(v.base_name, v.current())
    doc = {
        "variables": [{"name": v.name, "card": v.cardinality} for v in seen.values()],
        "child": cpd.child_names[0],
        "parents": list(cpd.parent_names),
        "table": _rows(cpd),
    }
    return json.dumps(doc, indent=2)


def is_cpd_document(text: str) -> bool:
    """True when a JSON document looks like a single-CPD table rather than a model"""
    doc = _load_json(text)
    return isinstance(doc, dict) and "child" in doc and "transition" not in doc


def load_model(path: str) -> DbnModel:
    """Read and parse a model file"""
    with open(path, 'r', encoding='utf-8') as f:
        return parse_model(f.read())


def load_cpd(path: str) -> Cpd:
    with open(path, 'r', encoding='utf-8') as f:
        return parse_cpd_document(f.read())
