"""Model files (JSON, schema version 1) and count data (CSV).

A model file looks like::

    {
      "version": 1,
      "type": "cbn",
      "variables": {"X": 2, "Y": {"states": ["no", "yes"]}},
      "edges": [["X", "Y"]],
      "regimes": {"F_X": "X"},
      "cpts": {
        "X": {"parents": [], "probs": [0.5, 0.5]},
        "Y": {"parents": ["X"], "probs": [[0.9, 0.1], [0.4, 0.6]]}
      }
    }

``probs`` arrays have axes ``(*parents, node)``. ``type`` may also be
``"stcm"`` (adds ``exogenous``: list of names, ``shared`` and
``ignorable``) or ``"scm"``, which replaces ``cpts`` by ``equations``
(``{"parents": [...], "exogenous": "U", "table": [...]}``) and gives the
exogenous law as ``{"names": [...], "probs": [...]}``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import pandas as pd

from .cbn import Cbn, cpt
from .exceptions import ModelError
from .factor import Factor, Variable
from .graph import DASHED
from .scm import Scm, StCm, StructuralEquation

SCHEMA_VERSION = 1
MODEL_TYPES = ("cbn", "stcm", "scm")


def _variables(entries: Mapping[str, Any]) -> dict[str, Variable]:
    out = {}
    for name, v in entries.items():
        if isinstance(v, int) and not isinstance(v, bool):
            out[name] = Variable(name, v)
        elif isinstance(v, Mapping) and "states" in v:
            states = list(v["states"])
            out[name] = Variable(name, len(states), labels=states)
        elif isinstance(v, Mapping) and "card" in v:
            out[name] = Variable(name, int(v["card"]))
        else:
            raise ModelError(f"variable {name!r}: expected a cardinality or {{'states': [...]}}")
    return out


def _lookup(variables, name, where):
    try:
        return variables[name]
    except KeyError:
        raise ModelError(f"{where}: unknown variable {name!r}") from None


def _cpts(entries, variables) -> dict[str, Factor]:
    out = {}
    for name, entry in entries.items():
        node = _lookup(variables, name, "cpts")
        parents = [_lookup(variables, p, f"cpt of {name!r}") for p in entry.get("parents", [])]
        table = np.asarray(entry["probs"], dtype=float)
        shape = tuple(p.card for p in parents) + (node.card,)
        if table.shape != shape:
            raise ModelError(f"cpt of {name!r} must have shape {shape}, got {table.shape}")
        out[name] = cpt(node, parents, table)
    return out


def _edges(entries) -> list[tuple]:
    edges = []
    for e in entries:
        if not isinstance(e, (list, tuple)) or len(e) not in (2, 3):
            raise ModelError(f"malformed edge {e!r}")
        edges.append(tuple(e))
    return edges


def model_from_dict(doc: Mapping[str, Any]):
    """Build a :class:`Cbn`, :class:`StCm` or :class:`Scm` from a parsed document."""
    if not isinstance(doc, Mapping):
        raise ModelError("a model document must be a JSON object")
    if doc.get("version") != SCHEMA_VERSION:
        raise ModelError(f"unsupported schema version {doc.get('version')!r}; expected {SCHEMA_VERSION}")
    kind = doc.get("type", "cbn")
    if kind not in MODEL_TYPES:
        raise ModelError(f"unknown model type {kind!r}")
    if "variables" not in doc:
        raise ModelError("missing 'variables'")
    variables = _variables(doc["variables"])
    try:
        if kind == "cbn":
            return Cbn(variables.values(), _edges(doc.get("edges", [])), _cpts(doc.get("cpts", {}), variables),
                       doc.get("regimes"))
        if kind == "stcm":
            return StCm(variables.values(), _edges(doc.get("edges", [])), _cpts(doc.get("cpts", {}), variables),
                        exogenous=doc.get("exogenous", []), shared=doc.get("shared"),
                        ignorable=bool(doc.get("ignorable", False)))
        equations = []
        for name, entry in doc.get("equations", {}).items():
            node = _lookup(variables, name, "equations")
            parents = [_lookup(variables, p, f"equation of {name!r}") for p in entry.get("parents", [])]
            exo = entry.get("exogenous")
            exo = _lookup(variables, exo, f"equation of {name!r}") if exo is not None else None
            table = np.asarray(entry["table"])
            if exo is None and not parents:
                table = table.reshape(())
            equations.append(StructuralEquation(node, parents, exo, table))
        law = doc.get("exogenous")
        if not isinstance(law, Mapping) or "names" not in law or "probs" not in law:
            raise ModelError("an scm needs 'exogenous': {'names': [...], 'probs': [...]}")
        scope = [_lookup(variables, n, "exogenous") for n in law["names"]]
        probs = np.asarray(law["probs"], dtype=float)
        if probs.shape != tuple(v.card for v in scope):
            raise ModelError(f"exogenous probs must have shape {tuple(v.card for v in scope)}")
        used = {v.name for eq in equations for v in eq.inputs} | {eq.node.name for eq in equations}
        unused = set(variables) - used - {v.name for v in scope}
        if unused:
            raise ModelError(f"variables {sorted(unused)} are neither endogenous nor exogenous")
        return Scm(equations, Factor(scope, probs), shared=doc.get("shared"),
                   ignorable=bool(doc.get("ignorable", False)))
    except KeyError as e:
        raise ModelError(f"missing field {e.args[0]!r}") from None


def load_model(path: str | Path):
    """Parse a model file; JSON and schema problems raise :class:`ModelError`."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ModelError(f"{path}: invalid JSON ({e})") from None
    except OSError as e:
        raise ModelError(f"{path}: {e.strerror}") from None
    return model_from_dict(doc)


def _variable_entry(v: Variable):
    return {"states": list(v.labels)} if v.labels is not None else v.card


def _cpt_entry(f: Factor, node: str) -> dict:
    parents = [p for p in f.names if p != node]
    return {"parents": parents, "probs": f.table(parents + [node]).tolist()}


def model_to_dict(m) -> dict:
    """Inverse of :func:`model_from_dict`."""
    if isinstance(m, Cbn):
        return {
            "version": SCHEMA_VERSION,
            "type": "cbn",
            "variables": {n: _variable_entry(m.variables[n]) for n in m.stochastic},
            "edges": [[p, c, s] if s == DASHED else [p, c] for p, c, s in m.stochastic_edges()],
            "regimes": dict(m.regimes),
            "cpts": {n: _cpt_entry(f, n) for n, f in m.cpts.items()},
        }
    if isinstance(m, StCm):
        return {
            "version": SCHEMA_VERSION,
            "type": "stcm",
            "variables": {n: _variable_entry(v) for n, v in m.variables.items()},
            "edges": [list(e) for e in m.graph.edges],
            "cpts": {n: _cpt_entry(f, n) for n, f in m.cpts.items()},
            "exogenous": list(m.exogenous_names),
            "shared": sorted(m.shared),
            "ignorable": m.ignorable,
        }
    if isinstance(m, Scm):
        return {
            "version": SCHEMA_VERSION,
            "type": "scm",
            "variables": {n: _variable_entry(v) for n, v in m.variables.items()},
            "equations": {
                n: {
                    "parents": [p.name for p in eq.parents],
                    "exogenous": eq.exogenous.name if eq.exogenous is not None else None,
                    "table": eq.table.tolist(),
                }
                for n, eq in m.equations.items()
            },
            "exogenous": {"names": list(m.exogenous.names), "probs": m.exogenous.values.tolist()},
            "shared": sorted(m.shared),
            "ignorable": m.ignorable,
        }
    raise ModelError(f"cannot serialize {type(m).__name__}")


def save_model(m, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(m), indent=2) + "\n")


def read_data(path: str | Path) -> pd.DataFrame:
    """Read a CSV of state labels with an optional ``count`` column."""
    try:
        frame = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ModelError(f"{path}: cannot read CSV ({e})") from None
    if "count" in frame.columns:
        counts = pd.to_numeric(frame["count"], errors="coerce")
        if counts.isna().any() or (counts < 0).any() or (counts != counts.round()).any():
            raise ModelError("the count column must hold nonnegative integers")
        frame["count"] = counts.astype(int)
    return frame


def contingency(frame: pd.DataFrame, variables: list[Variable]) -> np.ndarray:
    """Dense counts over ``variables`` (in order), honouring a ``count`` column.

    Values are resolved through each variable's state labels, so an unknown
    value raises :class:`ModelError`.
    """
    missing = [v.name for v in variables if v.name not in frame.columns]
    if missing:
        raise ModelError(f"data has no column(s) {missing}")
    weights = frame["count"].to_numpy(dtype=float) if "count" in frame.columns else np.ones(len(frame))
    idx = []
    for v in variables:
        labels = {s: i for i, s in enumerate(v.state_labels)}
        col = frame[v.name].astype(str).str.strip()
        bad = sorted(set(col) - set(labels))
        if bad:
            raise ModelError(f"column {v.name!r} has values {bad} outside {list(v.state_labels)}")
        idx.append(col.map(labels).to_numpy(dtype=int))
    out = np.zeros(tuple(v.card for v in variables))
    np.add.at(out, tuple(idx), weights)
    return out


def infer_variable(frame: pd.DataFrame, name: str) -> Variable:
    """A variable whose states are the sorted distinct values of a column.

    Binary 0/1 columns keep the labels ``"0"`` and ``"1"`` even when only
    one value occurs.
    """
    if name not in frame.columns:
        raise ModelError(f"data has no column {name!r}")
    values = sorted(set(frame[name].astype(str).str.strip()))
    if set(values) <= {"0", "1"}:
        return Variable(name, 2)
    if len(values) < 2:
        values = values + [f"{values[0]}_unobserved"]
    return Variable(name, len(values), labels=values)


def plug_in(counts: np.ndarray, smooth: float = 0.0) -> np.ndarray:
    """Relative frequencies after adding ``smooth`` to every cell."""
    if smooth < 0:
        raise ModelError("smoothing must be nonnegative")
    c = np.asarray(counts, dtype=float) + smooth
    total = c.sum()
    if total <= 0:
        raise ModelError("the data contain no observations")
    return c / total


def write_data(frame: pd.DataFrame, path: str | Path) -> None:
    frame.to_csv(path, index=False)
