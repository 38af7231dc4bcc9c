"""Network JSON and observation CSV formats.

Network files are a single JSON object with exactly the keys "variables",
"parents" and "cpts"; unknown keys are rejected so typos fail loudly.
Probabilities are written with 17 significant digits, which makes
write/read round trips exact at double precision.

Observation files are CSV with a header row of variable names (any order,
any subset of the model's variables); each following row holds state
labels, with "?" or an empty field marking a missing value.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Sequence

import numpy as np

from .network import NetworkModel, Observation, Variable

MISSING_TOKENS = ("", "?")


class InputError(ValueError):
    """A problem with user-supplied input (file contents, labels, paths)."""


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def network_to_json(model: NetworkModel) -> str:
    """Serialize a network; field order and float formatting are fixed so
    identical models produce identical bytes."""
    lines = ["{", '  "variables": [']
    for i, v in enumerate(model.variables):
        states = ", ".join(json.dumps(s) for s in v.states)
        comma = "," if i + 1 < len(model.variables) else ""
        lines.append(f'    {{"name": {json.dumps(v.name)}, "states": [{states}]}}{comma}')
    lines.append("  ],")
    lines.append('  "parents": {')
    for i, v in enumerate(model.variables):
        ps = ", ".join(json.dumps(p) for p in model.parents[v.name])
        comma = "," if i + 1 < len(model.variables) else ""
        lines.append(f"    {json.dumps(v.name)}: [{ps}]{comma}")
    lines.append("  },")
    lines.append('  "cpts": {')
    for i, v in enumerate(model.variables):
        rows = ", ".join(
            "[" + ", ".join(_fmt(x) for x in row) + "]" for row in model.cpts[v.name]
        )
        comma = "," if i + 1 < len(model.variables) else ""
        lines.append(f"    {json.dumps(v.name)}: [{rows}]{comma}")
    lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_network(text: str, require_cpts: bool = True) -> NetworkModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(
            f"invalid JSON: {exc.msg} (line {exc.lineno} column {exc.colno})"
        ) from exc
    if not isinstance(doc, dict):
        raise InputError("network file must contain a JSON object")
    unknown = set(doc) - {"variables", "parents", "cpts"}
    if unknown:
        raise InputError(f"unknown top-level keys: {sorted(unknown)}")
    if "variables" not in doc:
        raise InputError('missing "variables"')

    variables: list[Variable] = []
    for entry in doc["variables"]:
        if not isinstance(entry, dict):
            raise InputError("each variable must be an object")
        extra = set(entry) - {"name", "states"}
        if extra:
            raise InputError(f"unknown variable keys: {sorted(extra)}")
        if "name" not in entry or "states" not in entry:
            raise InputError('variables need both "name" and "states"')
        if not isinstance(entry["name"], str):
            raise InputError("variable names must be strings")
        states = entry["states"]
        if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
            raise InputError(f"states of {entry['name']!r} must be a list of strings")
        variables.append(Variable(entry["name"], tuple(states)))
    declared = {v.name for v in variables}

    parents_doc = doc.get("parents", {})
    if not isinstance(parents_doc, dict):
        raise InputError('"parents" must be an object')
    for name, plist in parents_doc.items():
        if name not in declared:
            raise InputError(f"parents given for undeclared variable {name!r}")
        if not isinstance(plist, list):
            raise InputError(f"parent list of {name!r} must be a list")
        for p in plist:
            if p not in declared:
                raise InputError(f"unknown parent {p!r} of {name!r}")
    parents = {v.name: tuple(parents_doc.get(v.name, ())) for v in variables}

    cpts_doc = doc.get("cpts", {})
    if not isinstance(cpts_doc, dict):
        raise InputError('"cpts" must be an object')
    for name in cpts_doc:
        if name not in declared:
            raise InputError(f"CPT given for undeclared variable {name!r}")
    cpts: dict[str, np.ndarray] = {}
    for v in variables:
        if v.name not in cpts_doc:
            if require_cpts:
                raise InputError(f"missing CPT for variable {v.name!r}")
            rows = 1
            for p in parents[v.name]:
                rows *= len(next(u.states for u in variables if u.name == p))
            table = np.full((rows, v.cardinality), 1.0 / v.cardinality)
        else:
            try:
                table = np.asarray(cpts_doc[v.name], dtype=np.float64)
            except (TypeError, ValueError) as exc:
                raise InputError(f"CPT of {v.name!r} is not a numeric table") from exc
            if table.ndim == 1:
                table = table.reshape(1, -1)
            if table.ndim != 2:
                raise InputError(f"CPT of {v.name!r} must be a list of rows")
        table = np.ascontiguousarray(table)
        table.setflags(write=False)
        cpts[v.name] = table
    return NetworkModel(tuple(variables), parents, cpts)


def load_network(path: str) -> NetworkModel:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return parse_network(text)


def load_structure(path: str) -> NetworkModel:
    """Load a network file for its structure only.

    The "cpts" key may be absent or partial, and any provided table values
    are discarded: every variable gets a uniform placeholder table, so the
    result always validates and callers can rely on variables and parents
    alone.
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    parsed = parse_network(text, require_cpts=False)
    uniform = {}
    for v in parsed.variables:
        rows = 1
        for p in parsed.parents[v.name]:
            rows *= parsed.cardinality(p)
        table = np.full((rows, v.cardinality), 1.0 / v.cardinality)
        table.setflags(write=False)
        uniform[v.name] = table
    return NetworkModel(parsed.variables, dict(parsed.parents), uniform)


def save_network(path: str, model: NetworkModel) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(network_to_json(model))


def observations_to_csv(model: NetworkModel, observations: Sequence[Observation]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(model.names)
    for obs in observations:
        row = []
        for v in model.variables:
            state = obs.assignment.get(v.name)
            row.append("?" if state is None else v.states[state])
        writer.writerow(row)
    return buf.getvalue()


def observations_from_csv(text: str, model: NetworkModel) -> list[Observation]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("observation file is empty") from None
    for col, name in enumerate(header):
        if name not in model.index:
            raise InputError(f"unknown variable {name!r} in column {col + 1}")
    if len(set(header)) != len(header):
        raise InputError("duplicate column names in header")
    state_index = {
        v.name: {label: j for j, label in enumerate(v.states)} for v in model.variables
    }
    out: list[Observation] = []
    for i, row in enumerate(reader, start=2):
        if len(row) != len(header):
            raise InputError(
                f"row {i}: expected {len(header)} fields, found {len(row)}"
            )
        assignment: dict[str, int] = {}
        for name, value in zip(header, row):
            if value in MISSING_TOKENS:
                continue
            lookup = state_index[name]
            if value not in lookup:
                raise InputError(
                    f"row {i}: unknown state {value!r} for variable {name!r}"
                )
            assignment[name] = lookup[value]
        if not assignment:
            raise InputError(f"row {i}: no observed values")
        out.append(Observation(assignment))
    return out


def load_observations(path: str, model: NetworkModel) -> list[Observation]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as handle:
            text = handle.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return observations_from_csv(text, model)


def save_observations(path: str, model: NetworkModel, observations: Sequence[Observation]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(observations_to_csv(model, observations))
