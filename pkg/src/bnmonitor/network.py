"""Discrete Bayesian networks over categorical variables.

A network is a DAG over named categorical variables together with one
conditional probability table (CPT) per variable.  CPT rows are indexed by
parent configurations in mixed-radix order with the first-listed parent
varying slowest; the same convention (first-declared variable slowest)
defines the flat cell index of the joint table.

This module owns the representation plus the brute-force machinery every
other component is checked against: full joint enumeration, ancestral
sampling, and maximum-likelihood fitting of tables onto a fixed structure.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

DEFAULT_CELL_CAP = 2**20
ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Variable:
    """A categorical variable with ordered state labels."""

    name: str
    states: tuple[str, ...]

    @property
    def cardinality(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class Observation:
    """One (possibly partial) case: a map from variable name to state index.

    Variables absent from the mapping are unobserved.  Completeness is
    relative to a model, so it is exposed as a method rather than a field.
    """

    assignment: Mapping[str, int]

    def is_complete(self, model: "NetworkModel") -> bool:
        return len(self.assignment) == len(model.variables)


def _slowest_first_strides(cards: Sequence[int]) -> tuple[int, ...]:
    """Mixed-radix strides with the first position varying slowest."""
    strides = [1] * len(cards)
    for i in range(len(cards) - 2, -1, -1):
        strides[i] = strides[i + 1] * cards[i + 1]
    return tuple(strides)


@dataclass(eq=False)
class NetworkModel:
    """Immutable-by-convention network: variables, parent map, CPTs.

    ``cpts[name]`` has shape ``(row_count, cardinality)`` where rows follow
    the parent configurations in mixed-radix order, first-listed parent
    varying slowest.  Use :func:`validate` to obtain a list of invariant
    violations; operations here assume a valid model.
    """

    variables: tuple[Variable, ...]
    parents: dict[str, tuple[str, ...]]
    cpts: dict[str, np.ndarray]

    @classmethod
    def build(
        cls,
        variables: Iterable[Variable | tuple[str, Sequence[str]]],
        parents: Mapping[str, Sequence[str]],
        cpts: Mapping[str, object],
    ) -> "NetworkModel":
        """Coerce plain lists/dicts into a normalized model."""
        vs = []
        for v in variables:
            if isinstance(v, Variable):
                vs.append(v)
            else:
                name, states = v
                vs.append(Variable(name, tuple(states)))
        vs = tuple(vs)
        pa = {v.name: tuple(parents.get(v.name, ())) for v in vs}
        tables = {}
        for v in vs:
            arr = np.asarray(cpts[v.name], dtype=np.float64)
            if arr.ndim == 1:
                arr = arr.reshape(1, -1)
            arr = np.ascontiguousarray(arr)
            arr.setflags(write=False)
            tables[v.name] = arr
        return cls(vs, pa, tables)

    # -- derived structure ------------------------------------------------

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @cached_property
    def index(self) -> dict[str, int]:
        return {v.name: i for i, v in enumerate(self.variables)}

    @cached_property
    def shape(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.variables)

    @cached_property
    def cell_count(self) -> int:
        return int(np.prod([c for c in self.shape], dtype=object))

    @cached_property
    def strides(self) -> tuple[int, ...]:
        return _slowest_first_strides(self.shape)

    def variable(self, name: str) -> Variable:
        return self.variables[self.index[name]]

    def cardinality(self, name: str) -> int:
        return self.variable(name).cardinality

    def row_count(self, name: str) -> int:
        n = 1
        for p in self.parents[name]:
            n *= self.cardinality(p)
        return n

    @cached_property
    def topological_order(self) -> tuple[str, ...]:
        """Kahn's algorithm, ties broken by declaration order."""
        remaining = {v.name: set(self.parents[v.name]) for v in self.variables}
        order: list[str] = []
        placed: set[str] = set()
        while remaining:
            ready = [n for n in self.names if n in remaining and remaining[n] <= placed]
            if not ready:
                raise ValueError(
                    "parent relation contains a cycle involving: "
                    + ", ".join(sorted(remaining))
                )
            for n in ready:
                order.append(n)
                placed.add(n)
                del remaining[n]
        return tuple(order)

    # -- indexing ----------------------------------------------------------

    def row_index(self, name: str, assignment: Mapping[str, int]) -> int:
        """CPT row for ``name`` under the given parent states."""
        pa = self.parents[name]
        row = 0
        stride = 1
        for p in reversed(pa):
            row += assignment[p] * stride
            stride *= self.cardinality(p)
        return row

    def cell_index(self, assignment: Mapping[str, int]) -> int:
        """Flat joint-table index of a complete assignment."""
        k = 0
        for name, stride in zip(self.names, self.strides):
            k += assignment[name] * stride
        return k

    def assignment_of_cell(self, k: int) -> dict[str, int]:
        out = {}
        for name, stride, card in zip(self.names, self.strides, self.shape):
            out[name] = (k // stride) % card
        return out

    def arcs(self) -> set[tuple[str, str]]:
        return {(p, child) for child in self.names for p in self.parents[child]}


def family_table(model: NetworkModel, name: str) -> np.ndarray:
    """The CPT of ``name`` as a full-rank array broadcastable over the joint.

    The result has one axis per model variable, singleton everywhere except
    the family (parents + child), so family tables of different variables
    multiply together by plain numpy broadcasting.
    """
    pa = model.parents[name]
    members = list(pa) + [name]
    cards = [model.cardinality(m) for m in members]
    arr = model.cpts[name].reshape(cards)
    order = sorted(range(len(members)), key=lambda i: model.index[members[i]])
    arr = arr.transpose(order)
    shape = [1] * len(model.variables)
    for m in members:
        shape[model.index[m]] = model.cardinality(m)
    return arr.reshape(shape)


def validate(model: NetworkModel) -> list[str]:
    """Collect every invariant violation; an empty list means valid.

    Violations are data, not errors: the function never raises for a
    malformed model, it describes what is wrong and where.
    """
    violations: list[str] = []
    seen = set()
    for v in model.variables:
        if v.name in seen:
            violations.append(f"duplicate variable name {v.name!r}")
        seen.add(v.name)
        if v.cardinality < 2:
            violations.append(f"variable {v.name!r} has fewer than 2 states")
        if len(set(v.states)) != len(v.states):
            violations.append(f"duplicate state labels in variable {v.name!r}")

    for name, pa in model.parents.items():
        if name not in model.index:
            violations.append(f"parents declared for unknown variable {name!r}")
            continue
        for p in pa:
            if p not in model.index:
                violations.append(f"unknown parent {p!r} of {name!r}")
        if len(set(pa)) != len(pa):
            violations.append(f"repeated parent in parent list of {name!r}")

    try:
        model.topological_order
    except ValueError as exc:
        violations.append(str(exc))

    for v in model.variables:
        name = v.name
        if name not in model.cpts:
            violations.append(f"missing CPT for {name!r}")
            continue
        if any(p not in model.index for p in model.parents.get(name, ())):
            continue  # row count is meaningless with unknown parents
        table = model.cpts[name]
        expected_rows = model.row_count(name)
        if table.shape != (expected_rows, v.cardinality):
            violations.append(
                f"CPT for {name!r} has shape {table.shape}, "
                f"expected ({expected_rows}, {v.cardinality})"
            )
            continue
        sums = table.sum(axis=1)
        for r in np.nonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)[0]:
            violations.append(
                f"row sum != 1 at {name} row {int(r)} (sum={sums[r]:.12g})"
            )
        bad = np.argwhere(table <= 0.0)
        for r, c in bad:
            violations.append(
                f"zero or negative entry at {name} row {int(r)} state {int(c)}"
            )
    return violations


def joint_probability(model: NetworkModel, x: Observation) -> float:
    """Probability of a complete assignment: product over family CPT entries."""
    if not x.is_complete(model):
        raise ValueError("observation incomplete")
    a = x.assignment
    prob = 1.0
    for name in model.names:
        prob *= float(model.cpts[name][model.row_index(name, a), a[name]])
    return prob


@dataclass(frozen=True)
class JointTable:
    """Flat joint distribution; cell k encodes the k-th full assignment
    (first-declared variable varying slowest)."""

    names: tuple[str, ...]
    cards: tuple[int, ...]
    values: np.ndarray

    def as_array(self) -> np.ndarray:
        return self.values.reshape(self.cards)

    def cell_index(self, assignment: Mapping[str, int]) -> int:
        strides = _slowest_first_strides(self.cards)
        return sum(assignment[n] * s for n, s in zip(self.names, strides))


def enumerate_joint(model: NetworkModel, cap: int = DEFAULT_CELL_CAP) -> JointTable:
    """Materialize the full joint table (the oracle for everything else)."""
    t = model.cell_count
    if t > cap:
        raise ValueError(f"joint table would have {t} cells, exceeding the cap of {cap}")
    table = np.ones((1,) * len(model.variables))
    for v in model.variables:
        table = table * family_table(model, v.name)
    flat = np.ascontiguousarray(np.broadcast_to(table, model.shape)).reshape(-1)
    return JointTable(model.names, model.shape, flat)


def sample(
    model: NetworkModel,
    n: int,
    seed: int,
    missing_rate: float = 0.0,
    mask_seed: int = 0,
) -> list[Observation]:
    """Draw ``n`` i.i.d. cases by ancestral sampling, deterministically.

    State draws consume one uniform per (variable, case) in topological
    order from a generator seeded with ``seed``.  Masking uses a separate
    per-case generator derived from ``(mask_seed, case_index)`` so each
    case's mask is independent of every other case; a mask that would hide
    every variable is redrawn.
    """
    if not 0.0 <= missing_rate < 1.0:
        raise ValueError("missing_rate must be in [0, 1)")
    rng = np.random.default_rng(seed)
    s = len(model.variables)
    states = np.empty((n, s), dtype=np.int64)
    for name in model.topological_order:
        j = model.index[name]
        card = model.cardinality(name)
        pa = model.parents[name]
        rows = np.zeros(n, dtype=np.int64)
        stride = 1
        for p in reversed(pa):
            rows += states[:, model.index[p]] * stride
            stride *= model.cardinality(p)
        probs = model.cpts[name][rows]
        cum = np.cumsum(probs, axis=1)
        u = rng.random(n)
        idx = (u[:, None] >= cum).sum(axis=1)
        states[:, j] = np.minimum(idx, card - 1)

    names = model.names
    out: list[Observation] = []
    if missing_rate == 0.0:
        for i in range(n):
            row = states[i]
            out.append(Observation({names[j]: int(row[j]) for j in range(s)}))
        return out

    for i in range(n):
        mask_rng = np.random.default_rng(np.random.SeedSequence((mask_seed, i)))
        mask = mask_rng.random(s) < missing_rate
        while mask.all():
            mask = mask_rng.random(s) < missing_rate
        row = states[i]
        out.append(
            Observation({names[j]: int(row[j]) for j in range(s) if not mask[j]})
        )
    return out


def ml_project(
    structure: NetworkModel,
    data: Sequence[Observation],
    pseudocount: float = 0.0,
) -> NetworkModel:
    """Fit CPTs for a fixed structure by (smoothed) relative frequencies.

    ``structure``'s CPT values are ignored; only variables and parents are
    used.  With ``pseudocount`` 0 this is plain maximum likelihood, which
    requires every (row, state) count to be positive; a positive
    pseudocount keeps all fitted entries strictly positive on any sample.
    """
    if pseudocount < 0:
        raise ValueError("pseudocount must be nonnegative")
    if len(data) == 0:
        raise ValueError("no data to project")
    s = len(structure.variables)
    names = structure.names
    cols = np.empty((len(data), s), dtype=np.int64)
    for i, obs in enumerate(data):
        if not obs.is_complete(structure):
            raise ValueError(f"observation {i} incomplete; ML projection needs complete data")
        a = obs.assignment
        for j, name in enumerate(names):
            cols[i, j] = a[name]

    new_cpts: dict[str, np.ndarray] = {}
    for name in names:
        card = structure.cardinality(name)
        n_rows = structure.row_count(name)
        rows = np.zeros(len(data), dtype=np.int64)
        stride = 1
        for p in reversed(structure.parents[name]):
            rows += cols[:, structure.index[p]] * stride
            stride *= structure.cardinality(p)
        flat = rows * card + cols[:, structure.index[name]]
        counts = np.bincount(flat, minlength=n_rows * card).reshape(n_rows, card)
        counts = counts.astype(np.float64)
        if pseudocount == 0.0:
            row_totals = counts.sum(axis=1)
            empty = np.nonzero(row_totals == 0)[0]
            if empty.size:
                raise ValueError(
                    f"unsupported parent configuration for {name} row {int(empty[0])}"
                )
            zero = np.argwhere(counts == 0)
            if zero.size:
                r, c = zero[0]
                raise ValueError(
                    f"zero count for {name} row {int(r)} state {int(c)}; "
                    "use pseudocount > 0 to keep entries positive"
                )
        smoothed = counts + pseudocount
        table = smoothed / smoothed.sum(axis=1, keepdims=True)
        table.setflags(write=False)
        new_cpts[name] = table
    return NetworkModel(structure.variables, dict(structure.parents), new_cpts)
