"""Exact inference on clique trees.

Pipeline: moralize the DAG, triangulate with min-fill (ties broken by
declaration order), extract maximal cliques, connect them by a maximum
spanning forest on separator size, then calibrate by two-pass message
passing (collect to a fixed root, distribute back).  Calibrated clique
tables are exact posterior marginals over their scopes.

Tables are stored as full-rank numpy arrays: one axis per model variable,
materialized over the clique's scope and singleton elsewhere, so products
and divisions are plain broadcasting and marginalization is a keepdims sum.
Disconnected moral graphs yield a forest; each component is rooted and
normalized independently and the evidence probability is the product of
component masses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .network import NetworkModel, family_table

Evidence = Mapping[str, int]


@dataclass(eq=False)
class CliqueTree:
    """Clique forest with potentials, one per clique, plus separator tables.

    ``calibrated`` distinguishes the raw build (potentials are CPT products)
    from the propagated state (potentials are posterior marginals given
    ``evidence``).  Trees are never mutated; calibrate/absorb return new ones.
    """

    model: NetworkModel
    cliques: tuple[frozenset[str], ...]
    potentials: tuple[np.ndarray, ...]
    edges: tuple[tuple[int, int], ...]
    separator_scopes: tuple[frozenset[str], ...]
    separators: tuple[np.ndarray, ...]
    calibrated: bool = False
    evidence: dict[str, int] = field(default_factory=dict)
    evidence_probability: float | None = None

    def clique_containing(self, names) -> int:
        wanted = frozenset(names)
        for i, scope in enumerate(self.cliques):
            if wanted <= scope:
                return i
        raise ValueError(f"variables {sorted(wanted)} not in any clique")

    def joint_table(self) -> np.ndarray:
        """Product of clique tables over separator tables.

        For a built tree this is the model joint; for a calibrated tree the
        posterior; for an absorbed tree the conditional over the remaining
        variables (the removed variable's axis stays singleton).
        """
        num = np.ones((1,) * len(self.model.variables))
        for pot in self.potentials:
            num = num * pot
        den = np.ones((1,) * len(self.model.variables))
        for sep in self.separators:
            den = den * sep
        num = np.ascontiguousarray(np.broadcast_to(num, np.broadcast_shapes(num.shape, den.shape)))
        return _safe_divide(num, np.broadcast_to(den, num.shape))


def _safe_divide(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    np.divide(a, b, out=out, where=b != 0)
    return out


def _scope_shape(model: NetworkModel, scope: frozenset[str]) -> tuple[int, ...]:
    return tuple(
        model.cardinality(n) if n in scope else 1 for n in model.names
    )


def _marginalize(model: NetworkModel, table: np.ndarray, keep: frozenset[str]) -> np.ndarray:
    axes = tuple(i for i, n in enumerate(model.names) if n not in keep)
    return table.sum(axis=axes, keepdims=True) if axes else table.copy()


def _moral_adjacency(model: NetworkModel) -> dict[str, set[str]]:
    adj: dict[str, set[str]] = {n: set() for n in model.names}
    for child in model.names:
        members = list(model.parents[child]) + [child]
        for i, a in enumerate(members):
            for b in members[i + 1 :]:
                adj[a].add(b)
                adj[b].add(a)
    return adj


def _min_fill_clusters(model: NetworkModel) -> list[frozenset[str]]:
    adj = {n: set(nb) for n, nb in _moral_adjacency(model).items()}
    remaining = list(model.names)
    clusters: list[frozenset[str]] = []
    while remaining:
        best = None
        best_fill = None
        for n in remaining:  # declaration order breaks ties
            nbrs = [m for m in remaining if m in adj[n]]
            fill = sum(
                1
                for i, a in enumerate(nbrs)
                for b in nbrs[i + 1 :]
                if b not in adj[a]
            )
            if best_fill is None or fill < best_fill:
                best, best_fill = n, fill
        nbrs = [m for m in remaining if m in adj[best]]
        clusters.append(frozenset([best] + nbrs))
        for i, a in enumerate(nbrs):
            for b in nbrs[i + 1 :]:
                adj[a].add(b)
                adj[b].add(a)
        remaining.remove(best)
    return clusters


def _maximal(clusters: Sequence[frozenset[str]]) -> list[frozenset[str]]:
    kept: list[frozenset[str]] = []
    for c in clusters:
        if any(c <= other and c != other for other in clusters):
            continue
        if c in kept:
            continue
        kept.append(c)
    return kept


def _spanning_forest(cliques: Sequence[frozenset[str]]) -> list[tuple[int, int]]:
    """Kruskal on separator cardinality, deterministic tie-breaking."""
    candidates = []
    for i in range(len(cliques)):
        for j in range(i + 1, len(cliques)):
            w = len(cliques[i] & cliques[j])
            if w > 0:
                candidates.append((-w, i, j))
    candidates.sort()
    parent = list(range(len(cliques)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = []
    for _, i, j in candidates:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.append((i, j))
    return edges


def build(model: NetworkModel) -> CliqueTree:
    """Construct the uncalibrated clique tree for a valid model.

    Each family CPT is multiplied into the first clique covering it, so the
    product of clique potentials over separator tables equals the joint.
    """
    clusters = _min_fill_clusters(model)
    cliques = tuple(_maximal(clusters))
    edges = tuple(_spanning_forest(cliques))
    sep_scopes = tuple(cliques[i] & cliques[j] for i, j in edges)

    pots = [
        np.ones(_scope_shape(model, scope)) for scope in cliques
    ]
    for v in model.variables:
        fam = frozenset(list(model.parents[v.name]) + [v.name])
        home = None
        for i, scope in enumerate(cliques):
            if fam <= scope:
                home = i
                break
        if home is None:  # cannot happen for min-fill over the moral graph
            raise AssertionError(f"family of {v.name} not covered by any clique")
        pots[home] = pots[home] * family_table(model, v.name)
    seps = tuple(np.ones(_scope_shape(model, s)) for s in sep_scopes)
    return CliqueTree(model, cliques, tuple(pots), edges, sep_scopes, seps)


def _components(tree: CliqueTree) -> list[list[int]]:
    adj: dict[int, list[int]] = {i: [] for i in range(len(tree.cliques))}
    for e, (i, j) in enumerate(tree.edges):
        adj[i].append(j)
        adj[j].append(i)
    seen: set[int] = set()
    comps = []
    for i in range(len(tree.cliques)):
        if i in seen:
            continue
        comp = []
        stack = [i]
        seen.add(i)
        while stack:
            c = stack.pop()
            comp.append(c)
            for nb in sorted(adj[c]):
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        comps.append(sorted(comp))
    return comps


def _schedule(tree: CliqueTree) -> tuple[list[int], list[tuple[int, int, int]]]:
    """Roots (one per component) and a BFS ordering of (clique, parent, edge)."""
    edge_of = {}
    adj: dict[int, list[tuple[int, int]]] = {i: [] for i in range(len(tree.cliques))}
    for e, (i, j) in enumerate(tree.edges):
        adj[i].append((j, e))
        adj[j].append((i, e))
        edge_of[(i, j)] = e

    decl = tree.model.index
    roots = []
    order: list[tuple[int, int, int]] = []
    for comp in _components(tree):
        root = min(
            comp,
            key=lambda c: (min(decl[n] for n in tree.cliques[c]), c),
        )
        roots.append(root)
        visited = {root}
        queue = [root]
        while queue:
            c = queue.pop(0)
            for nb, e in sorted(adj[c]):
                if nb not in visited:
                    visited.add(nb)
                    order.append((nb, c, e))
                    queue.append(nb)
    return roots, order


def calibrate(tree: CliqueTree, evidence: Evidence) -> tuple[CliqueTree, float]:
    """Propagate evidence and return (calibrated tree, evidence probability).

    After calibration every clique table is the exact posterior marginal
    over its scope given the evidence, neighboring cliques agree on their
    separators, and the returned probability is the total joint mass
    consistent with the evidence.
    """
    if tree.calibrated:
        raise ValueError("tree already calibrated; calibrate from the built tree")
    model = tree.model
    pots = [p.copy() for p in tree.potentials]
    seps = [s.copy() for s in tree.separators]

    for name in evidence:
        if name not in model.index:
            raise ValueError(f"evidence on unknown variable {name!r}")
    for name in sorted(evidence, key=lambda n: model.index[n]):
        state = evidence[name]
        card = model.cardinality(name)
        if not 0 <= state < card:
            raise ValueError(f"evidence state {state} out of range for {name!r}")
        home = tree.clique_containing([name])
        indicator = np.zeros(card)
        indicator[state] = 1.0
        shape = [1] * len(model.names)
        shape[model.index[name]] = card
        pots[home] = pots[home] * indicator.reshape(shape)

    roots, order = _schedule(tree)

    # collect: leaves toward roots
    for c, parent, e in reversed(order):
        msg = _marginalize(model, pots[c], tree.separator_scopes[e])
        pots[parent] = pots[parent] * _safe_divide(msg, seps[e])
        seps[e] = msg

    comp_mass: dict[int, float] = {}
    comps = _components(tree)
    total = 1.0
    for comp, root in zip(comps, roots):
        z = float(pots[root].sum())
        if z <= 0.0 or not np.isfinite(z):
            raise ValueError("evidence probability underflow")
        for c in comp:
            comp_mass[c] = z
        total *= z

    # distribute: roots toward leaves
    for c, parent, e in order:
        msg = _marginalize(model, pots[parent], tree.separator_scopes[e])
        pots[c] = pots[c] * _safe_divide(msg, seps[e])
        seps[e] = msg

    for i in range(len(pots)):
        pots[i] = pots[i] / comp_mass[i]
    for e, (i, _) in enumerate(tree.edges):
        seps[e] = seps[e] / comp_mass[i]

    out = CliqueTree(
        model,
        tree.cliques,
        tuple(pots),
        tree.edges,
        tree.separator_scopes,
        tuple(seps),
        calibrated=True,
        evidence=dict(evidence),
        evidence_probability=total,
    )
    return out, total


def marginal(tree: CliqueTree, names: Sequence[str]) -> np.ndarray:
    """Posterior table over ``names`` (axes follow the argument order).

    The variables must be jointly covered by a single clique.
    """
    if not tree.calibrated:
        raise ValueError("marginal requires a calibrated tree")
    model = tree.model
    home = tree.clique_containing(names)
    keep = frozenset(names)
    table = _marginalize(model, tree.potentials[home], keep)
    ordered = sorted(names, key=lambda n: model.index[n])
    table = table.reshape([model.cardinality(n) for n in ordered])
    perm = [ordered.index(n) for n in names]
    return table.transpose(perm)


def family_posteriors(tree: CliqueTree, evidence: Evidence) -> dict[str, np.ndarray]:
    """P(variable, parents | evidence) for every variable, as full-rank tables."""
    calibrated, _ = calibrate(tree, evidence)
    model = tree.model
    out = {}
    for v in model.variables:
        fam = frozenset(list(model.parents[v.name]) + [v.name])
        home = calibrated.clique_containing(fam)
        out[v.name] = _marginalize(model, calibrated.potentials[home], fam)
    return out


def absorb(tree: CliqueTree, name: str, state: int) -> CliqueTree:
    """Condition on ``name = state`` and drop the variable from the tree.

    Calibrates with that single piece of evidence, slices every table at the
    observed state, and renormalizes (the calibration already divides by
    the evidence probability).  The result is a calibrated tree whose
    implied joint is the conditional distribution of the remaining
    variables.
    """
    calibrated, _ = calibrate(tree, {name: state})
    model = tree.model
    axis = model.index[name]

    def cut(table: np.ndarray, scope: frozenset[str]) -> np.ndarray:
        if name in scope:
            return np.take(table, [state], axis=axis)
        return table

    cliques = tuple(scope - {name} for scope in calibrated.cliques)
    pots = tuple(cut(p, s) for p, s in zip(calibrated.potentials, calibrated.cliques))
    sep_scopes = tuple(s - {name} for s in calibrated.separator_scopes)
    seps = tuple(cut(p, s) for p, s in zip(calibrated.separators, calibrated.separator_scopes))
    return CliqueTree(
        model,
        cliques,
        pots,
        calibrated.edges,
        sep_scopes,
        seps,
        calibrated=True,
        evidence={},
        evidence_probability=None,
    )


def _entropy_sum(table: np.ndarray) -> float:
    positive = table[table > 0]
    return float(np.sum(positive * np.log(positive)))


def tree_negative_entropy(tree: CliqueTree) -> float:
    """Sum of p*ln(p) of the tree's distribution via clique decomposition.

    Valid because the implied joint factors as the product of calibrated
    clique marginals over separator marginals.
    """
    if not tree.calibrated:
        raise ValueError("entropy requires a calibrated tree")
    total = 0.0
    for pot in tree.potentials:
        total += _entropy_sum(pot)
    for sep in tree.separators:
        total -= _entropy_sum(sep)
    return total
