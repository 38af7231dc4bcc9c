"""Logarithmic scores and entropy quantities.

All logarithms are natural.  Scores of probabilities are always <= 0, and
strict positivity of CPT entries keeps every quantity finite.  The
"negative entropy" naming is deliberate: these are sums of p*ln(p), which
are negative numbers, and the sign is never flipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .junction import (
    CliqueTree,
    absorb,
    build,
    calibrate,
    family_posteriors,
    marginal,
    tree_negative_entropy,
)
from .network import NetworkModel, Observation, enumerate_joint, family_table

SCORE_KINDS = ("complete", "expected", "conditional")


@dataclass(frozen=True)
class ScoreValue:
    """A log score in natural-log units with its provenance kind."""

    value: float
    kind: str


def log_score(model: NetworkModel, x: Observation) -> ScoreValue:
    """ln of the joint probability of a complete observation."""
    if not x.is_complete(model):
        raise ValueError(
            "observation incomplete; use expected_log_score for partial observations"
        )
    a = x.assignment
    total = 0.0
    for name in model.names:
        total += math.log(model.cpts[name][model.row_index(name, a), a[name]])
    return ScoreValue(total, "complete")


def expected_log_score(
    model: NetworkModel,
    tree: CliqueTree,
    x: Observation,
    log_fams: dict[str, np.ndarray] | None = None,
) -> ScoreValue:
    """Expected complete-data log score given a partial observation.

    Because ln of the joint decomposes additively over families, the
    expectation is the sum over families of the family posterior (given the
    observation as evidence) against the family's log CPT.  Equals
    :func:`log_score` when the observation is complete.

    ``log_fams`` may carry precomputed log family tables for streaming use.
    """
    if not x.assignment:
        raise ValueError("no evidence: observation has no assigned variables")
    if log_fams is None:
        log_fams = {name: np.log(family_table(model, name)) for name in model.names}
    posts = family_posteriors(tree, x.assignment)
    total = 0.0
    for name in model.names:
        total += float(np.sum(posts[name] * log_fams[name]))
    return ScoreValue(total, "expected" if not x.is_complete(model) else "complete")


def conditional_log_score(
    model: NetworkModel,
    x: Observation,
    name: str,
    tree: CliqueTree | None = None,
) -> ScoreValue:
    """Log score of x's remaining variables under the conditional given its
    own value of ``name``; equals log_score(x) - ln P(name = value)."""
    if not x.is_complete(model):
        raise ValueError(
            "observation incomplete; the monitor handles partial conditional scores"
        )
    state = x.assignment[name]
    if tree is None:
        tree = build(model)
    if not tree.calibrated:
        tree, _ = calibrate(tree, {})
    elif tree.evidence:
        raise ValueError("conditional score needs a tree calibrated without evidence")
    prior = float(marginal(tree, [name])[state])
    return ScoreValue(log_score(model, x).value - math.log(prior), "conditional")


def negative_entropy(model: NetworkModel, tree: CliqueTree) -> float:
    """Sum of p*ln(p) of the model, via the calibrated clique decomposition."""
    if not tree.calibrated or tree.evidence:
        raise ValueError("negative_entropy needs a tree calibrated without evidence")
    if tree.model.names != model.names:
        raise ValueError("tree was built for a different model")
    return tree_negative_entropy(tree)


def conditional_negative_entropy(
    model: NetworkModel,
    name: str,
    state: int,
    tree: CliqueTree | None = None,
) -> float:
    """Sum of q*ln(q) of the conditional distribution given ``name = state``,
    computed as the entropy of the absorbed clique tree."""
    if tree is None:
        tree = build(model)
    if tree.calibrated:
        raise ValueError("absorb works from the built tree")
    return tree_negative_entropy(absorb(tree, name, state))


def cross_mean(true_model: NetworkModel, scored_model: NetworkModel) -> float:
    """Expected log score of the scored model under the true one.

    This is the quantity the running mean of scores converges to.  It never
    exceeds the true model's negative entropy, with equality exactly when
    the two distributions coincide (the score is strictly proper).
    """
    if true_model.names != scored_model.names or true_model.shape != scored_model.shape:
        raise ValueError("variable mismatch between true and scored models")
    for a, b in zip(true_model.variables, scored_model.variables):
        if a.states != b.states:
            raise ValueError(f"state labels differ for variable {a.name!r}")
    pi = enumerate_joint(true_model).values
    p = enumerate_joint(scored_model).values
    return float(np.sum(pi * np.log(p)))
