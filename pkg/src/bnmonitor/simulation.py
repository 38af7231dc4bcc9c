"""Monte Carlo harness for calibrating and stress-testing the monitor.

Each replication draws a fresh sample from the true model, optionally fits
the scored model's tables onto a fixed structure from that same sample,
streams the sample through a fresh monitor, and keeps the resulting report.
Replication seeds are derived from (seed, replication index), so results
are bitwise independent of execution order and thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .monitor import (
    ModelProfile,
    MonitorState,
    TestConfig,
    normal_cdf,
    report,
)
from .network import NetworkModel, enumerate_joint, ml_project, sample


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulation scenario.

    Exactly one of ``scored_model`` (a fixed distribution) or ``structure``
    (tables refitted per replication by smoothed maximum likelihood) must be
    given.  ``threads`` only controls execution; results are identical for
    any value.
    """

    true_model: NetworkModel
    scored_model: NetworkModel | None = None
    structure: NetworkModel | None = None
    n: int = 1000
    reps: int = 200
    alpha: float = 0.05
    seed: int = 0
    missing_rate: float = 0.0
    pseudocount: float = 1.0
    min_n: int = 30
    bonferroni: bool = False
    threads: int = 1

    def check(self) -> None:
        if (self.scored_model is None) == (self.structure is None):
            raise ValueError("provide exactly one of scored_model or structure")
        other = self.scored_model if self.scored_model is not None else self.structure
        if other.names != self.true_model.names:
            raise ValueError("true and scored models must share variables")
        for a, b in zip(self.true_model.variables, other.variables):
            if a.states != b.states:
                raise ValueError(f"state labels differ for variable {a.name!r}")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if self.n < self.min_n:
            raise ValueError("n must be at least min_n")
        if self.structure is not None and self.missing_rate > 0:
            raise ValueError(
                "ML projection requires complete data; set missing_rate to 0"
            )


@dataclass(frozen=True)
class RepRecord:
    rep: int
    w: float
    signed_z: float
    reject: bool
    max_w: tuple[float, ...]
    flagged: tuple[bool, ...]


@dataclass(frozen=True)
class SimResult:
    """Aggregate over replications plus the per-replication records."""

    rejection_rate_global: float
    per_variable_rates: dict[str, float]
    signed_z_mean: float
    signed_z_std: float
    w_values: tuple[float, ...]
    seed: int
    records: tuple[RepRecord, ...] = field(repr=False, default=())

    def to_json_dict(self) -> dict:
        def num(x: float):
            if math.isinf(x):
                return "inf" if x > 0 else "-inf"
            return x

        return {
            "rejection_rate_global": self.rejection_rate_global,
            "per_variable_rates": {k: v for k, v in self.per_variable_rates.items()},
            "signed_z_mean": num(self.signed_z_mean),
            "signed_z_std": num(self.signed_z_std),
            "w_values": [num(w) for w in self.w_values],
            "seed": self.seed,
        }


def replication_seeds(seed: int, rep: int) -> tuple[int, int]:
    """Derived (sample_seed, mask_seed) for one replication."""
    state = np.random.SeedSequence(entropy=(seed, rep)).generate_state(2, dtype=np.uint64)
    return int(state[0]), int(state[1])


def _one_rep(spec: ScenarioSpec, profile: ModelProfile | None, rep: int) -> RepRecord:
    sample_seed, mask_seed = replication_seeds(spec.seed, rep)
    data = sample(spec.true_model, spec.n, sample_seed, spec.missing_rate, mask_seed)
    if profile is None:
        fitted = ml_project(spec.structure, data, spec.pseudocount)
        state = MonitorState(fitted)
    else:
        state = MonitorState(profile)
    for x in data:
        state.update(x)
    config = TestConfig(alpha=spec.alpha, min_n=spec.min_n, bonferroni=spec.bonferroni)
    rep_report = report(state, config)
    names = spec.true_model.names
    max_w = {vs.variable: vs.max_w for vs in rep_report.variable_summary}
    flagged_cells: dict[str, bool] = {name: False for name in names}
    for cell in rep_report.per_variable:
        if cell.reject:
            flagged_cells[cell.variable] = True
    return RepRecord(
        rep=rep,
        w=rep_report.w,
        signed_z=rep_report.signed_z,
        reject=rep_report.reject,
        max_w=tuple(max_w[name] for name in names),
        flagged=tuple(flagged_cells[name] for name in names),
    )


def run(spec: ScenarioSpec) -> SimResult:
    """Execute every replication and aggregate."""
    spec.check()
    profile = ModelProfile(spec.scored_model) if spec.scored_model is not None else None

    if spec.threads > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            records = list(pool.map(lambda r: _one_rep(spec, profile, r), range(spec.reps)))
    else:
        records = [_one_rep(spec, profile, r) for r in range(spec.reps)]

    names = spec.true_model.names
    m = len(records)
    reject_rate = sum(1 for r in records if r.reject) / m
    per_var = {
        name: sum(1 for r in records if r.flagged[j]) / m
        for j, name in enumerate(names)
    }
    z = [r.signed_z for r in records]
    z_mean = sum(z) / m
    if m > 1 and all(math.isfinite(v) for v in z):
        z_std = math.sqrt(sum((v - z_mean) ** 2 for v in z) / (m - 1))
    else:
        z_std = 0.0 if all(math.isfinite(v) for v in z) else float("inf")
    return SimResult(
        rejection_rate_global=reject_rate,
        per_variable_rates=per_var,
        signed_z_mean=z_mean,
        signed_z_std=z_std,
        w_values=tuple(r.w for r in records),
        seed=spec.seed,
        records=tuple(records),
    )


def structure_contrast(spec: ScenarioSpec) -> SimResult:
    """Run a scenario whose scored structure omits at least one true arc.

    The result carries the global rejection rate and the per-variable
    conditional rates side by side; the interesting quantity is their gap.
    """
    spec.check()
    if spec.structure is None:
        raise ValueError("structure_contrast needs a structure to project onto")
    missing = spec.true_model.arcs() - spec.structure.arcs()
    if not missing:
        raise ValueError("scored structure omits no arc of the true model")
    return run(spec)


@dataclass(frozen=True)
class CltSummary:
    """Descriptive normality check of the standardized statistic."""

    signed_z_mean: float
    signed_z_std: float
    cdf_distance: float
    reps: int
    n: int


def score_variance(model: NetworkModel) -> float:
    """Variance of the log score under the model itself."""
    flat = enumerate_joint(model).values
    logs = np.log(flat)
    mean = float(np.sum(flat * logs))
    return float(np.sum(flat * logs * logs) - mean * mean)


def clt_diagnostic(spec: ScenarioSpec) -> CltSummary:
    """Check that standardized means look standard normal when the scored
    model is the data-generating one."""
    spec.check()
    if spec.scored_model is None:
        raise ValueError("clt_diagnostic needs a fixed scored model equal to the true one")
    if spec.missing_rate > 0:
        raise ValueError("clt_diagnostic is defined for complete data")
    pi = enumerate_joint(spec.true_model).values
    p = enumerate_joint(spec.scored_model).values
    if not np.allclose(pi, p, rtol=0, atol=1e-12):
        raise ValueError("clt_diagnostic requires the scored model to equal the true model")
    if score_variance(spec.true_model) <= 1e-15:
        raise ValueError(
            "log-score variance is zero for this model (uniform cell probabilities, "
            "as in a fair coin); the standardized statistic is undefined"
        )
    result = run(spec)
    z = sorted(result.records[i].signed_z for i in range(len(result.records)))
    m = len(z)
    distance = 0.0
    for i, value in enumerate(z):
        cdf = normal_cdf(value)
        distance = max(distance, abs((i + 1) / m - cdf), abs(i / m - cdf))
    return CltSummary(
        signed_z_mean=result.signed_z_mean,
        signed_z_std=result.signed_z_std,
        cdf_distance=distance,
        reps=spec.reps,
        n=spec.n,
    )
