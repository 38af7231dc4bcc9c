"""Streaming score accumulation and the model-failure test.

The monitor ingests observations one at a time, maintains Welford
accumulators for the global log-score stream and for each
(variable, value) conditional stream, and turns them into a report: the
standardized statistic W = |Ybar - mu_p| / (S / sqrt(n)), an approximate
posterior credible interval for the score mean, per-cell conditional
statistics, and arc suggestions for variables whose conditional streams
look wrong.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .junction import CliqueTree, build, calibrate, family_posteriors, marginal
from .network import NetworkModel, Observation, family_table
from .scoring import conditional_negative_entropy, negative_entropy

INF = float("inf")
ZERO_VARIANCE_TOL = 1e-12

_SQRT2 = math.sqrt(2.0)
_SQRT_TWO_PI = math.sqrt(2.0 * math.pi)


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


# Rational initial guess for the probit (Acklam), polished below.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)


def normal_quantile(prob: float) -> float:
    """Inverse standard normal CDF.

    Rational approximation plus two Newton corrections against erfc, good to
    well below 1e-8 absolute error over (0, 1).
    """
    if not 0.0 < prob < 1.0:
        raise ValueError("quantile argument must lie strictly between 0 and 1")
    p = prob
    plow = 0.02425
    if p < plow:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    elif p <= 1.0 - plow:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
              / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    for _ in range(2):
        err = normal_cdf(x) - p
        x -= err * _SQRT_TWO_PI * math.exp(0.5 * x * x)
    return x


@dataclass
class ScoreAccumulator:
    """Welford's single-pass mean/variance; mergeable across streams."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def update(self, value: float) -> None:
        self.n += 1
        delta = value - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (value - self.mean)

    def merge(self, other: "ScoreAccumulator") -> "ScoreAccumulator":
        if self.n == 0:
            return ScoreAccumulator(other.n, other.mean, other.m2)
        if other.n == 0:
            return ScoreAccumulator(self.n, self.mean, self.m2)
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta * delta * self.n * other.n / n
        return ScoreAccumulator(n, mean, m2)

    @property
    def sample_std(self) -> float:
        if self.n < 2:
            return 0.0
        return math.sqrt(max(self.m2, 0.0) / (self.n - 1))

    @classmethod
    def from_values(cls, values) -> "ScoreAccumulator":
        acc = cls()
        for v in values:
            acc.update(v)
        return acc


@dataclass(frozen=True)
class TestConfig:
    """Testing knobs: two-sided level, warm-up length, multiplicity handling."""

    alpha: float = 0.05
    min_n: int = 30
    bonferroni: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 0.5:
            raise ValueError("alpha must lie in (0, 0.5)")
        if self.min_n < 2:
            raise ValueError("min_n must be at least 2")


class ModelProfile:
    """Precomputed scoring context for one model: clique tree, cached
    self-score mean mu_p, per-(variable, value) conditional means, log
    prior marginals, and fast log-CPT lookup tables.

    Immutable once built; share one profile across any number of monitor
    states (e.g. across simulation replications of a fixed model).
    """

    def __init__(self, model: NetworkModel, tree: CliqueTree | None = None):
        self.model = model
        self.tree = tree if tree is not None else build(model)
        if self.tree.calibrated:
            raise ValueError("profile needs the built (uncalibrated) tree")
        self.prior_tree, _ = calibrate(self.tree, {})
        self.mu_p = negative_entropy(model, self.prior_tree)
        self.mu_cond: dict[tuple[str, int], float] = {}
        self.log_prior: dict[str, list[float]] = {}
        for v in model.variables:
            probs = marginal(self.prior_tree, [v.name])
            self.log_prior[v.name] = [math.log(float(q)) for q in probs]
            for j in range(v.cardinality):
                self.mu_cond[(v.name, j)] = conditional_negative_entropy(
                    model, v.name, j, tree=self.tree
                )
        self.log_fams = {n: np.log(family_table(model, n)) for n in model.names}
        # plain nested lists: scalar lookups beat numpy indexing in the hot loop
        self._families = [
            (
                v.name,
                model.cpts[v.name].copy(),
                tuple(model.parents[v.name]),
                self._parent_strides(v.name),
            )
            for v in model.variables
        ]
        self._log_cpt_lists = {
            name: np.log(cpt).tolist() for name, cpt, _, _ in self._families
        }
        self._complete_size = len(model.variables)

    def _parent_strides(self, name: str) -> tuple[int, ...]:
        pa = self.model.parents[name]
        strides = [1] * len(pa)
        for i in range(len(pa) - 2, -1, -1):
            strides[i] = strides[i + 1] * self.model.cardinality(pa[i + 1])
        return tuple(strides)

    def complete_log_score(self, assignment) -> float:
        total = 0.0
        for name, _, pnames, pstrides in self._families:
            row = 0
            for pn, st in zip(pnames, pstrides):
                row += assignment[pn] * st
            total += self._log_cpt_lists[name][row][assignment[name]]
        return total


class MonitorState:
    """Single-writer streaming state: one global accumulator plus one per
    observed (variable, value) cell.

    ``heuristic_mode`` latches once any incomplete observation arrives: the
    statistics remain computable but their exact distributional backing
    applies to identically-patterned complete data only.
    """

    def __init__(self, model_or_profile: NetworkModel | ModelProfile):
        if isinstance(model_or_profile, ModelProfile):
            self.profile = model_or_profile
        else:
            self.profile = ModelProfile(model_or_profile)
        self.global_acc = ScoreAccumulator()
        self.conditional: dict[tuple[str, int], ScoreAccumulator] = {}
        self.heuristic_mode = False

    @property
    def model(self) -> NetworkModel:
        return self.profile.model

    @property
    def mu_p(self) -> float:
        return self.profile.mu_p

    @property
    def mu_cond(self) -> dict[tuple[str, int], float]:
        return self.profile.mu_cond

    def update(self, x: Observation) -> None:
        """Score one observation into the global and conditional streams.

        Complete observations take the exact log score; incomplete ones take
        the expected complete-data score given the observed evidence.  Each
        observed variable's (variable, value) cell receives the matching
        conditional score, which in both cases is the global score minus
        the log prior probability of that value.
        """
        assignment = x.assignment
        if not assignment:
            raise ValueError("no evidence: observation has no assigned variables")
        profile = self.profile
        if len(assignment) == profile._complete_size:
            y = profile.complete_log_score(assignment)
        else:
            self.heuristic_mode = True
            posts = family_posteriors(profile.tree, assignment)
            y = 0.0
            for name in profile.model.names:
                y += float(np.sum(posts[name] * profile.log_fams[name]))
        self.global_acc.update(y)
        log_prior = profile.log_prior
        cond = self.conditional
        for name, state in assignment.items():
            key = (name, state)
            acc = cond.get(key)
            if acc is None:
                acc = cond[key] = ScoreAccumulator()
            acc.update(y - log_prior[name][state])


@dataclass(frozen=True)
class CellResult:
    variable: str
    value: str
    n: int
    w: float
    reject: bool


@dataclass(frozen=True)
class VariableSummary:
    variable: str
    max_w: float


@dataclass(frozen=True)
class TestReport:
    """Snapshot of the test at one point of the stream.

    ``interval`` is the approximate posterior credible interval for the
    score mean; ``w`` is infinite (and serialized as "inf") when a
    zero-variance stream sits away from mu_p.
    """

    n: int
    y_bar: float
    s: float
    mu_p: float
    w: float
    signed_z: float
    z_alpha: float
    reject: bool
    interval: tuple[float, float]
    per_variable: tuple[CellResult, ...]
    variable_summary: tuple[VariableSummary, ...]
    suggestions: tuple[str, ...]
    heuristic: bool


def _standardize(n: int, mean: float, std: float, center: float) -> tuple[float, float]:
    """(w, signed_z) for one accumulator against its expected center."""
    if n == 0:
        return 0.0, 0.0
    diff = mean - center
    if std > 0.0:
        z = diff / (std / math.sqrt(n))
        return abs(z), z
    if abs(diff) <= ZERO_VARIANCE_TOL:
        return 0.0, 0.0
    return INF, math.copysign(INF, diff)


def report(state: MonitorState, config: TestConfig) -> TestReport:
    """Assemble the full test report from the current accumulators."""
    model = state.model
    z_alpha = normal_quantile(1.0 - config.alpha / 2.0)
    acc = state.global_acc
    n, y_bar, s = acc.n, acc.mean, acc.sample_std
    if n == 0:
        y_bar = 0.0
    w, signed_z = _standardize(n, y_bar, s, state.mu_p)
    reject = bool(w > z_alpha and n >= config.min_n)
    half = z_alpha * (s / math.sqrt(n)) if n > 0 else 0.0
    interval = (y_bar - half, y_bar + half)

    tested = sum(1 for a in state.conditional.values() if a.n >= config.min_n)
    if config.bonferroni and tested > 0:
        cell_threshold = normal_quantile(1.0 - (config.alpha / tested) / 2.0)
    else:
        cell_threshold = z_alpha

    cells: list[CellResult] = []
    max_w: dict[str, float] = {}
    flagged: set[str] = set()
    for v in model.variables:
        best = 0.0
        for j, label in enumerate(v.states):
            cell = state.conditional.get((v.name, j))
            if cell is None or cell.n == 0:
                continue
            cw, _ = _standardize(cell.n, cell.mean, cell.sample_std, state.mu_cond[(v.name, j)])
            creject = bool(cw > cell_threshold and cell.n >= config.min_n)
            cells.append(CellResult(v.name, label, cell.n, cw, creject))
            if creject:
                flagged.add(v.name)
            if cw > best:
                best = cw
        max_w[v.name] = best

    summary = tuple(VariableSummary(v.name, max_w[v.name]) for v in model.variables)
    order = {v.name: i for i, v in enumerate(model.variables)}
    suggestions = tuple(
        sorted(flagged, key=lambda nm: (-max_w[nm], order[nm]))
    )
    return TestReport(
        n=n,
        y_bar=y_bar,
        s=s,
        mu_p=state.mu_p,
        w=w,
        signed_z=signed_z,
        z_alpha=z_alpha,
        reject=reject,
        interval=interval,
        per_variable=tuple(cells),
        variable_summary=summary,
        suggestions=suggestions,
        heuristic=state.heuristic_mode,
    )


def suggest(rep: TestReport) -> tuple[str, ...]:
    """Arc suggestions, strongest first.  No partner node is named: the
    statistics localize the variable, not the missing relation."""
    return tuple(
        f"consider an arc between {name} and another node" for name in rep.suggestions
    )


def _json_number(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def report_to_json_dict(rep: TestReport) -> dict:
    """Stable JSON form: exactly the report fields, infinities as strings."""
    return {
        "n": rep.n,
        "y_bar": rep.y_bar,
        "s": rep.s,
        "mu_p": rep.mu_p,
        "w": _json_number(rep.w),
        "signed_z": _json_number(rep.signed_z),
        "z_alpha": rep.z_alpha,
        "reject": rep.reject,
        "interval": [rep.interval[0], rep.interval[1]],
        "per_variable": [
            {
                "variable": c.variable,
                "value": c.value,
                "n": c.n,
                "w": _json_number(c.w),
                "reject": c.reject,
            }
            for c in rep.per_variable
        ],
        "variable_summary": [
            {"variable": vs.variable, "max_w": _json_number(vs.max_w)}
            for vs in rep.variable_summary
        ],
        "suggestions": list(rep.suggestions),
        "heuristic": rep.heuristic,
    }
