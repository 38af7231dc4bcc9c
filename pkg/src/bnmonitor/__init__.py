"""Model-adequacy monitoring for discrete Bayesian networks.

The library scores streams of (possibly incomplete) categorical
observations against a fixed network, compares the running mean score with
the model's self-expected score, and reports a standardized test statistic
globally and per (variable, value), together with arc suggestions and a
Monte Carlo harness that checks the statistics' calibration.
"""

__version__ = "0.1.0"

from .formats import (
    InputError,
    load_network,
    load_observations,
    load_structure,
    network_to_json,
    observations_from_csv,
    observations_to_csv,
    parse_network,
    save_network,
    save_observations,
)
from .junction import (
    CliqueTree,
    absorb,
    build,
    calibrate,
    family_posteriors,
    marginal,
    tree_negative_entropy,
)
from .monitor import (
    ModelProfile,
    MonitorState,
    ScoreAccumulator,
    TestConfig,
    TestReport,
    normal_cdf,
    normal_quantile,
    report,
    report_to_json_dict,
    suggest,
)
from .network import (
    JointTable,
    NetworkModel,
    Observation,
    Variable,
    enumerate_joint,
    family_table,
    joint_probability,
    ml_project,
    sample,
    validate,
)
from .scoring import (
    ScoreValue,
    conditional_log_score,
    conditional_negative_entropy,
    cross_mean,
    expected_log_score,
    log_score,
    negative_entropy,
)
from .simulation import (
    CltSummary,
    ScenarioSpec,
    SimResult,
    clt_diagnostic,
    run,
    score_variance,
    structure_contrast,
)

__all__ = [
    "CliqueTree",
    "CltSummary",
    "InputError",
    "JointTable",
    "ModelProfile",
    "MonitorState",
    "NetworkModel",
    "Observation",
    "ScenarioSpec",
    "ScoreAccumulator",
    "ScoreValue",
    "SimResult",
    "TestConfig",
    "TestReport",
    "Variable",
    "absorb",
    "build",
    "calibrate",
    "clt_diagnostic",
    "conditional_log_score",
    "conditional_negative_entropy",
    "cross_mean",
    "enumerate_joint",
    "expected_log_score",
    "family_posteriors",
    "family_table",
    "joint_probability",
    "load_network",
    "load_observations",
    "load_structure",
    "log_score",
    "marginal",
    "ml_project",
    "negative_entropy",
    "network_to_json",
    "normal_cdf",
    "normal_quantile",
    "observations_from_csv",
    "observations_to_csv",
    "parse_network",
    "report",
    "report_to_json_dict",
    "run",
    "sample",
    "save_network",
    "save_observations",
    "score_variance",
    "structure_contrast",
    "suggest",
    "tree_negative_entropy",
    "validate",
]
