"""Command-line interface.

Exit codes are a contract: 0 for success (and an adequate model), 2 for any
input problem, 3 when the monitor's global test rejects the model.  No
other code is ever returned.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import __version__
from .formats import (
    InputError,
    load_network,
    load_observations,
    load_structure,
    save_network,
    save_observations,
)
from .junction import build, calibrate
from .monitor import (
    ModelProfile,
    MonitorState,
    TestConfig,
    TestReport,
    report,
    report_to_json_dict,
    suggest,
)
from .network import NetworkModel, ml_project, sample, validate
from .scoring import conditional_negative_entropy, negative_entropy
from .simulation import (
    ScenarioSpec,
    SimResult,
    clt_diagnostic,
    run,
    structure_contrast,
)


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _load_valid(path: str) -> NetworkModel:
    model = load_network(path)
    violations = validate(model)
    if violations:
        raise InputError("\n".join(violations))
    return model


# -- commands ---------------------------------------------------------------


def cmd_validate(args) -> int:
    model = load_network(args.network)
    violations = validate(model)
    if violations:
        for v in violations:
            print(v)
        return 2
    return 0


def cmd_entropy(args) -> int:
    model = _load_valid(args.network)
    tree = build(model)
    if args.conditional:
        if "=" not in args.conditional:
            raise InputError("--conditional expects VAR=VALUE")
        name, _, label = args.conditional.partition("=")
        if name not in model.index:
            raise InputError(f"unknown variable {name!r}")
        states = model.variable(name).states
        if label not in states:
            raise InputError(f"unknown state {label!r} for variable {name!r}")
        value = conditional_negative_entropy(model, name, states.index(label), tree=tree)
    else:
        calibrated, _ = calibrate(tree, {})
        value = negative_entropy(model, calibrated)
    print(f"{value:.9f}")
    return 0


def _render_report(rep: TestReport, alpha: float) -> str:
    lines = []
    lines.append(f"observations            {rep.n}")
    lines.append(f"mean score Y-bar        {rep.y_bar:.9f}")
    lines.append(f"sample std S            {rep.s:.9f}")
    lines.append(f"model self-score mu_p   {rep.mu_p:.9f}")
    w_text = "inf" if math.isinf(rep.w) else f"{rep.w:.4f}"
    z_text = ("inf" if rep.signed_z > 0 else "-inf") if math.isinf(rep.signed_z) else f"{rep.signed_z:.4f}"
    lines.append(f"W                       {w_text}")
    lines.append(f"signed Z                {z_text}")
    lines.append(f"z_alpha                 {rep.z_alpha:.4f}")
    lines.append(
        "approximate posterior credible interval for the score mean: "
        f"[{rep.interval[0]:.9f}, {rep.interval[1]:.9f}]"
    )
    if rep.s == 0.0 and rep.n > 1:
        lines.append("note: zero-variance stream (every score identical)")
    if rep.heuristic:
        lines.append(
            "note: stream contained incomplete observations; statistics are "
            "heuristic indicators"
        )
    if rep.reject:
        lines.append(f"decision: MODEL REJECTED at alpha={alpha:g} (W > z_alpha)")
    else:
        lines.append(f"decision: model adequate at alpha={alpha:g}")
    if rep.per_variable:
        lines.append("")
        lines.append(f"{'variable':<16}{'value':<12}{'n':>8}{'W':>12}  reject")
        for c in rep.per_variable:
            cw = "inf" if math.isinf(c.w) else f"{c.w:.4f}"
            lines.append(
                f"{c.variable:<16}{c.value:<12}{c.n:>8}{cw:>12}  {'yes' if c.reject else 'no'}"
            )
    for s in suggest(rep):
        lines.append(s)
    return "\n".join(lines)


def cmd_monitor(args) -> int:
    model = _load_valid(args.network)
    observations = load_observations(args.observations, model)
    state = MonitorState(ModelProfile(model))
    for x in observations:
        state.update(x)
    config = TestConfig(alpha=args.alpha, min_n=args.min_n, bonferroni=args.bonferroni)
    rep = report(state, config)
    if args.json:
        document = {
            "report": report_to_json_dict(rep),
            "metadata": {
                "model_path": args.network,
                "observations_path": args.observations,
                "config": {
                    "alpha": config.alpha,
                    "min_n": config.min_n,
                    "bonferroni": config.bonferroni,
                },
                "tool_version": __version__,
            },
        }
        print(json.dumps(document, indent=2))
    else:
        print(_render_report(rep, config.alpha))
    if args.figures:
        from .figures import save_monitor_figure

        os.makedirs(args.figures, exist_ok=True)
        save_monitor_figure(rep, os.path.join(args.figures, "monitor_cells.png"))
    return 3 if rep.reject else 0


def cmd_sample(args) -> int:
    model = _load_valid(args.network)
    observations = sample(
        model, args.n, args.seed, missing_rate=args.missing_rate, mask_seed=args.mask_seed
    )
    save_observations(args.out, model, observations)
    return 0


def cmd_project(args) -> int:
    structure = load_structure(args.structure)
    violations = validate(structure)  # placeholder tables are always valid
    if violations:
        raise InputError("\n".join(violations))
    observations = load_observations(args.observations, structure)
    fitted = ml_project(structure, observations, pseudocount=args.pseudocount)
    save_network(args.out, fitted)
    return 0


def _write_rep_csv(path: str, result: SimResult, names: tuple[str, ...]) -> None:
    lines = ["rep_index,w,signed_z,reject," + ",".join(f"max_w_{n}" for n in names)]
    for r in result.records:
        cols = [str(r.rep), _fmt(r.w), _fmt(r.signed_z), "true" if r.reject else "false"]
        cols.extend(_fmt(w) for w in r.max_w)
        lines.append(",".join(cols))
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def cmd_simulate(args) -> int:
    true_model = _load_valid(args.true)
    scored = None
    structure = None
    if args.mode == "structure":
        structure = load_structure(args.structure)
    else:
        scored = _load_valid(args.model) if args.model else true_model
    spec = ScenarioSpec(
        true_model=true_model,
        scored_model=scored,
        structure=structure,
        n=args.n,
        reps=args.reps,
        alpha=args.alpha,
        seed=args.seed,
        missing_rate=args.missing_rate,
        pseudocount=args.pseudocount,
        min_n=args.min_n,
        bonferroni=args.bonferroni,
        threads=args.threads,
    )
    if args.mode == "structure":
        result = structure_contrast(spec)
    else:
        result = run(spec)

    document = {
        "command": args.mode,
        "n": spec.n,
        "reps": spec.reps,
        "alpha": spec.alpha,
        "seed": spec.seed,
        "missing_rate": spec.missing_rate,
        "result": result.to_json_dict(),
    }
    if args.mode == "level":
        document["clt"] = None
        if spec.missing_rate == 0:
            try:
                summary = clt_diagnostic(spec)
            except ValueError:
                summary = None
            if summary is not None:
                document["clt"] = {
                    "signed_z_mean": summary.signed_z_mean,
                    "signed_z_std": summary.signed_z_std,
                    "cdf_distance": summary.cdf_distance,
                }
    if args.mode == "structure":
        names = true_model.names
        rates = result.per_variable_rates
        best = max(names, key=lambda n: (rates[n], -true_model.index[n]))
        document["contrast"] = {
            "global_rate": result.rejection_rate_global,
            "conditional_rates": {n: rates[n] for n in names},
            "best_variable": best,
            "best_rate": rates[best],
            "gap": rates[best] - result.rejection_rate_global,
        }
    print(json.dumps(document, indent=2))

    if args.csv:
        _write_rep_csv(args.csv, result, true_model.names)
    if args.figures:
        from .figures import save_rates_figure, save_signed_z_figure

        os.makedirs(args.figures, exist_ok=True)
        if args.mode == "structure":
            save_rates_figure(result, os.path.join(args.figures, "structure_rates.png"))
        else:
            save_signed_z_figure(
                result, os.path.join(args.figures, f"{args.mode}_signed_z.png")
            )
    return 0


# -- parser -----------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bnmonitor",
        description="Model-adequacy monitoring for discrete Bayesian networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a network file's invariants")
    p.add_argument("network")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("entropy", help="print mu_p, or a conditional mu given VAR=VALUE")
    p.add_argument("network")
    p.add_argument("--conditional", metavar="VAR=VALUE")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("monitor", help="stream observations and test model adequacy")
    p.add_argument("network")
    p.add_argument("observations")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--min-n", type=int, default=30, dest="min_n")
    p.add_argument("--bonferroni", action="store_true")
    p.add_argument("--json", action="store_true")
    p.add_argument("--figures", metavar="DIR")
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("sample", help="draw observations from a network")
    p.add_argument("network")
    p.add_argument("out")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--missing-rate", type=float, default=0.0, dest="missing_rate")
    p.add_argument("--mask-seed", type=int, default=0, dest="mask_seed")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("project", help="fit CPTs of a structure to complete data")
    p.add_argument("structure")
    p.add_argument("observations")
    p.add_argument("out")
    p.add_argument("--pseudocount", type=float, default=0.0)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("simulate", help="Monte Carlo calibration scenarios")
    mode = p.add_subparsers(dest="mode", required=True)
    for name, help_text in (
        ("level", "rejection rate and CLT check when the model is true"),
        ("power", "rejection rate against a fixed wrong model"),
        ("structure", "global vs conditional rates with refitted tables"),
    ):
        q = mode.add_parser(name, help=help_text)
        q.add_argument("--true", required=True)
        if name == "structure":
            q.add_argument("--structure", required=True)
            q.add_argument("--model", default=None, help=argparse.SUPPRESS)
        else:
            q.add_argument("--model", default=None)
            q.add_argument("--structure", default=None, help=argparse.SUPPRESS)
        q.add_argument("--n", type=int, default=1000)
        q.add_argument("--reps", type=int, default=200)
        q.add_argument("--alpha", type=float, default=0.05)
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--missing-rate", type=float, default=0.0, dest="missing_rate")
        q.add_argument("--pseudocount", type=float, default=1.0)
        q.add_argument("--min-n", type=int, default=30, dest="min_n")
        q.add_argument("--bonferroni", action="store_true")
        q.add_argument("--threads", type=int, default=1)
        q.add_argument("--csv", metavar="PATH")
        q.add_argument("--figures", metavar="DIR")
        q.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # exit-code contract: nothing but 0, 2, 3
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())
