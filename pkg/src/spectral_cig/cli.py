"""Command-line interface.

Four subcommands cover the pipeline end to end:

* ``simulate``   draw a benchmark model and write the series + ground truth
* ``fit``        estimate the graph of a delimited series
* ``benchmark``  Monte Carlo comparison of the penalty families
* ``heatmap``    fit, then render the node-pair strength matrix

Every output is written next to ``--out`` (a path prefix): delimited tables
and JSON for machines, PNG figures for people.  Options may also come from a
``key = value`` config file (``--config`` or the ``SPECTRAL_CIG_CONFIG``
environment variable); explicit flags win over the file, the file wins over
defaults.  Exit codes: 0 success, 1 bad configuration, 2 bad input data,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .admm import AdmmConfig
from .estimator import FitConfig, fit
from .evaluation import ScenarioConfig, monte_carlo
from .exceptions import (
    InvalidConfigError,
    InvalidInputError,
    NumericalFailureError,
)
from .figures import render_benchmark, render_graph, render_heatmap
from .penalty import PENALTY_FAMILIES, PenaltySpec
from .spectral import group_block_norms
from .synth import make_model, simulate_var, true_edges
from .tsio import load_series, preprocess, write_series

__all__ = ["main", "run_cli", "build_parser"]

CONFIG_ENV_VAR = "SPECTRAL_CIG_CONFIG"


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _families(text: str) -> tuple:
    items = tuple(part.strip() for part in text.split(",") if part.strip())
    if not items:
        raise ValueError("expected a comma-separated list of penalty families")
    return items


# config-file key -> (argparse dest, converter); dotted keys address the solver
_CONFIG_KEYS = {
    "p": ("p", int),
    "m": ("m", int),
    "n": ("n", int),
    "mt": ("mt", int),
    "model": ("model", int),
    "runs": ("runs", int),
    "penalty": ("penalty", str),
    "alpha": ("alpha", float),
    "lambda": ("lam", float),
    "lambda_policy": ("lambda_policy", str),
    "oracle_mode": ("oracle_mode", str),
    "epsilon": ("epsilon", float),
    "scad_a": ("scad_a", float),
    "lla_iters": ("lla_iters", int),
    "gamma": ("gamma", float),
    "grid_size": ("grid_size", int),
    "group_prox": ("group_prox", str),
    "seed": ("seed", int),
    "jobs": ("jobs", int),
    "out": ("out", str),
    "input": ("input", str),
    "families": ("families", _families),
    "layout": ("layout", str),
    "preprocess": ("preprocess", _bool),
    "forward_fill": ("forward_fill", _bool),
    "warm_start": ("warm_start", _bool),
    "clusters": ("clusters", int),
    "n_lags": ("n_lags", int),
    "density": ("density", float),
    "p_er": ("p_er", float),
    "burn_in": ("burn_in", int),
    "admm.rho_bar": ("rho_bar", float),
    "admm.mu_bar": ("mu_bar", float),
    "admm.t_max": ("t_max", int),
    "admm.tau_abs": ("tau_abs", float),
    "admm.tau_rel": ("tau_rel", float),
    "admm.group_prox": ("group_prox", str),
}

_DEFAULTS = {
    "seed": 0,
    "penalty": "logsum",
    "alpha": 0.05,
    "epsilon": 1e-4,
    "scad_a": 3.7,
    "lla_iters": 2,
    "gamma": 0.0,
    "grid_size": 10,
    "group_prox": "stacked",
    "oracle_mode": "per_scenario",
    "rho_bar": 2.0,
    "mu_bar": 10.0,
    "t_max": 200,
    "tau_abs": 1e-4,
    "tau_rel": 1e-4,
    "jobs": 1,
    "model": 1,
    "runs": 10,
    "families": PENALTY_FAMILIES,
    "layout": "node-major",
    "preprocess": False,
    "forward_fill": False,
    "warm_start": True,
    "clusters": 8,
    "n_lags": 3,
    "density": 0.1,
    "p_er": 0.002,
    "burn_in": 100,
    "lam": None,
}

_CHOICES = {
    "penalty": PENALTY_FAMILIES,
    "group_prox": ("stacked", "per-frequency", "per_frequency"),
    "layout": ("node-major", "attribute-major"),
    "oracle_mode": ("per_scenario", "per-scenario", "per_run", "per-run"),
}


class _Parser(argparse.ArgumentParser):
    """Raise instead of exiting so usage errors map onto exit code 1."""

    def error(self, message):
        raise InvalidConfigError(message)


def _add_common(sp) -> None:
    sp.add_argument("--config", help="key=value options file (flags take precedence)")
    sp.add_argument("--out", help="output path prefix")
    sp.add_argument("--seed", type=int, help="random seed (default 0)")


def _add_penalty(sp) -> None:
    sp.add_argument("--penalty", choices=PENALTY_FAMILIES, help="penalty family (default logsum)")
    sp.add_argument("--alpha", type=float, help="entrywise/groupwise penalty split (default 0.05)")
    sp.add_argument("--lambda", dest="lam", type=float, help="penalty level for the fixed policy")
    sp.add_argument("--epsilon", type=float, help="logsum curvature parameter (default 1e-4)")
    sp.add_argument("--scad-a", dest="scad_a", type=float, help="scad knee parameter (default 3.7)")


def _add_solver(sp) -> None:
    sp.add_argument("--rho-bar", dest="rho_bar", type=float, help="initial step size (default 2)")
    sp.add_argument("--mu-bar", dest="mu_bar", type=float, help="residual balance factor (default 10)")
    sp.add_argument("--t-max", dest="t_max", type=int, help="max solver iterations (default 200)")
    sp.add_argument("--tau-abs", dest="tau_abs", type=float, help="absolute tolerance (default 1e-4)")
    sp.add_argument("--tau-rel", dest="tau_rel", type=float, help="relative tolerance (default 1e-4)")
    sp.add_argument(
        "--group-prox",
        dest="group_prox",
        choices=("stacked", "per-frequency"),
        help="group shrinkage across frequencies: one common factor (stacked) or per frequency",
    )


def _add_estimation(sp) -> None:
    sp.add_argument("--mt", type=int, help="smoothing half-window")
    sp.add_argument(
        "--lambda-policy",
        dest="lambda_policy",
        choices=("fixed", "bic", "oracle"),
        help="how the penalty level is chosen",
    )
    sp.add_argument("--lla-iters", dest="lla_iters", type=int, help="linearization passes (default 2)")
    sp.add_argument("--gamma", type=float, help="edge detection threshold (default 0)")
    sp.add_argument("--grid-size", dest="grid_size", type=int, help="penalty grid size (default 10)")
    sp.add_argument(
        "--warm-start",
        dest="warm_start",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="carry iterates across grid levels (default on)",
    )
    _add_penalty(sp)
    _add_solver(sp)


def _add_series_input(sp) -> None:
    sp.add_argument("--input", help="delimited series file (header row, one column per channel)")
    sp.add_argument("--p", type=int, help="number of nodes")
    sp.add_argument("--m", type=int, help="attributes per node")
    sp.add_argument("--layout", choices=("node-major", "attribute-major"), help="channel order")
    sp.add_argument(
        "--forward-fill",
        dest="forward_fill",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="impute missing cells from the previous row",
    )
    sp.add_argument(
        "--preprocess",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="log-ratio, detrend and rescale each channel before fitting",
    )


def _add_generator(sp) -> None:
    sp.add_argument("--model", type=int, choices=(1, 2), help="benchmark construction (default 1)")
    sp.add_argument("--clusters", type=int, help="node clusters in the dynamics (default 8)")
    sp.add_argument("--n-lags", dest="n_lags", type=int, help="autoregressive order (default 3)")
    sp.add_argument("--density", type=float, help="within-block coefficient density (default 0.1)")
    sp.add_argument("--p-er", dest="p_er", type=float, help="extra node-pair probability, model 2")
    sp.add_argument("--burn-in", dest="burn_in", type=int, help="discarded start-up samples")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spectral-cig", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("simulate", help="draw a benchmark series with known graph")
    _add_common(sp)
    sp.add_argument("--p", type=int, help="number of nodes")
    sp.add_argument("--m", type=int, help="attributes per node")
    sp.add_argument("--n", type=int, help="sample length (even)")
    _add_generator(sp)

    sp = sub.add_parser("fit", help="estimate the graph of a delimited series")
    _add_common(sp)
    _add_series_input(sp)
    _add_estimation(sp)

    sp = sub.add_parser("benchmark", help="Monte Carlo comparison of penalty families")
    _add_common(sp)
    sp.add_argument("--p", type=int, help="number of nodes")
    sp.add_argument("--m", type=int, help="attributes per node")
    sp.add_argument("--n", type=int, help="sample length (even)")
    sp.add_argument("--runs", type=int, help="Monte Carlo repetitions (default 10)")
    sp.add_argument("--families", type=_families, help="comma-separated penalty families")
    sp.add_argument("--jobs", type=int, help="parallel worker processes (default 1)")
    sp.add_argument(
        "--oracle-mode",
        dest="oracle_mode",
        choices=("per-scenario", "per-run"),
        help="oracle level selection: best mean F1 (per-scenario) or per repetition",
    )
    _add_generator(sp)
    _add_estimation(sp)

    sp = sub.add_parser("heatmap", help="fit, then render the node-pair strength matrix")
    _add_common(sp)
    _add_series_input(sp)
    _add_estimation(sp)

    return parser


def _read_config_file(path: str) -> dict:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise InvalidConfigError(f"cannot read config file {path}: {exc}") from exc
    values = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfigError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_KEYS:
            raise InvalidConfigError(f"{path}:{lineno}: unknown key {key!r}")
        dest, convert = _CONFIG_KEYS[key]
        try:
            values[dest] = convert(value)
        except ValueError as exc:
            raise InvalidConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    return values


def _merge_options(args: argparse.Namespace) -> dict:
    """Resolve each option: explicit flag, then config file, then default."""
    config_path = args.config or os.environ.get(CONFIG_ENV_VAR)
    file_values = _read_config_file(config_path) if config_path else {}
    merged = dict(file_values)
    for dest, value in vars(args).items():
        if dest in ("config", "command"):
            continue
        if value is not None:
            merged[dest] = value
    for dest, default in _DEFAULTS.items():
        merged.setdefault(dest, default)
    for dest, allowed in _CHOICES.items():
        if merged.get(dest) is not None and merged[dest] not in allowed:
            raise InvalidConfigError(f"{dest}: {merged[dest]!r} is not one of {allowed}")
    merged["command"] = args.command
    return merged


def _require(merged: dict, *names: str) -> None:
    missing = [name for name in names if merged.get(name) is None]
    if missing:
        raise InvalidConfigError(
            f"{merged['command']}: missing required option(s): " + ", ".join(f"--{n}" for n in missing)
        )


def _build_fit_config(merged: dict) -> FitConfig:
    policy = merged.get("lambda_policy") or "bic"
    if policy == "oracle":
        raise InvalidConfigError("lambda-policy 'oracle' needs ground truth; only benchmark supports it")
    if policy == "fixed" and merged.get("lam") is None:
        raise InvalidConfigError("lambda-policy 'fixed' requires --lambda")
    try:
        penalty = PenaltySpec(
            family=merged["penalty"],
            lam=merged["lam"] if merged.get("lam") is not None else 0.0,
            alpha=merged["alpha"],
            eps=merged["epsilon"],
            a=merged["scad_a"],
        )
        admm = AdmmConfig(
            rho_bar=merged["rho_bar"],
            mu_bar=merged["mu_bar"],
            tau_abs=merged["tau_abs"],
            tau_rel=merged["tau_rel"],
            t_max=merged["t_max"],
            group_prox_mode=merged["group_prox"].replace("-", "_"),
        )
        return FitConfig(
            penalty=penalty,
            m_t=merged["mt"],
            admm=admm,
            lla_iterations=merged["lla_iters"],
            lambda_policy=policy,
            grid_size=merged["grid_size"],
            gamma=merged["gamma"],
            warm_start=merged["warm_start"],
        )
    except (InvalidInputError, InvalidConfigError) as exc:
        raise InvalidConfigError(str(exc)) from exc


def _out_prefix(merged: dict) -> Path:
    out = Path(merged["out"])
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _edge_rows(edge_set) -> list:
    normalized = edge_set.normalized_weights()
    return [
        [q, l, edge_set.weights[(q, l)], normalized[(q, l)]]
        for (q, l) in sorted(edge_set.weights)
    ]


def _write_edges_csv(path: Path, edge_set) -> None:
    with open(path, "w") as fh:
        fh.write("node_a,node_b,weight,weight_normalized\n")
        for q, l, w, wn in _edge_rows(edge_set):
            fh.write(f"{q},{l},{w:.17g},{wn:.17g}\n")


def _cmd_simulate(merged: dict) -> int:
    _require(merged, "out", "p", "m", "n")
    rng = np.random.default_rng(merged["seed"])
    model = make_model(
        merged["model"],
        merged["p"],
        merged["m"],
        rng,
        n_lags=merged["n_lags"],
        clusters=merged["clusters"],
        density=merged["density"],
        p_er=merged["p_er"],
    )
    series = simulate_var(model, merged["n"], rng, burn_in=merged["burn_in"])
    truth = true_edges(model)
    out = _out_prefix(merged)
    write_series(series, f"{out}.series.csv")
    _write_json(
        Path(f"{out}.truth.json"),
        {
            "model": merged["model"],
            "p": merged["p"],
            "m": merged["m"],
            "n": merged["n"],
            "n_lags": merged["n_lags"],
            "clusters": merged["clusters"],
            "seed": merged["seed"],
            "edges": _edge_rows(truth),
        },
    )
    render_graph(truth, f"{out}.truth.png", title="true graph")
    print(f"simulate: wrote {out}.series.csv ({series.n} x {series.n_channels}), "
          f"{len(truth)} true edges")
    return 0


def _load_input(merged: dict):
    series = load_series(
        merged["input"],
        p=merged["p"],
        m=merged["m"],
        layout=merged["layout"],
        forward_fill=merged["forward_fill"],
    )
    if merged["preprocess"]:
        series = preprocess(series)
    return series


def _fit_payload(result, merged: dict) -> dict:
    return {
        "p": result.precision.p,
        "m": result.precision.m,
        "M": result.precision.M,
        "K": result.stats.grid.K,
        "penalty": merged["penalty"],
        "alpha": merged["alpha"],
        "lambda_policy": merged.get("lambda_policy") or "bic",
        "lambda": result.lam,
        "gamma": merged["gamma"],
        "converged": result.converged,
        "bic_trace": [[lam, score] for lam, score in result.bic_trace],
        "edges": _edge_rows(result.edges),
    }


def _cmd_fit(merged: dict) -> int:
    _require(merged, "out", "input", "p", "m", "mt")
    series = _load_input(merged)
    result = fit(series, _build_fit_config(merged))
    out = _out_prefix(merged)
    _write_json(Path(f"{out}.fit.json"), _fit_payload(result, merged))
    _write_edges_csv(Path(f"{out}.edges.csv"), result.edges)
    render_graph(result.edges, f"{out}.graph.png")
    print(f"fit: {len(result.edges)} edges at lambda={result.lam:.6g} "
          f"({'converged' if result.converged else 'iteration limit'})")
    return 0


def _cmd_heatmap(merged: dict) -> int:
    _require(merged, "out", "input", "p", "m", "mt")
    series = _load_input(merged)
    result = fit(series, _build_fit_config(merged))
    norms = group_block_norms(result.precision.w, result.precision.m, result.precision.p)
    out = _out_prefix(merged)
    np.savetxt(f"{out}.heatmap.csv", norms, delimiter=",", fmt="%.17g")
    render_heatmap(norms, f"{out}.heatmap.png", title="node-pair strength")
    _write_json(Path(f"{out}.fit.json"), _fit_payload(result, merged))
    print(f"heatmap: wrote {out}.heatmap.csv and {out}.heatmap.png "
          f"(lambda={result.lam:.6g}, {len(result.edges)} edges)")
    return 0


def _cmd_benchmark(merged: dict) -> int:
    _require(merged, "out", "p", "m", "n", "mt")
    policy = merged.get("lambda_policy") or "oracle"
    if policy == "fixed" and merged.get("lam") is None:
        raise InvalidConfigError("lambda-policy 'fixed' requires --lambda")
    fit_merged = dict(merged, lambda_policy="bic" if policy == "oracle" else policy)
    if policy == "oracle" and merged.get("lam") is None:
        fit_merged["lam"] = 0.0
    fit_config = _build_fit_config(fit_merged)
    try:
        scenario = ScenarioConfig(
            fit=fit_config,
            model=merged["model"],
            p=merged["p"],
            m=merged["m"],
            n=merged["n"],
            families=tuple(merged["families"]),
            lambda_policy=policy,
            oracle_mode=merged["oracle_mode"].replace("-", "_"),
            clusters=merged["clusters"],
            n_lags=merged["n_lags"],
            density=merged["density"],
            p_er=merged["p_er"],
            burn_in=merged["burn_in"],
            base_seed=merged["seed"],
        )
    except (InvalidInputError, InvalidConfigError) as exc:
        raise InvalidConfigError(str(exc)) from exc
    table = monte_carlo(scenario, merged["runs"], jobs=merged["jobs"])
    out = _out_prefix(merged)
    _write_json(Path(f"{out}.benchmark.json"), table.to_json_dict())
    text = table.to_text()
    Path(f"{out}.benchmark.txt").write_text(text + "\n")
    render_benchmark(table, f"{out}.benchmark.png")
    print(text)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "benchmark": _cmd_benchmark,
    "heatmap": _cmd_heatmap,
}


def run_cli(argv) -> int:
    """Parse, dispatch and map failures onto the documented exit codes."""
    try:
        args = build_parser().parse_args(argv)
        merged = _merge_options(args)
        return _COMMANDS[merged["command"]](merged)
    except InvalidConfigError as exc:
        _emit_error(exc)
        return 1
    except (InvalidInputError, OSError) as exc:
        _emit_error(exc)
        return 2
    except NumericalFailureError as exc:
        _emit_error(exc)
        return 3


def _emit_error(exc: Exception) -> None:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
