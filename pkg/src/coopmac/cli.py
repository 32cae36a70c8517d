"""Command-line interface.

Usage::

    coopmac region CONFIG [--overrides FILE] [--out DIR] [--format csv|json]
    coopmac conf-region CONFIG ...
    coopmac discrete CONFIG ...
    coopmac frontier CONFIG ...
    coopmac equiv-check CONFIG ...
    coopmac simulate CONFIG ...
    coopmac reproduce {fig3,fig4,fig5} [--config CONFIG] ...

Exit codes: 0 success, 2 invalid input (the message names the offending key
as a JSON pointer), 3 unsupported request, 4 failed numerical check.
Outputs are written only after every computation of a command succeeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from . import config as cfg
from .discrete import (
    DiscreteChannelSpec,
    InputLaw,
    brute_force_region,
    region_for_law,
    simplex_grid,
    willems_region,
)
from .codingsim import DEFAULT_EPS, DEFAULT_SYMBOL_BUDGET, CodebookSpec, error_curve
from .equivalence import equivalence_suite
from .errors import CapabilityError, NumericalError, ValidationError
from .export import ExportError, provenance, write_csv, write_json
from .fading import (
    ConferencingSpec,
    PolicyGrid,
    direction_weights,
    frontier,
    region_cm,
    region_conf,
)
from .region import RateConstraintSet, mask_subset, vertices
from .reproduce import DEFAULTS, run_figure

__all__ = ["main", "run"]

# (filename, kind, payload) where kind is "csv" (header, rows) or "json" (result)
Output = Tuple[str, str, object]


def _rate_names(cs: RateConstraintSet) -> List[str]:
    head = ["R0"] if cs.has_common else []
    return head + [f"R{k + 1}" for k in range(cs.num_tx)]


def _bound_rows(cs: RateConstraintSet) -> list:
    rows = []
    p = cs.num_tx
    for j in range(cs.num_rx):
        for m in range(1, 1 << p):
            label = "+".join(f"R{k + 1}" for k in mask_subset(m, p))
            rows.append([j, label, cs.subset_bounds[j, m]])
        names = _rate_names(cs)
        total = "+".join(names) if cs.has_common else "total(" + "+".join(names) + ")"
        rows.append([j, total, cs.total_bounds[j]])
    return rows


def _region_outputs(stem: str, cs: RateConstraintSet, fmt: str) -> List[Output]:
    verts = [pt.as_array() for pt in vertices(cs)] if cs.num_tx <= 3 else None
    if fmt == "json":
        result = {"constraints": cs.to_dict(), "rate_names": _rate_names(cs), "vertices": verts}
        return [(f"{stem}.json", "json", result)]
    out = [(f"{stem}_bounds.csv", "csv", (["receiver", "constraint", "bound"], _bound_rows(cs)))]
    if verts is not None:
        out.append((f"{stem}_vertices.csv", "csv", (_rate_names(cs), verts)))
    return out


def _engine_info(engine) -> dict:
    return engine.describe()


def _seeds_of(engine) -> List[int]:
    return [engine.seed] if hasattr(engine, "seed") else []


def _fading_setup(config):
    spec = cfg.build_channel(config)
    quantizer = cfg.build_quantizer(config, spec.num_tx)
    policy = cfg.build_policy(config, spec, quantizer)
    engine = cfg.build_engine(config)
    return spec, quantizer, policy, engine


def _conf(config) -> Optional[ConferencingSpec]:
    c = config.get("conferencing")
    if c is None:
        return None
    return ConferencingSpec(c.get("c12", 0.0), c.get("c21", 0.0))


# -- commands ----------------------------------------------------------------

def cmd_region(config, fmt):
    spec, quantizer, policy, engine = _fading_setup(config)
    cs = region_cm(spec, quantizer, policy, engine)
    if not config.get("region", {}).get("common_message", True):
        cs = RateConstraintSet(cs.subset_bounds, cs.total_bounds, has_common=False)
    return _region_outputs("region", cs, fmt), _seeds_of(engine), _engine_info(engine)


def cmd_conf_region(config, fmt):
    spec, quantizer, policy, engine = _fading_setup(config)
    conf = _conf(config)
    if conf is None:
        raise cfg.ConfigError("/conferencing", "conf-region needs a conferencing section")
    cs = region_conf(spec, quantizer, policy, conf, engine)
    return _region_outputs("conf_region", cs, fmt), _seeds_of(engine), _engine_info(engine)


def _policy_label(policy) -> str:
    parts = []
    for i, (pw, cr) in enumerate(zip(policy.power, policy.corr)):
        parts.append(f"phi{i + 1}=" + " ".join(f"{v:.6g}" for v in np.atleast_1d(pw)))
        parts.append(f"rho{i + 1}=" + " ".join(f"{v:.6g}" for v in np.atleast_1d(cr)))
    return "|".join(parts)


def cmd_frontier(config, fmt):
    spec, quantizer, _, engine = _fading_setup(config)
    conf = _conf(config)
    fr = config.get("frontier", {})
    pgrid = PolicyGrid(fr.get("rho_points", 21), fr.get("power_step", 0.25),
                       fr.get("max_policies", 50_000))
    dim = spec.num_tx + (0 if conf is not None else 1)
    if "weights" in fr:
        weights = np.asarray(fr["weights"], dtype=float)
        if weights.shape[1] != dim:
            raise cfg.ConfigError("/frontier/weights", f"each weight vector needs {dim} entries")
    elif dim == 2:
        weights = direction_weights(fr.get("directions", 100))
    else:
        weights = simplex_grid(dim, 1 / 8)
    points = frontier(spec, quantizer, weights, pgrid, engine, conf)
    names = (["R0"] if conf is None else []) + [f"R{k + 1}" for k in range(spec.num_tx)]
    wnames = [f"w_{n}" for n in names]
    if fmt == "json":
        result = [{"weights": list(fp.weights), "value": fp.value,
                   "point": fp.point.as_array(), "policy": fp.policy.describe()}
                  for fp in points]
        out = [("frontier.json", "json", {"rate_names": names, "points": result})]
    else:
        rows = [[*fp.weights, fp.value, *fp.point.as_array(), _policy_label(fp.policy)]
                for fp in points]
        out = [("frontier.csv", "csv", (wnames + ["value"] + names + ["policy"], rows))]
    return out, _seeds_of(engine), _engine_info(engine)


def _discrete_channel(config) -> DiscreteChannelSpec:
    d = config.get("discrete")
    if d is None:
        raise cfg.ConfigError("/discrete", "this command needs a discrete section")
    try:
        return DiscreteChannelSpec.from_nested(d["transition"], d["num_tx"])
    except (ValidationError, ValueError) as exc:
        raise cfg.ConfigError("/discrete/transition", str(exc)) from exc


def _law(block: dict, pointer: str) -> InputLaw:
    try:
        return InputLaw(np.asarray(block["pu"], float),
                        tuple(np.asarray(t, float) for t in block["px"]))
    except (ValidationError, ValueError) as exc:
        raise cfg.ConfigError(pointer, str(exc)) from exc


def cmd_discrete(config, fmt):
    channel = _discrete_channel(config)
    d = config["discrete"]
    conf = _conf(config)
    if "law" in d:
        law = _law(d["law"], "/discrete/law")
        cs = willems_region(channel, law, conf) if conf else region_for_law(channel, law)
        return _region_outputs("discrete_region", cs, fmt), [], None
    if conf is not None:
        raise cfg.ConfigError("/conferencing", "the conferencing region needs /discrete/law")
    weights = d.get("weights")
    res = brute_force_region(channel, d.get("grid_step", 1 / 8), d.get("u_size_cap", 4),
                             weights, d.get("max_laws", 500_000))
    names = ["R0"] + [f"R{k + 1}" for k in range(channel.num_tx)]
    if fmt == "json":
        result = {"rate_names": names, "laws_searched": res.laws_searched,
                  "weights": res.weights, "best_values": res.best_values,
                  "points": [{"point": pt.as_array(), "law": law.describe()}
                             for pt, law in zip(res.points, res.laws)]}
        return [("discrete_frontier.json", "json", result)], [], None
    rows = [list(pt.as_array()) for pt in res.points]
    return [("discrete_frontier.csv", "csv", (names, rows))], [], None


def cmd_simulate(config, fmt):
    channel = _discrete_channel(config)
    sim = config.get("simulate")
    if sim is None:
        raise cfg.ConfigError("/simulate", "simulate needs a simulate section")
    if "law" in sim:
        law = _law(sim["law"], "/simulate/law")
    elif "law" in config["discrete"]:
        law = _law(config["discrete"]["law"], "/discrete/law")
    else:
        law = InputLaw.independent(*[np.full(n, 1.0 / n) for n in channel.input_sizes])
    seed = sim.get("seed", 0)
    try:
        spec = CodebookSpec(sim["n_list"][0], tuple(sim["rates"]), law, channel,
                            sim.get("eps", DEFAULT_EPS), seed,
                            sim.get("symbol_budget", DEFAULT_SYMBOL_BUDGET))
    except ValidationError as exc:
        raise cfg.ConfigError("/simulate", str(exc)) from exc
    curve = error_curve(spec, None, sim["n_list"], sim.get("trials", 1000), seed)
    k = len(spec.rates)
    header = (["n"] + [f"nominal_R{i}" for i in range(k)] + [f"realized_R{i}" for i in range(k)]
              + ["trials", "errors", "error_rate", "ci_low", "ci_high"])
    rows = [[e.n, *e.nominal_rates, *e.realized_rates, e.trials, e.errors, e.error_rate,
             e.ci_low, e.ci_high] for e in curve]
    if fmt == "json":
        return ([("error_curve.json", "json", [dict(zip(header, r)) for r in rows])],
                [seed], None)
    return [("error_curve.csv", "csv", (header, rows))], [seed], None


def cmd_equiv_check(config, fmt):
    eq = config.get("equiv", {})
    seed = eq.get("seed", 0)
    summary = equivalence_suite(eq.get("policies", 1000), eq.get("states", 16), seed)
    if fmt == "json":
        out = [("equiv_check.json", "json", summary)]
    else:
        out = [("equiv_check.csv", "csv", (["metric", "value"], [[k, v] for k, v in summary.items()]))]
    engine = {"kind": "quad", "nodes": eq.get("states", 16)}
    return out, [seed], engine, (None if summary["passed"] else "equivalence suite failed")


def make_reproduce(name: str) -> Callable:
    def cmd(config, fmt):
        settings = dict(DEFAULTS)
        settings.update(config.get("reproduce", {}))
        header, rows, summary = run_figure(name, settings)
        if fmt == "json":
            first = (f"{name}_boundary.json", "json", [dict(zip(header, r)) for r in rows])
        else:
            first = (f"{name}_boundary.csv", "csv", (header, rows))
        out = [first, (f"{name}_summary.json", "json", summary)]
        engine = {"quad": {"nodes": settings["quad_nodes"]},
                  "mc": {"samples": settings["mc_samples"], "seed": settings["mc_seed"]}}
        return out, [settings["mc_seed"]], engine
    return cmd


COMMANDS: Dict[str, Callable] = {
    "region": cmd_region,
    "conf-region": cmd_conf_region,
    "discrete": cmd_discrete,
    "frontier": cmd_frontier,
    "equiv-check": cmd_equiv_check,
    "simulate": cmd_simulate,
}


# -- driver ------------------------------------------------------------------

def _read_json(path: str, pointer: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise cfg.ConfigError(pointer, f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise cfg.ConfigError(pointer, f"{path} is not valid JSON: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise cfg.ConfigError(pointer, "top level must be a JSON object")
    return doc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coopmac", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--overrides", help="JSON object (or exported result) merged over the config")
        p.add_argument("--out", help="output directory (default: output.dir or .)")
        p.add_argument("--format", choices=["csv", "json"], help="tabular output format")

    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="JSON run configuration")
        common(p)
    p = sub.add_parser("reproduce")
    p.add_argument("figure", choices=["fig3", "fig4", "fig5"])
    p.add_argument("--config", help="optional JSON with a 'reproduce' section")
    common(p)
    return parser


def run(args: argparse.Namespace) -> List[str]:
    """Execute a parsed command; returns the written paths."""
    config = _read_json(args.config, "/") if args.config else {}
    if args.overrides:
        config = cfg.merge(config, cfg.load_overrides(_read_json(args.overrides, "/")))
    cfg.validate(config)
    output = config.get("output", {})
    fmt = args.format or output.get("format", "csv")
    out_dir = args.out or output.get("dir", ".")
    if args.command == "reproduce":
        command = make_reproduce(args.figure)
    else:
        command = COMMANDS[args.command]
    result = command(config, fmt)
    outputs, seeds, engine = result[:3]
    failure = result[3] if len(result) > 3 else None
    prov = provenance(cfg.config_hash(config), seeds, engine)
    paths = []
    for name, kind, payload in outputs:
        path = os.path.join(out_dir, name)
        if kind == "csv":
            header, rows = payload
            paths.append(write_csv(path, header, rows, prov))
        else:
            paths.append(write_json(path, payload, prov, config))
    if failure:
        raise NumericalError(failure)
    return paths


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        for path in run(args):
            print(path)
    except cfg.ConfigError as exc:
        print(f"error: invalid config at {exc.pointer}: {exc.message}", file=sys.stderr)
        return 2
    except ExportError as exc:
        print(f"error: invalid config at /output/dir: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, ValueError) as exc:
        print(f"error: invalid input at /: {exc}", file=sys.stderr)
        return 2
    except CapabilityError as exc:
        print(f"error: unsupported: {exc}", file=sys.stderr)
        return 3
    except (NumericalError, ArithmeticError) as exc:
        print(f"error: numerical check failed: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
