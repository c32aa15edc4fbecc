"""Command-line driver for affinity bounds, Monte Carlo checks and survey runs.

Subcommands: affinity, bound, r-measure, test, mc-sweep, survey.  Values
come from defaults, then an INI config file (--config), then command-line
flags, in increasing precedence.  Results are written atomically and every
results file gets a ``<name>.manifest.json`` recording the resolved
configuration, seed, library versions and wall time.

Monte Carlo subcommands derive the per-scenario stream from (seed, theta1),
so a singleton mc-sweep row and a test run with the same inputs report
identical numbers.

Exit codes: 0 success, 1 numerical failure, 2 configuration error.
The PXKIT_OUT_DIR environment variable supplies the output directory when
--out is omitted.
"""

from __future__ import annotations

import argparse
import configparser
import io
import os
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path

from .affinity import activation_measure, expanded_bound, marginal_bound
from .affinity import affinity as compute_affinity
from .densities import load_tabulated_csv
from .models import (
    ExpandedModel,
    MarginalFamily,
    SimpleHypotheses,
    make_exponential_rate,
    make_normal_location,
    make_normal_variance_expansion,
    make_two_stage_normal,
)
from .montecarlo import check_bound, estimate_phi_errors, estimate_psi_errors, row_seed, sweep
from .quadrature import QuadratureBudgetError, QuadratureConfig
from .reporting import emit_plot_data, render_record, render_table, write_atomic, write_manifest
from .survey import (
    AccuracyModel,
    PopulationSpec,
    Stratum,
    compare_schemes,
    population_spec_from_section,
)

COMMANDS = ("affinity", "bound", "r-measure", "test", "mc-sweep", "survey")
FAMILY_MODELS = ("normal", "exponential")
EXPANDED_MODELS = ("two-stage-normal", "variance-expansion")
OUT_DIR_ENV = "PXKIT_OUT_DIR"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str
    seed: int = 0
    out: str | None = None
    format: str = "json"
    plot_data: str | None = None
    model: str | None = None
    sigma: float = 1.0
    n1: int = 1
    n2: int = 1
    n: int = 2
    csv_f: str | None = None
    csv_g: str | None = None
    theta0: float | None = None
    theta1: float | None = None
    theta1_list: tuple[float, ...] | None = None
    abs_tol: float = 1e-9
    rel_tol: float = 1e-7
    max_evaluations: int = 1_000_000
    replicates: int = 100_000
    quantile: float = 1.0
    p_accurate: float = 1.0
    noise_sd: float = 0.0
    replications: int = 1000
    srs_size: int | None = None
    population: PopulationSpec | None = None


_SCHEMA = {
    "run": {"command": str, "seed": int, "out": str, "format": str, "plot_data": str},
    "model": {"kind": str, "sigma": float, "n1": int, "n2": int, "n": int, "csv_f": str, "csv_g": str},
    "hypotheses": {"theta0": float, "theta1": float, "theta1_list": "floats"},
    "quadrature": {"abs_tol": float, "rel_tol": float, "max_evaluations": int},
    "monte_carlo": {"replicates": int},
    "survey": {
        "quantile": float,
        "p_accurate": float,
        "noise_sd": float,
        "replications": int,
        "srs_size": int,
    },
    "population": {"seed": int, "strata": str},
}

_KEY_TO_FIELD = {("model", "kind"): "model"}


def _parse_floats(text: str) -> tuple[float, ...]:
    parts = [p.strip() for p in text.replace(";", ",").split(",") if p.strip()]
    if not parts:
        raise ConfigError("hypotheses.theta1_list: empty list")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"hypotheses.theta1_list: {exc}") from None


def apply_config_file(config: ExperimentConfig, path: str | Path) -> ExperimentConfig:
    cp = configparser.ConfigParser()
    read = cp.read(path, encoding="utf-8")
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    return _apply_parsed(config, cp, where=str(path))


def parse_config_text(text: str, command: str | None = None) -> ExperimentConfig:
    cp = configparser.ConfigParser()
    cp.read_string(text)
    cmd = command or cp.get("run", "command", fallback=None)
    if cmd is None:
        raise ConfigError("run.command is required")
    return _apply_parsed(ExperimentConfig(command=cmd), cp, where="config")


def _apply_parsed(
    config: ExperimentConfig, cp: configparser.ConfigParser, where: str
) -> ExperimentConfig:
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{where}: unknown section [{section}]")
        schema = _SCHEMA[section]
        for key, raw in cp[section].items():
            if key not in schema:
                raise ConfigError(f"{where}: unknown key {section}.{key}")
            if section == "population":
                continue  # handled as a block below
            kind = schema[key]
            field = _KEY_TO_FIELD.get((section, key), key)
            if section == "run" and key == "command":
                if raw != config.command:
                    raise ConfigError(
                        f"{where}: run.command {raw!r} does not match subcommand {config.command!r}"
                    )
                continue
            try:
                if kind == "floats":
                    value = _parse_floats(raw)
                elif kind is int:
                    value = int(raw)
                elif kind is float:
                    value = float(raw)
                else:
                    value = raw
            except ValueError:
                raise ConfigError(f"{where}: {section}.{key}: cannot parse {raw!r}") from None
            setattr(config, field, value)
    if cp.has_section("population"):
        try:
            config.population = population_spec_from_section(dict(cp["population"]), where=where)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return config


def to_ini(config: ExperimentConfig) -> str:
    """Serialize a config to INI text that re-parses to an equal config."""
    cp = configparser.ConfigParser()
    cp["run"] = {"command": config.command, "seed": str(config.seed), "format": config.format}
    if config.out is not None:
        cp["run"]["out"] = config.out
    if config.plot_data is not None:
        cp["run"]["plot_data"] = config.plot_data
    model = {}
    if config.model is not None:
        model["kind"] = config.model
    model.update(
        sigma=repr(config.sigma), n1=str(config.n1), n2=str(config.n2), n=str(config.n)
    )
    if config.csv_f is not None:
        model["csv_f"] = config.csv_f
    if config.csv_g is not None:
        model["csv_g"] = config.csv_g
    cp["model"] = model
    hyp = {}
    if config.theta0 is not None:
        hyp["theta0"] = repr(config.theta0)
    if config.theta1 is not None:
        hyp["theta1"] = repr(config.theta1)
    if config.theta1_list is not None:
        hyp["theta1_list"] = ", ".join(repr(t) for t in config.theta1_list)
    if hyp:
        cp["hypotheses"] = hyp
    cp["quadrature"] = {
        "abs_tol": repr(config.abs_tol),
        "rel_tol": repr(config.rel_tol),
        "max_evaluations": str(config.max_evaluations),
    }
    cp["monte_carlo"] = {"replicates": str(config.replicates)}
    survey = {
        "quantile": repr(config.quantile),
        "p_accurate": repr(config.p_accurate),
        "noise_sd": repr(config.noise_sd),
        "replications": str(config.replications),
    }
    if config.srs_size is not None:
        survey["srs_size"] = str(config.srs_size)
    cp["survey"] = survey
    if config.population is not None:
        lines = "\n" + "\n".join(
            f"{s.label}, {s.size}, {s.value_mean!r}, {s.value_sd!r}, {p!r}"
            for s, p in zip(config.population.strata, config.population.attribute_prob)
        )
        cp["population"] = {"seed": str(config.population.seed), "strata": lines}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def config_from_record(record: dict) -> ExperimentConfig:
    """Rebuild a config from a manifest's config record (inverse of config_record)."""
    data = dict(record)
    pop = data.pop("population", None)
    theta1_list = data.pop("theta1_list", None)
    config = ExperimentConfig(**data)
    if theta1_list is not None:
        config.theta1_list = tuple(theta1_list)
    if pop is not None:
        config.population = PopulationSpec(
            strata=tuple(
                Stratum(s["label"], s["size"], s["value_mean"], s["value_sd"])
                for s in pop["strata"]
            ),
            attribute_prob=tuple(s["attribute_prob"] for s in pop["strata"]),
            seed=pop["seed"],
        )
    return config


def config_record(config: ExperimentConfig) -> dict:
    rec = {}
    for f in fields(config):
        v = getattr(config, f.name)
        if isinstance(v, PopulationSpec):
            rec[f.name] = {
                "seed": v.seed,
                "strata": [
                    {
                        "label": s.label,
                        "size": s.size,
                        "value_mean": s.value_mean,
                        "value_sd": s.value_sd,
                        "attribute_prob": p,
                    }
                    for s, p in zip(v.strata, v.attribute_prob)
                ],
            }
        elif isinstance(v, tuple):
            rec[f.name] = list(v)
        else:
            rec[f.name] = v
    return rec


def _require(config: ExperimentConfig, *names: str) -> None:
    for name in names:
        if getattr(config, name) is None:
            raise ConfigError(f"field {name!r} is required for command {config.command!r}")


def _quad_cfg(config: ExperimentConfig) -> QuadratureConfig:
    try:
        return QuadratureConfig(config.abs_tol, config.rel_tol, config.max_evaluations)
    except ValueError as exc:
        raise ConfigError(f"quadrature: {exc}") from None


def _family(config: ExperimentConfig) -> MarginalFamily:
    if config.model == "normal":
        return make_normal_location(config.sigma)
    if config.model == "exponential":
        return make_exponential_rate()
    raise ConfigError(f"model {config.model!r} is not a marginal family")


def _expanded(config: ExperimentConfig) -> ExpandedModel:
    if config.model == "two-stage-normal":
        return make_two_stage_normal(config.n1, config.n2, config.sigma)
    if config.model == "variance-expansion":
        return make_normal_variance_expansion(config.n)
    raise ConfigError(f"model {config.model!r} is not an expanded model")


def _hypotheses(config: ExperimentConfig) -> SimpleHypotheses:
    _require(config, "theta0", "theta1")
    try:
        return SimpleHypotheses(config.theta0, config.theta1)
    except ValueError as exc:
        raise ConfigError(f"hypotheses: {exc}") from None


def _cmd_affinity(config: ExperimentConfig):
    _require(config, "model")
    cfg = _quad_cfg(config)
    if config.model == "tabulated":
        _require(config, "csv_f", "csv_g")
        f = load_tabulated_csv(config.csv_f)
        g = load_tabulated_csv(config.csv_g)
    else:
        hyp = _hypotheses(config)
        family = _family(config)
        f = family.density_at(hyp.theta1)
        g = family.density_at(hyp.theta0)
    res = compute_affinity(f, g, cfg)
    return {
        "affinity": res.value,
        "raw_value": res.raw_value,
        "abs_error_estimate": res.abs_error_estimate,
        "evaluations": res.evaluations,
        "hellinger_sq": 2.0 * (1.0 - res.value),
    }


def _cmd_bound(config: ExperimentConfig):
    _require(config, "model")
    cfg = _quad_cfg(config)
    hyp = _hypotheses(config)
    if config.model in FAMILY_MODELS:
        res = marginal_bound(_family(config), hyp, cfg)
        return {
            "bound": res.value,
            "abs_error_estimate": res.abs_error_estimate,
            "evaluations": res.evaluations,
        }
    em = _expanded(config)
    mb = marginal_bound(em.marginal, hyp, cfg)
    eb = expanded_bound(em, hyp, cfg)
    return {
        "marginal_bound": mb.value,
        "marginal_error": mb.abs_error_estimate,
        "expanded_bound": eb.value,
        "expanded_error": eb.abs_error_estimate,
    }


def _cmd_r_measure(config: ExperimentConfig):
    _require(config, "model")
    comp = activation_measure(_expanded(config), _hypotheses(config), _quad_cfg(config))
    return {
        "marginal_bound": comp.marginal_bound,
        "expanded_bound": comp.expanded_bound,
        "r_measure": comp.r_measure,
        "strict": comp.strict,
        "marginal_error": comp.marginal_error,
        "expanded_error": comp.expanded_error,
        "hellinger_sq_gain": comp.hellinger_sq_gain,
    }


def _cmd_test(config: ExperimentConfig):
    _require(config, "model")
    cfg = _quad_cfg(config)
    hyp = _hypotheses(config)
    seed = row_seed(config.seed, hyp.theta1)
    if config.model in FAMILY_MODELS:
        family = _family(config)
        est = estimate_phi_errors(family, hyp, config.replicates, seed)
        bound = marginal_bound(family, hyp, cfg).value
        test_kind = "phi"
    else:
        em = _expanded(config)
        est = estimate_psi_errors(em, hyp, config.replicates, seed)
        bound = expanded_bound(em, hyp, cfg).value
        test_kind = "psi"
    chk = check_bound(est, bound)
    return {
        "test": test_kind,
        "theta0": hyp.theta0,
        "theta1": hyp.theta1,
        "alpha_hat": est.alpha_hat,
        "beta_hat": est.beta_hat,
        "half_width_alpha": est.half_width_alpha,
        "half_width_beta": est.half_width_beta,
        "replicates": est.replicates,
        "seed": config.seed,
        "bound": chk.bound,
        "slack": chk.slack,
        "satisfied": chk.satisfied,
    }


def _cmd_mc_sweep(config: ExperimentConfig):
    _require(config, "model", "theta0", "theta1_list")
    cfg = _quad_cfg(config)
    if config.model in FAMILY_MODELS:
        return sweep(
            "phi", _family(config), config.theta0, config.theta1_list,
            config.replicates, config.seed, cfg,
        )
    return sweep(
        "psi", _expanded(config), config.theta0, config.theta1_list,
        config.replicates, config.seed, cfg,
    )


def _cmd_survey(config: ExperimentConfig):
    _require(config, "population")
    try:
        acc = AccuracyModel(config.p_accurate, config.noise_sd)
    except ValueError as exc:
        raise ConfigError(f"survey: {exc}") from None
    return compare_schemes(
        config.population,
        acc,
        config.quantile,
        config.replications,
        config.seed,
        srs_size=config.srs_size,
    )


_RUNNERS = {
    "affinity": _cmd_affinity,
    "bound": _cmd_bound,
    "r-measure": _cmd_r_measure,
    "test": _cmd_test,
    "mc-sweep": _cmd_mc_sweep,
    "survey": _cmd_survey,
}


def _out_path(config: ExperimentConfig) -> Path:
    if config.out is not None:
        return Path(config.out)
    base = os.environ.get(OUT_DIR_ENV, ".")
    name = config.command.replace("-", "_") + "." + config.format
    return Path(base) / name


def run(config: ExperimentConfig) -> int:
    """Execute one configured experiment; returns the process exit code."""
    if config.format not in ("csv", "json"):
        raise ConfigError(f"field 'format' must be csv or json, got {config.format!r}")
    if config.plot_data is not None and config.command not in ("mc-sweep", "survey"):
        raise ConfigError(f"field 'plot_data' is not supported for {config.command!r}")
    started = time.perf_counter()
    result = _RUNNERS[config.command](config)
    if isinstance(result, dict):
        text = render_record(result, config.format)
    else:
        text = render_table(result, config.format)
    out = _out_path(config)
    write_atomic(out, text)
    wall = time.perf_counter() - started
    write_manifest(out, text, config_record(config), wall)
    if config.plot_data is not None:
        emit_plot_data(result, config.plot_data)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pxkit",
        description="Affinity bounds for simple-hypothesis tests under parameter "
        "expansion, with Monte Carlo checks and survey-augmentation simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        p = sub.add_parser(command)
        p.add_argument("--config", help="INI config file; flags override its values")
        p.add_argument("--seed", type=int, help="base seed for all derived streams")
        p.add_argument("--out", help="output path (default: $PXKIT_OUT_DIR/<command>.<format>)")
        p.add_argument("--format", choices=["csv", "json"], help="output format")
        p.add_argument("--abs-tol", type=float, dest="abs_tol")
        p.add_argument("--rel-tol", type=float, dest="rel_tol")
        p.add_argument("--max-evaluations", type=int, dest="max_evaluations")
        p.add_argument("--replicates", type=int)
        p.add_argument(
            "--model",
            choices=list(FAMILY_MODELS) + list(EXPANDED_MODELS) + ["tabulated"],
        )
        p.add_argument("--sigma", type=float)
        p.add_argument("--n1", type=int)
        p.add_argument("--n2", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--csv-f", dest="csv_f")
        p.add_argument("--csv-g", dest="csv_g")
        p.add_argument("--theta0", type=float)
        p.add_argument("--theta1", type=float)
        p.add_argument("--theta1-list", dest="theta1_list", help="comma-separated alternatives")
        if command in ("mc-sweep", "survey"):
            p.add_argument("--plot-data", dest="plot_data", help="also write an x/y CSV projection")
        if command == "survey":
            p.add_argument("--quantile", type=float)
            p.add_argument("--p-accurate", type=float, dest="p_accurate")
            p.add_argument("--noise-sd", type=float, dest="noise_sd")
            p.add_argument("--replications", type=int)
            p.add_argument("--srs-size", type=int, dest="srs_size")
    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    config = ExperimentConfig(command=args.command)
    if args.config:
        config = apply_config_file(config, args.config)
    for name in (
        "seed", "out", "format", "plot_data", "model", "sigma", "n1", "n2", "n",
        "csv_f", "csv_g", "theta0", "theta1", "abs_tol", "rel_tol", "max_evaluations",
        "replicates", "quantile", "p_accurate", "noise_sd", "replications", "srs_size",
    ):
        value = getattr(args, name, None)
        if value is not None:
            setattr(config, name, value)
    if getattr(args, "theta1_list", None) is not None:
        config.theta1_list = _parse_floats(args.theta1_list)
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        return run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except QuadratureBudgetError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
