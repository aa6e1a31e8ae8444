"""Command-line interface.

Subcommands::

    fdrthresh estimate   --config cfg [--out DIR] [--seed N] [--format F]
    fdrthresh risk-curve --config cfg [--out DIR] [--format F]
    fdrthresh fdr-curve  --config cfg [--out DIR] [--format F]
    fdrthresh experiment --config cfg [--out DIR] [--seed N] [--replicates N]

Configs are flat ``key = value`` text files validated against a typed
schema per subcommand; ``#`` starts a comment.  Every run writes the fully
resolved configuration next to its outputs, so rerunning with that file
reproduces the outputs byte for byte.  Exit codes: 0 success, 2 input or
config validation failure, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .estimators import fdr_threshold_estimate, read_vector
from .risk import (
    EmpiricalPrior,
    bayes_soft_risk,
    fdr_curve,
    optimal_levels,
    surrogate_risk,
)
from .selector import FdrConfig
from .simulate import (
    SignalGenerator,
    common_mean_experiment,
    concentration_check,
    minimax_ball_experiment,
    regret_experiment,
)
from .svgplot import svg_line_chart
from .thresholds import ThresholdFamily

__all__ = ["main", "ConfigError"]


class ConfigError(ValueError):
    """Invalid configuration or input file: maps to exit code 2."""


# ---------------------------------------------------------------------------
# config schema machinery

class _Key:
    def __init__(self, kind: str, default=None, required: bool = False, choices=None):
        self.kind = kind
        self.default = default
        self.required = required
        self.choices = choices

    def parse(self, name: str, raw: str):
        try:
            if self.kind == "int":
                value = int(raw)
            elif self.kind == "float":
                value = float(raw)
            elif self.kind == "bool":
                low = raw.lower()
                if low in ("true", "yes", "1"):
                    value = True
                elif low in ("false", "no", "0"):
                    value = False
                else:
                    raise ValueError
            elif self.kind == "floats":
                value = tuple(float(part) for part in raw.split(",") if part.strip())
                if not value:
                    raise ValueError
            else:
                value = raw
        except ValueError:
            raise ConfigError(f"config key {name!r}: cannot parse {raw!r} as {self.kind}")
        if self.choices is not None and value not in self.choices:
            raise ConfigError(
                f"config key {name!r}: {value!r} not one of {sorted(self.choices)}"
            )
        return value


_SELECTOR_KEYS = {
    "alpha1": _Key("float", 0.05),
    "alpha2": _Key("float", 0.05),
    "alpha1p": _Key("float", 0.1),
    "alpha2p": _Key("float", 0.025),
    "delta1": _Key("float", 0.0),
    "delta2": _Key("float", 0.0),
    "interp": _Key("float", 0.0),
}

_FAMILY_KEYS = {
    "family": _Key("str", "soft", choices={"soft", "hard", "firm", "interpolated"}),
    "firm_slope": _Key("float", 1.5),
    "weight": _Key("float", 0.5),
    "allow_hard": _Key("bool", False),
}

_SCHEMAS: dict[str, dict[str, _Key]] = {
    "estimate": {
        "input": _Key("str", required=True),
        **_FAMILY_KEYS,
        **_SELECTOR_KEYS,
    },
    "risk-curve": {
        "functional": _Key(
            "str", "bayes_risk", choices={"bayes_risk", "surrogate_risk", "fdr_curve"}
        ),
        "atoms": _Key("floats", required=True),
        "weights": _Key("floats", ()),
        "n": _Key("int", 0),
        "level_min": _Key("float", 0.0),
        "level_max": _Key("float", 0.0),
        "points": _Key("int", 256),
        "b0": _Key("float", 4.0),
    },
    "experiment": {
        "kind": _Key(
            "str",
            required=True,
            choices={"regret", "common_mean", "minimax", "concentration"},
        ),
        "n": _Key("int", required=True),
        "replicates": _Key("int", 1000),
        "seed": _Key("int", 0),
        "mu": _Key("float", 0.0),
        "spike_count": _Key("int", 0),
        "spike_value": _Key("float", 0.0),
        "p": _Key("float", 0.0),
        "radius": _Key("float", 0.0),
        "weak": _Key("bool", False),
        "level": _Key("float", 1.0),
        "strong": _Key("bool", False),
        **_FAMILY_KEYS,
        **_SELECTOR_KEYS,
    },
}
_SCHEMAS["fdr-curve"] = {
    k: v for k, v in _SCHEMAS["risk-curve"].items() if k not in ("functional", "b0")
}


def _parse_config_text(text: str, path: str) -> dict[str, str]:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def _resolve_config(command: str, path: str, overrides: dict) -> dict:
    schema = _SCHEMAS[command]
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    raw = _parse_config_text(text, path)
    unknown = set(raw) - set(schema)
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
    cfg = {}
    for name, key in schema.items():
        if name in raw:
            cfg[name] = key.parse(name, raw[name])
        elif key.required and name not in overrides:
            raise ConfigError(f"missing required config key {name!r}")
        else:
            cfg[name] = key.default
    for name, value in overrides.items():
        if value is not None and name in schema:
            cfg[name] = value
    return cfg


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(repr(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_resolved(cfg: dict, out_dir: Path) -> None:
    lines = [f"{k} = {_format_value(cfg[k])}" for k in sorted(cfg)]
    (out_dir / "resolved.cfg").write_text("\n".join(lines) + "\n")


def _write_csv(path: Path, schema: str, rows) -> None:
    lines = [f"# schema: {schema}"]
    lines.extend(",".join(str(c) for c in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _json_meta(cfg: dict, extra: dict) -> dict:
    meta = {"package_version": __version__, "config": {k: cfg[k] for k in sorted(cfg)}}
    meta.update(extra)
    return meta


def _selector_config(cfg: dict) -> FdrConfig:
    try:
        return FdrConfig(
            alpha1=cfg["alpha1"],
            alpha2=cfg["alpha2"],
            alpha1p=cfg["alpha1p"],
            alpha2p=cfg["alpha2p"],
            delta1=cfg["delta1"],
            delta2=cfg["delta2"],
            interp=cfg["interp"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def _family(cfg: dict) -> ThresholdFamily:
    try:
        kind = cfg["family"]
        if kind == "firm":
            return ThresholdFamily("firm", firm_slope=cfg["firm_slope"])
        if kind == "interpolated":
            return ThresholdFamily(
                "interpolated", firm_slope=cfg["firm_slope"], weight=cfg["weight"]
            )
        return ThresholdFamily(kind)
    except ValueError as exc:
        raise ConfigError(str(exc))


# ---------------------------------------------------------------------------
# subcommands

def cmd_estimate(cfg: dict, out_dir: Path, fmt: str) -> None:
    try:
        x = read_vector(cfg["input"])
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc))
    family = _family(cfg)
    sel = _selector_config(cfg)
    if family.kind == "hard" and not cfg["allow_hard"]:
        raise ConfigError("family = hard requires allow_hard = true")
    report = fdr_threshold_estimate(x, family, sel, allow_hard=cfg["allow_hard"])
    _write_csv(
        out_dir / "estimate.csv",
        "index:int,observation:float,estimate:float",
        ((i, repr(float(x[i])), repr(float(report.estimate[i]))) for i in range(x.size)),
    )
    payload = _json_meta(cfg, report.to_dict())
    (out_dir / "estimate.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _build_prior(cfg: dict) -> EmpiricalPrior:
    atoms = np.asarray(cfg["atoms"], dtype=float)
    weights = np.asarray(cfg["weights"], dtype=float) if cfg["weights"] else None
    n = cfg["n"] if cfg["n"] > 0 else None
    try:
        return EmpiricalPrior.from_atoms(atoms, weights, n)
    except ValueError as exc:
        raise ConfigError(str(exc))


def cmd_risk_curve(cfg: dict, out_dir: Path, fmt: str, functional: str | None = None) -> None:
    prior = _build_prior(cfg)
    functional = functional or cfg.get("functional", "bayes_risk")
    level_max = cfg["level_max"]
    if level_max <= 0.0:
        level_max = math.sqrt(2.0 * math.log(max(prior.n, 2))) + 4.0
    if not (cfg["level_min"] >= 0.0 and level_max > cfg["level_min"]):
        raise ConfigError("need 0 <= level_min < level_max")
    if cfg["points"] < 2:
        raise ConfigError("points must be >= 2")
    levels = np.linspace(cfg["level_min"], level_max, cfg["points"])
    vlines = []
    if functional == "bayes_risk":
        values = bayes_soft_risk(prior, levels)
        opt = optimal_levels(prior, level_max=level_max)
        if math.isfinite(opt.level_exact):
            vlines.append((opt.level_exact, "optimal"))
    elif functional == "surrogate_risk":
        b0 = cfg.get("b0", 4.0)
        if b0 < 4.0:
            raise ConfigError("b0 must be >= 4")
        values = surrogate_risk(prior, levels, b0)
        opt = optimal_levels(prior, b0=b0, level_max=level_max)
        if math.isfinite(opt.level_surrogate):
            vlines.append((opt.level_surrogate, "optimal"))
    else:
        values = fdr_curve(prior, levels)
    _write_csv(
        out_dir / "curve.csv",
        "level:float,value:float",
        ((repr(float(l)), repr(float(v))) for l, v in zip(levels, values)),
    )
    if fmt == "json":
        payload = _json_meta(
            cfg,
            {
                "functional": functional,
                "levels": [float(l) for l in levels],
                "values": [float(v) for v in values],
            },
        )
        (out_dir / "curve.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n"
        )
    elif fmt == "svg":
        svg = svg_line_chart(
            [(functional, levels, values)],
            title=functional,
            xlabel="level",
            ylabel="value",
            vlines=vlines,
        )
        (out_dir / "curve.svg").write_text(svg + "\n")


def _experiment_theta(cfg: dict) -> np.ndarray:
    kind = cfg["kind"]
    n = cfg["n"]
    try:
        if kind == "common_mean":
            return SignalGenerator.common_mean(cfg["mu"]).realize(n)
        if kind == "minimax":
            return SignalGenerator.least_favorable(
                cfg["p"], cfg["radius"], weak=cfg["weak"]
            ).realize(n)
        if cfg["spike_count"] > 0:
            return SignalGenerator.spikes(cfg["spike_count"], cfg["spike_value"]).realize(n)
        return SignalGenerator.zero().realize(n)
    except ValueError as exc:
        raise ConfigError(str(exc))


def cmd_experiment(cfg: dict, out_dir: Path, fmt: str) -> None:
    if cfg["n"] < 1:
        raise ConfigError("n must be >= 1")
    if cfg["replicates"] < 2:
        raise ConfigError("replicates must be >= 2")
    kind = cfg["kind"]
    sel = _selector_config(cfg)
    family = _family(cfg)
    if family.kind == "hard" and not cfg["allow_hard"]:
        raise ConfigError("family = hard requires allow_hard = true")
    rows: list[tuple[str, str]] = []
    extra: dict = {"kind": kind}
    if kind == "regret":
        theta = _experiment_theta(cfg)
        rep = regret_experiment(
            theta, cfg["replicates"], cfg["seed"], sel, family, strong=cfg["strong"]
        )
        rows += [
            ("mc_risk", repr(rep.mc.mean)),
            ("mc_se", repr(rep.mc.std_error)),
            ("exact_total", repr(rep.exact_total)),
            ("regret", repr(rep.regret)),
            ("ratio", repr(rep.ratio)),
            ("degenerate", str(rep.degenerate).lower()),
        ]
        extra["fingerprint"] = rep.mc.config_fingerprint
        if rep.oracle_mc is not None:
            rows += [
                ("oracle_risk", repr(rep.oracle_mc.mean)),
                ("oracle_se", repr(rep.oracle_mc.std_error)),
                ("oracle_ratio", repr(rep.oracle_ratio)),
            ]
    elif kind == "common_mean":
        rep = common_mean_experiment(
            cfg["n"], cfg["mu"], cfg["replicates"], cfg["seed"], sel, cfg["firm_slope"]
        )
        for label, mean, se in rep.rows:
            rows += [(f"{label}_risk", repr(mean)), (f"{label}_se", repr(se))]
        rows.append(("exact_total", repr(rep.exact_total)))
    elif kind == "minimax":
        if cfg["radius"] <= 0.0:
            raise ConfigError("minimax experiment requires radius > 0")
        rep = minimax_ball_experiment(
            cfg["n"],
            cfg["p"],
            cfg["radius"],
            cfg["replicates"],
            cfg["seed"],
            sel,
            family,
            weak=cfg["weak"],
        )
        rows += [
            ("mc_risk", repr(rep.mc.mean)),
            ("mc_se", repr(rep.mc.std_error)),
            ("benchmark", repr(rep.benchmark)),
            ("ratio", repr(rep.ratio)),
            ("level", repr(rep.level)),
        ]
        extra["fingerprint"] = rep.mc.config_fingerprint
    else:  # concentration
        theta = _experiment_theta(cfg)
        if not family.is_smooth:
            raise ConfigError("concentration check requires a smooth family")
        rep = concentration_check(theta, cfg["level"], family, cfg["replicates"], cfg["seed"])
        rows += [
            ("variance", repr(rep.variance)),
            ("bound", repr(rep.bound)),
            ("se_variance", repr(rep.se_variance)),
            ("passed", str(rep.passed).lower()),
        ]
    rows.append(("seed", str(cfg["seed"])))
    _write_csv(out_dir / "experiment.csv", "metric:str,value:str", rows)
    payload = _json_meta(cfg, {**extra, "results": {k: v for k, v in rows}})
    (out_dir / "experiment.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n"
    )


# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdrthresh",
        description="Adaptive threshold estimation of Gaussian mean vectors",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("estimate", "risk-curve", "fdr-curve", "experiment"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="key = value config file")
        p.add_argument("--out", default=".", help="output directory (created if needed)")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument(
            "--replicates", type=int, default=None, help="override config replicates"
        )
        p.add_argument(
            "--format",
            choices=("csv", "json", "svg"),
            default="csv",
            help="output format for curve artifacts",
        )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = {"seed": args.seed, "replicates": args.replicates}
    try:
        cfg = _resolve_config(args.command, args.config, overrides)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "estimate":
            cmd_estimate(cfg, out_dir, args.format)
        elif args.command == "risk-curve":
            cmd_risk_curve(cfg, out_dir, args.format)
        elif args.command == "fdr-curve":
            cmd_risk_curve(cfg, out_dir, args.format, functional="fdr_curve")
        else:
            cmd_experiment(cfg, out_dir, args.format)
        _write_resolved(cfg, out_dir)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
