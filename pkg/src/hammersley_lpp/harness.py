"""Run configuration, experiment dispatch and on-disk artifacts.

Config files are INI-style: a ``[run]`` section with shared keys and one
optional section per experiment.  Resolution order, lowest to highest:
built-in defaults, ``[run]``, ``[<experiment>]``, command-line overrides.
"""
from __future__ import annotations

import configparser
import csv
import math
import os
from dataclasses import dataclass, field, fields

from . import estimators
from .points import ConfigurationError
from .weights import LAWS, LawError, WeightLaw, make_law

EXPERIMENTS = ("gamma", "martin", "fluct", "scale", "rays", "coalesce", "busemann",
               "straightness", "pathcount", "oracle-suite")

DEFAULTS = {
    "gamma": {"r": "1000", "replicas": "200"},
    "martin": {"r": "500", "replicas": "200"},
    "fluct": {"radii": "128 256 512 1024 2048", "replicas": "300"},
    "scale": {"r": "500", "lambda": "2", "replicas": "400"},
    "rays": {"alpha": repr(math.pi / 4), "radii": "500 1000 2000", "starts": "0,0 30,0", "replicas": "100"},
    "coalesce": {"alpha": repr(math.pi / 4), "radii": "500 1000 2000", "starts": "0,0 30,0", "replicas": "100"},
    "busemann": {"alpha": repr(math.pi / 4), "radii": "500 1000 2000", "starts": "0,0 15,0 30,0",
                 "replicas": "100"},
    "straightness": {"radii": "256 512 1024 2048", "delta": "0.2", "replicas": "100"},
    "pathcount": {"r": "100", "replicas": "1000"},
    "oracle-suite": {"replicas": "1000", "max_points": "10"},
}
COMMON_DEFAULTS = {"law": "dirac", "law.value": "1", "seed": "0", "out": "runs", "threads": "1"}


@dataclass
class RunConfig:
    experiment: str
    law: WeightLaw
    replicas: int
    master_seed: int
    out: str
    threads: int = 1
    r: float | None = None
    radii: tuple | None = None
    alpha: float | None = None
    delta: float | None = None
    lam: float | None = None
    starts: tuple | None = None
    max_points: int | None = None
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    def to_manifest(self) -> str:
        """INI text that :func:`load_config` turns back into an equal config."""
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        cp["run"] = _flatten(self)
        lines = []
        for key, value in cp["run"].items():
            lines.append(f"{key} = {value}")
        return "[run]\n" + "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _flatten(cfg: RunConfig) -> dict:
    out = {"experiment": cfg.experiment, "law": cfg.law.kind}
    for name, value in cfg.law.params().items():
        if isinstance(value, tuple):
            out[f"law.{name}"] = " ".join(_fmt(v) for v in value)
        else:
            out[f"law.{name}"] = _fmt(value)
    out.update(replicas=str(cfg.replicas), seed=str(cfg.master_seed), out=cfg.out, threads=str(cfg.threads))
    if cfg.r is not None:
        out["r"] = _fmt(cfg.r)
    if cfg.radii is not None:
        out["radii"] = " ".join(_fmt(r) for r in cfg.radii)
    if cfg.alpha is not None:
        out["alpha"] = _fmt(cfg.alpha)
    if cfg.delta is not None:
        out["delta"] = _fmt(cfg.delta)
    if cfg.lam is not None:
        out["lambda"] = _fmt(cfg.lam)
    if cfg.starts is not None:
        out["starts"] = " ".join(f"{_fmt(x)},{_fmt(t)}" for x, t in cfg.starts)
    if cfg.max_points is not None:
        out["max_points"] = str(cfg.max_points)
    return out


def read_config_file(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    with open(path) as fh:
        cp.read_file(fh)
    return cp


def _number(raw: dict, key: str, cast=float):
    try:
        return cast(raw[key])
    except KeyError:
        raise ConfigurationError(f"missing required key {key!r}") from None
    except ValueError:
        raise ConfigurationError(f"{key}: cannot parse {raw[key]!r}") from None


def _law_from(raw: dict) -> WeightLaw:
    kind = raw.get("law")
    if kind not in LAWS:
        raise ConfigurationError(f"law: unknown kind {kind!r}; known: {', '.join(sorted(LAWS))}")
    cls = LAWS[kind]
    params = {}
    for name in cls.param_names:
        key = f"law.{name}"
        if key not in raw:
            raise ConfigurationError(f"missing law parameter {key!r} for law {kind!r}")
        if name == "sample_values":
            params[name] = tuple(float(v) for v in raw[key].replace(",", " ").split())
        else:
            params[name] = _number(raw, key)
    try:
        return make_law(kind, **params)
    except LawError as exc:
        raise ConfigurationError(str(exc)) from None


def build_config(experiment: str, file_cfg: configparser.ConfigParser | None = None,
                 overrides: dict | None = None) -> RunConfig:
    """Resolve defaults, file sections and overrides into a validated config."""
    if file_cfg is not None and experiment is None and file_cfg.has_option("run", "experiment"):
        experiment = file_cfg.get("run", "experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigurationError(f"experiment: unknown {experiment!r}; known: {', '.join(EXPERIMENTS)}")
    raw = dict(COMMON_DEFAULTS)
    raw.update(DEFAULTS[experiment])
    if file_cfg is not None:
        for section in ("run", experiment):
            if file_cfg.has_section(section):
                items = dict(file_cfg.items(section))
                if "law" in items and items["law"] != raw.get("law"):
                    # a new law kind drops the default law parameters
                    raw = {k: v for k, v in raw.items() if not k.startswith("law.")}
                raw.update(items)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "law" and value != raw.get("law"):
            raw = {k: v for k, v in raw.items() if not k.startswith("law.")}
        raw[key] = str(value)
    raw.pop("experiment", None)
    return _validate(experiment, raw)


def _validate(experiment: str, raw: dict) -> RunConfig:
    law = _law_from(raw)
    cfg = RunConfig(
        experiment=experiment,
        law=law,
        replicas=_number(raw, "replicas", int),
        master_seed=_number(raw, "seed", int),
        out=raw.get("out", "runs"),
        threads=_number(raw, "threads", int),
        raw=raw,
    )
    if cfg.replicas < 2:
        raise ConfigurationError("replicas: need at least 2")
    if not 0 <= cfg.master_seed < 2 ** 64:
        raise ConfigurationError("seed: must be a 64-bit unsigned integer")
    if cfg.threads < 1:
        raise ConfigurationError("threads: must be >= 1")
    if experiment in ("gamma", "martin", "scale", "pathcount"):
        cfg.r = _number(raw, "r")
        if not cfg.r > 0:
            raise ConfigurationError("r: must be > 0")
    if experiment == "pathcount" and cfg.r < 10:
        raise ConfigurationError("r: path count needs r >= 10")
    if experiment in ("fluct", "straightness", "rays", "coalesce", "busemann"):
        try:
            cfg.radii = tuple(float(v) for v in raw["radii"].replace(",", " ").split())
        except KeyError:
            raise ConfigurationError("missing required key 'radii'") from None
        except ValueError:
            raise ConfigurationError(f"radii: cannot parse {raw['radii']!r}") from None
        need = 2 if experiment in ("rays", "coalesce", "busemann") else 4
        r = cfg.radii
        if len(r) < need or r[0] <= 0 or any(b <= a for a, b in zip(r, r[1:])):
            raise ConfigurationError(f"radii: need at least {need} positive increasing values")
    if experiment == "fluct" and not law.exponential_moment()[0]:
        raise ConfigurationError("law: fluctuation scan needs an exponential moment")
    if experiment == "straightness":
        cfg.delta = _number(raw, "delta")
        if not 0 < cfg.delta < 0.25:
            raise ConfigurationError("delta: must lie in (0, 1/4)")
    if experiment == "scale":
        cfg.lam = _number(raw, "lambda")
        if not cfg.lam > 0:
            raise ConfigurationError("lambda: must be > 0")
        if cfg.replicas < estimators.MIN_KS_SAMPLE:
            raise ConfigurationError(f"replicas: KS test needs at least {estimators.MIN_KS_SAMPLE}")
    if experiment in ("rays", "coalesce", "busemann"):
        cfg.alpha = _number(raw, "alpha")
        if not 0 < cfg.alpha < math.pi / 2:
            raise ConfigurationError("alpha: must lie in (0, pi/2)")
        try:
            cfg.starts = tuple(tuple(float(c) for c in s.split(",")) for s in raw["starts"].split())
        except KeyError:
            raise ConfigurationError("missing required key 'starts'") from None
        except ValueError:
            raise ConfigurationError(f"starts: cannot parse {raw['starts']!r}") from None
        if any(len(s) != 2 for s in cfg.starts) or len(cfg.starts) not in (2, 3):
            raise ConfigurationError("starts: give two or three points as x,t")
        first = (cfg.radii[0] * math.cos(cfg.alpha), cfg.radii[0] * math.sin(cfg.alpha))
        for s in cfg.starts:
            if not (s[0] <= first[0] and s[1] <= first[1]):
                raise ConfigurationError(f"starts: {s} is not below the first ray target {first}")
    if experiment == "oracle-suite":
        cfg.max_points = _number(raw, "max_points", int)
        if not 0 <= cfg.max_points <= 20:
            raise ConfigurationError("max_points: must lie in [0, 20]")
    return cfg


def load_config(path, experiment: str | None = None, overrides: dict | None = None) -> RunConfig:
    return build_config(experiment, read_config_file(path), overrides)


def same_config(a: RunConfig, b: RunConfig) -> bool:
    return all(getattr(a, f.name) == getattr(b, f.name) for f in fields(RunConfig) if f.compare)


def execute(cfg: RunConfig) -> estimators.EstimatorReport:
    e = cfg.experiment
    law, n, seed, th = cfg.law, cfg.replicas, cfg.master_seed, cfg.threads
    if e == "gamma":
        return estimators.estimate_gamma(law, cfg.r, n, seed, th)
    if e == "martin":
        return estimators.martin_bound_check(law, cfg.r, n, seed, th)
    if e == "fluct":
        return estimators.fluctuation_scan(law, cfg.radii, n, seed, th)
    if e == "scale":
        return estimators.scale_invariance_test(law, cfg.r, cfg.lam, n, seed, th)
    if e == "straightness":
        return estimators.straightness_scan(law, cfg.radii, cfg.delta, n, seed, th)
    if e == "pathcount":
        return estimators.path_count_tail(law, cfg.r, n, seed, th)
    if e in ("rays", "coalesce", "busemann"):
        report = estimators.ray_scan(law, cfg.alpha, cfg.radii, cfg.starts, n, seed, th)
        report.name = e
        return report
    if e == "oracle-suite":
        return estimators.oracle_suite(n, seed, cfg.max_points)
    raise ConfigurationError(f"unknown experiment {e!r}")


def failed(cfg: RunConfig, report: estimators.EstimatorReport) -> bool:
    """Assertion-style failures that turn into a nonzero exit status."""
    aux = report.aux
    if cfg.experiment == "oracle-suite":
        return aux["mismatches"] != 0
    if cfg.experiment == "martin":
        return not aux["passes"]
    if cfg.experiment == "busemann":
        return aux["antisym_bad"] != 0 or aux["cocycle_bad"] != 0
    return False


def write_raw(report: estimators.EstimatorReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(report.columns)
        for row in report.rows:
            writer.writerow([estimators.format_value(v) for v in row])


def run(cfg: RunConfig, log=None) -> tuple[int, estimators.EstimatorReport]:
    """Execute ``cfg`` and write ``raw.csv``, ``report.txt`` and ``manifest.ini`` under ``cfg.out``."""
    os.makedirs(cfg.out, exist_ok=True)
    if log:
        log(f"running {cfg.experiment} with {cfg.replicas} replicas, seed {cfg.master_seed}")
    report = execute(cfg)
    write_raw(report, os.path.join(cfg.out, "raw.csv"))
    record = report.to_record()
    with open(os.path.join(cfg.out, "report.txt"), "w") as fh:
        fh.write(record + "\n")
    with open(os.path.join(cfg.out, "manifest.ini"), "w") as fh:
        fh.write(cfg.to_manifest())
    return (1 if failed(cfg, report) else 0), report
