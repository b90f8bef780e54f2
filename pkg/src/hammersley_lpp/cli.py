"""Command-line entry point.

Each experiment is a subcommand.  Values are resolved in this order, later
ones winning: built-in defaults, the ``[run]`` section of ``--config``, the
section named after the experiment, then command-line flags.  The thread
count may also come from ``HAMMERSLEY_LPP_THREADS`` when ``--threads`` is
not given.
"""
from __future__ import annotations

import argparse
import os
import sys

from . import harness
from .lpp import passage_field
from .points import ConfigurationError, dump_cloud, replica_seed, sample_cloud

THREADS_ENV = "HAMMERSLEY_LPP_THREADS"


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="INI config file")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--replicas", type=int, help="number of replicas")
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int, help=f"worker threads (env {THREADS_ENV})")
    p.add_argument("--law", help="weight law kind: " + ", ".join(sorted(harness.LAWS)))
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key, e.g. --set law.p=0.25 --set radii='128 256'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hammersley-lpp", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in harness.EXPERIMENTS:
        _common(sub.add_parser(name, help=f"run the {name} experiment"))
    v = sub.add_parser("validate", help="check a config without running it")
    _common(v)
    v.add_argument("--experiment", help="experiment to validate (else [run] experiment=)")
    d = sub.add_parser("dump-cloud", help="sample one cloud and write it as a text table")
    _common(d)
    d.add_argument("--r", type=float, default=10.0, help="side of the square [0, r]^2")
    d.add_argument("--replica", type=int, default=0)
    d.add_argument("--field", action="store_true", help="also write passage values from the origin")
    return parser


def _overrides(args) -> dict:
    out = {"seed": args.seed, "replicas": args.replicas, "out": args.out, "law": args.law}
    threads = args.threads
    if threads is None and os.environ.get(THREADS_ENV):
        threads = os.environ[THREADS_ENV]
    out["threads"] = threads
    for item in args.set:
        if "=" not in item:
            raise ConfigurationError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _resolve(args, experiment):
    file_cfg = harness.read_config_file(args.config) if args.config else None
    return harness.build_config(experiment, file_cfg, _overrides(args))


def _log(msg: str):
    print(msg, file=sys.stderr, flush=True)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            cfg = _resolve(args, args.experiment)
            sys.stdout.write(cfg.to_manifest())
            return 0
        if args.command == "dump-cloud":
            cfg = harness.build_config("gamma", harness.read_config_file(args.config) if args.config else None,
                                       _overrides(args))
            return _dump(cfg, args)
        cfg = _resolve(args, args.command)
    except (ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        status, report = harness.run(cfg, _log)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(report.to_record())
    if status:
        _log(f"{cfg.experiment}: check failed")
    return status


def _dump(cfg, args) -> int:
    seed = replica_seed(cfg.master_seed, args.replica)
    cloud = sample_cloud((0.0, args.r, 0.0, args.r), 1.0, cfg.law, seed)
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, "cloud.txt")
    dump_cloud(cloud, path)
    if args.field:
        fld = passage_field(cloud)
        with open(os.path.join(cfg.out, "field.txt"), "w") as fh:
            fh.write("# x t w value pred_index\n")
            for i in range(len(cloud)):
                z = cloud[i]
                fh.write(f"{z.x!r} {z.t!r} {z.w!r} {float(fld.value[i])!r} {int(fld.pred[i])}\n")
    print(f"points={len(cloud)} seed={seed} path={path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
