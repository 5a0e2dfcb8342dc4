"""Command-line front end.

Every subcommand builds a scenario config (from ``--config`` and flags) with a
one-step pipeline and hands it to the scenario runner, so the CSV layout and
exit codes are the same whether a computation is run alone or inside a
bundled experiment.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import (MEASURE_KINDS, SET_KINDS, WEIGHT_KINDS, ConfigError, ScenarioConfig,
                     _parse_float, load_scenario, with_overrides)
from .scenarios import BUNDLED, EXIT_NUMERICAL, bundled, run

log = logging.getLogger("dirichlet_lab")

COMMANDS = {
    ("set", "stats"): "set_stats",
    ("class", "test"): None,
    ("dirichlet", "local"): "local_ratio",
    ("dirichlet", "energy"): "energy",
    ("dirichlet", "mu"): "mu_energy",
    ("carleson", "ars"): "ars",
    ("carleson", "onebox"): "onebox",
    ("carleson", "cn"): "cn",
    ("carleson", "verdict"): "multiplier",
    ("capacity", "series"): "capacity_series",
    ("capacity", "polar"): "polarity",
    ("capacity", "cyclic"): "cyclicity",
}
CLASS_TESTS = {"k": "class_k", "l1": "class_l1", "l2": "class_l2", "equivalents": "class_equivalents",
               "carleson": "carleson_set"}


def _number(text: str) -> float:
    """Float flag that also accepts fractions such as 1/3."""
    try:
        return _parse_float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from exc


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run")
    g.add_argument("--config", help="INI file with [set], [weight], [measure], [quad] sections")
    g.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    g.add_argument("--tol", type=_number, default=None, help="relative quadrature tolerance")
    g.add_argument("--out-dir", default=None, help="directory for CSV and summary files")
    s = p.add_argument_group("set")
    s.add_argument("--set", dest="set_kind", choices=SET_KINDS)
    s.add_argument("--ratio", type=_number, help="Cantor ratio rho in (0, 1/2)")
    s.add_argument("--depth", type=int, help="Cantor depth")
    s.add_argument("--gamma", type=_number, help="sequence exponent")
    s.add_argument("--count", type=int, help="number of sequence points")
    s.add_argument("--seq-alpha", type=_number, help="alpha of the theta_n-set")
    s.add_argument("--seq-beta", type=_number, help="beta of the theta_n-set")
    s.add_argument("--points", help="comma-separated angles for point and finite sets")
    w = p.add_argument_group("weight")
    w.add_argument("--weight", dest="weight_kind", choices=WEIGHT_KINDS)
    w.add_argument("--alpha", type=_number, help="exponent of the power weight")
    w.add_argument("--sigma", type=_number, help="exponent of the log-power weight")
    m = p.add_argument_group("measure")
    m.add_argument("--measure", dest="measure_kind", choices=MEASURE_KINDS)
    m.add_argument("--power", type=_number, help="p in dist^p")
    m.add_argument("--atoms", help="atoms as theta:mass,theta:mass")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dirichlet-lab",
                                     description="Local Dirichlet integrals of distance functions")
    parser.add_argument("-v", "--verbose", action="store_true")
    top = parser.add_subparsers(dest="group", required=True)

    sp = top.add_parser("set", help="build or describe a closed set").add_subparsers(dest="action", required=True)
    _common(sp.add_parser("build", help="write the gap list as CSV"))
    _common(sp.add_parser("stats", help="counting function, sublevel lengths, change of variables"))

    cp = top.add_parser("class", help="set class tests").add_subparsers(dest="action", required=True)
    ct = cp.add_parser("test", help="K, L1, L2 and Carleson-set tests")
    _common(ct)
    ct.add_argument("--test", choices=sorted(CLASS_TESTS), default="k")
    ct.add_argument("--beta", type=_number, default=None, help="exponent for the equivalent forms")

    dp = top.add_parser("dirichlet", help="local Dirichlet integrals").add_subparsers(dest="action", required=True)
    dl = dp.add_parser("local", help="D_zeta(f) and its ratio to dist^(2 alpha - 1)")
    _common(dl)
    dl.add_argument("--zeta", help="comma-separated boundary angles (default: probe points)")
    _common(dp.add_parser("energy", help="Dirichlet energy of f"))
    _common(dp.add_parser("mu", help="int D_zeta(f) dmu"))

    kp = top.add_parser("carleson", help="Carleson measure and multiplier tests").add_subparsers(
        dest="action", required=True)
    for name, text in (("ars", "energy condition over arcs"), ("onebox", "one-box sufficient condition"),
                       ("cn", "necessary log condition"), ("verdict", "membership and multiplier verdict")):
        _common(kp.add_parser(name, help=text))

    qp = top.add_parser("capacity", help="capacity, polarity and cyclicity").add_subparsers(
        dest="action", required=True)
    cs = qp.add_parser("series", help="Cantor capacity series")
    _common(cs)
    cs.add_argument("--terms", type=int, default=None)
    cs.add_argument("--doubly-exponential", action="store_true", help="use rho_n = 2^(-2^n)")
    for name in ("polar", "cyclic"):
        q = qp.add_parser(name, help=f"{'polarity' if name == 'polar' else 'cyclicity'} hypotheses")
        _common(q)
        q.add_argument("--gauge-power", type=_number, default=None, help="h(t) = t^p (default: sublevel envelope)")

    ep = top.add_parser("experiment", help="bundled or file-based scenarios").add_subparsers(
        dest="action", required=True)
    er = ep.add_parser("run", help="run a scenario by bundled name or config path")
    er.add_argument("scenario")
    er.add_argument("--threads", type=int, default=1)
    er.add_argument("--tol", type=float, default=None)
    er.add_argument("--out-dir", default=None)
    ep.add_parser("list", help="list bundled scenarios")
    return parser


def config_from_args(args) -> ScenarioConfig:
    cfg = load_scenario(args.config) if getattr(args, "config", None) else ScenarioConfig()
    cfg = replace(
        cfg,
        set=with_overrides(cfg.set, kind=args.set_kind, ratio=args.ratio, depth=args.depth,
                           gamma=args.gamma, count=args.count, alpha=args.seq_alpha,
                           beta=args.seq_beta, points=args.points),
        weight=with_overrides(cfg.weight, kind=args.weight_kind, alpha=args.alpha, sigma=args.sigma),
        measure=with_overrides(cfg.measure, kind=args.measure_kind, power=args.power, atoms=args.atoms),
        options=dict(cfg.options),
    )
    for key in ("beta", "terms", "gauge_power"):
        if getattr(args, key, None) is not None:
            cfg.options[key] = str(getattr(args, key))
    if getattr(args, "zeta", None):
        cfg.options["points"] = args.zeta
    if getattr(args, "doubly_exponential", False):
        cfg.options["rule"] = "doubly_exponential"
    return cfg


def _emit(text: str) -> None:
    print(text, flush=True)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.group == "experiment":
            if args.action == "list":
                for name in sorted(BUNDLED):
                    _emit(f"{name}: {bundled(name).description}")
                return 0
            cfg = load_scenario(args.scenario) if Path(args.scenario).is_file() else bundled(args.scenario)
        else:
            cfg = config_from_args(args)
            if (args.group, args.action) == ("set", "build"):
                E = cfg.set.build()
                out = Path(args.out_dir or cfg.output.dir)
                out.mkdir(parents=True, exist_ok=True)
                path = out / f"{cfg.output.prefix or cfg.set.kind}_gaps.csv"
                E.to_csv(path)
                _emit(f"{E!r}\nwrote {path}")
                return 0
            step = CLASS_TESTS[args.test] if args.group == "class" else COMMANDS[(args.group, args.action)]
            cfg = replace(cfg, name=f"{args.group}-{args.action}", pipeline=[step])
    except ConfigError as exc:
        parser.error(str(exc))
    try:
        result = run(cfg, args.out_dir, args.threads, args.tol,
                     log=(lambda s: log.info(s)) if args.verbose else None)
    except ConfigError as exc:
        parser.error(str(exc))
    except (RuntimeError, ArithmeticError) as exc:
        _emit(f"numerical failure: {exc}")
        return EXIT_NUMERICAL
    except ValueError as exc:
        parser.error(str(exc))
    _emit(result.summary())
    for path in result.artifacts:
        _emit(f"wrote {path}")
    return result.status


if __name__ == "__main__":
    sys.exit(main())
