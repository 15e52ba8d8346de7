"""Command line: ``feberi validate|run|fig2..fig6|sweep``.

Exit status is 0 on success, 1 when the configuration is invalid and 2 when
a solver fails.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .analytic import ValidityWarning
from .config import (PRESET_KINDS, ConfigError, Model, ScenarioConfig, load_config, load_toml,
                     merge, parse_config, set_dotted, table1_defaults)
from .physical import ParameterError
from .quantum.grid import SizingError
from .quantum.state import DensityMatrixError
from .wavepacket import ConfigurationError, QewKind

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 1, 2
_INVALID = (ConfigError, ParameterError, ConfigurationError, SizingError, DensityMatrixError)


def _add_common(p, config_required=False):
    p.add_argument("--config", required=config_required, metavar="PATH", help="TOML scenario file")
    p.add_argument("--seed", type=int, metavar="U64", help="overrides scenario.seed")


def _add_run(p):
    p.add_argument("--out", metavar="DIR", help="output directory (default: scenario.out or ./out)")
    p.add_argument("--model", choices=[m.value for m in Model], help="overrides scenario.model")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="feberi", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"feberi {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("validate", help="check a config and print derived quantities")
    _add_common(p, True)
    p = sub.add_parser("run", help="run the scenario described by a config")
    _add_common(p, True)
    _add_run(p)
    for name, kind in PRESET_KINDS.items():
        p = sub.add_parser(name, help=f"reference-parameter preset ({kind.value})")
        _add_common(p)
        _add_run(p)
    p = sub.add_parser("sweep", help="Cartesian parameter sweep over [sweep] keys")
    _add_common(p, True)
    _add_run(p)
    p.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes")
    return ap


def _load(args, preset=None) -> ScenarioConfig:
    if preset is not None:
        raw = table1_defaults(preset)
        if args.config:
            raw = merge(raw, load_toml(args.config))
            raw["scenario"]["kind"] = preset.value
    else:
        return _override(load_config(args.config, args.seed), args)
    return _override(parse_config(raw, args.seed), args)


def _override(cfg, args):
    from dataclasses import replace
    model = getattr(args, "model", None)
    if model:
        cfg = replace(cfg, model=Model(model))
    return cfg


def cmd_validate(args) -> int:
    from .scenarios import Context, grid_estimate
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        cfg = load_config(args.config, args.seed)
        ctx = Context(cfg)
        d = ctx.derived()
        k = ctx.kin
        print(f"scenario      {cfg.kind.value} (model {cfg.model.value}, seed {cfg.seed})")
        print(f"gamma0        {k.gamma0:.6g}")
        print(f"beta0         {k.beta0:.6g}")
        print(f"t_r           {k.transit_time:.6g} fs")
        print(f"T21           {ctx.tls.period:.6g} fs")
        print(f"omega21       {ctx.tls.omega21:.6g} rad/fs")
        print(f"g             {ctx.g:.4e}")
        print(f"sigma_et/T21  {d['sigma_over_period']:.6g}")
        if cfg.qew.kind is QewKind.PINEM:
            period = 2 * 3.141592653589793 / cfg.omega_b
            if cfg.beam.sigma_et < period * (1 - 1e-9):
                warnings.warn(f"sigma_et = {cfg.beam.sigma_et:.4g} fs is not wider than the bunching "
                              f"period {period:.4g} fs: the modulated-QEW model is outside its validity "
                              "regime", ValidityWarning)
        try:
            est = grid_estimate(cfg, k, ctx.tls)
            print(f"grid          N_z = {est['n_z']} (dz {est['dz_nm']:.4g} nm, span {est['span_nm']:.4g} nm), "
                  f"{est['n_steps']} steps of {est['dt_fs']:.4g} fs")
        except SizingError as exc:
            print(f"grid          infeasible: {exc}")
            return EXIT_INVALID
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return EXIT_OK


def _out_dir(args, cfg, default="out"):
    return args.out or cfg.out or default


def cmd_run(args, preset=None) -> int:
    from .scenarios import run_scenario
    cfg = _load(args, preset)
    out = _out_dir(args, cfg, preset.value if preset else "out")
    summary = run_scenario(cfg, out)
    print(json.dumps({"out": out, **_short(summary)}, indent=2, default=str))
    return EXIT_OK


def _short(summary):
    return {k: v for k, v in summary.items() if k != "files"}


def _sweep_point(job):
    idx, raw, seed, out, model = job
    from dataclasses import replace

    from .scenarios import run_scenario
    cfg = parse_config(raw, seed)
    if model:
        cfg = replace(cfg, model=Model(model))
    d = os.path.join(out, f"point_{idx:04d}")
    return idx, run_scenario(cfg, d)


def cmd_sweep(args) -> int:
    raw = load_toml(args.config)
    grid = raw.pop("sweep", None)
    if not grid:
        raise ConfigError("sweep: the config needs a [sweep] table of dotted keys to lists")
    kind = raw.get("scenario", {}).get("kind")
    if kind in {k.value for k in PRESET_KINDS.values()}:
        from .config import ScenarioKind
        raw = merge(table1_defaults(ScenarioKind(kind)), raw)
    keys = sorted(grid)
    for key in keys:
        if not isinstance(grid[key], list) or not grid[key]:
            raise ConfigError(f"sweep.{key}: expected a non-empty list")
    points = list(itertools.product(*(grid[k] for k in keys)))
    raws = []
    for values in points:
        r = raw
        for key, v in zip(keys, values):
            r = set_dotted(r, key, v)
        parse_config(r, args.seed)  # validate every point before running any
        raws.append(r)
    base_cfg = parse_config(raws[0], args.seed)
    out = _out_dir(args, base_cfg, "sweep")
    os.makedirs(out, exist_ok=True)
    jobs = [(i, r, args.seed, out, args.model) for i, r in enumerate(raws)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            list(ex.map(_sweep_point, jobs))
    else:
        list(map(_sweep_point, jobs))
    with open(os.path.join(out, "sweep.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["point", *keys, "directory"])
        for i, values in enumerate(points):
            w.writerow([i, *[str(v) for v in values], f"point_{i:04d}"])
    print(json.dumps({"out": out, "points": len(points)}, indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        return cmd_run(args, PRESET_KINDS[args.command])
    except _INVALID as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # solver and numerical failures
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
