"""Command-line driver.

Exit codes: 0 success, 1 configuration error, 2 finished with missing
cells, 3 fatal error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .basis import ModelParams
from .heatmap import render_heatmap
from .sweep import ConfigError, PhaseGrid, RunConfig, axis, convergence_scan, run_scan
from .thermal import mi_transition_temperature

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL, EXIT_FATAL = 0, 1, 2, 3

log = logging.getLogger("anisodicke")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON run configuration; flags override it")
    p.add_argument("--g1", help="min:max:steps")
    p.add_argument("--g2", help="min:max:steps")
    p.add_argument("--N", type=int)
    p.add_argument("--nmax", type=int, dest="n_max")
    p.add_argument("--omega", type=float)
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int)
    p.add_argument("--resume", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anisodicke", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="sweep an observable over the (g1, g2) plane")
    _common(p)
    p.add_argument("--observable")
    p.add_argument("--state", help="ground | middle | integer index in the +1 sector")
    p.add_argument("--temps", help="min:max:steps (mi_grid only)")
    p.add_argument("--plot", action="store_true", help="also write an SVG heatmap")

    p = sub.add_parser("quench", help="PR(t) after a quench from the middle H0 state")
    _common(p)
    p.add_argument("--times", help="comma-separated times (default 0.01,0.2,1,1000)")
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("thermal", help="two-spin mutual information vs temperature")
    _common(p)
    p.add_argument("--temps", required=True, help="min:max:steps")
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("tc", help="analytic critical temperature over the (g1, g2) plane")
    _common(p)
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("converge", help="repeat a scan at several boson cutoffs")
    _common(p)
    p.add_argument("--observable")
    p.add_argument("--state")
    p.add_argument("--nmax-list", required=True, help="comma-separated cutoffs")

    p = sub.add_parser("plot", help="render a grid CSV as an SVG heatmap")
    p.add_argument("grid", help="grid CSV written by scan/quench/thermal/tc")
    p.add_argument("--out", help="SVG path (default: next to the CSV)")
    p.add_argument("--layer", type=int, default=0, help="index along T or t for layered grids")
    p.add_argument("--vmin", type=float)
    p.add_argument("--vmax", type=float)
    return parser


def _config(args, **forced) -> RunConfig:
    fields = ("observable", "g1", "g2", "N", "n_max", "omega", "state", "temps", "times",
              "out", "workers", "resume")
    flags = {k: getattr(args, k, None) for k in fields}
    flags.update(forced)
    flags = {k: v for k, v in flags.items() if v is not None}
    if args.config:
        return RunConfig.load(args.config, **flags)
    return RunConfig(**flags)


def _finish(grid: PhaseGrid, config: RunConfig, plot: bool) -> int:
    if plot and config.out:
        layers = 1 if grid.layer_axis is None else len(grid.layer_axis)
        for k in range(layers):
            suffix = "" if grid.layer_axis is None else f"_{k}"
            try:
                render_heatmap(grid, Path(config.out) / f"{config.observable}{suffix}.svg", layer=k)
            except ValueError as exc:
                log.warning("heatmap skipped: %s", exc)
    print(f"{config.observable}: {grid.values.size - grid.missing} values, {len(grid.reasons)} missing cells"
          + (f" -> {config.out}" if config.out else ""))
    return EXIT_PARTIAL if grid.reasons else EXIT_OK


def _print_grid(grid: PhaseGrid):
    if grid.values.ndim == 2 and grid.values.size <= 16:
        for i, a in enumerate(grid.g1_axis):
            for j, b in enumerate(grid.g2_axis):
                print(f"g1={a:.6g} g2={b:.6g} value={float(grid.values[i, j])!r}")


def cmd_scan(args) -> int:
    config = _config(args)
    grid = run_scan(config)
    _print_grid(grid)
    return _finish(grid, config, args.plot)


def cmd_quench(args) -> int:
    config = _config(args, observable="quench_pr")
    grid = run_scan(config)
    if grid.values.shape[:2] == (1, 1):
        for t, pr in zip(grid.layer_axis, grid.values[0, 0]):
            print(f"t={t:.6g} PR={float(pr)!r}")
    return _finish(grid, config, args.plot)


def cmd_thermal(args) -> int:
    config = _config(args, observable="mi_grid")
    grid = run_scan(config)
    status = _finish(grid, config, args.plot)
    if grid.values.shape[:2] == (1, 1) and len(grid.layer_axis) >= 3:
        params = config.params(grid.g1_axis[0], grid.g2_axis[0])
        tr = mi_transition_temperature(params, grid.layer_axis)
        tc = tr.analytic_tc
        print(f"dI12/dT minimum at T={tr.t_min:.6g}; analytic T_c="
              + ("none" if tc is None else f"{tc:.6g}")
              + (" (grid coarser than 0.1)" if tr.coarse else ""))
        if config.out:
            with open(Path(config.out) / "mi_curve.csv", "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["T", "I12", "dI12_dT"])
                w.writerows([repr(float(a)), repr(float(b)), repr(float(c))]
                            for a, b, c in zip(tr.temps, tr.mi, tr.dmi_dt))
    return status


def cmd_tc(args) -> int:
    config = _config(args, observable="tc_curve")
    grid = run_scan(config)
    _print_grid(grid)
    # cells without a transition are expected here, not a partial failure
    _finish(grid, config, args.plot)
    return EXIT_OK


def cmd_converge(args) -> int:
    config = _config(args)
    cutoffs = [int(x) for x in args.nmax_list.split(",")]
    report = convergence_scan(config, cutoffs)
    print(json.dumps(report.to_dict(), indent=2))
    if any(g.reasons for g in report.grids):
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_plot(args) -> int:
    grid = PhaseGrid.read_csv(args.grid)
    out = args.out or str(Path(args.grid).with_suffix(".svg"))
    render_heatmap(grid, out, layer=args.layer, vmin=args.vmin, vmax=args.vmax)
    print(out)
    return EXIT_OK


COMMANDS = {
    "scan": cmd_scan,
    "quench": cmd_quench,
    "thermal": cmd_thermal,
    "tc": cmd_tc,
    "converge": cmd_converge,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        log.exception("fatal: %s", exc)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
