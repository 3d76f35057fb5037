"""Command-line interface: ``run``, ``fit``, ``export``, ``validate-config``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import load_config
from .errors import ConfigError
from .exporters import export_cir
from .fitting import load_reference_cdf_csv, mmse_fit
from .runner import _SIGMA_FIELDS, realization_rng, relative_angle_closure, run
from .simulate import Realization, build_scene


def _add_common(parser):
    parser.add_argument("--config", required=True, help="scenario YAML file")
    parser.add_argument("--seed", type=int, default=None, help="override the master seed")
    parser.add_argument("--out-dir", default="out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thzchan",
        description="Seedable space-time-frequency non-stationary THz channel simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate-config", help="check a scenario file")
    p_validate.add_argument("--config", required=True)

    p_run = sub.add_parser("run", help="simulate realizations and export statistics")
    _add_common(p_run)
    p_run.add_argument("--realizations", type=int, default=None)
    p_run.add_argument("--threads", type=int, default=1)

    p_export = sub.add_parser("export", help="export one realization's tap tensor")
    _add_common(p_export)
    p_export.add_argument("--format", choices=("bin", "csv"), default="bin")

    p_fit = sub.add_parser("fit", help="fit an intra-cluster angle sigma to a CDF")
    _add_common(p_fit)
    p_fit.add_argument("--reference", required=True, help="two-column (value, cdf) CSV")
    p_fit.add_argument(
        "--param", choices=sorted(_SIGMA_FIELDS), default="sigma_el_rx"
    )
    p_fit.add_argument(
        "--grid",
        default="0.1:3.0:0.1",
        help="degrees as lo:hi:step (inclusive bounds)",
    )
    p_fit.add_argument("--realizations", type=int, default=1)
    return parser


def _cmd_validate(args) -> int:
    try:
        load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    print("ok")
    return 0


def _cmd_run(args) -> int:
    config = load_config(args.config)
    result = run(
        config,
        args.out_dir,
        seed=args.seed,
        realizations=args.realizations,
        threads=args.threads,
    )
    for path in result.files:
        print(path)
    return 0


def _cmd_export(args) -> int:
    config = load_config(args.config)
    seed = config.seed if args.seed is None else args.seed
    scene = build_scene(config)
    realization = Realization(scene, realization_rng(seed, 0))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"cir_realization0.{args.format}"
    export_cir(realization, path, args.format)
    print(path)
    return 0


def _cmd_fit(args) -> int:
    config = load_config(args.config)
    reference = load_reference_cdf_csv(args.reference)
    lo, hi, step = (float(v) for v in args.grid.split(":"))
    grid_deg = np.arange(lo, hi + step / 2, step)
    closure = relative_angle_closure(config, args.param)
    seed = config.seed if args.seed is None else args.seed
    best_rad, distance = mmse_fit(
        [np.radians(v) for v in grid_deg],
        closure,
        reference,
        n_realizations=args.realizations,
        seed=seed,
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    best_deg = float(np.degrees(best_rad))
    result_path = out / "fit_result.csv"
    with open(result_path, "w") as handle:
        handle.write("parameter,best_value_deg,mse\n")
        handle.write(f"{args.param},{best_deg!r},{float(distance)!r}\n")
    print(f"{args.param} = {best_deg:.3f} deg (mse {distance:.3e})")
    print(result_path)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "validate-config": _cmd_validate,
        "run": _cmd_run,
        "export": _cmd_export,
        "fit": _cmd_fit,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
