# -*- coding: utf-8 -*-
import argparse
import logging
import sys
import time
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Type

from walkfield.config import RunConfig, bind_config, read_run_config, settings, write_run_config
from walkfield.errors import WalkfieldError
from walkfield.pipelines.common import CommandResult, write_label_map, write_manifest
from walkfield.pipelines.fitting import DiagnoseConfig, DicConfig, FitConfig, run_diagnose, run_dic, run_fit
from walkfield.pipelines.graphs import BuildConfig, CheckIdentConfig, run_build, run_check_ident
from walkfield.pipelines.simulate import ConvergenceConfig, FieldConfig, PopulationConfig, run_convergence, \
    run_simulate_field, run_simulate_population

log = logging.getLogger("cli")

Runner = Callable[[RunConfig, Path], CommandResult]

COMMANDS: Dict[str, Tuple[Type[RunConfig], Runner, str]] = {
    "build": (BuildConfig, run_build, "write a graph directory from a source and report on it"),
    "check-ident": (CheckIdentConfig, run_check_ident, "classify whether Q is recoverable from QQ'"),
    "simulate-field": (FieldConfig, run_simulate_field, "draw realizations of the intrinsic field"),
    "simulate-population": (PopulationConfig, run_simulate_population, "exact population process and its ODE limit"),
    "convergence": (ConvergenceConfig, run_convergence, "gap between n/N and the ODE as N grows"),
    "fit": (FitConfig, run_fit, "MCMC fit of a spatial, diffusion or genetics model"),
    "dic": (DicConfig, run_dic, "deviance information criterion for fit directories"),
    "diagnose": (DiagnoseConfig, run_diagnose, "split-half check of a fit directory"),
}


# ---------- logs ----------

_formatter = logging.Formatter(
    fmt="%(asctime)s %(levelname)s:%(name)s:%(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
)


def setup_logging(quiet: bool = False) -> None:
    root_logger = logging.getLogger()
    if getattr(root_logger, "_walkfield_configured", False):
        return
    level = settings.log_level
    root_logger.setLevel(level)

    console = logging.StreamHandler()
    console.setFormatter(_formatter)
    console.setLevel("WARNING" if quiet else level)
    root_logger.addHandler(console)

    log_dir = Path(settings.log_dir)
    try:
        log_dir.mkdir(parents=True, exist_ok=True)
        fh = RotatingFileHandler(str(log_dir / "walkfield.log"), maxBytes=5 * 1024 * 1024,
                                 backupCount=5, encoding="utf-8")
    except OSError as e:
        log.warning("file logging disabled: %s", e)
    else:
        fh.setFormatter(_formatter)
        fh.setLevel(level)
        root_logger.addHandler(fh)
    root_logger._walkfield_configured = True


# ---------- arguments ----------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key = value run configuration")
    common.add_argument("--seed", type=int, help="64-bit seed; overrides the config's seed")
    common.add_argument("--out", type=Path, help="output directory (default <WALKFIELD_OUT_DIR>/<command>)")
    common.add_argument("--quiet", action="store_true", help="only warnings and errors on the console")

    parser = argparse.ArgumentParser(prog="walkfield", description="Random-walk spatial covariance models.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, (_, _, helptext) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=helptext, description=helptext)
    return parser


def load_config(model: Type[RunConfig], path: Optional[Path], seed: Optional[int]) -> RunConfig:
    raw = read_run_config(path) if path is not None else {}
    return bind_config(model, raw, {"seed": seed}, source=str(path) if path is not None else "command line")


def run_command(name: str, config: Optional[Path] = None, seed: Optional[int] = None,
                out: Optional[Path] = None) -> CommandResult:
    """Resolve the config, run one verb and write its manifest."""
    model, runner, _ = COMMANDS[name]
    cfg = load_config(model, config, seed)
    out = Path(out) if out is not None else Path(settings.out_dir) / name
    out.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    log.info("%s: starting, output in %s", name, out)
    result = runner(cfg, out)
    if result.labels is not None:
        result.outputs.append(write_label_map(result.labels, out))
    write_run_config(cfg, out / "config.resolved")
    write_manifest(out, name, cfg, result, started, config)
    log.info("%s: done in %.1fs %s", name, time.monotonic() - started, result.summary)
    return result


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.quiet)
    try:
        run_command(args.command, args.config, args.seed, args.out)
    except WalkfieldError as e:
        log.debug("%s failed", args.command, exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception:
        log.exception("%s: unexpected failure", args.command)
        return 1
    return 0
