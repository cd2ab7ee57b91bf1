"""Command-line surface: run, norms, decompose, check."""

import argparse
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .dyadic import block, block_range
from .errors import AnisolpError
from .fieldio import (
    FLOAT_FMT,
    format_run_config,
    hermitian_canonical,
    load_run_config,
    monitor_csv,
    read_afld,
    write_afld,
)
from .flow import VelocityField
from .grid import Grid, RealField, forward_transform, physical
from .lab import CASE_IDS, EnsembleSpec, default_case, default_field_class, run_case
from .monitor import RECORD_FIELDS, MonitorConfig, accumulate
from .normspec import evaluate_norm, parse_norm_spec
from .solver import (
    NavierStokesStepper,
    SolverConfig,
    initial_abc,
    initial_random_bandlimited,
    initial_taylor_green,
)
from .spectral import lp_norm

INIT_KINDS = ("taylor_green", "abc", "random")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="anisolp",
        description="periodic-box spectral solver with anisotropic dyadic diagnostics",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a configured run, emit snapshots + monitor CSV")
    p_run.add_argument("config", type=Path)
    p_run.add_argument("--output-dir", type=Path, default=None,
                       help="override output.dir from the config")

    p_norms = sub.add_parser("norms", help="print norms of a stored field")
    p_norms.add_argument("field", type=Path)
    p_norms.add_argument("specs", nargs="+",
                         help="e.g. L2 Lp:1.5 SobolevIso:0.5 HThetaR:0.05,1.6")
    p_norms.add_argument("--component", type=int, default=0)

    p_dec = sub.add_parser("decompose", help="per-block L^p values as CSV")
    p_dec.add_argument("field", type=Path)
    p_dec.add_argument("--mode", choices=("iso", "h", "v", "hv"), default="iso")
    p_dec.add_argument("--p", default="2")
    p_dec.add_argument("--component", type=int, default=0)

    p_chk = sub.add_parser("check", help="run an inequality case on a seeded ensemble")
    p_chk.add_argument("case", choices=CASE_IDS)
    p_chk.add_argument("--seed", type=int, default=0)
    p_chk.add_argument("--count", type=int, default=20)
    p_chk.add_argument("--resolutions", default="32",
                       help="comma-separated grid sizes, e.g. 32,64")
    p_chk.add_argument("--param", action="append", default=[],
                       metavar="NAME=VALUE", help="override a case parameter")
    p_chk.add_argument("--field-class", default=None)
    return parser


def _load_spectral(path, component):
    grid, layout, fields = read_afld(path)
    if component >= len(fields):
        raise AnisolpError(
            f"component {component} out of range ({len(fields)} stored)"
        )
    f = fields[component]
    if layout == 0:
        return grid, forward_transform(f)
    return grid, f


def _cmd_norms(args):
    _, field = _load_spectral(args.field, args.component)
    for text in args.specs:
        spec = parse_norm_spec(text)
        print(FLOAT_FMT % evaluate_norm(spec, field))
    return 0


def _cmd_decompose(args):
    _, field = _load_spectral(args.field, args.component)
    p = np.inf if args.p == "inf" else float(args.p)
    g = field.grid

    def block_lp(piece):
        return lp_norm(RealField(g, physical(piece)), p)

    out = sys.stdout
    if args.mode in ("iso", "h", "v"):
        out.write("index,lp\n")
        for j in block_range(g, args.mode):
            out.write(f"{j},{FLOAT_FMT % block_lp(block(field, args.mode, j))}\n")
    else:
        out.write("k,l,lp\n")
        for k in block_range(g, "h"):
            horiz = block(field, "h", k)
            for l in block_range(g, "v"):
                val = block_lp(block(horiz, "v", l))
                out.write(f"{k},{l},{FLOAT_FMT % val}\n")
    return 0


def _initial_field(grid, cfg):
    kind = cfg["init.kind"]
    if kind == "taylor_green":
        return initial_taylor_green(grid)
    if kind == "abc":
        return initial_abc(grid)
    if kind == "random":
        band = cfg.get("init.band", (2, max(3, grid.n1 // 4)))
        slope = cfg.get("init.slope", -5.0 / 3.0)
        amplitude = cfg.get("init.amplitude", 1.0)
        return initial_random_bandlimited(
            grid, cfg["init.seed"], band=band, slope=slope, amplitude=amplitude
        )
    raise AnisolpError(f"init.kind must be one of {INIT_KINDS}, got {kind!r}")


def run_from_config(cfg: dict, output_dir: Path) -> Path:
    """Execute a configured run; returns the output directory."""
    n = cfg["grid.n"]
    grid = Grid(n, n, n)
    solver_cfg = SolverConfig(
        nu=cfg["solver.nu"],
        dt=cfg["solver.dt"],
        t_end=cfg["solver.t_end"],
        integrator=cfg["solver.integrator"],
        dealias=cfg.get("solver.dealias", "three_halves_pad"),
        monitor_every=cfg["monitor.cadence"],
    )
    mon_cfg = MonitorConfig(
        p=cfg["monitor.p"],
        r=cfg["monitor.r"],
        theta=cfg["monitor.theta"],
        e=cfg["monitor.e"],
        cadence=cfg["monitor.cadence"],
    )
    output_dir.mkdir(parents=True, exist_ok=True)
    manifest = output_dir / "manifest.cfg"
    manifest.write_text(
        "# run manifest: rerunning with this file reproduces the outputs\n"
        f"# anisolp = {__version__}\n"
        f"# numpy = {np.__version__}\n"
        f"# scipy = {scipy.__version__}\n" + format_run_config(cfg),
        encoding="utf-8",
    )
    stepper = NavierStokesStepper(grid, solver_cfg, nonlinear="ns")
    v0 = _initial_field(grid, cfg)
    records = []
    prev = None
    for snap in stepper.run(v0):
        vel = VelocityField(*(hermitian_canonical(c) for c in snap.velocity.components))
        snap.velocity = vel
        write_afld(
            output_dir / f"snap_{snap.step_index:06d}.afld",
            grid,
            vel.components,
            layout=1,
        )
        rec = accumulate(prev, snap, mon_cfg)
        records.append(rec)
        if not rec.healthy:
            break
        prev = rec
    (output_dir / "monitor.csv").write_text(
        monitor_csv(records, RECORD_FIELDS), encoding="utf-8"
    )
    return output_dir


def _cmd_run(args):
    cfg = load_run_config(args.config)
    output_dir = args.output_dir if args.output_dir else Path(cfg["output.dir"])
    run_from_config(cfg, output_dir)
    return 0


def _cmd_check(args):
    overrides = {}
    for item in args.param:
        name, _, raw = item.partition("=")
        overrides[name] = np.inf if raw == "inf" else float(raw)
    case = default_case(args.case, overrides or None)
    resolutions = tuple(int(tok) for tok in args.resolutions.split(","))
    spec = EnsembleSpec(
        seed=args.seed,
        count=args.count,
        resolution=resolutions,
        field_class=args.field_class or default_field_class(args.case),
    )
    report = run_case(case, spec)
    print("case,mode,resolution,max_ratio")
    for n, worst in sorted(report.per_resolution.items()):
        print(f"{report.case_id},{report.constant_mode},{n},{FLOAT_FMT % worst}")
    status = "PASS" if report.passed else "FAIL"
    print(f"# {status} case ({report.case_id}): {report.message}", file=sys.stderr)
    return 0 if report.passed else 1


def main(argv=None):
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "norms": _cmd_norms,
        "decompose": _cmd_decompose,
        "check": _cmd_check,
    }
    try:
        return handlers[args.command](args)
    except AnisolpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
