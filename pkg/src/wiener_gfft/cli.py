"""Command-line driver: ``verify``, ``mc-check``, ``families``, ``report``.

Exit status: 0 all pass, 1 a deterministic identity failed, 2 only
statistical criteria failed, 3 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from .files import ConfigError, KernelLibrary, load_functional_file, load_kernel_file
from .kernels import FAMILIES, Grid
from .oracle import DEFAULT_SEED, McConfig
from .suite import (
    IDENTITIES,
    SuiteConfig,
    Tolerances,
    VerificationReport,
    list_families,
    mc_check,
    render_families,
    run_suite,
)

SEED_ENV = "WIENER_GFFT_SEED"
EXIT_CONFIG = 3


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from None


def _name_list(text: str) -> list[str]:
    return [x for x in text.replace(",", " ").split() if x]


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wiener-gfft",
        description="Verify transform/convolution identities for cylinder functionals on Wiener space.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid-n", type=int, help="grid intervals (even)")
    common.add_argument("--horizon", type=float, default=1.0, help="time horizon T")
    common.add_argument("--families", type=_name_list, help="comma-separated family names")
    common.add_argument("--seed", type=int, help=f"master seed (default ${SEED_ENV} or {DEFAULT_SEED})")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "text"), default="text")
    sub = parser.add_subparsers(dest="verb", required=True)

    v = sub.add_parser("verify", parents=[common], help="run the deterministic identity suite")
    v.add_argument("--q", type=_float_list, help="nonzero real parameters")
    v.add_argument("--identities", type=_name_list, help=f"subset of {', '.join(IDENTITIES)}")
    v.add_argument("--paths", type=int, default=32, help="sample paths for pointwise checks")
    v.add_argument("--trials", type=int, default=10, help="random functional pairs per cell")
    v.add_argument("--hypothesis-tol", type=float, default=Tolerances.hypothesis)
    v.add_argument("--tol", type=float, help="measure tolerance for every identity")
    v.add_argument("--pointwise-tol", type=float, default=Tolerances.pointwise)
    v.add_argument("--kernels", help="kernel definition file")
    v.add_argument("--functionals", help="functional definition file (uses F and G)")
    v.add_argument("--csv", help="also write a discrepancy table as CSV")

    m = sub.add_parser("mc-check", parents=[common], help="Monte Carlo oracle checks")
    m.add_argument("--samples", type=int, default=100_000, help="Brownian paths per cell")
    m.add_argument("--lambdas", type=_float_list, default=[0.5, 1.0, 2.0])
    m.add_argument("--cells", type=int, default=20)

    f = sub.add_parser("families", help="list built-in kernel families")
    f.add_argument("--families", type=_name_list, help="only these families")
    f.add_argument("--grid-n", type=int, default=1024)
    f.add_argument("--horizon", type=float, default=1.0)
    f.add_argument("--format", choices=("json", "text"), default="text")

    r = sub.add_parser("report", help="render a saved JSON report")
    r.add_argument("path")
    r.add_argument("--format", choices=("json", "text"), default="text")
    return parser


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _render(report: VerificationReport, fmt: str) -> str:
    return report.to_json() if fmt == "json" else report.to_text()


def _write_csv(report: VerificationReport, path: str):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["identity", "family", "q", "status", "max_measure_discrepancy",
                    "max_pointwise_discrepancy"])
        for e in report.entries:
            w.writerow([e["identity"], e["family"], e["parameters"].get("q", ""), e["status"],
                        e["max_measure_discrepancy"], e["max_pointwise_discrepancy"]])


def _seed(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def cmd_verify(args) -> int:
    tol_kw = {"hypothesis": args.hypothesis_tol, "pointwise": args.pointwise_tol}
    if args.tol is not None:
        tol_kw.update(measure=args.tol, inverse=args.tol, rescale=args.tol)
    kw = {}
    if args.q is not None:
        kw["q_values"] = args.q
    if args.identities is not None:
        kw["identities"] = args.identities
    if args.families is not None:
        kw["families"] = args.families
    if args.grid_n is not None:
        kw["grid_n"] = args.grid_n
    cfg = SuiteConfig(horizon=args.horizon, n_paths=args.paths, n_functionals=args.trials,
                      seed=_seed(args), tolerances=Tolerances(**tol_kw), output=args.out,
                      format=args.format, **kw)
    library = load_kernel_file(args.kernels, cfg.grid) if args.kernels else None
    functionals = None
    if args.functionals:
        if library is None:
            library = KernelLibrary(cfg.grid)
        defined = list(load_functional_file(args.functionals, library).values())
        functionals = (defined[0], defined[1] if len(defined) > 1 else defined[0])
    report = run_suite(cfg, library, functionals)
    _emit(_render(report, args.format), args.out)
    if args.csv:
        _write_csv(report, args.csv)
    return report.exit_status


def cmd_mc_check(args) -> int:
    seed = _seed(args)
    grid = Grid(args.horizon, args.grid_n or 256)
    try:
        mc = McConfig(args.samples, seed, tuple(args.lambdas), grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cfg = SuiteConfig(horizon=args.horizon, seed=seed, mc=mc, mc_cells=args.cells,
                      format=args.format, output=args.out,
                      families=args.families or list(FAMILIES))
    report = mc_check(cfg)
    _emit(_render(report, args.format), args.out)
    return report.exit_status


def cmd_families(args) -> int:
    rows = list_families(args.families, Grid(args.horizon, args.grid_n))
    _emit(json.dumps(rows, indent=2) if args.format == "json" else render_families(rows), None)
    return 0 if all(r["passed"] for r in rows) else 1


def cmd_report(args) -> int:
    try:
        data = json.loads(Path(args.path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read report {args.path}: {exc}") from None
    report = VerificationReport.from_dict(data)
    _emit(json.dumps(data, indent=2, sort_keys=True) if args.format == "json"
          else report.to_text(), None)
    return report.exit_status


COMMANDS = {"verify": cmd_verify, "mc-check": cmd_mc_check,
            "families": cmd_families, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else 0
    try:
        return COMMANDS[args.verb](args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
