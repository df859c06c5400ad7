"""Command-line front end.

    fracrd [--tolerance T] [--seed S] [--output PATH] density ...
    fracrd [...] solve CONFIG.ini
    fracrd [...] verify {ml,hfun,symbol,greens,solver,all}

Exit codes: 0 success, 1 failed verification, 2 invalid input, 3 numerical
failure.  The configuration grammar for ``solve`` is described in the
README and in :data:`CONFIG_SCHEMA`.
"""

from __future__ import annotations

import argparse
import configparser
import contextlib
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .errors import FracRDError, InvalidParams, NumericalFailure
from .greens import SpatialGrid, default_grid, fundamental_solution
from .hfunction import h_tolerance
from .mittag_leffler import ml_tolerance
from .riesz_feller import RieszFellerParams, TemporalParams
from .solver import DiffusionProblem, SolutionField, solve, solve_convolution

EXIT_OK, EXIT_VERIFY, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3

_DATA_KEYS = {"kind", "center", "width", "amplitude", "path"}
_KIND_KEYS = {
    "zero": {"kind"},
    "gaussian": {"kind", "center", "width", "amplitude"},
    "box": {"kind", "center", "width", "amplitude"},
    "delta": {"kind", "center", "amplitude"},
    "file": {"kind", "path"},
}

CONFIG_SCHEMA: dict[str, set[str]] = {
    "params": {"alpha", "theta", "beta", "eta"},
    "grid": {"x_max", "x_min", "num_points"},
    "times": {"values", "start", "stop", "count"},
    "f": _DATA_KEYS,
    "g": _DATA_KEYS,
    "phi": _DATA_KEYS,
    "solver": {"method", "source_nodes"},
    "output": {"csv", "manifest"},
}
_REQUIRED_SECTIONS = ("params", "grid", "times", "f")


class ConfigError(InvalidParams):
    """Malformed or unknown configuration entry."""


# run configuration ----------------------------------------------------------------------


@dataclass
class RunConfig:
    rf: RieszFellerParams
    tp: TemporalParams
    grid: SpatialGrid
    times: np.ndarray
    f: np.ndarray
    g: np.ndarray | None
    phi: Callable | None
    method: str = "transform"
    source_nodes: int = 256
    csv_path: Path = Path("solution.csv")
    manifest_path: Path | None = None
    data_spec: dict = field(default_factory=dict)

    def problem(self) -> DiffusionProblem:
        return DiffusionProblem(
            self.rf, self.tp, self.grid, self.times, self.f, g=self.g, phi=self.phi,
            source_nodes=self.source_nodes,
        )


def _float(section: str, key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: not a number: {text!r}") from None


def _int(section: str, key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: not an integer: {text!r}") from None


def _read_samples(path: Path, grid: SpatialGrid) -> np.ndarray:
    """Samples from an ``x,value`` CSV (``#`` comments allowed) matching the grid."""
    try:
        rows = [ln for ln in path.read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    except OSError as exc:
        raise ConfigError(f"cannot read sample file {path}: {exc}") from None
    if rows and not rows[0][0].isdigit() and rows[0][0] not in "+-.":
        rows = rows[1:]  # header
    try:
        data = np.array([[float(v) for v in ln.split(",")] for ln in rows])
    except ValueError:
        raise ConfigError(f"sample file {path} is not numeric x,value CSV") from None
    if data.ndim != 2 or data.shape != (grid.num_points, 2):
        raise ConfigError(f"sample file {path} must hold {grid.num_points} rows of x,value")
    if np.max(np.abs(data[:, 0] - grid.points)) > 1e-9 * grid.spacing + 1e-12:
        raise ConfigError(f"sample file {path} does not match the configured grid")
    return data[:, 1]


def _data(section: str, entries: dict[str, str], grid: SpatialGrid, base: Path) -> tuple[np.ndarray, dict]:
    kind = entries.get("kind")
    if kind not in _KIND_KEYS:
        raise ConfigError(f"[{section}] kind must be one of {', '.join(sorted(_KIND_KEYS))}, got {kind!r}")
    extra = set(entries) - _KIND_KEYS[kind]
    if extra:
        raise ConfigError(f"[{section}] keys not valid for kind={kind}: {', '.join(sorted(extra))}")
    x = grid.points
    num = {k: _float(section, k, v) for k, v in entries.items() if k not in ("kind", "path")}
    c, w, amp = num.get("center", 0.0), num.get("width", 1.0), num.get("amplitude", 1.0)
    if kind in ("gaussian", "box") and not w > 0:
        raise ConfigError(f"[{section}] width must be positive")
    if kind == "zero":
        vals = np.zeros(grid.num_points)
    elif kind == "gaussian":
        vals = amp * np.exp(-(((x - c) / w) ** 2))
    elif kind == "box":
        vals = np.where(np.abs(x - c) <= w / 2, amp, 0.0)
    elif kind == "delta":
        # unit-mass single-bin spike at the node nearest to the centre
        vals = np.zeros(grid.num_points)
        vals[int(np.argmin(np.abs(x - c)))] = amp / grid.spacing
    else:
        path = Path(entries.get("path", ""))
        if not entries.get("path"):
            raise ConfigError(f"[{section}] kind=file needs path")
        vals = _read_samples(path if path.is_absolute() else base / path, grid)
    return vals, {"kind": kind, **{k: entries[k] for k in sorted(entries) if k != "kind"}}


def _times(entries: dict[str, str]) -> np.ndarray:
    if "values" in entries:
        if set(entries) != {"values"}:
            raise ConfigError("[times] use either values or start/stop/count")
        parts = [p for p in entries["values"].replace(",", " ").split()]
        return np.array([_float("times", "values", p) for p in parts])
    if set(entries) != {"start", "stop", "count"}:
        raise ConfigError("[times] needs values, or all of start, stop and count")
    n = _int("times", "count", entries["count"])
    if n < 1:
        raise ConfigError("[times] count must be >= 1")
    return np.linspace(_float("times", "start", entries["start"]), _float("times", "stop", entries["stop"]), n)


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a ``solve`` configuration file."""
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keys are case-sensitive
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    sections = {s: dict(parser[s]) for s in parser.sections()}
    unknown = set(sections) - set(CONFIG_SCHEMA)
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    for name, entries in sections.items():
        bad = set(entries) - CONFIG_SCHEMA[name]
        if bad:
            raise ConfigError(f"[{name}] unknown key(s): {', '.join(sorted(bad))}")
    for name in _REQUIRED_SECTIONS:
        if name not in sections:
            raise ConfigError(f"missing section [{name}]")
    p = sections["params"]
    if "alpha" not in p or "beta" not in p:
        raise ConfigError("[params] needs alpha and beta")
    rf = RieszFellerParams(_float("params", "alpha", p["alpha"]), _float("params", "theta", p.get("theta", "0")))
    tp = TemporalParams(_float("params", "beta", p["beta"]), _float("params", "eta", p.get("eta", "1")))
    gsec = sections["grid"]
    if "x_max" not in gsec:
        raise ConfigError("[grid] needs x_max")
    grid = SpatialGrid(
        _float("grid", "x_max", gsec["x_max"]),
        _int("grid", "num_points", gsec.get("num_points", "4096")),
        _float("grid", "x_min", gsec["x_min"]) if "x_min" in gsec else None,
    )
    times = _times(sections["times"])
    base = path.parent
    f, fspec = _data("f", sections["f"], grid, base)
    g = gspec = None
    if "g" in sections:
        g, gspec = _data("g", sections["g"], grid, base)
    phi = phispec = None
    if "phi" in sections:
        samples, phispec = _data("phi", sections["phi"], grid, base)
        phi = _constant_source(samples)
    solver = sections.get("solver", {})
    method = solver.get("method", "transform")
    if method not in ("transform", "convolution"):
        raise ConfigError(f"[solver] method must be transform or convolution, got {method!r}")
    out = sections.get("output", {})
    csv_path = Path(out.get("csv", "solution.csv"))
    man = Path(out["manifest"]) if "manifest" in out else None
    return RunConfig(
        rf, tp, grid, times, f, g, phi, method,
        _int("solver", "source_nodes", solver.get("source_nodes", "256")),
        csv_path, man, {"f": fspec, "g": gspec, "phi": phispec},
    )


def _constant_source(samples: np.ndarray) -> Callable:
    def phi(x, t):
        return samples

    return phi


# commands -------------------------------------------------------------------------------


def cmd_density(args) -> int:
    rf = RieszFellerParams(args.alpha, args.theta)
    tp = TemporalParams(args.beta, args.eta)
    if not args.time > 0:
        raise InvalidParams(f"time > 0 violated (time={args.time})")
    if args.x_max is None:
        grid = default_grid(rf, tp, args.time, args.grid_points)
    else:
        grid = SpatialGrid(args.x_max, args.grid_points)
    prof = fundamental_solution(rf, tp, args.time, grid, method=args.method)
    out = Path(args.output or "density.csv")
    prof.to_csv(out)
    print(f"method={prof.method} mass={prof.mass:.17g} points={grid.num_points} output={out}")
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    problem = cfg.problem()
    field_: SolutionField = solve(problem) if cfg.method == "transform" else solve_convolution(problem)
    if args.output:
        # --output overrides both config paths; the manifest sits beside the CSV
        csv_path = Path(args.output)
        man_path = csv_path.with_suffix(".manifest.json")
    else:
        csv_path = cfg.csv_path
        man_path = cfg.manifest_path or csv_path.with_suffix(".manifest.json")
    field_.to_csv(csv_path)
    extra = {
        "command": "solve",
        "config": str(args.config),
        "solver": cfg.method,
        "data": cfg.data_spec,
        "tolerance": args.tolerance,
        "seed": args.seed,
        "version": __version__,
    }
    field_.write_manifest(man_path, extra, {"solution": csv_path})
    if field_.diagnostics.get("data_nyquist_ratio", 0.0) > 1e-12:
        print(
            "note: the data spectrum has not decayed at the Nyquist wavenumber "
            f"(ratio {field_.diagnostics['data_nyquist_ratio']:.1e}); the result is exact for the "
            "grid samples but inherits their resolution",
            file=sys.stderr,
        )
    masses = " ".join(f"{m:.6g}" for m in field_.masses)
    print(f"solver={cfg.method} times={len(field_.times)} masses=[{masses}] output={csv_path} manifest={man_path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import format_table, run_suite

    checks = run_suite(args.suite, seed=args.seed)
    table = format_table(checks)
    print(table)
    if args.output:
        Path(args.output).write_text(table + "\n")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY


# argument parsing -----------------------------------------------------------------------


def _global_options(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--tolerance", type=float, default=d(None),
                   help="absolute tolerance for Mittag-Leffler and H-function evaluation (default 1e-12)")
    p.add_argument("--seed", type=int, default=d(0), help="seed for randomised verification corpora")
    p.add_argument("--output", default=d(None), help="output file (CSV for density/solve, report for verify)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracrd", description="Space-time fractional reaction-diffusion toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    dens = sub.add_parser("density", help="fundamental solution on a grid")
    _global_options(dens, suppress=True)
    dens.add_argument("--alpha", type=float, required=True)
    dens.add_argument("--theta", type=float, default=0.0)
    dens.add_argument("--beta", type=float, default=1.0)
    dens.add_argument("--eta", type=float, default=1.0)
    dens.add_argument("--time", type=float, default=1.0)
    dens.add_argument("--grid-points", type=int, default=4096)
    dens.add_argument("--x-max", type=float, default=None, help="half-width of the grid (default 40 similarity lengths)")
    dens.add_argument("--method", choices=("auto", "spectral", "closed", "hfun"), default="auto")
    dens.set_defaults(func=cmd_density)

    sol = sub.add_parser("solve", help="solve a problem described by an INI config")
    _global_options(sol, suppress=True)
    sol.add_argument("config")
    sol.set_defaults(func=cmd_solve)

    ver = sub.add_parser("verify", help="run verification suites")
    _global_options(ver, suppress=True)
    ver.add_argument("suite", choices=("ml", "hfun", "symbol", "greens", "solver", "all"))
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with contextlib.ExitStack() as stack:
            if args.tolerance is not None:
                stack.enter_context(ml_tolerance(args.tolerance))
                stack.enter_context(h_tolerance(args.tolerance))
            return args.func(args)
    except InvalidParams as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalFailure as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FracRDError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
