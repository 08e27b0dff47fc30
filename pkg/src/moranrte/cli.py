"""Command line interface: ``moranrte analyze|sweep|plot|simulate|version``.

Exit codes: 0 success, 1 bad input or solver failure, 2 power iteration did
not converge.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, load_config
from .entropy import analyze, entropy_rate
from .io import dump_json, fmt, write_analysis, write_sweep
from .model import DegenerateStateError, build_kernel
from .montecarlo import MAX_STEPS, sample_return_trajectories
from .plot import plot_file
from .solver import DENSE_CAP, POWER_MAX_ITERS, POWER_TOL, NonConvergenceError, SolverError, solve
from .sweep import DIVISORS, Grid, parse_tracked, sweep_beta, sweep_mu, sweep_N

log = logging.getLogger("moranrte")

EXIT_OK, EXIT_ERROR, EXIT_NONCONVERGENCE = 0, 1, 2


class UsageError(Exception):
    pass


def _threads(value: int | None) -> int:
    if value:
        return value
    return int(os.environ.get("MORANRTE_THREADS", 0)) or os.cpu_count() or 1


def _solver_opts(args) -> dict:
    return {"method": args.method, "tol": args.tol, "max_iters": args.max_iters, "dense_cap": args.dense_cap}


def _kernel(cfg):
    return cfg.chain if cfg.chain is not None else build_kernel(cfg.spec)


def _parse_state(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace("-", ",").split(",") if x.strip())
    except ValueError:
        raise UsageError(f"cannot parse state {text!r}; expected e.g. 2,2") from None


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    kernel = _kernel(cfg)
    s = solve(kernel, **_solver_opts(args))
    report = analyze(kernel, s)
    prefix = args.out or Path(args.config).with_suffix("")
    csv_path, json_path = write_analysis(prefix, report, args.log_base)
    ex = report.extrema
    unit = "bits" if args.log_base == "2" else "nats"
    scale = 1 / math.log(2) if args.log_base == "2" else 1.0
    print(f"states: {kernel.size}  method: {s.method}  residual: {fmt(s.residual)}")
    print(f"entropy rate: {fmt(report.entropy_rate * scale)} {unit}")
    print(f"global max: {report.state_tuples(ex.global_max)} (unique: {ex.global_max_unique})")
    print(f"local max: {len(ex.local_max)}  local min: {len(ex.local_min)}")
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def _parse_N_grid(text: str) -> list[int]:
    if "," in text or ":" not in text:
        return [int(x) for x in text.split(",") if x.strip()]
    g = Grid.parse(text)
    return [int(round(v)) for v in g.values()]


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if cfg.spec is None:
        raise UsageError("sweeps need a Moran process config, not a transition matrix")
    tracked = parse_tracked(args.track)
    opts = dict(divisor=args.divisor, threads=_threads(args.threads), **_solver_opts(args))
    if args.param == "beta":
        result = sweep_beta(cfg.spec, Grid.parse(args.grid).values(), tracked, **opts)
    elif args.param == "mu":
        result = sweep_mu(cfg.spec, Grid.parse(args.grid).values(), tracked, **opts)
    else:
        result = sweep_N(cfg.spec, _parse_N_grid(args.grid), tracked, normalize=args.normalize, **opts)
    prefix = args.out or Path(args.config).with_suffix("").with_name(Path(args.config).stem + f"-{args.param}")
    csv_path, json_path = write_sweep(prefix, result, args.log_base)
    failed = result.failures
    print(f"{len(result.records) - len(failed)}/{len(result.records)} grid points solved")
    for r in failed:
        print(f"  {args.param}={fmt(r.param_value)}: {r.error}", file=sys.stderr)
    print(f"wrote {csv_path} and {json_path}")
    if failed and all("NonConvergence" in (r.error or "") for r in failed):
        return EXIT_NONCONVERGENCE
    return EXIT_ERROR if failed else EXIT_OK


def cmd_plot(args) -> int:
    out = plot_file(args.data, args.kind, args.out, normalized=args.normalized)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.samples < 1:
        raise UsageError(f"--samples must be at least 1, got {args.samples}")
    cfg = load_config(args.config)
    kernel = _kernel(cfg)
    state = _parse_state(args.state)
    try:
        index = int(state[0]) if cfg.chain is not None and len(state) == 1 else kernel.index(state)
        if not 0 <= index < kernel.size:
            raise KeyError(state)
    except KeyError:
        raise UsageError(f"state {args.state} is not in the state space") from None
    s = solve(kernel, **_solver_opts(args))
    h = entropy_rate(kernel, s)
    exact = h / s[index]
    stats = sample_return_trajectories(kernel, index, args.samples, args.seed, args.max_steps, _threads(args.threads))
    if stats.se_surprisal > 0:
        z = (stats.mean_surprisal - exact) / stats.se_surprisal
    else:
        z = 0.0 if math.isclose(stats.mean_surprisal, exact, abs_tol=1e-12) else math.inf
    doc = stats.to_dict()
    doc.update(
        exact_rte=exact,
        exact_return_time=1.0 / s[index],
        z_score=z,
        z_length=(stats.mean_length - 1.0 / s[index]) / stats.se_length if stats.se_length > 0 else 0.0,
        unreliable=stats.unreliable,
    )
    text = dump_json(doc)
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_version(args) -> int:
    print(__version__)
    return EXIT_OK


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=["auto", "birth-death", "dense", "power"], default="auto")
    p.add_argument("--tol", type=float, default=POWER_TOL, help="power-iteration L1 convergence tolerance")
    p.add_argument("--max-iters", type=int, default=POWER_MAX_ITERS)
    p.add_argument("--dense-cap", type=int, default=DENSE_CAP)
    p.add_argument("--log-base", choices=["e", "2"], default="e")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: $MORANRTE_THREADS or CPU count)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moranrte", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="stationary distribution, entropy rate, RTEs and extrema")
    p.add_argument("config")
    p.add_argument("--out", help="output prefix (writes <prefix>.csv and <prefix>.json)")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="sweep beta, mu or N")
    p.add_argument("config")
    p.add_argument("--param", choices=["beta", "mu", "N"], required=True)
    p.add_argument("--grid", required=True, help="start:stop:count[:linear|log], or a comma list of N values")
    p.add_argument("--track", default="corner,boundary-midpoint,center")
    p.add_argument("--normalize", action="store_true", help="divide RTEs by the state count (N sweeps)")
    p.add_argument("--divisor", choices=DIVISORS, default="stars-bars")
    p.add_argument("--out")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot", help="render a CSV from analyze or sweep as SVG")
    p.add_argument("data")
    p.add_argument("--kind", choices=["line-chart", "simplex-heatmap"], required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--normalized", action="store_true", help="plot normalized RTEs")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("simulate", help="Monte Carlo check of H_vv = H(X)/s(v)")
    p.add_argument("config")
    p.add_argument("--state", required=True, help="state counts, e.g. 2,2 (or an index for transition-matrix configs)")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=MAX_STEPS)
    p.add_argument("--out")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("version")
    p.set_defaults(func=cmd_version)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NonConvergenceError as exc:
        print(f"error: {exc} (residual {exc.residual:.3e})", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (ConfigError, UsageError, SolverError, DegenerateStateError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
