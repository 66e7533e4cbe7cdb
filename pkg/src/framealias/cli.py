"""Command-line interface: ``framealias {analyze, tighten, stats, bench}``.

Exit codes: 0 success, 1 malformed input or arguments, 2 the filterbank is
not a frame, 3 frame property inconclusive (estimates only, no dense
eigenvalues).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import (DENSE_LIMIT, JSON_SCHEMA_VERSION, Filterbank, dumps_json, load_filterbank,
                   minimal_length, save_filterbank)
from .errors import FrameAliasError
from .objectives import ObjectiveKind, evaluate
from .randstats import (RandomKernelSpec, expected_aliasing, monte_carlo_moments,
                        variance_aliasing)
from .stability import (FrameStatus, bounds_kernel_aware, bounds_walnut, deviation_bounds,
                        frame_status, optimal_bounds, tightness_report)
from .tighten import OptimizerConfig, fir_tighten, sgd_tighten
from .transforms import (MultiChannelFilterbank, NonUniformFilterbank, dilate, gram_dual,
                         interlace_multichannel, painless_report, uniformize_nonuniform)
from .walnut import aliasing_terms

EXIT_OK, EXIT_INPUT, EXIT_NOT_FRAME, EXIT_INCONCLUSIVE = 0, 1, 2, 3

TRAJECTORY_COLUMNS = ("iter", "condition", "recon_error", "objective")
ALIASING_COLUMNS = ("n", "k", "Re", "Im")
STATS_COLUMNS = ("n", "k", "E_closed_re", "E_closed_im", "V_closed",
                 "E_emp_re", "E_emp_im", "V_emp", "SE")
BENCH_COLUMNS = ("objective", "M", "L_K", "d", "mean_ns", "std_ns", "speedup_vs_LS")


@dataclass
class RunConfig:
    """Resolved arguments shared by all commands."""

    command: str
    input: Path | None = None
    generator: dict | None = None
    output: Path | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.input is None) == (self.generator is None):
            raise FrameAliasError("give exactly one of --input or a generator spec")


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path, columns, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def worker_cap(requested: int | None) -> int:
    env = os.environ.get("FRAMEALIAS_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    n = cap if requested is None else requested
    return max(1, min(n, cap))


def random_kernels(M, LK, seed, variance=None, complex_=False) -> np.ndarray:
    """Gaussian ``M x L_K`` kernels; variance defaults to ``1 / (L_K M)``."""
    rng = np.random.default_rng(seed)
    var = 1.0 / (LK * M) if variance is None else variance
    shape = (M, LK)
    if complex_:
        return np.sqrt(var / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return np.sqrt(var) * rng.standard_normal(shape)


def _generator(args) -> dict | None:
    if args.M is None:
        return None
    if args.LK is None or args.d is None:
        raise FrameAliasError("generator spec needs --M, --LK and --d")
    return {"M": args.M, "L_K": args.LK, "d": args.d, "L": args.L, "seed": args.seed,
            "variance": args.variance, "complex": bool(getattr(args, "complex", False))}


def _config(args) -> RunConfig:
    inp = Path(args.input) if getattr(args, "input", None) else None
    return RunConfig(args.command, inp, _generator(args),
                     Path(args.out) if getattr(args, "out", None) else None)


def _base_filterbank(cfg: RunConfig, channels=None):
    """The input filterbank; with ``channels`` its kernels are split into ``C x M/C`` blocks."""
    if cfg.input is not None:
        fb = load_filterbank(cfg.input)
    else:
        g = cfg.generator
        k = random_kernels(g["M"], g["L_K"], g["seed"], g["variance"], g["complex"])
        L = g["L"] if g["L"] is not None else minimal_length(g["L_K"], g["d"])
        fb = Filterbank.create(k, g["d"], L)
    if not channels:
        return fb
    if fb.num_filters % channels:
        raise FrameAliasError(f"{fb.num_filters} kernels cannot be split into {channels} channels")
    return fb.kernels.reshape(channels, -1, fb.kernel_size), fb.stride, fb.signal_length


# analyze ---------------------------------------------------------------------

def _reduce(cfg: RunConfig, args):
    """Apply the requested reduction; returns ``(filterbank, reduction record)``."""
    picked = [f for f in ("multichannel", "strides", "dilation") if getattr(args, f) is not None]
    if len(picked) > 1:
        raise FrameAliasError("--multichannel, --strides and --dilation are mutually exclusive")
    if args.multichannel is not None:
        C = args.multichannel
        k, d, L = _base_filterbank(cfg, channels=C)
        mc = MultiChannelFilterbank(k, d, L)
        fb = interlace_multichannel(mc)
        rec = {"kind": "interlace_multichannel", "channels": C}
        if C * d > mc.num_filters:
            b = optimal_bounds(gram_dual(mc))
            rec["gram_dual_nonzero_spectrum"] = {"lower": b.lower, "upper": b.upper}
        return fb, rec
    fb = _base_filterbank(cfg)
    if args.strides is not None:
        strides = [int(s) for s in args.strides.split(",")]
        fb = uniformize_nonuniform(NonUniformFilterbank(fb.kernels, strides, fb.signal_length))
        return fb, {"kind": "uniformize_nonuniform", "strides": strides}
    if args.dilation is not None:
        return dilate(fb, args.dilation), {"kind": "dilate", "factor": args.dilation}
    return fb, {"kind": "none"}


def analyze_report(fb: Filterbank, reduction: dict, dense: bool = True, tol: float = 1e-7) -> dict:
    dense = dense and fb.signal_length <= DENSE_LIMIT
    alias = aliasing_terms(fb)
    walnut = bounds_walnut(alias)
    ka_valid = fb.signal_length >= minimal_length(fb.kernel_size, fb.stride)
    ka = bounds_kernel_aware(fb) if ka_valid else None
    if dense:
        status = frame_status(fb, dense=True)
    elif walnut.conclusive or (ka is not None and ka.conclusive):
        status = FrameStatus.FRAME
    else:
        status = FrameStatus.INCONCLUSIVE
    rep = {
        "schema_version": JSON_SCHEMA_VERSION,
        "filterbank": {"M": fb.num_filters, "L_K": fb.kernel_size, "d": fb.stride,
                       "L": fb.signal_length, "relaxed_support": fb.relaxed_support},
        "reduction": reduction,
        "bands": {"count": fb.stride, "width": fb.signal_length // fb.stride,
                  "aliasing_sup": alias.aliasing_sup().tolist()},
        "bounds": {"walnut": walnut.to_dict(),
                   # only guaranteed for lengths at or above the minimal one
                   "kernel_aware": ka.to_dict() if ka is not None else None},
        "status": status.value,
        "painless": None,
        "tightness": None,
    }
    dev = deviation_bounds(fb)
    rep["deviation"] = {"identity": dev.identity, "mean": dev.mean if ka_valid else None}
    if dense:
        rep["bounds"]["optimal"] = optimal_bounds(fb).to_dict()
        rep["tightness"] = tightness_report(fb, tol).to_dict()
        rep["painless"] = painless_report(fb, tight_tol=tol).to_dict()
    return rep


def cmd_analyze(args) -> int:
    cfg = _config(args)
    fb, red = _reduce(cfg, args)
    rep = analyze_report(fb, red, dense=not args.no_dense, tol=args.tol)
    text = dumps_json(rep) + "\n"
    if cfg.output:
        cfg.output.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.aliasing_csv:
        write_csv(args.aliasing_csv, ALIASING_COLUMNS, aliasing_terms(fb).to_rows())
    return {"frame": EXIT_OK, "not_frame": EXIT_NOT_FRAME,
            "inconclusive": EXIT_INCONCLUSIVE}[rep["status"]]


# tighten ---------------------------------------------------------------------

def cmd_tighten(args) -> int:
    if args.input is None and args.M is None:
        # the optimization protocol's default configuration
        args.M, args.LK, args.d = 16, 8, 2
    cfg = _config(args)
    fb = _base_filterbank(cfg)
    if args.objective.lower() == "fir":
        out, traj = fir_tighten(fb, args.max_steps, args.target, seed=args.seed)
    else:
        opt = OptimizerConfig(args.objective, args.lr, args.iters, args.adaptive, args.seed,
                              exponent=args.exponent, step_rule=args.step_rule,
                              parseval_weight=args.parseval_weight)
        out, traj = sgd_tighten(fb, opt)
    path = cfg.output or Path("trajectory.csv")
    write_csv(path, TRAJECTORY_COLUMNS, traj.to_rows())
    if args.fb_out:
        save_filterbank(out, args.fb_out)
    last = traj.condition[-1]
    print(f"status={traj.status} iterations={len(traj) - 1} condition={last:.17g}")
    return EXIT_OK if np.isfinite(last) else EXIT_NOT_FRAME


# stats -----------------------------------------------------------------------

def cmd_stats(args) -> int:
    d = args.d
    sigma2 = args.sigma2 if args.sigma2 is not None else d / (args.M * args.LK)
    spec = RandomKernelSpec(args.M, args.LK, d, args.L, variance=sigma2)
    E = expected_aliasing(spec)
    V = variance_aliasing(spec)
    emp = monte_carlo_moments(spec, args.draws, args.seed, n_jobs=worker_cap(args.jobs))
    rows = ((n, k, E[n, k].real, E[n, k].imag, V[n, k], emp.expected[n, k].real,
             emp.expected[n, k].imag, emp.variance[n, k], emp.se_mean[n, k])
            for n in range(d) for k in range(spec.signal_length))
    write_csv(args.out or "moments.csv", STATS_COLUMNS, rows)
    return EXIT_OK


# bench -----------------------------------------------------------------------

def bench_rows(M, LK, d, repeats=10, seed=0, objectives=("LS", "LG", "LGhat")):
    """Mean and std of one gradient evaluation per objective, single-threaded."""
    from threadpoolctl import threadpool_limits

    fb = Filterbank.create(random_kernels(M, LK, seed), d)
    stats = {}
    with threadpool_limits(limits=1):
        for name in objectives:
            kind = ObjectiveKind.parse(name)
            evaluate(kind, fb)  # warm-up
            ts = []
            for _ in range(repeats):
                t0 = time.perf_counter_ns()
                evaluate(kind, fb)
                ts.append(time.perf_counter_ns() - t0)
            stats[kind.value] = (float(np.mean(ts)), float(np.std(ts)))
    ref = stats.get("LS", (float("nan"),))[0]
    return [(k, M, LK, d, m, s, ref / m) for k, (m, s) in stats.items()]


def cmd_bench(args) -> int:
    objs = tuple(s.strip() for s in args.objectives.split(","))
    rows = bench_rows(args.M, args.LK, args.d, args.repeats, args.seed, objs)
    write_csv(args.out or "bench.csv", BENCH_COLUMNS, rows)
    return EXIT_OK


# parser ----------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the malformed-input code instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _add_generator(p):
    p.add_argument("--input", help="filterbank JSON file")
    p.add_argument("--M", type=int, help="number of random filters")
    p.add_argument("--LK", type=int, help="kernel size")
    p.add_argument("--d", type=int, help="stride")
    p.add_argument("--L", type=int, help="signal length (default: minimal)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variance", type=float, help="kernel variance (default 1/(L_K M))")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="framealias", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="frame bounds, tightness and painless check")
    _add_generator(p)
    p.add_argument("--complex", action="store_true", help="complex Gaussian generator")
    p.add_argument("--multichannel", type=int, metavar="C",
                   help="split the M kernels into C input channels of M/C filters and interlace")
    p.add_argument("--strides", help="comma-separated channel strides (non-uniform)")
    p.add_argument("--dilation", type=int, metavar="A")
    p.add_argument("--no-dense", action="store_true", help="skip dense eigenvalues")
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--aliasing-csv", help="also write G_n[k] rows")
    p.add_argument("--out", help="report path (default: stdout)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("tighten", help="gradient or FIR tightening")
    _add_generator(p)
    p.add_argument("--objective", default="LS", help="LS, LG, LGhat or fir")
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--iters", type=int, default=250)
    p.add_argument("--adaptive", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--exponent", type=float, default=0.1)
    p.add_argument("--step-rule", choices=("scaled", "polyak"), default="scaled")
    p.add_argument("--parseval-weight", type=float, default=1.0)
    p.add_argument("--max-steps", type=int, default=20)
    p.add_argument("--target", type=float, default=1.01)
    p.add_argument("--out", help="trajectory CSV (default trajectory.csv)")
    p.add_argument("--fb-out", help="final filterbank JSON")
    p.set_defaults(func=cmd_tighten)

    p = sub.add_parser("stats", help="closed-form vs Monte-Carlo aliasing moments")
    p.add_argument("--M", type=int, default=40)
    p.add_argument("--LK", type=int, default=16)
    p.add_argument("--d", type=int, default=4)
    p.add_argument("--L", type=int, default=400)
    p.add_argument("--sigma2", type=float, help="kernel variance (default d/(M L_K))")
    p.add_argument("--draws", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, help="worker processes (capped by FRAMEALIAS_THREADS)")
    p.add_argument("--out", help="CSV path (default moments.csv)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("bench", help="time one gradient evaluation per objective")
    p.add_argument("--M", type=int, default=256)
    p.add_argument("--LK", type=int, default=64)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--objectives", default="LS,LG,LGhat")
    p.add_argument("--out", help="CSV path (default bench.csv)")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FrameAliasError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"framealias {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
