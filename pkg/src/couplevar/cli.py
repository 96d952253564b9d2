"""Command-line front end: denoise, edges, bench, synth, metrics.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 solver hit the
iteration cap (output is still written).  Every subcommand accepts
``--config FILE`` with ``key=value`` lines (keys are the long flag
names); explicit flags override config values.  The environment
variable ``COUPLEVAR_THREADS`` caps ``--channels-parallel`` workers.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from .edges import canny_strength, edge_map, hysteresis
from .energy import ModelParams
from .imaging import (
    FormatError,
    add_gaussian_noise,
    mse,
    psnr,
    read_image,
    synth_affine,
    write_fgrid,
    write_image,
)
from .solver_altmin import solve_altmin
from .solver_bregman import SolverConfig, solve

__all__ = ["main"]

_SENTINEL = object()


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


@dataclass(frozen=True)
class Opt:
    flag: str
    type: object  # float, int, str, or bool for on/off flags
    default: object
    help: str
    choices: tuple = ()
    dest: str = ""

    @property
    def name(self) -> str:
        return self.dest or self.flag.lstrip("-").replace("-", "_")


def _solver_opts():
    return [
        Opt("--order", int, 1, "regularisation order", choices=(1, 2)),
        Opt("--alpha", float, 10.0, "smoothness weight"),
        Opt("--beta", float, 5.0, "coupling weight"),
        Opt("--epsilon", float, 1e-6, "penaliser regularisation"),
        Opt("--lambda", float, None, "splitting weight (default order*beta)",
            dest="lam"),
        Opt("--tol", float, 1e-6, "relative residual tolerance"),
        Opt("--max-iter", int, 10000, "outer iteration cap"),
        Opt("--sweeps", int, 10, "Jacobi sweeps per subproblem"),
        Opt("--mode", str, "coupled", "solver variant",
            choices=("coupled", "tv", "quadratic", "altmin")),
        Opt("--seed", int, 0, "noise seed"),
        Opt("--noise-sigma", float, 0.0, "add Gaussian noise before solving"),
        Opt("--channels-parallel", bool, False,
            "advance color channels in parallel"),
    ]


_OPTIONS = {
    "denoise": _solver_opts()
    + [
        Opt("--input", str, None, "input PGM/PPM (required)"),
        Opt("--output", str, None, "output image path (required)"),
        Opt("--trace", str, None, "write convergence trace CSV"),
        Opt("--edges", str, None,
            "export the coupling-term edge map (.fgrid writes the strength "
            "map, anything else a hysteresis-binarised PGM)"),
        Opt("--gt", str, None, "ground truth image, prints MSE/PSNR"),
    ],
    "edges": _solver_opts()
    + [
        Opt("--input", str, None, "input PGM/PPM (required)"),
        Opt("--output", str, None, "binary edge PGM (required)"),
        Opt("--strength", str, None, "also write the strength map (FGRID)"),
        Opt("--detector", str, "coupling", "edge detector",
            choices=("coupling", "canny")),
        Opt("--sigma", float, 2.0, "Canny presmoothing std dev"),
        Opt("--hyst-low", float, 0.80, "hysteresis low threshold"),
        Opt("--hyst-high", float, 0.95, "hysteresis high threshold"),
        Opt("--hyst-absolute", bool, False,
            "treat thresholds as absolute values instead of quantiles"),
        Opt("--connectivity", int, 8, "edge linking connectivity",
            choices=(4, 8)),
    ],
    "bench": [
        Opt("--input", str, None, "input PGM/PPM (required)"),
        Opt("--order", int, 1, "regularisation order", choices=(1, 2)),
        Opt("--alpha", float, 10.0, "smoothness weight"),
        Opt("--beta", float, 5.0, "coupling weight"),
        Opt("--epsilon", float, 1e-6, "penaliser regularisation"),
        Opt("--lambda", float, None, "splitting weight (default order*beta)",
            dest="lam"),
        Opt("--tol", float, 1e-6, "relative residual tolerance"),
        Opt("--max-iter", int, 10000, "outer iteration cap"),
        Opt("--sweeps", int, 10, "Jacobi sweeps per subproblem"),
        Opt("--out", str, None,
            "CSV base path; writes <base>_bregman.csv and <base>_altmin.csv"),
    ],
    "synth": [
        Opt("--width", int, 256, "image width"),
        Opt("--height", int, 256, "image height"),
        Opt("--spec", str, "affine",
            "region spec: preset name, region string, or a file containing one"),
        Opt("--noise-sigma", float, 0.0, "Gaussian noise level"),
        Opt("--seed", int, 0, "noise seed"),
        Opt("--output", str, None, "output PGM path (required)"),
    ],
    "metrics": [
        Opt("--a", str, None, "first image (required)"),
        Opt("--b", str, None, "second image (required)"),
    ],
}

_REQUIRED = {
    "denoise": ("input", "output"),
    "edges": ("input", "output"),
    "bench": ("input", "out"),
    "synth": ("output",),
    "metrics": ("a", "b"),
}


def _build_parser():
    parser = _Parser(prog="couplevar",
                     description="Coupling-model denoising and edge detection")
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name, opts in _OPTIONS.items():
        p = sub.add_parser(name, prog=f"couplevar {name}")
        p.add_argument("--config", default=None,
                       help="key=value config file; flags override it")
        for o in opts:
            kwargs = {"dest": o.name, "default": _SENTINEL,
                      "help": f"{o.help} (default: {o.default})"}
            if o.type is bool:
                kwargs["action"] = "store_true"
            else:
                kwargs["type"] = o.type
                if o.choices:
                    kwargs["choices"] = o.choices
            p.add_argument(o.flag, **kwargs)
    return parser


def _read_config(path):
    values = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise _UsageError(f"{path}: bad config line {raw.strip()!r}")
            key, val = line.split("=", 1)
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _merge_config(args):
    opts = _OPTIONS[args.command]
    config = _read_config(args.config) if args.config else {}
    known = {o.name for o in opts}
    for key in config:
        if key not in known:
            raise _UsageError(f"unknown config key {key!r}")
    for o in opts:
        val = getattr(args, o.name)
        if val is not _SENTINEL:
            continue
        if o.name in config:
            raw = config[o.name]
            if o.type is bool:
                val = raw.lower() in ("1", "true", "yes", "on")
            else:
                val = o.type(raw)
                if o.choices and val not in o.choices:
                    raise _UsageError(
                        f"config {o.name}={raw} not in {o.choices}")
        else:
            val = o.default
        setattr(args, o.name, val)
    missing = [n for n in _REQUIRED[args.command] if getattr(args, n) is None]
    if missing:
        raise _UsageError(
            f"couplevar {args.command}: missing required "
            + ", ".join(f"--{n.replace('_', '-')}" for n in missing)
        )


def _load_input(args):
    f = read_image(args.input)
    if getattr(args, "noise_sigma", 0.0) > 0:
        f = add_gaussian_noise(f, args.noise_sigma, args.seed)
    return f


def _run_solver(f, args):
    params = ModelParams(args.order, args.alpha, args.beta, args.epsilon)
    workers = 1
    if args.channels_parallel and isinstance(f, np.ndarray) and f.ndim == 3:
        workers = f.shape[0]
    cfg = SolverConfig(
        params,
        lam=args.lam,
        tol=args.tol,
        max_iter=args.max_iter,
        sweeps=args.sweeps,
        mode="coupled" if args.mode == "altmin" else args.mode,
        channel_workers=workers,
    )
    solver = solve_altmin if args.mode == "altmin" else solve
    return solver(f, cfg)


def cmd_denoise(args) -> int:
    f = _load_input(args)
    res = _run_solver(f, args)
    write_image(res.u, args.output)
    if args.trace:
        res.trace.write_csv(args.trace)
    if args.edges:
        strength = edge_map(res.u, res.v)
        if str(args.edges).endswith(".fgrid"):
            write_fgrid(strength, args.edges)
        else:
            write_image(hysteresis(strength, 0.80, 0.95, 8, quantile=True),
                        args.edges)
    mse_txt = "na"
    gt = None
    if args.gt:
        gt = read_image(args.gt)
        mse_txt = f"{mse(res.u, gt):.17g}"
    print(f"converged={'true' if res.converged else 'false'} "
          f"iters={res.iterations} mse={mse_txt}")
    if gt is not None:
        print(f"psnr={psnr(res.u, gt):.6g}")
    return 0 if res.converged else 3


def cmd_edges(args) -> int:
    f = _load_input(args)
    code = 0
    if args.detector == "canny":
        if not (isinstance(f, np.ndarray) and f.ndim == 2):
            raise _UsageError("the canny detector expects a grayscale image")
        strength = canny_strength(f, args.sigma)
    else:
        res = _run_solver(f, args)
        strength = edge_map(res.u, res.v)
        code = 0 if res.converged else 3
    binary = hysteresis(strength, args.hyst_low, args.hyst_high,
                        args.connectivity, quantile=not args.hyst_absolute)
    write_image(binary, args.output)
    if args.strength:
        write_fgrid(strength, args.strength)
    print(f"edge_pixels={int(np.count_nonzero(binary))}")
    return code


def cmd_bench(args) -> int:
    f = read_image(args.input)
    params = ModelParams(args.order, args.alpha, args.beta, args.epsilon)
    cfg = SolverConfig(params, lam=args.lam, tol=args.tol,
                       max_iter=args.max_iter, sweeps=args.sweeps)
    res_bregman = solve(f, cfg)
    res_altmin = solve_altmin(f, cfg)
    base = args.out[:-4] if args.out.endswith(".csv") else args.out
    res_bregman.trace.write_csv(f"{base}_bregman.csv")
    res_altmin.trace.write_csv(f"{base}_altmin.csv")
    t_b = res_bregman.trace.time_to_reach(args.tol)
    t_a = res_altmin.trace.time_to_reach(args.tol)
    if t_b and t_a:
        print(f"speedup={t_a / t_b:.3g}")
    else:
        print("speedup=na")
    return 0 if (res_bregman.converged and res_altmin.converged) else 3


def cmd_synth(args) -> int:
    spec = args.spec
    try:
        with open(spec) as fh:  # a spec may live in a file
            spec = fh.read().strip()
    except OSError:
        pass
    img = synth_affine(args.width, args.height, spec)
    if args.noise_sigma > 0:
        img = add_gaussian_noise(img, args.noise_sigma, args.seed)
    write_image(img, args.output)
    return 0


def cmd_metrics(args) -> int:
    a = read_image(args.a)
    b = read_image(args.b)
    value = mse(a, b)
    peak = psnr(a, b)
    print(f"mse={value:.17g} psnr={'inf' if peak == float('inf') else f'{peak:.6g}'}")
    return 0


_COMMANDS = {
    "denoise": cmd_denoise,
    "edges": cmd_edges,
    "bench": cmd_bench,
    "synth": cmd_synth,
    "metrics": cmd_metrics,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        _merge_config(args)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
