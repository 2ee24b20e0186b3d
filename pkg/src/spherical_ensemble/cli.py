"""Command-line entry point: ``spherical-ensemble <command> [flags]``.

Every command that writes ``--out`` also writes ``<out>.manifest.json``;
``spherical-ensemble replay <manifest>`` re-runs it.  Exit codes: 0 success,
1 numerical failure or failed checks, 2 usage or domain error.
"""

import argparse
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .dpp_sampler import SamplerConfig, sample
from .ensemble_kernel import make_params
from .riesz_energy import (
    bound_report,
    continuous_energy,
    cor1_coefficient,
    expected_energy_mc,
    harmonic_coefficient,
)
from .sphere_geometry import g_forward
from .verify import SUITES, run_suite


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    params: dict
    argv: list
    version: str = __version__
    timestamp: str = field(default_factory=lambda: time.strftime("%Y-%m-%dT%H:%M:%S%z"))


def _atomic_write(path, text):
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _header(meta, stamp):
    lines = [f"# {k}={v}" for k, v in meta.items()]
    lines.append(f"# version={__version__}")
    lines.append(f"# timestamp={stamp}")
    return "\n".join(lines) + "\n"


def _fmt(x):
    return format(float(x), ".17g")


def _emit(args, meta, body, params):
    manifest = RunManifest(args.command, params, list(args.argv))
    text = _header(meta, manifest.timestamp) + body
    if args.out:
        _atomic_write(args.out, text)
        _atomic_write(args.out + ".manifest.json", json.dumps(asdict(manifest), indent=2) + "\n")
    else:
        sys.stdout.write(text)


def _int_range(text, name):
    """``"a:b"`` (inclusive) or ``"a,b,c"`` to a list of ints."""
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            vals = list(range(lo, hi + 1))
        else:
            vals = [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"cannot parse {name} {text!r}") from exc
    if not vals:
        raise UsageError(f"{name} is empty")
    return vals


def cmd_sample(args):
    params = make_params(args.d, args.L)
    config = sample(SamplerConfig(params, args.seed), args.replicate)
    body = "".join(",".join(_fmt(x) for x in row) + "\n" for row in config.points)
    meta = {"d": params.d, "L": params.L, "N": params.N, "seed": args.seed, "replicate": args.replicate}
    _emit(args, meta, body, {"d": args.d, "L": args.L, "seed": args.seed, "replicate": args.replicate})
    return 0


def cmd_energy(args):
    if args.replicates < 2:
        raise UsageError("--replicates must be at least 2 for a standard error")
    params = make_params(args.d, args.L)
    if not 0 < args.s < 2 * params.d:
        raise UsageError(f"--s must lie in (0, {2 * params.d})")
    report = bound_report(params, args.s, args.tau)
    est = expected_energy_mc(SamplerConfig(params, args.seed), args.s, args.replicates)
    rows = {
        "mean": est.mean,
        "stderr": est.stderr,
        "n2_v_s": report.n2_v_s,
        "v_s": report.v_s,
        "th2_bound": report.th2_bound,
        "tau": report.tau,
        "C_opt": report.C_opt,
        "cor1_coefficient": report.cor1_coefficient,
        "harmonic_coefficient": report.harmonic_coefficient,
        "gap_ratio": (report.n2_v_s - est.mean) / params.N ** (1 + args.s / (2 * params.d)),
    }
    body = "key,value\n" + "".join(f"{k},{_fmt(v)}\n" for k, v in rows.items())
    meta = {"d": params.d, "L": params.L, "N": params.N, "s": args.s, "seed": args.seed, "replicates": args.replicates}
    _emit(args, meta, body, {"d": args.d, "L": args.L, "s": args.s, "tau": args.tau, "seed": args.seed, "replicates": args.replicates})
    return 0


def cmd_verify(args):
    checks = run_suite(args.suite, args.seed)
    lines = [c.line() for c in checks]
    failed = [c for c in checks if not c.passed]
    lines.append(f"summary {'PASS' if not failed else 'FAIL'} {len(checks) - len(failed)} {len(checks)}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        _emit(args, {"suite": args.suite, "seed": args.seed}, text, {"suite": args.suite, "seed": args.seed})
    return 1 if failed else 0


def g_ordering(t, d_list):
    """Fraction of grid points (t > 0) where g_d decreases with d across ``d_list``."""
    cols = np.array([g_forward(t, d) for d in sorted(d_list)])
    pos = t > 0
    if len(d_list) < 2 or not pos.any():
        return 1.0
    ordered = np.all(np.diff(cols[:, pos], axis=0) < 0, axis=0)
    return float(np.mean(ordered))


def cmd_plot_g(args):
    d_list = _int_range(args.d or "2:8", "--d")
    if min(d_list) < 1:
        raise UsageError("--d values must be >= 1")
    try:
        lo, hi, n = args.grid.split(":") if args.grid else ("0", "5", "501")
        t = np.linspace(float(lo), float(hi), int(n))
    except ValueError as exc:
        raise UsageError(f"cannot parse --grid {args.grid!r} (expected start:stop:count)") from exc
    if t.min() < 0:
        raise UsageError("t grid must be nonnegative")
    cols = [g_forward(t, d) for d in d_list]
    monotone = all(bool(np.all(np.diff(c) > 0)) for c in cols)
    frac = g_ordering(t, d_list)
    body = "t," + ",".join(f"g_{d}" for d in d_list) + "\n"
    body += "".join(_fmt(ti) + "," + ",".join(_fmt(c[i]) for c in cols) + "\n" for i, ti in enumerate(t))
    meta = {"d_list": ";".join(map(str, d_list)), "monotone": monotone, "decreasing_in_d_fraction": frac}
    _emit(args, meta, body, {"d": d_list, "grid": args.grid})
    print(f"monotone={monotone} decreasing_in_d_fraction={frac:.6g}", file=sys.stderr)
    return 0


def compare_bounds_rows(d, s, L_values):
    """Rows ``(N, harmonic bound, generalized-ensemble bound)`` on S^{2d}."""
    dim = 2 * d
    v = continuous_energy(s, dim)
    ch = harmonic_coefficient(dim, s)
    cg = cor1_coefficient(d, s)
    rows = []
    for L in L_values:
        n = make_params(d, L).N
        scale = n ** (1 + s / dim)
        rows.append((n, n * n * v - ch * scale, n * n * v - cg * scale))
    return rows


def cmd_compare_bounds(args):
    d = args.d if args.d is not None else 4
    s = args.s if args.s is not None else 6.0
    L_values = _int_range(args.grid or "1:12", "--grid")
    rows = compare_bounds_rows(int(d), s, L_values)
    harmonic_lower = all(h < g for _, h, g in rows)
    body = "N,harmonic_bound,generalized_bound\n" + "".join(f"{n},{_fmt(h)},{_fmt(g)}\n" for n, h, g in rows)
    meta = {"dim": 2 * int(d), "s": s, "harmonic_lower": harmonic_lower}
    _emit(args, meta, body, {"d": d, "s": s, "grid": args.grid})
    print(f"harmonic_lower={harmonic_lower}", file=sys.stderr)
    return 0


def cmd_replay(args):
    with open(args.manifest) as fh:
        manifest = json.load(fh)
    if manifest.get("version") != __version__:
        print(f"warning: manifest written by version {manifest.get('version')}", file=sys.stderr)
    return main(manifest["argv"])


def build_parser():
    parser = argparse.ArgumentParser(prog="spherical-ensemble", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--seed", type=int, default=0)
        if out:
            p.add_argument("--out", default=None, help="output CSV path (stdout if omitted)")

    p = sub.add_parser("sample", help="draw one configuration")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--replicate", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("energy", help="Monte-Carlo expected Riesz energy with closed-form bounds")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--tau", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("verify", help="run self-check suites")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot-g", help="CSV of g_d(t) columns")
    p.add_argument("--d", default=None, help="list such as 2:8 or 1,2,5 (default 2:8)")
    p.add_argument("--grid", default=None, help="t grid start:stop:count (default 0:5:501)")
    common(p)
    p.set_defaults(func=cmd_plot_g)

    p = sub.add_parser("compare-bounds", help="harmonic vs generalized-ensemble energy bounds")
    p.add_argument("--d", type=int, default=None, help="half the sphere dimension (default 4)")
    p.add_argument("--s", type=float, default=None, help="Riesz exponent (default 6)")
    p.add_argument("--grid", default=None, help="range of degrees L, e.g. 1:12 (default)")
    common(p)
    p.set_defaults(func=cmd_compare_bounds)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    try:
        return args.func(args)
    except (UsageError, ValueError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
