"""Command-line front end: ``marc compare | sweep | verify | gen-channels``.

Exit codes: 0 success, 1 usage error, 2 oracle violation, 3 I/O error.
The environment variable ``MARC_SEED`` replaces the default seed.
"""

import argparse
import json
import os
import sys

import numpy as np

from ._validation import check_power_budget
from .channel import derive_gains, load_channels, sample_rayleigh, save_channels
from .exceptions import MalformedFileError, MarcError
from .experiment import DEFAULT_SNR_DB, SweepConfig, run_sweep, write_csv
from .joint_relaying import joint_sum_rate
from .oracles import SUITES, dump_violation, run_suite
from .tdma_relaying import tdma_sum_rate

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, EXIT_IO = 0, 1, 2, 3
BUILTIN_SEED = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def default_seed():
    env = os.environ.get("MARC_SEED")
    if env is None:
        return BUILTIN_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"MARC_SEED must be an integer, got {env!r}") from None


def _ints(text, n=None, what="value"):
    try:
        vals = [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"malformed {what} {text!r}: expected comma-separated integers") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"malformed {what} {text!r}: expected {n} integers")
    return vals


def _floats(text, what):
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"malformed {what} {text!r}: expected comma-separated numbers") from None


def _relay_power(args):
    if args.relay_snr_db is not None:
        return 10.0 ** (args.relay_snr_db / 10.0)
    return args.relay_power


def _fmt(x):
    return f"{x:.12g}"


def cmd_compare(args):
    if args.channels is not None:
        c = load_channels(args.channels)
    else:
        K, M, M_r, seed = _ints(args.random, 4, "--random")
        c = sample_rayleigh(K, M, M_r, seed)
    p = check_power_budget(_floats(args.powers, "--powers"), _relay_power(args), c.K)
    j = joint_sum_rate(c, p)
    t = tdma_sum_rate(c, p)
    sum_alpha_p = float(np.sum(derive_gains(c).alpha1 * p.P))
    gain = 100.0 * (t.sum_rate / j.sum_rate - 1.0) if j.sum_rate > 0 else 0.0
    fields = [
        ("joint_rate", _fmt(j.sum_rate)),
        ("tdma_rate", _fmt(t.sum_rate)),
        ("gain_pct", _fmt(gain)),
        ("lambda_max_rtilde", _fmt(j.lambda_max_Rtilde)),
        ("sum_alpha_p", _fmt(sum_alpha_p)),
        ("tau_opt", ";".join(_fmt(x) for x in t.tau)),
    ]
    if args.format == "csv":
        print(",".join(k for k, _ in fields))
        print(",".join(v for _, v in fields))
    else:
        width = max(len(k) for k, _ in fields)
        for k, v in fields:
            print(f"{k:<{width}}  {v}")
    return EXIT_OK


def _sweep_config(args):
    kw = {}
    if args.config is not None:
        with open(args.config, encoding="utf-8") as f:
            try:
                kw = json.load(f)
            except json.JSONDecodeError as exc:
                raise UsageError(f"{args.config}: invalid JSON: {exc}") from None
        if not isinstance(kw, dict):
            raise UsageError(f"{args.config}: expected a JSON object")
    for key, val in (("K", args.K), ("M", args.M), ("M_r", args.Mr), ("P", args.P),
                     ("trials", args.trials), ("master_seed", args.seed)):
        if val is not None:
            kw[key] = val
    if args.snr_db is not None:
        kw["snr_points_db"] = _floats(args.snr_db, "--snr-db")
    kw.setdefault("master_seed", default_seed())
    kw.setdefault("M", 4)
    kw.setdefault("P", 10.0)
    kw.setdefault("snr_points_db", DEFAULT_SNR_DB)
    for key in ("M", "P"):
        if isinstance(kw[key], list) and len(kw[key]) == 1:
            kw[key] = kw[key][0]
    try:
        return SweepConfig(**kw)
    except TypeError as exc:
        raise UsageError(f"bad sweep configuration: {exc}") from None
    except ValueError as exc:
        raise UsageError(f"bad sweep configuration: {exc}") from None


def cmd_sweep(args):
    cfg = _sweep_config(args)
    result = run_sweep(cfg, workers=args.workers, dump_dir=args.dump_dir)
    write_csv(result, args.out)
    last = -1
    print(f"wrote {args.out}: {len(result.snr_db)} SNR points x {cfg.trials} trials"
          + (f"; at {result.snr_db[last]:g} dB joint={result.joint_mean[last]:.4f} "
             f"tdma={result.tdma_mean[last]:.4f} gain={result.gain_pct[last]:.2f}%"
             if len(result.snr_db) else ""))
    return EXIT_OK


def cmd_verify(args):
    seed = args.seed if args.seed is not None else default_seed()
    reports = run_suite(args.suite, args.trials, seed)
    code = EXIT_OK
    for r in reports:
        print(("PASS " if r.passed else "FAIL ") + r.summary())
        if "max_abs_gap" in r.info and r.name.endswith("witness"):
            print(f"  equality witness: |tdma - joint| = {r.info['max_abs_gap']:.3e}")
        if r.passed:
            continue
        code = EXIT_VIOLATION
        os.makedirs(args.dump_dir, exist_ok=True)
        for n, d in enumerate(r.details):
            c = d.get("channels")
            if c is None:
                print(f"  violation {n}: gap={d['gap']:.3e} (no channel instance)")
                continue
            path = os.path.join(args.dump_dir, f"violation_{r.name}_{n}.txt")
            dump_violation(c, path, f"{r.name} gap={d['gap']:.6e}")
            print(f"  violation {n}: gap={d['gap']:.3e} dumped to {path}")
    return code


def cmd_gen_channels(args):
    K, M, M_r = _ints(args.dims, 3, "dims")
    seed = args.seed if args.seed is not None else default_seed()
    save_channels(sample_rayleigh(K, M, M_r, seed), args.out,
                  [f"rayleigh K={K} M={M} Mr={M_r} seed={seed}"])
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="marc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    cp = sub.add_parser("compare", help="joint vs TDMA sum rate on one channel")
    src = cp.add_mutually_exclusive_group(required=True)
    src.add_argument("--channels", help="channel file")
    src.add_argument("--random", metavar="K,M,Mr,SEED", help="Rayleigh channel")
    cp.add_argument("--powers", default="10", help="user powers p1,...,pK or one shared value")
    rp = cp.add_mutually_exclusive_group()
    rp.add_argument("--relay-power", type=float, default=10.0, help="relay power (linear)")
    rp.add_argument("--relay-snr-db", type=float, help="relay SNR in dB")
    cp.add_argument("--format", choices=("text", "csv"), default="text")
    cp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("sweep", help="Monte-Carlo average over a relay-SNR sweep")
    sp.add_argument("--config", help="JSON file with SweepConfig fields")
    sp.add_argument("--K", type=int)
    sp.add_argument("--M", type=int, nargs="+", help="antennas per user")
    sp.add_argument("--Mr", type=int)
    sp.add_argument("--P", type=float, nargs="+", help="user powers")
    sp.add_argument("--snr-db", help="comma-separated relay SNR points in dB")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", default="sweep.csv")
    sp.add_argument("--dump-dir", help="save every trial's channel here")
    sp.set_defaults(func=cmd_sweep)

    vp = sub.add_parser("verify", help="run the randomized optimality checks")
    vp.add_argument("--suite", choices=SUITES + ("all",), default="all")
    vp.add_argument("--trials", type=int, default=1000)
    vp.add_argument("--seed", type=int)
    vp.add_argument("--dump-dir", default=".", help="where violating channels are written")
    vp.set_defaults(func=cmd_verify)

    gp = sub.add_parser("gen-channels", help="write a Rayleigh channel file")
    gp.add_argument("dims", metavar="K,M,Mr")
    gp.add_argument("--seed", type=int)
    gp.add_argument("--out", required=True)
    gp.set_defaults(func=cmd_gen_channels)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"marc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MalformedFileError, OSError) as exc:
        print(f"marc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (MarcError, ValueError) as exc:
        print(f"marc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
