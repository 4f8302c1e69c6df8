"""``heavyset`` command line.

Every subcommand takes a rotation-number descriptor (``--theta``), writes to
stdout or ``--output``, and echoes its full configuration into the output so
a run can be reproduced from the artifact alone.

Exit codes: 0 success, 2 bad input, 3 digit budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .cf import CFError, ContinuedFraction, parse_theta
from .dimension import (PartialTrajectory, dim_estimate, estimate_c, pointwise_inequality_check,
                        target_ratio, theta_for_dimension)
from .heavy import (build_levels, cover_from_dict, cover_to_dict, isolated_points, membership,
                    odd_even_criterion, strictly_heavy)
from .numbers import fraction_to_decimal
from .oracle import (birkhoff, heavy_up_to, verify_always_infinite, verify_levels,
                     verify_renormalization, verify_reversal)
from .renorm import trajectory, trajectory_csv

EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 2, 3


class InputError(Exception):
    pass


def _theta(text: str) -> ContinuedFraction:
    try:
        return parse_theta(text)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"not a rational number: {text!r}") from None


def _config(args) -> dict:
    skip = {"func"}
    cfg = {"program": f"heavyset {__version__}"}
    cfg.update({k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None})
    return cfg


def _dump(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _dec(x: Fraction, digits: int = 30, up: bool = False) -> str:
    return fraction_to_decimal(x, digits, up)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_cf(args, cfg):
    cf = _theta(args.theta)
    k = cf.available(args.digits)
    doc = {"config": cfg, "theta": cf.describe(), "digits": cf.digits(k)}
    if k < args.digits:
        doc["truncated"] = f"only {k} digits available"
    if k:
        b = cf.bounds(k)
        doc["bounds"] = {"lo": _dec(b.lo), "hi": _dec(b.hi, up=True)}
        doc["convergents"] = [f"{p}/{q}" for p, q in cf.convergents(k)[1:]]
    return _dump(doc)


def cmd_renorm(args, cfg):
    cf = _theta(args.theta)
    traj = trajectory(cf, args.depth, args.bits)
    if args.format == "csv":
        return trajectory_csv(traj, header=cfg)
    doc = {"config": cfg, "theta": cf.describe(), "partial": traj.partial,
           "steps": [{"i": s.index, "a1": s.a1, "a2": s.a2, "branch": s.branch.value, "p": s.p,
                      "f2": s.f2} for s in traj.steps]}
    if traj.exhausted:
        doc["exhausted"] = traj.exhausted
    return _dump(doc)


def cmd_heavy(args, cfg):
    cf = _theta(args.theta)
    cover = build_levels(cf, args.depth, args.bits)
    iso = isolated_points(cf, args.depth, cover=cover, bits=args.bits)
    if args.format == "csv":
        lines = [f"# {k}={v}" for k, v in cfg.items()]
        lines.append("level,index,lo,hi")
        for lvl in cover.levels:
            for j, iv in enumerate(lvl.intervals):
                e = iv.enclosure(args.bits)
                lines.append(f"{lvl.depth},{j},{_dec(e.lo)},{_dec(e.hi, up=True)}")
        for p in iso:
            lines.append(f"isolated,{p.birth},{_dec(p.value.lo)},{_dec(p.value.hi, up=True)}")
        out = "\n".join(lines) + "\n"
    else:
        doc = cover_to_dict(cf, cover, iso, args.bits, cfg)
        doc["criterion"] = str(odd_even_criterion(cf, cf.available(2 * args.depth + 1) // 2))
        if args.member is not None:
            doc["membership"] = str(membership(cover.levels, iso, _frac(args.member)))
        out = _dump(doc)
    if cover.partial:
        sys.stderr.write(f"warning: {cover.traj.exhausted}\n")
    return out


def cmd_strict(args, cfg):
    cf = _theta(args.theta)
    res = strictly_heavy(cf, _frac(args.tol))
    doc = {"config": cfg, "theta": cf.describe(),
           "enclosure": {"lo": _dec(res.enclosure.lo), "hi": _dec(res.enclosure.hi, up=True),
                         "lo_exact": str(res.enclosure.lo), "hi_exact": str(res.enclosure.hi)},
           "width": _dec(res.width, 6, True), "steps": res.depth, "partial": res.partial,
           "contains_zero": res.enclosure.lo <= 0}
    return _dump(doc)


def cmd_dim(args, cfg):
    cf = _theta(args.theta)
    est = dim_estimate(cf, args.depth, force=args.force)
    if args.format == "csv":
        return est.to_csv(cfg)
    return _dump({"config": cfg, **est.to_dict()})


def cmd_cconst(args, cfg):
    est = estimate_c(args.samples, args.burnin, args.length, args.bits, args.seed)
    doc = {"config": cfg, "estimate": json.loads(est.to_json()),
           "interval": list(est.interval)}
    if args.check_inequality:
        rep = pointwise_inequality_check(args.check_inequality, args.seed)
        doc["pointwise_inequality"] = {"checked": rep.checked, "passed": rep.passed,
                                       "failures": rep.failures}
    return _dump(doc)


def cmd_target_d(args, cfg):
    cf = theta_for_dimension(args.d)
    doc = {"config": cfg, "theta": cf.describe(), "digits": cf.digits(args.digits)}
    if Fraction(args.d) > 0:
        doc["ratio_at_i"] = {str(i): target_ratio(args.d, i) for i in args.ratio_at}
    if args.depth:
        est = dim_estimate(cf, args.depth)
        doc["lower"] = est.lower_sequence[-1]
        doc["ratio"] = est.ratio
        doc["upper"] = est.upper_sequence[-1]
    return _dump(doc)


def cmd_oracle(args, cfg):
    if args.check == "verify-levels" and args.cover:
        with open(args.cover, encoding="utf-8") as fh:
            saved = json.load(fh)
        desc, levels, iso = cover_from_dict(saved)
        cf = _theta(args.theta or desc)
        depth = args.depth if args.depth is not None else saved["depth"]
        rep = verify_levels(cf, depth, args.horizon, args.per_interval, args.seed, levels, iso)
        return _dump({"config": cfg, "report": rep.to_dict()})
    if args.theta is None:
        raise InputError("--theta is required")
    cf = _theta(args.theta)
    N = args.horizon
    if args.check == "sums":
        x = _frac(args.x)
        s = birkhoff(x, cf, N or 1000)
        return _dump({"config": cfg, "x": str(x), "sums": s.sums.tolist(), "min_prefix": s.min_prefix})
    if args.check == "heavy":
        x = _frac(args.x)
        v = heavy_up_to(x, cf, N or 10_000)
        return _dump({"config": cfg, "x": str(x), "heavy": v.heavy, "first_failure": v.first_failure})
    if args.check == "verify-renorm":
        rep = verify_renormalization(cf, args.samples, N or 1000)
    elif args.check == "verify-levels":
        rep = verify_levels(cf, args.depth if args.depth is not None else 4, N, args.per_interval,
                            args.seed)
    elif args.check == "verify-reversal":
        rep = verify_reversal(cf, N or 1000, args.samples)
    else:
        rep = verify_always_infinite(cf, args.count, N or 10_000)
    return _dump({"config": cfg, "report": rep.to_dict()})


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="heavyset", allow_abbrev=False,
                                description="Heavy sets of circle rotations.")
    p.add_argument("--version", action="version", version=f"heavyset {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_, allow_abbrev=False)
        sp.add_argument("--output", "-o")
        sp.set_defaults(func=func)
        return sp

    sp = add("cf", cmd_cf, "digits and convergent bounds")
    sp.add_argument("--theta", required=True)
    sp.add_argument("--digits", type=int, default=20)

    sp = add("renorm", cmd_renorm, "trajectory of the renormalization map")
    sp.add_argument("--theta", required=True)
    sp.add_argument("--depth", type=int, default=20)
    sp.add_argument("--bits", type=int, default=128)
    sp.add_argument("--format", choices=["csv", "json"], default="csv")

    sp = add("heavy", cmd_heavy, "cover of the heavy set")
    sp.add_argument("--theta", required=True)
    sp.add_argument("--depth", type=int, default=4)
    sp.add_argument("--bits", type=int, default=128)
    sp.add_argument("--member", help="classify this rational point")
    sp.add_argument("--format", choices=["json", "csv"], default="json")

    sp = add("strict", cmd_strict, "enclosure of the strictly heavy point")
    sp.add_argument("--theta", required=True)
    sp.add_argument("--tol", default="1e-9")

    sp = add("dim", cmd_dim, "truncated dimension ratios with certified bounds")
    sp.add_argument("--theta", required=True)
    sp.add_argument("--depth", type=int, default=200)
    sp.add_argument("--force", action="store_true", help="accept a truncated trajectory")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")

    sp = add("cconst", cmd_cconst, "Monte Carlo estimate of the almost-sure dimension")
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--burnin", type=int, default=50)
    sp.add_argument("--length", type=int, default=300)
    sp.add_argument("--bits", type=int, default=4096)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--check-inequality", type=int, default=0, metavar="SAMPLES")

    sp = add("target-d", cmd_target_d, "rotation number with prescribed dimension")
    sp.add_argument("--d", required=True)
    sp.add_argument("--digits", type=int, default=10)
    sp.add_argument("--depth", type=int, default=0)
    sp.add_argument("--ratio-at", type=int, nargs="*", default=[50])

    sp = add("oracle", cmd_oracle, "brute-force Birkhoff sums and verifications")
    sp.add_argument("check", choices=["sums", "heavy", "verify-renorm", "verify-levels",
                                      "verify-reversal", "always-infinite"])
    sp.add_argument("--theta")
    sp.add_argument("--x", default="0")
    sp.add_argument("--horizon", "-N", type=int)
    sp.add_argument("--depth", type=int)
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--per-interval", type=int, default=10)
    sp.add_argument("--count", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--cover", help="JSON written by `heavyset heavy`")
    return p


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = _config(args)
    try:
        text = args.func(args, cfg)
    except InputError as exc:
        sys.stderr.write(f"heavyset: error: {exc}\n")
        return EXIT_INPUT
    except (PartialTrajectory, CFError) as exc:
        sys.stderr.write(f"heavyset: budget exhausted: {exc}\n")
        return EXIT_BUDGET
    except (ValueError, OSError, KeyError) as exc:
        sys.stderr.write(f"heavyset: error: {exc}\n")
        return EXIT_INPUT
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())
