"""
Command-line front end.

Subcommands: ``eval``, ``ccsc``, ``optimize``, ``sweep``, ``ergodic`` and
``ia-precoder``. Exit status is 0 on success, 2 for usage or parse errors
and 3 when a numerical capacity limit is hit (enumeration cap, singular
channel, failed precoder search).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import SingularChannelError, ia_precoders_3user, random_precoders
from .ccsc import CcscSearchError, ccsc_check, saturation_limit
from .fixtures import random_channels
from .infotheory import rate_report, sum_rate_mc
from .io import dumps_scenario, load_scenario
from .model import CapacityError, Scenario, ScenarioError, make_constellation
from .optimizer import OptimizeParams, optimize_sum_rate

CSV_VERSION = "finitegic-csv v1"

log = logging.getLogger("finitegic")


class UsageError(Exception):
    pass


def fmt(x) -> str:
    return f"{float(x):.6g}"


def write_csv(kind: str, header, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION} {kind} columns={','.join(header)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([c if isinstance(c, str) else fmt(c) for c in r])
    return buf.getvalue()


def emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def parse_grid(text: str) -> list:
    """``start:step:stop`` (inclusive) or a comma-separated list of dB values."""
    text = text.strip()
    if not text:
        raise UsageError("power grid is empty")
    try:
        if ":" in text:
            a, s, b = (float(x) for x in text.split(":"))
            if s <= 0:
                raise UsageError("grid step must be positive")
            n = int(np.floor((b - a) / s + 1e-9)) + 1
            grid = [round(a + k * s, 10) for k in range(max(n, 0))]
        else:
            grid = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse power grid {text!r}") from None
    if not grid:
        raise UsageError("power grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise UsageError("power grid must be strictly increasing")
    return grid


def _load(args) -> Scenario:
    scn = load_scenario(args.scenario)
    if getattr(args, "power_db", None) is not None:
        scn = scn.with_power(args.power_db)
    return scn


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------
def cmd_eval(args) -> int:
    scn = _load(args)
    rep = rate_report(scn, args.method, args.samples, args.seed, args.workers)
    if args.format == "json":
        emit(json.dumps(rep.to_dict(), indent=2) + "\n", args.output)
    else:
        rows = []
        for i, r in enumerate(rep.per_user):
            rows.append([str(i + 1), r,
                         rep.joint[i] if rep.joint else float("nan"),
                         rep.conditional[i] if rep.conditional else float("nan"),
                         rep.standard_error[i] if rep.standard_error else float("nan")])
        emit(write_csv(f"eval method={rep.method} power_db={fmt(rep.power_db)}",
                       ["user", "rate", "joint", "conditional", "stderr"], rows), args.output)
    return 0


def cmd_ccsc(args) -> int:
    scn = _load(args)
    if args.tol >= 1.0:
        print(f"warning: tolerance {args.tol:g} is not small; every difference will count as zero",
              file=sys.stderr)
    users = []
    for i in range(scn.K):
        chk = ccsc_check(scn, i, args.tol)
        sat = saturation_limit(scn, i, args.tol)
        users.append({"ccsc": chk.to_dict(), "saturation": sat.to_dict()})
    out = {"all_optimal": all(u["ccsc"]["optimal"] for u in users),
           "limits_bits": [u["saturation"]["limit_bits"] for u in users], "users": users}
    emit(json.dumps(out, indent=2) + "\n", args.output)
    return 0


def _initial_precoders(scn: Scenario, args):
    if args.init == "ia":
        return ia_precoders_3user(scn.channels)
    if args.init == "random":
        return random_precoders(scn, args.seed)
    return list(scn.precoders)


def cmd_optimize(args) -> int:
    scn = _load(args)
    if args.init == "ia" and not (scn.K == 3 and set(scn.tx_antennas + scn.rx_antennas) == {2}
                                  and set(scn.streams) == {1}):
        raise UsageError("--init ia needs a 3-user 2x2 single-stream scenario")
    scn = scn.with_precoders(_initial_precoders(scn, args))
    params = OptimizeParams(alpha=args.alpha, beta=args.beta, epsilon=args.epsilon,
                            max_iterations=args.max_iter, samples=args.samples, seed=args.seed,
                            workers=args.workers)
    trace = optimize_sum_rate(scn, params)
    log.info("sum-rate %.4f -> %.4f (improvement %.4f, %s)", trace.initial_f, trace.final_f,
             trace.improvement, trace.termination)
    if args.trace_csv:
        Path(args.trace_csv).write_text(trace.to_csv())
    if args.precoders_out:
        Path(args.precoders_out).write_text(dumps_scenario(scn.with_precoders(trace.final_precoders)) + "\n")
    emit(trace.to_json() + "\n", args.output)
    return 0


def cmd_sweep(args) -> int:
    scn = _load(args)
    grid = parse_grid(args.grid)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not methods or any(m not in ("mc", "approx", "gaussian") for m in methods):
        raise UsageError(f"methods must be a subset of mc,approx,gaussian, got {args.methods!r}")
    header = ["power_db"] + [f"{m}_u{i + 1}" for m in methods for i in range(scn.K)]
    rows = []
    for p in grid:
        s = scn.with_power(p)
        row = [p]
        for m in methods:
            row += rate_report(s, m, args.samples, args.seed, args.workers).per_user
        rows.append(row)
    emit(write_csv(f"sweep samples={args.samples} seed={args.seed}", header, rows), args.output)
    return 0


def ergodic_draw(draw: int, seed: int, users: int, antennas: int, streams: int, grid, samples: int,
                 precoders, max_iter: int, alpha: float, beta: float, epsilon: float,
                 ia_select: str = "eigenvalue") -> dict:
    """Sum-rates of one channel draw at every grid point.

    Precoders are scored on ``eval_seed`` noise, which neither the optimizer
    nor the rate-based eigenvector selection ever sees.
    """
    ss = np.random.SeedSequence(seed, spawn_key=(draw,))
    chan_seed, opt_seed, eval_seed = (int(s.generate_state(1, np.uint64)[0] >> np.uint64(1))
                                      for s in ss.spawn(3))
    chans = random_channels(np.random.default_rng(chan_seed), users, antennas, antennas)
    base = Scenario(constellation=make_constellation("psk", 4), channels=chans,
                    streams=[streams] * users)
    out = {"ia": [], "optimized": []}
    for p in grid:
        at_p = base.with_power(p)
        s = at_p.with_precoders(ia_precoders_3user(chans, ia_select, at_p, samples, opt_seed))
        if "ia" in precoders:
            out["ia"].append(sum_rate_mc(s, samples, eval_seed))
        if "optimized" in precoders:
            tr = optimize_sum_rate(s, OptimizeParams(alpha=alpha, beta=beta, epsilon=epsilon,
                                                     max_iterations=max_iter, samples=samples,
                                                     seed=opt_seed))
            out["optimized"].append(sum_rate_mc(s.with_precoders(tr.final_precoders), samples, eval_seed))
    return out


def cmd_ergodic(args) -> int:
    if args.users != 3 or args.antennas != 2 or args.streams != 1:
        raise UsageError("ergodic runs support the 3-user 2x2 single-stream channel only")
    if args.draws < 1:
        raise UsageError("--draws must be >= 1")
    grid = parse_grid(args.power_db_grid)
    precs = list(dict.fromkeys(args.precoder))
    job = dict(seed=args.seed, users=args.users, antennas=args.antennas, streams=args.streams, grid=grid,
               samples=args.samples, precoders=precs, max_iter=args.max_iter, alpha=args.alpha,
               beta=args.beta, epsilon=args.epsilon, ia_select=args.ia_select)
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as ex:
            futures = [ex.submit(ergodic_draw, d, **job) for d in range(args.draws)]
            results = [f.result() for f in futures]
    else:
        results = []
        for d in range(args.draws):
            results.append(ergodic_draw(d, **job))
            log.info("draw %d/%d done", d + 1, args.draws)
    header = ["power_db"] + [f"sum_rate_{p}" for p in precs]
    if set(precs) == {"ia", "optimized"}:
        header.append("gap")
    rows = []
    for g, p in enumerate(grid):
        means = {k: float(np.mean([r[k][g] for r in results])) for k in precs}
        row = [p] + [means[k] for k in precs]
        if "gap" in header:
            row.append(means["optimized"] - means["ia"])
        rows.append(row)
    emit(write_csv(f"ergodic draws={args.draws} samples={args.samples} seed={args.seed} "
                   f"ia_select={args.ia_select}", header, rows),
         args.output)
    return 0


def cmd_ia_precoder(args) -> int:
    scn = _load(args)
    V = ia_precoders_3user(scn.channels, args.select, scn, args.samples, args.seed)
    emit(dumps_scenario(scn.with_precoders(V)) + "\n", args.output)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="finitegic", description=__doc__.splitlines()[1])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario=True, mc=True):
        if scenario:
            sp.add_argument("scenario", help="scenario JSON file")
            sp.add_argument("--power-db", type=float, help="override the file's power")
        if mc:
            sp.add_argument("--samples", type=int, default=2000, help="noise draws per joint symbol")
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("-o", "--output", help="write to this file instead of stdout")

    sp = sub.add_parser("eval", help="per-user rates")
    common(sp)
    sp.add_argument("--method", choices=["mc", "approx", "gaussian"], default="mc")
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("ccsc", help="CCSC optimality and saturation limits")
    common(sp, mc=False)
    sp.add_argument("--tol", type=float, default=1e-9, help="relative zero tolerance")
    sp.set_defaults(func=cmd_ccsc)

    def ascent(sp, max_iter):
        sp.add_argument("--alpha", type=float, default=0.05)
        sp.add_argument("--beta", type=float, default=0.4)
        sp.add_argument("--epsilon", type=float, default=0.01)
        sp.add_argument("--max-iter", type=int, default=max_iter)

    sp = sub.add_parser("optimize", help="gradient-ascent sum-rate optimization")
    common(sp)
    ascent(sp, 15)
    sp.add_argument("--init", choices=["ia", "random", "file"], default="file")
    sp.add_argument("--trace-csv", help="also write (n, f, t) rows here")
    sp.add_argument("--precoders-out", help="write the scenario with final precoders here")
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("sweep", help="rates over a power grid (CSV)")
    common(sp)
    sp.add_argument("--grid", required=True, help="start:step:stop in dB, or a comma list")
    sp.add_argument("--methods", default="mc,gaussian")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("ergodic", help="sum-rate averaged over random channels (CSV)")
    common(sp, scenario=False)
    sp.add_argument("--users", type=int, default=3)
    sp.add_argument("--antennas", type=int, default=2)
    sp.add_argument("--streams", type=int, default=1)
    sp.add_argument("--power-db-grid", default="-2,10")
    sp.add_argument("--draws", type=int, default=200)
    sp.add_argument("--precoder", nargs="+", choices=["ia", "optimized"], default=["ia", "optimized"])
    sp.add_argument("--ia-select", choices=["eigenvalue", "rate"], default="eigenvalue",
                    help="alignment eigenvector: larger eigenvalue magnitude, or larger sum-rate at each power")
    ascent(sp, 8)
    sp.set_defaults(func=cmd_ergodic, samples=1000)

    sp = sub.add_parser("ia-precoder", help="emit the scenario with interference-alignment precoders")
    common(sp)
    sp.add_argument("--select", choices=["eigenvalue", "rate"], default="eigenvalue")
    sp.set_defaults(func=cmd_ia_precoder, samples=500)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (SingularChannelError, CapacityError, CcscSearchError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (UsageError, ScenarioError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
