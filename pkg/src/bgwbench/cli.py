"""Command-line runner: ``bgwbench {coeffs,identities,seminorm,bgw,sharpness}``.

Exit codes: 0 success, 1 a checked property failed, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import coeffs as C
from .config import ConfigError, load_config
from .parallel import resolve_workers
from .seminorms import as_grid, bmo_norm, holder_seminorm, sobolev_seminorm, weighted_sup_integral
from .verifier import (
    PreconditionError, check_bgw_bmo, check_bgw_sobolev, polynomial_annihilation_check,
    sharpness_sweep,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _fmt_frac(x: Fraction) -> str:
    return str(x)


def _fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def cmd_coeffs(args) -> int:
    if args.k < 0:
        print(f"error: k must be non-negative, got {args.k}", file=sys.stderr)
        return EXIT_USAGE
    c = C.solve_dyadic_system(args.k)
    if args.json:
        print(json.dumps(c.to_json()))
    else:
        print(f"a = [{', '.join(_fmt_frac(x) for x in c.a)}], a_comb = {_fmt_frac(c.a_combined)}")
    return EXIT_OK


def _rand_frac(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-50, 50), rng.randint(1, 20))


def run_identities(trials: int, seed: int, corrupt: bool = False) -> dict:
    """Random exact instances of the telescoping identity and its triangle bound."""
    rng = random.Random(seed)
    table = {k: C.solve_dyadic_system(k) for k in range(6)}
    if corrupt:
        for k, c in table.items():
            a = list(c.a)
            a[1] += Fraction(1, 1000)
            table[k] = C.DyadicCoefficients(k, tuple(a), c.a_combined)
    tele = tri = 0
    for _ in range(trials):
        k, m = rng.randint(0, 5), rng.randint(1, 8)
        b = _rand_frac(rng)
        seq = {l: _rand_frac(rng) for l in range(-m, k + m + 1)}
        lhs, rhs = C.telescoping_combine(table[k], b, seq, m)
        tele += lhs == rhs
        tri += C.triangle_bound(table[k], b, seq, m)[1]
    annihil = [(k, l) for k in range(6) for l in range(k + 1)]
    ann_ok = sum(polynomial_annihilation_check(k, l, table[k]) == 0 for k, l in annihil)
    return {"trials": trials, "telescoping": tele, "triangle": tri,
            "annihilation": ann_ok, "annihilation_total": len(annihil)}


def cmd_identities(args) -> int:
    if args.trials < 1:
        print("error: --trials must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    r = run_identities(args.trials, args.seed, args.corrupt)
    n = r["trials"]
    both = min(r["telescoping"], r["triangle"])
    print(f"telescoping: {r['telescoping']}/{n} pass")
    print(f"triangle:    {r['triangle']}/{n} pass")
    print(f"annihilation: {r['annihilation']}/{r['annihilation_total']} pass")
    print(f"{both}/{n} pass")
    ok = r["telescoping"] == n and r["triangle"] == n and r["annihilation"] == r["annihilation_total"]
    return EXIT_OK if ok else EXIT_FAIL


def _write_outputs(cfg, report_json: dict, csv_text: str | None, csv_name: str) -> None:
    if cfg.out_dir is None:
        return
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    (cfg.out_dir / "report.json").write_text(json.dumps(report_json, indent=2, sort_keys=True) + "\n")
    if csv_text is not None:
        (cfg.out_dir / csv_name).write_text(csv_text)


def cmd_seminorm(args) -> int:
    cfg = load_config(args.config, "seminorm")
    workers = resolve_workers(cfg.workers)
    reports = []
    for f in cfg.fields:
        g = as_grid(f, cfg.grid)
        if args.kind == "bmo":
            rep = bmo_norm(g)
        elif args.kind == "holder":
            if cfg.eta is None:
                raise ConfigError("params.eta is required for holder")
            rep = holder_seminorm(g, cfg.eta, workers=workers)
        elif args.kind == "sobolev":
            if cfg.s is None or cfg.p is None:
                raise ConfigError("params.s and params.p are required for sobolev")
            rep = sobolev_seminorm(g, cfg.s, cfg.p, workers=workers)
        else:
            if cfg.alpha is None:
                raise ConfigError("params.alpha is required for weighted_sup")
            rep = weighted_sup_integral(g, cfg.alpha, workers=workers)
        reports.append(rep.to_json())
    out = reports[0] if len(reports) == 1 else {"reports": reports}
    print(json.dumps(out, indent=2, sort_keys=True))
    rows = io.StringIO()
    w = csv.writer(rows, lineterminator="\n")
    w.writerow(["field", "kind", "value", "bias"])
    for i, r in enumerate(reports):
        w.writerow([i, r["kind"], _fmt_float(r["value"]), r["bias"]])
    _write_outputs(cfg, out, rows.getvalue(), "seminorm.csv")
    return EXIT_OK


BGW_COLUMNS = ["field", "theorem", "Linf", "core_norm", "K_alpha", "Holder", "log_arg", "m0",
               "ratio", "ratio_log2"]


def cmd_bgw(args) -> int:
    cfg = load_config(args.config, "bgw")
    workers = resolve_workers(cfg.workers)
    reports = []
    for f in cfg.fields:
        if cfg.mode == "bmo":
            reports.append(check_bgw_bmo(f, cfg.eta, cfg.alpha, grid=cfg.grid, workers=workers))
        else:
            reports.append(check_bgw_sobolev(f, cfg.s, cfg.p, cfg.eta, cfg.alpha, grid=cfg.grid, workers=workers))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BGW_COLUMNS)
    for i, r in enumerate(reports):
        row = {"field": i, **r.csv_row()}
        w.writerow([row[c] if c in ("field", "theorem", "m0") else _fmt_float(row[c]) for c in BGW_COLUMNS])
    out = [r.to_json() for r in reports]
    out = out[0] if len(out) == 1 else {"reports": out}
    _write_outputs(cfg, out, buf.getvalue(), "report.csv")
    sys.stdout.write(buf.getvalue())
    failures = []
    for i, r in enumerate(reports):
        for key, val in r.chain.items():
            if key.endswith(("_holds", "_exact")) and val is False:
                failures.append(f"field {i}: {key}")
    for msg in failures:
        print(f"FAIL {msg}")
    return EXIT_FAIL if failures else EXIT_OK


def cmd_sharpness(args) -> int:
    cfg = load_config(args.config, "sharpness")
    sweep = sharpness_sweep(cfg.deltas, n=cfg.n, s=cfg.s, p=cfg.p, eta=cfg.eta, alpha=cfg.alpha,
                            gamma_test=cfg.gamma_test, grid=cfg.grid, workers=resolve_workers(cfg.workers))
    text = sweep.to_csv()
    _write_outputs(cfg, sweep.to_json(), text, "sweep.csv")
    sys.stdout.write(text)
    for name, a in sweep.assertions.items():
        print(f"{'PASS' if a['holds'] else 'FAIL'} {name} ({_fmt_float(a['value'])})")
    return EXIT_OK if sweep.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bgwbench", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="print the exact dyadic coefficients of order k")
    p.add_argument("k", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("identities", help="random exact checks of the telescoping identity")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("seminorm", help="estimate one norm for the configured field(s)")
    p.add_argument("config")
    p.add_argument("--kind", choices=["bmo", "holder", "sobolev", "weighted_sup"], required=True)
    p.set_defaults(func=cmd_seminorm)

    p = sub.add_parser("bgw", help="evaluate an inequality and replay its proof chain")
    p.add_argument("config")
    p.set_defaults(func=cmd_bgw)

    p = sub.add_parser("sharpness", help="run the f_delta sharpness sweep")
    p.add_argument("config")
    p.set_defaults(func=cmd_sharpness)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except (ConfigError, PreconditionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
