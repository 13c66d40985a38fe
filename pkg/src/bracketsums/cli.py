"""Command-line experiment harness with CSV and JSON output."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import _accel
from .arcs import ArcConfig, arcs_disjoint, classify_grid, enumerate_centers
from .equidist_heis import orbit_identity_defect
from .ergodic import Signal, osc_ratio_experiment
from .errors import BracketSumsError
from .experiments import (
    GOLDEN,
    equidist_sweep,
    major_sweep,
    minor_scan,
    perturbed_sweep,
)
from .expsum import PhaseSpec, exp_sum_prefix
from .qfield import make_context, parse_k

CHAIN_TOL = 1e-12


@dataclass(frozen=True)
class RunConfig:
    k1: int
    k2: int
    gamma: float
    gamma_prime: float
    lam: float
    precision_bits: int
    seed: int
    format: str
    out: str | None

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        k1, k2 = parse_k(args.k)
        cfg = cls(k1, k2, args.gamma, args.gamma_prime, args.lam, args.precision_bits, args.seed,
                  args.format, args.out)
        cfg.context()
        cfg.arc_config()
        return cfg

    def context(self):
        return make_context(self.k1, self.k2, self.precision_bits)

    def arc_config(self) -> ArcConfig:
        return ArcConfig(self.gamma, self.gamma_prime, self.lam)


@dataclass
class Report:
    command: str
    config: RunConfig
    columns: list[str]
    rows: list[dict]
    meta: dict
    ok: bool

    def record(self) -> dict:
        return {"command": self.command, "config": asdict(self.config), "meta": self.meta,
                "ok": self.ok, "columns": self.columns, "rows": self.rows}


def _clean(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def render(report: Report) -> str:
    rec = _clean(report.record())
    if report.config.format == "json":
        return json.dumps(rec, indent=1, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# command: {report.command}\n")
    buf.write(f"# config: {json.dumps(rec['config'], sort_keys=True)}\n")
    for key in sorted(rec["meta"]):
        buf.write(f"# {key}: {json.dumps(rec['meta'][key], sort_keys=True)}\n")
    buf.write(f"# ok: {json.dumps(report.ok)}\n")
    w = csv.DictWriter(buf, fieldnames=report.columns, lineterminator="\n")
    w.writeheader()
    for row in rec["rows"]:
        w.writerow({c: (repr(row[c]) if isinstance(row[c], float) else row[c]) for c in report.columns})
    return buf.getvalue()


def _n_grid(args) -> list[int]:
    lo, hi, steps = args.n_min, args.n_max, args.n_steps
    if steps <= 1 or lo == hi:
        return [hi]
    vals = np.geomspace(lo, hi, steps)
    return sorted({int(round(v)) for v in vals})


def cmd_sum(args, rc: RunConfig) -> Report:
    ctx = rc.context()
    Ns = _n_grid(args)
    xis = args.xi or [0.0]
    rows, ok = [], True
    for xi in xis:
        for r in exp_sum_prefix(Ns, PhaseSpec.from_real(xi), ctx):
            v = r.value
            rows.append({"N": r.n_terms, "xi": xi, "re": v.real, "im": v.imag, "abs": abs(v),
                         "est_phase_error": r.est_phase_error})
            ok &= abs(v) <= 1 + 1e-12
            if xi == 0.0:
                ok &= v == 1.0
    return Report("sum", rc, ["N", "xi", "re", "im", "abs", "est_phase_error"], rows, {}, ok)


def cmd_arcs(args, rc: RunConfig) -> Report:
    ctx, cfg = rc.context(), rc.arc_config()
    N = float(args.n_max)
    centers = enumerate_centers(N, cfg, ctx)
    xis = -0.5 + (np.arange(args.grid) + GOLDEN) / args.grid
    kind, _, _, _ = classify_grid(xis, N, cfg, ctx)
    counts = np.bincount(kind, minlength=3)
    disjoint = arcs_disjoint(N, cfg, ctx)
    rows = [{"quantity": q, "value": v} for q, v in [
        ("N", N), ("box", cfg.box(N)), ("centers", len(centers)),
        ("major_width", cfg.major_width(N)), ("wide_width", cfg.wide_width(N)),
        ("grid", args.grid), ("major", int(counts[0])), ("minor2", int(counts[1])),
        ("minor1", int(counts[2])), ("disjoint", int(disjoint)),
    ]]
    ok = int(counts.sum()) == args.grid and disjoint
    return Report("arcs", rc, ["quantity", "value"], rows, {}, ok)


def cmd_majtest(args, rc: RunConfig) -> Report:
    ctx = rc.context()
    js = range(args.j_min, args.j_max + 1)
    if args.t:
        Ns = [1 << j for j in js]
        centers = [(a, b, q) for q in range(1, args.q_max + 1) for b in range(0, args.b_max + 1)
                   for a in range(q) if math.gcd(math.gcd(a, b), q) == 1]
        rows = perturbed_sweep(ctx, centers, args.t, Ns)
        cols = list(rows[0].keys())
        ok = all(math.isfinite(r["error"]) for r in rows)
        return Report("majtest", rc, cols, rows, {"mode": "perturbed"}, ok)
    sweep = major_sweep(ctx, args.q_max, args.b_max, js)
    rows = list(sweep.rows)
    trivial = [r["error"] for r in rows if (r["a"], r["b"], r["q"]) == (0, 0, 1)]
    ok = sweep.fit.exponent < 0 and all(e <= 1e-12 for e in trivial)
    meta = {"mode": "t0", "fit": sweep.fit.as_dict(), "constant": sweep.constant,
            "constant_early": sweep.constant_early, "constant_late": sweep.constant_late}
    return Report("majtest", rc, ["a", "b", "q", "j", "error", "shape", "ratio"], rows, meta, ok)


def cmd_minscan(args, rc: RunConfig) -> Report:
    ctx, cfg = rc.context(), rc.arc_config()
    scan = minor_scan(ctx, cfg, args.samples, range(args.j_min, args.j_max + 1), rc.seed)
    rows = [{"j": j, "N": 1 << j, "sup": s, "running_sup": r}
            for j, s, r in zip(scan.js, scan.sup_by_j, scan.running)]
    ok = scan.fit.exponent > 0 and all(a >= b for a, b in zip(scan.running, scan.running[1:]))
    return Report("minscan", rc, ["j", "N", "sup", "running_sup"], rows, {"chi_fit": scan.fit.as_dict()}, ok)


def cmd_oscillation(args, rc: RunConfig) -> Report:
    ctx = rc.context()
    rng = np.random.default_rng(rc.seed)
    rows, ok = [], True
    for i in range(args.signals):
        f = Signal(0, rng.choice([-1.0, 1.0], size=args.window))
        st = osc_ratio_experiment(f, rc.lam, args.n_max, args.trials, rc.seed + i, ctx)
        rows.append({"signal": i, "max_osc_ratio": st.max_osc_ratio, "maximal_ratio": st.maximal_ratio,
                     "sup_average_ratio": st.sup_average_ratio, "full_block_ratio": st.full_block_ratio})
        ok &= all(math.isfinite(v) for v in (st.max_osc_ratio, st.maximal_ratio))
        ok &= st.sup_average_ratio <= 1 + CHAIN_TOL
        ok &= st.maximal_ratio <= st.sup_average_ratio + st.full_block_ratio + CHAIN_TOL
    meta = {"sup_osc_ratio": max(r["max_osc_ratio"] for r in rows),
            "sup_maximal_ratio": max(r["maximal_ratio"] for r in rows)}
    cols = ["signal", "max_osc_ratio", "maximal_ratio", "sup_average_ratio", "full_block_ratio"]
    return Report("oscillation", rc, cols, rows, meta, ok)


def cmd_equidist(args, rc: RunConfig) -> Report:
    ctx = rc.context()
    sweep = equidist_sweep(ctx, ((args.q, args.D),), range(args.j_min, args.j_max + 1))
    rows = list(sweep.rows)
    ok = all(r["total"] == 1 << r["j"] for r in rows)
    lo, hi = sweep.constants[f"{args.q},{args.D}"]
    meta = {"C_min": lo, "C_max": hi, "C_spread": hi / lo if lo > 0 else math.inf}
    return Report("equidist", rc, ["q", "D", "j", "max_deviation", "C", "total"], rows, meta, ok)


def cmd_heis(args, rc: RunConfig) -> Report:
    ctx = rc.context()
    rng = np.random.default_rng(rc.seed)
    rows = []
    for xi in rng.uniform(-0.5, 0.5, size=args.samples):
        rows.append({"xi": float(xi), "defect": orbit_identity_defect(float(xi), args.n_max, ctx)})
    ok = all(r["defect"] <= 1e-9 for r in rows)
    return Report("heis", rc, ["xi", "defect"], rows, {"N": args.n_max}, ok)


COMMANDS = {
    "sum": (cmd_sum, "mean of e(xi n floor(n sqrt k)) over N and xi grids", 1, 10 ** 6, 1),
    "arcs": (cmd_arcs, "centers, classification counts and arc widths", 1, 1 << 20, 1),
    "majtest": (cmd_majtest, "major-arc approximation error sweep", 1, 1 << 20, 1),
    "minscan": (cmd_minscan, "minor-arc decay scan", 1, 1 << 22, 1),
    "oscillation": (cmd_oscillation, "oscillation ratios of averages along lacunary scales", 1, 1 << 20, 1),
    "equidist": (cmd_equidist, "cell-count equidistribution sweep", 1, 1 << 20, 1),
    "heis": (cmd_heis, "Heisenberg orbit identity defects", 1, 10 ** 4, 1),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--k", default="2", help="k as an integer or a fraction such as 5/3")
    common.add_argument("--gamma", type=float, default=1 / 20)
    common.add_argument("--gamma-prime", type=float, default=1 / 20)
    common.add_argument("--lambda", dest="lam", type=float, default=2.0)
    common.add_argument("--precision-bits", type=int, default=192)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--out", default=None, help="output path, stdout when omitted")
    common.add_argument("--workers", type=int, default=None, help="numba thread count")

    parser = argparse.ArgumentParser(prog="bracketsums", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text, n_min, n_max, n_steps) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--n-min", type=int, default=n_min)
        p.add_argument("--n-max", type=int, default=n_max)
        p.add_argument("--n-steps", type=int, default=n_steps)
        p.add_argument("--xi", type=float, nargs="+", default=None)
        if name == "arcs":
            p.add_argument("--grid", type=int, default=10 ** 5)
        if name in ("majtest", "minscan", "equidist"):
            p.add_argument("--j-min", type=int, default=10)
            p.add_argument("--j-max", type=int, default={"majtest": 20, "minscan": 22, "equidist": 22}[name])
        if name == "majtest":
            p.add_argument("--q-max", type=int, default=4)
            p.add_argument("--b-max", type=int, default=4)
            p.add_argument("--t", type=float, nargs="+", default=None, help="offsets for the perturbed sweep")
        if name == "minscan":
            p.add_argument("--samples", type=int, default=200)
        if name == "oscillation":
            p.add_argument("--window", type=int, default=1 << 8)
            p.add_argument("--trials", type=int, default=100)
            p.add_argument("--signals", type=int, default=10)
            p.set_defaults(n_max=12)
        if name == "equidist":
            p.add_argument("--q", type=int, default=2)
            p.add_argument("--D", type=int, default=4)
        if name == "heis":
            p.add_argument("--samples", type=int, default=20)
    return parser


def run(argv=None) -> tuple[int, str, RunConfig]:
    args = build_parser().parse_args(argv)
    rc = RunConfig.from_args(args)
    if args.workers is not None:
        _accel.set_workers(args.workers)
    report = COMMANDS[args.command][0](args, rc)
    text = render(report)
    if rc.out:
        with open(rc.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return (0 if report.ok else 1), text, rc


def main(argv=None) -> int:
    try:
        code, text, rc = run(argv)
    except (BracketSumsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not rc.out:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
