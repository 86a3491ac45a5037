"""Command-line entry point.

Exit status: 0 on success or a verdict that holds, 2 when a verdict is
violated, 3 when it is inconclusive, 1 on input errors (including an
exceeded enumeration budget).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import entropy as ent
from .harness import (
    HOLDS,
    INCONCLUSIVE,
    VIOLATED,
    ApproximationFamily,
    hull_family,
    theorem1_experiment,
    theorem2_experiment,
)
from .hull import hull_entropy_rate, hull_table, markov_hull
from .io import MeasureFormatError, load_measure, measure_from_dict
from .measures import BUDGET_ENV, BudgetExceeded, random_markov
from .pitskel import counterexample_sweep
from .suspension import (
    TruncatedPartition,
    abramov_rate,
    build_suspension,
    factor_entropy_bracket,
    factor_process,
    q_schedule,
)

EXIT_OK, EXIT_INPUT, EXIT_VIOLATED, EXIT_INCONCLUSIVE = 0, 1, 2, 3
VERDICT_EXIT = {HOLDS: EXIT_OK, VIOLATED: EXIT_VIOLATED, INCONCLUSIVE: EXIT_INCONCLUSIVE}


class InputError(Exception):
    pass


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def _json(doc) -> str:
    return json.dumps(doc, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


# ---------------------------------------------------------------------------
# Config resolution
# ---------------------------------------------------------------------------

def _read_json(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise InputError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError(f"config {path} must be a JSON object")
    return doc


def _measure(ref, base_dir: Path, seeds: np.random.SeedSequence):
    """A measure from a file path, an inline document, or a random Markov spec."""
    if isinstance(ref, str):
        path = base_dir / ref
        if not path.exists():
            raise InputError(f"measure file not found: {path}")
        return load_measure(path)
    if isinstance(ref, dict) and ref.get("kind") == "random_markov":
        seed = ref.get("seed")
        if seed is None:
            seed = seeds.spawn(1)[0]
        return random_markov(int(ref["alphabet_size"]), int(ref["order"]), seed,
                             float(ref.get("concentration", 1.0)))
    if isinstance(ref, dict):
        return measure_from_dict(ref)
    raise InputError(f"cannot interpret measure reference {ref!r}")


def _load_measure_arg(path: str):
    if not Path(path).exists():
        raise InputError(f"measure file not found: {path}")
    return load_measure(path)


def _family(cfg: dict, target, base_dir: Path, seeds, budget):
    approx = cfg.get("approximants", "hulls")
    if approx == "hulls":
        orders = cfg.get("orders") or list(range(1, int(cfg.get("n_max", 6)) + 1))
        fam = hull_family(target, orders, cfg.get("eps"), budget)
        if "r" in cfg:
            fam.r = [int(r) for r in cfg["r"]]
        return fam, True
    if not isinstance(approx, list):
        raise InputError("approximants must be \"hulls\" or a list of measures")
    measures = [_measure(a, base_dir, seeds) for a in approx]
    try:
        r, eps = cfg["r"], cfg["eps"]
    except KeyError as exc:
        raise InputError(f"explicit approximants need an {exc.args[0]!r} schedule") from exc
    labels = cfg.get("labels") or list(range(1, len(measures) + 1))
    return ApproximationFamily(target, measures, [int(x) for x in r], [float(x) for x in eps], labels), False


def _qs(cfg: dict) -> list[int]:
    if "q" in cfg:
        return [int(q) for q in cfg["q"]]
    return q_schedule(int(cfg.get("m_max", 5)))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_entropy(args) -> int:
    m = _load_measure_arg(args.measure)
    mid = args.id or Path(args.measure).stem
    hs = ent.block_entropies(m, args.n_max + 1)
    rows = [(mid, n, hs[n], hs[n] / n, hs[n + 1] - hs[n]) for n in range(1, args.n_max + 1)]
    _write(_csv(["measure_id", "n", "H_n", "H_n_over_n", "H_next_minus_H_n"], rows), args.out)
    return EXIT_OK


def cmd_hull(args) -> int:
    m = _load_measure_arg(args.measure)
    h = markov_hull(m, args.order)
    doc = {
        "order": args.order,
        "alphabet_size": m.alphabet_size,
        "kernel": h.kernel.tolist(),
        "flagged_rows": list(h.flagged_rows),
        "hull_rate": hull_entropy_rate(h),
        "table": hull_table(m, range(1, args.order + 1)),
    }
    _write(_json(doc), args.out)
    return EXIT_OK


def cmd_lemma_fuzz(args) -> int:
    try:
        reports = ent.lemma_fuzz(args.trials, args.seed, args.max_atoms)
    except AssertionError as exc:
        print(f"violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATED
    rows = [(i, r.c, r.H_p, r.H_q, r.bound, r.slack, r.conclusion_holds)
            for i, r in enumerate(reports)]
    _write(_csv(["trial", "c", "H_p", "H_q", "bound", "slack", "conclusion_holds"], rows), args.out)
    violations = sum(not r.conclusion_holds for r in reports)
    print(f"lemma-fuzz: {len(reports)} trials, {violations} violations, "
          f"min slack {min(r.slack for r in reports):.6g}", file=sys.stderr)
    return EXIT_VIOLATED if violations else EXIT_OK


def cmd_theorem1(args) -> int:
    cfg = _read_json(args.config)
    base_dir = Path(args.config).parent
    seeds = np.random.SeedSequence(int(cfg.get("seed", 0)))
    budget = cfg.get("budget")
    target = _measure(cfg["target"], base_dir, seeds)
    fam, hulls = _family(cfg, target, base_dir, seeds, budget)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = theorem1_experiment(
            fam, n_min=cfg.get("n_min"), tol=float(cfg.get("tolerance", 1e-8)),
            rate_depth=int(cfg.get("rate_depth", 8)), hull_family=hulls, budget=budget,
        )
    doc = report.to_dict()
    doc["warnings"] = [str(w.message) for w in caught]
    _write(_json(doc), args.out)
    if args.trace:
        rows = [(n, h.r, h.eps, h.max_ratio, h.holds, r.lower, r.upper, report.target_rate.lower,
                 report.target_rate.upper)
                for n, h, r in zip(report.ns, report.hypotheses, report.rates)]
        _write(_csv(["n", "r_n", "eps_n", "max_ratio", "hypothesis_holds", "rate_lower",
                     "rate_upper", "target_lower", "target_upper"], rows), args.trace)
    return VERDICT_EXIT[report.verdict]


def _suspension_target(cfg, base_dir, seeds):
    if "suspension" in cfg:
        s = cfg["suspension"]
        return build_suspension(_measure(s["base"], base_dir, seeds), s["f"])
    return None


def cmd_theorem2(args) -> int:
    cfg = _read_json(args.config)
    base_dir = Path(args.config).parent
    seeds = np.random.SeedSequence(int(cfg.get("seed", 0)))
    budget = cfg.get("budget")
    system = _suspension_target(cfg, base_dir, seeds)
    target = system.measure if system is not None else _measure(cfg["target"], base_dir, seeds)
    fam, _ = _family(cfg, target, base_dir, seeds, budget)
    report = theorem2_experiment(
        fam, _qs(cfg), n_max=int(cfg.get("n_max", 8)), n_min=cfg.get("n_min"),
        tol=float(cfg.get("tolerance", 1e-8)), budget=budget,
    )
    doc = report.to_dict()
    if system is not None:
        doc["abramov_rate"] = abramov_rate(system)
    _write(_json(doc), args.out)
    if args.trace:
        _write(_csv(["m", "q", "n", "lower", "upper"], report.trace_rows()), args.trace)
    return VERDICT_EXIT[report.verdict]


def _parse_sweep(text: str) -> list[int]:
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError as exc:
        raise InputError(f"sweep must look like a..b, got {text!r}") from exc
    if lo < 1 or hi < lo:
        raise InputError(f"bad sweep range {text!r}")
    return list(range(lo, hi + 1))


def cmd_pitskel(args) -> int:
    Ks = _parse_sweep(args.sweep) if args.sweep else [args.K]
    W = None if args.W <= 0 else args.W
    report = counterexample_sweep(Ks, args.n, W)
    rows = [(r.K, r.n, r.h_mu, r.h_hull, r.gap) for r in sorted(report.rows, key=lambda r: (r.K, r.n))]
    _write(_csv(["K", "n", "h_mu", "h_hull_n", "gap"], rows), args.out)
    if len(Ks) < 2:
        print("pitskel: single cutoff, no trend to assess", file=sys.stderr)
        return EXIT_OK
    trend = report.divergence_trend
    print(f"pitskel: divergence trend {'confirmed' if trend else 'refuted'} over K={Ks[0]}..{Ks[-1]} "
          f"(h_mu <= 2 ln 2: {report.h_mu_bounded})", file=sys.stderr)
    return EXIT_OK if trend else EXIT_VIOLATED


def cmd_suspension(args) -> int:
    cfg = _read_json(args.config)
    base_dir = Path(args.config).parent
    seeds = np.random.SeedSequence(int(cfg.get("seed", 0)))
    budget = cfg.get("budget")
    try:
        base_ref, f = cfg["base"], cfg["f"]
    except KeyError as exc:
        raise InputError(f"suspension config needs {exc.args[0]!r}") from exc
    system = build_suspension(_measure(base_ref, base_dir, seeds), f)
    n_max = int(cfg.get("n_max", 8))
    # hull rates of each factor process; word counts grow like q**(n+1)
    hull_max = int(cfg.get("hull_max", min(n_max, 4)))
    rows = []
    for m, q in enumerate(_qs(cfg), start=1):
        t = TruncatedPartition(q)
        factor = factor_process(system.measure, t)
        for n in range(1, n_max + 1):
            b = factor_entropy_bracket(system.measure, t, n, budget)
            hull_rate = hull_entropy_rate(markov_hull(factor, n, budget)) if n <= hull_max else ""
            rows.append((m, q, n, b.lower, b.upper, hull_rate))
    _write(_csv(["m", "q", "n", "lower", "upper", "hull_rate"], rows), args.out)
    tower = ent.entropy_rate(system.measure)
    print(f"suspension: tower rate {tower.value:.12g}, Abramov {abramov_rate(system):.12g}, "
          f"mean height {system.mean_height:.12g}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="shiftent",
        description="Entropy experiments on stationary shift measures. "
        f"${BUDGET_ENV} overrides the word-enumeration budget.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("entropy", help="block and conditional entropies of a measure")
    s.add_argument("--measure", required=True)
    s.add_argument("--n-max", type=int, required=True)
    s.add_argument("--id", default=None, help="measure id column (default: file stem)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_entropy)

    s = sub.add_parser("hull", help="n-Markov hull kernel and entropy table")
    s.add_argument("--measure", required=True)
    s.add_argument("--order", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_hull)

    s = sub.add_parser("lemma-fuzz", help="randomized check of the entropy perturbation bound")
    s.add_argument("--trials", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-atoms", type=int, default=64)
    s.add_argument("--out")
    s.set_defaults(func=cmd_lemma_fuzz)

    for name, func in (("theorem1", cmd_theorem1), ("theorem2", cmd_theorem2)):
        s = sub.add_parser(name, help=f"{name} experiment from a JSON config")
        s.add_argument("--config", required=True)
        s.add_argument("--out", help="JSON verdict (default: stdout)")
        s.add_argument("--trace", help="CSV trace file")
        s.set_defaults(func=func)

    s = sub.add_parser("pitskel", help="refined-partition counterexample sweep")
    s.add_argument("--K", type=int, default=4)
    s.add_argument("--W", type=int, default=8, help="window cap (<= 0 for uncapped)")
    s.add_argument("--n", type=int, default=1, help="largest memory")
    s.add_argument("--sweep", help="cutoff range a..b (overrides --K)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_pitskel)

    s = sub.add_parser("suspension", help="tower brackets from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_suspension)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, MeasureFormatError, KeyError, ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
