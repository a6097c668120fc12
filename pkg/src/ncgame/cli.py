"""Command-line interface: ``ncgame verify|analyze|bounds|search``.

Exit codes: 0 success or exact equilibrium, 1 not an equilibrium or a bound
violation, 2 budget exceeded, 64 unreadable input or usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .bounds import (
    BoundReport,
    Verdict,
    compute_K_epsilon,
    degH_lower_bound,
    dh_nh_bound,
    format_number,
    k_epsilon_excess,
    ne_consistency_report,
    prop3_degree_bound,
    thm2_degree_bound,
)
from .fileio import ProfileFormatError, load_profile, parse_rational
from .game import DEFAULT_EXACT_BUDGET, BudgetExceededError, GameConfig, is_exact_ne, is_greedy_ne
from .graph import UNREACHABLE, biconnected_components, diameter, subtree_weights
from .search import MAX_EXHAUSTIVE_N, MODES, CampaignRow, conjecture_scan

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_BUDGET = 2
EXIT_USAGE = 64

WORKERS_ENV = "NCG_WORKERS"


class UsageError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _n_values(text: str) -> list[int]:
    """``4``, ``3,4,5`` or ``3-5``."""
    out: list[int] = []
    try:
        for part in text.split(","):
            if "-" in part:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad node count list: {text!r}") from None
    return out


def _load(path: str, alpha: Fraction | None, need_alpha: bool = True):
    try:
        doc = load_profile(path)
    except OSError as exc:
        raise ProfileFormatError(exc.strerror or str(exc), "file") from None
    alpha = alpha if alpha is not None else doc.alpha
    if need_alpha and alpha is None:
        raise ProfileFormatError("no alpha in the file; pass --alpha", "alpha")
    if alpha is not None and alpha <= 0:
        raise ProfileFormatError("alpha must be positive", "alpha")
    return doc.profile, alpha


def _write_csv(rows: Sequence[Sequence], out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerows(rows)


def _emit(args, structured, csv_rows, human_lines) -> None:
    if args.format == "structured":
        print(json.dumps(structured, sort_keys=True, indent=2))
    elif args.format == "csv":
        _write_csv(csv_rows, sys.stdout)
    else:
        for line in human_lines:
            print(line)


# --------------------------------------------------------------------------


def cmd_verify(args) -> int:
    profile, alpha = _load(args.file, args.alpha)
    config = GameConfig(profile.n, alpha)
    status = EXIT_OK
    try:
        verdict = is_exact_ne(profile, config, args.max_exact_n)
    except BudgetExceededError:
        verdict = is_greedy_ne(profile, config)
        status = EXIT_BUDGET
    if status == EXIT_OK and not verdict.is_ne:
        status = EXIT_FAIL
    d = verdict.as_dict() | {"n": profile.n, "alpha": str(alpha), "digest": profile.digest}
    label = "exact" if verdict.exact else "greedy only, exact check over budget"
    lines = [f"profile {profile.digest}  n={profile.n}  alpha={alpha}"]
    lines.append(f"{'Nash equilibrium' if verdict.is_ne else 'not a Nash equilibrium'} ({label})")
    if verdict.witness is not None:
        w = verdict.witness
        lines.append(f"witness: player {w.player} switches to {sorted(w.strategy)} [{w.kind}], cost change {d['delta']}")
    if not verdict.exact:
        lines.append(f"note: exact check needs n <= {args.max_exact_n} (--max-exact-n)")
    witness = d["witness"] or {}
    csv_rows = [
        ["digest", "n", "alpha", "verdict", "check", "player", "strategy", "delta"],
        [
            profile.digest, profile.n, str(alpha), d["verdict"], d["check"],
            witness.get("player", ""), " ".join(map(str, witness.get("strategy", []))), d["delta"] or "",
        ],
    ]
    _emit(args, d, csv_rows, lines)
    return status


def _analysis(profile) -> dict:
    g = profile.graph
    comps, seen = [], set()
    for s in range(g.n):
        if s not in seen:
            part = [v for v in range(g.n) if g.distances[s, v] != UNREACHABLE]
            seen.update(part)
            comps.append(part)
    blocks = []
    for b in biconnected_components(g):
        if not b.nontrivial:
            continue
        weights = subtree_weights(g, b, check=False)
        blocks.append(
            {
                "nodes": b.sorted_nodes(),
                "n_H": b.n_nodes,
                "d_H": b.diameter,
                "deg_H": str(b.avg_degree),
                "edges": len(b.edges),
                "weights": {str(u): weights.weight(u) for u in b.sorted_nodes()},
            }
        )
    d_g = diameter(g)
    return {
        "n": g.n,
        "edges": g.num_edges,
        "connected": g.is_connected(),
        "tree": g.is_tree(),
        "diameter": format_number(d_g),
        "components": comps,
        "blocks": blocks,
        "digest": profile.digest,
    }


def cmd_analyze(args) -> int:
    profile, _ = _load(args.file, None, need_alpha=False)
    a = _analysis(profile)
    lines = [f"profile {a['digest']}  n={a['n']}  edges={a['edges']}  diameter={a['diameter']}"]
    if not a["connected"]:
        lines.append(f"disconnected: {len(a['components'])} components")
        for i, part in enumerate(a["components"]):
            lines.append(f"  component {i}: nodes {part}")
    if not a["blocks"]:
        lines.append("no nontrivial biconnected component")
    for i, b in enumerate(a["blocks"]):
        lines.append(f"H{i}: n_H={b['n_H']} d_H={b['d_H']} deg(H)={b['deg_H']} nodes={b['nodes']}")
        lines.append("    S(u) sizes: " + " ".join(f"{u}:{w}" for u, w in b["weights"].items()))
    csv_rows = [["block", "n_H", "d_H", "deg_H", "nodes"]]
    csv_rows += [[i, b["n_H"], b["d_H"], b["deg_H"], " ".join(map(str, b["nodes"]))] for i, b in enumerate(a["blocks"])]
    _emit(args, a, csv_rows, lines)
    return EXIT_OK


# --------------------------------------------------------------------------


def _decimal(x) -> str:
    """Exact decimal when the fraction terminates, otherwise ``p/q``."""
    if not isinstance(x, Fraction):
        return format_number(x)
    den, twos, fives = x.denominator, 0, 0
    while den % 2 == 0:
        den, twos = den // 2, twos + 1
    while den % 5 == 0:
        den, fives = den // 5, fives + 1
    digits = max(twos, fives)
    if den != 1 or digits == 0:
        return str(x)
    scaled = abs(x.numerator) * 10**digits // x.denominator
    s = str(scaled).rjust(digits + 1, "0")
    return f"{'-' if x < 0 else ''}{s[:-digits]}.{s[-digits:]}"


_EVALUATORS = {
    "prop3": (("n", "alpha", "n_H", "d_H"), lambda n, a, nh, dh: prop3_degree_bound(int(n), a, int(nh), int(dh))),
    "thm2": (("n", "alpha", "n_H"), lambda n, a, nh: thm2_degree_bound(int(n), a, int(nh))),
    "dh_nh": (("n_H",), lambda nh: dh_nh_bound(int(nh))),
    "degH_lower": ((), degH_lower_bound),
    "k_excess": (("epsilon", "n_H"), lambda e, nh: k_epsilon_excess(e, int(nh))),
}


def _report_rows(reports: Sequence[BoundReport]) -> list[list[str]]:
    return [list(BoundReport.CSV_FIELDS)] + [r.csv_row() for r in reports]


def cmd_bounds(args) -> int:
    if args.epsilon is not None:
        k = compute_K_epsilon(args.epsilon)
        d = {"epsilon": str(args.epsilon), "K_epsilon": k}
        _emit(args, d, [["epsilon", "K_epsilon"], [str(args.epsilon), k]], [str(k)])
        return EXIT_OK
    if args.eval:
        name, *raw = args.eval
        if name not in _EVALUATORS:
            raise UsageError(f"unknown evaluator {name!r}; choose from {sorted(_EVALUATORS)}")
        params, fn = _EVALUATORS[name]
        if len(raw) != len(params):
            raise UsageError(f"{name} takes {len(params)} arguments: {' '.join(params)}")
        try:
            values = [parse_rational(x) for x in raw]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        result = fn(*values)
        text = "inapplicable" if result is None else _decimal(result)
        d = {"evaluator": name, "args": raw, "value": text}
        _emit(args, d, [["evaluator", "value"], [name, text]], [text])
        return EXIT_OK
    if not args.file:
        raise UsageError("bounds needs a FILE, --epsilon or --eval")
    profile, alpha = _load(args.file, args.alpha)
    config = GameConfig(profile.n, alpha)
    try:
        verdict = is_exact_ne(profile, config, args.max_exact_n)
        verified = verdict.is_ne
    except BudgetExceededError:
        verified = False
    banner = None
    if not verified:
        banner = "WARNING: profile is not a verified Nash equilibrium; values below are evaluator output only"
        if args.format != "human":
            print(banner, file=sys.stderr)
    reports = ne_consistency_report(profile, config, verified=verified, evaluate_only=not verified)
    lines = [banner] if banner else []
    lines.append(f"profile {profile.digest}  n={profile.n}  alpha={alpha}")
    for r in reports:
        wit = " ".join(f"{k}={v}" for k, v in sorted(r.witness.items()))
        lines.append(
            f"{r.check_id:24s} {r.verdict.value:12s} lhs={format_number(r.lhs)} rhs={format_number(r.rhs)}"
            + (f" [{wit}]" if wit else "")
            + (f" ({r.note})" if r.note else "")
        )
    structured = {"verified_ne": verified, "reports": [r.as_dict() for r in reports]}
    _emit(args, structured, _report_rows(reports), lines)
    return EXIT_FAIL if any(r.verdict is Verdict.VIOLATED for r in reports) else EXIT_OK


# --------------------------------------------------------------------------


def cmd_search(args) -> int:
    n_values = args.n
    if args.mode == "exhaustive":
        over = [n for n in n_values if n > MAX_EXHAUSTIVE_N]
        if over:
            print(
                f"exhaustive search is limited to n <= {MAX_EXHAUSTIVE_N} (got {over}); "
                "use --mode dynamics or --mode random-restart for larger n",
                file=sys.stderr,
            )
            return EXIT_BUDGET
    else:
        over = [n for n in n_values if n > args.max_exact_n]
        if over:
            print(
                f"dynamics need exact best responses, limited to n <= {args.max_exact_n} (got {over}); "
                "raise --max-exact-n at your own cost",
                file=sys.stderr,
            )
            return EXIT_BUDGET
    grid = [t for t in args.alpha_grid.split(",") if t.strip()]
    try:
        report = conjecture_scan(
            n_values,
            grid,
            mode=args.mode,
            prune=args.prune,
            workers=args.workers,
            seed=args.seed,
            restarts=args.restarts,
            max_rounds=args.max_rounds,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "catalog.jsonl", "w") as fh:
        for n in sorted(report.catalogs):
            fh.write(report.catalogs[n].to_jsonl())
    buf = io.StringIO()
    _write_csv([list(CampaignRow.CSV_FIELDS)] + [row.csv_row() for row in report.rows], buf)
    (out / "campaign.csv").write_text(buf.getvalue())
    rows = [["digest", *BoundReport.CSV_FIELDS]]
    for entry, r in report.reports():
        if not entry.tree or r.verdict is Verdict.VIOLATED:
            rows.append([entry.digest, *r.csv_row()])
    buf = io.StringIO()
    _write_csv(rows, buf)
    (out / "bounds.csv").write_text(buf.getvalue())

    print(f"seed={args.seed} mode={args.mode} prune={args.prune} grid={','.join(grid)}")
    for row in report.rows:
        print(
            f"n={row.n} alpha={row.alpha}: {row.ne_count} NE ({row.tree_ne_count} tree, "
            f"{row.nontree_ne_count} non-tree, max n_H {row.max_nH}), "
            f"{row.violations} violated, {row.vacuous} vacuous, {row.profiles_checked} checked"
        )
    for e in report.headline:
        print(f"HEADLINE: non-tree equilibrium with alpha > n: n={e.n} alpha={e.alpha} digest={e.digest}")
    violated = report.violated()
    for e, r in violated:
        print(f"VIOLATION: {r.check_id} n={e.n} alpha={e.alpha} digest={e.digest} lhs={format_number(r.lhs)} rhs={format_number(r.rhs)}")
    print(f"wrote {out / 'catalog.jsonl'}, {out / 'campaign.csv'}, {out / 'bounds.csv'}")
    return EXIT_FAIL if violated else EXIT_OK


# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ncgame", description="Sum network creation games: verification, structure, bounds and search.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, alpha=True):
        if alpha:
            sp.add_argument("--alpha", type=_rational, help="link price as an integer or p/q (overrides the file)")
        sp.add_argument("--format", choices=("human", "csv", "structured"), default="human")
        sp.add_argument("--max-exact-n", type=int, default=DEFAULT_EXACT_BUDGET, help="largest n for exact checks")

    sp = sub.add_parser("verify", help="check whether a profile is a Nash equilibrium")
    sp.add_argument("file")
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("analyze", help="biconnected structure of the communication graph")
    sp.add_argument("file")
    common(sp, alpha=False)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("bounds", help="bound checks on a profile, the size constant, or raw evaluators")
    sp.add_argument("file", nargs="?")
    sp.add_argument("--epsilon", type=_rational, help="print the block-size constant for this epsilon")
    sp.add_argument("--eval", nargs="+", metavar="ARG", help=f"evaluator name and arguments: {', '.join(_EVALUATORS)}")
    common(sp)
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("search", help="find equilibria and check every bound on them")
    sp.add_argument("--n", type=_n_values, required=True, help="node counts, e.g. 4, 3,4,5 or 3-5")
    sp.add_argument("--alpha-grid", required=True, help="comma-separated terms such as 1/2,n-1,2n,4n")
    sp.add_argument("--mode", choices=MODES, default="exhaustive")
    sp.add_argument("--prune", action="store_true", help="one labelled graph per isomorphism class (all orientations)")
    sp.add_argument("--workers", type=int, default=_default_workers(), help=f"worker processes (default ${WORKERS_ENV} or 1)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--restarts", type=int, default=20, help="starts per alpha in random-restart mode")
    sp.add_argument("--max-rounds", type=int, default=200)
    sp.add_argument("--max-exact-n", type=int, default=DEFAULT_EXACT_BUDGET)
    sp.add_argument("--out", default="ncgame-out", help="output directory")
    sp.set_defaults(func=cmd_search)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ProfileFormatError as exc:
        print(f"error: cannot read profile: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
