"""Command-line front end: parameter sweeps, figure-data bundles, claim
verification, and the circuit oracle.

Output is deterministic: a comment header (tool version, argument echo,
truncation settings — never a timestamp) followed by comma-separated rows
with nine significant digits, so identical invocations are byte-identical.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numeric
guard (truncation/tail) failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, demodulation as dm, protocol, verification
from .fock import MeasurementRangeError, TailMassError
from .optics import HybridChannel, negativity

ENV_OUT_DIR = "DVCV_TELEPORT_OUT_DIR"

PROTOCOLS = ("dual", "single", "init_am_dual", "init_am_single")
FIGURES = ("fig2", "fig3", "fig4", "fig5")


class UsageError(ValueError):
    pass


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def _out_dir(path: str | None) -> Path:
    if path is not None:
        return Path(path)
    return Path(os.environ.get(ENV_OUT_DIR, "."))


def _write_csv(path: Path, header_lines: list[str], columns: list[str],
               rows: list[tuple]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _header(args, echo_keys: list[str]) -> list[str]:
    echo = " ".join(f"{k}={getattr(args, k)}" for k in echo_keys)
    return [
        f"dvcv-teleport {__version__}",
        f"command: {args.command} {echo}",
        f"truncation: nmax={args.nmax} tail_tol={args.tail_tol}",
    ]


# -- sweep ---------------------------------------------------------------

def _a1_values(args) -> list[float]:
    if args.a1_abs is not None and args.a1_grid is not None:
        raise UsageError("give either --a1-abs or --a1-grid, not both")
    if args.a1_abs is not None:
        if not 0.0 <= args.a1_abs <= 1.0:
            raise UsageError("--a1-abs must lie in [0, 1]")
        return [args.a1_abs]
    if args.a1_grid is not None:
        if args.a1_grid < 2:
            raise UsageError("--a1-grid needs at least 2 points")
        return list(np.linspace(0.0, 1.0, args.a1_grid))
    return []


def cmd_sweep(args) -> int:
    if args.steps < 2:
        raise UsageError("--steps must be at least 2")
    if not args.alpha_min < args.alpha_max:
        raise UsageError("--alpha-min must be below --alpha-max")
    if args.alpha_min <= 0.0:
        raise UsageError("displacement amplitudes must be positive")
    alphas = list(np.linspace(args.alpha_min, args.alpha_max, args.steps))
    a1s = _a1_values(args)
    l, k, n_cut = args.l, args.k, args.nmax

    if args.protocol == "dual":
        if a1s:
            raise UsageError("--a1-abs/--a1-grid apply to the init_am protocols only")
        columns = ["alpha", "p_direct", "p_modulated", "p_total"]

        def row(alpha):
            p = protocol.direct_success_probability(l, k, alpha, n_cut)
            q = protocol.am_probability(l, k, alpha, n_cut)
            return [(alpha, p, q, p + q)]

    elif args.protocol == "single":
        if a1s:
            raise UsageError("--a1-abs/--a1-grid apply to the init_am protocols only")
        columns = ["alpha", "p_clean", "dp_swap", "dp_disp_first", "dp_disp_chain"]

        def row(alpha):
            adds = dm.single_rail_demod_additions(l, k, alpha, n_cut)
            return [(alpha, adds["clean"], adds["swap"],
                     adds["displacement_first"], adds["displacement_chain"])]

    else:
        if (l, k) != (0, 1):
            raise UsageError("the init_am protocols are defined for l=0, k=1")
        if not a1s:
            raise UsageError("the init_am protocols need --a1-abs or --a1-grid")
        columns = ["alpha", "a1_abs", "total_success", "p_clean_outcome"]
        run = (dm.initially_am_dual if args.protocol == "init_am_dual"
               else dm.initially_am_single)

        def row(alpha):
            out = []
            for x in a1s:
                a0 = math.sqrt(max(0.0, 1.0 - x * x))
                rows_, total = run(a0, x, alpha, n_cut)
                clean = sum(r[-1] for r in rows_ if r[-2] == "clean")
                out.append((alpha, x, total, clean))
            return out

    with ThreadPoolExecutor() as pool:
        chunks = list(pool.map(row, alphas))
    rows = [r for chunk in chunks for r in chunk]

    out_path = args.out
    if out_path is None:
        name = f"sweep_{args.protocol}_{l}{k}.csv"
        out_path = _out_dir(None) / name
    _write_csv(Path(out_path), _header(args, [
        "protocol", "l", "k", "alpha_min", "alpha_max", "steps",
        "a1_abs", "a1_grid",
    ]), columns, rows)
    print(f"wrote {out_path} ({len(rows)} rows)")
    return 0


# -- figures ---------------------------------------------------------------

def _alpha_grid(lo, hi, step, extras=()) -> list[float]:
    vals = set(np.round(np.arange(lo, hi + step / 2, step), 10))
    vals.update(extras)
    return sorted(vals)


def _figure_rows(name: str, n_cut: int):
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    if name == "fig2":
        alphas = _alpha_grid(0.05, 1.2, 0.01, extras=(inv_sqrt2, 0.628482))
        columns = ["alpha", "p_direct", "ps_01", "ps_02", "ps_12", "ps_03",
                   "p_signfree"]

        def row(a):
            p = protocol.direct_success_probability(0, 1, a, n_cut)
            s01 = protocol.pair_sum_probability(0, 1, 0, 1, a)
            return (a, p, s01,
                    protocol.pair_sum_probability(0, 1, 0, 2, a),
                    protocol.pair_sum_probability(0, 1, 1, 2, a),
                    protocol.pair_sum_probability(0, 1, 0, 3, a),
                    p + s01)

        return columns, [row(a) for a in alphas]
    if name == "fig3":
        alphas = _alpha_grid(0.05, 1.2, 0.01, extras=(0.4072, 0.5053))
        columns = ["alpha", "p_direct", "ps_01", "ps_02", "ps_12", "ps_13",
                   "p_signfree"]

        def row(a):
            p = protocol.direct_success_probability(1, 2, a, n_cut)
            s12 = protocol.pair_sum_probability(1, 2, 1, 2, a)
            return (a, p,
                    protocol.pair_sum_probability(1, 2, 0, 1, a),
                    protocol.pair_sum_probability(1, 2, 0, 2, a),
                    s12,
                    protocol.pair_sum_probability(1, 2, 1, 3, a),
                    p + s12)

        return columns, [row(a) for a in alphas]
    if name == "fig4":
        alphas = _alpha_grid(0.05, 1.5, 0.025)
        columns = ["alpha", "p_clean", "dp_swap", "dp_disp_first", "dp_disp_chain"]

        def row(a):
            adds = dm.single_rail_demod_additions(0, 1, a, n_cut)
            return (a, adds["clean"], adds["swap"],
                    adds["displacement_first"], adds["displacement_chain"])

        return columns, [row(a) for a in alphas]
    if name == "fig5":
        a1s = np.linspace(0.0, 0.99, 100)
        alphas = (0.2, 0.3, 0.4)
        columns = (["a1_abs"]
                   + [f"dual_alpha{a:.2f}".replace(".", "") for a in alphas]
                   + [f"single_alpha{a:.2f}".replace(".", "") for a in alphas])

        def row(x):
            a0 = math.sqrt(max(0.0, 1.0 - x * x))
            duals = [dm.initially_am_dual(a0, x, a, n_cut)[1] for a in alphas]
            singles = [dm.initially_am_single(a0, x, a, n_cut)[1] for a in alphas]
            return tuple([x] + duals + singles)

        return columns, [row(x) for x in a1s]
    raise UsageError(f"unknown figure {name!r}; choose from {FIGURES}")


def cmd_figure(args) -> int:
    columns, rows = _figure_rows(args.name, args.nmax)
    out = _out_dir(args.out) / f"{args.name}.csv"
    _write_csv(out, _header(args, ["name"]), columns, rows)
    print(f"wrote {out} ({len(rows)} rows)")
    if args.gnuplot:
        script = out.with_suffix(".gp")
        plots = ", ".join(
            f"'{out.name}' using 1:{i + 2} with lines"
            for i in range(len(columns) - 1))
        script.write_text(
            "set datafile separator ','\n"
            "set key autotitle columnhead\n"
            f"set xlabel '{columns[0]}'\n"
            f"plot {plots}\n")
        print(f"wrote {script}")
    return 0


# -- verify / negativity / oracle -------------------------------------------

def cmd_verify(args) -> int:
    results = verification.run_suite(args.suite)
    print(verification.format_report(results))
    return 0 if all(r.passed for r in results) else 1


def cmd_negativity(args) -> int:
    if args.beta <= 0.0:
        raise UsageError("--beta must be positive")
    closed, numeric = negativity(HybridChannel(args.beta))
    print(f"closed form : {closed:.9g}")
    print(f"numeric PPT : {numeric:.9g}")
    print(f"difference  : {abs(closed - numeric):.3g}")
    return 0


def cmd_oracle(args) -> int:
    if not 0.0 < args.r <= 0.3:
        raise UsageError("--r must lie in (0, 0.3]")
    if args.alpha <= 0.0:
        raise UsageError("--alpha must be positive")
    t = math.sqrt(1.0 - args.r ** 2)
    beta = args.alpha * t / args.r
    qubit = protocol.UnknownQubit(args.a0, args.a1, args.l, args.k)
    records = protocol.brute_force_pipeline(qubit, beta, beta, args.r,
                                            n_cut=2, m_cut=2,
                                            tail_tolerance=args.tail_tol)
    print(f"# circuit at alpha={args.alpha:.9g} r={args.r:.9g} beta={beta:.9g}")
    print("parity,n,m,p_circuit,p_limit,rel_err,infidelity,purity")
    worst = 0.0
    by_counts: dict[tuple[int, int], float] = {}
    for rec in records:
        by_counts.setdefault((rec.outcome.n, rec.outcome.m), 0.0)
        by_counts[rec.outcome.n, rec.outcome.m] += rec.probability
    for rec in records:
        p_limit = protocol.outcome_probability_dual(
            qubit, args.l, args.k, rec.outcome.n, rec.outcome.m, args.alpha)
        p_pair = by_counts[rec.outcome.n, rec.outcome.m]
        rel = abs(p_pair - p_limit) / p_limit if p_limit > 0 else math.inf
        infid = protocol.record_infidelity(rec, qubit, args.alpha)
        worst = max(worst, infid)
        print(",".join(_fmt(v) for v in (
            rec.outcome.parity, rec.outcome.n, rec.outcome.m,
            rec.probability, p_limit, rel, infid, rec.purity,
        )))
    print(f"# max corrected-state infidelity: {worst:.6g}")
    return 0


# -- parser -----------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--nmax", type=int, default=20,
                   help="photon-number cutoff for analytic sums (default 20)")
    p.add_argument("--tail-tol", type=float, default=1e-10,
                   help="admissible truncation-tail probability (default 1e-10)")
    p.add_argument("--config", type=str, default=None,
                   help="key=value file supplying defaults for any flag")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dvcv-teleport",
        description="hybrid DV-CV teleportation sweeps, figures, and checks",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="scan the displacement amplitude")
    p.add_argument("--protocol", choices=PROTOCOLS, required=True)
    p.add_argument("--l", type=int, default=0)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--alpha-min", type=float, required=True)
    p.add_argument("--alpha-max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--a1-abs", type=float, default=None)
    p.add_argument("--a1-grid", type=int, default=None)
    p.add_argument("--out", type=str, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("figure", help="emit the curve bundle of one figure")
    p.add_argument("name", choices=FIGURES)
    p.add_argument("--out", type=str, default=None, help="output directory")
    p.add_argument("--gnuplot", action="store_true",
                   help="also write a gnuplot script next to the CSV")
    _add_common(p)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=sorted(verification.SUITES), required=True)
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("negativity", help="entanglement of the resource state")
    p.add_argument("--beta", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_negativity)

    p = sub.add_parser("oracle", help="finite-reflectance circuit vs the limit")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--l", type=int, default=0)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--a0", type=float, default=math.sqrt(0.7))
    p.add_argument("--a1", type=float, default=math.sqrt(0.3))
    _add_common(p)
    p.set_defaults(func=cmd_oracle)

    return parser


def _load_config(path: str) -> list[str]:
    tokens = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"config line {line!r} is not key=value")
        key, value = line.split("=", 1)
        key = key.strip().replace("_", "-")
        if key == "config":
            raise UsageError("config files cannot nest")
        tokens.extend([f"--{key}", value.strip()])
    return tokens


def _inject_config(argv: list[str]) -> list[str]:
    """Expand a --config flag into its flag tokens, placed right after the
    subcommand so explicit command-line flags still win."""
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
            break
        if tok.startswith("--config="):
            path = tok.split("=", 1)[1]
            break
    if path is None:
        return argv
    sub_pos = next((i for i, tok in enumerate(argv) if not tok.startswith("-")), None)
    if sub_pos is None:
        return argv
    return argv[:sub_pos + 1] + _load_config(path) + argv[sub_pos + 1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(_inject_config(argv))
        except SystemExit as e:
            return int(e.code or 0)
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (TailMassError, MeasurementRangeError, OverflowError) as e:
        print(f"numeric guard: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
