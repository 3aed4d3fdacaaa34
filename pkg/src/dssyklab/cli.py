"""Batch command-line front end.

Each subcommand wires one computation to CSV/JSON output for plotting and
comparison.  All file outputs carry '#'-prefixed metadata lines with the
full parameter set; runs are byte-reproducible given the same flags and
seed (pass --deterministic to suppress the timestamp line).

Exit codes: 0 success, 2 validation error, 3 numerical non-convergence,
4 regression-guard trip.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from . import __version__, edlab, freeconv, mixed, moments, qhermite
from .qhermite import ConvergenceError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NONCONVERGENCE = 3
EXIT_GUARD = 4

ZSCORE_GUARD = 5.0


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _metadata_lines(args, extra: dict | None = None) -> list[str]:
    pairs = {"artifact": "dssyklab", "version": __version__, "subcommand": args.subcommand}
    for key, val in sorted(vars(args).items()):
        if key in ("subcommand", "func", "out", "deterministic") or val is None:
            continue
        pairs[key] = val
    if extra:
        pairs.update(extra)
    lines = [f"# {k}={v}" for k, v in pairs.items()]
    if not args.deterministic:
        lines.append(f"# timestamp={datetime.now(timezone.utc).isoformat()}")
    return lines


def _write(args, text: str, path: str | None = None):
    path = path if path is not None else args.out
    if path in (None, "-"):
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)
        print(f"wrote {path}", file=sys.stderr)


def _csv(metadata: list[str], header: str, rows: list[str]) -> str:
    return "\n".join(metadata + [header] + rows) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _derive_q_qt(args) -> tuple[Fraction | None, Fraction | None, dict]:
    """Resolve the (q, qtilde) pair from direct flags or from (N, p, k)."""
    direct = args.q is not None or args.qtilde is not None
    derived = args.N is not None or args.p is not None or args.k is not None
    if direct and derived:
        raise ValueError("give either --q/--qtilde or --N/--p/--k, not both")
    if derived:
        if args.N is None or args.p is None or args.k is None:
            raise ValueError("finite-size mode needs all of --N, --p, --k")
        q = edlab.qn_finite(args.p, args.N)
        qt = edlab.qtilde_weight(args.p, args.N, args.k) if args.k >= 1 else Fraction(1)
        return q, qt, {"derived_q": str(q), "derived_qtilde": str(qt)}
    q = Fraction(args.q) if args.q is not None else None
    qt = Fraction(args.qtilde) if args.qtilde is not None else None
    return q, qt, {}


def run_moments(args) -> int:
    if args.n < 1 or args.n > moments.MAX_MOMENT_ORDER:
        raise ValueError(f"--n must lie in 1..{moments.MAX_MOMENT_ORDER}")
    q, qt, note = _derive_q_qt(args)
    if args.symbolic and (q is not None or qt is not None or args.theta is not None):
        raise ValueError("--symbolic cannot be combined with numeric parameters")
    theta = Fraction(args.theta) if args.theta is not None else None
    table = moments.MomentTable.specialized(args.n, q=q, qt=qt, theta=theta)
    meta = _metadata_lines(args, note)
    fully_numeric = all(v.is_constant() for v in table.values)
    if fully_numeric and not args.symbolic:
        rows = [f"{n},{_fmt(v)}" for n, v in table.numeric_rows()]
        _write(args, _csv(meta, "n,m_n", rows))
    else:
        payload = table.to_json_obj()
        payload["metadata"] = [line[2:] for line in meta]
        _write(args, json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def run_mixed(args) -> int:
    word = mixed.Word.parse(args.word)
    result = mixed.mixed_moment(word)
    payload = {
        "word": str(word),
        "value": result.value.to_json_obj(),
        "matchings": result.partition_count,
        "metadata": [line[2:] for line in _metadata_lines(args)],
    }
    _write(args, json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def run_ed(args) -> int:
    params = edlab.ModelParams(N=args.N, p=args.p, theta=args.theta, k=args.k,
                               seed=args.seed, samples=args.samples)
    if args.phase_thetas:
        thetas = [float(t) for t in args.phase_thetas.split(",")]
        rows = edlab.phase_scan(params, thetas)
        body = [f"{_fmt(r['theta'])},{r['k']},{r['samples']},{_fmt(r['max_gap'])},"
                f"{_fmt(r['median_gap'])},{_fmt(r['gap_ratio'])},{int(r['bimodal'])},{_fmt(r['gap'])}"
                for r in rows]
        _write(args, _csv(_metadata_lines(args),
                          "theta,k,samples,max_gap,median_gap,gap_ratio,bimodal,gap", body))
        return EXIT_OK
    spectra = edlab.sample_spectra(params)
    rows = [f"{s.sample_index},{_fmt(e)}" for s in spectra for e in s.eigenvalues]
    _write(args, _csv(_metadata_lines(args), "sample_index,eigenvalue", rows))
    if args.histogram:
        pooled = np.concatenate([s.eigenvalues for s in spectra])
        hist = edlab.histogram(pooled, bins=args.bins)
        hrows = [f"{_fmt(a)},{c},{_fmt(d)}" for a, c, d in hist]
        _write(args, _csv(_metadata_lines(args), "left_edge,count,density", hrows),
               path=args.histogram)
    return EXIT_OK


def run_compare(args) -> int:
    params = edlab.ModelParams(N=args.N, p=args.p, theta=args.theta, k=args.k,
                               seed=args.seed, samples=args.samples)
    q = edlab.qn_finite(args.p, args.N)
    qt = edlab.qtilde_weight(args.p, args.N, args.k)
    note = {"q_finite": str(q), "qtilde": str(qt)}
    if args.k == 3:
        note["qtilde_main_text"] = str(edlab.qtilde_weight_main_text(args.p, args.N, args.k))
    means, errs = edlab.paired_reduced_moments(params, args.n_max)
    rows = []
    guard_trip = False
    for n in range(1, args.n_max + 1):
        analytic = float(moments.reduced_moment(n).substitute(q=q, qt=qt)
                         .evaluate(theta=args.theta))
        dev = means[n - 1] - analytic
        scale = max(errs[n - 1], 1e-12 * max(1.0, abs(analytic)))
        z = dev / scale
        if n <= 6 and abs(z) > ZSCORE_GUARD:
            guard_trip = True
        rows.append(f"{n},{_fmt(analytic)},{_fmt(means[n - 1])},{_fmt(errs[n - 1])},{_fmt(z)}")
    _write(args, _csv(_metadata_lines(args, note), "n,analytic,empirical,stderr,zscore", rows))
    if guard_trip:
        print("regression guard: |zscore| > 5 for some n <= 6", file=sys.stderr)
        return EXIT_GUARD
    return EXIT_OK


def run_density(args) -> int:
    if args.kernel_r is not None:
        r = args.kernel_r
        x0 = args.kernel_x
        R = qhermite.support_radius(args.q)
        ys = np.linspace(-R, R, args.grid)
        rows = [f"{_fmt(x0)},{_fmt(y)},{_fmt(qhermite.conditional_kernel(x0, y, r, args.q))}"
                for y in ys]
        _write(args, _csv(_metadata_lines(args), "x,y,value", rows))
        return EXIT_OK
    R = qhermite.support_radius(args.q)
    xs = np.linspace(-R, R, args.grid)
    rows = [f"{_fmt(x)},{_fmt(qhermite.nu_q_density(x, args.q))}" for x in xs]
    _write(args, _csv(_metadata_lines(args), "x,value", rows))
    return EXIT_OK


def run_freeconv(args) -> int:
    result = freeconv.semicircle_plus_atomic(args.r, args.theta, args.grid)
    rows = [f"{_fmt(x)},{_fmt(d)}" for x, d in zip(result.measure.grid, result.measure.density)]
    _write(args, _csv(_metadata_lines(args), "x,density", rows))
    prediction = freeconv.outlier_location(args.theta, freeconv.semicircle_resolvent, 2.0) \
        if args.theta > 0 else None
    summary = {
        "support_intervals": [[a, b] for a, b in result.support_intervals],
        "outliers": result.outliers,
        "total_mass": result.measure.total_mass(),
        "small_r_outlier_prediction": prediction,
        "metadata": [line[2:] for line in _metadata_lines(args)],
    }
    summary_path = args.summary or (args.out + ".json" if args.out not in (None, "-") else None)
    _write(args, json.dumps(summary, indent=2, sort_keys=True), path=summary_path)
    return EXIT_OK


def run_qtilde(args) -> int:
    qt = edlab.qtilde_weight(args.p, args.N, args.k)
    payload = {
        "N": args.N, "p": args.p, "k": args.k,
        "q_finite": str(edlab.qn_finite(args.p, args.N)),
        "q_j": [str(edlab.qj_weight(args.p, args.N, j)) for j in range(args.k)],
        "qtilde": str(qt),
        "qtilde_float": float(qt),
        "metadata": [line[2:] for line in _metadata_lines(args)],
    }
    if args.k == 3:
        payload["qtilde_main_text"] = str(edlab.qtilde_weight_main_text(args.p, args.N, args.k))
    _write(args, json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def run_zn(args) -> int:
    value = moments.z_n(args.n, args.beta, args.q, args.qtilde)
    row = f"{args.n},{_fmt(args.beta)},{_fmt(args.q)},{_fmt(args.qtilde)},{_fmt(value)}"
    _write(args, _csv(_metadata_lines(args), "n,beta,q,qtilde,z_n", [row]))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dssyklab",
                                     description="moment laboratory for the defect-perturbed model")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="output path ('-' or omit for stdout)")
        p.add_argument("--deterministic", action="store_true",
                       help="suppress the timestamp metadata line")

    p = sub.add_parser("moments", help="exact or specialized moment table")
    p.add_argument("--n", type=int, required=True, help="highest moment order")
    p.add_argument("--symbolic", action="store_true", help="force fully symbolic output")
    p.add_argument("--q", type=str, default=None, help="rational q, e.g. 1/3")
    p.add_argument("--qtilde", type=str, default=None, help="rational qtilde")
    p.add_argument("--theta", type=str, default=None, help="rational defect strength")
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    common(p)
    p.set_defaults(func=run_moments)

    p = sub.add_parser("mixed", help="mixed moment of a word over {x,d}")
    p.add_argument("--word", type=str, required=True)
    common(p)
    p.set_defaults(func=run_mixed)

    p = sub.add_parser("ed", help="sample spectra (or a phase scan) at finite N")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--p", type=int, default=4)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--histogram", type=str, default=None, help="also write a histogram CSV here")
    p.add_argument("--bins", type=int, default=80)
    p.add_argument("--phase-thetas", type=str, default=None,
                   help="comma list of theta values: emit a gap report instead of spectra")
    common(p)
    p.set_defaults(func=run_ed)

    p = sub.add_parser("compare", help="analytic vs empirical reduced moments")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--p", type=int, default=4)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=run_compare)

    p = sub.add_parser("density", help="q-Gaussian density (or conditional kernel) samples")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--kernel-r", type=float, default=None,
                   help="emit the conditional kernel at this memory parameter")
    p.add_argument("--kernel-x", type=float, default=0.0)
    common(p)
    p.set_defaults(func=run_density)

    p = sub.add_parser("freeconv", help="two-atom measure (+) semicircle density")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--grid", type=int, default=2000)
    p.add_argument("--summary", type=str, default=None, help="JSON summary path")
    common(p)
    p.set_defaults(func=run_freeconv)

    p = sub.add_parser("qtilde", help="exact finite-size wall weight")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    common(p)
    p.set_defaults(func=run_qtilde)

    p = sub.add_parser("zn", help="n-boundary partition function")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--qtilde", type=float, required=True)
    common(p)
    p.set_defaults(func=run_zn)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
