"""Command line experiment runner.

Every run first writes ``manifest.json`` into the output directory, echoing
the subcommand, all parameters and the library version.  Tables are CSV
files whose first line is ``# `` followed by the same parameters as JSON.
``projdyn replay DIR/manifest.json`` repeats a run.

Exit codes: 0 success (for ``hypotheses``: all satisfied), 1 error, 2 some
hypothesis violated, 3 some hypothesis inconclusive.
"""

import argparse
import csv
from fractions import Fraction
import io
import json
from pathlib import Path
import sys

import numpy as np

from . import __version__
from .exceptions import InvalidConfig, ProjdynError
from .limitset import (
    aperiodicity_gap,
    box_dimension,
    limit_set_approx,
    shell_hausdorff,
    shell_snapshot,
    spectrum,
)
from .matrix import eigen_dominant
from .semigroup import GeneratorSet, Status, check_H0, check_H1, check_H2, orbit_points
from .torus import RationalTorusPoint, orbit_float, orbit_rational
from .walk import (
    PcPoint,
    WalkConfig,
    contraction_curve,
    lyapunov_top,
    run_chain,
)

EXIT_OK, EXIT_ERROR, EXIT_VIOLATED, EXIT_INCONCLUSIVE = 0, 1, 2, 3

# echoed in the manifest but not in data headers, since they never change values
_RUN_ONLY = {"out", "threads"}


def _dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


class Run:
    """Output directory handling shared by the subcommands."""

    def __init__(self, args):
        self.out = Path(args.out)
        self.params = dict(sorted(vars(args).items()))
        data_params = {k: v for k, v in self.params.items() if k not in _RUN_ONLY}
        self.header = "# " + json.dumps(data_params, sort_keys=True) + "\n"

    def write_manifest(self):
        self.out.mkdir(parents=True, exist_ok=True)
        manifest = {"projdyn_version": __version__, "command": self.params["command"],
                    "params": self.params}
        gens = self.params.get("gens")
        if gens and Path(gens).is_file():
            manifest["generators"] = Path(gens).read_text()
        (self.out / "manifest.json").write_text(_dump_json(manifest))

    def write_csv(self, name, columns, rows):
        buf = io.StringIO()
        buf.write(self.header)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
        (self.out / name).write_text(buf.getvalue())

    def write_json(self, name, obj):
        (self.out / name).write_text(_dump_json(obj))


def _load(args):
    return GeneratorSet.from_file(args.gens)


def _parse_coords(text):
    return [s.strip() for s in text.split(",") if s.strip()]


def _is_rational_literal(s):
    return "." not in s and "e" not in s.lower()


# ---------------------------------------------------------------------------
# subcommands


def cmd_hypotheses(args, run):
    S = _load(args)
    verdicts = [check_H0(S, seed=args.seed), check_H1(S, seed=args.seed),
                check_H2(S, max_len=args.max_len)]
    report = {"verdicts": [v.to_dict() for v in verdicts]}
    run.write_json("hypotheses.json", report)
    print(_dump_json(report), end="")
    statuses = {v.status for v in verdicts}
    if Status.VIOLATED in statuses:
        return EXIT_VIOLATED
    if Status.INCONCLUSIVE in statuses:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_limitset(args, run):
    S = _load(args)
    L = limit_set_approx(S, args.max_len)
    d = S.dim
    run.write_csv("limitset.csv", ["x%d" % i for i in range(d)] + ["word"],
                  [list(p) + [str(w)] for p, w in zip(L.points, L.words)])
    summary = {"points": len(L)}
    if d == 2 and len(L) > 1:
        bd = box_dimension(L)
        summary.update(box_dimension=bd.dimension, fit_residual=bd.residual)
    run.write_json("limitset.json", summary)
    print(_dump_json(summary), end="")
    return EXIT_OK


def cmd_spectrum(args, run):
    S = _load(args)
    spec = spectrum(S, args.max_len)
    run.write_csv("spectrum.csv", ["word", "log_modulus"], [[str(w), v] for w, v in spec])
    summary = {"entries": len(spec)}
    try:
        summary["aperiodicity_gap"] = aperiodicity_gap(spec, args.coeff_bound)
    except ValueError:
        summary["aperiodicity_gap"] = None
    run.write_json("spectrum.json", summary)
    print(_dump_json(summary), end="")
    return EXIT_OK


def _walk_config(args, S):
    weights = tuple(float(Fraction(w)) for w in args.weights.split(",")) if args.weights \
        else (1.0 / len(S),) * len(S)
    c = args.c if args.c is not None else eigen_dominant(S[0]).dominant_modulus
    return WalkConfig(weights, args.seed, args.steps, args.burn_in, c)


def cmd_walk(args, run):
    S = _load(args)
    cfg = _walk_config(args, S)
    if cfg.n_steps <= cfg.burn_in:
        raise InvalidConfig("--steps (%d) must exceed --burn-in (%d)" % (cfg.n_steps, cfg.burn_in))
    start = PcPoint.from_vector(np.eye(S.dim)[0], cfg.c)
    m = run_chain(S, cfg, start)
    d = S.dim
    run.write_csv("occupation.csv", ["x%d" % i for i in range(d)] + ["z"],
                  [list(p) + [z] for p, z in zip(m.points, m.z)])
    rng = np.random.default_rng(args.seed)
    x, y = rng.standard_normal(d), rng.standard_normal(d)
    ns = [n for n in (0, 1, 2, 5, 10, 20, 30, 50) if n <= args.max_n]
    curve = contraction_curve(S, cfg, x, y, ns, args.trials, args.threads)
    run.write_csv("contraction.csv", ["n", "mean_delta", "stderr"], curve)
    lyap = lyapunov_top(S, cfg, max(1, args.max_n), args.trials, args.threads)
    summary = {"samples": m.count, "c": cfg.c, "alpha": cfg.alpha,
               "z_ks_statistic": m.z_ks_statistic(),
               "lyapunov": {"mean": lyap.mean, "stderr": lyap.stderr, "n": max(1, args.max_n)}}
    run.write_json("walk.json", summary)
    print(_dump_json(summary), end="")
    return EXIT_OK


def cmd_torus(args, run):
    S = _load(args)
    coords = _parse_coords(args.point)
    if all(_is_rational_literal(s) for s in coords):
        x = RationalTorusPoint.from_fractions([Fraction(s) for s in coords])
        report = orbit_rational(S, x, resolution=args.grid)
        cloud = report.points / x.denominator
    else:
        report = orbit_float(S, coords, args.max_len, resolution=args.grid,
                             truncate=args.truncate)
        cloud = report.points
    run.write_csv("orbit.csv", ["x%d" % i for i in range(S.dim)], cloud.tolist())
    run.write_json("torus.json", report.to_dict())
    print(_dump_json(report.to_dict()), end="")
    return EXIT_OK


def cmd_shell(args, run):
    S = _load(args)
    v = [int(Fraction(s)) if _is_rational_literal(s) and Fraction(s).denominator == 1
         else float(Fraction(s)) for s in _parse_coords(args.point or ",".join(
             ["1"] + ["0"] * (S.dim - 1)))]
    c = args.c if args.c is not None else eigen_dominant(S[0]).dominant_modulus
    pts = orbit_points(S, np.array(v), args.max_len)
    snap = shell_snapshot(pts, c, args.t)
    L = limit_set_approx(S, args.ls_max_len)
    dist = shell_hausdorff(snap, L)
    run.write_csv("shell.csv", ["u%d" % i for i in range(S.dim)] + ["radius"],
                  [list(u) + [r] for u, r in zip(snap.directions, snap.radii)])
    summary = {"c": c, "t": args.t, "points": len(snap), "hausdorff": dist}
    run.write_json("shell.json", summary)
    print(_dump_json(summary), end="")
    return EXIT_OK


COMMANDS = {
    "hypotheses": cmd_hypotheses,
    "limitset": cmd_limitset,
    "spectrum": cmd_spectrum,
    "walk": cmd_walk,
    "torus": cmd_torus,
    "shell": cmd_shell,
}


# ---------------------------------------------------------------------------
# argument parsing


def _u64(text):
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--gens", required=True, help="generator file")
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--out", default="projdyn_out", help="output directory")
    p.add_argument("--threads", type=int, default=1)
    return p


def build_parser():
    parser = argparse.ArgumentParser(prog="projdyn", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version="projdyn " + __version__)
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()

    p = sub.add_parser("hypotheses", parents=[common], help="check (H0), (H1), (H2)")
    p.add_argument("--max-len", type=int, default=6)

    p = sub.add_parser("limitset", parents=[common], help="limit set approximation")
    p.add_argument("--max-len", type=int, default=8)

    p = sub.add_parser("spectrum", parents=[common], help="log moduli of proximal words")
    p.add_argument("--max-len", type=int, default=6)
    p.add_argument("--coeff-bound", type=int, default=500)

    p = sub.add_parser("walk", parents=[common], help="random walk statistics")
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--burn-in", type=int, default=1_000)
    p.add_argument("--trials", type=int, default=1_000)
    p.add_argument("--c", type=float, default=None,
                   help="torus parameter c > 1 (default: dominant modulus of the first generator)")
    p.add_argument("--weights", default=None, help="comma separated probabilities")
    p.add_argument("--max-n", type=int, default=30, help="largest n of the contraction curve")

    p = sub.add_parser("torus", parents=[common], help="torus orbit of a point")
    p.add_argument("--point", required=True,
                   help="comma separated coordinates; fractions give the exact orbit")
    p.add_argument("--max-len", type=int, default=12)
    p.add_argument("--grid", type=int, default=50)
    p.add_argument("--truncate", action="store_true")

    p = sub.add_parser("shell", parents=[common], help="c-shell of an orbit")
    p.add_argument("--point", default=None, help="integer vector (default e1)")
    p.add_argument("--max-len", type=int, default=18)
    p.add_argument("--ls-max-len", type=int, default=10)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--t", type=int, default=8)

    p = sub.add_parser("replay", help="repeat a run from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="override the output directory")
    return parser


def _replay_args(parser, args):
    manifest = json.loads(Path(args.manifest).read_text())
    params = dict(manifest["params"])
    if args.out is not None:
        params["out"] = args.out
    if manifest.get("generators") is not None and not Path(params["gens"]).is_file():
        raise FileNotFoundError("generator file %s is missing" % params["gens"])
    return argparse.Namespace(**params)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            args = _replay_args(parser, args)
        run = Run(args)
        run.write_manifest()
        return COMMANDS[args.command](args, run)
    except (ProjdynError, ValueError, OSError) as exc:
        print("%s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
