"""Command line: ``jchnet {net-gen,lambda,scaling,phase,spectrum}``.

Cavity inputs are dimensionless (beta = 1): ``--delta`` is delta/beta, the mu
grid is (mu - omega)/beta and the kappa grid is kappa*Lambda/beta.

Exit codes: 0 success, 2 usage or parse error, 3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import io
import json
import os
import shlex
import sys
import tempfile

import numpy as np

from . import __version__, cavity, graphs, meanfield, spectral
from .cavity import CavityParams
from .errors import DomainError, GraphFormatError, IterationLimitError, SizeError, TruncationError

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- helpers

def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ":" in part:
                lo, hi = part.split(":")
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None
    return out


def _threads(text):
    if text == "auto":
        return os.cpu_count() or 1
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--threads takes an integer or 'auto'") from None
    if n < 1:
        raise argparse.ArgumentTypeError("--threads must be >= 1")
    return n


def _provenance(args):
    return [f"jchnet {__version__} " + shlex.join(args.argv), f"seed={args.seed}"]


def _emit(args, text, path=None):
    """Write text atomically to ``path`` (default ``--out``), or stdout."""
    path = path if path is not None else args.out
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".jchnet-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sidecar_path(args):
    if args.out in (None, "-"):
        return None
    root, _ = os.path.splitext(args.out)
    return root + ".json"


def _json(doc):
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _info(args, msg):
    stream = sys.stderr if args.out in (None, "-") else sys.stdout
    print(msg, file=stream)


# ---------------------------------------------------------------- families

def _add_family_args(p, family_required=True):
    p.add_argument("family", choices=spectral.NetworkFamily.GENERATORS, nargs=None if family_required else "?")
    p.add_argument("--n", type=int, help="node count")
    p.add_argument("--z", type=int, default=4, help="ring/small-world degree (even)")
    p.add_argument("--mean-degree", type=float, default=4.0, help="Erdos-Renyi mean degree")
    p.add_argument("--gamma", type=float, default=2.2, help="scale-free exponent")
    p.add_argument("--kmin", type=int, default=2, help="scale-free minimum degree")
    p.add_argument("--generation", type=int, help="Apollonian generation")
    p.add_argument("--p", type=float, default=0.0, help="small-world rewiring probability")


def _family(args):
    params = {"z": args.z, "mean_degree": args.mean_degree, "gamma": args.gamma,
              "k_min": args.kmin, "p": args.p}
    return spectral.NetworkFamily(args.family, params)


def _build_graph(args):
    fam = _family(args)
    if args.family == "apollonian":
        if args.generation is None:
            raise UsageError("apollonian needs --generation")
        return fam.generate(args.generation)
    if args.n is None:
        raise UsageError(f"{args.family} needs --n")
    return fam.generate(args.n, np.random.default_rng(args.seed))


# ---------------------------------------------------------------- commands

def cmd_net_gen(args):
    g = _build_graph(args)
    _emit(args, graphs.format_edgelist(g, _provenance(args)))
    s = graphs.degree_stats(g)
    _info(args, f"N={g.n_nodes} E={g.n_edges} k_max={s.k_max} mean_k={s.mean_k:.6g} "
                f"k2_over_k={s.second_moment_ratio:.6g}")
    return 0


def cmd_lambda(args):
    if args.graph:
        g = graphs.load_edgelist(args.graph)
    elif args.family:
        g = _build_graph(args)
    else:
        raise UsageError("give --graph PATH or a network family")
    doc = {"schema": 1, "argv": args.argv, "seed": args.seed, "n_nodes": g.n_nodes, "n_edges": g.n_edges}
    try:
        res = spectral.max_eigenvalue(g, tol=args.tol, max_iter=args.max_iter)
    except IterationLimitError as exc:
        doc.update(lambda_max=exc.estimate, iterations=exc.iterations, residual=exc.residual,
                   converged=False, bounds_check=None)
        _emit(args, _json(doc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    doc.update(lambda_max=res.lambda_max, iterations=res.iterations, residual=res.residual,
               converged=True, bounds_check=spectral.spectral_bounds_check(g, res.lambda_max))
    _emit(args, _json(doc))
    return 0


def cmd_scaling(args):
    fam = _family(args)
    if args.p_grid is not None:
        if args.family != "smallworld" or args.n is None:
            raise UsageError("--p-grid needs family smallworld and --n")
        rows = spectral.small_world_lambda_curve(args.n, args.z, args.p_grid, args.realizations, args.seed,
                                                 workers=args.threads,
                                                 max_iter=args.max_iter or spectral.CURVE_MAX_ITER)
        if args.format == "json":
            doc = {"schema": 1, "argv": args.argv, "seed": args.seed,
                   "curve": [{"p": p, "lambda_mean": m, "lambda_std": s} for p, m, s in rows]}
            _emit(args, _json(doc))
        else:
            buf = io.StringIO()
            spectral.write_curve_csv(rows, buf, _provenance(args))
            _emit(args, buf.getvalue())
        return 0
    sizes = args.sizes
    if sizes is None:
        raise UsageError("--sizes is required (node counts, or generations for apollonian)")
    if len(sizes) < 3:
        raise UsageError("--sizes needs at least three values")
    result = spectral.scaling_study(fam, sizes, args.realizations, args.seed, workers=args.threads,
                                    max_iter=args.max_iter or spectral.DEFAULT_MAX_ITER)
    summary = spectral.scaling_summary(result, argv=args.argv, seed=args.seed, family=fam.name,
                                       family_params=dict(fam.params), realizations=args.realizations)
    if args.format == "json":
        _emit(args, summary)
    else:
        buf = io.StringIO()
        spectral.write_scaling_csv(result, buf, _provenance(args))
        _emit(args, buf.getvalue())
        side = _sidecar_path(args)
        if side:
            _emit(args, summary, side)
    _info(args, f"exponent={result.exponent:.6g} stderr={result.exponent_stderr:.3g}")
    return 0


def _grid(lo, hi, num):
    if num < 1:
        raise UsageError("grid point counts must be >= 1")
    return np.linspace(lo, hi, num)


def _config(args):
    return meanfield.MeanFieldConfig(n_trunc=args.n_trunc, tol_psi=args.tol_psi, max_iter=args.mf_max_iter,
                                     damping=args.damping, psi_init=args.psi_init,
                                     sf_threshold=args.sf_threshold)


def cmd_phase(args):
    base = CavityParams.dimensionless(args.delta, -1.0)
    cfg = _config(args)
    graph = None
    if args.graph:
        graph = graphs.load_edgelist(args.graph)
    lam = args.lam
    if lam is None:
        if graph is None:
            raise UsageError("give --lambda or --graph")
        lam = spectral.max_eigenvalue(graph).lambda_max

    if args.mode == "network":
        if graph is None or args.mu is None or args.kappa is None:
            raise UsageError("network mode needs --graph, --mu and --kappa")
        if not args.mu < 0:
            raise UsageError(f"mu_rel {args.mu} violates omega - mu > 0")
        p = base.with_mu_rel(args.mu)
        sol = meanfield.network_self_consistent(graph, args.kappa, p, cfg)
        lines = _provenance(args) + [f"lambda={lam!r} superfluid={str(sol.superfluid).lower()} "
                                     f"converged={str(sol.converged).lower()}"]
        buf = io.StringIO()
        for c in lines:
            buf.write(f"# {c}\n")
        buf.write("site,psi\n")
        for i, v in enumerate(sol.psi):
            buf.write(f"{i},{float(v)!r}\n")
        _emit(args, buf.getvalue())
        return 0 if sol.converged else EXIT_NUMERIC

    mu_grid = _grid(args.mu_min, args.mu_max, args.mu_points)
    bad = [f"row {i}: mu_rel={m!r}" for i, m in enumerate(mu_grid) if not m < 0]
    if bad:
        raise UsageError("grid violates omega - mu > 0 at " + "; ".join(bad))
    kappa_grid = _grid(args.kappa_min, args.kappa_max, args.kappa_points)
    numeric = args.mode in ("numeric", "both")
    d = meanfield.phase_diagram(base, lam, mu_grid, kappa_grid, cfg, numeric=numeric)
    sidecar = meanfield.phase_sidecar(d, argv=args.argv, seed=args.seed, mode=args.mode)
    if args.mode == "analytic":
        if args.format == "json":
            _emit(args, sidecar)
        else:
            buf = io.StringIO()
            meanfield.write_boundary_csv(d.boundary, buf, _provenance(args))
            _emit(args, buf.getvalue())
        return 0
    if args.format == "json":
        _emit(args, sidecar)
    else:
        buf = io.StringIO()
        meanfield.write_phase_csv(d, buf, _provenance(args))
        _emit(args, buf.getvalue())
        side = _sidecar_path(args)
        if side:
            _emit(args, sidecar, side)
    return 0


def cmd_spectrum(args):
    if args.deltas is not None:
        deltas = args.deltas
    else:
        deltas = list(_grid(args.delta_min, args.delta_max, args.delta_points)) if args.delta_points else []
    if not deltas:
        raise UsageError("detuning grid is empty")
    if args.n_max < 1:
        raise UsageError("--n-max must be >= 1")
    rows = cavity.anharmonic_spectrum(args.n_max, deltas, CavityParams(1.0, 1.0, 1.0))
    if args.format == "json":
        doc = {"schema": 1, "argv": args.argv, "seed": args.seed,
               "rows": [{"n": n, "branch": b, "delta": d, "energy_rescaled": e} for n, b, d, e in rows]}
        _emit(args, _json(doc))
    else:
        buf = io.StringIO()
        cavity.write_spectrum_csv(rows, buf, _provenance(args))
        _emit(args, buf.getvalue())
    return 0


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common_flags(top_level=False):
    # subcommand namespaces are copied over the top-level one, so only the
    # top level carries defaults
    def default(value):
        return value if top_level else argparse.SUPPRESS

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=default(0), help="RNG seed (recorded in outputs)")
    common.add_argument("--out", default=default(None), help="output path ('-' or omitted: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=default("csv"))
    common.add_argument("--threads", type=_threads, default=default(1), help="worker threads, integer or 'auto'")
    return common


def build_parser():
    common = _common_flags()
    parser = _Parser(prog="jchnet", description=__doc__.splitlines()[0], parents=[_common_flags(True)])
    parser.add_argument("--version", action="version", version=f"jchnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("net-gen", parents=[common], help="generate a network and write its edge list")
    _add_family_args(p)
    p.set_defaults(func=cmd_net_gen)

    p = sub.add_parser("lambda", parents=[common], help="largest adjacency eigenvalue")
    _add_family_args(p, family_required=False)
    p.add_argument("--graph", help="edge-list file")
    p.add_argument("--tol", type=float, default=spectral.DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=spectral.DEFAULT_MAX_ITER)
    p.set_defaults(func=cmd_lambda)

    p = sub.add_parser("scaling", parents=[common], help="lambda(N) scaling study and power-law fit")
    _add_family_args(p)
    p.add_argument("--sizes", type=_int_list, help="comma list or lo:hi range (generations for apollonian)")
    p.add_argument("--realizations", type=int, default=10)
    p.add_argument("--p-grid", type=_float_list, help="small-world: emit the lambda(p) curve instead")
    p.add_argument("--max-iter", type=int, help="power-iteration cap (default 1e5, 1e6 for --p-grid)")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("phase", parents=[common], help="mean-field phase diagram")
    p.add_argument("--delta", type=float, default=0.0, help="detuning / beta")
    p.add_argument("--lambda", dest="lam", type=float, help="maximal adjacency eigenvalue")
    p.add_argument("--graph", help="edge-list file (lambda computed when --lambda absent)")
    p.add_argument("--mode", choices=("analytic", "numeric", "both", "network"), default="both")
    p.add_argument("--mu-min", type=float, default=-1.5)
    p.add_argument("--mu-max", type=float, default=-0.2)
    p.add_argument("--mu-points", type=int, default=100)
    p.add_argument("--kappa-min", type=float, default=0.0)
    p.add_argument("--kappa-max", type=float, default=0.3)
    p.add_argument("--kappa-points", type=int, default=100)
    p.add_argument("--mu", type=float, help="network mode: (mu - omega)/beta")
    p.add_argument("--kappa", type=float, help="network mode: kappa/beta")
    p.add_argument("--n-trunc", type=int, default=12)
    p.add_argument("--tol-psi", type=float, default=1e-10)
    p.add_argument("--mf-max-iter", type=int, default=10_000)
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--psi-init", type=float, default=0.1)
    p.add_argument("--sf-threshold", type=float, default=1e-6)
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("spectrum", parents=[common], help="anharmonic Jaynes-Cummings spectrum")
    p.add_argument("--n-max", type=int, default=4)
    p.add_argument("--delta-min", type=float, default=-10.0)
    p.add_argument("--delta-max", type=float, default=10.0)
    p.add_argument("--delta-points", type=int, default=201)
    p.add_argument("--deltas", type=_float_list, help="explicit comma list of detunings")
    p.set_defaults(func=cmd_spectrum)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    try:
        return args.func(args)
    except (UsageError, DomainError, SizeError, GraphFormatError, OSError) as exc:
        print(f"jchnet {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IterationLimitError, TruncationError) as exc:
        print(f"jchnet {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
