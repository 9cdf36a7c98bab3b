"""Command-line front end.

Subcommands
-----------
model-info      print drift/diffusion, eigenvalues and stability flags of a model
pointer-scan    mixing and survival times over the QBM PR region, plus the pointer basis
fit-powerlaw    pointer-basis mixing time against temperature, log-log fit
feedback-sweep  feedback performance along the QBM PR boundary
simulate        Monte Carlo of the closed-loop conditional mean
lqg-check       compare the feedback gain with the equivalent LQG gain
figures         write one CSV per figure panel into --out

CSV files use 12 significant digits; JSON uses full float precision. Exit
status is 0 on success, 1 on a numerical failure and 2 on bad input.
"""
import argparse
import datetime as _dt
import json
import math
import sys
import warnings
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from .control import (FeedbackDesign, evaluate_feedback, lqg_equivalence)
from .errors import InputError, NotHurwitz, NumericalError, ParseError
from .lgmodel import LGModel, is_hurwitz
from .matops import is_psd
from .parallel import ordered_imap
from .qbm import (beta_max, boundary_gamma, omega_from_point, pointer_basis_sweep,
                  power_law_fit, pr_region_contains, qbm_mixing_time, qbm_model,
                  qbm_pointer_basis, survival_time_qbm)
from .trajectories import (default_config, ergodic_stats, noise_factor,
                           simulate_mean, write_path_csv)

CSV_DIGITS = 12
NOT_HURWITZ = "NotHurwitz"

SCAN_HEADER = ["beta", "gamma", "tau_mix", "tau_sur"]
POINTER_HEADER = ["T", "eps", "beta_star", "gamma_star", "tau_mix_star", "omega_star"]
FEEDBACK_HEADER = ["beta", "gamma", "tau_mix", "infidelity_exact",
                   "infidelity_approx", "purity_exact"]
FIGURE_FEEDBACK_HEADER = ["beta", "gamma", "tau_mix", "tau_sur", "infidelity"]


# ---------------------------------------------------------------------------
# formatting helpers
# ---------------------------------------------------------------------------

def _fmt(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.{CSV_DIGITS}g}"


class CSVWriter:
    """Streams rows with a fixed header; rows are flushed as written."""

    def __init__(self, fh, header):
        self.fh = fh
        self.header = list(header)
        fh.write(",".join(self.header) + "\n")

    def row(self, values):
        if len(values) != len(self.header):
            raise RuntimeError("row length does not match header")
        self.fh.write(",".join(_fmt(v) for v in values) + "\n")
        self.fh.flush()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _provenance(seed=None):
    return {
        "tool": "pointerlab",
        "version": __version__,
        "seed": seed,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def _dump_json(payload, fh):
    # json writes floats with repr(), i.e. the shortest round-tripping form
    fh.write(json.dumps(_jsonable(payload), indent=2, allow_nan=False) + "\n")


def _record(inputs, outputs, seed=None):
    return {"inputs": inputs, "outputs": outputs, "provenance": _provenance(seed)}


@contextmanager
def _table_output(args, name):
    """Yield a file handle for a command's CSV: ``--out/<name>.csv`` or stdout."""
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / f"{name}.csv", "w", newline="") as fh:
            yield fh
    else:
        yield sys.stdout


def _emit_summary(args, name, payload):
    """Summary JSON goes to ``--out/<name>_summary.json`` and stdout, or to
    stderr when the CSV itself went to stdout."""
    if args.out:
        with open(Path(args.out) / f"{name}_summary.json", "w") as fh:
            _dump_json(payload, fh)
        _dump_json(payload, sys.stdout)
    else:
        _dump_json(payload, sys.stderr)


def _print_report(args, payload, lines):
    if args.json:
        _dump_json(payload, sys.stdout)
    else:
        for line in lines:
            print(line)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def parse_range(text, name="range"):
    """Parse ``LO:HI:N`` (or a ``[lo, hi, n]`` list from a config file)."""
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = str(text).split(":")
    if len(parts) != 3:
        raise InputError(f"{name} must look like LO:HI:N, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name} must look like LO:HI:N, got {text!r}") from exc
    if not lo < hi:
        raise InputError(f"{name}: need LO < HI")
    if n < 2:
        raise InputError(f"{name}: need at least 2 points")
    return lo, hi, n


def _add_common(p, T=1000.0, eps=0.1, k=None, beta_range=None, seed=False,
                grid=False, out=True):
    p.add_argument("--config", help="JSON file supplying defaults for any flag")
    p.add_argument("--T", type=float, default=T, help="bath temperature (scaled units)")
    p.add_argument("--eps", type=float, default=eps, help="purity threshold epsilon")
    if k is not None:
        p.add_argument("--k", type=float, default=k, help="feedback strength")
    if beta_range is not None:
        p.add_argument("--beta-range", default=beta_range, metavar="LO:HI:N",
                       help=f"boundary beta grid (default {beta_range})")
    if grid:
        p.add_argument("--grid", type=int, default=41, metavar="N",
                       help="gamma grid points per beta column (default 41)")
    if seed:
        p.add_argument("--seed", type=int, default=12345, metavar="U64",
                       help="random seed (default 12345)")
    if out:
        p.add_argument("--out", metavar="DIR", help="write outputs into DIR")
    p.add_argument("--json", action="store_true", help="machine-readable JSON output")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (capped by POINTERLAB_THREADS)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pointerlab",
        description="Pointer bases, mixing times and feedback for linear Gaussian systems.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.subcommands = sub.choices

    p = sub.add_parser("model-info", help="describe a model")
    p.add_argument("--config", help="JSON file supplying defaults for any flag")
    p.add_argument("--model", metavar="FILE", help="model JSON file")
    p.add_argument("--T", type=float, default=None, help="use the QBM model at this T")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_model_info)

    p = sub.add_parser("pointer-scan", help="mixing/survival times over the PR region")
    _add_common(p, beta_range="0:20:41", grid=True)
    p.add_argument("--objective", choices=["exact", "asymptotic"], default="exact")
    p.add_argument("--boundary-only", action="store_true",
                   help="scan only the upper PR boundary")
    p.set_defaults(func=cmd_pointer_scan)

    p = sub.add_parser("fit-powerlaw", help="log-log fit of tau* against T")
    _add_common(p)
    p.add_argument("--T-range", default="100:10000:20", metavar="LO:HI:N",
                   help="log-spaced temperatures (default 100:10000:20)")
    p.add_argument("--objective", choices=["exact", "asymptotic"], default="exact")
    p.set_defaults(func=cmd_fit_powerlaw)

    p = sub.add_parser("feedback-sweep", help="feedback performance along the boundary")
    _add_common(p, k=10.0, beta_range="0:30:200")
    p.set_defaults(func=cmd_feedback_sweep)

    p = sub.add_parser("simulate", help="Monte Carlo of the closed-loop mean")
    _add_common(p, k=10.0, seed=True)
    p.add_argument("--steps", type=int, default=1_000_000,
                   help="post-burn-in Euler-Maruyama steps (default 1e6)")
    p.add_argument("--dt", type=float, default=None,
                   help="time step (default tau*/1000)")
    p.add_argument("--path-csv", metavar="FILE", help="dump the path as step,q,p")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("lqg-check", help="feedback gain vs equivalent LQG gain")
    _add_common(p, eps=0.01, k=100.0)
    p.set_defaults(func=cmd_lqg_check)

    p = sub.add_parser("figures", help="write one CSV per figure panel")
    p.add_argument("--config", help="JSON file supplying defaults for any flag")
    p.add_argument("--out", required=False, metavar="DIR", default="figures")
    p.add_argument("--grid", type=int, default=41)
    p.add_argument("--beta-points", type=int, default=200)
    p.add_argument("--T-points", type=int, default=20)
    p.add_argument("--json", action="store_true")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_figures)
    return parser


def _load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed config JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    if not isinstance(data, dict):
        raise ParseError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        config = _load_config(args.config)
        sub = parser.subcommands[args.command]
        known = {a.dest for a in sub._actions} - {"help", "config"}
        unknown = sorted(set(config) - known)
        if unknown:
            raise InputError(f"unknown config keys for {args.command}: {unknown}")
        # config values become defaults; flags given on the command line win
        sub.set_defaults(**config)
        args = parser.parse_args(argv)
    return args


# ---------------------------------------------------------------------------
# shared computations (top level so worker processes can pickle them)
# ---------------------------------------------------------------------------

def _check_common(args):
    if not 0 < args.eps < 1:
        raise InputError("--eps must lie in (0, 1)")
    if getattr(args, "k", 0) is not None and getattr(args, "k", 0) < 0:
        raise InputError("--k must be non-negative")


def _beta_grid(args, T):
    lo, hi, n = parse_range(args.beta_range, "--beta-range")
    if lo < 0 or hi >= beta_max(T):
        raise InputError(f"--beta-range must lie within [0, {beta_max(T):.6g})")
    return np.linspace(lo, hi, n)


def _safe(fn, *a):
    try:
        return fn(*a)
    except NumericalError:
        return math.nan


def _scan_column(task):
    beta, gammas, T, eps = task
    rows = []
    for g in gammas:
        if g > 0 and pr_region_contains(beta, g, T):
            rows.append((beta, g, _safe(qbm_mixing_time, beta, g, T, eps),
                         _safe(survival_time_qbm, beta, g, T, eps)))
    return rows


def _boundary_point(task):
    beta, T, eps = task
    g = boundary_gamma(beta, T)
    return [(beta, g, _safe(qbm_mixing_time, beta, g, T, eps),
             _safe(survival_time_qbm, beta, g, T, eps))]


def _pointer_summary(res, T):
    d = res.summary()
    d["T"] = T
    d["tau_mix_exact_star"] = _safe(qbm_mixing_time, res.beta_star, res.gamma_star, T, res.eps)
    return d


def _feedback_row(task):
    beta, T, eps, k, tau_star, with_sur = task
    model = qbm_model(T)
    g = boundary_gamma(beta, T)
    tau_mix = _safe(qbm_mixing_time, beta, g, T, eps)
    tau_sur = _safe(survival_time_qbm, beta, g, T, eps) if with_sur else math.nan
    try:
        out = evaluate_feedback(model, omega_from_point(beta, g),
                                FeedbackDesign(k, eps, tau_star), exact_tau=False)
        vals = (out.infidelity_exact, out.infidelity_approx, out.purity_exact)
    except NotHurwitz:
        vals = (NOT_HURWITZ,) * 3
    return {"beta": beta, "gamma": g, "tau_mix": tau_mix, "tau_sur": tau_sur,
            "infidelity_exact": vals[0], "infidelity_approx": vals[1],
            "purity_exact": vals[2]}


def feedback_rows(T, eps, k, betas, tau_star=None, with_sur=False, workers=None):
    """Iterator over feedback-sweep rows (dicts) in ``betas`` order."""
    if tau_star is None:
        tau_star = qbm_pointer_basis(T, eps).tau_mix_star
    tasks = [(float(b), T, eps, k, tau_star, with_sur) for b in betas]
    return ordered_imap(_feedback_row, tasks, workers)


def _extremum_flags(rows):
    """Indices of the maximum mixing time and the minimum exact infidelity."""
    taus = [r["tau_mix"] for r in rows]
    inf = [r["infidelity_exact"] if not isinstance(r["infidelity_exact"], str) else math.nan
           for r in rows]
    i_tau = int(np.nanargmax(taus)) if np.any(np.isfinite(taus)) else None
    i_inf = int(np.nanargmin(inf)) if np.any(np.isfinite(inf)) else None
    return i_tau, i_inf


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _load_model(args):
    if args.model:
        try:
            return LGModel.load(args.model)
        except OSError as exc:
            raise InputError(f"cannot read model file {args.model}: {exc.strerror}") from exc
    if args.T is not None:
        return qbm_model(args.T)
    raise InputError("give --model FILE or --T")


def cmd_model_info(args):
    model = _load_model(args)
    eig = np.linalg.eigvals(model.A)
    order = np.lexsort((eig.imag, -eig.real))
    eig = eig[order]
    hurwitz = is_hurwitz(model.A)
    max_re = float(np.max(eig.real))
    if hurwitz:
        stability = "Hurwitz"
    elif abs(max_re) <= 1e-12 * max(1.0, float(np.abs(model.A).max())):
        stability = "marginally stable"
    else:
        stability = "unstable"
    payload = {
        "name": model.name,
        "n_modes": model.n_modes,
        "A": model.A,
        "D": model.D,
        "eigenvalues_A": [[float(z.real), float(z.imag)] for z in eig],
        "hurwitz": hurwitz,
        "stability": stability,
        "D_psd": is_psd(model.D),
    }
    lines = [
        f"model: {model.name or '(unnamed)'}  modes: {model.n_modes}",
        "A =", np.array2string(model.A, precision=12),
        "D =", np.array2string(model.D, precision=12),
        "eigenvalues of A: " + ", ".join(
            f"{z.real:.12g}" + (f"{z.imag:+.12g}j" if z.imag else "") for z in eig),
        f"Hurwitz: {str(hurwitz).lower()} ({stability})",
        f"D PSD: {str(payload['D_psd']).lower()}",
    ]
    _print_report(args, payload, lines)
    return 0


def cmd_pointer_scan(args):
    _check_common(args)
    T, eps = args.T, args.eps
    betas = _beta_grid(args, T)
    if args.boundary_only:
        tasks = [(float(b), T, eps) for b in betas]
        fn = _boundary_point
    else:
        if args.grid < 2:
            raise InputError("--grid must be at least 2 (a 1x1 grid is degenerate)")
        gmax = max(boundary_gamma(b, T) for b in betas)
        gammas = np.linspace(gmax / args.grid, gmax, args.grid)
        tasks = [(float(b), gammas, T, eps) for b in betas]
        fn = _scan_column
    n_rows = 0
    with _table_output(args, "pointer_scan") as fh:
        w = CSVWriter(fh, SCAN_HEADER)
        for rows in ordered_imap(fn, tasks, args.workers):
            for r in rows:
                w.row(r)
                n_rows += 1
    res = qbm_pointer_basis(T, eps, args.objective,
                            beta_range=(float(betas[0]), float(betas[-1])))
    summary = _record({"T": T, "eps": eps, "beta_range": args.beta_range,
                       "grid": args.grid, "boundary_only": args.boundary_only,
                       "objective": args.objective},
                      dict(_pointer_summary(res, T), rows=n_rows))
    _emit_summary(args, "pointer_scan", summary)
    return 0


def cmd_fit_powerlaw(args):
    _check_common(args)
    lo, hi, n = parse_range(args.T_range, "--T-range")
    if lo <= 0:
        raise InputError("--T-range must be positive")
    Ts = np.geomspace(lo, hi, n)
    results = pointer_basis_sweep(Ts, args.eps, args.objective, workers=args.workers)
    samples = [(float(T), r.tau_mix_star) for T, r in zip(Ts, results)]
    a, b, sa, sb = power_law_fit(samples)
    payload = _record(
        {"eps": args.eps, "T_range": args.T_range, "objective": args.objective,
         "log_base": 10},
        {"a": a, "b": b, "stderr_a": sa, "stderr_b": sb,
         "samples": [_pointer_summary(r, float(T)) for T, r in zip(Ts, results)]})
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "fit_powerlaw.csv", "w", newline="") as fh:
            w = CSVWriter(fh, POINTER_HEADER)
            for T, r in zip(Ts, results):
                w.row([T, args.eps, r.beta_star, r.gamma_star, r.tau_mix_star, r.omega_rate])
    _print_report(args, payload, [
        f"log10 tau* = b log10 T + a   (eps = {args.eps:g}, {n} temperatures)",
        f"b = {b:.6f} +/- {sb:.2g}",
        f"a = {a:.6f} +/- {sa:.2g}",
    ])
    return 0


def cmd_feedback_sweep(args):
    _check_common(args)
    T, eps, k = args.T, args.eps, args.k
    betas = _beta_grid(args, T)
    if k == 0:
        print("warning: k = 0 is open loop; the drift is not Hurwitz and infidelity "
              f"columns report {NOT_HURWITZ}", file=sys.stderr)
    tau_star = qbm_pointer_basis(T, eps).tau_mix_star
    rows = []
    with _table_output(args, "feedback_sweep") as fh:
        w = CSVWriter(fh, FEEDBACK_HEADER)
        for r in feedback_rows(T, eps, k, betas, tau_star, workers=args.workers):
            w.row([r[h] for h in FEEDBACK_HEADER])
            rows.append(r)
    i_tau, i_inf = _extremum_flags(rows)
    step = float(betas[1] - betas[0])
    summary = _record(
        {"T": T, "eps": eps, "k": k, "beta_range": args.beta_range},
        {"tau_star": tau_star,
         "argmax_tau_mix": {"row": i_tau, "beta": None if i_tau is None else rows[i_tau]["beta"]},
         "argmin_infidelity": {"row": i_inf, "beta": None if i_inf is None else rows[i_inf]["beta"]},
         "grid_step": step,
         "coincide": (i_tau is not None and i_inf is not None and abs(i_tau - i_inf) <= 1)})
    _emit_summary(args, "feedback_sweep", summary)
    return 0


def closed_loop_setup(T, eps, k):
    model = qbm_model(T)
    res = qbm_pointer_basis(T, eps)
    design = FeedbackDesign(k, eps, res.tau_mix_star)
    outcome = evaluate_feedback(model, res.omega_star, design, exact_tau=False)
    B = noise_factor(model, res.omega_star)
    return model, res, design, outcome, B


def cmd_simulate(args):
    _check_common(args)
    if not args.k > 0:
        raise InputError("simulate needs k > 0 (open loop has no stationary state)")
    if args.steps < 2:
        raise InputError("--steps must be at least 2")
    model, res, design, outcome, B = closed_loop_setup(args.T, args.eps, args.k)
    dt = args.dt if args.dt is not None else res.tau_mix_star / 1000.0
    cfg = default_config(outcome.N, dt, args.steps, seed=args.seed)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        path = simulate_mean(outcome.N, B, cfg)
    for wmsg in caught:
        print(f"warning: {wmsg.message}", file=sys.stderr)
    stats = ergodic_stats(path, cfg.burn_in)
    err = float(np.linalg.norm(stats.empirical_cov - outcome.M) / np.linalg.norm(outcome.M))
    if args.path_csv:
        with open(args.path_csv, "w", newline="") as fh:
            write_path_csv(path, fh, CSV_DIGITS)
    payload = _record(
        {"T": args.T, "eps": args.eps, "k": args.k, "dt": dt, "steps": args.steps,
         "burn_in": cfg.burn_in, "integrator": "euler-maruyama",
         "rng": "philox4x64+box-muller"},
        dict(stats.to_dict(), analytic_M=outcome.M, relative_error=err,
             warning_count=len(caught)),
        seed=args.seed)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "simulate.json", "w") as fh:
            _dump_json(payload, fh)
    _print_report(args, payload, [
        f"samples: {stats.n_samples}  dt: {dt:.6g}  burn-in: {cfg.burn_in}",
        "empirical covariance =", np.array2string(stats.empirical_cov, precision=6),
        "analytic M =", np.array2string(outcome.M, precision=6),
        f"relative Frobenius error: {err:.4%}",
        f"warnings: {len(caught)}",
    ])
    return 0


def cmd_lqg_check(args):
    _check_common(args)
    if not args.k > 0:
        raise InputError("lqg-check needs k > 0")
    model = qbm_model(args.T)
    res = qbm_pointer_basis(args.T, args.eps)
    design = FeedbackDesign(args.k, args.eps, res.tau_mix_star)
    eq = lqg_equivalence(model, res.omega_star, design)
    rec = eq.to_record()
    rec["P_min_eigenvalue"] = float(np.linalg.eigvalsh(eq.P_cost)[0])
    rec["Q_min_eigenvalue"] = float(np.linalg.eigvalsh(eq.Q_cost)[0])
    rec["tau_star"] = res.tau_mix_star
    payload = _record({"T": args.T, "eps": args.eps, "k": args.k}, rec)
    _print_report(args, payload, [
        f"relative gain deviation ||Q^-1 Y - K|| / ||K||: {eq.deviation:.6g}",
        f"cheap-control residual ||P - Y Q^-1 Y|| / ||P||: {eq.cheap_control_residual:.6g}",
        f"Riccati residual: {eq.care_residual:.3g}",
    ])
    return 0


FIG6_PANELS = {"fig6a": (0.1, 1000.0, 10.0), "fig6b": (0.1, 5000.0, 10.0),
               "fig6c": (0.2, 1000.0, 5.0), "fig6d": (0.2, 1000.0, 10.0)}


def cmd_figures(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.grid < 2 or args.beta_points < 2 or args.T_points < 2:
        raise InputError("grid sizes must be at least 2")
    written = []

    def table(name, header, rows):
        with open(out / f"{name}.csv", "w", newline="") as fh:
            w = CSVWriter(fh, header)
            for r in rows:
                w.row(r)
        written.append(f"{name}.csv")

    # fig4*: pointer basis against temperature
    Ts = np.geomspace(100.0, 1e4, args.T_points)
    for eps, (pb, pt) in ((0.1, ("fig4a", "fig4b")), (0.2, ("fig4c", "fig4d"))):
        res = pointer_basis_sweep(Ts, eps, workers=args.workers)
        rows = [[T, eps, r.beta_star, r.gamma_star, r.tau_mix_star, r.omega_rate]
                for T, r in zip(Ts, res)]
        table(pb, POINTER_HEADER, rows)
        table(pt, POINTER_HEADER, rows)

    # fig5*: PR region and mixing time over it at T = 100
    T = 100.0
    bb = np.linspace(0.0, 16.0 * T, args.beta_points)
    table("fig5a", ["beta", "gamma_boundary"],
          ([b, boundary_gamma(b, T)] for b in bb))
    betas = np.linspace(0.0, 16.0 * T, args.grid)
    gmax = max(boundary_gamma(b, T) for b in betas)
    gammas = np.linspace(gmax / args.grid, gmax, args.grid)
    tasks = [(float(b), gammas, T, 0.1) for b in betas]
    table("fig5b", SCAN_HEADER,
          (r for rows in ordered_imap(_scan_column, tasks, args.workers) for r in rows))

    # fig6*, fig7*: feedback along the boundary
    betas = np.linspace(0.0, 30.0, args.beta_points)
    for name, (eps, T, k) in FIG6_PANELS.items():
        rows = feedback_rows(T, eps, k, betas, with_sur=True, workers=args.workers)
        table(name, FIGURE_FEEDBACK_HEADER,
              ([r[h] if h != "infidelity" else r["infidelity_exact"]
                for h in FIGURE_FEEDBACK_HEADER] for r in rows))
    T = 1000.0
    r2 = list(feedback_rows(T, 0.5, 2.0, betas, with_sur=True, workers=args.workers))
    r10 = list(feedback_rows(T, 0.5, 10.0, betas, with_sur=False, workers=args.workers))
    table("fig7a", ["beta", "gamma", "tau_mix", "tau_sur", "infidelity_k2", "infidelity_k10"],
          ([a["beta"], a["gamma"], a["tau_mix"], a["tau_sur"], a["infidelity_exact"],
            c["infidelity_exact"]] for a, c in zip(r2, r10)))
    rows = feedback_rows(T, 0.1, 2.0, betas, with_sur=True, workers=args.workers)
    table("fig7b", FIGURE_FEEDBACK_HEADER,
          ([r[h] if h != "infidelity" else r["infidelity_exact"]
            for h in FIGURE_FEEDBACK_HEADER] for r in rows))

    payload = _record({"grid": args.grid, "beta_points": args.beta_points,
                       "T_points": args.T_points}, {"files": written})
    _print_report(args, payload, [f"wrote {out / f}" for f in written])
    return 0


def main(argv=None):
    try:
        args = parse_args(argv)
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
