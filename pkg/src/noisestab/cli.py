"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 convergence failure, 4 property-suite failure.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .errors import DegreeTooLarge, NoiseStabError, NotConverged
from .experiments import FamilySpec, SWEEP_COLUMNS, run_family_sweep, run_property_suite
from .interval_sets import IntervalUnion, format_set, gaussian_measure, parse_set
from .output import RunManifest, csv_text, dumps, write_csv
from .quadrature import QuadratureConfig
from .sde_lab import (
    CHUNK_PATHS,
    PathConfig,
    mc_stability_from_summary,
    qv_ensemble_report,
    sample_ensemble,
    simulate_ensemble,
)
from .spectral import spectrum
from .stability import (
    deficit,
    delta_metric,
    epsilon_metric,
    epsilon_tilde,
    noise_stability,
    q_stability,
    upper_integral,
)

EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE, EXIT_SUITE = 0, 2, 3, 4
EXPORT_HEADER = ("path", "t", "W", "S", "qA", "qv", "eps")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _set_arg(text: str) -> IntervalUnion:
    return parse_set(text)


def _grid(text: str) -> List[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty grid")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="noisestab", description="Gaussian noise stability of interval unions.")
    p.add_argument("--version", action="version", version=f"noisestab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, threads=False):
        sp.add_argument("--manifest", metavar="PATH", help="write a run manifest to PATH")
        if threads:
            sp.add_argument("--threads", type=int, default=1)

    c = sub.add_parser("compute", help="noise stability S_rho or S^q_rho of one set")
    c.add_argument("--set", required=True, dest="set_literal")
    c.add_argument("--rho", type=float, required=True)
    c.add_argument("--q", type=float, default=2.0)
    c.add_argument("--method", choices=("bvn", "quad", "spectral"), default=None,
                   help="default: bvn for q=2, quad otherwise")
    c.add_argument("--tol", type=float, default=1e-10)
    fmt = c.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_const", const="json", dest="fmt")
    fmt.add_argument("--csv", action="store_const", const="csv", dest="fmt")
    common(c)

    d = sub.add_parser("deficit", help="deficit and robustness report")
    d.add_argument("--set", required=True, dest="set_literal")
    d.add_argument("--rho", type=float, required=True)
    d.add_argument("--q", type=float, default=2.0)
    fmt = d.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_const", const="json", dest="fmt")
    fmt.add_argument("--csv", action="store_const", const="csv", dest="fmt")
    common(d)

    s = sub.add_parser("sweep", help="tightness-family sweep")
    s.add_argument("--family", required=True,
                   choices=("F1", "F2", "F3", "F1_shifted_sliver", "F2_far_tail", "F3_near_sliver"))
    s.add_argument("--eps-grid", type=_grid, required=True)
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--out", metavar="PATH", help="CSV table destination")
    common(s, threads=True)

    m = sub.add_parser("simulate", help="Monte Carlo martingale lab")
    m.add_argument("--set", required=True, dest="set_literal")
    m.add_argument("--rho", type=float, required=True)
    m.add_argument("--paths", type=int, default=10_000)
    m.add_argument("--steps", type=int, default=2000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--q", type=_grid, default=[2.0], help="comma-separated exponents >= 2")
    m.add_argument("--couple", action="store_true", help="report the half-line coupling clock")
    m.add_argument("--export", metavar="PATH", help="CSV of path values")
    m.add_argument("--export-mode", choices=("steps", "paths"), default="steps",
                   help="one row per (path, step) or per path at t = rho")
    common(m, threads=True)

    v = sub.add_parser("verify", help="seeded property suite")
    v.add_argument("--cases", type=int, default=100)
    v.add_argument("--seed", type=int, default=7)
    common(v, threads=True)

    h = sub.add_parser("spectrum", help="Hermite coefficients of the indicator")
    h.add_argument("--set", required=True, dest="set_literal")
    h.add_argument("--degree", type=int, required=True)
    common(h)

    r = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    r.add_argument("manifest_path")
    return p


# --- commands ---------------------------------------------------------------

class _Run:
    """Collects payload, exit status and manifest details for one command."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.status = EXIT_OK
        self.manifest = RunManifest(args.command, self.argv, __version__)

    def emit_json(self, payload) -> None:
        sys.stdout.write(dumps(payload) + "\n")

    def emit(self, payload: Dict, fmt: Optional[str]) -> None:
        if fmt == "csv":
            sys.stdout.write(csv_text(list(payload), [list(payload.values())]))
        else:
            self.emit_json(payload)


def _cmd_compute(run: _Run) -> None:
    a = run.args
    A = _set_arg(a.set_literal)
    method = a.method or ("bvn" if a.q == 2 else "quad")
    if a.q != 2 and method != "quad":
        raise NoiseStabError("q != 2 is only available with --method quad")
    cfg = QuadratureConfig(abs_tol=a.tol)
    try:
        if a.q == 2:
            kw = {"abs_tol": a.tol} if method == "spectral" else {}
            res = noise_stability(A, a.rho, method, cfg, **kw)
        else:
            res = q_stability(A, a.rho, a.q, cfg)
    except DegreeTooLarge as exc:
        res = exc.partial
        sys.stderr.write(f"noisestab: {exc}\n")
    if res is None or not res.converged:
        run.status = EXIT_CONVERGENCE
    run.manifest.tolerances["abs_tol"] = a.tol
    run.manifest.methods["value"] = res.method
    run.emit({"set": format_set(A), "rho": a.rho, "q": a.q, "value": res.value,
              "method": res.method, "error_estimate": res.error_estimate,
              "converged": res.converged}, a.fmt)


def _cmd_deficit(run: _Run) -> None:
    a = run.args
    A = _set_arg(a.set_literal)
    rho = a.rho
    g = gaussian_measure(A)
    eps = epsilon_metric(A)
    d = deficit(A, rho, a.q)
    ok = eps > 1e-14
    lower_expr = eps / abs(math.log(eps)) * math.sqrt(1.0 - rho) if ok else None
    upper_expr = eps / math.sqrt(1.0 - rho)
    payload = {
        "set": format_set(A), "rho": rho, "q": a.q, "gamma": g, "epsilon": eps,
        "delta": delta_metric(A), "epsilon_tilde": epsilon_tilde(A, rho), "deficit": d,
        "lower_expr": lower_expr, "upper_expr": upper_expr,
        "lower_ratio": d / lower_expr if ok else None,
        "upper_ratio": d / upper_expr if ok else None,
        "upper_I": upper_integral(A, rho),
        "hypothesis_ok": bool(ok and rho > 0 and eps < math.exp(-1.0 / rho)),
    }
    run.manifest.methods["deficit"] = "bvn_sum" if a.q == 2 else "quadrature"
    run.emit(payload, a.fmt)


def _cmd_sweep(run: _Run) -> None:
    a = run.args
    res = run_family_sweep(FamilySpec(a.family, a.eps_grid, a.rho), threads=a.threads)
    rows = [[r[c] for c in SWEEP_COLUMNS] for r in res.rows]
    if a.out:
        with open(a.out, "w", newline="", encoding="utf-8") as fh:
            write_csv(fh, SWEEP_COLUMNS, rows)
        run.manifest.outputs["table"] = a.out
    run.manifest.methods.update({"deficit": "bvn_sum", "epsilon_tilde": "quadrature"})
    run.emit_json({"family": res.family_id, "rho": res.rho, "columns": list(SWEEP_COLUMNS),
                   "rows": rows, "fits": res.fits})


def _export_paths(path: str, A, cfg: PathConfig, mode: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write_csv(fh, EXPORT_HEADER, [])
        for start in range(0, cfg.n_paths, CHUNK_PATHS):
            count = min(CHUNK_PATHS, cfg.n_paths - start)
            chunk = sample_ensemble(A, cfg, start, count)
            lines = []
            for k, p in enumerate(chunk):
                idx = np.arange(p.times.size) if mode == "steps" else [-1]
                for j in idx:
                    lines.append((start + k, p.times[j], p.w[j], p.s[j], p.q_at[j], p.qv[j], p.eps[j]))
            fh.write(csv_text(EXPORT_HEADER, lines).split("\n", 1)[1])


def _cmd_simulate(run: _Run) -> None:
    a = run.args
    A = _set_arg(a.set_literal)
    if any(q < 2 for q in a.q):
        raise NoiseStabError("simulate needs exponents q >= 2")
    cfg = PathConfig(a.rho, a.steps, a.paths, a.seed)
    summary = simulate_ensemble(A, cfg, qs=tuple(a.q), threads=a.threads)
    n = summary.n_paths
    mean = summary.s_step_sum[-1] / n
    z = summary.martingale_zscores()
    sd = float(np.std(summary.s_final, ddof=1)) if n > 1 else math.inf
    stab = []
    for q in a.q:
        mc = mc_stability_from_summary(summary, q)
        stab.append({"q": q, "direct": mc.direct.value, "direct_se": mc.direct.error_estimate,
                     "identity": mc.identity.value, "identity_se": mc.identity.error_estimate,
                     "quadrature": q_stability(A, a.rho, q).value})
    qv = qv_ensemble_report(summary)
    payload = {
        "set": format_set(A), "rho": a.rho, "n_paths": n, "n_steps": a.steps,
        "master_seed": a.seed, "gamma": summary.gamma,
        "martingale": {"mean_final": mean, "se_final": sd / math.sqrt(n),
                       "max_abs_z": float(np.max(np.abs(z)))},
        "stability": stab,
        "quadratic_variation": {"mean_relative_gap": qv.mean_relative_gap,
                                "mean_squared_relative_gap": qv.mean_squared_relative_gap},
        "min_eps": float(np.min(summary.min_eps)),
    }
    if a.couple:
        payload["coupling"] = {
            "lag_ok_fraction": float(np.mean(summary.lag_ok)),
            "min_gap_increment": float(np.min(summary.min_gap_increment)),
            "min_gap_final": float(np.min(summary.gap_final)),
        }
    if a.export:
        _export_paths(a.export, A, cfg, a.export_mode)
        run.manifest.outputs["paths"] = a.export
    run.manifest.seeds["master_seed"] = a.seed
    run.manifest.methods.update({"stability": "monte_carlo", "quadrature": "quadrature"})
    run.emit_json(payload)


def _cmd_verify(run: _Run) -> None:
    a = run.args
    rep = run_property_suite(a.seed, a.cases, threads=a.threads)
    run.manifest.seeds["master_seed"] = a.seed
    run.emit_json(rep.to_dict())
    if not rep.passed:
        run.status = EXIT_SUITE


def _cmd_spectrum(run: _Run) -> None:
    a = run.args
    A = _set_arg(a.set_literal)
    if a.degree < 0:
        raise NoiseStabError("--degree must be nonnegative")
    sp = spectrum(A, a.degree)
    run.emit_json({"set": format_set(A), "degree": a.degree,
                   "coefficients": list(sp.coefficients),
                   "tail_energy_bound": sp.tail_energy_bound})


_COMMANDS = {
    "compute": _cmd_compute,
    "deficit": _cmd_deficit,
    "sweep": _cmd_sweep,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
    "spectrum": _cmd_spectrum,
}


def cli_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_INPUT
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if args.command == "replay":
        try:
            manifest = RunManifest.read(args.manifest_path)
        except (OSError, ValueError, KeyError) as exc:
            sys.stderr.write(f"noisestab: cannot read manifest: {exc}\n")
            return EXIT_INPUT
        return cli_dispatch(manifest.argv)
    run = _Run(args, argv)
    t0 = time.perf_counter()
    try:
        _COMMANDS[args.command](run)
    except NotConverged as exc:
        sys.stderr.write(f"noisestab: {exc}\n")
        return EXIT_CONVERGENCE
    except (NoiseStabError, OSError) as exc:
        sys.stderr.write(f"noisestab: {exc}\n")
        return EXIT_INPUT
    run.manifest.wall_time_s = time.perf_counter() - t0
    targets = [args.manifest] if getattr(args, "manifest", None) else []
    targets += [p + ".manifest.json" for p in run.manifest.outputs.values()]
    for path in targets:
        run.manifest.write(path)
    return run.status


def main() -> None:
    sys.exit(cli_dispatch())
