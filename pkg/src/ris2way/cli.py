"""Experiment runner.

Subcommands sweep transmit power (or element count), dispatch to the
analytic / Monte Carlo / optimization layers, and write RFC-4180-style CSV
(plus optional SVG line plots).  Powers are dBm and thresholds dB at this
boundary only; everything inside is linear milliwatts.

A flat key=value config file can pre-set any long flag of the chosen
subcommand; explicit flags override the file.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

from . import analytic, mc
from . import rng as rngmod
from .channel import (Reciprocity, Scheme, SystemConfig, UniformPhaseError,
                      VonMisesPhaseError, sample_channels, sinr_budget)
from .mc import NoCrossoverError
from .numerics import NonConvergenceError, regularized_gamma_q
from .optim import OptimMethod, SolverFailureError, solve_maxmin
from .svgplot import write_line_svg

OUTAGE_METHODS = ("mc", "exact", "gamma", "clt", "asymptotic", "phase-error")
SE_METHODS = ("mc", "exact", "gamma", "asymptotic", "phase-error")
OPT_METHODS = ("sdp", "greedy", "u1", "random")
CROSSOVER_METHODS = ("analytic", "mc")

PRESETS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8")


class SpecError(ValueError):
    """Invalid experiment description."""


@dataclass
class ExperimentSpec:
    command: str
    p_dbm: list[float] = field(default_factory=list)
    l_list: list[int] = field(default_factory=list)
    methods: list[str] = field(default_factory=list)
    cfg: SystemConfig = field(default_factory=lambda: SystemConfig(L=1))
    out: str = "out.csv"
    seed: int = 0
    trials: Optional[int] = None
    user: object = 1
    workers: int = 1
    svg: bool = False
    preset: str = ""
    trials_outage: int = 10**5
    trials_se: int = 10**3
    trials_opt: int = 50


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def parse_sweep(text: str) -> list[float]:
    """START:STOP:STEP in dBm, inclusive of STOP up to float fuzz."""
    try:
        start, stop, step = (float(tok) for tok in text.split(":"))
    except ValueError as exc:
        raise SpecError(f"bad sweep {text!r}, expected START:STOP:STEP") from exc
    if step <= 0 or stop < start:
        raise SpecError(f"bad sweep {text!r}: need STOP >= START and STEP > 0")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(n)]


def parse_phase_error(text: str):
    if text in ("none", ""):
        return None
    kind, _, rest = text.partition(":")
    try:
        if kind == "uniform":
            return UniformPhaseError(float(rest))
        if kind == "vonmises":
            mu, kappa = (float(t) for t in rest.split(","))
            return VonMisesPhaseError(mu, kappa)
    except ValueError as exc:
        raise SpecError(f"bad phase error spec {text!r}") from exc
    raise SpecError(f"bad phase error spec {text!r}: "
                    "use none, uniform:DELTA, or vonmises:MU,KAPPA")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, metavar="FILE",
                   help="flat key=value file pre-setting any long flag; flags override")
    p.add_argument("-L", "--L", "--elements", dest="elements", type=int, default=1,
                   metavar="L", help="number of reflecting elements (count)")
    p.add_argument("--sigma2", type=float, default=1.0,
                   help="per-coefficient channel variance, linear")
    p.add_argument("--noise-dbm", type=float, default=-70.0,
                   help="receiver noise power [dBm]")
    p.add_argument("--omega", type=float, default=1e-4,
                   help="loop-interference coefficient (linear, interference = omega * P^nu mW)")
    p.add_argument("--nu", type=float, default=0.0,
                   help="loop-interference power exponent, in [0, 1]")
    p.add_argument("--scheme", choices=[s.value for s in Scheme], default="one",
                   help="one: single-slot bidirectional; two: two one-way slots (half rate)")
    p.add_argument("--reciprocity", choices=[r.value for r in Reciprocity],
                   default="reciprocal")
    p.add_argument("--gamma-th-db", type=float, default=0.0,
                   help="SINR outage threshold [dB]")
    p.add_argument("--phase-error", default="none",
                   help="none | uniform:DELTA | vonmises:MU,KAPPA (radians)")
    p.add_argument("--seed", type=int, default=0, help="base RNG seed")
    p.add_argument("--workers", type=int,
                   default=int(os.environ.get("RIS2WAY_WORKERS", "1")),
                   help="Monte Carlo worker processes (default $RIS2WAY_WORKERS or 1)")
    p.add_argument("--out", default="out.csv", help="output CSV path (or prefix)")
    p.add_argument("--svg", action="store_true",
                   help="also write an SVG line plot next to each CSV")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ris2way",
        description="Two-way reflecting-surface link experiments: outage, spectral "
                    "efficiency, max-min phase optimization, scheme crossover.")
    sub = ap.add_subparsers(dest="command", required=True)

    p_out = sub.add_parser("outage", help="outage probability sweep")
    _add_config_flags(p_out)
    p_out.add_argument("--p-dbm", default="-10:30:2", help="power sweep START:STOP:STEP [dBm]")
    p_out.add_argument("--l-list", default="", help="sweep element counts instead (comma list)")
    p_out.add_argument("--method", "--methods", dest="methods", default="mc,exact",
                       help=f"comma list from {','.join(OUTAGE_METHODS)}")
    p_out.add_argument("--trials", type=int, default=10**5)
    p_out.add_argument("--user", default="1", help="1, 2, or min")
    p_out.add_argument("--policy", default=None,
                       help="phase policy for MC (default: optimal, or sdp/greedy/u1/random "
                            "for non-reciprocal channels)")

    p_se = sub.add_parser("se", help="average spectral efficiency sweep")
    _add_config_flags(p_se)
    p_se.add_argument("--p-dbm", default="-10:30:2")
    p_se.add_argument("--l-list", default="")
    p_se.add_argument("--method", "--methods", dest="methods", default="mc,exact",
                      help=f"comma list from {','.join(SE_METHODS)}")
    p_se.add_argument("--trials", type=int, default=10**3)
    p_se.add_argument("--user", default="1")
    p_se.add_argument("--policy", default=None)

    p_opt = sub.add_parser("optimize", help="per-instance max-min phase design")
    _add_config_flags(p_opt)
    p_opt.add_argument("--p-dbm", default="0:0:1", help="single power point [dBm]")
    p_opt.add_argument("--method", "--methods", dest="methods", default="sdp,greedy",
                       help=f"comma list from {','.join(OPT_METHODS)}")
    p_opt.add_argument("--trials", type=int, default=50, help="independent instances")
    p_opt.add_argument("--randomization-k", type=int, default=100)
    p_opt.add_argument("--greedy-grid", type=int, default=360)
    p_opt.add_argument("--sdp-tol", type=float, default=1e-4)
    p_opt.add_argument("--sdp-path", choices=("joint", "bisect"), default="joint",
                       help="relaxation search path (bisect is the level-search reference)")

    p_x = sub.add_parser("crossover", help="power where the one-slot scheme overtakes")
    _add_config_flags(p_x)
    p_x.add_argument("--p-dbm", default="-40:40:2", help="search grid [dBm]")
    p_x.add_argument("--l-list", default="", help="element counts to report (default: -L)")
    p_x.add_argument("--method", "--methods", dest="methods", default="analytic,mc",
                     help=f"comma list from {','.join(CROSSOVER_METHODS)}")
    p_x.add_argument("--trials", type=int, default=4000)
    p_x.add_argument("--user", default="1")

    p_rep = sub.add_parser("reproduce", help="bundled experiment presets")
    _add_config_flags(p_rep)
    p_rep.add_argument("preset", choices=PRESETS)
    p_rep.add_argument("--trials-outage", type=int, default=10**5)
    p_rep.add_argument("--trials-se", type=int, default=10**3)
    p_rep.add_argument("--trials-opt", type=int, default=50)
    return ap


def _load_config_args(path: str) -> list[str]:
    out = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, sep, value = line.partition("=")
                if not sep:
                    raise SpecError(f"config line without '=': {line!r}")
                flag = "--" + key.strip().replace("_", "-")
                value = value.strip()
                if value.lower() in ("true", "false"):  # boolean flags
                    if value.lower() == "true":
                        out.append(flag)
                else:
                    out.extend([flag, value])
    except OSError as exc:
        raise SpecError(f"cannot read config file {path!r}: {exc}") from exc
    return out


def _merge_negative_values(tokens: list[str]) -> list[str]:
    """Turn ["--p-dbm", "-40:40:2"] into ["--p-dbm=-40:40:2"] so argparse does
    not mistake negative values for flags."""
    out = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        nxt = tokens[i + 1] if i + 1 < len(tokens) else None
        if (tok.startswith("--") and "=" not in tok and nxt is not None
                and len(nxt) > 1 and nxt[0] == "-" and nxt[1].isdigit()):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def parse_args(argv: list[str]) -> argparse.Namespace:
    if not argv:
        build_parser().parse_args(argv)  # raises with usage
    command, rest = argv[0], list(argv[1:])
    if "--config" in rest:
        i = rest.index("--config")
        try:
            path = rest[i + 1]
        except IndexError:
            raise SpecError("--config needs a file path") from None
        file_args = _load_config_args(path)
        rest = file_args + rest  # flags after the file override it
    return build_parser().parse_args([command] + _merge_negative_values(rest))


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    cfg = SystemConfig(
        L=args.elements,
        sigma2=args.sigma2,
        noise_mw=db_to_linear(args.noise_dbm),
        omega=args.omega,
        nu=args.nu,
        scheme=Scheme(args.scheme),
        reciprocity=Reciprocity(args.reciprocity),
        gamma_th=db_to_linear(args.gamma_th_db),
        phase_error=parse_phase_error(args.phase_error),
    )
    user = getattr(args, "user", "1")
    user = user if user == "min" else int(user)
    l_list = [int(t) for t in getattr(args, "l_list", "").split(",") if t]
    spec = ExperimentSpec(
        command=args.command,
        p_dbm=parse_sweep(args.p_dbm) if hasattr(args, "p_dbm") else [],
        l_list=l_list,
        methods=[m for m in getattr(args, "methods", "").split(",") if m],
        cfg=cfg,
        out=args.out,
        seed=args.seed,
        trials=getattr(args, "trials", None),
        user=user,
        workers=max(1, args.workers),
        svg=args.svg,
        preset=getattr(args, "preset", ""),
        trials_outage=getattr(args, "trials_outage", 10**5),
        trials_se=getattr(args, "trials_se", 10**3),
        trials_opt=getattr(args, "trials_opt", 50),
    )
    for extra in ("randomization_k", "greedy_grid", "sdp_tol", "sdp_path", "policy"):
        if hasattr(args, extra):
            setattr(spec, extra, getattr(args, extra))
    return spec


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------

def fmt_prob(x: float) -> str:
    return f"{x:.10e}"


def fmt_val(x: float) -> str:
    return f"{x:.10g}"


def write_csv(path: str, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _maybe_svg(spec: ExperimentSpec, path: str, header: list[str],
               rows: list[list[str]], log_y: bool, y_label: str) -> None:
    if not spec.svg or len(rows) < 2:
        return
    x = [float(r[0]) for r in rows]
    series = {}
    for j, name in enumerate(header[1:], start=1):
        if name.startswith("stderr"):
            continue
        vals = [float(r[j]) for r in rows]
        series[name] = vals
    write_line_svg(os.path.splitext(path)[0] + ".svg", x, series, log_y=log_y,
                   title=os.path.basename(path), x_label=header[0], y_label=y_label)


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------

def _default_policy(spec: ExperimentSpec) -> str:
    policy = getattr(spec, "policy", None)
    if policy:
        return policy
    return ("optimal" if spec.cfg.reciprocity is Reciprocity.RECIPROCAL else "greedy")


def _validate_methods(spec: ExperimentSpec, allowed: tuple[str, ...]) -> None:
    if not spec.methods:
        raise SpecError("no methods requested")
    for m in spec.methods:
        if m not in allowed:
            raise SpecError(f"method {m!r} not valid for {spec.command!r} "
                            f"(allowed: {', '.join(allowed)})")
    if spec.cfg.reciprocity is Reciprocity.NON_RECIPROCAL:
        for m in spec.methods:
            if m in ("exact", "gamma", "clt", "asymptotic", "phase-error"):
                raise SpecError(f"analytic method {m!r} applies to reciprocal channels")


def _sweep_axis(spec: ExperimentSpec) -> tuple[str, list]:
    if len(spec.l_list) > 1:
        if len(spec.p_dbm) != 1:
            raise SpecError("an element-count sweep needs a single power point")
        return "L", spec.l_list
    if not spec.p_dbm:
        raise SpecError("empty power sweep")
    return "p_dbm", spec.p_dbm


def _metric_analytic(spec: ExperimentSpec, method: str, cfg: SystemConfig,
                     metric: str) -> float:
    budget = sinr_budget(cfg)
    rho = budget.rho1 if spec.user in (1, "min") else budget.rho2
    half = cfg.scheme is Scheme.TWO
    params = analytic.gamma_approx_params(cfg.sigma2)
    if metric == "outage":
        if method == "exact":
            if cfg.L != 1:
                raise SpecError("method 'exact' is the single-element law (L=1)")
            return float(analytic.outage_exact_L1(cfg.gamma_th, rho, cfg.sigma2))
        if method == "gamma":
            if cfg.L < 2:
                raise SpecError("method 'gamma' needs L >= 2")
            return float(analytic.outage_gamma_Lge2(cfg.L, cfg.gamma_th, rho, params))
        if method == "clt":
            return float(analytic.outage_clt(cfg.L, cfg.gamma_th, rho,
                                             analytic.clt_params(cfg.L, cfg.sigma2)))
        if method == "asymptotic":
            return analytic.asymptotic_outage(cfg.L, cfg.gamma_th, cfg.p1_mw,
                                              cfg.omega, cfg.nu, cfg.noise_mw,
                                              cfg.sigma2)
        if method == "phase-error":
            return float(analytic.outage_phase_error_uniform_pi(
                cfg.L, cfg.gamma_th, rho, cfg.sigma2))
    else:
        if method == "exact":
            if cfg.L != 1:
                raise SpecError("method 'exact' is the single-element law (L=1)")
            return analytic.se_exact_L1(rho, cfg.sigma2, half_rate=half)
        if method == "gamma":
            if cfg.L < 2:
                raise SpecError("method 'gamma' needs L >= 2")
            return analytic.se_gamma(cfg.L, rho, params, half_rate=half)
        if method == "asymptotic":
            return analytic.asymptotic_se(cfg.L, cfg.p1_mw, cfg.omega, cfg.nu,
                                          cfg.noise_mw, cfg.sigma2, cfg.scheme)
        if method == "phase-error":
            return analytic.se_phase_error_uniform_pi(cfg.L, rho, cfg.sigma2,
                                                      half_rate=half)
    raise SpecError(f"method {method!r} not implemented for {metric}")


def run_sweep_command(spec: ExperimentSpec, metric: str) -> None:
    allowed = OUTAGE_METHODS if metric == "outage" else SE_METHODS
    _validate_methods(spec, allowed)
    axis_name, axis = _sweep_axis(spec)
    policy = _default_policy(spec)
    fmt_metric = fmt_prob if metric == "outage" else fmt_val

    header = [axis_name]
    for m in spec.methods:
        header.append(f"{metric}_{m}")
        if m == "mc":
            header.append("stderr_mc")

    mc_fn = mc.outage_curve if metric == "outage" else mc.se_curve
    table: list[list[str]] = []
    if axis_name == "p_dbm":
        cfgs = [spec.cfg.with_power(db_to_linear(p)) for p in axis]
        mc_cache = {}
        if "mc" in spec.methods:
            est = mc_fn(spec.cfg, axis, policy=policy, trials=spec.trials,
                        seed=spec.seed, user=spec.user, workers=spec.workers,
                        optim_kwargs=_optim_kwargs(spec))
            mc_cache = dict(zip(axis, est))
        for p, cfg in zip(axis, cfgs):
            row = [fmt_val(p)]
            for m in spec.methods:
                if m == "mc":
                    e = mc_cache[p]
                    row.extend([fmt_metric(e.value), fmt_prob(e.std_error)])
                else:
                    row.append(fmt_metric(_metric_analytic(spec, m, cfg, metric)))
            table.append(row)
    else:
        p_mw = db_to_linear(spec.p_dbm[0])
        for L in axis:
            cfg = dataclasses.replace(spec.cfg, L=L).with_power(p_mw)
            row = [str(L)]
            for m in spec.methods:
                if m == "mc":
                    fn = mc.estimate_outage if metric == "outage" else mc.estimate_se
                    e = fn(cfg, policy=policy, trials=spec.trials, seed=spec.seed,
                           user=spec.user, workers=spec.workers,
                           optim_kwargs=_optim_kwargs(spec))
                    row.extend([fmt_metric(e.value), fmt_prob(e.std_error)])
                else:
                    row.append(fmt_metric(_metric_analytic(spec, m, cfg, metric)))
            table.append(row)
    write_csv(spec.out, header, table)
    _maybe_svg(spec, spec.out, header, table, log_y=(metric == "outage"),
               y_label="outage probability" if metric == "outage" else "bits/sec/Hz")


def _optim_kwargs(spec: ExperimentSpec) -> dict:
    return {
        "randomization_k": getattr(spec, "randomization_k", 100),
        "greedy_grid": getattr(spec, "greedy_grid", 360),
        "sdp_tol": getattr(spec, "sdp_tol", 1e-4),
        "sdp_path": getattr(spec, "sdp_path", "joint"),
    }


def run_optimize(spec: ExperimentSpec) -> None:
    _validate_methods(spec, OPT_METHODS)
    if spec.cfg.reciprocity is not Reciprocity.NON_RECIPROCAL:
        raise SpecError("optimize works on non-reciprocal channels "
                        "(pass --reciprocity non-reciprocal)")
    if len(spec.p_dbm) != 1:
        raise SpecError("optimize needs a single power point")
    cfg = spec.cfg.with_power(db_to_linear(spec.p_dbm[0]))
    budget = sinr_budget(cfg)
    kwargs = _optim_kwargs(spec)

    header = ["trial"]
    if "sdp" in spec.methods:
        header.append("t_star")
    for m in spec.methods:
        header.extend([f"gamma1_{m}", f"gamma2_{m}", f"min_{m}"])

    rows = []
    for trial in range(spec.trials):
        ch = sample_channels(cfg, rngmod.trial_generator(spec.seed, rngmod.STREAM_CHANNEL, trial))
        row = [str(trial)]
        results = {}
        t_star = None
        for m in spec.methods:
            stream = (rngmod.STREAM_BASELINE if m in ("u1", "random")
                      else rngmod.STREAM_OPTIM)
            rng = rngmod.trial_generator(spec.seed, stream, trial)
            res = solve_maxmin(ch, budget, method=OptimMethod(m), rng=rng, **kwargs)
            results[m] = res
            if m == "sdp":
                t_star = res.t_star
        if "sdp" in spec.methods:
            row.append(fmt_val(t_star))
        for m in spec.methods:
            g1, g2 = results[m].achieved
            row.extend([fmt_val(g1), fmt_val(g2), fmt_val(min(g1, g2))])
        rows.append(row)
    write_csv(spec.out, header, rows)


def run_crossover(spec: ExperimentSpec) -> None:
    if not spec.methods or any(m not in CROSSOVER_METHODS for m in spec.methods):
        raise SpecError(f"crossover methods must come from {', '.join(CROSSOVER_METHODS)}")
    if spec.cfg.reciprocity is not Reciprocity.RECIPROCAL:
        raise SpecError("the scheme-crossover comparison is defined on reciprocal channels")
    l_values = spec.l_list or [spec.cfg.L]
    header = ["L"] + [f"crossover_{m}_dbm" for m in spec.methods]
    rows = []
    for L in l_values:
        cfg = dataclasses.replace(spec.cfg, L=L)
        row = [str(L)]
        for m in spec.methods:
            if m == "analytic":
                p_mw = analytic.scheme_crossover_power(L, cfg.omega, cfg.nu,
                                                       cfg.noise_mw, cfg.sigma2)
                row.append(f"{10.0 * math.log10(p_mw):.6f}")
            else:
                p_dbm = mc.find_crossover(cfg, spec.p_dbm, policy="optimal",
                                          trials=spec.trials, seed=spec.seed,
                                          user=spec.user, workers=spec.workers)
                row.append(f"{p_dbm:.6f}")
        rows.append(row)
    write_csv(spec.out, header, rows)


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def _preset_out(spec: ExperimentSpec, name: str) -> str:
    base, ext = os.path.splitext(spec.out)
    prefix = base if ext.lower() == ".csv" else spec.out
    return f"{prefix}_{name}.csv"


def run_reproduce(spec: ExperimentSpec) -> None:
    fn = {
        "fig2": _preset_fig2, "fig3": _preset_fig3, "fig4": _preset_fig4,
        "fig5": _preset_fig5, "fig6": _preset_fig6, "fig7": _preset_fig7,
        "fig8": _preset_fig8,
    }[spec.preset]
    for name, (header, rows, log_y, ylab) in fn(spec).items():
        path = _preset_out(spec, name)
        write_csv(path, header, rows)
        _maybe_svg(spec, path, header, rows, log_y=log_y, y_label=ylab)


def _preset_fig2(spec: ExperimentSpec) -> dict:
    # (a) divergence of the gamma fit vs sigma; (b) per-element cascade CCDF
    sigmas = [0.05 * (25 / 0.05) ** (i / 24) for i in range(25)]
    rows_a = [[fmt_val(s), fmt_prob(analytic.kl_divergence_gamma_fit(s * s))]
              for s in sigmas]
    out = {"a_kl": (["sigma", "kl_divergence"], rows_a, False, "KL divergence")}

    ts = [0.05 * i for i in range(1, 81)]
    header = ["t"]
    cols = []
    for s2 in (0.1, 1.0, 10.0):
        header.extend([f"ccdf_exact_s{s2:g}", f"ccdf_gamma_s{s2:g}"])
        params = analytic.gamma_approx_params(s2)
        exact = [1.0 - float(analytic.outage_exact_L1(t * t, 1.0, s2)) for t in ts]
        gam = [float(regularized_gamma_q(params.k, t / params.theta)) for t in ts]
        cols.append((exact, gam))
    rows_b = []
    for i, t in enumerate(ts):
        row = [fmt_val(t)]
        for exact, gam in cols:
            row.extend([fmt_prob(exact[i]), fmt_prob(gam[i])])
        rows_b.append(row)
    out["b_ccdf"] = (header, rows_b, True, "CCDF")
    return out


def _base_cfg(spec: ExperimentSpec, **over) -> SystemConfig:
    return dataclasses.replace(spec.cfg, **over)


def _preset_fig3(spec: ExperimentSpec) -> dict:
    grid = [float(p) for p in range(-10, 41, 2)]
    out = {}
    for metric, trials in (("outage", spec.trials_outage), ("se", spec.trials_se)):
        header = ["p_dbm"]
        columns = []
        for nu in (0.0, 1.0):
            cfg = _base_cfg(spec, L=1, nu=nu, reciprocity=Reciprocity.RECIPROCAL)
            mc_fn = mc.outage_curve if metric == "outage" else mc.se_curve
            est = mc_fn(cfg, grid, trials=trials, seed=spec.seed,
                        user=spec.user, workers=spec.workers)
            ana = []
            for p in grid:
                c = cfg.with_power(db_to_linear(p))
                rho = sinr_budget(c).rho1
                if metric == "outage":
                    ana.append(float(analytic.outage_exact_L1(c.gamma_th, rho, c.sigma2)))
                else:
                    ana.append(analytic.se_exact_L1(rho, c.sigma2))
            header.extend([f"{metric}_mc_nu{nu:g}", f"stderr_mc_nu{nu:g}",
                           f"{metric}_exact_nu{nu:g}"])
            columns.append((est, ana))
        # interference-free two-slot reference
        cfg2 = _base_cfg(spec, L=1, scheme=Scheme.TWO, reciprocity=Reciprocity.RECIPROCAL)
        ref = []
        for p in grid:
            c = cfg2.with_power(db_to_linear(p))
            rho = sinr_budget(c).rho1
            if metric == "outage":
                ref.append(float(analytic.outage_exact_L1(c.gamma_th, rho, c.sigma2)))
            else:
                ref.append(analytic.se_exact_L1(rho, c.sigma2, half_rate=True))
        header.append(f"{metric}_exact_twoslot")
        fmt_m = fmt_prob if metric == "outage" else fmt_val
        rows = []
        for i, p in enumerate(grid):
            row = [fmt_val(p)]
            for est, ana in columns:
                row.extend([fmt_m(est[i].value), fmt_prob(est[i].std_error), fmt_m(ana[i])])
            row.append(fmt_m(ref[i]))
            rows.append(row)
        out[metric] = (header, rows, metric == "outage",
                       "outage probability" if metric == "outage" else "bits/sec/Hz")
    return out


def _preset_fig4(spec: ExperimentSpec) -> dict:
    # each doubling of L shifts the outage waterfall ~12 dB down; span them all
    grid = [float(p) for p in range(-80, 31, 2)]
    header = ["p_dbm"]
    rows = [[fmt_val(p)] for p in grid]
    for L in (2, 4, 16, 32, 64):
        cfg = _base_cfg(spec, L=L, nu=0.0, reciprocity=Reciprocity.RECIPROCAL)
        est = mc.outage_curve(cfg, grid, trials=spec.trials_outage, seed=spec.seed,
                              user=spec.user, workers=spec.workers)
        params = analytic.gamma_approx_params(cfg.sigma2)
        clt = analytic.clt_params(L, cfg.sigma2)
        header.extend([f"outage_mc_L{L}", f"stderr_mc_L{L}",
                       f"outage_gamma_L{L}", f"outage_clt_L{L}"])
        for i, p in enumerate(grid):
            rho = sinr_budget(cfg.with_power(db_to_linear(p))).rho1
            rows[i].extend([
                fmt_prob(est[i].value), fmt_prob(est[i].std_error),
                fmt_prob(float(analytic.outage_gamma_Lge2(L, cfg.gamma_th, rho, params))),
                fmt_prob(float(analytic.outage_clt(L, cfg.gamma_th, rho, clt))),
            ])
    return {"outage": (header, rows, True, "outage probability")}


def _preset_fig5(spec: ExperimentSpec) -> dict:
    # low enough to show every scheme-crossover at the default noise level
    grid = [float(p) for p in range(-50, 41, 2)]
    out = {}
    for nu, name in ((0.0, "a_nu0"), (1.0, "b_nu1")):
        header = ["p_dbm"]
        rows = [[fmt_val(p)] for p in grid]
        for L in (2, 16, 64):
            for scheme in (Scheme.ONE, Scheme.TWO):
                if scheme is Scheme.TWO and nu == 1.0 and L != 2:
                    continue  # two-slot curves identical across nu; keep one panel light
                cfg = _base_cfg(spec, L=L, nu=nu, scheme=scheme,
                                reciprocity=Reciprocity.RECIPROCAL)
                est = mc.se_curve(cfg, grid, trials=spec.trials_se, seed=spec.seed,
                                  user=spec.user, workers=spec.workers)
                params = analytic.gamma_approx_params(cfg.sigma2)
                tag = f"L{L}_{scheme.value}"
                header.extend([f"se_mc_{tag}", f"stderr_mc_{tag}", f"se_gamma_{tag}"])
                for i, p in enumerate(grid):
                    rho = sinr_budget(cfg.with_power(db_to_linear(p))).rho1
                    rows[i].extend([
                        fmt_val(est[i].value), fmt_prob(est[i].std_error),
                        fmt_val(analytic.se_gamma(L, rho, params,
                                                  half_rate=scheme is Scheme.TWO)),
                    ])
        out[name] = (header, rows, False, "bits/sec/Hz")
    return out


def _preset_fig6(spec: ExperimentSpec) -> dict:
    deltas = (math.pi / 8, math.pi / 4, math.pi / 2, math.pi)
    out = {}
    grid = [float(p) for p in range(-20, 31, 2)]
    for metric, l_values, trials in (("outage", (4, 16), spec.trials_outage),
                                     ("se", (4, 32), spec.trials_se)):
        header = ["p_dbm"]
        rows = [[fmt_val(p)] for p in grid]
        fmt_m = fmt_prob if metric == "outage" else fmt_val
        for L in l_values:
            for delta in deltas:
                cfg = _base_cfg(spec, L=L, nu=0.0, reciprocity=Reciprocity.RECIPROCAL,
                                phase_error=UniformPhaseError(delta))
                mc_fn = mc.outage_curve if metric == "outage" else mc.se_curve
                est = mc_fn(cfg, grid, trials=trials, seed=spec.seed,
                            user=spec.user, workers=spec.workers)
                tag = f"L{L}_d{delta:.3f}"
                header.extend([f"{metric}_mc_{tag}", f"stderr_mc_{tag}"])
                for i in range(len(grid)):
                    rows[i].extend([fmt_m(est[i].value), fmt_prob(est[i].std_error)])
            # exact laws: fully scrambled and error-free references
            cfg0 = _base_cfg(spec, L=L, nu=0.0, reciprocity=Reciprocity.RECIPROCAL,
                             phase_error=None)
            header.extend([f"{metric}_scrambled_L{L}", f"{metric}_errorfree_L{L}"])
            params = analytic.gamma_approx_params(cfg0.sigma2)
            for i, p in enumerate(grid):
                rho = sinr_budget(cfg0.with_power(db_to_linear(p))).rho1
                if metric == "outage":
                    scr = float(analytic.outage_phase_error_uniform_pi(L, cfg0.gamma_th,
                                                                       rho, cfg0.sigma2))
                    free = float(analytic.outage_gamma_Lge2(L, cfg0.gamma_th, rho, params))
                else:
                    scr = analytic.se_phase_error_uniform_pi(L, rho, cfg0.sigma2)
                    free = analytic.se_gamma(L, rho, params)
                rows[i].extend([fmt_m(scr), fmt_m(free)])
        out[metric] = (header, rows, metric == "outage",
                       "outage probability" if metric == "outage" else "bits/sec/Hz")
    return out


def _preset_fig7(spec: ExperimentSpec) -> dict:
    omegas = [10.0 ** (-12 + idx * 0.5) for idx in range(17)]
    out = {}
    for nu, name in ((0.0, "a_nu0"), (1.0, "b_nu1")):
        header = ["omega"] + [f"p_boundary_L{L}_dbm" for L in (1, 2, 16, 64)]
        rows = []
        for w in omegas:
            row = [fmt_prob(w)]
            for L in (1, 2, 16, 64):
                p_mw = analytic.scheme_crossover_power(L, w, nu, spec.cfg.noise_mw,
                                                       spec.cfg.sigma2)
                row.append(f"{10.0 * math.log10(p_mw):.6f}")
            rows.append(row)
        out[name] = (header, rows, False, "boundary power [dBm]")
    return out


def _preset_fig8(spec: ExperimentSpec) -> dict:
    grid = [float(p) for p in range(-10, 11, 2)]
    out = {}
    # (a) per-user rates of the max-min methods and baselines at L=8
    cfg = _base_cfg(spec, L=8, nu=0.0, reciprocity=Reciprocity.NON_RECIPROCAL)
    header = ["p_dbm"]
    rows = [[fmt_val(p)] for p in grid]
    for policy in ("sdp", "greedy", "u1", "random"):
        gains = mc.collect_gains(cfg, policy, spec.trials_opt, spec.seed,
                                 spec.workers, _optim_kwargs(spec))
        for user in (1, 2):
            header.extend([f"se_mc_{policy}_u{user}", f"stderr_mc_{policy}_u{user}"])
            for i, p in enumerate(grid):
                e = mc.se_from_gains(cfg.with_power(db_to_linear(p)), gains,
                                     spec.seed, user)
                rows[i].extend([fmt_val(e.value), fmt_prob(e.std_error)])
    out["a_methods"] = (header, rows, False, "bits/sec/Hz")

    # (b) reciprocal optimum vs non-reciprocal max-min across element counts
    header_b = ["p_dbm"]
    rows_b = [[fmt_val(p)] for p in grid]
    for L in (1, 2, 4, 16):
        rec = mc.se_curve(_base_cfg(spec, L=L, reciprocity=Reciprocity.RECIPROCAL),
                          grid, trials=spec.trials_se, seed=spec.seed, user=1,
                          workers=spec.workers)
        non = mc.se_curve(_base_cfg(spec, L=L, reciprocity=Reciprocity.NON_RECIPROCAL),
                          grid, policy="greedy", trials=spec.trials_opt,
                          seed=spec.seed, user=1, workers=spec.workers,
                          optim_kwargs=_optim_kwargs(spec))
        header_b.extend([f"se_mc_rec_L{L}", f"stderr_mc_rec_L{L}",
                         f"se_mc_nonrec_L{L}", f"stderr_mc_nonrec_L{L}"])
        for i in range(len(grid)):
            rows_b[i].extend([fmt_val(rec[i].value), fmt_prob(rec[i].std_error),
                              fmt_val(non[i].value), fmt_prob(non[i].std_error)])
    out["b_reciprocity_gap"] = (header_b, rows_b, False, "bits/sec/Hz")
    return out


def run(spec: ExperimentSpec) -> int:
    """Execute one experiment; returns a process exit code."""
    try:
        if spec.command == "outage":
            run_sweep_command(spec, "outage")
        elif spec.command == "se":
            run_sweep_command(spec, "se")
        elif spec.command == "optimize":
            run_optimize(spec)
        elif spec.command == "crossover":
            run_crossover(spec)
        elif spec.command == "reproduce":
            run_reproduce(spec)
        else:
            raise SpecError(f"unknown command {spec.command!r}")
    except (SpecError, ValueError) as exc:
        print(f"ris2way: invalid spec: {exc}", file=sys.stderr)
        return 2
    except SolverFailureError as exc:
        print(f"ris2way: solver failure: {exc}", file=sys.stderr)
        return 3
    except NonConvergenceError as exc:
        print(f"ris2way: quadrature did not converge: {exc}", file=sys.stderr)
        return 4
    except NoCrossoverError as exc:
        print(f"ris2way: {exc}", file=sys.stderr)
        return 5
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
        spec = spec_from_args(args)
    except SpecError as exc:
        print(f"ris2way: invalid spec: {exc}", file=sys.stderr)
        return 2
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
