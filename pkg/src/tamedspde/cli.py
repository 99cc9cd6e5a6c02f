"""Batch experiment front end.

Subcommands: ``converge`` (weak-error table and rate fit), ``table1``
(weak errors for four taming exponents), ``interface`` (mean interface
profiles), ``moments`` (norm monitors over time), ``verify`` (numerical
property suite).  Every run writes its CSV artifacts, the resolved
configuration, and a manifest sufficient to replay the run; replays are
byte-identical for a fixed master seed, whatever ``--threads`` says.

Exit codes: 0 success, 1 validation or property failure, 2 trajectory
blow-up, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    ErrorTable,
    StepTestFunction,
    fit_convergence_rate,
    interface_profile,
    moment_sup_estimate,
    property_suite,
    weak_error_table,
    weak_errors_shared_reference,
)
from .config import ConfigError, ExperimentConfig, format_float
from .drift import DriftSpec, TamingParams, derive_growth_constants, step_size_condition
from .engine import BlowUpError, SchemeConfig, SchemeKind
from .noise import NoisePlan
from .presets import PRESETS, preset
from .spectral import SineBasis

__all__ = ["main"]

_TABLE1_ALPHAS = (1.0, 0.5, 1.0 / 3.0, 0.25)
_TABLE1_COLUMNS = ("err_alpha_1", "err_alpha_1_2", "err_alpha_1_3", "err_alpha_1_4")


def _fmt(value) -> str:
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format_float(float(value))


def _write_csv(path: Path, header: tuple[str, ...], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_manifest(outdir: Path, command: str, cfg: ExperimentConfig,
                    outputs: list[str], **extra) -> None:
    manifest = {
        "tool": "tamedspde",
        "version": __version__,
        "command": command,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "master_seed": cfg.master_seed,
        "resolved_config": cfg.to_ini(),
        "outputs": sorted(outputs),
        **extra,
    }
    _write_json(outdir / "manifest.json", manifest)
    (outdir / "config.resolved.ini").write_text(cfg.to_ini())


def _drift(cfg: ExperimentConfig) -> DriftSpec:
    return DriftSpec(q=cfg.q, leading=cfg.leading, lower=cfg.f0_coeffs)


def _scheme(cfg: ExperimentConfig, level: int, *, alpha: float | None = None,
            epsilon: float | None = None, basis: SineBasis,
            drift: DriftSpec) -> SchemeConfig:
    tau = cfg.horizon / 2**level
    return SchemeConfig(
        epsilon=cfg.epsilon if epsilon is None else epsilon,
        tau=tau,
        n_steps=2**level,
        basis=basis,
        drift=drift,
        taming=TamingParams(
            alpha=cfg.alpha if alpha is None else alpha,
            beta=cfg.beta, theta=cfg.theta, tau=tau,
        ),
        kind=SchemeKind.TAMED_EXP_EULER,
    )


def _reference(cfg: ExperimentConfig, *, basis: SineBasis,
               drift: DriftSpec, epsilon: float | None = None) -> SchemeConfig:
    tau = cfg.horizon / 2**cfg.fine_level
    return SchemeConfig(
        epsilon=cfg.epsilon if epsilon is None else epsilon,
        tau=tau,
        n_steps=2**cfg.fine_level,
        basis=basis,
        drift=drift,
        kind=SchemeKind.SEMI_IMPLICIT_REFERENCE,
    )


def _error_csv_rows(table: ErrorTable):
    for r in table.rows:
        yield (r.level, r.tau, r.weak_error, r.mc_halfwidth, r.n_samples,
               r.admissible, r.admissibility_ratio)


def _admissibility_entries(table: ErrorTable) -> list[dict]:
    return [
        {
            "level": r.level,
            "tau": r.tau,
            "admissible": bool(r.admissible),
            "ratio": None if np.isnan(r.admissibility_ratio)
            else r.admissibility_ratio,
        }
        for r in table.rows
    ]


def cmd_converge(cfg: ExperimentConfig, threads: int) -> int:
    outdir = Path(cfg.directory)
    outdir.mkdir(parents=True, exist_ok=True)
    basis = SineBasis(cfg.n_modes)
    drift = _drift(cfg)
    plan = NoisePlan(cfg.master_seed, cfg.fine_level)
    constants = derive_growth_constants(drift)
    schemes = [_scheme(cfg, k, basis=basis, drift=drift) for k in cfg.tau_levels]
    reference = _reference(cfg, basis=basis, drift=drift)
    table = weak_error_table(
        schemes, reference, plan, cfg.n_samples,
        StepTestFunction(norm_kind=cfg.phi_norm),
        constants, cfg.epsilon,
        metadata={"epsilon": cfg.epsilon, "alpha": cfg.alpha, "beta": cfg.beta,
                  "theta": cfg.theta, "seed": cfg.master_seed},
        coupled=cfg.coupled, threads=threads,
    )
    header = ("level", "tau", "weak_error", "mc_halfwidth", "n_samples",
              "admissible", "admissibility_ratio")
    _write_csv(outdir / "errors.csv", header, _error_csv_rows(table))
    outputs = ["errors.csv"]
    for row in table.rows:
        print(f"level {row.level}  tau {row.tau:.3e}  weak error "
              f"{row.weak_error:.6f} +- {row.mc_halfwidth:.6f}  "
              f"admissible={row.admissible} (ratio {row.admissibility_ratio:.3g})")
    if len(table.rows) >= 3:
        fit = fit_convergence_rate(table)
        _write_json(outdir / "rate_fit.json", {
            "slope": fit.slope, "intercept": fit.intercept,
            "residual": fit.residual, "n_rows": len(table.rows),
        })
        outputs.append("rate_fit.json")
        print(f"fitted convergence slope: {fit.slope:.4f}")
    else:
        print(f"rate fit refused: needs >= 3 step sizes, got {len(table.rows)}")
    _write_manifest(outdir, "converge", cfg, outputs,
                    admissibility=_admissibility_entries(table))
    return 0


def cmd_table1(cfg: ExperimentConfig, threads: int) -> int:
    outdir = Path(cfg.directory)
    outdir.mkdir(parents=True, exist_ok=True)
    basis = SineBasis(cfg.n_modes)
    drift = _drift(cfg)
    plan = NoisePlan(cfg.master_seed, cfg.fine_level)
    constants = derive_growth_constants(drift)
    schemes = [
        _scheme(cfg, k, alpha=alpha, basis=basis, drift=drift)
        for alpha in _TABLE1_ALPHAS for k in cfg.tau_levels
    ]
    reference = _reference(cfg, basis=basis, drift=drift)
    errors, halfwidths = weak_errors_shared_reference(
        schemes, reference, plan, cfg.n_samples,
        StepTestFunction(norm_kind=cfg.phi_norm),
        coupled=cfg.coupled, threads=threads,
    )
    n_tau = len(cfg.tau_levels)
    grid = np.asarray(errors, dtype=np.float64).reshape(len(_TABLE1_ALPHAS), n_tau)
    header = ("level", "tau") + _TABLE1_COLUMNS
    rows = [
        (k, cfg.horizon / 2**k) + tuple(grid[:, i])
        for i, k in enumerate(cfg.tau_levels)
    ]
    _write_csv(outdir / "table1.csv", header, rows)
    fits = {}
    monotone = {}
    for a, alpha in enumerate(_TABLE1_ALPHAS):
        col = grid[a]
        pairs = int(np.sum(col[1:] < col[:-1]))
        monotone[_TABLE1_COLUMNS[a]] = {
            "decreasing_pairs": pairs, "total_pairs": len(col) - 1,
            "flagged": bool(pairs < len(col) - 1),
        }
        if n_tau >= 3 and np.all(col > 0):
            x = np.log2([cfg.horizon / 2**k for k in cfg.tau_levels])
            design = np.column_stack([x, np.ones_like(x)])
            coef, *_ = np.linalg.lstsq(design, np.log2(col), rcond=None)
            fits[_TABLE1_COLUMNS[a]] = {"alpha": alpha, "slope": float(coef[0])}
        print(f"alpha={alpha:.4g}: errors "
              + " ".join(f"{e:.5f}" for e in col))
    admissibility = []
    for alpha in _TABLE1_ALPHAS:
        for k in cfg.tau_levels:
            tau = cfg.horizon / 2**k
            verdict = step_size_condition(
                constants,
                TamingParams(alpha=alpha, beta=cfg.beta, theta=cfg.theta, tau=tau),
                cfg.epsilon,
            )
            admissibility.append({
                "alpha": alpha, "level": k, "tau": tau,
                "admissible": verdict.admissible, "ratio": verdict.ratio,
            })
    _write_json(outdir / "table1_fits.json", {"fits": fits, "monotone": monotone})
    _write_manifest(outdir, "table1", cfg, ["table1.csv", "table1_fits.json"],
                    admissibility=admissibility)
    return 0


def cmd_interface(cfg: ExperimentConfig, threads: int) -> int:
    outdir = Path(cfg.directory)
    outdir.mkdir(parents=True, exist_ok=True)
    basis = SineBasis(cfg.n_modes)
    drift = _drift(cfg)
    level = cfg.tau_levels[0]
    epsilons = cfg.interface_epsilons or (cfg.epsilon,)
    outputs = []
    for eps in epsilons:
        plan = NoisePlan(cfg.master_seed, cfg.fine_level)
        scheme = _scheme(cfg, level, epsilon=eps, basis=basis, drift=drift)
        profile = interface_profile(
            scheme, plan, cfg.n_samples, cfg.interface_times, threads=threads,
        )
        name = f"profiles_eps_{format(eps, 'g')}.csv"
        rows = (
            (t, i + 1, profile.node_x[i], profile.mean_values[ti, i])
            for ti, t in enumerate(profile.times)
            for i in range(basis.n_modes)
        )
        _write_csv(outdir / name, ("time", "node_index", "x", "mean_value"), rows)
        outputs.append(name)
        peak = float(np.max(np.abs(profile.mean_values)))
        print(f"epsilon={eps:g}: wrote {name}; max |mean value| = {peak:.4f}")
    _write_manifest(outdir, "interface", cfg, outputs)
    return 0


def cmd_moments(cfg: ExperimentConfig, threads: int) -> int:
    outdir = Path(cfg.directory)
    outdir.mkdir(parents=True, exist_ok=True)
    basis = SineBasis(cfg.n_modes)
    drift = _drift(cfg)
    tau = 2.0**-cfg.moments_tau_level
    outputs = []
    maxima = []
    for horizon in cfg.moments_horizons:
        n_steps = int(round(horizon / tau))
        fine_level = n_steps.bit_length() - 1
        plan = NoisePlan(cfg.master_seed, fine_level)
        scheme = SchemeConfig(
            epsilon=cfg.epsilon, tau=tau, n_steps=n_steps, basis=basis,
            drift=drift,
            taming=TamingParams(alpha=cfg.alpha, beta=cfg.beta,
                                theta=cfg.theta, tau=tau),
            kind=SchemeKind.TAMED_EXP_EULER,
        )
        times = [m * tau for m in range(n_steps + 1)]
        report = moment_sup_estimate(
            scheme, plan, cfg.moments_n_samples, times, threads=threads,
        )
        name = f"moments_T_{format(horizon, 'g')}.csv"
        rows = zip(report.times, report.mean_l2_sq, report.mean_l4_4,
                   report.mean_sup)
        _write_csv(outdir / name,
                   ("time", "mean_l2_sq", "mean_l4_4", "mean_sup"), rows)
        outputs.append(name)
        maxima.append({
            "horizon": horizon,
            "max_mean_l2_sq": report.max_mean_l2_sq,
            "max_mean_l4_4": report.max_mean_l4_4,
            "max_mean_sup": report.max_mean_sup,
        })
        print(f"T={horizon:g}: max mean |X|_L2^2 = {report.max_mean_l2_sq:.6f}")
    ratios = [
        {"horizons": [a["horizon"], b["horizon"]],
         "l2_sq_ratio": b["max_mean_l2_sq"] / a["max_mean_l2_sq"]}
        for a, b in zip(maxima, maxima[1:])
    ]
    _write_manifest(outdir, "moments", cfg, outputs, maxima=maxima,
                    growth_ratios=ratios)
    return 0


def cmd_verify(cfg: ExperimentConfig, threads: int) -> int:
    outdir = Path(cfg.directory)
    outdir.mkdir(parents=True, exist_ok=True)
    drift = _drift(cfg)
    report = property_suite(drift, seed=cfg.master_seed)
    payload = report.as_dict()
    try:
        constants = derive_growth_constants(drift)
        payload["constants"] = {
            "L_f": constants.L_f, "c0": constants.c0, "c1": constants.c1,
            "c2": constants.c2, "c3": constants.c3, "c4": constants.c4,
            "c5": constants.c5, "certified": True,
        }
    except ValueError as exc:
        payload["constants"] = {"certified": False, "error": str(exc)}
        payload["all_passed"] = False
    _write_json(outdir / "verify_report.json", payload)
    _write_manifest(outdir, "verify", cfg, ["verify_report.json"])
    for check in payload["checks"]:
        state = "pass" if check["passed"] else "FAIL"
        print(f"{check['name']}: {state} (n={check['n_samples']}, "
              f"worst margin {check['worst']:.3g})")
    if not payload["all_passed"]:
        print("property suite FAILED", file=sys.stderr)
        return 1
    print("property suite passed")
    return 0


_DISPATCH = {
    "converge": cmd_converge,
    "table1": cmd_table1,
    "interface": cmd_interface,
    "moments": cmd_moments,
    "verify": cmd_verify,
}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--preset", choices=sorted(PRESETS),
                        help="named experiment preset")
    common.add_argument("--config", metavar="PATH",
                        help="configuration file (.ini, or a manifest .json)")
    common.add_argument("--set", metavar="SECTION.KEY=VALUE", action="append",
                        default=[], dest="overrides",
                        help="override one configuration value (repeatable)")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads; never changes output bytes")
    common.add_argument("--out-dir", metavar="DIR",
                        help="override the output directory")
    parser = argparse.ArgumentParser(
        prog="tamedspde",
        description="Tamed exponential time stepping experiments for "
                    "stochastic Allen-Cahn equations",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("converge", parents=[common],
                   help="weak-error table and convergence-rate fit")
    sub.add_parser("table1", parents=[common],
                   help="weak errors for taming exponents 1, 1/2, 1/3, 1/4")
    sub.add_parser("interface", parents=[common],
                   help="mean interface profiles at configured times")
    sub.add_parser("moments", parents=[common],
                   help="ensemble norm monitors over time")
    sub.add_parser("verify", parents=[common],
                   help="run the numerical property suite")
    return parser


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.preset and args.config:
        raise ConfigError("give either --preset or --config, not both")
    if args.config:
        cfg = ExperimentConfig.from_file(args.config)
    else:
        cfg = preset(args.preset or "paper7-beta5")
    for item in args.overrides:
        path, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set needs SECTION.KEY=VALUE, got {item!r}")
        cfg = cfg.with_override(path.strip(), value)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    if args.out_dir is not None:
        cfg = replace(cfg, directory=args.out_dir)
    return cfg.validate()


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        return _DISPATCH[args.command](cfg, max(1, args.threads))
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except BlowUpError as exc:
        print(f"trajectory blow-up: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
