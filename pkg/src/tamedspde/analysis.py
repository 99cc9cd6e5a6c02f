"""Observables and experiment machinery: the step test function, coupled
weak-error estimation, convergence-rate fits, moment monitors, interface
profiles, and the numerical property suite.

Weak errors are differences of test-function expectations between a
scheme and a reference run.  The default estimator couples both runs on
the same noise path, which leaves the estimated quantity unchanged while
shrinking the Monte-Carlo variance of the difference by orders of
magnitude at the sample counts used here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import drift as drift_mod
from .drift import DriftConstants, DriftSpec, StepSizeVerdict, ALLEN_CAHN
from .engine import SchemeConfig, sweep_ensemble
from .noise import NoisePlan
from .spectral import SineBasis

__all__ = [
    "StepTestFunction",
    "ErrorRow",
    "ErrorTable",
    "RateFit",
    "MomentReport",
    "ProfileSet",
    "PropertyReport",
    "step_test_eval",
    "weak_error_estimate",
    "weak_errors_shared_reference",
    "weak_error_table",
    "fit_convergence_rate",
    "moment_sup_estimate",
    "interface_profile",
    "property_suite",
]


@dataclass(frozen=True)
class StepTestFunction:
    """Bounded step observable ``sin(floor(10 ||X||) / 10)``.

    Piecewise constant on norm bins of width 0.1 and bounded by 1, so it
    belongs to the test class whose supremum defines the total-variation
    distance.  ``norm_kind`` selects how ||X|| is computed: 'nodal'
    (default) takes the unnormalized euclidean norm of the nodal values,
    which is what reproduces the reference experiment's error magnitudes;
    'l2' takes the function-space norm of the coefficients (a factor
    sqrt(N+1) smaller, so the step bins resolve far less of the
    distribution); 'sup' takes the nodal maximum.
    """

    bin_width: float = 0.1
    norm_kind: str = "nodal"

    def __post_init__(self):
        if self.bin_width != 0.1:
            raise ValueError("bin width is fixed to 0.1")
        if self.norm_kind not in ("l2", "sup", "nodal"):
            raise ValueError(f"unsupported norm kind {self.norm_kind!r}")

    def radius(self, basis: SineBasis, coeffs: np.ndarray) -> np.ndarray:
        if self.norm_kind == "l2":
            return basis.norm(coeffs, "l2")
        if self.norm_kind == "sup":
            return basis.norm(coeffs, "sup")
        return np.linalg.norm(basis.to_physical(coeffs), axis=-1)

    def __call__(self, basis: SineBasis, coeffs: np.ndarray) -> np.ndarray:
        return np.sin(np.floor(10.0 * self.radius(basis, coeffs)) / 10.0)


def step_test_eval(phi: StepTestFunction, basis: SineBasis, coeffs: np.ndarray):
    """Evaluate the step test function on one or many coefficient arrays."""
    return phi(basis, coeffs)


@dataclass(frozen=True)
class ErrorRow:
    level: int
    tau: float
    weak_error: float
    mc_halfwidth: float
    n_samples: int
    admissible: bool
    admissibility_ratio: float


@dataclass
class ErrorTable:
    """Weak errors per step size, finest last in ``rows`` order reversed.

    Rows are ordered by strictly decreasing tau; metadata carries the
    experiment parameters (epsilon, alpha, beta, theta, seed, ...).
    """

    rows: list[ErrorRow]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        taus = [r.tau for r in self.rows]
        if any(b >= a for a, b in zip(taus, taus[1:])):
            raise ValueError("rows must have strictly decreasing tau")
        if not all(np.isfinite(r.weak_error) for r in self.rows):
            raise ValueError("weak errors must be finite")


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log2(error) against log2(tau)."""

    slope: float
    intercept: float
    residual: float


@dataclass
class MomentReport:
    """Ensemble norm means on a time grid, plus their maxima over time."""

    times: np.ndarray
    mean_l2_sq: np.ndarray
    mean_l4_4: np.ndarray
    mean_sup: np.ndarray

    @property
    def max_mean_l2_sq(self) -> float:
        return float(np.max(self.mean_l2_sq))

    @property
    def max_mean_l4_4(self) -> float:
        return float(np.max(self.mean_l4_4))

    @property
    def max_mean_sup(self) -> float:
        return float(np.max(self.mean_sup))


@dataclass
class ProfileSet:
    """Nodewise ensemble-mean physical profiles at requested times."""

    times: np.ndarray
    node_x: np.ndarray
    mean_values: np.ndarray  # (n_times, N)


def weak_error_estimate(
    cfg_scheme: SchemeConfig,
    cfg_reference: SchemeConfig,
    plan: NoisePlan,
    n_samples: int,
    phi: StepTestFunction,
    *,
    coupled: bool = True,
    threads: int = 1,
) -> tuple[float, float]:
    """|E phi(scheme endpoint) - E phi(reference endpoint)| with a 95%
    Monte-Carlo halfwidth.

    Coupled mode evaluates both runs on the same realized noise and
    estimates the mean of the per-sample difference; uncoupled mode uses
    independent seeds per run.
    """
    errors, halfwidths, _ = _weak_errors(
        [cfg_scheme], cfg_reference, plan, n_samples, phi,
        coupled=coupled, threads=threads,
    )
    return errors[0], halfwidths[0]


def _weak_errors(
    schemes: Sequence[SchemeConfig],
    reference: SchemeConfig,
    plan: NoisePlan,
    n_samples: int,
    phi: StepTestFunction,
    *,
    coupled: bool,
    threads: int,
) -> tuple[list[float], list[float], np.ndarray]:
    basis = reference.basis
    if coupled:
        outputs, _ = sweep_ensemble(
            list(schemes) + [reference], plan, n_samples, threads=threads
        )
        phi_ref = phi(basis, outputs[-1].endpoints)
        errors, halfwidths = [], []
        for out in outputs[:-1]:
            delta = phi(basis, out.endpoints) - phi_ref
            errors.append(float(abs(delta.mean())))
            halfwidths.append(float(1.96 * delta.std(ddof=1) / np.sqrt(n_samples)))
        return errors, halfwidths, phi_ref
    ref_out, _ = sweep_ensemble(
        [reference], plan.spawn(0), n_samples, threads=threads
    )
    phi_ref = phi(basis, ref_out[0].endpoints)
    errors, halfwidths = [], []
    for i, cfg in enumerate(schemes):
        out, _ = sweep_ensemble([cfg], plan.spawn(i + 1), n_samples,
                                threads=threads)
        vals = phi(basis, out[0].endpoints)
        errors.append(float(abs(vals.mean() - phi_ref.mean())))
        halfwidths.append(float(
            1.96 * np.sqrt((vals.var(ddof=1) + phi_ref.var(ddof=1)) / n_samples)
        ))
    return errors, halfwidths, phi_ref


def weak_errors_shared_reference(
    schemes: Sequence[SchemeConfig],
    reference: SchemeConfig,
    plan: NoisePlan,
    n_samples: int,
    phi: StepTestFunction,
    *,
    coupled: bool = True,
    threads: int = 1,
) -> tuple[list[float], list[float]]:
    """Weak errors of many schemes against one reference run.

    In coupled mode the whole batch advances through a single pass over
    the shared noise path, so the reference is integrated exactly once.
    """
    errors, halfwidths, _ = _weak_errors(
        schemes, reference, plan, n_samples, phi, coupled=coupled,
        threads=threads,
    )
    return errors, halfwidths


def weak_error_table(
    schemes: Sequence[SchemeConfig],
    reference: SchemeConfig,
    plan: NoisePlan,
    n_samples: int,
    phi: StepTestFunction,
    constants: DriftConstants | None = None,
    epsilon: float | None = None,
    metadata: dict | None = None,
    *,
    coupled: bool = True,
    threads: int = 1,
) -> ErrorTable:
    """Run all step sizes against one shared reference and tabulate.

    Each row carries the step-size admissibility verdict computed from
    ``constants`` (when provided) for transparency.
    """
    errors, halfwidths, _ = _weak_errors(
        schemes, reference, plan, n_samples, phi, coupled=coupled,
        threads=threads,
    )
    horizon = reference.horizon
    rows = []
    for cfg, err, hw in zip(schemes, errors, halfwidths):
        level = int(round(np.log2(horizon / cfg.tau)))
        if constants is not None and cfg.taming is not None:
            eps = epsilon if epsilon is not None else cfg.epsilon
            verdict = drift_mod.step_size_condition(constants, cfg.taming, eps)
        else:
            verdict = StepSizeVerdict(True, np.nan)
        rows.append(ErrorRow(
            level=level,
            tau=cfg.tau,
            weak_error=err,
            mc_halfwidth=hw,
            n_samples=n_samples,
            admissible=verdict.admissible,
            admissibility_ratio=verdict.ratio,
        ))
    return ErrorTable(rows=rows, metadata=dict(metadata or {}))


def fit_convergence_rate(table: ErrorTable) -> RateFit:
    """Slope of log2(weak error) against log2(tau) by least squares."""
    if len(table.rows) < 3:
        raise ValueError(f"rate fit needs >= 3 rows, got {len(table.rows)}")
    errs = np.array([r.weak_error for r in table.rows])
    if np.any(errs <= 0):
        raise ValueError("rate fit needs strictly positive errors")
    x = np.log2([r.tau for r in table.rows])
    y = np.log2(errs)
    design = np.column_stack([x, np.ones_like(x)])
    coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return RateFit(
        slope=float(coef[0]),
        intercept=float(coef[1]),
        residual=float(resid @ resid),
    )


def moment_sup_estimate(
    cfg: SchemeConfig,
    plan: NoisePlan,
    n_samples: int,
    time_grid: Sequence[float],
    *,
    threads: int = 1,
    x0: np.ndarray | None = None,
) -> MomentReport:
    """Ensemble means of squared-L2, fourth-power-L4, and sup norms."""
    times = np.asarray(sorted(time_grid), dtype=np.float64)
    outputs, _ = sweep_ensemble(
        [cfg], plan, n_samples, snapshot_times=[list(times)],
        threads=threads, x0=x0,
    )
    basis = cfg.basis
    l2sq = np.empty(len(times))
    l44 = np.empty(len(times))
    sup = np.empty(len(times))
    for i, t in enumerate(times):
        coeffs = outputs[0].snapshots[float(t)]
        phys = basis.to_physical(coeffs)
        l2sq[i] = np.mean(np.sum(coeffs**2, axis=-1))
        l44[i] = np.mean(np.sum(phys**4, axis=-1) / (basis.n_modes + 1))
        sup[i] = np.mean(np.max(np.abs(phys), axis=-1))
    return MomentReport(times=times, mean_l2_sq=l2sq, mean_l4_4=l44, mean_sup=sup)


def interface_profile(
    cfg: SchemeConfig,
    plan: NoisePlan,
    n_samples: int,
    times: Sequence[float],
    *,
    threads: int = 1,
    x0: np.ndarray | None = None,
) -> ProfileSet:
    """Nodewise ensemble mean of the physical solution at each time."""
    times_arr = np.asarray(sorted(times), dtype=np.float64)
    outputs, _ = sweep_ensemble(
        [cfg], plan, n_samples, snapshot_times=[list(times_arr)],
        threads=threads, x0=x0,
    )
    basis = cfg.basis
    mean_values = np.empty((len(times_arr), basis.n_modes))
    for i, t in enumerate(times_arr):
        phys = basis.to_physical(outputs[0].snapshots[float(t)])
        mean_values[i] = phys.mean(axis=0)
    return ProfileSet(times=times_arr, node_x=basis.grid.copy(),
                      mean_values=mean_values)


@dataclass
class PropertyReport:
    """Aggregated outcome of the numerical invariant checks."""

    checks: list[drift_mod.CheckResult]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "all_passed": self.all_passed,
            "checks": [c.as_dict() for c in self.checks],
        }


def property_suite(
    drift: DriftSpec = ALLEN_CAHN,
    seed: int = 20260811,
    n: int = 100_000,
) -> PropertyReport:
    """Run the drift invariant checks with a fixed seed.

    Failures are report content, not exceptions; counterexamples are
    recorded verbatim.  The pass/fail status is insensitive to the seed
    because the inequalities hold pointwise, not just on average.
    """
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2**31, 3)
    checks = [
        drift_mod.check_taming_domination(drift, n=n, seed=int(seeds[0])),
        drift_mod.check_taming_gap(drift, n=n, seed=int(seeds[1])),
        drift_mod.check_one_sided_delta_derivative(drift),
        drift_mod.check_delta_derivative_growth(drift),
        drift_mod.check_power_mean_inequality(n=n, seed=int(seeds[2])),
    ]
    return PropertyReport(checks=checks)
