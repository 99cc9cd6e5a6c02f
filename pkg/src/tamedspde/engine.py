"""Time-stepping engine: tamed exponential Euler, semi-implicit reference,
and ensemble drivers that keep several step sizes coupled on one noise path.

The tamed exponential step advances

    X_{m+1} = E(tau) X_m + tau E(tau) eps^-1 F_tau(X_m) + conv increment

with the nonlinearity evaluated by collocation (spectral -> nodal ->
spectral) and the noise term the exact stochastic-convolution increment.
The reference integrator is linear-implicit: implicit in the Laplacian,
explicit in the untamed reaction term,

    X_{m+1,j} = (X_{m,j} + tau eps^-1 F_j(X_m) + dW_j) / (1 + tau lambda_j).

``sweep_ensemble`` advances any number of runs through one pass over the
fine noise grid.  Every random number is counter-addressed per (sample,
mode, fine step), samples are processed in fixed-size chunks, and all
reductions happen on per-sample arrays in index order, so results are
bit-identical for any thread count.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import drift as drift_mod
from . import noise as noise_mod
from .drift import DriftSpec, TamingParams
from .noise import NoisePlan
from .spectral import SineBasis, default_initial

__all__ = [
    "SchemeKind",
    "SchemeConfig",
    "BlowUpError",
    "TrajectoryRecord",
    "EnsembleStats",
    "RunOutput",
    "tamed_exponential_step",
    "semi_implicit_reference_step",
    "sweep_ensemble",
    "run_trajectory",
    "run_ensemble",
]

_CHUNK_SAMPLES = 256
_WINDOW_STEPS = 256


class SchemeKind(enum.Enum):
    TAMED_EXP_EULER = "tamed-exp-euler"
    SEMI_IMPLICIT_REFERENCE = "semi-implicit-reference"


class BlowUpError(RuntimeError):
    """A trajectory produced a non-finite state."""

    def __init__(self, step_index: int, sample: int | None = None,
                 run_index: int | None = None):
        self.step_index = step_index
        self.sample = sample
        self.run_index = run_index
        where = f"step {step_index}"
        if sample is not None:
            where += f", sample {sample}"
        if run_index is not None:
            where += f", run {run_index}"
        super().__init__(f"non-finite state at {where}")


@dataclass(frozen=True)
class SchemeConfig:
    """One integrator run: step size, horizon, model, and method.

    ``with_noise=False`` drops the stochastic term entirely (deterministic
    reaction-diffusion stepping), which the zero-noise sanity checks use.
    """

    epsilon: float
    tau: float
    n_steps: int
    basis: SineBasis
    drift: DriftSpec | None = None
    taming: TamingParams | None = None
    kind: SchemeKind = SchemeKind.TAMED_EXP_EULER
    with_noise: bool = True

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if self.n_steps < 0:
            raise ValueError(f"n_steps must be >= 0, got {self.n_steps}")
        if self.kind is SchemeKind.TAMED_EXP_EULER and self.drift is not None:
            if self.taming is None:
                raise ValueError("tamed scheme with a drift needs TamingParams")
            if self.taming.tau != self.tau:
                raise ValueError(
                    f"taming.tau ({self.taming.tau}) must equal the scheme "
                    f"step size ({self.tau})"
                )

    @property
    def horizon(self) -> float:
        return self.tau * self.n_steps


@dataclass
class TrajectoryRecord:
    """Endpoint, optional snapshots, and running norm monitors of one path."""

    endpoint: np.ndarray
    snapshots: dict[float, np.ndarray] = field(default_factory=dict)
    max_l2: float = np.nan
    max_l4: float = np.nan
    max_sup: float = np.nan


@dataclass
class EnsembleStats:
    mean: float
    std: float
    n: int
    n_skipped: int = 0


@dataclass
class RunOutput:
    """Per-sample results of one run inside a sweep (sample-major arrays)."""

    endpoints: np.ndarray                     # (S, N)
    snapshots: dict[float, np.ndarray]        # time -> (S, N)
    max_l2: np.ndarray | None = None          # (S,)
    max_l4: np.ndarray | None = None
    max_sup: np.ndarray | None = None


# ---------------------------------------------------------------------------
# single steps (public contract; the sweep uses the same helpers)
# ---------------------------------------------------------------------------


class _RunPre:
    """Precomputed per-run quantities used by the steppers."""

    def __init__(self, cfg: SchemeConfig):
        self.cfg = cfg
        basis = cfg.basis
        self.transform = basis._transform
        self.inv_nodes = 1.0 / (basis.n_modes + 1)
        self.drift_scale = cfg.tau / cfg.epsilon
        if cfg.kind is SchemeKind.TAMED_EXP_EULER:
            self.semigroup = basis.semigroup_factors(cfg.tau)
        else:
            self.divisor = 1.0 / (1.0 + cfg.tau * basis.eigenvalues)
        if cfg.drift is not None and cfg.kind is SchemeKind.TAMED_EXP_EULER:
            t = cfg.taming
            self.tame_coef = t.beta * t.tau**t.theta
            self.tame_power = (2 * cfg.drift.q - 2) / t.alpha
            self.tame_alpha = t.alpha

    def drift_term(self, states: np.ndarray) -> np.ndarray | None:
        """Collocation evaluation of the (tamed) Nemytskii drift."""
        cfg = self.cfg
        if cfg.drift is None:
            return None
        # non-finite values propagate silently here; the step's blow-up
        # check is the reporting point
        with np.errstate(invalid="ignore", over="ignore"):
            phys = states @ self.transform
            fv = drift_mod.f_eval(cfg.drift, phys)
            if cfg.kind is SchemeKind.TAMED_EXP_EULER:
                x = self.tame_coef * drift_mod._abs_power(phys, self.tame_power)
                fv /= drift_mod._taming_denominator(x, self.tame_alpha)
            return (fv @ self.transform) * self.inv_nodes

    def advance(self, states: np.ndarray, noise: np.ndarray) -> np.ndarray:
        drift_term = self.drift_term(states)
        if self.cfg.kind is SchemeKind.TAMED_EXP_EULER:
            out = states if drift_term is None else states + self.drift_scale * drift_term
            return out * self.semigroup + noise
        out = states + noise if drift_term is None else (
            states + self.drift_scale * drift_term + noise
        )
        return out * self.divisor


def _check_finite(states: np.ndarray, step_index: int, samples=None,
                  run_index=None) -> None:
    if np.isfinite(states).all():
        return
    sample = None
    if samples is not None and states.ndim == 2:
        bad = ~np.isfinite(states).all(axis=1)
        sample = int(np.asarray(samples)[bad][0])
    raise BlowUpError(step_index, sample, run_index)


def tamed_exponential_step(
    state: np.ndarray, cfg: SchemeConfig, noise: np.ndarray,
    step_index: int = 0,
) -> np.ndarray:
    """One tamed exponential Euler step; ``noise`` is the coarse
    convolution increment in spectral coordinates."""
    if cfg.kind is not SchemeKind.TAMED_EXP_EULER:
        raise ValueError("config kind must be TAMED_EXP_EULER")
    out = _RunPre(cfg).advance(np.asarray(state, dtype=np.float64),
                               np.asarray(noise, dtype=np.float64))
    _check_finite(out, step_index)
    return out


def semi_implicit_reference_step(
    state: np.ndarray, cfg: SchemeConfig, dW: np.ndarray,
    step_index: int = 0,
) -> np.ndarray:
    """One linear-implicit reference step; ``dW`` holds plain Brownian
    increments in spectral coordinates."""
    if cfg.kind is not SchemeKind.SEMI_IMPLICIT_REFERENCE:
        raise ValueError("config kind must be SEMI_IMPLICIT_REFERENCE")
    out = _RunPre(cfg).advance(np.asarray(state, dtype=np.float64),
                               np.asarray(dW, dtype=np.float64))
    _check_finite(out, step_index)
    return out


# ---------------------------------------------------------------------------
# coupled multi-run sweep
# ---------------------------------------------------------------------------


def _snapshot_steps(cfg: SchemeConfig, times: Sequence[float]) -> dict[int, float]:
    table: dict[int, float] = {}
    for t in times:
        m = int(round(t / cfg.tau)) if cfg.tau > 0 else 0
        if not 0 <= m <= cfg.n_steps or abs(m * cfg.tau - t) > 1e-9 * max(1.0, cfg.tau):
            raise ValueError(
                f"snapshot time {t} is not on the step grid of tau={cfg.tau}"
            )
        table[m] = float(t)
    return table


def sweep_ensemble(
    runs: Sequence[SchemeConfig],
    plan: NoisePlan,
    samples: int | Sequence[int],
    *,
    x0: np.ndarray | None = None,
    snapshot_times: Sequence[Sequence[float]] | None = None,
    track_monitors: bool = False,
    skip_blowups: bool = False,
    threads: int = 1,
) -> tuple[list[RunOutput], np.ndarray]:
    """Advance all runs over one shared noise path per sample.

    ``samples`` is either a count (ids 0..n-1) or explicit sample ids;
    ids select the counter-addressed noise.  Returns one RunOutput per
    run plus the boolean mask of samples that blew up (only ever set
    when ``skip_blowups``; otherwise a blow-up raises).  Results are
    independent of ``threads``.
    """
    if not runs:
        raise ValueError("need at least one run")
    sample_ids = (
        np.arange(samples) if isinstance(samples, (int, np.integer))
        else np.asarray(samples, dtype=np.int64)
    )
    n_samples = len(sample_ids)
    basis = runs[0].basis
    horizon = runs[0].horizon
    for r in runs:
        if r.basis.n_modes != basis.n_modes:
            raise ValueError("all runs must share one basis size")
        if abs(r.horizon - horizon) > 1e-12 * max(1.0, horizon):
            raise ValueError(
                f"runs disagree on the horizon: {r.horizon} vs {horizon}"
            )
    if x0 is None:
        x0 = default_initial(basis)
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.shape != (basis.n_modes,):
        raise ValueError(f"x0 must have shape ({basis.n_modes},)")

    n_mode = basis.n_modes
    snap_map = [
        _snapshot_steps(r, snapshot_times[i]) if snapshot_times else {}
        for i, r in enumerate(runs)
    ]
    outputs = [
        RunOutput(
            endpoints=np.empty((n_samples, n_mode)),
            snapshots={t: np.empty((n_samples, n_mode)) for t in sm.values()},
            max_l2=np.empty(n_samples) if track_monitors else None,
            max_l4=np.empty(n_samples) if track_monitors else None,
            max_sup=np.empty(n_samples) if track_monitors else None,
        )
        for sm in snap_map
    ]
    blown = np.zeros(n_samples, dtype=bool)

    if horizon == 0.0 or all(r.n_steps == 0 for r in runs):
        for i, out in enumerate(outputs):
            out.endpoints[:] = x0
            for t in out.snapshots:
                out.snapshots[t][:] = x0
            if track_monitors:
                _write_monitors(out, slice(0, n_samples),
                                *_state_norms(basis, x0[None]))
        return outputs, blown

    fine_steps = plan.fine_steps
    h = plan.fine_step_size(horizon)
    ratios = []
    for r in runs:
        ratio = int(round(r.tau / h))
        if ratio < 1 or abs(ratio * h - r.tau) > 1e-9 * r.tau:
            raise ValueError(
                f"step size {r.tau} is not an integer multiple of the fine "
                f"step {h} (fine_level={plan.fine_level})"
            )
        if r.n_steps * ratio != fine_steps:
            raise ValueError(
                f"run covers {r.n_steps * ratio} fine steps, plan has {fine_steps}"
            )
        ratios.append(ratio)

    pres = [_RunPre(r) for r in runs]
    decay_fine = np.exp(-basis.eigenvalues * h)
    sqrt_h, l21, l22 = noise_mod.increment_factors(basis.eigenvalues, h)

    chunks = [
        (start, min(start + _CHUNK_SAMPLES, n_samples))
        for start in range(0, n_samples, _CHUNK_SAMPLES)
    ]

    def work(chunk: tuple[int, int]) -> None:
        lo, hi = chunk
        count = hi - lo
        states = [np.tile(x0, (count, 1)) for _ in runs]
        accs = [np.zeros((count, n_mode)) for _ in runs]
        alive = np.ones(count, dtype=bool)
        if track_monitors:
            mons = [list(_state_norms(basis, states[i])) for i in range(len(runs))]
        for i, sm in enumerate(snap_map):
            if 0 in sm:
                outputs[i].snapshots[sm[0]][lo:hi] = x0
        any_noise = any(r.with_noise for r in runs)
        for w0 in range(0, fine_steps, _WINDOW_STEPS):
            wl = min(_WINDOW_STEPS, fine_steps - w0)
            if any_noise:
                z1, z2 = noise_mod.standard_pairs_batch(
                    plan, sample_ids[lo:hi], w0, wl, n_mode
                )
                z2 *= l22
                z2 += l21 * z1      # z2 is now the conv increment
                z1 *= sqrt_h        # z1 is now the plain dW increment
            for kl in range(wl):
                k = w0 + kl
                for i, (pre, ratio) in enumerate(zip(pres, ratios)):
                    tamed = runs[i].kind is SchemeKind.TAMED_EXP_EULER
                    if not runs[i].with_noise:
                        if (k + 1) % ratio:
                            continue
                        inc = accs[i]  # stays zero
                    elif ratio == 1:
                        inc = z2[:, kl, :] if tamed else z1[:, kl, :]
                    else:
                        acc = accs[i]
                        if tamed:
                            acc *= decay_fine
                            acc += z2[:, kl, :]
                        else:
                            acc += z1[:, kl, :]
                        if (k + 1) % ratio:
                            continue
                        inc = acc
                    m = (k + 1) // ratio
                    states[i] = new = pre.advance(states[i], inc)
                    if ratio > 1:
                        accs[i].fill(0.0)
                    ok = np.isfinite(new).all(axis=1)
                    if not ok.all():
                        if not skip_blowups:
                            bad = int(np.nonzero(~ok)[0][0])
                            raise BlowUpError(m, int(sample_ids[lo + bad]), i)
                        alive &= ok
                        new[~alive] = 0.0
                        blown[lo:hi] |= ~alive
                    if track_monitors:
                        for mon, val in zip(mons[i], _state_norms(basis, new)):
                            np.maximum(mon, val, out=mon)
                    if m in snap_map[i]:
                        outputs[i].snapshots[snap_map[i][m]][lo:hi] = new
        for i, out in enumerate(outputs):
            out.endpoints[lo:hi] = states[i]
            if skip_blowups:
                out.endpoints[lo:hi][~alive] = np.nan
            if track_monitors:
                _write_monitors(out, slice(lo, hi), *mons[i])

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for f in [pool.submit(work, c) for c in chunks]:
                f.result()
    else:
        for c in chunks:
            work(c)
    return outputs, blown


def _state_norms(basis: SineBasis, states: np.ndarray):
    """(L2, L4, sup) norms of a (B, N) batch of states."""
    l2 = np.linalg.norm(states, axis=-1)
    phys = states @ basis._transform
    l4 = (np.sum(phys**4, axis=-1) / (basis.n_modes + 1)) ** 0.25
    sup = np.max(np.abs(phys), axis=-1)
    return l2, l4, sup


def _write_monitors(out: RunOutput, rows, l2, l4, sup) -> None:
    out.max_l2[rows] = l2
    out.max_l4[rows] = l4
    out.max_sup[rows] = sup


def _record(output: RunOutput, sample: int) -> TrajectoryRecord:
    return TrajectoryRecord(
        endpoint=output.endpoints[sample],
        snapshots={t: arr[sample] for t, arr in output.snapshots.items()},
        max_l2=output.max_l2[sample] if output.max_l2 is not None else np.nan,
        max_l4=output.max_l4[sample] if output.max_l4 is not None else np.nan,
        max_sup=output.max_sup[sample] if output.max_sup is not None else np.nan,
    )


def run_trajectory(
    cfg: SchemeConfig,
    plan: NoisePlan,
    sample: int,
    *,
    snapshot_times: Sequence[float] | None = None,
    track_monitors: bool = True,
    x0: np.ndarray | None = None,
) -> TrajectoryRecord:
    """Integrate one sample path and return its record.

    The sample id selects the counter-addressed noise, so the same id
    always yields the same path regardless of what else runs.
    """
    outputs, _ = sweep_ensemble(
        [cfg], plan, [sample],
        x0=x0,
        snapshot_times=[snapshot_times] if snapshot_times is not None else None,
        track_monitors=track_monitors,
    )
    return _record(outputs[0], 0)


def run_ensemble(
    cfg: SchemeConfig,
    plan: NoisePlan,
    n_samples: int,
    observable: Callable[[TrajectoryRecord], float],
    *,
    threads: int = 1,
    skip_blowups: bool = False,
    snapshot_times: Sequence[float] | None = None,
    track_monitors: bool = False,
    x0: np.ndarray | None = None,
) -> EnsembleStats:
    """Mean and sample std of an observable over counter-addressed samples."""
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    outputs, blown = sweep_ensemble(
        [cfg], plan, n_samples,
        x0=x0,
        snapshot_times=[snapshot_times] if snapshot_times is not None else None,
        track_monitors=track_monitors,
        skip_blowups=skip_blowups,
        threads=threads,
    )
    values = np.array([
        observable(_record(outputs[0], s))
        for s in range(n_samples) if not blown[s]
    ])
    if len(values) < 2:
        raise BlowUpError(-1)
    return EnsembleStats(
        mean=float(values.mean()),
        std=float(values.std(ddof=1)),
        n=len(values),
        n_skipped=int(blown.sum()),
    )
