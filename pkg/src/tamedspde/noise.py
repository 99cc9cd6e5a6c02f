"""Counter-addressed space-time white noise with exact coarse/fine coupling.

Per spectral mode j the cylindrical Wiener process contributes an
independent scalar Brownian motion.  Over one fine step of length h each
mode needs the jointly Gaussian pair

    dW   = B(t+h) - B(t)                        Var = h
    conv = int_t^{t+h} e^{-lambda (t+h-s)} dB   Var = (1 - e^{-2 lambda h}) / (2 lambda)
                                                Cov = (1 - e^{-lambda h}) / lambda

realized through the Cholesky factor of that 2x2 covariance from two
standard normals.  The normals come from a Philox counter stream in a
fixed layout, so the pair at (sample, mode, fine step) is a pure O(1)
function of (master seed, sample, mode, step): the 256-bit Philox counter
is (block-within-step, 0, sample, stream) and each step consumes a fixed,
block-aligned number of 64-bit words.  Uniform words are mapped to
normals by Box-Muller, which consumes exactly one word per normal; this
fixed-consumption map is what makes pointwise, windowed, and whole-path
generation bit-identical.

A coarse step of ratio R covers R fine steps; its convolution increment

    sum_k e^{-lambda (R-1-k) h} conv_k

is accumulated by the recursion acc <- e^{-lambda h} acc + conv_k, which
is exact in distribution and exactly coupled to the fine path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "NoisePlan",
    "NoiseIncrementPair",
    "PATH_STREAM",
    "increment_factors",
    "conv_variance",
    "conv_dw_covariance",
    "standard_pairs",
    "standard_pairs_batch",
    "increment_pairs",
    "sample_increment_pair",
    "coarse_convolution_increment",
]

#: stream-id word reserved for trajectory path noise
PATH_STREAM = 0

_U64 = np.uint64
_PHILOX_WORDS_PER_BLOCK = 4
_INV_2_53 = 2.0**-53
_SHIFT = _U64(11)


@dataclass(frozen=True)
class NoisePlan:
    """Addressing scheme for every random number a simulation consumes.

    ``fine_level`` fixes the fine grid: h = T / 2**fine_level for horizon
    T.  Any coarse run whose step is an integer multiple of h consumes
    exactly the fine increments it covers, so runs at different step
    sizes share one underlying path.
    """

    master_seed: int
    fine_level: int

    def __post_init__(self):
        if self.fine_level < 0:
            raise ValueError(f"fine_level must be >= 0, got {self.fine_level}")

    @property
    def fine_steps(self) -> int:
        return 2**self.fine_level

    def fine_step_size(self, horizon: float) -> float:
        return horizon / self.fine_steps

    def philox_key(self) -> np.ndarray:
        """Two-word Philox key derived from the master seed."""
        return np.random.SeedSequence(self.master_seed).generate_state(2, _U64)

    def spawn(self, index: int) -> "NoisePlan":
        """Plan with an independent seed (for uncoupled runs)."""
        child = np.random.SeedSequence((self.master_seed, index + 1))
        return NoisePlan(int(child.generate_state(1, _U64)[0]), self.fine_level)

    def mode_word_offsets(self, mode: int, n_modes: int) -> tuple[int, int]:
        """Offsets of mode j's two uniform words inside a step block."""
        return mode - 1, n_modes + mode - 1


class NoiseIncrementPair(NamedTuple):
    """Brownian increment and stochastic-convolution increment of one mode."""

    dW: float
    conv: float


def _words_per_step(n_modes: int) -> int:
    need = 2 * n_modes
    blocks = -(-need // _PHILOX_WORDS_PER_BLOCK)
    return blocks * _PHILOX_WORDS_PER_BLOCK


def _raw_words(
    plan: NoisePlan, sample: int, step_start: int, n_steps: int, n_modes: int,
    stream: int = PATH_STREAM,
) -> np.ndarray:
    """Raw uniform words for steps [step_start, step_start + n_steps)."""
    wps = _words_per_step(n_modes)
    counter = np.array(
        [step_start * (wps // _PHILOX_WORDS_PER_BLOCK), 0, sample, stream],
        dtype=_U64,
    )
    bitgen = np.random.Philox(key=plan.philox_key(), counter=counter)
    raw = bitgen.random_raw(n_steps * wps).reshape(n_steps, wps)
    return raw[:, : 2 * n_modes]


def _box_muller(raw: np.ndarray, n_modes: int) -> tuple[np.ndarray, np.ndarray]:
    # fixed consumption: words (..., j-1) and (..., n_modes + j - 1) become
    # mode j's uniform pair (contiguous halves keep the ufuncs fast)
    u = ((raw >> _SHIFT).astype(np.float64) + 0.5) * _INV_2_53
    u1 = u[..., :n_modes]
    u2 = u[..., n_modes:]
    np.log(u1, out=u1)
    radius = np.sqrt(np.multiply(u1, -2.0, out=u1), out=u1)
    np.multiply(u2, 2.0 * np.pi, out=u2)
    z1 = np.cos(u2) * radius
    z2 = np.sin(u2, out=u2)
    z2 *= radius
    return z1, z2


def standard_pairs(
    plan: NoisePlan, sample: int, step_start: int, n_steps: int, n_modes: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Standard-normal pair arrays (z1, z2), each (n_steps, n_modes).

    Box-Muller on the raw words: mode j consumes words 2(j-1), 2(j-1)+1 of
    its step block.
    """
    return _box_muller(
        _raw_words(plan, sample, step_start, n_steps, n_modes), n_modes
    )


def standard_pairs_batch(
    plan: NoisePlan,
    samples: np.ndarray,
    step_start: int,
    n_steps: int,
    n_modes: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Pair arrays (z1, z2), each (len(samples), n_steps, n_modes).

    Identical values to per-sample ``standard_pairs`` calls; the raw
    words are gathered per sample and transformed in one pass.
    """
    raw = np.empty((len(samples), n_steps, 2 * n_modes), dtype=_U64)
    for c, s in enumerate(samples):
        raw[c] = _raw_words(plan, int(s), step_start, n_steps, n_modes)
    return _box_muller(raw, n_modes)


def conv_variance(lam, h: float):
    """Closed-form Var of the convolution increment over a step of size h."""
    lam = np.asarray(lam, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = -np.expm1(-2.0 * lam * h) / (2.0 * lam)
    return np.where(lam * h > 0, v, h)


def conv_dw_covariance(lam, h: float):
    """Closed-form Cov between the convolution and plain increments."""
    lam = np.asarray(lam, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = -np.expm1(-lam * h) / lam
    return np.where(lam * h > 0, c, h)


def increment_factors(eigenvalues: np.ndarray, h: float):
    """Cholesky rows mapping (z1, z2) to (dW, conv) per mode.

    Returns (sqrt_h, l21, l22) with dW = sqrt_h z1 and
    conv = l21 z1 + l22 z2.  Modes whose covariance degenerates
    numerically (lambda h ~ 0) fall back to conv = dW.
    """
    sqrt_h = np.sqrt(h)
    cov = conv_dw_covariance(eigenvalues, h)
    var = conv_variance(eigenvalues, h)
    l21 = cov / sqrt_h
    resid = var - cov**2 / h
    degenerate = ~np.isfinite(resid) | (resid <= 0)
    l22 = np.sqrt(np.where(degenerate, 0.0, resid))
    l21 = np.where(degenerate, sqrt_h, l21)
    return sqrt_h, l21, l22


def increment_pairs(
    plan: NoisePlan,
    eigenvalues: np.ndarray,
    h: float,
    sample: int,
    step_start: int,
    n_steps: int,
) -> tuple[np.ndarray, np.ndarray]:
    """(dW, conv) arrays, each (n_steps, n_modes), for one sample."""
    z1, z2 = standard_pairs(plan, sample, step_start, n_steps, len(eigenvalues))
    sqrt_h, l21, l22 = increment_factors(np.asarray(eigenvalues), h)
    return sqrt_h * z1, l21 * z1 + l22 * z2


def sample_increment_pair(
    plan: NoisePlan,
    eigenvalues: np.ndarray,
    h: float,
    sample: int,
    mode: int,
    step: int,
) -> NoiseIncrementPair:
    """The (dW, conv) pair of one (sample, mode, fine step); O(1) access."""
    eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
    if not 1 <= mode <= len(eigenvalues):
        raise IndexError(f"mode {mode} outside 1..{len(eigenvalues)}")
    if step < 0:
        raise IndexError(f"fine step must be >= 0, got {step}")
    dw, conv = increment_pairs(plan, eigenvalues, h, sample, step, 1)
    return NoiseIncrementPair(float(dw[0, mode - 1]), float(conv[0, mode - 1]))


def coarse_convolution_increment(
    plan: NoisePlan,
    eigenvalues: np.ndarray,
    h: float,
    sample: int,
    mode: int,
    coarse_step: int,
    ratio: int,
) -> float:
    """Convolution increment over coarse step m of size tau = ratio * h.

    Computed by the same damped recursion the trajectory driver uses, so
    the coupling to the fine path is exact (not merely in distribution).
    """
    if ratio < 1 or int(ratio) != ratio:
        raise ValueError(f"coarse/fine ratio must be a positive integer, got {ratio}")
    eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
    if not 1 <= mode <= len(eigenvalues):
        raise IndexError(f"mode {mode} outside 1..{len(eigenvalues)}")
    ratio = int(ratio)
    _, conv = increment_pairs(
        plan, eigenvalues, h, sample, coarse_step * ratio, ratio
    )
    decay = float(np.exp(-eigenvalues[mode - 1] * h))
    acc = 0.0
    for k in range(ratio):
        acc = decay * acc + float(conv[k, mode - 1])
    return acc
