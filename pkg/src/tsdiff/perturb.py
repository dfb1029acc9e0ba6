"""Labeled reference/target pair generation.

A pair is built by perturbing one base series twice along a single
characteristic (trend, spike, dropout, noise, or baseline shift), once at a
smaller and once at a larger magnitude, then randomly assigning the two
results to the reference and target roles. The 12 relationship labels encode
(characteristic, level applied to the target).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .series import Series, minmax_scale, slope_sign
from .util import stream_rng


class Characteristic(str, Enum):
    UPWARD_TREND = "upward_trend"
    DOWNWARD_TREND = "downward_trend"
    SPIKE = "spike"
    DROPOUT = "dropout"
    NOISE = "noise"
    BASELINE = "baseline"


class PerturbLevel(str, Enum):
    SMALLER = "smaller"
    LARGER = "larger"


_CHAR_ORDER = list(Characteristic)

# Half-open magnitude ranges per perturbation level: (smaller, larger).
PARAM_RANGES: dict[Characteristic, tuple[tuple[float, float], tuple[float, float]]] = {
    Characteristic.UPWARD_TREND: ((0.0, 0.5), (0.5, 1.0)),
    Characteristic.DOWNWARD_TREND: ((0.0, 0.5), (0.5, 1.0)),
    Characteristic.SPIKE: ((0.0, 0.1), (0.1, 0.5)),
    Characteristic.DROPOUT: ((0.0, 0.1), (0.1, 0.5)),
    Characteristic.NOISE: ((0.0, 0.05), (0.05, 0.1)),
    Characteristic.BASELINE: ((0.0, 0.1), (0.1, 0.5)),
}


@dataclass(frozen=True)
class PerturbParams:
    """Concrete parameters for one perturbed series.

    Only the magnitude matching the characteristic is meaningful; the others
    stay 0. `seed` is the private noise stream for the noise characteristic.
    """

    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    theta: float = 0.0
    t_s: int = 0
    seed: int | None = None

    def magnitude(self, characteristic: Characteristic) -> float:
        return {
            Characteristic.UPWARD_TREND: self.alpha,
            Characteristic.DOWNWARD_TREND: self.alpha,
            Characteristic.SPIKE: self.beta,
            Characteristic.DROPOUT: self.beta,
            Characteristic.NOISE: self.gamma,
            Characteristic.BASELINE: self.theta,
        }[characteristic]


@dataclass(frozen=True)
class PairSample:
    pair_id: str
    ref: Series
    tgt: Series
    label: int
    characteristic: Characteristic
    target_level: PerturbLevel
    params_ref: PerturbParams
    params_tgt: PerturbParams
    base_id: str

    def __post_init__(self):
        if self.ref.length != self.tgt.length:
            raise ValueError(f"{self.pair_id}: ref/tgt length mismatch")
        if not 1 <= self.label <= 12:
            raise ValueError(f"{self.pair_id}: label {self.label} outside 1..12")


def sample_param(characteristic: Characteristic, level: PerturbLevel, rng: np.random.Generator) -> float:
    """Uniform draw from the characteristic's half-open magnitude range."""
    lo, hi = PARAM_RANGES[characteristic][0 if level is PerturbLevel.SMALLER else 1]
    return float(rng.uniform(lo, hi))


def label_of(characteristic: Characteristic, target_level: PerturbLevel) -> int:
    """Relationship label in 1..12 for (characteristic, target's level).

    Characteristics are ordered (upward trend, downward trend, spike, dropout,
    noise, baseline); each contributes the pair of labels (larger, smaller).
    """
    idx = _CHAR_ORDER.index(characteristic)
    return 2 * idx + (1 if target_level is PerturbLevel.LARGER else 2)


def label_to_characteristic_level(label: int) -> tuple[Characteristic, PerturbLevel]:
    """Inverse of label_of."""
    if not 1 <= label <= 12:
        raise ValueError(f"label {label} outside 1..12")
    char = _CHAR_ORDER[(label - 1) // 2]
    level = PerturbLevel.LARGER if label % 2 == 1 else PerturbLevel.SMALLER
    return char, level


def apply_trend(x: Series, alpha: float, direction: Characteristic) -> Series:
    """Add a linear ramp of total magnitude alpha, then re-scale onto [0, 1].

    The ramp runs over normalized time t/(length-1) so alpha is the full-range
    contribution regardless of series length. Trend is the only perturbation
    followed by re-scaling, which removes any plain magnitude offset between
    the two series of a pair.
    """
    if direction not in (Characteristic.UPWARD_TREND, Characteristic.DOWNWARD_TREND):
        raise ValueError(f"not a trend characteristic: {direction}")
    ramp = np.arange(x.length, dtype=np.float64) / (x.length - 1)
    sign = 1.0 if direction is Characteristic.UPWARD_TREND else -1.0
    return minmax_scale(Series(x.id, x.values + sign * alpha * ramp))


def apply_spike(x: Series, beta: float, t_s: int, sign: int) -> Series:
    """Add a single-sample impulse of height sign*beta at index t_s."""
    if not 0 <= t_s < x.length:
        raise ValueError(f"spike index {t_s} outside 0..{x.length - 1}")
    if sign not in (1, -1):
        raise ValueError(f"spike sign must be +1 or -1, got {sign}")
    out = x.values.copy()
    out[t_s] += sign * beta
    return Series(x.id, out)


def apply_noise(x: Series, gamma: float, rng: np.random.Generator) -> Series:
    """Add i.i.d. standard-normal noise scaled by gamma."""
    return Series(x.id, x.values + gamma * rng.standard_normal(x.length))


def apply_baseline(x: Series, theta: float) -> Series:
    """Shift every sample by the constant theta."""
    return Series(x.id, x.values + theta)


def perturb_series(base: Series, characteristic: Characteristic, params: PerturbParams) -> Series:
    """Apply one characteristic's perturbation; reproducible from params alone."""
    c = Characteristic
    if characteristic in (c.UPWARD_TREND, c.DOWNWARD_TREND):
        return apply_trend(base, params.alpha, characteristic)
    if characteristic is c.SPIKE:
        return apply_spike(base, params.beta, params.t_s, +1)
    if characteristic is c.DROPOUT:
        return apply_spike(base, params.beta, params.t_s, -1)
    if characteristic is c.NOISE:
        return apply_noise(base, params.gamma, np.random.default_rng(params.seed))
    return apply_baseline(base, params.theta)


def generate_pair(base: Series, rng: np.random.Generator, pair_id: str = "pair") -> PairSample:
    """Build one labeled pair from a resampled, min-max-scaled base series.

    Draw order is fixed (characteristic, smaller magnitude, larger magnitude,
    spike index, noise seeds, ref/tgt coin) so a pair is a pure function of
    the generator state. A drawn trend that opposes the base's slope is
    switched to the matching direction; a slope of exactly zero keeps the
    drawn direction.
    """
    char = _CHAR_ORDER[int(rng.integers(0, 6))]
    base_slope = slope_sign(base)
    if char is Characteristic.UPWARD_TREND and base_slope == -1:
        char = Characteristic.DOWNWARD_TREND
    elif char is Characteristic.DOWNWARD_TREND and base_slope == 1:
        char = Characteristic.UPWARD_TREND

    magnitudes = {
        PerturbLevel.SMALLER: sample_param(char, PerturbLevel.SMALLER, rng),
        PerturbLevel.LARGER: sample_param(char, PerturbLevel.LARGER, rng),
    }
    t_s = 0
    if char in (Characteristic.SPIKE, Characteristic.DROPOUT):
        # One shared spike position: the pair differs only in magnitude.
        t_s = int(rng.integers(0, base.length))
    seeds: dict[PerturbLevel, int | None] = {PerturbLevel.SMALLER: None, PerturbLevel.LARGER: None}
    if char is Characteristic.NOISE:
        drawn = rng.integers(0, 2**63, size=2)
        seeds = {PerturbLevel.SMALLER: int(drawn[0]), PerturbLevel.LARGER: int(drawn[1])}

    params = {level: _params_for(char, magnitudes[level], t_s, seeds[level]) for level in PerturbLevel}
    series = {level: perturb_series(base, char, params[level]) for level in PerturbLevel}

    target_level = PerturbLevel.LARGER if int(rng.integers(0, 2)) == 1 else PerturbLevel.SMALLER
    ref_level = PerturbLevel.SMALLER if target_level is PerturbLevel.LARGER else PerturbLevel.LARGER
    return PairSample(
        pair_id=pair_id,
        ref=Series(f"{pair_id}/ref", series[ref_level].values),
        tgt=Series(f"{pair_id}/tgt", series[target_level].values),
        label=label_of(char, target_level),
        characteristic=char,
        target_level=target_level,
        params_ref=params[ref_level],
        params_tgt=params[target_level],
        base_id=base.id,
    )


def _params_for(char: Characteristic, value: float, t_s: int, seed: int | None) -> PerturbParams:
    c = Characteristic
    if char in (c.UPWARD_TREND, c.DOWNWARD_TREND):
        return PerturbParams(alpha=value)
    if char in (c.SPIKE, c.DROPOUT):
        return PerturbParams(beta=value, t_s=t_s)
    if char is c.NOISE:
        return PerturbParams(gamma=value, seed=seed)
    return PerturbParams(theta=value)


def generate_base_signals(n: int, length: int, rng: np.random.Generator) -> list[Series]:
    """Synthesize base series: random walks, sinusoid sums, and ramps.

    The family is drawn uniformly per series; every output is min-max scaled.
    Sinusoid components use whole numbers of periods, so a single-component
    series has exactly 2*cycles sign changes in its sampled derivative.
    """
    if n < 1:
        raise ValueError("need n >= 1 base series")
    if length < 2:
        raise ValueError("need length >= 2")
    tau = np.arange(length, dtype=np.float64) / (length - 1)
    out = []
    for i in range(n):
        family = int(rng.integers(0, 3))
        if family == 0:
            values = np.cumsum(rng.standard_normal(length))
        elif family == 1:
            values = np.zeros(length)
            for _ in range(int(rng.integers(1, 5))):
                cycles = int(rng.integers(1, 7))
                amp = rng.uniform(0.5, 1.5)
                phase = rng.uniform(0.0, 2.0 * np.pi)
                values = values + amp * np.sin(2.0 * np.pi * cycles * tau + phase)
        else:
            knots = int(rng.integers(2, 6))
            xs = np.concatenate(([0.0], np.sort(rng.uniform(0.0, 1.0, knots)), [1.0]))
            ys = rng.uniform(0.0, 1.0, knots + 2)
            values = np.interp(tau, xs, ys)
        out.append(minmax_scale(Series(f"base-{i:05d}", values)))
    return out


def generate_dataset(
    bases: list[Series],
    counts: dict[str, int],
    seed: int,
) -> dict[str, list[PairSample]]:
    """Generate the train/val/test splits of labeled pairs.

    Each pair k (counted across all splits) draws from its own RNG sub-stream
    of (seed, k), so regeneration of any single pair, and any parallel
    schedule, reproduces the serial output exactly. Bases are consumed in
    seeded shuffled order and reshuffled each time the pool is exhausted.
    """
    if not bases:
        raise ValueError("need at least one base series")
    for key in ("train", "val", "test"):
        if counts.get(key, 0) < 0:
            raise ValueError(f"negative count for split {key!r}")

    n_bases = len(bases)
    order_cache: dict[int, np.ndarray] = {}

    def base_for(k: int) -> Series:
        cycle, pos = divmod(k, n_bases)
        if cycle not in order_cache:
            order_cache[cycle] = stream_rng(seed, "cycle", cycle).permutation(n_bases)
        return bases[order_cache[cycle][pos]]

    splits: dict[str, list[PairSample]] = {}
    k = 0
    for split in ("train", "val", "test"):
        pairs = []
        for i in range(counts.get(split, 0)):
            rng = stream_rng(seed, "data", k)
            pairs.append(generate_pair(base_for(k), rng, pair_id=f"{split}-{i:06d}"))
            k += 1
        splits[split] = pairs
    return splits
