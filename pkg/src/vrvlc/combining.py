"""Receiver diversity combining: EGC, SBC (select-best) and MRC.

Array functions take the detector (branch) axis last:

    signal        (..., N)      power from the serving transmitter, W
    interference  (..., N, K)   power from each interfering transmitter, W
    noise         (..., N)      total noise variance per detector, A^2

`BranchObservation` lists are a convenience front-end for the same math.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

COMBINERS = ("egc", "sbc", "mrc")


@dataclass(frozen=True)
class BranchObservation:
    signal_power: float
    interference_powers: tuple[float, ...] = ()
    noise_variance: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "interference_powers", tuple(self.interference_powers))
        if self.signal_power < 0 or any(p < 0 for p in self.interference_powers):
            raise ValueError("powers must be non-negative")
        if not self.noise_variance > 0:
            raise ValueError("noise_variance must be positive")


@dataclass(frozen=True)
class SinrReport:
    sinr_egc: float
    sinr_sbc: float
    sinr_mrc: float
    per_branch_sinr: tuple[float, ...] = field(default=())
    best_branch: int = 0

    def sinr(self, combiner: str) -> float:
        return getattr(self, f"sinr_{combiner}")


def _interference_sq(interference: np.ndarray, responsivity: float) -> np.ndarray:
    return np.sum((responsivity * interference) ** 2, axis=-1)


def branch_sinr(signal, interference, noise, responsivity: float) -> np.ndarray:
    signal = np.asarray(signal, dtype=float)
    noise = np.asarray(noise, dtype=float)
    if np.any(noise <= 0):
        raise ValueError("noise variance must be positive")
    return (responsivity * signal) ** 2 / (_interference_sq(np.asarray(interference, float), responsivity) + noise)


def egc_sinr(signal, interference, noise, responsivity: float) -> np.ndarray:
    signal = np.asarray(signal, dtype=float)
    num = np.sum(responsivity * signal, axis=-1) ** 2
    den = np.sum(_interference_sq(np.asarray(interference, float), responsivity) + noise, axis=-1)
    return num / den


def sbc_sinr(signal, interference, noise, responsivity: float) -> tuple[np.ndarray, np.ndarray]:
    """Best per-branch SINR and its index (first index on ties)."""
    s = branch_sinr(signal, interference, noise, responsivity)
    idx = np.argmax(s, axis=-1)
    return np.take_along_axis(s, idx[..., None], axis=-1)[..., 0], idx


def weighted_sinr(signal, interference, noise, weights, responsivity: float) -> np.ndarray:
    """Output SINR of a linear combiner with per-branch weights.

    All-zero weights give 0 rather than 0/0.
    """
    signal = np.asarray(signal, dtype=float)
    w = np.asarray(weights, dtype=float)
    # the ratio is scale-free in w; normalizing keeps w**2 clear of under/overflow
    scale = np.max(np.abs(w), axis=-1, keepdims=True)
    w = np.divide(w, scale, out=np.zeros_like(w), where=scale > 0)
    num = np.sum(w * responsivity * signal, axis=-1) ** 2
    den = np.sum(
        w**2 * (_interference_sq(np.asarray(interference, float), responsivity) + noise), axis=-1
    )
    with np.errstate(invalid="ignore", divide="ignore"):
        out = num / den
    return np.where(den > 0, out, 0.0)


def mrc_sinr(signal, interference, noise, responsivity: float) -> np.ndarray:
    lam = branch_sinr(signal, interference, noise, responsivity)
    return weighted_sinr(signal, interference, noise, lam, responsivity)


def _to_arrays(branches: Sequence[BranchObservation]):
    if not branches:
        raise ValueError("at least one branch is required")
    width = max(len(b.interference_powers) for b in branches)
    intf = np.zeros((len(branches), width))
    for i, b in enumerate(branches):
        intf[i, : len(b.interference_powers)] = b.interference_powers
    sig = np.array([b.signal_power for b in branches])
    noise = np.array([b.noise_variance for b in branches])
    return sig, intf, noise


def per_detector_sinr(b: BranchObservation, responsivity: float) -> float:
    sig, intf, noise = _to_arrays([b])
    return float(branch_sinr(sig, intf, noise, responsivity)[0])


def combine_egc(branches: Sequence[BranchObservation], responsivity: float) -> float:
    return float(egc_sinr(*_to_arrays(branches), responsivity))


def combine_sbc(branches: Sequence[BranchObservation], responsivity: float) -> tuple[float, int]:
    value, idx = sbc_sinr(*_to_arrays(branches), responsivity)
    return float(value), int(idx)


def combine_mrc(branches: Sequence[BranchObservation], responsivity: float) -> float:
    return float(mrc_sinr(*_to_arrays(branches), responsivity))


def combine(branches: Sequence[BranchObservation], responsivity: float) -> SinrReport:
    arrays = _to_arrays(branches)
    per_branch = branch_sinr(*arrays, responsivity)
    best = int(np.argmax(per_branch))
    return SinrReport(
        sinr_egc=float(egc_sinr(*arrays, responsivity)),
        sinr_sbc=float(per_branch[best]),
        sinr_mrc=float(mrc_sinr(*arrays, responsivity)),
        per_branch_sinr=tuple(float(s) for s in per_branch),
        best_branch=best,
    )


def to_db(sinr):
    """10*log10 of a power ratio; zero maps to -inf."""
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(np.asarray(sinr, dtype=float))
    return float(out) if out.ndim == 0 else out


def shannon_rate(sinr: float, bandwidth: float) -> float:
    """Achievable rate estimate B*log2(1 + SINR), bits/s."""
    if sinr < 0:
        raise ValueError("sinr must be non-negative")
    return bandwidth * math.log2(1.0 + sinr)
