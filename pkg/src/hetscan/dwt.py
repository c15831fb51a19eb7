"""Periodized orthonormal discrete wavelet transform (Haar, db2, db4).

Decomposition follows the usual pyramid: correlate with the lowpass and
highpass filters, keep every second output, recurse on the approximation.
Stages with an odd length are padded by repeating their last sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadLevels, DegenerateSignal, ShapeMismatch, TooShort, UsageError

BOUNDARY = "periodic"
DEFAULT_WAVELET = "db4"
DEFAULT_LEVELS = 5
# detail rms below this fraction of the signal rms is rounding noise
DEGENERATE_RTOL = 1e-10

# Lowpass taps from spectral factorization at 60 digits; db4 has 4 vanishing moments (8 taps).
_LOWPASS = {
    "haar": (0.70710678118654752440, 0.70710678118654752440),
    "db2": (
        0.48296291314453414337,
        0.83651630373780790558,
        0.22414386804201338103,
        -0.12940952255126038117,
    ),
    "db4": (
        0.23037781330889650086,
        0.71484657055291564709,
        0.63088076792985890788,
        -0.027983769416859854211,
        -0.18703481171909308408,
        0.030841381835560763627,
        0.032883011666885199735,
        -0.010597401785069032105,
    ),
}

WAVELET_NAMES = tuple(_LOWPASS)


@dataclass(frozen=True, eq=False)
class WaveletSpec:
    name: str
    lowpass: np.ndarray = field(repr=False)
    highpass: np.ndarray = field(repr=False)

    @property
    def length(self) -> int:
        return self.lowpass.size


def wavelet(name: str) -> WaveletSpec:
    """Return the filter pair for ``name`` (one of haar, db2, db4)."""
    try:
        lo = np.array(_LOWPASS[name.lower()])
    except KeyError:
        raise UsageError(f"unknown wavelet {name!r}; choose from {', '.join(WAVELET_NAMES)}") from None
    hi = lo[::-1] * (-1.0) ** np.arange(lo.size)
    lo.setflags(write=False)
    hi.setflags(write=False)
    return WaveletSpec(name.lower(), lo, hi)


def _as_wavelet(w) -> WaveletSpec:
    return w if isinstance(w, WaveletSpec) else wavelet(w)


@dataclass(frozen=True, eq=False)
class WaveletDecomposition:
    levels: int
    approx: np.ndarray
    details: tuple  # details[0] is level 1 (finest)
    original_length: int
    wavelet: str = DEFAULT_WAVELET
    boundary: str = BOUNDARY

    def energy(self) -> float:
        return float(np.sum(self.approx**2) + sum(np.sum(d**2) for d in self.details))


@dataclass(frozen=True)
class EnergyProfile:
    detail_energy: tuple
    approx_fraction: float


@dataclass(frozen=True, eq=False)
class DenoiseResult:
    denoised: np.ndarray
    residual: np.ndarray


def stage_lengths(n: int, levels: int) -> list[int]:
    """Signal length entering each stage, followed by the final approximation length."""
    out = [n]
    for _ in range(levels):
        out.append((out[-1] + 1) // 2)
    return out


def _analysis_step(x, w: WaveletSpec):
    if x.size % 2:
        x = np.append(x, x[-1])
    n = x.size
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(w.length)[None, :]) % n
    seg = x[idx]
    return seg @ w.lowpass, seg @ w.highpass


def _synthesis_step(a, d, w: WaveletSpec, out_len: int):
    n = 2 * a.size
    x = np.zeros(n)
    idx = (2 * np.arange(a.size)[:, None] + np.arange(w.length)[None, :]) % n
    np.add.at(x, idx, a[:, None] * w.lowpass[None, :] + d[:, None] * w.highpass[None, :])
    return x[:out_len]


def dwt_forward(series, w=DEFAULT_WAVELET, levels: int = DEFAULT_LEVELS) -> WaveletDecomposition:
    w = _as_wavelet(w)
    if levels < 1:
        raise BadLevels(f"levels must be >= 1, got {levels}")
    x = np.asarray(series, dtype=float).ravel()
    if x.size < 2**levels:
        raise TooShort(f"series of length {x.size} is too short for {levels} levels")
    details = []
    a = x
    for _ in range(levels):
        a, d = _analysis_step(a, w)
        details.append(d)
    return WaveletDecomposition(levels, a, tuple(details), x.size, w.name)


def dwt_inverse(decomp: WaveletDecomposition, w=None) -> np.ndarray:
    w = _as_wavelet(w if w is not None else decomp.wavelet)
    lengths = stage_lengths(decomp.original_length, decomp.levels)
    if len(decomp.details) != decomp.levels or decomp.approx.size != lengths[-1]:
        raise ShapeMismatch("approximation length inconsistent with original_length")
    a = np.asarray(decomp.approx, dtype=float)
    for j in range(decomp.levels, 0, -1):
        d = np.asarray(decomp.details[j - 1], dtype=float)
        if d.size != lengths[j]:
            raise ShapeMismatch(
                f"level {j} has {d.size} detail coefficients, expected {lengths[j]}"
            )
        a = _synthesis_step(a, d, w, lengths[j - 1])
    return a


def denoise(series, w=DEFAULT_WAVELET, levels: int = DEFAULT_LEVELS) -> DenoiseResult:
    """Split ``series`` into its level-``levels`` trend and the remaining fluctuations."""
    x = np.asarray(series, dtype=float).ravel()
    dec = dwt_forward(x, w, levels)
    trend = WaveletDecomposition(
        dec.levels, dec.approx, tuple(np.zeros_like(d) for d in dec.details),
        dec.original_length, dec.wavelet,
    )
    smooth = dwt_inverse(trend, w)
    return DenoiseResult(smooth, x - smooth)


def normalized_energy(decomp: WaveletDecomposition) -> EnergyProfile:
    """Share of detail energy carried by each level, finest first."""
    per_level = np.array([np.sum(np.square(d)) for d in decomp.details])
    detail_total = per_level.sum()
    total = detail_total + np.sum(np.square(decomp.approx))
    if detail_total <= DEGENERATE_RTOL**2 * total:
        raise DegenerateSignal("all detail coefficients are zero")
    return EnergyProfile(
        tuple(float(e) for e in per_level / detail_total),
        float(np.sum(np.square(decomp.approx)) / total),
    )
