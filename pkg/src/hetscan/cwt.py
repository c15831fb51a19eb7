"""Complex Morlet continuous wavelet transform and scale profiles."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadOmega, BadScale, ZeroPower

DEFAULT_OMEGA0 = 6.0
DEFAULT_N_SCALES = 32
DEFAULT_MIN_SCALE = 2.0
PROFILE_CONVENTION = "log10(mean power) vs linear scale"


@dataclass(frozen=True, eq=False)
class Scalogram:
    scales: np.ndarray
    power: np.ndarray = field(repr=False)  # shape (n_scales, N)
    omega0: float = DEFAULT_OMEGA0


@dataclass(frozen=True)
class ScaleProfile:
    points: tuple  # (scale, log10_mean_power) pairs

    @property
    def scales(self):
        return np.array([p[0] for p in self.points])

    @property
    def log10_mean_power(self):
        return np.array([p[1] for p in self.points])


def default_scales(n: int, count: int = DEFAULT_N_SCALES, smallest: float = DEFAULT_MIN_SCALE,
                   largest: float | None = None) -> np.ndarray:
    """Logarithmically spaced scales from ``smallest`` to ``largest`` (default n/8)."""
    if largest is None:
        largest = n / 8
    if count < 1:
        raise BadScale("need at least one scale")
    if smallest < 1 or largest < smallest:
        raise BadScale(f"invalid scale range [{smallest}, {largest}]")
    if count == 1:
        return np.array([float(smallest)])
    return np.geomspace(smallest, largest, count)


def morlet(u, omega0: float = DEFAULT_OMEGA0):
    return np.pi**-0.25 * np.exp(1j * omega0 * u - 0.5 * u**2)


def wrapped_offsets(n: int) -> np.ndarray:
    """Circular offsets 0..n-1 mapped to the symmetric range [-n/2, n/2)."""
    u = np.arange(n)
    return np.where(u < (n + 1) // 2, u, u - n).astype(float)


def cwt_morlet(series, scales=None, omega0: float = DEFAULT_OMEGA0) -> Scalogram:
    """Periodic Morlet transform of the mean-removed series, returned as |W|^2.

    W(s, b) = s^-1/2 sum_t x(t) conj(psi((t - b)/s)) with t - b wrapped
    circularly. Rows are evaluated as FFT cross-correlations.
    """
    if omega0 < 5:
        raise BadOmega(f"omega0 must be >= 5, got {omega0}")
    x = np.asarray(series, dtype=float).ravel()
    x = x - x.mean()
    n = x.size
    scales = default_scales(n) if scales is None else np.asarray(scales, dtype=float).ravel()
    if scales.size == 0 or np.any(scales < 1):
        raise BadScale("scales must be >= 1 sample")
    if np.any(np.diff(scales) <= 0):
        raise BadScale("scales must be strictly increasing")

    xf = np.fft.fft(x)
    u = wrapped_offsets(n)
    power = np.empty((scales.size, n))
    for i, s in enumerate(scales):
        # correlation with conj(psi) == ifft(X * conj(fft(psi)))
        kernel = morlet(u / s, omega0) / np.sqrt(s)
        w = np.fft.ifft(xf * np.conj(np.fft.fft(kernel)))
        power[i] = w.real**2 + w.imag**2
    return Scalogram(scales, power, float(omega0))


def semilog_profile(scalogram: Scalogram) -> ScaleProfile:
    mean_power = scalogram.power.mean(axis=1)
    if np.any(mean_power <= 0):
        bad = scalogram.scales[mean_power <= 0][0]
        raise ZeroPower(f"zero mean power at scale {bad:g}")
    return ScaleProfile(
        tuple((float(s), float(p)) for s, p in zip(scalogram.scales, np.log10(mean_power)))
    )


def fourier_period(scale, omega0: float = DEFAULT_OMEGA0):
    """Period (samples) at which a Morlet of the given scale responds most strongly."""
    return 4 * np.pi * np.asarray(scale) / (omega0 + np.sqrt(2 + omega0**2))
