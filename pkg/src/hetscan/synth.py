"""Synthetic series with known scaling: white noise, fGn, binomial cascade.

Random generators use numpy's PCG64 bit generator seeded explicitly, so a
given seed yields the same series on every platform.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadParam, EmbeddingFailure

RNG_ALGORITHM = "PCG64"
# relative size below which negative circulant eigenvalues count as rounding
EIGEN_RTOL = 1e-10


def rng(seed: int) -> np.random.Generator:
    if not 0 <= int(seed) < 2**64:
        raise BadParam(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(int(seed)))


def _check_length(n: int, minimum: int = 256):
    if n < minimum or n & (n - 1):
        raise BadParam(f"length must be a power of two >= {minimum}, got {n}")


def gen_white(n: int, seed: int) -> np.ndarray:
    if n < 1:
        raise BadParam(f"length must be positive, got {n}")
    return rng(seed).standard_normal(n)


def fgn_autocovariance(k, hurst: float):
    k = np.abs(np.asarray(k, dtype=float))
    e = 2.0 * hurst
    return 0.5 * (np.abs(k + 1) ** e - 2 * k**e + np.abs(k - 1) ** e)


def gen_fgn(hurst: float, n: int, seed: int) -> np.ndarray:
    """Unit-variance fractional Gaussian noise by circulant embedding (Davies-Harte)."""
    if not 0.0 < hurst < 1.0:
        raise BadParam(f"Hurst exponent must lie in (0, 1), got {hurst}")
    _check_length(n)
    gamma = fgn_autocovariance(np.arange(n + 1), hurst)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eig = np.fft.fft(row).real
    if eig.min() < -EIGEN_RTOL * eig.max():
        raise EmbeddingFailure(
            f"circulant embedding has a negative eigenvalue {eig.min():.3e} (H={hurst}, n={n})"
        )
    eig = np.maximum(eig, 0.0)
    g = rng(seed)
    m = row.size
    noise = g.standard_normal(m) + 1j * g.standard_normal(m)
    return np.fft.fft(np.sqrt(eig / m) * noise).real[:n]


def gen_binomial_cascade(a: float, levels: int) -> np.ndarray:
    """Deterministic binomial measure: each cell v splits into (a v, (1 - a) v)."""
    if not 0.0 < a < 1.0:
        raise BadParam(f"cascade weight must lie in (0, 1), got {a}")
    if not 1 <= levels <= 24:
        raise BadParam(f"cascade levels must be in 1..24, got {levels}")
    v = np.ones(1)
    for _ in range(levels):
        v = np.column_stack([v * a, v * (1.0 - a)]).ravel()
    return v


def analytic_cascade_h(q: float, a: float) -> float:
    """Generalized Hurst exponent of the binomial cascade.

    h(q) = 1/q - ln(a^q + (1-a)^q) / (q ln 2); at q = 0 the limit
    -(ln a + ln(1-a)) / (2 ln 2).
    """
    if not 0.0 < a < 1.0:
        raise BadParam(f"cascade weight must lie in (0, 1), got {a}")
    b = 1.0 - a
    if q == 0:
        return -(math.log(a) + math.log(b)) / (2 * math.log(2))
    return 1.0 / q - math.log(a**q + b**q) / (q * math.log(2))


class GeneratorKind(str, enum.Enum):
    WHITE = "white"
    FGN = "fgn"
    CASCADE = "cascade"


@dataclass(frozen=True)
class GeneratorSpec:
    kind: GeneratorKind
    length: int = 2**14
    seed: int | None = None
    hurst: float = 0.5
    a: float = 0.6

    def __post_init__(self):
        object.__setattr__(self, "kind", GeneratorKind(self.kind))
        if self.kind is GeneratorKind.CASCADE:
            levels = self.length.bit_length() - 1
            if self.length != 2**levels:
                raise BadParam(f"cascade length must be a power of two, got {self.length}")
        elif self.seed is None:
            raise BadParam(f"{self.kind.value} generator requires an explicit seed")

    @property
    def levels(self) -> int:
        return self.length.bit_length() - 1

    def generate(self) -> np.ndarray:
        if self.kind is GeneratorKind.WHITE:
            return gen_white(self.length, self.seed)
        if self.kind is GeneratorKind.FGN:
            return gen_fgn(self.hurst, self.length, self.seed)
        return gen_binomial_cascade(self.a, self.levels)
