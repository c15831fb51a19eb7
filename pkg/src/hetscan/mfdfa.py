"""Multifractal detrended fluctuation analysis.

Pipeline: profile (cumulative sum of the mean-removed series), per-segment
polynomial detrending on segments cut from both ends, q-th order
averaging of the segment variances, log-log regression for h(q), and the
Legendre transform to the singularity spectrum.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    AllSegmentsDegenerate,
    BadScale,
    FitFailure,
    NegativeMomentOnZero,
    SingularFit,
    TooFewPoints,
    UsageError,
    ZeroVariance,
)

DEFAULT_ORDER = 1
DEFAULT_Q_MIN = -5.0
DEFAULT_Q_MAX = 5.0
DEFAULT_Q_STEP = 0.5
DEFAULT_MIN_SCALE = 16
DEFAULT_N_SCALES = 20
MIN_FIT_SCALES = 8

# A segment whose detrended rms falls below this fraction of its profile
# magnitude is treated as zero variance (exact zeros are lost to rounding).
ZERO_RTOL = 1e-10


class ZeroSegmentPolicy(str, enum.Enum):
    EXCLUDE = "exclude"
    ERROR = "error"


def default_q_grid(q_min=DEFAULT_Q_MIN, q_max=DEFAULT_Q_MAX, step=DEFAULT_Q_STEP) -> tuple:
    if step <= 0 or q_max < q_min:
        raise UsageError(f"invalid q range [{q_min}, {q_max}] step {step}")
    count = int(round((q_max - q_min) / step)) + 1
    grid = q_min + step * np.arange(count)
    # snap to multiples of the step so 0 and 2 appear exactly
    return tuple(float(q) for q in np.round(grid / step) * step)


def default_scales(n: int, smallest: int = DEFAULT_MIN_SCALE, largest: int | None = None,
                   count: int = DEFAULT_N_SCALES) -> tuple:
    """Unique integers, logarithmically spaced in [smallest, largest] (default n // 4)."""
    if largest is None:
        largest = n // 4
    if largest < smallest:
        raise BadScale(f"series of length {n} leaves no scales in [{smallest}, {largest}]")
    raw = np.round(np.geomspace(smallest, largest, count)).astype(int)
    return tuple(int(s) for s in np.unique(raw))


def dyadic_scales(n: int, smallest: int = DEFAULT_MIN_SCALE, largest: int | None = None) -> tuple:
    """Powers of two in [smallest, largest] (default n // 4)."""
    if largest is None:
        largest = n // 4
    lo = max(int(np.ceil(np.log2(smallest))), 0)
    hi = int(np.floor(np.log2(largest))) if largest >= 1 else -1
    if hi < lo:
        raise BadScale(f"series of length {n} leaves no scales in [{smallest}, {largest}]")
    return tuple(2**k for k in range(lo, hi + 1))


class ScaleGrid(str, enum.Enum):
    LOG = "log"
    DYADIC = "dyadic"


@dataclass(frozen=True)
class MfdfaConfig:
    scales: tuple | None = None  # None: resolved from the series length
    q_grid: tuple = field(default_factory=default_q_grid)
    detrend_order: int = DEFAULT_ORDER
    zero_segment_policy: ZeroSegmentPolicy = ZeroSegmentPolicy.EXCLUDE
    min_scale: int = DEFAULT_MIN_SCALE
    max_scale: int | None = None
    n_scales: int = DEFAULT_N_SCALES
    scale_grid: ScaleGrid = ScaleGrid.LOG

    def resolve(self, n: int) -> "MfdfaConfig":
        """Fill in the scale grid for length ``n`` and validate everything."""
        cfg = self
        if cfg.scales is None:
            if ScaleGrid(cfg.scale_grid) is ScaleGrid.DYADIC:
                scales = dyadic_scales(n, cfg.min_scale, cfg.max_scale)
            else:
                scales = default_scales(n, cfg.min_scale, cfg.max_scale, cfg.n_scales)
            cfg = replace(cfg, scales=scales)
        cfg = replace(
            cfg,
            scales=tuple(int(s) for s in cfg.scales),
            q_grid=tuple(float(q) for q in cfg.q_grid),
            zero_segment_policy=ZeroSegmentPolicy(cfg.zero_segment_policy),
            scale_grid=ScaleGrid(cfg.scale_grid),
        )
        cfg.validate(n)
        return cfg

    def validate(self, n: int):
        m = self.detrend_order
        if not 0 <= m <= 3:
            raise UsageError(f"detrend order must be in 0..3, got {m}")
        s = np.asarray(self.scales)
        if s.size < MIN_FIT_SCALES:
            raise UsageError(
                f"need at least {MIN_FIT_SCALES} scales, got {s.size} (series length {n})"
            )
        if np.any(np.diff(s) <= 0):
            raise UsageError("scales must be strictly increasing")
        if s[0] < m + 2 or s[-1] > n // 4:
            raise BadScale(f"scales must lie in [{m + 2}, {n // 4}] for order {m} and length {n}")
        q = np.asarray(self.q_grid)
        if np.any(np.diff(q) <= 0):
            raise UsageError("q grid must be strictly increasing")
        if 2.0 not in self.q_grid:
            raise UsageError("q grid must contain 2.0 (Hurst exponent readout)")


@dataclass(frozen=True, eq=False)
class SegmentFluctuations:
    scale: int
    order: int
    values: np.ndarray  # F^2(b, s) for all 2 * N_s segments
    zero_mask: np.ndarray  # True where the segment counts as zero variance

    @property
    def excluded_count(self) -> int:
        return int(self.zero_mask.sum())

    @property
    def retained(self) -> np.ndarray:
        return self.values[~self.zero_mask]


@dataclass(frozen=True, eq=False)
class FluctuationTable:
    q_grid: np.ndarray
    scales: np.ndarray
    fq: np.ndarray  # shape (n_q, n_scales); NaN where a scale had no usable segment

    def rows(self):
        for i, q in enumerate(self.q_grid):
            for j, s in enumerate(self.scales):
                yield float(q), int(s), float(self.fq[i, j])


@dataclass(frozen=True)
class HurstEntry:
    q: float
    h: float
    stderr: float
    r2: float


@dataclass(frozen=True)
class HurstSpectrum:
    entries: tuple
    hurst: float
    monotonicity_violations: tuple = ()  # q values where h rises by more than 3 stderr

    @property
    def q(self):
        return np.array([e.q for e in self.entries])

    @property
    def h(self):
        return np.array([e.h for e in self.entries])


@dataclass(frozen=True)
class SingularitySpectrum:
    q: tuple
    tau: tuple
    alpha: tuple
    f_alpha: tuple
    width: float


def profile(series) -> np.ndarray:
    x = np.asarray(series, dtype=float).ravel()
    if x.size and np.ptp(x) == 0:
        return np.zeros_like(x)
    return np.cumsum(x - x.mean())


def _segments(p, s):
    n = p.size
    ns = n // s
    forward = p[: ns * s].reshape(ns, s)
    backward = p[n - ns * s :].reshape(ns, s)[::-1]
    return np.vstack([forward, backward])


def _fit_basis(s, m):
    """Orthonormal basis of degree-``m`` polynomials sampled at 0..s-1."""
    t = np.linspace(-1.0, 1.0, s)
    vander = np.vander(t, m + 1, increasing=True)
    q, r = np.linalg.qr(vander)
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-12 * diag.max():
        raise SingularFit(f"polynomial fit of order {m} is singular on segments of {s} samples")
    return q


def segment_fluctuation(p, s: int, m: int = DEFAULT_ORDER) -> SegmentFluctuations:
    """Detrended variance F^2(b, s) of each of the 2 * floor(N/s) segments.

    Segments run forward from the start and backward from the end; the
    backward ones are listed last, the one touching the end first.
    """
    p = np.asarray(p, dtype=float).ravel()
    n = p.size
    if m < 0:
        raise UsageError(f"detrend order must be >= 0, got {m}")
    if s <= m + 1:
        raise SingularFit(f"scale {s} cannot support an order-{m} fit")
    if s > n:
        raise BadScale(f"scale {s} exceeds the profile length {n}")
    seg = _segments(p, s)
    basis = _fit_basis(s, m)
    resid = seg - (seg @ basis) @ basis.T
    f2 = np.mean(resid**2, axis=1)
    magnitude = np.max(np.abs(seg), axis=1)
    zero = f2 <= (ZERO_RTOL * magnitude) ** 2
    return SegmentFluctuations(int(s), int(m), f2, zero)


def fluctuation_function(sf: SegmentFluctuations, q: float,
                         policy: ZeroSegmentPolicy | str = ZeroSegmentPolicy.EXCLUDE) -> float:
    """Generalized mean of order q/2 of the retained F^2 values, raised to 1/2.

    q = 0 uses the geometric mean. Zero-variance segments are dropped and
    the divisor is the retained count.
    """
    policy = ZeroSegmentPolicy(policy)
    kept = sf.retained
    if kept.size == 0:
        raise AllSegmentsDegenerate(f"every segment at scale {sf.scale} has zero variance")
    if sf.excluded_count and q <= 0 and policy is ZeroSegmentPolicy.ERROR:
        raise NegativeMomentOnZero(
            f"{sf.excluded_count} zero-variance segments at scale {sf.scale} with q = {q}"
        )
    logs = np.log(kept)
    if q == 0:
        return float(np.exp(0.5 * logs.mean()))
    # log-sum-exp form keeps large |q| from overflowing
    z = 0.5 * q * logs
    zmax = z.max()
    log_mean = zmax + np.log(np.mean(np.exp(z - zmax)))
    return float(np.exp(log_mean / q))


def _ols(x, y):
    n = x.size
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = np.sum((x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - ym) ** 2))
    stderr = np.sqrt(ss_res / (n - 2) / sxx) if n > 2 else 0.0
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(stderr), float(r2)


def fluctuation_table(p, cfg: MfdfaConfig) -> FluctuationTable:
    p = np.asarray(p, dtype=float).ravel()
    cfg = cfg.resolve(p.size)
    q_grid = np.asarray(cfg.q_grid)
    fq = np.full((q_grid.size, len(cfg.scales)), np.nan)
    for j, s in enumerate(cfg.scales):
        sf = segment_fluctuation(p, s, cfg.detrend_order)
        if sf.excluded_count == sf.values.size:
            continue
        for i, q in enumerate(q_grid):
            fq[i, j] = fluctuation_function(sf, q, cfg.zero_segment_policy)
    return FluctuationTable(q_grid, np.asarray(cfg.scales), fq)


def fit_hurst(table: FluctuationTable) -> HurstSpectrum:
    """Slope of ln F_q(s) against ln s for every q."""
    log_s = np.log(table.scales.astype(float))
    entries = []
    for i, q in enumerate(table.q_grid):
        ok = np.isfinite(table.fq[i]) & (table.fq[i] > 0)
        if ok.sum() < MIN_FIT_SCALES:
            if ok.sum() == 0:
                raise AllSegmentsDegenerate("no scale has a segment with nonzero variance")
            raise FitFailure(f"only {ok.sum()} usable scales for q = {q}")
        h, se, r2 = _ols(log_s[ok], np.log(table.fq[i, ok]))
        entries.append(HurstEntry(float(q), h, se, r2))
    hurst = next(e.h for e in entries if e.q == 2.0)
    violations = tuple(
        b.q for a, b in zip(entries, entries[1:])
        if b.h - a.h > 3 * np.hypot(a.stderr, b.stderr)
    )
    return HurstSpectrum(tuple(entries), hurst, violations)


def hurst_spectrum(p, cfg: MfdfaConfig | None = None):
    """Return ``(FluctuationTable, HurstSpectrum)`` for profile ``p``."""
    table = fluctuation_table(p, cfg or MfdfaConfig())
    return table, fit_hurst(table)


def legendre(q, h) -> SingularitySpectrum:
    """tau(q) = q h(q) - 1, alpha = d tau/dq by finite differences, f = q alpha - tau."""
    q = np.asarray(q, dtype=float)
    h = np.asarray(h, dtype=float)
    if q.size < 5:
        raise TooFewPoints(f"singularity spectrum needs >= 5 q values, got {q.size}")
    tau = q * h - 1.0
    alpha = np.empty_like(tau)
    alpha[1:-1] = (tau[2:] - tau[:-2]) / (q[2:] - q[:-2])
    alpha[0] = (tau[1] - tau[0]) / (q[1] - q[0])
    alpha[-1] = (tau[-1] - tau[-2]) / (q[-1] - q[-2])
    f = q * alpha - tau
    return SingularitySpectrum(
        tuple(q.tolist()), tuple(tau.tolist()), tuple(alpha.tolist()), tuple(f.tolist()),
        float(alpha.max() - alpha.min()),
    )


def singularity_spectrum(hs: HurstSpectrum) -> SingularitySpectrum:
    return legendre(hs.q, hs.h)


@dataclass(frozen=True, eq=False)
class MfdfaResult:
    config: MfdfaConfig
    table: FluctuationTable
    hurst: HurstSpectrum
    spectrum: SingularitySpectrum


def run(series, cfg: MfdfaConfig | None = None) -> MfdfaResult:
    """Full MFDFA of a raw series; rejects zero-variance input up front."""
    x = np.asarray(series, dtype=float).ravel()
    if x.size == 0 or np.ptp(x) == 0:
        raise ZeroVariance()
    cfg = (cfg or MfdfaConfig()).resolve(x.size)
    table, hs = hurst_spectrum(profile(x), cfg)
    return MfdfaResult(cfg, table, hs, singularity_spectrum(hs))
