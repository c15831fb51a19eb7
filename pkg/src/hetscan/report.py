"""Per-image pipeline: analyze both unfoldings, compare, serialize.

For each direction the unfolded series goes through the level-L DWT
(normalized detail energy), the trend/fluctuation split, and then the
Morlet scale profile and MFDFA on the fluctuation series (or on the raw
series when ``AnalysisConfig.raw`` is set).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import cwt, dwt, mfdfa
from .errors import ConfigMismatch, DirectionError, HetscanError, InputError
from .grid import SCAN_ORDER, ImageGrid, UnfoldDirection, serialize_pgm, unfold

SCHEMA_VERSION = "1"
HETEROGENEOUS = "Heterogeneous"
NOT_DISTINGUISHED = "NotDistinguished"


@dataclass(frozen=True)
class Thresholds:
    hurst: float = 0.05
    width: float = 0.10
    energy: float = 0.10


@dataclass(frozen=True)
class AnalysisConfig:
    wavelet: str = dwt.DEFAULT_WAVELET
    levels: int = dwt.DEFAULT_LEVELS
    omega0: float = cwt.DEFAULT_OMEGA0
    cwt_n_scales: int = cwt.DEFAULT_N_SCALES
    cwt_min_scale: float = cwt.DEFAULT_MIN_SCALE
    cwt_max_scale: float | None = None  # None: N/8
    q_min: float = mfdfa.DEFAULT_Q_MIN
    q_max: float = mfdfa.DEFAULT_Q_MAX
    q_step: float = mfdfa.DEFAULT_Q_STEP
    detrend_order: int = mfdfa.DEFAULT_ORDER
    mfdfa_min_scale: int = mfdfa.DEFAULT_MIN_SCALE
    mfdfa_max_scale: int | None = None  # None: N/4
    mfdfa_n_scales: int = mfdfa.DEFAULT_N_SCALES
    scale_grid: str = mfdfa.ScaleGrid.LOG.value
    zero_segment_policy: str = mfdfa.ZeroSegmentPolicy.EXCLUDE.value
    raw: bool = False
    thresholds: Thresholds = field(default_factory=Thresholds)

    def mfdfa_config(self) -> mfdfa.MfdfaConfig:
        return mfdfa.MfdfaConfig(
            q_grid=mfdfa.default_q_grid(self.q_min, self.q_max, self.q_step),
            detrend_order=self.detrend_order,
            zero_segment_policy=mfdfa.ZeroSegmentPolicy(self.zero_segment_policy),
            min_scale=self.mfdfa_min_scale,
            max_scale=self.mfdfa_max_scale,
            n_scales=self.mfdfa_n_scales,
            scale_grid=mfdfa.ScaleGrid(self.scale_grid),
        )

    def validate(self):
        dwt.wavelet(self.wavelet)
        if self.levels < 1:
            raise dwt.BadLevels(f"levels must be >= 1, got {self.levels}")
        if self.omega0 < 5:
            raise cwt.BadOmega(f"omega0 must be >= 5, got {self.omega0}")
        mfdfa.default_q_grid(self.q_min, self.q_max, self.q_step)
        mfdfa.ZeroSegmentPolicy(self.zero_segment_policy)
        mfdfa.ScaleGrid(self.scale_grid)
        for name in ("hurst", "width", "energy"):
            if getattr(self.thresholds, name) < 0:
                raise ConfigMismatch(f"threshold {name} must be non-negative")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisConfig":
        d = dict(d)
        d["thresholds"] = Thresholds(**d.get("thresholds", {}))
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


@dataclass(frozen=True, eq=False)
class UnfoldAnalysis:
    direction: UnfoldDirection
    n_samples: int
    analysis_series: str  # "residual" or "raw"
    residual_energy_fraction: float
    energy: dwt.EnergyProfile
    scale_profile: cwt.ScaleProfile
    fluctuation: mfdfa.FluctuationTable
    hurst: mfdfa.HurstSpectrum
    spectrum: mfdfa.SingularitySpectrum
    config: AnalysisConfig


@dataclass(frozen=True)
class MismatchMetrics:
    delta_hurst: float
    delta_width: float
    energy_l1: float


@dataclass(frozen=True, eq=False)
class HeterogeneityReport:
    input_digest: str
    image_shape: tuple  # (rows, cols, max_value)
    config: AnalysisConfig
    horizontal: UnfoldAnalysis
    vertical: UnfoldAnalysis
    metrics: MismatchMetrics
    verdict: str

    @property
    def thresholds(self) -> Thresholds:
        return self.config.thresholds


def metadata(cfg: AnalysisConfig) -> dict:
    return {
        "unfold_scan": SCAN_ORDER,
        "dwt_boundary": dwt.BOUNDARY,
        "energy_normalization": "detail levels only; approximation reported as approx_fraction",
        "denoise_rule": "zero all detail levels",
        "analysis_series": "raw" if cfg.raw else "residual",
        "semilog_convention": cwt.PROFILE_CONVENTION,
        "q0_rule": "logarithmic average",
        "verdict_rule": "Heterogeneous iff any metric strictly exceeds its threshold",
    }


def image_digest(grid: ImageGrid) -> str:
    return "sha256:" + hashlib.sha256(serialize_pgm(grid, binary=True)).hexdigest()


def analyze_series(values, direction, cfg: AnalysisConfig) -> UnfoldAnalysis:
    """Run every stage on one unfolded series."""
    x = np.asarray(values, dtype=float)
    decomp = dwt.dwt_forward(x, cfg.wavelet, cfg.levels)
    energy = dwt.normalized_energy(decomp)
    split = dwt.denoise(x, cfg.wavelet, cfg.levels)
    centered = x - x.mean()
    total = float(np.dot(centered, centered))
    resid_frac = float(np.dot(split.residual, split.residual) / total) if total > 0 else 0.0

    target = x if cfg.raw else split.residual
    scales = cwt.default_scales(target.size, cfg.cwt_n_scales, cfg.cwt_min_scale, cfg.cwt_max_scale)
    profile = cwt.semilog_profile(cwt.cwt_morlet(target, scales, cfg.omega0))
    mf = mfdfa.run(target, cfg.mfdfa_config())
    return UnfoldAnalysis(
        UnfoldDirection(direction), int(x.size), "raw" if cfg.raw else "residual",
        resid_frac, energy, profile, mf.table, mf.hurst, mf.spectrum, cfg,
    )


def compare(v: UnfoldAnalysis, h: UnfoldAnalysis, thresholds: Thresholds | None = None):
    """Mismatch metrics between the two unfoldings and the resulting verdict."""
    if v.config != h.config:
        raise ConfigMismatch("analyses were produced with different configurations")
    if len(v.energy.detail_energy) != len(h.energy.detail_energy):
        raise ConfigMismatch("energy profiles have different numbers of levels")
    thresholds = thresholds or v.config.thresholds
    metrics = MismatchMetrics(
        delta_hurst=abs(v.hurst.hurst - h.hurst.hurst),
        delta_width=abs(v.spectrum.width - h.spectrum.width),
        energy_l1=float(np.sum(np.abs(np.subtract(v.energy.detail_energy, h.energy.detail_energy)))),
    )
    heterogeneous = (
        metrics.delta_hurst > thresholds.hurst
        or metrics.delta_width > thresholds.width
        or metrics.energy_l1 > thresholds.energy
    )
    return metrics, HETEROGENEOUS if heterogeneous else NOT_DISTINGUISHED


def analyze_image(grid: ImageGrid, cfg: AnalysisConfig | None = None) -> HeterogeneityReport:
    cfg = (cfg or AnalysisConfig()).validate()
    results = {}
    for direction in (UnfoldDirection.HORIZONTAL, UnfoldDirection.VERTICAL):
        try:
            series = unfold(grid, direction)
            results[direction] = analyze_series(series.values, direction, cfg)
        except HetscanError as exc:
            raise DirectionError(direction.value, exc) from exc
    h, v = results[UnfoldDirection.HORIZONTAL], results[UnfoldDirection.VERTICAL]
    metrics, verdict = compare(v, h, cfg.thresholds)
    return HeterogeneityReport(
        image_digest(grid), (grid.rows, grid.cols, grid.max_value), cfg, h, v, metrics, verdict,
    )


# -- serialization -------------------------------------------------------------

def _num(x):
    x = float(x)
    return x if np.isfinite(x) else None


def analysis_to_dict(a: UnfoldAnalysis) -> dict:
    return {
        "direction": a.direction.value,
        "n_samples": a.n_samples,
        "analysis_series": a.analysis_series,
        "denoise": {"residual_energy_fraction": a.residual_energy_fraction},
        "energy": {
            "detail_energy": list(a.energy.detail_energy),
            "approx_fraction": a.energy.approx_fraction,
        },
        "scale_profile": [
            {"scale": s, "log10_mean_power": p} for s, p in a.scale_profile.points
        ],
        "fluctuation": {
            "q": [float(q) for q in a.fluctuation.q_grid],
            "scales": [int(s) for s in a.fluctuation.scales],
            "fq": [[_num(v) for v in row] for row in a.fluctuation.fq],
        },
        "hurst": {
            "hurst": a.hurst.hurst,
            "entries": [asdict(e) for e in a.hurst.entries],
            "monotonicity_violations": list(a.hurst.monotonicity_violations),
        },
        "spectrum": {
            "q": list(a.spectrum.q),
            "tau": list(a.spectrum.tau),
            "alpha": list(a.spectrum.alpha),
            "f_alpha": list(a.spectrum.f_alpha),
            "width": a.spectrum.width,
        },
    }


def analysis_from_dict(d: dict, cfg: AnalysisConfig) -> UnfoldAnalysis:
    fl = d["fluctuation"]
    fq = np.array([[np.nan if v is None else v for v in row] for row in fl["fq"]], dtype=float)
    sp = d["spectrum"]
    return UnfoldAnalysis(
        direction=UnfoldDirection(d["direction"]),
        n_samples=int(d["n_samples"]),
        analysis_series=d["analysis_series"],
        residual_energy_fraction=d["denoise"]["residual_energy_fraction"],
        energy=dwt.EnergyProfile(tuple(d["energy"]["detail_energy"]), d["energy"]["approx_fraction"]),
        scale_profile=cwt.ScaleProfile(
            tuple((p["scale"], p["log10_mean_power"]) for p in d["scale_profile"])
        ),
        fluctuation=mfdfa.FluctuationTable(
            np.array(fl["q"], dtype=float), np.array(fl["scales"], dtype=int), fq
        ),
        hurst=mfdfa.HurstSpectrum(
            tuple(mfdfa.HurstEntry(**e) for e in d["hurst"]["entries"]),
            d["hurst"]["hurst"],
            tuple(d["hurst"]["monotonicity_violations"]),
        ),
        spectrum=mfdfa.SingularitySpectrum(
            tuple(sp["q"]), tuple(sp["tau"]), tuple(sp["alpha"]), tuple(sp["f_alpha"]), sp["width"]
        ),
        config=cfg,
    )


def report_to_dict(r: HeterogeneityReport) -> dict:
    rows, cols, max_value = r.image_shape
    return {
        "schema_version": SCHEMA_VERSION,
        "input_digest": r.input_digest,
        "image": {"rows": rows, "cols": cols, "max_value": max_value},
        "config": r.config.to_dict(),
        "metadata": metadata(r.config),
        "horizontal": analysis_to_dict(r.horizontal),
        "vertical": analysis_to_dict(r.vertical),
        "metrics": asdict(r.metrics),
        "thresholds": asdict(r.thresholds),
        "verdict": r.verdict,
    }


def report_from_dict(d: dict) -> HeterogeneityReport:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise InputError(f"unsupported report schema_version {d.get('schema_version')!r}")
    cfg = AnalysisConfig.from_dict(d["config"])
    img = d["image"]
    return HeterogeneityReport(
        d["input_digest"],
        (img["rows"], img["cols"], img["max_value"]),
        cfg,
        analysis_from_dict(d["horizontal"], cfg),
        analysis_from_dict(d["vertical"], cfg),
        MismatchMetrics(**d["metrics"]),
        d["verdict"],
    )


def dumps_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def report_json(r: HeterogeneityReport) -> str:
    return dumps_json(report_to_dict(r))


def load_report_json(text: str) -> HeterogeneityReport:
    return report_from_dict(json.loads(text))


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x)) if np.isfinite(x) else ""
    return str(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def csv_bundle(r: HeterogeneityReport) -> dict:
    """Map of file name to CSV text."""
    pairs = [("vertical", r.vertical), ("horizontal", r.horizontal)]
    files = {
        "energy.csv": csv_text(
            ["direction", "level", "energy"],
            [(d, j + 1, e) for d, a in pairs for j, e in enumerate(a.energy.detail_energy)],
        ),
        "scalogram.csv": csv_text(
            ["direction", "scale", "log10_mean_power"],
            [(d, s, p) for d, a in pairs for s, p in a.scale_profile.points],
        ),
        "fluctuation.csv": csv_text(
            ["direction", "q", "s", "Fq"],
            [(d, q, s, f) for d, a in pairs for q, s, f in a.fluctuation.rows()],
        ),
        "hurst.csv": csv_text(
            ["direction", "q", "h", "stderr", "r2"],
            [(d, e.q, e.h, e.stderr, e.r2) for d, a in pairs for e in a.hurst.entries],
        ),
        "spectrum.csv": csv_text(
            ["direction", "q", "alpha", "f_alpha"],
            [(d, q, al, f) for d, a in pairs
             for q, al, f in zip(a.spectrum.q, a.spectrum.alpha, a.spectrum.f_alpha)],
        ),
        "metrics.csv": csv_text(
            ["delta_hurst", "delta_width", "energy_l1",
             "theta_hurst", "theta_width", "theta_energy", "verdict"],
            [(r.metrics.delta_hurst, r.metrics.delta_width, r.metrics.energy_l1,
              r.thresholds.hurst, r.thresholds.width, r.thresholds.energy, r.verdict)],
        ),
    }
    return files


def write_json(r: HeterogeneityReport, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report_json(r))


def write_csv_bundle(r: HeterogeneityReport, directory):
    os.makedirs(directory, exist_ok=True)
    written = []
    for name, text in csv_bundle(r).items():
        path = os.path.join(directory, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        written.append(path)
    return written
