"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 input/format error, 3 numerical
degeneracy.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import cwt, dwt, mfdfa, report, synth
from .errors import (
    DegenerateError,
    DirectionError,
    HetscanError,
    InputError,
    ParseError,
    UsageError,
)
from .grid import ImageGrid, SpatialSeries, read_pgm, serialize_pgm

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_DEGENERATE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_series_csv(data: bytes, provenance: str = "") -> SpatialSeries:
    """Single numeric column; a non-numeric first line is taken as a header."""
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8 text ({exc.reason})") from None
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        cell = line.strip()
        if not cell:
            continue
        if "," in cell:
            raise ParseError("expected a single column", lineno)
        try:
            v = float(cell)
        except ValueError:
            if lineno == 1:
                continue
            raise ParseError(f"not a number: {cell[:40]!r}", lineno) from None
        if not math.isfinite(v):
            raise ParseError(f"non-finite value {cell!r}", lineno)
        values.append(v)
    return SpatialSeries(np.array(values), provenance)


def read_series(path) -> SpatialSeries:
    with open(path, "rb") as fh:
        return parse_series_csv(fh.read(), os.fspath(path))


def series_csv(columns: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(columns))
    for row in zip(*columns.values()):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def refold_to_pgm(values, max_value: int = 65535) -> ImageGrid:
    """Square image, row-major, values mapped linearly onto [0, max_value]."""
    x = np.asarray(values, dtype=float)
    side = math.isqrt(x.size)
    if side * side != x.size:
        raise UsageError(f"series length {x.size} is not a perfect square")
    span = np.ptp(x)
    scaled = np.zeros_like(x) if span == 0 else (x - x.min()) / span * max_value
    return ImageGrid(side, side, max_value, np.round(scaled).astype(np.int64))


def _emit(text: str, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# -- argument definitions ------------------------------------------------------

def _add_dwt_args(p, d: report.AnalysisConfig):
    p.add_argument("--wavelet", choices=dwt.WAVELET_NAMES, default=d.wavelet,
                   help="orthonormal wavelet filter")
    p.add_argument("--levels", type=int, default=d.levels, help="decomposition levels")


def _add_cwt_args(p, d: report.AnalysisConfig):
    p.add_argument("--omega0", type=float, default=d.omega0, help="Morlet center frequency")
    p.add_argument("--cwt-scales", type=int, default=d.cwt_n_scales,
                   help="number of log-spaced Morlet scales")
    p.add_argument("--cwt-min-scale", type=float, default=d.cwt_min_scale,
                   help="smallest Morlet scale in samples")
    p.add_argument("--cwt-max-scale", type=float, default=d.cwt_max_scale,
                   help="largest Morlet scale in samples; None means N/8")


def _add_mfdfa_args(p, d: report.AnalysisConfig):
    p.add_argument("--q-min", type=float, default=d.q_min, help="smallest moment order q")
    p.add_argument("--q-max", type=float, default=d.q_max, help="largest moment order q")
    p.add_argument("--q-step", type=float, default=d.q_step, help="q grid spacing")
    p.add_argument("--order", type=int, default=d.detrend_order,
                   help="detrending polynomial order (0..3)")
    p.add_argument("--scale-min", type=int, default=d.mfdfa_min_scale,
                   help="smallest MFDFA segment size")
    p.add_argument("--scale-max", type=int, default=d.mfdfa_max_scale,
                   help="largest MFDFA segment size; None means N/4")
    p.add_argument("--n-scales", type=int, default=d.mfdfa_n_scales,
                   help="number of log-spaced MFDFA scales (log grid only)")
    p.add_argument("--scale-grid", choices=[g.value for g in mfdfa.ScaleGrid],
                   default=d.scale_grid, help="MFDFA scale spacing")
    p.add_argument("--zero-segments", choices=[z.value for z in mfdfa.ZeroSegmentPolicy],
                   default=d.zero_segment_policy,
                   help="treatment of zero-variance segments for q <= 0")


def build_parser() -> argparse.ArgumentParser:
    d = report.AnalysisConfig()
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="hetscan", formatter_class=fmt,
                     description="Heterogeneity analysis of horizontal vs vertical image unfoldings.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", formatter_class=fmt, help="full pipeline on a PGM image")
    p.add_argument("--input", help="PGM (P2/P5) image")
    p.add_argument("--out", help="JSON file, or directory for --format csv; JSON goes to stdout when omitted")
    p.add_argument("--format", choices=["json", "csv"], default="json", help="output format")
    p.add_argument("--raw", action="store_true", default=d.raw,
                   help="run Morlet and MFDFA on the raw series instead of the DWT fluctuations")
    _add_dwt_args(p, d)
    _add_cwt_args(p, d)
    _add_mfdfa_args(p, d)
    p.add_argument("--theta-hurst", type=float, default=d.thresholds.hurst,
                   help="threshold on |h_v(2) - h_h(2)|")
    p.add_argument("--theta-width", type=float, default=d.thresholds.width,
                   help="threshold on singularity width difference")
    p.add_argument("--theta-energy", type=float, default=d.thresholds.energy,
                   help="threshold on L1 distance of normalized energies")
    p.add_argument("--dump-config", action="store_true",
                   help="print the effective configuration as JSON and exit")

    p = sub.add_parser("dwt", formatter_class=fmt, help="normalized detail energy of a CSV series")
    p.add_argument("--input", help="single-column CSV series")
    p.add_argument("--out", help="energy CSV; stdout when omitted")
    p.add_argument("--split-out", help="write index,denoised,residual CSV here")
    _add_dwt_args(p, d)
    p.add_argument("--dump-config", action="store_true",
                   help="print the effective configuration as JSON and exit")

    p = sub.add_parser("cwt", formatter_class=fmt, help="Morlet semi-log scale profile of a CSV series")
    p.add_argument("--input", help="single-column CSV series")
    p.add_argument("--out", help="profile CSV; stdout when omitted")
    p.add_argument("--matrix-out", help="write the full scale x position power matrix here")
    _add_cwt_args(p, d)
    p.add_argument("--dump-config", action="store_true",
                   help="print the effective configuration as JSON and exit")

    p = sub.add_parser("mfdfa", formatter_class=fmt, help="MFDFA of a CSV series")
    p.add_argument("--input", help="single-column CSV series")
    p.add_argument("--out-dir", help="write fluctuation.csv, hurst.csv, spectrum.csv here; "
                                     "the hurst table goes to stdout when omitted")
    _add_mfdfa_args(p, d)
    p.add_argument("--dump-config", action="store_true",
                   help="print the effective configuration as JSON and exit")

    p = sub.add_parser("synth", formatter_class=fmt, help="generate a synthetic test series")
    p.add_argument("--kind", choices=[k.value for k in synth.GeneratorKind], default="fgn",
                   help="generator")
    p.add_argument("--length", type=int, default=2**14,
                   help="series length (power of two for fgn/cascade)")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (required for white/fgn)")
    p.add_argument("--hurst", type=float, default=0.7, help="fGn Hurst exponent")
    p.add_argument("--a", type=float, default=0.6, help="cascade weight")
    p.add_argument("--out", help="single-column CSV; stdout when omitted")
    p.add_argument("--pgm-out", help="also write a square 16-bit PGM (row-major refold)")
    p.add_argument("--dump-config", action="store_true",
                   help="print the effective configuration as JSON and exit")
    return parser


def config_from_args(args) -> report.AnalysisConfig:
    d = report.AnalysisConfig()
    get = lambda name, default: getattr(args, name, default)  # noqa: E731
    return report.AnalysisConfig(
        wavelet=get("wavelet", d.wavelet),
        levels=get("levels", d.levels),
        omega0=get("omega0", d.omega0),
        cwt_n_scales=get("cwt_scales", d.cwt_n_scales),
        cwt_min_scale=get("cwt_min_scale", d.cwt_min_scale),
        cwt_max_scale=get("cwt_max_scale", d.cwt_max_scale),
        q_min=get("q_min", d.q_min),
        q_max=get("q_max", d.q_max),
        q_step=get("q_step", d.q_step),
        detrend_order=get("order", d.detrend_order),
        mfdfa_min_scale=get("scale_min", d.mfdfa_min_scale),
        mfdfa_max_scale=get("scale_max", d.mfdfa_max_scale),
        mfdfa_n_scales=get("n_scales", d.mfdfa_n_scales),
        scale_grid=get("scale_grid", d.scale_grid),
        zero_segment_policy=get("zero_segments", d.zero_segment_policy),
        raw=get("raw", d.raw),
        thresholds=report.Thresholds(
            hurst=get("theta_hurst", d.thresholds.hurst),
            width=get("theta_width", d.thresholds.width),
            energy=get("theta_energy", d.thresholds.energy),
        ),
    )


# -- subcommands -----------------------------------------------------------------

def _require_input(args):
    if not args.input:
        raise UsageError("--input is required")
    return args.input


def cmd_analyze(args, cfg):
    grid = read_pgm(_require_input(args))
    r = report.analyze_image(grid, cfg)
    if args.format == "csv":
        if not args.out:
            raise UsageError("--format csv needs --out DIRECTORY")
        report.write_csv_bundle(r, args.out)
    else:
        _emit(report.report_json(r), args.out)


def cmd_dwt(args, cfg):
    x = read_series(_require_input(args)).values
    dec = dwt.dwt_forward(x, cfg.wavelet, cfg.levels)
    energy = dwt.normalized_energy(dec)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["level", "energy"])
    for j, e in enumerate(energy.detail_energy, start=1):
        w.writerow([j, repr(e)])
    w.writerow(["approx_fraction", repr(energy.approx_fraction)])
    _emit(buf.getvalue(), args.out)
    if args.split_out:
        split = dwt.denoise(x, cfg.wavelet, cfg.levels)
        _emit(series_csv({"index": np.arange(x.size), "denoised": split.denoised,
                          "residual": split.residual}), args.split_out)


def cmd_cwt(args, cfg):
    x = read_series(_require_input(args)).values
    scales = cwt.default_scales(x.size, cfg.cwt_n_scales, cfg.cwt_min_scale, cfg.cwt_max_scale)
    sg = cwt.cwt_morlet(x, scales, cfg.omega0)
    prof = cwt.semilog_profile(sg)
    s, p = zip(*prof.points)
    _emit(series_csv({"scale": s, "log10_mean_power": p}), args.out)
    if args.matrix_out:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scale"] + [str(b) for b in range(x.size)])
        for scale, row in zip(sg.scales, sg.power):
            w.writerow([repr(float(scale))] + [repr(float(v)) for v in row])
        _emit(buf.getvalue(), args.matrix_out)


def cmd_mfdfa(args, cfg):
    x = read_series(_require_input(args)).values
    res = mfdfa.run(x, cfg.mfdfa_config())
    hurst = report.csv_text(["q", "h", "stderr", "r2"],
                             [(e.q, e.h, e.stderr, e.r2) for e in res.hurst.entries])
    if not args.out_dir:
        _emit(hurst, None)
        return
    os.makedirs(args.out_dir, exist_ok=True)
    sp = res.spectrum
    files = {
        "fluctuation.csv": report.csv_text(["q", "s", "Fq"], list(res.table.rows())),
        "hurst.csv": hurst,
        "spectrum.csv": report.csv_text(["q", "alpha", "f_alpha"],
                                         list(zip(sp.q, sp.alpha, sp.f_alpha))),
    }
    for name, text in files.items():
        _emit(text, os.path.join(args.out_dir, name))


def cmd_synth(args):
    spec = synth.GeneratorSpec(args.kind, args.length, args.seed, args.hurst, args.a)
    x = spec.generate()
    _emit(series_csv({"value": x}), args.out)
    if args.pgm_out:
        with open(args.pgm_out, "wb") as fh:
            fh.write(serialize_pgm(refold_to_pgm(x)))


def _exit_code(exc) -> int:
    if isinstance(exc, DirectionError):
        exc = exc.cause
    if isinstance(exc, DegenerateError):
        return EXIT_DEGENERATE
    if isinstance(exc, InputError):
        return EXIT_INPUT
    return EXIT_USAGE


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "synth":
            if args.dump_config:
                cfg = {k: getattr(args, k) for k in ("kind", "length", "seed", "hurst", "a")}
                sys.stdout.write(json.dumps(cfg, sort_keys=True, indent=2) + "\n")
                return EXIT_OK
            cmd_synth(args)
            return EXIT_OK
        cfg = config_from_args(args).validate()
        if args.dump_config:
            sys.stdout.write(report.dumps_json(cfg.to_dict()))
            return EXIT_OK
        {"analyze": cmd_analyze, "dwt": cmd_dwt, "cwt": cmd_cwt, "mfdfa": cmd_mfdfa}[
            args.command](args, cfg)
    except HetscanError as exc:
        print(f"hetscan: {exc}", file=sys.stderr)
        return _exit_code(exc)
    except OSError as exc:
        name = exc.filename if exc.filename is not None else ""
        print(f"hetscan: cannot access {name}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
