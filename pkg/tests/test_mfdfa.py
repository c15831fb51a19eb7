import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetscan import mfdfa as M
from hetscan import synth
from hetscan.errors import (
    AllSegmentsDegenerate,
    BadScale,
    FitFailure,
    NegativeMomentOnZero,
    SingularFit,
    TooFewPoints,
    UsageError,
    ZeroVariance,
)


def naive_fq(x, s, q, m):
    """Textbook MFDFA written out with loops and normal equations."""
    x = [float(v) for v in x]
    n = len(x)
    mean = sum(x) / n
    prof, acc = [], 0.0
    for v in x:
        acc += v - mean
        prof.append(acc)
    ns = n // s
    starts = [b * s for b in range(ns)] + [n - (b + 1) * s for b in range(ns)]
    f2 = []
    for start in starts:
        ys = prof[start : start + s]
        ts = list(range(1, s + 1))
        # normal equations for coefficients c_0..c_m
        a = np.array([[sum(t ** (i + j) for t in ts) for j in range(m + 1)] for i in range(m + 1)], float)
        rhs = np.array([sum(y * t**i for t, y in zip(ts, ys)) for i in range(m + 1)], float)
        c = np.linalg.solve(a, rhs)
        fit = [sum(c[k] * t**k for k in range(m + 1)) for t in ts]
        f2.append(sum((y - f) ** 2 for y, f in zip(ys, fit)) / s)
    if q == 0:
        return math.exp(sum(math.log(v) for v in f2) / (2 * len(f2)))
    return (sum(v ** (q / 2) for v in f2) / len(f2)) ** (1 / q)


def test_profile_small():
    np.testing.assert_allclose(M.profile([1, 2, 3]), [-1, -1, 0])
    assert np.all(M.profile(np.full(70, 4.2)) == 0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=64, max_size=400))
def test_profile_ends_at_zero(xs):
    x = np.array(xs)
    p = M.profile(x)
    assert abs(p[-1]) <= 1e-9 * x.size * max(np.max(np.abs(x)), 1e-300)


def test_straight_line_profile_has_zero_f2():
    p = 0.5 + 0.25 * np.arange(64)
    sf = M.segment_fluctuation(p, 8, 1)
    assert sf.values.size == 16
    assert np.all(sf.values <= 1e-18)
    assert sf.excluded_count == 16


def test_two_point_segments_order_zero():
    p = np.tile([1.0, 3.0], 4)
    sf = M.segment_fluctuation(p, 2, 0)
    np.testing.assert_allclose(sf.values, 1.0, rtol=1e-14)


def test_both_ends_coverage():
    n, s = 100, 30
    p = np.arange(n, dtype=float) ** 2
    sf = M.segment_fluctuation(p, s, 0)
    assert sf.values.size == 6
    # with m = 0 the variance of p over a segment identifies where it sits
    expected = [np.var(p[i : i + s]) for i in (0, 30, 60)] + [np.var(p[n - (b + 1) * s : n - b * s]) for b in range(3)]
    np.testing.assert_allclose(sf.values, expected, rtol=1e-12)


def test_segment_errors():
    p = np.arange(100.0) ** 2
    with pytest.raises(SingularFit):
        M.segment_fluctuation(p, 2, 1)
    with pytest.raises(BadScale):
        M.segment_fluctuation(p, 101, 1)


def _sf(values):
    v = np.asarray(values, float)
    return M.SegmentFluctuations(4, 1, v, v == 0)


def test_constant_segments_give_sqrt_c():
    sf = _sf([2.5] * 6)
    for q in (-5, -1, 0, 0.5, 2, 5):
        assert M.fluctuation_function(sf, q) == pytest.approx(math.sqrt(2.5), rel=1e-14)


def test_q2_is_rms():
    vals = [1.0, 2.0, 7.0, 0.25]
    assert M.fluctuation_function(_sf(vals), 2) == pytest.approx(math.sqrt(np.mean(vals)), rel=1e-14)


def test_negative_q_hand_value():
    assert M.fluctuation_function(_sf([1.0, 4.0]), -2) == pytest.approx(1.2649110640673518, rel=1e-14)


def test_zero_segment_policies():
    sf = _sf([0.0, 1.0, 4.0])
    # excluded: divisor is the retained count
    assert M.fluctuation_function(sf, -2) == pytest.approx(1.2649110640673518, rel=1e-14)
    assert M.fluctuation_function(sf, 2) == pytest.approx(math.sqrt(2.5), rel=1e-14)
    with pytest.raises(NegativeMomentOnZero):
        M.fluctuation_function(sf, -2, "error")
    assert M.fluctuation_function(sf, 2, "error") == pytest.approx(math.sqrt(2.5))
    with pytest.raises(AllSegmentsDegenerate):
        M.fluctuation_function(_sf([0.0, 0.0]), 2)


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_brute_force_equivalence(rng, m):
    for n in (64, 131, 200):
        x = rng.standard_normal(n).cumsum() * 0.3 + rng.standard_normal(n)
        p = M.profile(x)
        for s in sorted({m + 2, m + 5, 9, 16, n // 4}):
            if s < m + 2 or s > n // 4:
                continue
            sf = M.segment_fluctuation(p, s, m)
            for q in (-5.0, -2.5, -1.0, 0.0, 0.5, 2.0, 3.5, 5.0):
                got = M.fluctuation_function(sf, q)
                ref = naive_fq(x, s, q, m)
                assert abs(got - ref) <= 1e-10 * ref, (n, s, q, m)


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_polynomial_profile_annihilated(m):
    t = np.arange(256) / 256
    p = sum((k + 1) * t**k for k in range(m + 1))
    sf = M.segment_fluctuation(p, 32, m)
    assert np.all(sf.values <= 1e-20)


def test_config_validation():
    with pytest.raises(UsageError):
        M.MfdfaConfig(scales=(16, 32, 64)).resolve(4096)
    with pytest.raises(UsageError):
        M.MfdfaConfig(q_grid=(-1.0, 0.0, 1.0)).resolve(4096)
    with pytest.raises(UsageError):
        M.MfdfaConfig(detrend_order=4).resolve(4096)
    with pytest.raises(BadScale):
        M.MfdfaConfig(scales=tuple(range(16, 16 + 8 * 200, 200))).resolve(1024)
    cfg = M.MfdfaConfig().resolve(2**14)
    assert len(cfg.scales) == 20
    assert cfg.scales[0] == 16 and cfg.scales[-1] == 4096
    assert cfg.q_grid[0] == -5.0 and cfg.q_grid[-1] == 5.0 and len(cfg.q_grid) == 21
    assert 0.0 in cfg.q_grid and 2.0 in cfg.q_grid


def test_dyadic_grid():
    assert M.dyadic_scales(2**14) == tuple(2**k for k in range(4, 13))


def test_zero_variance_rejected():
    with pytest.raises(ZeroVariance, match="degenerate: zero variance"):
        M.run(np.full(1000, 3.0))


def test_fit_failure_when_too_few_usable_scales():
    # flat run at the start: small forward segments are zero-variance, later ones are not
    x = np.r_[np.zeros(3000), np.random.Generator(np.random.PCG64(1)).standard_normal(1096)]
    p = M.profile(x)
    table = M.fluctuation_table(p, M.MfdfaConfig(scales=tuple(range(16, 16 + 8 * 4, 4))))
    assert np.all(np.isfinite(table.fq))
    bad = M.FluctuationTable(table.q_grid, table.scales, np.where(table.scales < 24, table.fq, np.nan))
    with pytest.raises(FitFailure):
        M.fit_hurst(bad)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-50, 50).filter(lambda k: abs(k) > 1e-3), st.floats(-1e4, 1e4))
def test_affine_invariance(seed, k, c):
    x = np.random.Generator(np.random.PCG64(seed)).standard_normal(2048)
    a = M.run(x)
    b = M.run(k * x + c)
    np.testing.assert_allclose(b.hurst.h, a.hurst.h, atol=1e-9)
    np.testing.assert_allclose(b.spectrum.tau, a.spectrum.tau, atol=1e-9)
    np.testing.assert_allclose(b.spectrum.alpha, a.spectrum.alpha, atol=1e-9)
    np.testing.assert_allclose(b.spectrum.f_alpha, a.spectrum.f_alpha, atol=1e-9)
    assert abs(b.spectrum.width - a.spectrum.width) <= 1e-9
    np.testing.assert_allclose(b.table.fq, abs(k) * a.table.fq, rtol=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fq_positive_and_monotone_in_q(seed):
    x = np.random.Generator(np.random.PCG64(seed)).standard_normal(1024) ** 3
    table, _ = M.hurst_spectrum(M.profile(x))
    assert np.all(table.fq > 0) and np.all(np.isfinite(table.fq))
    assert np.all(np.diff(table.fq, axis=0) >= -1e-12 * table.fq[1:])


def test_doubling_profile_doubles_fq(rng):
    p = M.profile(rng.standard_normal(1024))
    a, _ = M.hurst_spectrum(p)
    b, _ = M.hurst_spectrum(2 * p)
    np.testing.assert_allclose(b.fq, 2 * a.fq, rtol=1e-13)


def test_legendre_monofractal():
    q = np.array(M.default_q_grid())
    sp = M.legendre(q, np.full(q.size, 0.63))
    np.testing.assert_allclose(sp.alpha, 0.63, atol=1e-12)
    np.testing.assert_allclose(sp.f_alpha, 1.0, atol=1e-12)
    assert sp.width == pytest.approx(0.0, abs=1e-12)


def test_legendre_f_at_q0_is_one(rng):
    q = np.array(M.default_q_grid())
    sp = M.legendre(q, 0.8 + 0.1 * rng.standard_normal(q.size))
    i = list(q).index(0.0)
    assert sp.f_alpha[i] == 1.0
    assert sp.tau[i] == -1.0


def test_legendre_needs_five_points():
    with pytest.raises(TooFewPoints):
        M.legendre([0, 1, 2, 3], [1, 1, 1, 1])


def test_cascade_analytic_spectrum_shape():
    q = np.array(M.default_q_grid())
    h = [synth.analytic_cascade_h(v, 0.6) for v in q]
    sp = M.legendre(q, h)
    assert max(sp.f_alpha) <= 1 + 1e-6
    assert sp.f_alpha[list(q).index(0.0)] == pytest.approx(1.0, abs=1e-3)
    # 50-digit evaluation of the same finite-difference transform
    assert sp.width == pytest.approx(0.43598397603536105, abs=1e-12)


def test_monotonicity_flags():
    scales = np.array([16, 23, 32, 45, 64, 91, 128, 181])
    q = np.array([-1.0, 0.0, 1.0, 2.0, 3.0])
    h = np.array([0.7, 0.6, 0.9, 0.5, 0.4])  # rise at q = 1
    fq = scales[None, :].astype(float) ** h[:, None]
    hs = M.fit_hurst(M.FluctuationTable(q, scales, fq))
    np.testing.assert_allclose(hs.h, h, atol=1e-12)
    assert hs.hurst == pytest.approx(0.5)
    assert hs.monotonicity_violations == (1.0,)
    assert all(e.r2 == pytest.approx(1.0) for e in hs.entries)


def test_cascade_default_config_example():
    # library default grid (log spaced, m = 1) on the a = 0.6 cascade
    res = M.run(synth.gen_binomial_cascade(0.6, 14))
    for e in res.hurst.entries:
        tol = 0.10 if abs(e.q) > 3 else 0.05
        if abs(e.q) <= 2:
            assert abs(e.h - synth.analytic_cascade_h(e.q, 0.6)) <= tol
    assert res.hurst.monotonicity_violations == ()
