import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetscan.cwt import Scalogram, cwt_morlet, default_scales, fourier_period, semilog_profile
from hetscan.errors import BadOmega, BadScale, ZeroPower


def direct_power(x, scales, omega0):
    """|W(s, b)|^2 straight from the defining sum, circular offsets in [-N/2, N/2)."""
    x = np.asarray(x, float) - np.mean(x)
    n = x.size
    out = np.empty((len(scales), n))
    for i, s in enumerate(scales):
        for b in range(n):
            total = 0j
            for t in range(n):
                u = (t - b) % n
                if u >= (n + 1) // 2:
                    u -= n
                psi = np.pi**-0.25 * np.exp(1j * omega0 * u / s - 0.5 * (u / s) ** 2)
                total += x[t] * np.conj(psi)
            out[i, b] = abs(total / np.sqrt(s)) ** 2
    return out


@pytest.mark.parametrize("n", [64, 97])
def test_matches_direct_sum(rng, n):
    x = rng.standard_normal(n) + np.linspace(0, 3, n)
    scales = [1.0, 2.5, 4.0, 9.0]
    fast = cwt_morlet(x, scales, 6.0).power
    slow = direct_power(x, scales, 6.0)
    np.testing.assert_allclose(fast, slow, rtol=1e-6, atol=1e-9 * slow.max())


def test_matches_direct_sum_256(rng):
    x = rng.standard_normal(256)
    scales = [3.0, 17.0]
    np.testing.assert_allclose(
        cwt_morlet(x, scales, 7.0).power, direct_power(x, scales, 7.0), rtol=1e-6
    )


def test_zero_series():
    sg = cwt_morlet(np.zeros(128), [2.0, 4.0])
    assert np.all(sg.power == 0)
    with pytest.raises(ZeroPower):
        semilog_profile(sg)


def test_doubling_quadruples_power(rng):
    x = rng.standard_normal(256)
    a = cwt_morlet(x, [2.0, 8.0]).power
    b = cwt_morlet(2 * x, [2.0, 8.0]).power
    np.testing.assert_allclose(b, 4 * a, rtol=1e-12)


def test_sine_peak_scale():
    n = 1024
    x = np.sin(2 * np.pi * np.arange(n) / 32)
    scales = np.arange(2, 129, dtype=float)
    mean_power = cwt_morlet(x, scales, 6.0).power.mean(axis=1)
    peak = scales[np.argmax(mean_power)]
    assert 28 <= peak <= 36
    # peak period relation for omega0 = 6
    assert abs(fourier_period(peak) - 32) < 1.5


def test_uniform_power_profile():
    sg = Scalogram(np.array([2.0, 3.0, 5.0]), np.full((3, 10), 100.0))
    prof = semilog_profile(sg)
    assert [p[1] for p in prof.points] == [2.0, 2.0, 2.0]
    assert [p[0] for p in prof.points] == [2.0, 3.0, 5.0]


def test_profile_power_scaling_shifts_by_one(rng):
    power = rng.uniform(0.5, 3, (4, 32))
    a = semilog_profile(Scalogram(np.arange(1.0, 5.0), power)).log10_mean_power
    b = semilog_profile(Scalogram(np.arange(1.0, 5.0), 10 * power)).log10_mean_power
    np.testing.assert_allclose(b - a, 1.0, atol=1e-12)


def test_errors():
    with pytest.raises(BadScale):
        cwt_morlet(np.ones(64), [0.5, 2.0])
    with pytest.raises(BadScale):
        cwt_morlet(np.ones(64), [4.0, 2.0])
    with pytest.raises(BadOmega):
        cwt_morlet(np.ones(64), [2.0], omega0=4.0)


def test_default_scales():
    s = default_scales(4096)
    assert s.size == 32
    assert s[0] == pytest.approx(2.0) and s[-1] == pytest.approx(512.0)
    assert np.all(np.diff(s) > 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 255))
def test_circular_shift_covariance(seed, shift):
    x = np.random.Generator(np.random.PCG64(seed)).standard_normal(256)
    scales = [2.0, 5.0, 20.0]
    a = cwt_morlet(x, scales).power
    b = cwt_morlet(np.roll(x, shift), scales).power
    np.testing.assert_allclose(b, np.roll(a, shift, axis=1), rtol=1e-9, atol=1e-12 * a.max())
    pa = semilog_profile(Scalogram(np.array(scales), a)).log10_mean_power
    pb = semilog_profile(Scalogram(np.array(scales), b)).log10_mean_power
    np.testing.assert_allclose(pa, pb, atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100))
def test_amplitude_scaling_adds_two_log_k(seed, k):
    x = np.random.Generator(np.random.PCG64(seed)).standard_normal(128)
    scales = default_scales(128)
    a = semilog_profile(cwt_morlet(x, scales)).log10_mean_power
    b = semilog_profile(cwt_morlet(k * x, scales)).log10_mean_power
    np.testing.assert_allclose(b - a, 2 * np.log10(k), atol=1e-9)


def test_removing_a_tone_never_raises_matched_power():
    n = 1024
    t = np.arange(n)
    low = np.sin(2 * np.pi * t / 64)
    high = np.sin(2 * np.pi * t / 8)
    scales = np.array([8 / 1.033, 64 / 1.033])
    both = cwt_morlet(low + high, scales).power.mean(axis=1)
    only_low = cwt_morlet(low, scales).power.mean(axis=1)
    only_high = cwt_morlet(high, scales).power.mean(axis=1)
    assert only_low[0] <= both[0]  # high tone removed, its matched scale
    assert only_high[1] <= both[1]
