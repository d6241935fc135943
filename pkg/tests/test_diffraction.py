import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.signal import find_peaks

from qensemble import diffraction as dif
from qensemble.errors import DomainError

LAM = 5e-7
K = 2 * math.pi / LAM
W, SEP, D = 1e-5, 2e-4, 1.0
PERIOD = LAM * D / SEP


@pytest.fixture(scope="module")
def double():
    return dif.SlitAperture.double(W, SEP, D)


def test_aperture_validation():
    with pytest.raises(DomainError):
        dif.SlitAperture(((0.0, 1e-5), (5e-6, 1e-5)), 1.0)
    with pytest.raises(DomainError):
        dif.SlitAperture(((0.0, 0.0),), 1.0)
    with pytest.raises(DomainError):
        dif.SlitAperture(((0.0, 1e-5),), 0.0)


def test_no_slits_no_light():
    a = dif.SlitAperture((), 1.0)
    assert dif.kirchhoff_amplitude(a, K, 0.0) == 0
    np.testing.assert_array_equal(dif.kirchhoff_amplitude(a, K, np.zeros(3)), 0)


def test_amplitude_against_adaptive_quadrature():
    a = dif.SlitAperture.single(W, D, center=3e-5, source_distance=0.4)
    x = 0.013

    def part(y, f):
        rho = math.hypot(D, x - y)
        return f((D / rho**2) * (1 + 1j / (K * rho)) * np.exp(1j * K * rho))

    lo, hi = 3e-5 - W / 2, 3e-5 + W / 2
    integral = quad(part, lo, hi, args=(np.real,), limit=400, epsabs=0, epsrel=1e-11)[0] \
        + 1j * quad(part, lo, hi, args=(np.imag,), limit=400, epsabs=0, epsrel=1e-11)[0]
    expected = 1j / (2 * LAM) * integral * np.exp(1j * K * 0.4)
    assert dif.kirchhoff_amplitude(a, K, x) == pytest.approx(expected, rel=1e-7)


def test_single_slit_axis_is_maximum():
    a = dif.SlitAperture.single(W, D)
    x = np.linspace(-0.2, 0.2, 4001)
    I = np.abs(dif.kirchhoff_amplitude(a, K, x)) ** 2
    assert np.argmax(I) == 2000


def test_single_slit_first_zero():
    a = dif.SlitAperture.single(W, D)
    x = np.linspace(0.0, 0.075, 7501)
    I = dif.intensity_pattern(a, K, x)
    first = x[np.argmin(I[: 6000])]
    assert first == pytest.approx(LAM * D / W, rel=0.02)


def test_double_slit_period(double):
    x = np.linspace(-3 * PERIOD, 3 * PERIOD, 6001)
    I = dif.intensity_pattern(double, K, x)
    peaks, _ = find_peaks(I)
    assert np.mean(np.diff(x[peaks])) == pytest.approx(PERIOD, rel=0.02)


def test_contrast_dichotomy(double):
    x = np.linspace(-3 * PERIOD, 3 * PERIOD, 3001)
    two = dif.fringe_contrast(x, dif.intensity_pattern(double, K, x), 0.0, 3 * PERIOD)
    one = dif.fringe_contrast(x, dif.intensity_pattern(double.cover(1), K, x), 0.0, 3 * PERIOD)
    assert two > 0.8 and one < 0.05


def test_symmetry_and_normalisation(double):
    x = np.linspace(-0.03, 0.03, 2001)
    I = dif.intensity_pattern(double, K, x)
    np.testing.assert_allclose(I, I[::-1], rtol=0, atol=1e-10 * I.max())
    assert np.trapezoid(I, x) == pytest.approx(1.0, abs=1e-9)


def test_fraunhofer_limit():
    a = dif.SlitAperture.double(2e-5, 1e-4, 1.0)
    a = dif.SlitAperture(a.slits, 1e4 * a.extent)
    x = np.linspace(-4 * LAM * a.screen_distance / 2e-5, 4 * LAM * a.screen_distance / 2e-5, 1201)
    kir = np.abs(dif.kirchhoff_amplitude(a, K, x)) ** 2
    fra = np.abs(dif.fraunhofer_amplitude(a, K, x)) ** 2
    kir, fra = kir / kir.max(), fra / fra.max()
    assert np.max(np.abs(kir - fra)) < 0.02


def test_near_field_warning():
    a = dif.SlitAperture.single(1e-3, 1e-2)
    with pytest.warns(dif.NearFieldWarning):
        dif.kirchhoff_amplitude(a, K, 0.0)


def test_refinement_converges():
    # coarse start order still reaches the refined answer
    a = dif.SlitAperture.single(2e-4, 1.0)
    x = np.array([0.0, 0.004, 0.011])
    np.testing.assert_allclose(dif.kirchhoff_amplitude(a, K, x, order=4),
                               dif.kirchhoff_amplitude(a, K, x, order=512), rtol=1e-7)


def test_wavenumber_must_be_positive(double):
    with pytest.raises(DomainError):
        dif.kirchhoff_amplitude(double, 0.0, 0.0)


# --- sampling ---------------------------------------------------------------


@pytest.fixture(scope="module")
def screen(double):
    x = np.linspace(-3.5 * PERIOD, 3.5 * PERIOD, 57)
    return x, dif.intensity_pattern(double, K, x)


def test_histogram_matches_intensity(screen):
    x, I = screen
    rec = dif.sample_hits(x, I, 100_000, seed=2024)
    assert dif.histogram_l1(rec, x, I) < 0.02


def test_sampling_is_deterministic(screen):
    x, I = screen
    a = dif.sample_hits(x, I, 1000, seed=5)
    b = dif.sample_hits(x, I, 1000, seed=5)
    c = dif.sample_hits(x, I, 1000, seed=6)
    np.testing.assert_array_equal(a.positions, b.positions)
    assert not np.array_equal(a.positions, c.positions)


def test_streams_are_independent(screen):
    x, I = screen
    a = dif.sample_hits(x, I, 1000, seed=5, stream=0)
    b = dif.sample_hits(x, I, 1000, seed=5, stream=1)
    assert not np.array_equal(a.positions, b.positions)


def test_single_event(screen):
    x, I = screen
    rec = dif.sample_hits(x, I, 1, seed=0)
    assert rec.positions.shape == (1,)
    with pytest.raises(DomainError):
        dif.sample_hits(x, I, 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 500))
def test_hits_stay_on_screen(seed, n):
    x = np.linspace(-1.0, 2.0, 31)
    I = 1.0 + np.sin(3 * x) ** 2
    pos = dif.sample_hits(x, I, n, seed=seed).positions
    assert pos.min() >= x[0] and pos.max() <= x[-1]


def test_zero_intensity_cells_never_hit():
    x = np.linspace(0, 1, 11)
    I = np.where(x < 0.5, 0.0, 1.0)
    pos = dif.sample_hits(x, I, 20_000, seed=3).positions
    assert pos.min() >= 0.4


def test_l1_decays_like_inverse_sqrt(screen):
    x, I = screen
    ns = np.array([10**3, 10**4, 10**5, 10**6])
    l1 = np.array([dif.histogram_l1(dif.sample_hits(x, I, int(n), seed=9), x, I) for n in ns])
    # fit l1 = c / sqrt(n) through the origin in the 1/sqrt(n) variable
    z = ns**-0.5
    c = np.dot(z, l1) / np.dot(z, z)
    ss_res = np.sum((l1 - c * z) ** 2)
    ss_tot = np.sum((l1 - l1.mean()) ** 2)
    assert 1 - ss_res / ss_tot > 0.9


def test_hit_csv(tmp_path, screen):
    from qensemble.io import read_csv

    x, I = screen
    rec = dif.sample_hits(x, I, 10, seed=1)
    header, data = read_csv(rec.to_csv(tmp_path / "h.csv"))
    assert header == ["index (1)", "x_hit (m)"]
    np.testing.assert_array_equal(data[:, 0], np.arange(10))
