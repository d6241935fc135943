import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qensemble import interferometry as itf
from qensemble.errors import BeamStoppingError, DomainError

F = itf.EmFieldState.plane_wave(B0=3.0, k0=2.0, u0=5.0)


# --- field state and primed fields ------------------------------------------


def test_field_state_invariants():
    with pytest.raises(DomainError):
        itf.EmFieldState(E0=1.0, B0=1.0, k0=1.0, omega0=2.0, u0=2.0)
    with pytest.raises(DomainError):
        itf.EmFieldState(E0=2.0, B0=1.0, k0=1.0, omega0=1.0, u0=2.0)
    e = np.array(itf.EmFieldState.polarization)
    assert np.allclose(np.cross(e[0], e[1]), e[2])


def test_zero_external_field_leaves_fields():
    p = itf.apply_uniform_field(F, 0.0, 0.7, 0.3, 0.1)
    c = math.cos(F.k0 * 0.3 - F.omega0 * 0.1)
    assert p == pytest.approx((F.E0 * c, 0.0, 0.0, F.B0 * c))


def test_theta_zero_and_half_pi():
    p = itf.apply_uniform_field(F, 4.0, 0.0, 0.3, 0.1)
    assert p.Ez == 0 and p.By == 0
    p = itf.apply_uniform_field(F, 4.0, math.pi / 2, 0.3, 0.1)
    c = math.cos(F.k0 * 0.3 - F.omega0 * 0.1)
    assert p.Bz == pytest.approx(F.B0 * c, abs=1e-14)


def test_explicit_ramp():
    p = itf.apply_uniform_field(F, 4.0, 0.0, 0.5, 0.0, tau=0.1)
    assert p.Ey == pytest.approx(F.E0 * math.cos(F.k0 * 0.5) - 4.0 * 5.0)
    with pytest.raises(DomainError):
        itf.apply_uniform_field(F, 4.0, 0.0, 0.5, 0.0, tau=0.0)


def test_potential_values():
    f = itf.EmFieldState.plane_wave(3.0, 1.0, 2.0)
    assert itf.em_potential(itf.apply_uniform_field(f, 0.0, 0.4, 0.0, 0.0), f.u0) == pytest.approx(9.0)
    assert itf.em_potential(itf.apply_uniform_field(f, 4.0, 0.4, 0.0, 0.0), f.u0) == pytest.approx(25.0, rel=1e-15)


@settings(max_examples=60)
@given(st.floats(0.1, 10), st.floats(0, 10), st.floats(-3, 3), st.floats(-3, 3))
def test_potential_independent_of_theta(B0, B_ext, x, t):
    f = itf.EmFieldState.plane_wave(B0, 1.3, 2.0)
    vals = [itf.em_potential(itf.apply_uniform_field(f, B_ext, th, x, t), f.u0)
            for th in np.linspace(0, math.pi, 7)]
    closed = itf.em_potential_closed(f, B_ext, x, t)
    assert np.max(np.abs(np.array(vals) - closed)) <= 1e-12 * max(1.0, closed)


# --- magnetic phase ---------------------------------------------------------


def test_phase_zero_field():
    assert itf.magnetic_phase_shift(1.0, 1e-6, 0.0, 1.0, 1.0) == (0.0, 0)


def test_phase_arithmetic():
    alpha, n = itf.magnetic_phase_shift(1.0, 1e-6, 2.5e-6, 1.0, 1.0)
    assert n == 2 and alpha == pytest.approx(math.pi, rel=1e-9)


@given(st.floats(1e-6, 1e-2))
def test_phase_is_linear(b):
    args = (0.1, 1e-7, 1.0, 3e2)
    p = [itf.unwrapped_phase(args[0], args[1], s * b, args[2], args[3]) for s in (1, 2, 3)]
    assert p[1] == pytest.approx(2 * p[0], rel=1e-12)
    assert p[2] - p[1] == pytest.approx(p[1] - p[0], rel=1e-12)


def test_beam_stopping():
    with pytest.raises(BeamStoppingError):
        itf.magnetic_phase_shift(1.0, 1e-6, 2.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        itf.magnetic_phase_shift(0.0, 1e-6, 0.1, 1.0, 1.0)


def test_velocity_and_sign_helpers():
    assert itf.velocity_shift(3.0, 4.0) == 1.5
    assert itf.kinetic_potential_shift(1.0, 2.0) == -3.0
    assert itf.kinetic_potential_shift(1.0, 2.0, sign=1) == 5.0
    with pytest.raises(DomainError):
        itf.kinetic_potential_shift(1.0, 2.0, sign=0)


# --- eraser -----------------------------------------------------------------

PHASES = np.linspace(0, 2 * math.pi, 73)


@pytest.mark.parametrize("stage,expected", [(itf.BASELINE, 1.0), (itf.ROTATOR, 0.0), (itf.ROTATOR_DIAGONAL, 1.0)])
def test_eraser_contrast_closed_form(stage, expected):
    vals = [itf.eraser_intensity(itf.EraserConfig(stage, p, 2.0)) for p in PHASES]
    assert itf.contrast(vals) == pytest.approx(expected, abs=1e-12)


def test_eraser_closed_form_values():
    assert itf.eraser_intensity(itf.EraserConfig(itf.BASELINE, math.pi, 1.0)) == pytest.approx(0.0, abs=1e-16)
    assert itf.eraser_intensity(itf.EraserConfig(itf.ROTATOR, 1.234, 3.0)) == 3.0
    assert itf.eraser_intensity(itf.EraserConfig(itf.ROTATOR_DIAGONAL, 0.0, 3.0)) == 1.5


def field_contrast(stage, E1=2.0, B1=0.5, c=4.0):
    vals = [itf.field_potential(*itf.eraser_fields(stage, E1, B1, p), c) for p in PHASES]
    return itf.contrast(vals), vals


@pytest.mark.parametrize("stage,expected", [(itf.BASELINE, 1.0), (itf.ROTATOR, 0.0), (itf.ROTATOR_DIAGONAL, 1.0)])
def test_eraser_contrast_from_fields(stage, expected):
    con, _ = field_contrast(stage)
    closed = itf.contrast([itf.eraser_intensity(itf.EraserConfig(stage, p, 1.0)) for p in PHASES])
    assert con == pytest.approx(expected, abs=1e-12)
    assert con == pytest.approx(closed, abs=1e-12)


def test_eraser_fields_against_closed_forms():
    E1, B1, c = 2.0, 0.5, 4.0
    base = (E1 / c) ** 2 + B1**2
    _, v0 = field_contrast(itf.BASELINE, E1, B1, c)
    _, v1 = field_contrast(itf.ROTATOR, E1, B1, c)
    _, v2 = field_contrast(itf.ROTATOR_DIAGONAL, E1, B1, c)
    for stage, vals, factor in ((itf.BASELINE, v0, 1.0), (itf.ROTATOR_DIAGONAL, v2, 1.0), (itf.ROTATOR, v1, 0.5)):
        closed = np.array([itf.eraser_intensity(itf.EraserConfig(stage, p, base)) for p in PHASES])
        np.testing.assert_allclose(vals, factor * closed, rtol=0, atol=1e-12)


def test_eraser_validation():
    with pytest.raises(DomainError):
        itf.EraserConfig("bogus", 0.0, 1.0)
    with pytest.raises(DomainError):
        itf.EraserConfig(itf.BASELINE, 0.0, 0.0)


# --- Zeno -------------------------------------------------------------------


def test_second_order_examples():
    assert itf.zeno_second_order_survival(0.3, 0.0) == 1.0
    assert itf.zeno_second_order_survival(0.0, 7.0) == 1.0
    assert itf.zeno_second_order_survival(0.01, 1.0) == pytest.approx(0.99)
    with pytest.warns(itf.ZenoValidityWarning):
        itf.zeno_second_order_survival(2.0, 1.0)


def test_repeated_measurement_examples():
    assert itf.zeno_repeated_measurement(0.2, 1.3, 1) == pytest.approx(itf.zeno_second_order_survival(0.2, 1.3), rel=1e-14)
    assert itf.zeno_repeated_measurement(1.0, 1.0, 10**6) == pytest.approx(1.0, abs=1e-5)
    assert itf.zeno_repeated_measurement(1.0, 1.0, 10**6) == pytest.approx(math.exp(-1e-6), rel=1e-11)
    with pytest.raises(DomainError):
        itf.zeno_repeated_measurement(1.0, 1.0, 0)


@pytest.mark.parametrize("x", [0.01, 0.1, 0.5])
def test_repeated_beats_single(x):
    single = 1 - x
    vals = [itf.zeno_repeated_measurement(x, 1.0, n) for n in range(2, 101)]
    assert min(vals) > single
    assert np.all(np.diff(vals) > 0)


@settings(max_examples=60)
@given(st.floats(1e-4, 0.99), st.integers(1, 500))
def test_zeno_ordering_property(x, n):
    assert itf.zeno_repeated_measurement(x, 1.0, n + 1) > itf.zeno_repeated_measurement(x, 1.0, n)


def test_system_validation():
    with pytest.raises(DomainError):
        itf.ZenoSystem(np.array([[0, 1], [0, 0]]), np.array([1, 0]))
    with pytest.raises(DomainError):
        itf.ZenoSystem(np.eye(2), np.array([1, 1]))
    with pytest.raises(DomainError):
        itf.ZenoSystem(np.eye(65), np.eye(65)[0])


def test_diagonal_h_is_stationary():
    z = itf.ZenoSystem(np.diag([0.3, -1.0, 2.0]), np.array([0, 1, 0]))
    for t in (0.0, 1.0, 17.0):
        assert itf.zeno_exact_evolution(z, t) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("v,t", [(1.0, 0.3), (0.7, 2.0), (2.5, 11.0)])
def test_rabi_oracle(v, t):
    z = itf.ZenoSystem(np.array([[0, v], [v, 0]]), np.array([1, 0]))
    assert itf.zeno_exact_evolution(z, t) == pytest.approx(math.cos(v * t) ** 2, abs=1e-10)


def random_system(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return itf.ZenoSystem((a + a.conj().T) / 2, psi / np.linalg.norm(psi))


@pytest.mark.parametrize("seed", range(4))
def test_short_time_expansion(seed):
    z = random_system(5, seed)
    dh2 = itf.energy_variance(z)
    # remainder / t^4 settles to the quartic coefficient
    c = [(itf.zeno_exact_evolution(z, t) - (1 - dh2 * t * t)) / t**4 for t in (4e-2, 2e-2, 1e-2)]
    assert abs(c[1] - c[2]) < 0.05 * abs(c[2]) + 1e-6
    assert abs(c[0] - c[1]) < 0.2 * abs(c[2]) + 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(0, 10**6), st.floats(0, 50))
def test_norm_conserved(dim, seed, t):
    z = random_system(dim, seed)
    assert np.linalg.norm(itf.evolve_state(z, t)) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("seed", range(3))
def test_interaction_picture_matches_eigh(seed):
    z = random_system(4, seed)
    for t in (0.0, 0.4, 1.7):
        a = itf.interaction_amplitudes(z, t)
        np.testing.assert_allclose(itf.state_from_amplitudes(z, a, t), itf.evolve_state(z, t), atol=1e-8)


# --- polarizer chain --------------------------------------------------------


def jones_chain(n):
    """Explicit rotator/polarizer product acting on horizontal light."""
    th = math.pi / (2 * n)
    rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    pol = np.array([[1.0, 0.0], [0.0, 0.0]])  # every polarizer along the input axis
    v = np.array([1.0, 0.0])
    for _ in range(n):
        v = pol @ (rot @ v)
    return float(v @ v)


@pytest.mark.parametrize("n", [1, 2, 3, 10, 57])
def test_chain_matches_jones_product(n):
    assert itf.polarizer_chain_transmission(n) == pytest.approx(jones_chain(n), abs=1e-13)


def test_chain_examples_and_limit():
    assert itf.polarizer_chain_transmission(1) == pytest.approx(0.0, abs=1e-30)
    assert itf.polarizer_chain_transmission(2) == pytest.approx(0.25, rel=1e-14)
    assert itf.polarizer_chain_transmission(10**6) > 0.99999
    assert itf.polarizer_chain_transmission(10, 0.99) == pytest.approx(itf.polarizer_chain_transmission(10) * 0.99**20)
    with pytest.raises(DomainError):
        itf.polarizer_chain_transmission(0)


# --- IFM --------------------------------------------------------------------


def event_tree(R):
    """Enumerate the bomb-in Michelson paths with classical branch weights."""
    outcomes = {"trigger": 0.0, "detect": 0.0, "other": 0.0}
    # first split: r -> mirror arm, t -> bomb arm
    for first in "rt":
        p = R if first == "r" else 1 - R
        if first == "t":
            outcomes["trigger"] += p
            continue
        # back at the splitter: t -> D_ifm, r -> source port
        for second in "rt":
            q = p * (R if second == "r" else 1 - R)
            outcomes["detect" if second == "t" else "other"] += q
    return outcomes


@pytest.mark.parametrize("R", [0.1, 0.5, 0.9, 0.99])
def test_ifm_event_tree(R):
    tree = event_tree(R)
    res = itf.ifm_figure_of_merit(R)
    assert sum(tree.values()) == pytest.approx(1.0, abs=1e-15)
    assert res.p_trigger == pytest.approx(tree["trigger"], abs=1e-15)
    assert res.p_detect == pytest.approx(tree["detect"], abs=1e-15)
    assert res.merit == pytest.approx(tree["detect"] / (tree["detect"] + tree["trigger"]), abs=1e-12)


def test_ifm_limits():
    assert itf.ifm_figure_of_merit(0.5).merit == pytest.approx(1 / 3, abs=1e-12)
    assert itf.ifm_figure_of_merit(0.0).merit == 0.0
    assert itf.ifm_figure_of_merit(1.0).merit == 0.5
    assert itf.ifm_figure_of_merit(0.99).merit > 0.497
    with pytest.raises(DomainError):
        itf.ifm_figure_of_merit(1.5)


@given(st.floats(0, 1), st.floats(0, 1))
def test_ifm_monotone(a, b):
    if a == b:
        return
    lo, hi = sorted((a, b))
    assert itf.ifm_figure_of_merit(lo).merit < itf.ifm_figure_of_merit(hi).merit <= 0.5
