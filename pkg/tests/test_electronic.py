import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from bandgap_resonance.errors import DomainError, SingularityError
from bandgap_resonance.electronic import (
    WireModel,
    electron_dispersion,
    electronic_force,
    electronic_pole_integral,
    electronic_pole_integral_quadrature,
    kappa0,
    solve_electronic_pole,
)


def test_dispersion_values():
    assert electron_dispersion(0.0, 2.0) == -2.0
    assert electron_dispersion(math.pi, 2.0) == 2.0
    assert abs(electron_dispersion(math.pi / 2, 2.0)) < 1e-15
    k = np.linspace(-math.pi, math.pi, 2001)
    band = electron_dispersion(k, 2.0)
    assert band.min() == -2.0 and k[np.argmin(band)] == 0.0
    assert np.array_equal(band, electron_dispersion(-k, 2.0))


def test_kappa0_values():
    assert kappa0(0.0, 1.0) == pytest.approx(math.pi / 2, abs=1e-15)
    assert kappa0(-1.0, 1.0) == 0.0
    assert kappa0(0.5, 1.0) == pytest.approx(2 * math.pi / 3, rel=1e-15)
    with pytest.raises(DomainError):
        kappa0(1.5, 1.0)
    with pytest.raises(DomainError):
        kappa0(0.0, 0.0)


def test_kappa0_round_trip():
    rng = np.random.default_rng(7)
    for e0 in rng.uniform(-1, 1, 100):
        assert abs(electron_dispersion(kappa0(e0, 1.0), 1.0) - e0) <= 1e-14


def test_model_validation():
    with pytest.raises(DomainError):
        WireModel(half_bandwidth=0.0)
    with pytest.raises(DomainError):
        WireModel(parity="odd")
    with pytest.raises(DomainError):
        WireModel(separation=-1.0)


def test_out_of_band_integral_closed_form():
    g, b, z = 0.3, 1.5, 2.5
    sym = WireModel(0.0, b, g, "symmetric", 0.0)
    expected = 2 * g * g * b * b / math.sqrt(z * z - b * b)
    assert electronic_pole_integral(z, sym) == pytest.approx(expected, rel=1e-11)
    plain, _ = integrate.quad(lambda k: 2 / (z + b * math.cos(k)), -math.pi, math.pi, epsabs=0, epsrel=1e-13)
    assert plain == pytest.approx(4 * math.pi / math.sqrt(z * z - b * b), rel=1e-12)
    assert electronic_pole_integral(z, sym.replace(parity="antisymmetric")) == 0.0


@pytest.mark.parametrize("x", [1e2 * math.sqrt(2), 1e3 * math.sqrt(2), 1e4 * math.sqrt(2)])
def test_out_of_band_large_distance_limit(x):
    g, b, z = 0.3, 1.0, 1.7
    model = WireModel(0.0, b, g, "symmetric", x)
    limit = g * g * b * b / math.sqrt(z * z - b * b)
    # for non-integer x the cutoff at k = +-pi leaves a 1/x remainder;
    # integration by parts bounds it by (2 h(pi) + total variation of h) / x
    h_pi, h_0 = 1 / (z - b), 1 / (z + b)
    bound = g * g * b * b / (2 * math.pi) * (2 * h_pi + 2 * (h_pi - h_0)) / x
    deviation = electronic_pole_integral(z, model) - limit
    assert abs(deviation) <= bound


@pytest.mark.parametrize("z", [-0.7, 0.0, 0.3, 0.9])
@pytest.mark.parametrize("parity", ["symmetric", "antisymmetric"])
def test_in_band_principal_value_matches_shrinking_window(z, parity):
    model = WireModel(0.0, 1.0, 0.2, parity, 7.3)
    sign = model.parity_sign
    pole = math.acos(-z)

    def f(k):
        return (1 + sign * math.cos(k * model.separation)) / (z + math.cos(k))

    def windowed(eps):
        opts = dict(epsabs=1e-14, epsrel=1e-13, limit=400)
        left, _ = integrate.quad(f, 0.0, pole - eps, **opts)
        right, _ = integrate.quad(f, pole + eps, math.pi, **opts)
        return left + right

    # the excised window leaves an error series in powers of eps
    eps = 1e-3
    w1, w2, w4 = windowed(eps), windowed(eps / 2), windowed(eps / 4)
    first, second = 2 * w2 - w1, 2 * w4 - w2
    brute = (4 * second - first) / 3
    brute *= model.coupling**2 / (2 * math.pi) * 2
    assert electronic_pole_integral(z, model) == pytest.approx(brute, rel=1e-8, abs=1e-12)


def test_band_edge_is_singular():
    with pytest.raises(SingularityError):
        electronic_pole_integral_quadrature(1.0, WireModel())


def test_antisymmetric_vanishes_at_contact():
    model = WireModel(0.0, 1.0, 0.2, "antisymmetric", 0.0)
    assert electronic_pole_integral(0.3, model) == 0.0


def test_zero_coupling_gives_bare_level():
    model = WireModel(0.25, 1.0, 0.0, "symmetric", 5.0)
    sol = solve_electronic_pole(model)
    assert sol.frequency == 0.25
    assert solve_electronic_pole(model, "fixed_point").frequency == 0.25


@settings(max_examples=20, deadline=None)
@given(
    e0=st.floats(min_value=-0.9, max_value=0.9),
    x=st.floats(min_value=1.0, max_value=60.0),
    g=st.floats(min_value=1e-3, max_value=0.3),
)
def test_first_iteration_shift_scales_with_coupling_squared(e0, x, g):
    model = WireModel(e0, 1.0, g, "symmetric", x)
    full = solve_electronic_pole(model).shift
    half = solve_electronic_pole(model.replace(coupling=g / 2)).shift
    assert half * 4 == pytest.approx(full, rel=1e-12, abs=1e-15 * g * g)


def test_fixed_point_converges_for_weak_coupling():
    model = WireModel(0.1, 1.0, 0.1, "symmetric", 10.3)
    first = solve_electronic_pole(model)
    fixed = solve_electronic_pole(model, "fixed_point", tol=1e-14)
    assert fixed.converged
    assert fixed.shift == pytest.approx(first.shift, rel=0.05)


def _force_curve(e0, xs, parity="symmetric", g=0.1):
    return np.array([electronic_force(WireModel(e0, 1.0, g, parity, x)) for x in xs])


def test_force_zeros_sit_near_odd_sites():
    # the zero near x = 3 is pulled 0.12 off by the same 1/x cutoff remainder
    xs = np.linspace(4.0, 22.0, 361)
    f = _force_curve(0.0, xs)
    crossings = []
    for i in np.nonzero(np.sign(f[:-1]) != np.sign(f[1:]))[0]:
        crossings.append(xs[i] - f[i] * (xs[i + 1] - xs[i]) / (f[i + 1] - f[i]))
    crossings = np.array(crossings)
    assert len(crossings) >= 8
    nearest_odd = 2 * np.round((crossings - 1) / 2) + 1
    assert np.max(np.abs(crossings - nearest_odd)) <= 0.1


def test_force_period_matches_in_band_wavenumber():
    xs = np.linspace(2.0, 100.0, 1961)
    f = _force_curve(0.5, xs)
    f = f - f.mean()
    spectrum = np.abs(np.fft.rfft(f * np.hanning(len(f)), n=16 * len(f)))
    freqs = np.fft.rfftfreq(16 * len(f), d=xs[1] - xs[0])
    period = 1 / freqs[np.argmax(spectrum[1:]) + 1]
    assert period == pytest.approx(2 * math.pi / kappa0(0.5, 1.0), rel=0.02)


def test_parity_flip_reverses_force():
    xs = np.linspace(10.0, 20.0, 21)
    sym = _force_curve(0.0, xs, "symmetric")
    anti = _force_curve(0.0, xs, "antisymmetric")
    assert anti == pytest.approx(-sym, rel=1e-9, abs=1e-12 * np.max(np.abs(sym)))


def test_symmetric_and_antisymmetric_shifts_alternate():
    xs = np.arange(1.0, 41.0)
    diff = np.array([
        solve_electronic_pole(WireModel(0.0, 1.0, 0.1, "symmetric", x)).shift
        - solve_electronic_pole(WireModel(0.0, 1.0, 0.1, "antisymmetric", x)).shift
        for x in xs
    ])
    # kappa0 = pi/2: the difference follows sin(pi x / 2), vanishing at even sites
    odd = diff[::2]
    assert np.all(np.abs(diff[1::2]) <= 1e-9 * np.max(np.abs(odd)))
    assert np.all(np.sign(odd[:-1]) != np.sign(odd[1:]))


def test_force_needs_two_lattice_units():
    with pytest.raises(DomainError):
        electronic_force(WireModel(separation=1.5))
