import math

import numpy as np
import pytest
from scipy import integrate

from mixtrace import DomainError, ExponentConfig, PARTITION, extend, extension_limit_profile, instantiate
from mixtrace import modulus, mollify, trace_restrict
from mixtrace.reports import PASS
from mixtrace.smoothing import build_mollifier, convolution_bounds_check, extension_gap, smoothing_error_norms

CFG1 = ExponentConfig(1, (2.0,), 2.0, 0.0)


def _profile(r):
    return math.exp(-1.0 / (1.0 - r * r)) if r < 1 else 0.0


@pytest.mark.parametrize("d", [1, 2, 3])
def test_mollifier_has_unit_mass(d):
    phi = build_mollifier(d)
    sphere = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
    radial = integrate.quad(lambda r: _profile(r) * r ** (d - 1), 0, 1, epsabs=1e-14, epsrel=1e-13)[0]
    assert abs(phi.normalization * sphere * radial - 1.0) <= 1e-10


def test_mollifier_support_and_symmetry():
    phi = build_mollifier(1)
    assert phi(np.array([[1.0001]]))[0] == 0.0
    assert phi(np.array([[-1.0]]))[0] == 0.0
    assert phi(np.array([[0.0]]))[0] > 0
    moment = integrate.quad(lambda z: z * phi(np.array([[z]]))[0], -1, 1, epsabs=1e-13)[0]
    assert abs(moment) <= 1e-12


def test_mollifier_gradient_matches_differences():
    phi = build_mollifier(2)
    z = np.array([[0.3, -0.2], [0.1, 0.6], [-0.5, -0.5]])
    h = 1e-6
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        fd = (phi(z + e) - phi(z - e)) / (2 * h)
        assert np.allclose(phi.gradient(z)[:, i], fd, rtol=1e-6, atol=1e-9)


@pytest.mark.parametrize("d", [1, 2])
def test_mollify_reproduces_constants(d):
    g = instantiate({"kind": "constant", "params": {"d": d, "value": 2.5}})
    x = np.random.default_rng(0).uniform(-3, 3, size=(20, d))
    assert np.allclose(mollify(g, 3)(x), 2.5, rtol=1e-13)


def test_mollify_keeps_linear_pieces():
    g = instantiate("hat")
    x = np.linspace(0.1, 0.9, 17)[:, None]
    assert np.allclose(mollify(g, 4)(x), g(x), atol=1e-13)


def test_mollify_gaussian_against_dense_convolution():
    g = instantiate("gaussian-bump")
    phi = build_mollifier(1)
    delta = 2.0**-6
    kernel = lambda z: phi(np.array([[z / delta]]))[0] / delta  # noqa: E731
    xs = np.array([-1.3, -0.2, 0.0, 0.45, 2.0])
    ref = [integrate.quad(lambda z: kernel(z) * math.exp(-((x - z) ** 2) / 2), -delta, delta,
                          epsabs=1e-14, epsrel=1e-13)[0] for x in xs]
    assert np.allclose(mollify(g, 6)(xs[:, None]), ref, rtol=0, atol=1e-6)


def test_mollify_rejects_negative_level():
    with pytest.raises(DomainError):
        mollify(instantiate("hat"), -1)


def test_partition_sums_to_one():
    K = 16
    y = np.logspace((-K + 2) * math.log10(2), (K - 2) * math.log10(2), 4001)
    total = sum(PARTITION.psi(k, y) for k in range(-K, K + 1))
    assert np.max(np.abs(total - 1.0)) <= 1e-12


@pytest.mark.parametrize("k", [-4, 0, 1, 5, 12])
def test_partition_support_is_exact(k):
    lo, hi = 7 * 2.0 ** -(k + 4), 9 * 2.0 ** -(k + 3)
    assert PARTITION.support(k) == pytest.approx((lo, hi), rel=1e-15)
    outside = np.array([lo, lo * (1 - 1e-12), lo / 2, hi, hi * (1 + 1e-12), 2 * hi])
    assert np.all(PARTITION.psi(k, outside) == 0.0)
    inside = np.array([lo * (1 + 1e-2), hi * (1 - 1e-2), math.sqrt(lo * hi)])
    assert np.all(PARTITION.psi(k, inside) > 0.0)


def test_partition_derivative_scaling_constant():
    sups = [PARTITION.scaled_derivative_sup(k) for k in range(-4, 13)]
    assert max(sups) - min(sups) <= 1e-9 * max(sups)
    assert sups[0] <= PARTITION.derivative_bound * (1 + 1e-6)


def test_partition_overlap_is_pairwise():
    y = np.logspace(-5, 1, 3001)
    counts = [len(PARTITION.active(float(v))) for v in y]
    assert max(counts) == 2
    assert min(counts) >= 1


def test_partition_derivative_matches_differences():
    y = np.linspace(0.3, 1.2, 50)
    h = 1e-7
    fd = (PARTITION.psi(1, y + h) - PARTITION.psi(1, y - h)) / (2 * h)
    assert np.allclose(PARTITION.psi_derivative(1, y), fd, atol=1e-5)


def test_convolution_bounds_for_zero():
    for r in convolution_bounds_check(instantiate("zero"), 0.25, CFG1):
        assert (r.lhs, r.rhs, r.status) == (0.0, 0.0, PASS)


def test_hat_smoothing_error_against_dense_oracle():
    delta = 0.25
    phi = build_mollifier(1)
    x = np.linspace(-1.5, 1.5, 30001)
    z = np.linspace(-delta, delta, 4001)
    kern = phi(z[:, None] / delta) / delta
    hat = lambda t: np.maximum(0.0, 1.0 - np.abs(t))  # noqa: E731
    smooth = np.array([np.trapezoid(kern * hat(xi - z), z) for xi in x])
    err_ref = np.trapezoid(np.abs(smooth - hat(x)), x)
    dkern = phi.gradient(z[:, None] / delta)[:, 0] / delta
    deriv_ref = np.trapezoid(np.abs([np.trapezoid(dkern * hat(xi - z), z) for xi in x]), x)

    cfg = ExponentConfig(1, (1.0,), 2.0, 0.0)
    err, dnorm = smoothing_error_norms(instantiate("hat"), delta, cfg)
    assert err == pytest.approx(err_ref, rel=1e-4)
    assert dnorm == pytest.approx(deriv_ref, rel=1e-4)
    smoothing, derivative = convolution_bounds_check(instantiate("hat"), delta, cfg)
    assert smoothing.status == PASS and smoothing.constant == 1.0
    assert smoothing.lhs <= modulus(instantiate("hat"), delta, cfg)


@pytest.mark.parametrize("k", range(1, 9))
def test_gaussian_convolution_bounds(k):
    smoothing, derivative = convolution_bounds_check(instantiate("gaussian-bump"), 2.0**-k, CFG1)
    assert smoothing.status == PASS and smoothing.constant == 1.0
    assert derivative.status == PASS
    assert derivative.check["explicit_ratio"] <= 1.0


def test_extension_of_constant_is_constant_near_boundary():
    g = instantiate({"kind": "constant", "params": {"value": 3.0}})
    E = extend(g, CFG1, 8)
    y = np.geomspace(2.0**-12, 7 / 16 * (1 - 1e-9), 40)
    x = np.full((40, 1), 0.3)
    assert np.allclose(E(x, y), 3.0, rtol=1e-12)


def test_extension_vanishes_away_from_boundary():
    E = extend(instantiate("hat"), CFG1)
    x = np.linspace(-1, 1, 9)[:, None]
    assert np.all(E(x, np.full(9, 0.9)) == 0.0)


def test_extension_needs_three_levels():
    with pytest.raises(DomainError):
        extend(instantiate("hat"), CFG1, 2)


def test_extension_rejects_halfspace_input():
    with pytest.raises(DomainError):
        extend(instantiate("ramp-cutoff"), CFG1)


def test_hat_extension_close_to_boundary_values():
    g = instantiate("hat")
    E = extend(g, CFG1)
    assert extension_gap(E, 2.0**-5) <= modulus(g, 2.0**-4, CFG1)


@pytest.mark.parametrize("s_range", [[2, 4], [4, 11]])
def test_limit_profile_range(s_range):
    with pytest.raises(DomainError):
        extension_limit_profile(instantiate("hat"), CFG1, s_range, k_max=12)


def test_limit_profile_decays_for_lipschitz_data():
    L = extension_limit_profile(instantiate("hat"), CFG1, range(4, 10))
    assert all(b < a for a, b in zip(L, L[1:]))
    assert L[-1] < 0.2 * L[0]


def test_limit_profile_of_constant():
    g = instantiate({"kind": "constant", "params": {"value": 2.0}})
    assert max(extension_limit_profile(g, CFG1, range(4, 10))) <= 1e-8


def test_trace_of_ramp_is_eta():
    u = instantiate("ramp-cutoff")
    x = np.linspace(-1, 1, 11)[:, None]
    assert np.array_equal(trace_restrict(u)(x), u.eta(x))


def test_trace_of_vertical_power_vanishes():
    t = trace_restrict(instantiate({"kind": "vertical-power", "params": {"m": 0.3}}))
    assert t.kind == "zero"


def test_trace_of_boundary_function_rejected():
    with pytest.raises(DomainError):
        trace_restrict(instantiate("hat"))


def test_trace_of_extension_recovers_data():
    g = instantiate("hat")
    E = extend(g, CFG1, 12)
    x = np.linspace(-1.5, 1.5, 301)[:, None]
    assert np.max(np.abs(trace_restrict(E)(x) - g(x))) <= 2.0**-12
