import math

import numpy as np
import pytest
from scipy import integrate

from mixtrace import DomainError, NumericError, QuadratureSpec, integrate_box, integrate_polar
from mixtrace import integrate_weighted_vertical, instantiate
from mixtrace.quadrature import DEFAULT_SPEC, composite_rule, octave_edges, sphere_directions


def test_inverse_square_root_weight():
    assert integrate_weighted_vertical(np.ones_like, -0.5, (0.0, 1.0)) == pytest.approx(2.0, rel=1e-12)


def test_linear_unweighted():
    assert integrate_weighted_vertical(lambda y: y, 0.0, (0.0, 1.0)) == pytest.approx(0.5, rel=1e-14)


def test_sine_against_adaptive_oracle():
    ref, _ = integrate.quad(lambda y: math.sin(y) * y**-0.9, 0, 1, epsabs=1e-13, epsrel=1e-12, limit=200)
    got = integrate_weighted_vertical(np.sin, -0.9, (0.0, 1.0))
    assert got == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("alpha", [-0.9, -0.5, 0.0, 1.0, 3.0])
def test_grading_integrates_the_weight(alpha):
    got = integrate_weighted_vertical(np.ones_like, alpha, (0.0, 1.0))
    assert abs(got - 1.0 / (1.0 + alpha)) <= 1e-10


def test_nonzero_lower_limit_rejected():
    with pytest.raises(DomainError):
        integrate_weighted_vertical(np.ones_like, 0.0, (0.5, 1.0))


@pytest.mark.parametrize("alpha", [-1.0, -1.5])
def test_divergent_weight_rejected(alpha):
    with pytest.raises(DomainError):
        integrate_weighted_vertical(np.ones_like, alpha, (0.0, 1.0))


def test_nonfinite_vertical_sample():
    with pytest.raises(NumericError):
        integrate_weighted_vertical(lambda y: np.full_like(y, np.nan), 0.0)


def test_gauss_exactness_single_panel():
    x, w = composite_rule([-1.0, 1.0], 2)
    assert float(np.dot(w, x**2)) == pytest.approx(2.0 / 3.0, abs=1e-15)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_indicator_integrates_to_one(d):
    f = instantiate({"kind": "indicator", "params": {"d": d}})
    assert integrate_box(f, DEFAULT_SPEC, d, f.breakpoints) == pytest.approx(1.0, abs=1e-14)


def test_gaussian_plane_integral():
    got = integrate_box(lambda x: np.exp(-np.sum(x * x, axis=-1)), QuadratureSpec(box_radius=8.0), 2)
    assert abs(got - math.pi) <= 1e-10


def test_nonfinite_box_sample():
    with pytest.raises(NumericError):
        integrate_box(lambda x: np.where(x[..., 0] > 7.0, np.inf, 0.0), d=1)


def test_unit_disc_area():
    got = integrate_polar(lambda r, xi: np.ones((r.shape[0], xi.shape[1])), 2, (0.0, 1.0))
    assert got == pytest.approx(math.pi, rel=1e-13)


def test_disc_second_moment():
    got = integrate_polar(lambda r, xi: r**2 * np.ones(xi.shape[1]), 2, (0.0, 1.0))
    assert got == pytest.approx(math.pi / 2, rel=1e-13)


def test_line_has_two_directions():
    got = integrate_polar(lambda r, xi: np.ones((r.shape[0], xi.shape[1])), 1, (0.0, 1.0))
    assert got == pytest.approx(2.0, rel=1e-14)


def _radial_bump(r2):
    out = np.zeros(np.shape(r2))
    inside = r2 < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return out


@pytest.mark.parametrize("d", [1, 2])
def test_polar_agrees_with_box_for_radial_function(d):
    spec = QuadratureSpec(box_radius=1.0, panels_per_axis=64, points_per_panel=8, radial_panels=8)
    box = integrate_box(lambda x: _radial_bump(np.sum(x * x, axis=-1)), spec, d)
    polar = integrate_polar(lambda r, xi: _radial_bump(r * r) * np.ones(xi.shape[1]), d, (0.0, 1.0), spec)
    assert abs(box - polar) <= 1e-6 * abs(box)


def test_polar_annulus_against_oracle():
    ref, _ = integrate.quad(lambda r: 2 * math.pi * r * math.exp(-r), 0.3, 5.0, epsabs=1e-14)
    spec = QuadratureSpec(radial_panels=4)
    got = integrate_polar(lambda r, xi: np.exp(-r) * np.ones(xi.shape[1]), 2, (0.3, 5.0), spec)
    assert got == pytest.approx(ref, rel=1e-10)


SMOOTH = {
    "gauss-1d": (1, lambda x: np.exp(-np.sum(x * x, axis=-1))),
    "gauss-2d": (2, lambda x: np.exp(-0.5 * np.sum(x * x, axis=-1))),
    "cos-gauss": (1, lambda x: np.cos(x[..., 0]) * np.exp(-x[..., 0] ** 2)),
    "poly-gauss-2d": (2, lambda x: (1 + x[..., 0] ** 2) * np.exp(-np.sum(x * x, axis=-1))),
}


@pytest.mark.parametrize("name", sorted(SMOOTH))
def test_panel_doubling_is_stable_for_smooth_integrands(name):
    d, f = SMOOTH[name]
    coarse = integrate_box(f, DEFAULT_SPEC, d)
    fine = integrate_box(f, DEFAULT_SPEC.refined(), d)
    assert abs(fine - coarse) <= 1e-8 * abs(fine)


def test_refined_scales_every_resolution_knob():
    r = DEFAULT_SPEC.refined(2)
    assert (r.panels_per_axis, r.vertical_panels, r.radial_panels) == (128, 256, 4)
    assert r.direction_count(2) == 4 * DEFAULT_SPEC.direction_count(2)


def test_octave_edges_split_geometrically():
    spec = QuadratureSpec(radial_panels=2)
    edges = octave_edges(1.0, 4.0, spec)
    assert np.allclose(edges, [1.0, 2**0.5, 2.0, 2**1.5, 4.0])
    head = octave_edges(0.0, 1.0, QuadratureSpec(radial_octaves=3))
    assert np.allclose(head, [0.0, 0.125, 0.25, 0.5, 1.0])


@pytest.mark.parametrize("d, n", [(1, 2), (2, 32), (3, 64)])
def test_direction_weights_sum_to_sphere_measure(d, n):
    dirs, w = sphere_directions(d, n)
    assert dirs.shape == (n, d)
    assert np.allclose(np.linalg.norm(dirs, axis=1), 1.0)
    assert w.sum() == pytest.approx(2 * math.pi ** (d / 2) / math.gamma(d / 2))


def test_seed_moves_three_dimensional_directions_only():
    a, _ = sphere_directions(3, 16, seed=0)
    b, _ = sphere_directions(3, 16, seed=7)
    assert not np.allclose(a, b)
    assert np.array_equal(sphere_directions(2, 8, 0)[0], sphere_directions(2, 8, 7)[0])


@pytest.mark.parametrize(
    "kwargs",
    [dict(box_radius=0.0), dict(panels_per_axis=0), dict(grading_exponent=0.5),
     dict(radial_panels=0), dict(directions=0), dict(radial_octaves=0)],
)
def test_spec_rejects(kwargs):
    with pytest.raises(DomainError):
        QuadratureSpec(**kwargs)
