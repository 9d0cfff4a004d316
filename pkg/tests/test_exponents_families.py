import inspect

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixtrace import DomainError, ExponentConfig, instantiate, smoothness_order
from mixtrace.families import BOUNDARY_KINDS, FAMILY_KINDS


@pytest.mark.parametrize("q, alpha, ell", [(2, 0, 0.5), (4, 1, 0.5), (2, 0.9, 0.05)])
def test_smoothness_order_examples(q, alpha, ell):
    assert smoothness_order(q, alpha) == pytest.approx(ell, abs=1e-15)


@pytest.mark.parametrize("alpha", [1.5, -1.0, 1.0])
def test_alpha_outside_window_names_interval(alpha):
    with pytest.raises(DomainError, match=r"alpha must lie in \(-1, q-1\)"):
        smoothness_order(2, alpha)


def test_smoothness_order_takes_no_horizontal_exponent():
    assert list(inspect.signature(smoothness_order).parameters) == ["q", "alpha"]


@given(
    q=st.floats(1.0, 6.0),
    frac=st.floats(0.01, 0.99),
    p1=st.lists(st.floats(1.0, 8.0), min_size=2, max_size=2),
    p2=st.lists(st.floats(1.0, 8.0), min_size=2, max_size=2),
)
@settings(max_examples=50, deadline=None)
def test_ell_ignores_p_vec(q, frac, p1, p2):
    alpha = -1.0 + frac * q
    a = ExponentConfig(2, tuple(p1), q, alpha)
    b = ExponentConfig(2, tuple(p2), q, alpha)
    assert a.ell == b.ell


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(d=0, p_vec=(), q=2),
        dict(d=4, p_vec=(2,) * 4, q=2),
        dict(d=2, p_vec=(2,), q=2),
        dict(d=1, p_vec=(0.5,), q=2),
        dict(d=1, p_vec=(float("inf"),), q=2),
        dict(d=1, p_vec=(2,), q=float("inf")),
        dict(d=1, p_vec=(2,), q=2, alpha=-2.0),
    ],
)
def test_exponent_config_rejects(kwargs):
    with pytest.raises(DomainError):
        ExponentConfig(**kwargs)


def test_vanishing_range_is_left_of_window():
    assert ExponentConfig(1, 2, 2, -1.0).vanishing_trace
    assert ExponentConfig(1, 2, 2, -1.5).vanishing_trace
    assert not ExponentConfig(1, 2, 2, -0.5).vanishing_trace
    assert ExponentConfig(1, 2, 2, -0.5).in_trace_window


def test_config_dict_round_trip():
    cfg = ExponentConfig(2, (1.0, 3.0), 1.5, 0.2)
    assert ExponentConfig.from_dict(cfg.to_dict()) == cfg


def test_gaussian_bump_is_one_at_origin():
    g = instantiate({"kind": "gaussian-bump", "params": {"d": 2, "scale": 1.0}})
    assert g(np.zeros((1, 2)))[0] == 1.0
    assert g.support_radius == float("inf")


def test_hat_definition():
    h = instantiate("hat")
    x = np.linspace(-2, 2, 41)[:, None]
    assert np.array_equal(h(x), np.maximum(0.0, 1.0 - np.abs(x[:, 0])))
    assert h.support_radius == 1.0


def test_vertical_power_definition():
    u = instantiate({"kind": "vertical-power", "params": {"m": 0.1}})
    eta = instantiate("bump")
    x = np.array([[0.3], [-0.5]])
    y = np.array([0.25, 0.7])
    assert np.allclose(u(x, y), eta(x) * y**0.1, rtol=1e-15)


@pytest.mark.parametrize(
    "spec",
    [
        "nope",
        {"kind": "hat", "params": {"d": 2}},
        {"kind": "bump", "params": {"radius": -1.0}},
        {"kind": "gaussian-bump", "params": {"width": 1.0}},
        {"kind": "tensor", "params": {"factors": []}},
        {"kind": "vertical-power", "params": {"m": -0.5}},
        {"kind": "hat", "extra": 1},
    ],
)
def test_instantiate_rejects(spec):
    with pytest.raises(DomainError):
        instantiate(spec)


def _samples(rng, n, d, lo, hi):
    return rng.uniform(lo, hi, size=(n, d))


GRADIENT_SPECS = [
    {"kind": "gaussian-bump", "params": {"d": 1}},
    {"kind": "gaussian-bump", "params": {"d": 2, "scale": 0.7}},
    {"kind": "bump", "params": {"d": 1}},
    {"kind": "bump", "params": {"d": 2, "radius": 1.5}},
    {"kind": "hat"},
    {"kind": "constant", "params": {"d": 2, "value": 3.0}},
    {"kind": "tensor", "params": {"factors": ["hat", "gaussian-bump"]}},
    {"kind": "vertical-power", "params": {"m": 2.0}},
    {"kind": "vertical-power", "params": {"m": 0.5}},
    {"kind": "log-decay"},
    {"kind": "ramp-cutoff", "params": {"eta": {"kind": "gaussian-bump", "params": {"d": 2}}}},
]


def _away_from_kinks(x, kinks, gap=1e-3):
    keep = np.ones(len(x), bool)
    for i, bp in enumerate(kinks):
        for c in bp:
            keep &= np.abs(x[:, i] - c) > gap
    return x[keep]


@pytest.mark.parametrize("spec", GRADIENT_SPECS, ids=lambda s: s["kind"])
def test_gradient_matches_central_differences(spec):
    f = instantiate(spec)
    rng = np.random.default_rng(0)
    step = 1e-4
    x = _away_from_kinks(_samples(rng, 300, f.d, -0.8, 0.8), f.breakpoints)[:100]
    assert len(x) == 100
    if f.is_boundary:
        g = f.grad(x)
        for i in range(f.d):
            e = np.zeros(f.d)
            e[i] = step
            fd = (f(x + e) - f(x - e)) / (2 * step)
            assert np.all(np.abs(g[:, i] - fd) <= 1e-5 * (1 + np.abs(g[:, i])))
        return
    y = rng.uniform(0.1, 0.9, size=100)
    g = f.grad(x, y)
    for i in range(f.d):
        e = np.zeros(f.d)
        e[i] = step
        fd = (f(x + e, y) - f(x - e, y)) / (2 * step)
        assert np.all(np.abs(g[:, i] - fd) <= 1e-5 * (1 + np.abs(g[:, i])))
    fd = (f(x, y + step) - f(x, y - step)) / (2 * step)
    assert np.all(np.abs(g[:, -1] - fd) <= 1e-5 * (1 + np.abs(g[:, -1])))


def test_indicator_has_no_gradient():
    f = instantiate({"kind": "indicator", "params": {"d": 2}})
    assert not f.has_gradient
    with pytest.raises(DomainError):
        f.grad(np.zeros((1, 2)))


@pytest.mark.parametrize(
    "spec",
    [
        {"kind": "ramp-cutoff"},
        {"kind": "vertical-power", "params": {"m": 1.0}},
        {"kind": "vertical-power", "params": {"m": 0.0}},
        {"kind": "ramp-cutoff", "params": {"eta": {"kind": "gaussian-bump", "params": {"d": 2}}}},
    ],
    ids=["ramp", "linear", "flat", "ramp-2d"],
)
def test_boundary_values_match_trace(spec):
    u = instantiate(spec)
    assert u.lipschitz_in_y
    rng = np.random.default_rng(1)
    x = rng.uniform(-1.5, 1.5, size=(200, u.d))
    gap = np.abs(u(x, np.full(200, 1e-8)) - u.trace(x))
    assert gap.max() <= 1e-6


def test_every_registry_kind_instantiates_from_its_name():
    for kind in FAMILY_KINDS:
        if kind == "tensor":
            continue
        f = instantiate(kind)
        assert f.kind in (kind, "zero")
        assert f.is_boundary == (kind in BOUNDARY_KINDS)


def test_handles_evaluate_grids_consistently():
    f = instantiate({"kind": "tensor", "params": {"factors": ["hat", "bump"]}})
    axes = [np.linspace(-1, 1, 7), np.linspace(-0.9, 0.9, 5)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    assert np.allclose(f.values_on(axes), f(grid), atol=1e-15)
