import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biphoton.numerics import Axis, Grid2, fft2, integrate1, integrate2, svd, trapezoid_weights


def test_axis_centered_and_values():
    ax = Axis.centered(0.5, 5, center=1.0)
    np.testing.assert_allclose(ax.values(), [0.0, 0.5, 1.0, 1.5, 2.0])
    assert ax.stop == pytest.approx(2.0)
    assert ax.span == pytest.approx(2.0)


@pytest.mark.parametrize("args", [(0.0, 0.0, 4), (0.0, -1.0, 4), (0.0, 1.0, 1), (np.nan, 1.0, 3)])
def test_axis_rejects_bad_parameters(args):
    with pytest.raises(ValueError):
        Axis(*args)


def test_axis_from_values_checks_uniformity():
    assert Axis.from_values([1.0, 2.0, 3.0]) == Axis(1.0, 1.0, 3)
    with pytest.raises(ValueError):
        Axis.from_values([0.0, 1.0, 3.0])


def test_grid_is_read_only_copy():
    vals = np.ones((3, 4))
    g = Grid2(Axis(0, 1, 3), Axis(0, 1, 4), vals)
    vals[0, 0] = 5
    assert g.values[0, 0] == 1
    with pytest.raises(ValueError):
        g.values[0, 0] = 2


def test_grid_shape_and_finiteness_checked():
    with pytest.raises(ValueError):
        Grid2(Axis(0, 1, 3), Axis(0, 1, 4), np.ones((4, 3)))
    with pytest.raises(ValueError):
        Grid2(Axis(0, 1, 2), Axis(0, 1, 2), np.array([[1, np.inf], [0, 0]]))


def test_integrate_constant_unit_area():
    ax = Axis.linspace(0.0, 1.0, 11)
    g = Grid2(ax, ax, np.ones((11, 11)))
    assert integrate2(g) == pytest.approx(1.0, abs=1e-12)


def test_integrate_odd_function_vanishes():
    ax = Axis.centered(0.1, 41)
    x, y = np.meshgrid(ax.values(), ax.values(), indexing="ij")
    assert abs(integrate2(Grid2(ax, ax, x * np.exp(-(x**2 + y**2))))) < 1e-12


def test_integrate_normalized_gaussian():
    ax = Axis.linspace(-8.0, 8.0, 256)
    x, y = np.meshgrid(ax.values(), ax.values(), indexing="ij")
    g = Grid2(ax, ax, np.exp(-(x**2 + y**2) / 2) / (2 * np.pi))
    assert integrate2(g) == pytest.approx(1.0, abs=1e-6)


def test_trapezoid_weights_and_1d():
    ax = Axis.linspace(0, 2, 5)
    np.testing.assert_allclose(trapezoid_weights(ax), [0.25, 0.5, 0.5, 0.5, 0.25])
    assert integrate1(ax, ax.values()) == pytest.approx(2.0)


def _random_grid(rng, n=16):
    ax = Axis.centered(0.3, n)
    return Grid2(ax, ax, rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))


def test_fft_impulse_is_flat():
    ax = Axis.centered(1.0, 16)
    v = np.zeros((16, 16), dtype=complex)
    v[3, 11] = 1.0
    out = fft2(Grid2(ax, ax, v))
    mags = np.abs(out.values)
    assert np.ptp(mags) < 1e-12 * mags.max()


def test_fft_round_trip():
    g = _random_grid(np.random.default_rng(0))
    t = fft2(g)
    back = fft2(t, "inverse", out_starts=(g.axis_row.start, g.axis_col.start))
    assert np.linalg.norm(back.values - g.values) / np.linalg.norm(g.values) < 1e-10


def test_fft_parseval():
    g = _random_grid(np.random.default_rng(1))
    t = fft2(g)
    e_in = np.sum(np.abs(g.values) ** 2) * g.axis_row.step * g.axis_col.step
    e_out = np.sum(np.abs(t.values) ** 2) * t.axis_row.step * t.axis_col.step
    assert e_out == pytest.approx(e_in, rel=1e-12)


def test_fft_gaussian_pair():
    sigma = 2.0
    ax = Axis.centered(8 * 2 * sigma / 127, 128)
    w1, w2 = np.meshgrid(ax.values(), ax.values(), indexing="ij")
    amp = np.exp(-(w1**2 + w2**2) / (4 * sigma**2))  # intensity std sigma
    t = fft2(Grid2(ax, ax, amp))
    inten = np.abs(t.values) ** 2
    tt = t.axis_row.values()
    marg = inten.sum(axis=1)
    std = np.sqrt(np.sum(tt**2 * marg) / marg.sum())
    assert std == pytest.approx(1 / (2 * sigma), rel=0.01)


def test_fft_requires_power_of_two():
    ax = Axis.centered(1.0, 12)
    with pytest.raises(ValueError):
        fft2(Grid2(ax, ax, np.ones((12, 12))))


def test_fft_rejects_unknown_sign():
    ax = Axis.centered(1.0, 4)
    with pytest.raises(ValueError):
        fft2(Grid2(ax, ax, np.ones((4, 4))), sign="backward")


def test_svd_rank_one():
    a = np.outer([1, 2, 3], [1j, 0.5, -1])
    s = svd(a).singular_values
    assert s[0] > 0 and np.all(s[1:] < 1e-12 * s[0])


def test_svd_identity():
    np.testing.assert_allclose(svd(np.eye(5)).singular_values, np.ones(5))


def test_svd_reconstruction():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    r = svd(a)
    rec = (r.left * r.singular_values) @ r.right_h
    assert np.linalg.norm(rec - a) / np.linalg.norm(a) < 1e-10
    assert np.all(np.diff(r.singular_values) <= 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=5), st.integers(min_value=2, max_value=5),
       st.floats(min_value=-3, max_value=3), st.floats(min_value=0.01, max_value=2))
def test_fft_round_trip_property(pr, pc, start, step):
    rng = np.random.default_rng(pr * 10 + pc)
    nr, nc = 1 << pr, 1 << pc
    g = Grid2(Axis(start, step, nr), Axis(-start, step, nc), rng.normal(size=(nr, nc)) + 0j)
    back = fft2(fft2(g), "inverse", out_starts=(g.axis_row.start, g.axis_col.start))
    np.testing.assert_allclose(back.values, g.values, atol=1e-10)
