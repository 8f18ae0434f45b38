import numpy as np
import pytest

from wallspde import make_grid, circle_distance, derive_stream, sample_noise_field
from wallspde.errors import ConfigurationError, DomainError


def test_circle_grid_layout():
    g = make_grid("circle", 8, 1.0, 10)
    assert g.dx == 0.125
    assert g.n_cells == 8
    np.testing.assert_allclose(g.x_coords, 0.125 * np.arange(8))
    assert g.is_circle()


def test_interval_grid_layout():
    g = make_grid("interval_dirichlet", 8, 1.0, 10)
    # interior nodes only; the zero endpoints are implied, never stored
    assert g.dx == pytest.approx(1.0 / 9.0)
    np.testing.assert_allclose(g.x_coords, np.arange(1, 9) / 9.0)
    assert not g.is_circle()


def test_time_axis():
    g = make_grid("circle", 4, 2.0, 8)
    assert g.dt == 0.25
    assert g.times.shape == (9,)
    assert g.times[-1] == pytest.approx(2.0)


def test_grid_rejects_bad_arguments():
    with pytest.raises(ConfigurationError):
        make_grid("moebius", 8, 1.0, 10)
    with pytest.raises(ConfigurationError):
        make_grid("circle", 0, 1.0, 10)
    with pytest.raises(ConfigurationError):
        make_grid("circle", 8, -1.0, 10)
    with pytest.raises(ConfigurationError):
        make_grid("circle", 8, 1.0, 0)


def test_grid_coords_are_read_only():
    g = make_grid("circle", 8, 1.0, 10)
    with pytest.raises(ValueError):
        g.x_coords[0] = 3.0


def test_circle_distance_wraps():
    assert circle_distance(0.1, 0.9) == pytest.approx(0.2)
    assert circle_distance(0.0, 0.5) == pytest.approx(0.5)
    d = circle_distance(np.array([0.0, 0.25]), np.array([0.9, 0.3]))
    np.testing.assert_allclose(d, [0.1, 0.05])


def test_circle_distance_domain():
    with pytest.raises(DomainError):
        circle_distance(1.0, 0.5)
    with pytest.raises(DomainError):
        circle_distance(0.5, -0.1)


def test_stream_reproducibility():
    a = derive_stream(42, 3).standard_normal(16)
    b = derive_stream(42, 3).standard_normal(16)
    np.testing.assert_array_equal(a, b)


def test_streams_are_independent_of_draw_order():
    # keyed streams: drawing path 0 first must not shift path 1's sequence
    s0 = derive_stream(7, 0)
    s1 = derive_stream(7, 1)
    s0.standard_normal(1000)
    late = s1.standard_normal(8)
    fresh = derive_stream(7, 1).standard_normal(8)
    np.testing.assert_array_equal(late, fresh)


def test_distinct_paths_differ():
    a = derive_stream(1, 0).standard_normal(8)
    b = derive_stream(1, 1).standard_normal(8)
    assert not np.array_equal(a, b)


def test_stream_rejects_negative_keys():
    with pytest.raises(ConfigurationError):
        derive_stream(-1, 0)
    with pytest.raises(ConfigurationError):
        derive_stream(0, -2)


def test_sample_noise_field_shape_and_stats():
    g = make_grid("circle", 64, 1.0, 10)
    s = derive_stream(0, 0)
    draws = np.array([sample_noise_field(s, g) for _ in range(200)])
    assert draws.shape == (200, 64)
    assert abs(draws.mean()) < 0.02
    assert abs(draws.var() - 1.0) < 0.03
