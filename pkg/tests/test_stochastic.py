import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmchannel import (
    InvalidArgument,
    OUParams,
    OutOfRange,
    RngStream,
    SamplePath,
    SamplingGrid,
    brownian_path,
    brownian_paths_nested,
    interpolate,
    make_grid,
    ou_path,
    restrict,
)


def test_equidistant_grid_knots():
    g = make_grid(1.0, 4)
    assert np.array_equal(g.times, [0, 0.25, 0.5, 0.75, 1.0])
    assert g.n == 4 and g.horizon == 1.0 and g.max_step == 0.25


def test_single_step_grid():
    g = make_grid(2.0, 1)
    assert np.array_equal(g.times, [0.0, 2.0])


def test_dyadic_grids_are_nested():
    g2 = make_grid(1.0, kind="dyadic", level=2)
    g3 = make_grid(1.0, kind="dyadic", level=3)
    assert g2.n == 4 and g3.n == 8
    assert g3.contains(g2)
    assert not g2.contains(g3)


def test_equidistant_grids_with_dividing_sizes_share_knots():
    assert make_grid(1.0, 640).contains(make_grid(1.0, 10))
    assert make_grid(3.7, 300).contains(make_grid(3.7, 100))


@pytest.mark.parametrize("T,n", [(0.0, 4), (-1.0, 4), (1.0, 0), (1.0, -3), (1.0, 2.5), (math.inf, 2)])
def test_make_grid_rejects_bad_arguments(T, n):
    with pytest.raises(InvalidArgument):
        make_grid(T, n)


def test_custom_grid_validation():
    with pytest.raises(InvalidArgument):
        SamplingGrid([0.0, 0.5, 0.5, 1.0])
    with pytest.raises(InvalidArgument):
        SamplingGrid([0.1, 1.0])
    g = SamplingGrid([0.0, 0.1, 0.7, 1.0])
    assert g.max_step == pytest.approx(0.6)


@settings(max_examples=60, deadline=None)
@given(T=st.floats(1e-3, 1e3), n=st.integers(1, 5000))
def test_equidistant_grid_properties(T, n):
    g = make_grid(T, n)
    t = g.times
    assert t[0] == 0.0 and t[-1] == T
    assert np.all(np.diff(t) > 0)
    assert g.max_step == pytest.approx(T / n, rel=1e-9)
    assert np.allclose(np.diff(t), T / n, rtol=1e-9, atol=0)


def test_brownian_starts_at_zero():
    for seed in (0, 1, 2**63):
        assert brownian_path(make_grid(1.0, 8), RngStream(seed)).values[0] == 0.0


def test_brownian_increment_variance():
    g = make_grid(1.0, 10)
    B = brownian_path(g, RngStream(1), n_paths=100_000)
    var = B.increments().var(axis=0)
    assert np.all(np.abs(var - 0.1) <= 0.05 * 0.1)


def test_brownian_covariance_is_min():
    g = make_grid(1.0, 10)
    B = brownian_path(g, RngStream(2), n_paths=100_000).values
    cov = np.mean(B[:, 3] * B[:, 7])
    assert abs(cov - 0.3) <= 0.05 * 0.3


def test_same_key_same_path_and_distinct_streams_differ():
    g = make_grid(1.0, 64)
    a = brownian_path(g, RngStream(5, 3), n_paths=4)
    b = brownian_path(g, RngStream(5, 3), n_paths=4)
    c = brownian_path(g, RngStream(5, 4), n_paths=4)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert not np.array_equal(RngStream(5).child(0).generator().random(3), RngStream(5).child(1).generator().random(3))


def test_distinct_streams_are_uncorrelated():
    g = make_grid(1.0, 1)
    x = brownian_path(g, RngStream(9, 0), n_paths=100_000).values[:, 1]
    y = brownian_path(g, RngStream(9, 1), n_paths=100_000).values[:, 1]
    assert abs(np.corrcoef(x, y)[0, 1]) < 3 / math.sqrt(x.size)


def test_nested_levels_are_bit_identical_restrictions():
    paths = brownian_paths_nested(2.0, 6, RngStream(11), n_paths=3)
    for k, p in enumerate(paths):
        assert p.grid.n == 2**k
        assert np.array_equal(restrict(paths[-1], p.grid).values, p.values)
    shorter = brownian_paths_nested(2.0, 3, RngStream(11), n_paths=3)
    assert np.array_equal(shorter[-1].values, paths[3].values)


def test_nested_refinement_has_brownian_law():
    # a level-5 path restricted to level 3 against a directly generated level-3 path
    fine = brownian_paths_nested(1.0, 5, RngStream(21), n_paths=100_000)[-1]
    coarse_grid = make_grid(1.0, kind="dyadic", level=3)
    a = restrict(fine, coarse_grid).increments()
    b = brownian_path(coarse_grid, RngStream(22), n_paths=100_000).increments()
    h = 1 / 8
    se_var = math.sqrt(2 * 2 * h**2 / a.shape[0])
    se_mean = math.sqrt(2 * h / a.shape[0])
    assert np.all(np.abs(a.var(axis=0) - b.var(axis=0)) <= 3 * se_var)
    assert np.all(np.abs(a.mean(axis=0) - b.mean(axis=0)) <= 3 * se_mean)
    # fine increments are independent with the right variance
    inc = fine.increments()
    assert abs(np.mean(inc[:, 0] * inc[:, 1])) <= 3 * (1 / 32) / math.sqrt(inc.shape[0])


def test_ou_stationary_variance():
    x = ou_path(OUParams(1.0, 1.0), make_grid(1.0, 10), RngStream(3), n_paths=100_000).values
    assert np.all(np.abs(x.var(axis=0) - 1.0) <= 0.05)


def test_ou_unit_lag_autocovariance():
    x = ou_path(OUParams(1.0, 1.0), make_grid(2.0, 2), RngStream(4), n_paths=100_000).values
    cov = np.mean(x[:, 0] * x[:, 1])
    assert abs(cov - math.exp(-1)) <= 0.05 * math.exp(-1)


def test_ou_fast_mean_reversion_decorrelates():
    x = ou_path(OUParams(1e3, 1.0), make_grid(1.0, 10), RngStream(5), n_paths=100_000).values
    r = np.corrcoef(x[:, 4], x[:, 5])[0, 1]
    assert abs(r) < 0.01


@pytest.mark.parametrize("delta", [0.01, 0.1, 1.0])
def test_ou_transition_moments(delta):
    a, P, N = 1.0, 1.0, 100_000
    x = ou_path(OUParams(a, P), make_grid(delta, 1), RngStream(6, int(delta * 100)), n_paths=N).values
    x0, x1 = x[:, 0], x[:, 1]
    slope = np.dot(x0, x1) / np.dot(x0, x0)
    resid = x1 - slope * x0
    rv = P * (1 - math.exp(-2 * a * delta))
    assert abs(slope - math.exp(-a * delta)) <= 3 * math.sqrt(rv / (N * P))
    assert abs(resid.var() - rv) <= 3 * rv * math.sqrt(2 / N)


def test_ou_params_validation():
    for a, P in [(0, 1), (-1, 1), (1, 0), (1, -2)]:
        with pytest.raises(InvalidArgument):
            OUParams(a, P)


def test_interpolate_examples():
    line = SamplePath(SamplingGrid([0.0, 1.0]), [0.0, 2.0])
    assert interpolate(line, 0.5) == 1.0
    tent = SamplePath(SamplingGrid([0.0, 0.5, 1.0]), [0.0, 1.0, 0.0])
    assert interpolate(tent, 0.75) == 0.5
    assert interpolate(tent, 0.5) == 1.0


def test_interpolate_out_of_range():
    p = SamplePath(make_grid(1.0, 2), [0.0, 1.0, 0.0])
    for t in (-1e-9, 1.0 + 1e-9, float("nan")):
        with pytest.raises(OutOfRange):
            interpolate(p, t)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.integers(1, 50), T=st.floats(0.1, 10))
def test_interpolation_is_exact_at_knots(seed, n, T):
    p = brownian_path(make_grid(T, n), RngStream(seed))
    got = interpolate(p, p.times)
    assert np.array_equal(got, p.values)


def test_sample_path_length_check_and_readonly():
    g = make_grid(1.0, 3)
    with pytest.raises(InvalidArgument):
        SamplePath(g, [0.0, 1.0])
    p = SamplePath(g, [0.0, 1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        p.values[0] = 5.0


def test_restrict_rejects_foreign_grid():
    p = brownian_path(make_grid(1.0, 4), RngStream(1))
    with pytest.raises(InvalidArgument):
        restrict(p, make_grid(1.0, 3))
