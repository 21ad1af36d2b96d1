import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmchannel import (
    InvalidArgument,
    RateRegion,
    bandlimited_capacity,
    bc_region,
    degraded_bc_feedback_region,
    infinite_bandwidth_capacity,
    mac_region,
    rho_star,
    rho_star_residual,
    sk_bc_report,
    sk_rate_series,
)

# independent oracle: at P = 1 the defining equation expands to rho^2 - 5.5 rho + 1.5 = 0
RHO_1 = (5.5 - math.sqrt(5.5**2 - 6.0)) / 2


def test_bandlimited_examples():
    assert bandlimited_capacity(2.0, 1.0) == pytest.approx(math.log(2.0), rel=1e-15)
    assert abs(bandlimited_capacity(2.0, 1e4) - 1.0) <= 1e-4
    assert abs(bandlimited_capacity(2.0, 1e6) - infinite_bandwidth_capacity(2.0)) <= 1e-6


def test_bandlimited_increases_towards_half_power():
    omegas = np.logspace(-2, 6, 40)
    vals = [bandlimited_capacity(2.0, w) for w in omegas]
    assert np.all(np.diff(vals) > 0)
    assert all(v < 1.0 for v in vals)
    sweep = [bandlimited_capacity(2.0, w) for w in (1, 10, 100, 1e3)]
    assert sweep == sorted(sweep) and len(set(sweep)) == 4


@pytest.mark.parametrize("P,w", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0), (1.0, -2.0)])
def test_bandlimited_rejects_nonpositive(P, w):
    with pytest.raises(InvalidArgument):
        bandlimited_capacity(P, w)


def test_infinite_bandwidth_capacity():
    assert infinite_bandwidth_capacity(2.0) == 1.0
    assert infinite_bandwidth_capacity(0.0) == 0.0
    with pytest.raises(InvalidArgument):
        infinite_bandwidth_capacity(-1.0)


def test_mac_box():
    r = mac_region([2.0, 4.0])
    assert r.corners() == [(0.0, 0.0), (0.0, 2.0), (1.0, 0.0), (1.0, 2.0)]
    assert (1.0, 2.0) in r
    assert (1.0 + 1e-6, 2.0) not in r
    single = mac_region([2.0])
    assert single.corners() == [(0.0,), (1.0,)]
    with pytest.raises(InvalidArgument):
        mac_region([])
    with pytest.raises(InvalidArgument):
        mac_region([1.0, 0.0])


def test_bc_simplex():
    r = bc_region(2.0, [1.0, 2.0])
    assert r.describe() == ["R1 + 0.5*R2 <= 1"]
    assert r.corners() == [(0.0, 0.0), (0.0, 2.0), (1.0, 0.0)]
    sym = bc_region(2.0, [1.0, 1.0])
    assert sym.describe() == ["R1 + R2 <= 1"]
    assert bc_region(2.0, [3.0]).corners() == [(0.0,), (3.0,)]
    with pytest.raises(InvalidArgument):
        bc_region(2.0, [1.0, 0.0])


def test_degraded_bc_region_and_feedback_invariance():
    r = degraded_bc_feedback_region(2.0, 1.0, 1.0)
    assert r.describe() == ["R1 + 2*R2 <= 1"]
    assert degraded_bc_feedback_region(2.0, 1.0, 1.0, feedback=True) is r
    noisy = degraded_bc_feedback_region(2.0, 1.0, 1e12)
    assert max(c[1] for c in noisy.corners()) < 1e-11
    for bad in [(2.0, 0.0, 1.0), (2.0, 1.0, 0.0), (0.0, 1.0, 1.0)]:
        with pytest.raises(InvalidArgument):
            degraded_bc_feedback_region(*bad)


def test_region_validation():
    with pytest.raises(InvalidArgument):
        RateRegion(2, (((1.0, -1.0), 1.0),))
    with pytest.raises(InvalidArgument):
        RateRegion(2, (((1.0, 1.0), math.inf),))
    with pytest.raises(InvalidArgument):
        RateRegion(0, ())
    with pytest.raises(InvalidArgument):
        mac_region([1.0, 1.0]).contains([0.1])


REGIONS = [
    mac_region([2.0, 4.0]),
    mac_region([1.0, 3.0, 0.5]),
    bc_region(2.0, [1.0, 2.0]),
    bc_region(3.0, [0.5, 1.0, 4.0]),
    degraded_bc_feedback_region(1.5, 0.3, 2.0),
]


@pytest.mark.parametrize("region", REGIONS)
def test_corners_are_members_and_inflated_corners_are_not(region):
    corners = region.corners()
    assert corners
    for c in corners:
        assert region.contains(c)
        for k in region.tight(c):
            normal, _ = region.constraints[k]
            pushed = np.asarray(c) * (1 + 1e-6) + 1e-6 * np.asarray(normal)
            assert not region.contains(pushed)
    assert not region.contains([-1e-9] + [0.0] * (region.dimension - 1))


@settings(max_examples=50, deadline=None)
@given(P=st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=4), k=st.sampled_from([0.5, 2.0, 4.0]))
def test_mac_bounds_scale_with_power(P, k):
    base = mac_region(P)
    big = mac_region([k * p for p in P])
    assert [b for _, b in big.constraints] == [k * b for _, b in base.constraints]


@settings(max_examples=50, deadline=None)
@given(P=st.floats(1e-3, 1e3), snr=st.lists(st.floats(1e-2, 1e2), min_size=1, max_size=4))
def test_bc_bound_scales_with_power(P, snr):
    base = bc_region(P, snr)
    big = bc_region(2 * P, snr)
    assert big.constraints[0][1] == 2 * base.constraints[0][1]
    assert big.constraints[0][0] == base.constraints[0][0]
    assert big.constraints == base.scaled(2.0).constraints


def test_rho_star_at_unit_power():
    assert RHO_1 == pytest.approx(0.28779, abs=1e-5)
    assert rho_star(1.0) == pytest.approx(RHO_1, abs=1e-13)


@pytest.mark.parametrize("P", [0.1, 1.0, 10.0, 1e-6, 1e3])
def test_rho_star_residual_and_range(P):
    r = rho_star(P)
    assert 0 < r < 1
    assert abs(rho_star_residual(r, P)) <= 1e-12


def test_rho_star_small_power_limit():
    r = rho_star(1e-6)
    assert 0 < r < 1e-3
    assert r == pytest.approx(1e-6 / 2, rel=1e-3)


def test_rho_star_rejects_nonpositive_power():
    with pytest.raises(InvalidArgument):
        rho_star(0.0)


def test_feedback_gain_report():
    rep = sk_bc_report(1.0)
    assert rep.per_user_rate == pytest.approx(0.3219, abs=1e-4)
    assert rep.sum_rate == pytest.approx(0.6439, abs=1e-4)
    assert rep.sum_rate > rep.no_feedback_sum == 0.5
    assert rep.gain == pytest.approx(1 + RHO_1, abs=1e-12)
    assert abs(rep.residual) <= 1e-10
    assert (rep.per_user_rate, rep.per_user_rate) not in bc_region(1.0, [1.0, 1.0])


@pytest.mark.parametrize("P", [0.01, 0.5, 2.0, 50.0])
def test_feedback_beats_infinite_bandwidth_capacity(P):
    assert sk_bc_report(P).sum_rate > infinite_bandwidth_capacity(P)


def test_rate_series_approaches_limit_from_below():
    limit = sk_bc_report(1.0).per_user_rate
    vals = [sk_rate_series(1.0, d, 10_000) for d in (1e-2, 1e-3, 1e-4)]
    assert abs(vals[-1] - limit) <= 1e-3
    assert all(v < limit for v in vals)
    assert vals[0] < vals[1] < vals[2]


def test_rate_series_independent_of_round_count():
    for d in (1e-1, 1e-3):
        assert sk_rate_series(1.0, d, 1) == sk_rate_series(1.0, d, 10**6)


def test_rate_series_argument_checks():
    with pytest.raises(InvalidArgument):
        sk_rate_series(1.0, 0.0, 10)
    with pytest.raises(InvalidArgument):
        sk_rate_series(1.0, 1e-3, 0)
