import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from burstymac.core import AntennaConfig, AsymmetricConfigError, DomainError, make_dependent, make_independent
from burstymac.gains import (
    RegimeError,
    binom_pmf,
    binom_table,
    convexity_check,
    delta_dof,
    delta_dof_dep,
    delta_dof_general,
    delta_dof_ind,
    dominance_report,
    gain_sweep,
    grid_maximize,
    ind_gain_terms,
    peak_gain,
    second_differences,
)

from conftest import random_symmetric_configs


def test_binom_pmf():
    assert binom_pmf(4, 2, 0.5) == 0.375
    assert binom_pmf(4, 0, 0.25) == 0.31640625
    assert math.fsum(binom_pmf(7, i, 0.3) for i in range(8)) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(DomainError):
        binom_pmf(4, 5, 0.5)
    assert np.allclose(binom_table(7, 0.3), [binom_pmf(7, i, 0.3) for i in range(8)], atol=1e-16)


def test_delta_dof_examples():
    assert delta_dof(AntennaConfig(3, 2, 2, 0), make_independent(0.4, 3)) == 0.0
    config = AntennaConfig(4, 1, 1, 3)
    assert delta_dof(config, make_independent(0.25, 4)) == pytest.approx(0.31640625, abs=1e-12)
    assert delta_dof(config, make_dependent(0.25, 4)) == pytest.approx(0.75, abs=1e-12)
    with pytest.raises(AsymmetricConfigError):
        delta_dof(AntennaConfig(2, [1, 2], 1, 1), make_independent(0.3, 2))


def test_dependent_closed_form_examples():
    assert delta_dof_dep(AntennaConfig(4, 2, 7, 1), 0.9) == pytest.approx(0.1, abs=1e-12)
    assert delta_dof_dep(AntennaConfig(2, 1, 1, 1), 0.5) == pytest.approx(0.5, abs=1e-12)
    assert delta_dof_dep(AntennaConfig(2, 1, 1, 1), 0.0) == 0.0
    assert delta_dof_dep(AntennaConfig(2, 1, 3, 2), 0.7) == 0.0  # KM <= N
    with pytest.raises(AsymmetricConfigError):
        delta_dof_dep(AntennaConfig(2, [1, 2], 1, 1), 0.5)


def test_independent_closed_form_examples():
    # min(p^4, 1 - p^4) at p = 0.9
    assert delta_dof_ind(AntennaConfig(4, 2, 7, 1), 0.9) == pytest.approx(0.3439, abs=1e-12)
    # min(1 - 0.9^4, 0.9^4) at p = 0.1
    assert delta_dof_ind(AntennaConfig(4, 2, 1, 1), 0.1) == pytest.approx(0.3439, abs=1e-12)
    assert delta_dof_ind(AntennaConfig(4, 2, 1, 1), 1.0) == 0.0


def test_closed_forms_vectorize():
    config = AntennaConfig(3, 2, 3, 2)
    grid = np.linspace(0, 1, 11)
    assert np.allclose(delta_dof_ind(config, grid), [delta_dof_ind(config, p) for p in grid], atol=0)
    assert np.allclose(delta_dof_dep(config, grid), [delta_dof_dep(config, p) for p in grid], atol=0)


@pytest.mark.parametrize("config", random_symmetric_configs(40, seed=11))
def test_closed_forms_match_general_form(config):
    for p in np.linspace(0, 1, 21):
        assert delta_dof_dep(config, p) == pytest.approx(delta_dof_general(config, "dependent", p), abs=1e-12)
        assert delta_dof_ind(config, p) == pytest.approx(delta_dof_general(config, "independent", p), abs=1e-12)


def test_peak_gain_examples():
    config = AntennaConfig(4, 1, 1, 3)
    dep = peak_gain(config, "dependent")
    ind = peak_gain(config, "independent")
    assert (dep.p_star, dep.value, dep.method) == (0.25, pytest.approx(0.75), "closed-form")
    assert (ind.p_star, ind.value) == (0.25, pytest.approx(0.31640625, abs=1e-15))
    two = peak_gain(AntennaConfig(2, 1, 1, 1), "independent")
    assert (two.p_star, two.value) == (0.5, pytest.approx(0.25))
    p_grid, v_grid = grid_maximize(lambda p: delta_dof_ind(AntennaConfig(2, 1, 1, 1), p))
    assert abs(p_grid - 0.5) < 1e-4 and v_grid == pytest.approx(0.25, abs=1e-4)


def test_peak_gain_outside_regime():
    config = AntennaConfig(4, 2, 7, 1)
    with pytest.raises(RegimeError):
        peak_gain(config, "independent", strict=True)
    numeric = peak_gain(config, "independent")
    assert numeric.method == "numeric"
    grid = np.linspace(0, 1, 1001)
    assert numeric.value == pytest.approx(np.max(delta_dof_ind(config, grid)))


@pytest.mark.parametrize(
    "config", [c for c in random_symmetric_configs(300, seed=5) if c.L >= c.K * c.m - c.N and c.L >= c.N and c.K * c.m > c.N][:25]
)
def test_peak_location_matches_grid(config):
    for mode, f in (("dependent", delta_dof_dep), ("independent", delta_dof_ind)):
        peak = peak_gain(config, mode)
        p_grid, v_grid = grid_maximize(lambda p: f(config, p), n=20_001)
        assert abs(p_grid - peak.p_star) <= 1e-4
        assert v_grid <= peak.value + 1e-12


def test_peak_sequences_monotone():
    dep = [peak_gain(AntennaConfig(K, 1, 1, K - 1), "dependent").value for K in range(2, 101)]
    ind = [peak_gain(AntennaConfig(K, 1, 1, K - 1), "independent").value for K in range(2, 101)]
    gap = np.subtract(dep, ind)
    assert np.all(np.diff(dep) > 0) and np.all(np.diff(ind) > 0) and np.all(np.diff(gap) > 0)
    assert dep[-1] < 1 and ind[-1] < 1 / math.e
    assert 1 - dep[-1] < 0.011 and 1 / math.e - ind[-1] < 0.002


def test_dominance_examples():
    rows = dominance_report(AntennaConfig(2, 1, 1, 1), [i / 10 for i in range(1, 10)])
    assert all(r.sign == "dep>ind" for r in rows)
    assert dominance_report(AntennaConfig(4, 2, 7, 1), [0.9])[0].sign == "ind>dep"
    assert dominance_report(AntennaConfig(4, 2, 1, 1), [0.1])[0].sign == "ind>dep"
    with pytest.raises(DomainError):
        dominance_report(AntennaConfig(2, 1, 1, 1), [0.0, 0.5])


def test_convexity_examples():
    config = AntennaConfig(4, 1, 1, 3)
    grid = np.linspace(0, 1, 101)
    assert convexity_check(config, "receive-cut-gain", grid)
    assert convexity_check(config, "transmit-cut-gain", grid)
    recv, trans = ind_gain_terms(config, np.array([0.0, 1.0]))
    assert list(trans) == [1.0, 0.0]
    assert convexity_check(AntennaConfig(1, 2, 1, 1), "receive-cut-gain")
    with pytest.raises(RegimeError):
        convexity_check(AntennaConfig(4, 2, 1, 1), "receive-cut-gain")
    with pytest.raises(RegimeError):
        convexity_check(AntennaConfig(4, 2, 7, 1), "transmit-cut-gain")


def test_convexity_rejects_concave_term():
    # sanity of the detector: a concave curve must fail
    grid = np.linspace(0, 1, 101)
    assert np.any(second_differences(grid, -(grid**2)) < -1e-9)


def _analytic_second_derivative(K, M, N, p):
    """K(K-1){(N - i*M) B_{K-2}(i*) - (N - (i*+1)M) B_{K-2}(i*-1)}, shared by both terms."""
    i_star = N // M

    def b(i):
        return math.comb(K - 2, i) * p**i * (1 - p) ** (K - 2 - i) if 0 <= i <= K - 2 else 0.0

    return K * (K - 1) * ((N - i_star * M) * b(i_star) - (N - (i_star + 1) * M) * b(i_star - 1))


@pytest.mark.parametrize("K,M,N", [(4, 1, 1), (5, 2, 3), (3, 1, 2), (6, 2, 5)])
def test_second_difference_matches_analytic_curvature(K, M, N):
    L = max(K * M - N, N)
    config = AntennaConfig(K, M, N, L)
    h = 1e-3
    for p in (0.2, 0.45, 0.7):
        pts = np.array([p - h, p, p + h])
        for pick in (0, 1):
            values = ind_gain_terms(config, pts)[pick]
            fd = (values[0] - 2 * values[1] + values[2]) / h**2
            assert fd == pytest.approx(_analytic_second_derivative(K, M, N, p), rel=1e-4, abs=1e-6)


def test_gain_sweep_columns():
    rows = gain_sweep(AntennaConfig(2, 1, 1, 1), [0.25, 0.5])
    assert list(rows[0]) == ["p", "gain_dep", "gain_ind", "sum_dof_with_relay", "sum_dof_without_relay"]
    assert rows[0]["sum_dof_with_relay"] == pytest.approx(0.5)
    custom = gain_sweep(AntennaConfig(2, 1, 1, 1), [0.5], make_dependent(0.5, 2))
    assert custom[0]["gain_custom"] == pytest.approx(0.5)


@settings(max_examples=100, deadline=None)
@given(K=st.integers(1, 6), M=st.integers(1, 4), N=st.integers(1, 8), p=st.floats(0, 1))
def test_dependent_gain_saturates_in_L(K, M, N, p):
    cap = max(K * M - N, N)
    gains = [delta_dof_dep(AntennaConfig(K, M, N, L), p) for L in range(0, cap + 4)]
    assert np.all(np.diff(gains) >= -1e-15)
    assert np.all(np.array(gains[cap:]) == gains[cap])


@settings(max_examples=100, deadline=None)
@given(K=st.integers(1, 6), M=st.integers(1, 4), N=st.integers(1, 8), L=st.integers(0, 8), p=st.floats(0, 1))
def test_gains_nonnegative(K, M, N, L, p):
    config = AntennaConfig(K, M, N, L)
    assert delta_dof_dep(config, p) >= 0
    assert delta_dof_ind(config, p) >= -1e-15
