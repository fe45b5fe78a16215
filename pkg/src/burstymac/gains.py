"""Relaying gains: general form, closed forms for the two extreme traffic laws,
peak gains, dependent-vs-independent dominance and convexity diagnostics.

Closed forms (symmetric M, i* = floor(N/M), B_K(i) the binomial pmf):

    dependent:    min( p min(KM-N, L), (1-p) min(L, N) )          (KM > N; else 0)
    independent:  min( sum_{i>i*} B_K(i) min(iM-N, L),  sum_{i<=i*} B_K(i) min(L, N-iM) )

The first argument of each is the gain the relay can collect while receiving
("receive-cut gain"), the second the gain it can deliver while transmitting
("transmit-cut gain").

The closed forms accept scalar or array ``p``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import (
    ActivityDistribution,
    AntennaConfig,
    DomainError,
    make_dependent,
    make_independent,
    require_symmetric,
)
from .region import sum_dof, sum_dof_no_relay

DEFAULT_GRID = np.linspace(0.0, 1.0, 1001)
CONVEXITY_TOL = -1e-9
DOMINANCE_TOL = 1e-12

Mode = Literal["dependent", "independent"]


class RegimeError(ValueError):
    """Configuration is outside the regime where a closed-form result is proven."""


def binom_pmf(K: int, i: int, p: float) -> float:
    """B_K(i) = C(K, i) p^i (1-p)^(K-i)."""
    if not 0 <= i <= K:
        raise DomainError(f"i={i} outside 0..{K}")
    return math.comb(K, i) * p**i * (1.0 - p) ** (K - i)


def binom_table(K: int, p) -> np.ndarray:
    """B_K(i) for i = 0..K along the last axis; ``p`` scalar or array."""
    p = np.asarray(p, dtype=float)[..., None]
    i = np.arange(K + 1)
    coeff = np.array([math.comb(K, j) for j in range(K + 1)], dtype=float)
    return coeff * p**i * (1.0 - p) ** (K - i)


def delta_dof(config: AntennaConfig, dist: ActivityDistribution) -> float:
    """Sum-DoF gain from the relay under an arbitrary activity law."""
    require_symmetric(config)
    return sum_dof(config, dist) - sum_dof_no_relay(config, dist)


def dep_gain_terms(config: AntennaConfig, p):
    """(receive-cut gain, transmit-cut gain) under fully dependent traffic.

    For KM > N these are p min(KM-N, L) and (1-p) min(L, N). For KM <= N the
    receive term vanishes, so the gain is 0 whatever the transmit term is.
    """
    require_symmetric(config)
    K, M, N, L = config.K, config.m, config.N, config.L
    p = np.asarray(p, dtype=float)
    recv = p * min(max(K * M - N, 0), L)
    trans = (1.0 - p) * min(L, N) + p * min(L, max(N - K * M, 0))
    return recv[()], trans[()]


def ind_gain_terms(config: AntennaConfig, p):
    """(receive-cut gain, transmit-cut gain) under independent traffic."""
    require_symmetric(config)
    K, M, N, L = config.K, config.m, config.N, config.L
    B = binom_table(K, p)
    i = np.arange(K + 1)
    i_star = N // M
    recv_w = np.where(i > i_star, np.minimum(i * M - N, L), 0)
    trans_w = np.where(i <= i_star, np.minimum(L, N - i * M), 0)
    return (B @ recv_w.astype(float))[()], (B @ trans_w.astype(float))[()]


def delta_dof_dep(config: AntennaConfig, p):
    return np.minimum(*dep_gain_terms(config, p))[()]


def delta_dof_ind(config: AntennaConfig, p):
    return np.minimum(*ind_gain_terms(config, p))[()]


def gain_closed_form(config: AntennaConfig, mode: Mode, p):
    if mode == "dependent":
        return delta_dof_dep(config, p)
    if mode == "independent":
        return delta_dof_ind(config, p)
    raise DomainError(f"unknown traffic mode {mode!r}")


def in_peak_regime(config: AntennaConfig) -> bool:
    K, M, N, L = config.K, config.m, config.N, config.L
    return L >= K * M - N and L >= N


def grid_maximize(f, n: int = 10_000) -> tuple[float, float]:
    """Maximize a vectorized function of p on an n-point uniform grid of [0, 1]."""
    grid = np.linspace(0.0, 1.0, n)
    values = np.asarray(f(grid))
    j = int(np.argmax(values))
    return float(grid[j]), float(values[j])


@dataclass(frozen=True)
class PeakGain:
    p_star: float
    value: float
    method: Literal["closed-form", "numeric"]


def peak_gain(config: AntennaConfig, mode: Mode, strict: bool = False) -> PeakGain:
    """Traffic level that maximizes the relaying gain, and the gain there.

    Inside the regime L >= KM - N, L >= N the maximizer is p* = N/(KM). Outside
    it no closed form is known: a 1001-point grid maximizer is returned with
    ``method="numeric"``, or :class:`RegimeError` is raised when ``strict``.
    """
    require_symmetric(config)
    K, M, N = config.K, config.m, config.N
    if in_peak_regime(config) and K * M > N:
        p_star = N / (K * M)
        return PeakGain(p_star, float(gain_closed_form(config, mode, p_star)), "closed-form")
    if strict:
        raise RegimeError(f"{config} is outside the closed-form peak regime (L >= KM-N, L >= N, KM > N)")
    p_star, value = grid_maximize(lambda p: gain_closed_form(config, mode, p), n=DEFAULT_GRID.size)
    return PeakGain(p_star, value, "numeric")


@dataclass(frozen=True)
class DominanceRow:
    p: float
    gain_dep: float
    gain_ind: float

    @property
    def sign(self) -> str:
        diff = self.gain_dep - self.gain_ind
        if diff > DOMINANCE_TOL:
            return "dep>ind"
        if diff < -DOMINANCE_TOL:
            return "ind>dep"
        return "equal"


def dominance_report(config: AntennaConfig, p_grid: Sequence[float]) -> list[DominanceRow]:
    """Compare dependent and independent gains point by point."""
    p_grid = np.asarray(p_grid, dtype=float)
    if np.any((p_grid <= 0) | (p_grid >= 1)):
        raise DomainError("dominance grid must lie strictly inside (0, 1)")
    dep = np.atleast_1d(delta_dof_dep(config, p_grid))
    ind = np.atleast_1d(delta_dof_ind(config, p_grid))
    return [DominanceRow(float(p), float(a), float(b)) for p, a, b in zip(p_grid, dep, ind)]


def second_differences(p_grid: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Second differences scaled so that a uniform grid gives f[j-1] - 2 f[j] + f[j+1]."""
    h = np.diff(p_grid)
    slopes = np.diff(values) / h
    return np.diff(slopes) * (h[:-1] + h[1:]) / 2


def convexity_check(
    config: AntennaConfig,
    term: Literal["receive-cut-gain", "transmit-cut-gain"],
    grid: Sequence[float] | None = None,
    endpoint_tol: float = 1e-12,
) -> bool:
    """Check convexity of one independent-traffic gain term and its endpoints.

    The term must touch the matching dependent-traffic line at p = 0 and p = 1.
    Only meaningful in the regime where that term is provably convex:
    L >= KM - N for the receive term, L >= N for the transmit term.
    """
    require_symmetric(config)
    K, M, N, L = config.K, config.m, config.N, config.L
    grid = DEFAULT_GRID if grid is None else np.sort(np.asarray(grid, dtype=float))
    if grid.size < 3:
        raise DomainError("convexity check needs at least 3 grid points")
    if term == "receive-cut-gain":
        if L < K * M - N:
            raise RegimeError(f"receive-cut convexity needs L >= KM - N, got {config}")
        pick = 0
    elif term == "transmit-cut-gain":
        if L < N:
            raise RegimeError(f"transmit-cut convexity needs L >= N, got {config}")
        pick = 1
    else:
        raise DomainError(f"unknown gain term {term!r}")

    values = np.asarray(ind_gain_terms(config, grid)[pick])
    convex = bool(np.all(second_differences(grid, values) >= CONVEXITY_TOL))
    ends = np.asarray(ind_gain_terms(config, np.array([0.0, 1.0]))[pick])
    chord = np.asarray(dep_gain_terms(config, np.array([0.0, 1.0]))[pick])
    touches = bool(np.all(np.abs(ends - chord) <= endpoint_tol))
    return convex and touches


def gain_sweep(
    config: AntennaConfig,
    p_grid: Sequence[float],
    custom: ActivityDistribution | None = None,
) -> list[dict]:
    """Rows of p, gain_dep, gain_ind[, gain_custom], sum_dof_with_relay, sum_dof_without_relay.

    The sum-DoF columns are evaluated under the custom law when one is given,
    otherwise under independent traffic at each p.
    """
    rows = []
    for p in np.asarray(p_grid, dtype=float):
        law = custom if custom is not None else make_independent(p, config.K)
        row = {
            "p": float(p),
            "gain_dep": float(delta_dof_dep(config, p)),
            "gain_ind": float(delta_dof_ind(config, p)),
        }
        if custom is not None:
            row["gain_custom"] = delta_dof(config, custom)
        row["sum_dof_with_relay"] = sum_dof(config, law)
        row["sum_dof_without_relay"] = sum_dof_no_relay(config, law)
        rows.append(row)
    return rows


def delta_dof_general(config: AntennaConfig, mode: Mode, p: float) -> float:
    """Gain under the canonical law for ``mode``, via the general subset form."""
    law = make_dependent(p, config.K) if mode == "dependent" else make_independent(p, config.K)
    return delta_dof(config, law)
