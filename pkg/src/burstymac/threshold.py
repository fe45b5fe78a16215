"""Collision-free DoF under independent traffic.

Every user reaching its no-contention DoF pM at once is possible for some
p > 0 exactly when KM <= N + L. The case labels follow the six antenna
classes of the necessity/sufficiency argument:

    C-A  KM > N+L, M <= N
    C-B  KM > N+L, M > N+L, L = 0
    C-C  KM > N+L, M > N+L, L >= 1
    C-D  KM > N+L, N < M <= N+L, L >= 1
    C-E  KM <= N                      (collision-free for every p)
    C-F  N < KM <= N+L, L >= 1        (collision-free below a threshold)
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .core import AntennaConfig, DomainError, make_independent, require_symmetric
from .gains import binom_table
from .region import contains, region

BISECTION_MAX_ITER = 200
BISECTION_FTOL = 1e-12
BISECTION_BRACKET = (1e-15, 1.0 - 1e-15)
TIE_BAND = 1e-9


class ThresholdError(RuntimeError):
    """Root bracketing failed where a sign change is guaranteed."""


@dataclass(frozen=True)
class RegimeLabel:
    case_id: str
    collision_free_possible: bool
    p_star_kind: str  # all-p | exact-N-over-KM | strictly-below | none


def classify(config: AntennaConfig) -> RegimeLabel:
    require_symmetric(config)
    K, M, N, L = config.K, config.m, config.N, config.L
    if K * M <= N:
        return RegimeLabel("C-E", True, "all-p")
    if K * M <= N + L:
        # L >= 1 is implied by N < KM <= N + L
        return RegimeLabel("C-F", True, "exact-N-over-KM" if L >= N else "strictly-below")
    if M <= N:
        case = "C-A"
    elif M > N + L:
        case = "C-B" if L == 0 else "C-C"
    else:
        case = "C-D"
    return RegimeLabel(case, False, "none")


def sum_bound_gap(config: AntennaConfig, p):
    """K p M - E[min(iM + L, N)] with i ~ Bin(K, p); its root is the threshold p_s."""
    K, M, N, L = config.K, config.m, config.N, config.L
    i = np.arange(K + 1)
    weights = np.minimum(i * M + L, N).astype(float)
    return (K * np.asarray(p, dtype=float) * M - binom_table(K, p) @ weights)[()]


def bisect_root(f, lo: float, hi: float, ftol: float = BISECTION_FTOL, max_iter: int = BISECTION_MAX_ITER) -> float:
    flo, fhi = f(lo), f(hi)
    if not flo < 0 < fhi:
        raise ThresholdError(f"no sign change on [{lo}, {hi}]: f={flo}, {fhi}")
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if abs(fmid) < ftol:
            return mid
        if fmid < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= np.spacing(mid):
            return mid
    raise ThresholdError(f"bisection did not reach |f| < {ftol} in {max_iter} steps")


def collision_free_threshold(config: AntennaConfig) -> float | None:
    """Largest p for which (pM, ..., pM) is achievable, or None if no p > 0 is.

    Returns 1 when KM <= N, N/(KM) when N < KM <= N+L and L >= N, and the
    bisection root p_s (< N/(KM)) of :func:`sum_bound_gap` when 1 <= L < N.
    """
    label = classify(config)
    K, M, N, L = config.K, config.m, config.N, config.L
    if label.case_id == "C-E":
        return 1.0
    if label.case_id != "C-F":
        return None
    if L >= N:
        return N / (K * M)
    root = bisect_root(lambda p: float(sum_bound_gap(config, p)), *BISECTION_BRACKET)
    if not root < N / (K * M):
        raise ThresholdError(f"root {root} is not below N/(KM) for {config}")
    return root


def _float_size_bounds(config: AntennaConfig, p: float) -> np.ndarray:
    M, N, L = config.m, config.N, config.L
    out = np.empty(config.K)
    for j in range(1, config.K + 1):
        b = binom_table(j, p)
        i = np.arange(j + 1)
        out[j - 1] = min(b @ np.minimum(i * M, N + L), b @ np.minimum(i * M + L, N))
    return out


def _exact_size_bounds(config: AntennaConfig, p: Fraction) -> list[Fraction]:
    """Sum bound for a j-user subset, j = 1..K, under independent traffic, exactly.

    The independent symmetric law is exchangeable, so every j-subset shares
    one bound and the active count in it is Bin(j, p).
    """
    M, N, L = config.m, config.N, config.L
    bounds = []
    for j in range(1, config.K + 1):
        recv = trans = Fraction(0)
        for i in range(j + 1):
            b = comb(j, i) * p**i * (1 - p) ** (j - i)
            recv += b * min(i * M, N + L)
            trans += b * min(i * M + L, N)
        bounds.append(min(recv, trans))
    return bounds


def is_collision_free(config: AntennaConfig, p: float | Fraction) -> bool:
    """True iff every user can simultaneously get DoF pM under independent traffic.

    Evaluated in exact rational arithmetic: when KM > N + L the sum
    constraint is violated only by O(p^K), far below any floating-point
    tolerance at small p. A float ``p`` is read as its shortest decimal
    repr, so 0.4 means 2/5 and the boundary p = N/(KM) stays collision-free.
    """
    require_symmetric(config)
    p = p if isinstance(p, Fraction) else Fraction(repr(float(p)))
    if not 0 <= p <= 1:
        raise DomainError(f"probability must lie in [0, 1], got {float(p)}")
    M = config.m
    # float screen first; fall back to exact arithmetic only near a tie
    margins = _float_size_bounds(config, float(p)) - np.arange(1, config.K + 1) * float(p) * M
    if margins.min() < -TIE_BAND:
        return False
    if margins.min() > TIE_BAND:
        return True
    return all(j * p * M <= bound for j, bound in enumerate(_exact_size_bounds(config, p), 1))


def is_collision_free_by_region(config: AntennaConfig, p: float) -> bool:
    """Same question via the floating-point region and :func:`contains` (1e-12 slack)."""
    require_symmetric(config)
    reg = region(config, make_independent(p, config.K))
    return contains(reg, [p * config.m] * config.K)


def p_i_crossover(config: AntennaConfig) -> float | None:
    """Traffic level where the individual bound switches from pM to the relay-limited term.

    For M > N the per-user bound is min(pM, p min(M+L, N) + (1-p) min(L, N));
    the two arguments cross at the returned p. Defined in cases C-C, C-D and
    C-F with M > N; None elsewhere.
    """
    label = classify(config)
    M, N, L = config.m, config.N, config.L
    if label.case_id == "C-C":
        # per-user bound is min(p(N+L), pN + (1-p) min(L, N)) here
        return min(L, N) / (L + min(L, N))
    if label.case_id in ("C-D", "C-F") and M > N:
        # pM = p min(M+L, N) + (1-p) min(L, N) is linear in p
        slope = M - min(M + L, N) + min(L, N)
        return min(L, N) / slope
    return None
