"""DoF region of the bursty MIMO MAC with a relay.

For every nonempty user subset S the sum of the DoF of users in S is at most

    min( E[min(sum_{i in A} M_i, N + L)],  E[min(sum_{i in A} M_i + L, N)] )

where A is the set of active users in S (the activity law marginalized to S).
The first term is the cut that groups the relay with the receiver, the second
the cut that groups it with the transmitters.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .core import (
    ActivityDistribution,
    AntennaConfig,
    DomainError,
    antenna_sums,
    check_cap,
    marginalize,
    mask_to_pattern,
)

CONTAINS_TOL = 1e-12
RECEIVE_CUT = "relay-receive-cut"
TRANSMIT_CUT = "relay-transmit-cut"


@dataclass(frozen=True)
class CutConstraint:
    subset: frozenset[int]
    mask: int
    bound: float
    receive_cut: float
    transmit_cut: float

    @property
    def binding_side(self) -> str:
        # ties go to the receive cut
        return RECEIVE_CUT if self.receive_cut <= self.transmit_cut else TRANSMIT_CUT


@dataclass(frozen=True)
class DofRegion:
    config: AntennaConfig
    constraints: tuple[CutConstraint, ...]

    def bound(self, subset: Iterable[int]) -> float:
        mask = sum(1 << (int(u) - 1) for u in set(subset))
        return self.constraints[mask - 1].bound

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["subset_mask", "subset_size", "bound", "binding_side"])
        for c in self.constraints:
            writer.writerow([c.mask, len(c.subset), f"{c.bound:.12g}", c.binding_side])
        return buf.getvalue()


def _check_dims(config: AntennaConfig, dist: ActivityDistribution) -> None:
    if config.K != dist.K:
        raise DomainError(f"config has K={config.K} but distribution has K={dist.K}")


def cut_terms(
    config: AntennaConfig, dist: ActivityDistribution, subset: Iterable[int]
) -> tuple[float, float]:
    """Both min arguments (receive cut, transmit cut) for one subset."""
    _check_dims(config, dist)
    users = sorted({int(u) for u in subset})
    if not users:
        raise DomainError("subset must be nonempty")
    marg = marginalize(dist, users)
    sums = antenna_sums([config.M[u - 1] for u in users])
    N, L = config.N, config.L
    recv = math.fsum(marg.mass * np.minimum(sums, N + L))
    trans = math.fsum(marg.mass * np.minimum(sums + L, N))
    return recv, trans


def cut_bound(
    config: AntennaConfig, dist: ActivityDistribution, subset: Iterable[int]
) -> float:
    """Right-hand side of the sum-DoF constraint for ``subset``."""
    return min(cut_terms(config, dist, subset))


def region(
    config: AntennaConfig, dist: ActivityDistribution, allow_large: bool = False
) -> DofRegion:
    """All 2^K - 1 subset constraints, ordered by subset mask."""
    _check_dims(config, dist)
    check_cap(config.K, allow_large)
    K, N, L = config.K, config.N, config.L
    full = 1 << K
    sums = antenna_sums(config.M)
    patterns = np.arange(full, dtype=np.int64)
    support = np.flatnonzero(dist.mass)
    weights = dist.mass[support]
    constraints = []
    # rows of subsets at a time keep the (subset x pattern) table small
    chunk = max(1, (1 << 22) // max(1, support.size))
    for start in range(1, full, chunk):
        subs = patterns[start : min(full, start + chunk)]
        active = sums[np.bitwise_and.outer(subs, support)]
        recv = np.minimum(active, N + L) @ weights
        trans = np.minimum(active + L, N) @ weights
        for s, r, t in zip(subs, recv, trans):
            constraints.append(
                CutConstraint(mask_to_pattern(int(s)), int(s), float(min(r, t)), float(r), float(t))
            )
    return DofRegion(config, tuple(constraints))


def contains(reg: DofRegion, d: Sequence[float], tol: float = CONTAINS_TOL) -> bool:
    """True iff the DoF vector satisfies every subset constraint."""
    d = np.asarray(d, dtype=float)
    if d.shape != (reg.config.K,):
        raise DomainError(f"DoF vector must have {reg.config.K} entries, got shape {d.shape}")
    if np.any(d < 0):
        raise DomainError("DoF entries must be non-negative")
    K = reg.config.K
    masks = np.arange(1, 1 << K, dtype=np.int64)
    subset_sums = np.zeros(masks.size)
    for k in range(K):
        subset_sums += ((masks >> k) & 1) * d[k]
    bounds = np.array([c.bound for c in reg.constraints])
    return bool(np.all(subset_sums <= bounds + tol))


def sum_dof(config: AntennaConfig, dist: ActivityDistribution) -> float:
    """Sum DoF with the relay: the full-set bound."""
    return cut_bound(config, dist, range(1, config.K + 1))


def sum_dof_no_relay(config: AntennaConfig, dist: ActivityDistribution) -> float:
    """Sum DoF with the relay removed (L = 0): E[min(sum_{i in A} M_i, N)]."""
    return sum_dof(config.with_relay(0), dist)
