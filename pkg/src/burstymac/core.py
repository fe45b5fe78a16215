"""Antenna configurations and traffic (activity) laws for the bursty MAC.

Activity patterns are encoded as K-bit masks: bit ``k - 1`` set means user
``k`` (1-based) is active in the slot. Public functions accept patterns as
iterables of 1-based user indices and return ``frozenset`` patterns.
"""

from __future__ import annotations

import json
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAX_K = 20
SUM_TOL = 1e-12
MARGINAL_SPREAD_TOL = 1e-9


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ValidationError(ValueError):
    """A traffic table or configuration failed validation."""


class AsymmetricConfigError(ValueError):
    """A symmetric-only operation received per-user antenna counts that differ."""


class EnumerationCapError(ValueError):
    """2^K pattern enumeration requested above the cap without override."""


@dataclass(frozen=True)
class AntennaConfig:
    """(K, M_1..M_K, N, L): users, transmit antennas per user, receiver and relay antennas.

    ``M`` may be given as a single int for a symmetric configuration.
    """

    K: int
    M: tuple[int, ...]
    N: int
    L: int

    def __init__(self, K: int, M: int | Sequence[int], N: int, L: int):
        if isinstance(M, (int, np.integer)):
            M = (int(M),) * int(K)
        M = tuple(int(m) for m in M)
        if K < 1:
            raise ValidationError(f"K must be >= 1, got {K}")
        if len(M) != K:
            raise ValidationError(f"expected {K} antenna counts, got {len(M)}")
        if any(m < 1 for m in M):
            raise ValidationError(f"every M_k must be >= 1, got {M}")
        if N < 1:
            raise ValidationError(f"N must be >= 1, got {N}")
        if L < 0:
            raise ValidationError(f"L must be >= 0, got {L}")
        object.__setattr__(self, "K", int(K))
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "N", int(N))
        object.__setattr__(self, "L", int(L))

    @property
    def is_symmetric(self) -> bool:
        return len(set(self.M)) == 1

    @property
    def m(self) -> int:
        """Common per-user antenna count; raises for asymmetric configs."""
        require_symmetric(self)
        return self.M[0]

    def with_relay(self, L: int) -> AntennaConfig:
        return AntennaConfig(self.K, self.M, self.N, L)

    def restrict(self, users: Sequence[int]) -> AntennaConfig:
        """Configuration seen by the listed (1-based) users only."""
        return AntennaConfig(len(users), [self.M[u - 1] for u in users], self.N, self.L)

    def __str__(self) -> str:
        m = str(self.M[0]) if self.is_symmetric else ",".join(map(str, self.M))
        return f"(K,M,N,L)=({self.K},{m},{self.N},{self.L})"


def require_symmetric(config: AntennaConfig) -> None:
    if not config.is_symmetric:
        raise AsymmetricConfigError(
            f"operation requires identical M_k, got M={config.M}"
        )


def check_cap(K: int, allow_large: bool = False) -> None:
    if K > MAX_K and not allow_large:
        raise EnumerationCapError(
            f"K={K} exceeds the enumeration cap {MAX_K}; pass allow_large=True to override"
        )


def pattern_to_mask(pattern: Iterable[int], K: int) -> int:
    mask = 0
    for user in pattern:
        user = int(user)
        if not 1 <= user <= K:
            raise DomainError(f"user index {user} outside 1..{K}")
        mask |= 1 << (user - 1)
    return mask


def mask_to_pattern(mask: int) -> frozenset[int]:
    return frozenset(i + 1 for i in range(int(mask).bit_length()) if mask >> i & 1)


def popcounts(K: int) -> np.ndarray:
    """Number of active users for every mask 0..2^K-1."""
    masks = np.arange(1 << K, dtype=np.int64)
    counts = np.zeros(1 << K, dtype=np.int64)
    for k in range(K):
        counts += (masks >> k) & 1
    return counts


def antenna_sums(M: Sequence[int]) -> np.ndarray:
    """Total active transmit antennas for every mask over len(M) users."""
    K = len(M)
    masks = np.arange(1 << K, dtype=np.int64)
    sums = np.zeros(1 << K, dtype=np.int64)
    for k, m in enumerate(M):
        sums += ((masks >> k) & 1) * int(m)
    return sums


@dataclass(frozen=True, eq=False)
class ActivityDistribution:
    """Probability mass over the 2^K activity patterns of one slot.

    ``mass[a]`` is the probability that exactly the users in mask ``a`` are
    active. The array is read-only. ``warning`` is set when the per-user
    marginals are not identical.
    """

    K: int
    mass: np.ndarray
    warning: str | None = field(default=None, compare=False)

    def __post_init__(self):
        mass = np.array(self.mass, dtype=float)
        if mass.shape != (1 << self.K,):
            raise ValidationError(f"mass table must have 2^K={1 << self.K} entries")
        if np.any(mass < 0):
            raise ValidationError("negative probability mass")
        total = math.fsum(mass)
        if abs(total - 1.0) > SUM_TOL:
            raise ValidationError(f"masses sum to {total!r}, not 1")
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)

    def __eq__(self, other):
        if not isinstance(other, ActivityDistribution):
            return NotImplemented
        return self.K == other.K and np.array_equal(self.mass, other.mass)

    def __hash__(self):
        return hash((self.K, self.mass.tobytes()))

    def prob(self, pattern: Iterable[int]) -> float:
        return float(self.mass[pattern_to_mask(pattern, self.K)])

    def items(self):
        """(pattern, probability) pairs with nonzero mass, in mask order."""
        for mask in np.flatnonzero(self.mass):
            yield mask_to_pattern(int(mask)), float(self.mass[mask])

    def marginals(self) -> np.ndarray:
        masks = np.arange(1 << self.K)
        return np.array(
            [self.mass[(masks >> k) & 1 == 1].sum() for k in range(self.K)]
        )

    def allclose(self, other: ActivityDistribution, atol: float = 1e-12) -> bool:
        return self.K == other.K and bool(np.allclose(self.mass, other.mass, rtol=0, atol=atol))


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise DomainError(f"probability must lie in [0, 1], got {p}")
    return p


def make_independent(p: float, K: int, allow_large: bool = False) -> ActivityDistribution:
    """Each user active independently with probability p."""
    p = _check_p(p)
    if K < 1:
        raise DomainError(f"K must be >= 1, got {K}")
    check_cap(K, allow_large)
    n = popcounts(K)
    mass = np.power(p, n) * np.power(1.0 - p, K - n)
    return ActivityDistribution(K, mass)


def make_dependent(p: float, K: int, allow_large: bool = False) -> ActivityDistribution:
    """All users active together with probability p, otherwise all idle."""
    p = _check_p(p)
    if K < 1:
        raise DomainError(f"K must be >= 1, got {K}")
    check_cap(K, allow_large)
    mass = np.zeros(1 << K)
    mass[0] = 1.0 - p
    mass[-1] += p
    return ActivityDistribution(K, mass)


def make_custom(
    table: Iterable[tuple[Iterable[int], float]] | Mapping,
    K: int | None = None,
    allow_large: bool = False,
) -> ActivityDistribution:
    """Build a law from explicit (pattern, probability) entries.

    K defaults to the largest user index mentioned. Unlisted patterns get
    zero mass.
    """
    entries = list(table.items()) if isinstance(table, Mapping) else list(table)
    patterns = [frozenset(int(u) for u in pat) for pat, _ in entries]
    if K is None:
        K = max((max(pat) for pat in patterns if pat), default=1)
    check_cap(K, allow_large)
    mass = np.zeros(1 << K)
    seen = set()
    for pat, (_, prob) in zip(patterns, entries):
        mask = pattern_to_mask(pat, K)
        if mask in seen:
            raise ValidationError(f"duplicate pattern {sorted(pat)}")
        seen.add(mask)
        prob = float(prob)
        if prob < 0 or math.isnan(prob):
            raise ValidationError(f"negative mass {prob} for pattern {sorted(pat)}")
        mass[mask] = prob
    dist = ActivityDistribution(K, mass)
    marg = dist.marginals()
    if marg.max() - marg.min() > MARGINAL_SPREAD_TOL:
        dist = ActivityDistribution(
            K, mass, warning=f"non-identical user marginals {np.round(marg, 12).tolist()}"
        )
    return dist


def mix(dists: Sequence[ActivityDistribution], weights: Sequence[float]) -> ActivityDistribution:
    """Convex combination of laws over the same K, returned as a custom law."""
    if len(dists) != len(weights) or not dists:
        raise DomainError("need one weight per distribution")
    K = dists[0].K
    if any(d.K != K for d in dists):
        raise DomainError("all mixture components must share K")
    mass = sum(float(w) * d.mass for d, w in zip(dists, weights))
    return make_custom(
        [(mask_to_pattern(a), mass[a]) for a in range(1 << K)], K=K
    )


def _normalize_subset(subset: Iterable[int], K: int) -> tuple[int, ...]:
    users = tuple(sorted({int(u) for u in subset}))
    if not users:
        raise DomainError("subset must be nonempty")
    for u in users:
        if not 1 <= u <= K:
            raise DomainError(f"user index {u} outside 1..{K}")
    return users


def marginalize(dist: ActivityDistribution, subset: Iterable[int]) -> ActivityDistribution:
    """Law of A ∩ subset, with the subset's users renumbered 1..|subset| in order."""
    users = _normalize_subset(subset, dist.K)
    masks = np.arange(1 << dist.K, dtype=np.int64)
    compressed = np.zeros_like(masks)
    for j, u in enumerate(users):
        compressed |= ((masks >> (u - 1)) & 1) << j
    pooled = np.bincount(compressed, weights=dist.mass, minlength=1 << len(users))
    # pooling can leave the total a few ulps off 1
    pooled = pooled / math.fsum(pooled)
    return ActivityDistribution(len(users), pooled)


def marginal_activity_prob(dist: ActivityDistribution, user: int) -> float:
    """Probability that the given (1-based) user is active."""
    if not 1 <= int(user) <= dist.K:
        raise DomainError(f"user index {user} outside 1..{dist.K}")
    masks = np.arange(1 << dist.K)
    return float(math.fsum(dist.mass[(masks >> (int(user) - 1)) & 1 == 1]))


def empirical(masks: Sequence[int] | np.ndarray, K: int) -> ActivityDistribution:
    """Relative pattern frequencies of a mask sequence."""
    masks = np.asarray(masks, dtype=np.int64)
    if masks.size == 0:
        raise DomainError("empty trace")
    counts = np.bincount(masks, minlength=1 << K).astype(float)
    return ActivityDistribution(K, counts / counts.sum())


# JSON: {"K": int, "mass": [{"pattern": [1-based users], "p": real}, ...]}

def dist_to_json(dist: ActivityDistribution) -> dict:
    return {
        "K": dist.K,
        "mass": [{"pattern": sorted(pat), "p": prob} for pat, prob in dist.items()],
    }


def dist_from_json(doc: Mapping) -> ActivityDistribution:
    try:
        K = int(doc["K"])
        rows = [(row["pattern"], row["p"]) for row in doc["mass"]]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed distribution document: {exc}") from exc
    return make_custom(rows, K=K)


def load_distribution(path: str | Path) -> ActivityDistribution:
    with open(path) as fh:
        return dist_from_json(json.load(fh))


def save_distribution(dist: ActivityDistribution, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(dist_to_json(dist), fh, indent=2)
