"""Slot-level simulator of the relay's receive-and-forward scheme.

Accounting is in signal dimensions (generic full-rank channels make ranks
equal dimension counts). In each slot, with ``fresh`` the number of active
transmit antennas:

* the receiver resolves ``direct = min(fresh, N)`` fresh dimensions;
* when the receiver overflows, the relay stores ``captured = min(L, fresh - N)``
  extra combinations of the slot's symbols;
* when the receiver has spare dimensions, the relay forwards
  ``relayed = min(L, N - direct, buffer)`` stored combinations (greedy).

Capture and forwarding never happen in the same slot, so the buffer obeys
the Lindley recursion ``b' = max(b + captured - min(L, spare), 0)``, which
:func:`simulate` evaluates in closed form over the whole trace.

Random traces use numpy's SFC64 generator (a 64-bit add/xor/shift/rotate
generator) seeded with ``SeedSequence([seed, stream])``; patterns are drawn
by inverse CDF over the 2^K mass table in mask order.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (
    ActivityDistribution,
    AntennaConfig,
    DomainError,
    antenna_sums,
    empirical,
    mask_to_pattern,
    pattern_to_mask,
)
from .region import sum_dof


@dataclass(frozen=True, eq=False)
class ActivityTrace:
    K: int
    masks: np.ndarray
    seed: int | None = None
    source: str = "explicit"  # "explicit" or "sampled"

    def __post_init__(self):
        masks = np.array(self.masks, dtype=np.int64)
        if masks.ndim != 1:
            raise DomainError("trace masks must be one-dimensional")
        if masks.size and (masks.min() < 0 or masks.max() >= 1 << self.K):
            raise DomainError(f"trace contains a pattern outside users 1..{self.K}")
        masks.setflags(write=False)
        object.__setattr__(self, "masks", masks)

    def __len__(self) -> int:
        return int(self.masks.size)

    def __eq__(self, other):
        if not isinstance(other, ActivityTrace):
            return NotImplemented
        return self.K == other.K and np.array_equal(self.masks, other.masks)

    def patterns(self) -> list[frozenset[int]]:
        return [mask_to_pattern(int(m)) for m in self.masks]

    @classmethod
    def from_patterns(cls, patterns: Iterable[Iterable[int]], K: int) -> ActivityTrace:
        return cls(K, [pattern_to_mask(p, K) for p in patterns])

    def to_text(self) -> str:
        """One line per slot, comma-separated 0/1 flags for users 1..K."""
        lines = (",".join(str((int(m) >> k) & 1) for k in range(self.K)) for m in self.masks)
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_text(cls, text: str) -> ActivityTrace:
        rows = [line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")]
        if not rows:
            raise DomainError("trace file has no slots")
        flags = [row.split(",") for row in rows]
        K = len(flags[0])
        masks = []
        for n, row in enumerate(flags, 1):
            if len(row) != K or any(f.strip() not in ("0", "1") for f in row):
                raise DomainError(f"trace line {n}: expected {K} comma-separated 0/1 flags")
            masks.append(sum(1 << k for k, f in enumerate(row) if f.strip() == "1"))
        return cls(K, masks)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: str | Path) -> ActivityTrace:
        return cls.from_text(Path(path).read_text())


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.SFC64(np.random.SeedSequence([int(seed), int(stream)])))


def sample_trace(dist: ActivityDistribution, slots: int, seed: int, stream: int = 0) -> ActivityTrace:
    """i.i.d. per-slot patterns drawn from ``dist``."""
    if slots < 1:
        raise DomainError("slots must be >= 1")
    u = make_rng(seed, stream).random(slots)
    cdf = np.cumsum(dist.mass)
    masks = np.searchsorted(cdf, u, side="right")
    # u can land above cdf[-1] when the masses sum to 1 - ulp
    masks = np.minimum(masks, int(np.flatnonzero(dist.mass)[-1]))
    return ActivityTrace(dist.K, masks, seed=seed, source="sampled")


@dataclass(frozen=True)
class SimState:
    buffer: int = 0
    delivered_direct: int = 0
    delivered_relayed: int = 0
    offered: int = 0
    slot_index: int = 0

    @property
    def delivered(self) -> int:
        return self.delivered_direct + self.delivered_relayed


def step(
    state: SimState, active: Iterable[int] | int, config: AntennaConfig
) -> tuple[SimState, int, int, int]:
    """Advance one slot; ``active`` is a pattern of 1-based users or a mask.

    Returns (new state, direct, relayed, captured).
    """
    mask = active if isinstance(active, (int, np.integer)) else pattern_to_mask(active, config.K)
    fresh = sum(m for k, m in enumerate(config.M) if int(mask) >> k & 1)
    N, L = config.N, config.L
    direct = min(fresh, N)
    spare = N - direct
    relayed = min(L, spare, state.buffer)
    captured = min(L, max(fresh - N, 0))
    new = SimState(
        buffer=state.buffer + captured - relayed,
        delivered_direct=state.delivered_direct + direct,
        delivered_relayed=state.delivered_relayed + relayed,
        offered=state.offered + fresh,
        slot_index=state.slot_index + 1,
    )
    return new, direct, relayed, captured


@dataclass(frozen=True)
class SlotLog:
    """Per-slot counts of one run (arrays of length ``slots``)."""

    fresh: np.ndarray
    direct: np.ndarray
    relayed: np.ndarray
    captured: np.ndarray
    buffer_after: np.ndarray


@dataclass(frozen=True)
class SimReport:
    throughput: float
    formula: float
    deviation: float
    buffer_high_water: int
    slots: int
    seed: int | None
    final: SimState
    log: SlotLog | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "throughput": self.throughput,
            "formula": self.formula,
            "deviation": self.deviation,
            "buffer_high_water": self.buffer_high_water,
            "slots": self.slots,
            "seed": self.seed,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def run_trace(config: AntennaConfig, trace: ActivityTrace, initial: SimState | None = None) -> tuple[SimState, SlotLog]:
    """Fold the greedy policy over a trace, vectorized over slots."""
    if trace.K != config.K:
        raise DomainError(f"trace has K={trace.K} but config has K={config.K}")
    initial = initial or SimState()
    N, L = config.N, config.L
    fresh = antenna_sums(config.M)[trace.masks]
    direct = np.minimum(fresh, N)
    captured = np.minimum(L, np.maximum(fresh - N, 0))
    can_forward = np.minimum(L, N - direct)
    # b_{t+1} = max(b_t + x_t, 0) with x = captured - can_forward
    drift = np.concatenate(([initial.buffer], captured - can_forward))
    level = np.cumsum(drift)
    # buffer_t = S_t - min(0, min_{j<=t} S_j) with S_0 = initial buffer
    floor = np.minimum(np.minimum.accumulate(level), 0)
    buffer = level - floor
    buffer_after = buffer[1:]
    relayed = buffer[:-1] + captured - buffer_after
    final = SimState(
        buffer=int(buffer[-1]),
        delivered_direct=initial.delivered_direct + int(direct.sum()),
        delivered_relayed=initial.delivered_relayed + int(relayed.sum()),
        offered=initial.offered + int(fresh.sum()),
        slot_index=initial.slot_index + len(trace),
    )
    return final, SlotLog(fresh, direct, relayed, captured, buffer_after)


def simulate(
    config: AntennaConfig,
    source: ActivityDistribution | ActivityTrace,
    slots: int | None = None,
    seed: int = 0,
    keep_log: bool = False,
) -> SimReport:
    """Run the scheme over a sampled or explicit trace and compare with the sum DoF.

    With a distribution, ``slots`` i.i.d. patterns are drawn with ``seed``;
    the reference value is the sum DoF under that distribution. With an
    explicit trace the reference uses the trace's empirical pattern law.
    """
    if isinstance(source, ActivityTrace):
        trace = source if slots is None else ActivityTrace(source.K, source.masks[:slots], source.seed)
        law = empirical(trace.masks, trace.K)
        seed_used = trace.seed
    else:
        if slots is None or slots < 1:
            raise DomainError("slots must be >= 1 when sampling from a distribution")
        trace = sample_trace(source, slots, seed)
        law = source
        seed_used = seed
    final, log = run_trace(config, trace)
    throughput = final.delivered / len(trace)
    formula = sum_dof(config, law)
    high_water = int(log.buffer_after.max()) if len(trace) else 0
    return SimReport(
        throughput=throughput,
        formula=formula,
        deviation=abs(throughput - formula),
        buffer_high_water=high_water,
        slots=len(trace),
        seed=seed_used,
        final=final,
        log=log if keep_log else None,
    )


def compare_to_formula(report: SimReport, config: AntennaConfig, dist: ActivityDistribution) -> float:
    """Signed gap between simulated throughput and the sum DoF."""
    return report.throughput - sum_dof(config, dist)


def merge_reports(reports: Sequence[SimReport]) -> SimReport:
    """Combine independent runs; throughput is the slot-weighted average."""
    if not reports:
        raise DomainError("nothing to merge")
    slots = sum(r.slots for r in reports)
    throughput = sum(r.throughput * r.slots for r in reports) / slots
    formula = reports[0].formula
    final = SimState(
        buffer=sum(r.final.buffer for r in reports),
        delivered_direct=sum(r.final.delivered_direct for r in reports),
        delivered_relayed=sum(r.final.delivered_relayed for r in reports),
        offered=sum(r.final.offered for r in reports),
        slot_index=slots,
    )
    return SimReport(
        throughput=throughput,
        formula=formula,
        deviation=abs(throughput - formula),
        buffer_high_water=max(r.buffer_high_water for r in reports),
        slots=slots,
        seed=None,
        final=final,
    )


def empirical_cut_limits(config: AntennaConfig, trace: ActivityTrace) -> tuple[float, float]:
    """Per-slot averages of min(fresh, N+L) and min(fresh+L, N) over a trace."""
    fresh = antenna_sums(config.M)[trace.masks]
    N, L = config.N, config.L
    return float(np.minimum(fresh, N + L).mean()), float(np.minimum(fresh + L, N).mean())
