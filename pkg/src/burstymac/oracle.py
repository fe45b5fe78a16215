"""Independent numerical checks of the closed forms.

* :func:`rank_decode_count` builds the explicit linear system of the
  receive-and-forward scheme over a whole trace and measures its rank,
  exactly over GF(2^31 - 1) or numerically over the reals.
* :func:`cutset_evaluate` / :func:`cutset_slope` evaluate the two cut-set
  mutual-information terms with Gaussian inputs at finite power and fit their
  slope against log2 P.
* :func:`rate_penalty` is the compression-noise penalty of the relay, which
  does not grow with P.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import ActivityDistribution, AntennaConfig, DomainError, marginalize
from .sim import ActivityTrace, SimState, make_rng, step

PRIME = 2**31 - 1
RANK_RTOL = 1e-8
MAX_RESAMPLE = 10
DESK_MAX_K = 4
DESK_MAX_SLOTS = 200
DEFAULT_P_GRID = (1e6, 1e8)

Field = Literal["prime", "real"]


class DegenerateChannelError(RuntimeError):
    pass


def matmul_mod(a: np.ndarray, b: np.ndarray, p: int = PRIME) -> np.ndarray:
    """Matrix product mod p without int64 overflow (entries < p < 2^31)."""
    a = np.asarray(a, dtype=np.int64) % p
    b = np.asarray(b, dtype=np.int64) % p
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for k in range(a.shape[1]):
        out = (out + np.outer(a[:, k], b[k, :]) % p) % p
    return out


def rank_mod_p(matrix: np.ndarray, p: int = PRIME) -> int:
    """Exact rank over GF(p) by Gaussian elimination."""
    a = np.array(matrix, dtype=np.int64) % p
    rows, cols = a.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        nz = np.flatnonzero(a[rank:, c])
        if nz.size == 0:
            continue
        pivot = rank + nz[0]
        if pivot != rank:
            a[[rank, pivot]] = a[[pivot, rank]]
        inv = pow(int(a[rank, c]), p - 2, p)
        a[rank] = a[rank] * inv % p
        below = np.flatnonzero(a[rank + 1 :, c]) + rank + 1
        if below.size:
            factors = a[below, c][:, None]
            a[below] = (a[below] - factors * a[rank] % p) % p
        rank += 1
    return rank


def rank_real(matrix: np.ndarray, rtol: float = RANK_RTOL) -> int:
    if matrix.size == 0:
        return 0
    s = np.linalg.svd(matrix, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def field_rank(matrix: np.ndarray, field: Field) -> int:
    if field == "prime":
        return rank_mod_p(matrix)
    return rank_real(np.asarray(matrix, dtype=float))


@dataclass(frozen=True, eq=False)
class ChannelInstance:
    """Time-invariant channels: H[k] (N x M_k), H_relay_in[k] (L x M_k), H_relay_out (N x L)."""

    field: Field
    H: tuple[np.ndarray, ...]
    H_relay_in: tuple[np.ndarray, ...]
    H_relay_out: np.ndarray
    seed: int

    def matrices(self) -> list[np.ndarray]:
        return [*self.H, *self.H_relay_in, self.H_relay_out]


def _draw(rng: np.random.Generator, shape: tuple[int, int], field: Field) -> np.ndarray:
    if field == "prime":
        return rng.integers(1, PRIME, size=shape, dtype=np.int64)
    return rng.standard_normal(shape)


def sample_channel(config: AntennaConfig, field: Field = "prime", seed: int = 0) -> ChannelInstance:
    """Draw full-rank channels; resample up to 10 times on rank deficiency."""
    if field not in ("prime", "real"):
        raise DomainError(f"unknown field {field!r}")
    N, L = config.N, config.L
    for attempt in range(MAX_RESAMPLE):
        rng = make_rng(seed, 1000 + attempt)
        H = tuple(_draw(rng, (N, m), field) for m in config.M)
        H_in = tuple(_draw(rng, (L, m), field) for m in config.M)
        H_out = _draw(rng, (N, L), field)
        channel = ChannelInstance(field, H, H_in, H_out, seed)
        if all(field_rank(h, field) == min(h.shape) for h in channel.matrices() if h.size):
            return channel
    raise DegenerateChannelError(f"no full-rank channel after {MAX_RESAMPLE} draws")


def build_decoding_system(
    config: AntennaConfig,
    trace: ActivityTrace,
    channel: ChannelInstance,
    seed: int | None = None,
) -> tuple[np.ndarray, SimState]:
    """Stack every receiver observation of the trace as rows over all transmitted symbols.

    The relay keeps ``captured`` of its observation rows each slot and, when
    the policy forwards ``relayed`` dimensions, sends fresh random linear
    combinations of everything it has stored through a random L x relayed
    precoder. Noise is omitted: only the rank matters.
    """
    field = channel.field
    rng = make_rng(channel.seed if seed is None else seed, 7)
    N, L = config.N, config.L

    # one unknown per (slot, active user, antenna)
    columns: list[list[tuple[int, int]]] = []
    n_unknowns = 0
    for mask in trace.masks:
        spans = []
        for k, m in enumerate(config.M):
            if int(mask) >> k & 1:
                spans.append((k, n_unknowns))
                n_unknowns += m
        columns.append(spans)

    dtype = np.int64 if field == "prime" else float
    stored = np.zeros((0, n_unknowns), dtype=dtype)
    rows = []
    state = SimState()
    for t, mask in enumerate(trace.masks):
        state, _direct, relayed, captured = step(state, int(mask), config)
        y = np.zeros((N, n_unknowns), dtype=dtype)
        y_relay = np.zeros((L, n_unknowns), dtype=dtype)
        for k, start in columns[t]:
            m = config.M[k]
            y[:, start : start + m] = channel.H[k]
            y_relay[:, start : start + m] = channel.H_relay_in[k]
        if relayed:
            mixing = _draw(rng, (relayed, stored.shape[0]), field)
            precoder = _draw(rng, (L, relayed), field)
            if field == "prime":
                sent = matmul_mod(matmul_mod(channel.H_relay_out, precoder), matmul_mod(mixing, stored))
                y = (y + sent) % PRIME
            else:
                y = y + channel.H_relay_out @ precoder @ (mixing @ stored)
        rows.append(y)
        if captured:
            stored = np.vstack([stored, y_relay[:captured]])
    system = np.vstack(rows) if rows else np.zeros((0, n_unknowns))
    return system, state


def rank_decode_count(
    config: AntennaConfig,
    trace: ActivityTrace,
    channel: ChannelInstance,
    seed: int | None = None,
    allow_large: bool = False,
) -> int:
    """Number of transmitted symbol dimensions the receiver can resolve."""
    if trace.K != config.K:
        raise DomainError(f"trace has K={trace.K} but config has K={config.K}")
    if not allow_large and (config.K > DESK_MAX_K or len(trace) > DESK_MAX_SLOTS):
        raise DomainError(
            f"rank oracle is desk-scale (K <= {DESK_MAX_K}, slots <= {DESK_MAX_SLOTS}); pass allow_large=True"
        )
    system, _ = build_decoding_system(config, trace, channel, seed)
    if system.shape[1] == 0:
        return 0
    return field_rank(system, channel.field)


def _log2det_plus_identity(P: float, G: np.ndarray, dim: int) -> float:
    if G.shape[1] == 0:
        return 0.0
    sign, logdet = np.linalg.slogdet(np.eye(dim) + P * (G @ G.T))
    if sign <= 0:
        raise ArithmeticError("I + P G G^T should be positive definite")
    return float(logdet / np.log(2.0))


def cutset_evaluate(
    config: AntennaConfig,
    dist: ActivityDistribution,
    subset: Iterable[int],
    P: float,
    channel: ChannelInstance,
) -> tuple[float, float]:
    """Both cut-set terms in bits with independent Gaussian inputs of power P.

    cut1 = E_A log2 det(I_{N+L} + P G_A G_A^T), G_A = [H_k; H_Rk] over active k in the subset.
    cut2 = E_A log2 det(I_N + P F_A F_A^T),     F_A = [H_k ..., H_R].
    The expectation enumerates the subset's marginal law exactly.
    """
    if P <= 0:
        raise DomainError("power must be positive")
    if channel.field != "real":
        raise DomainError("cut-set evaluation needs a real-valued channel")
    users = sorted({int(u) for u in subset})
    marg = marginalize(dist, users)
    N, L = config.N, config.L
    cut1 = cut2 = 0.0
    for b in np.flatnonzero(marg.mass):
        active = [users[j] - 1 for j in range(len(users)) if int(b) >> j & 1]
        G = np.hstack(
            [np.vstack([channel.H[k], channel.H_relay_in[k]]) for k in active]
            or [np.zeros((N + L, 0))]
        )
        F = np.hstack([channel.H[k] for k in active] + [channel.H_relay_out])
        w = float(marg.mass[b])
        cut1 += w * _log2det_plus_identity(P, G, N + L)
        cut2 += w * _log2det_plus_identity(P, F, N)
    return cut1, cut2


def cutset_slope(
    config: AntennaConfig,
    dist: ActivityDistribution,
    subset: Iterable[int],
    P_grid: Sequence[float] = DEFAULT_P_GRID,
    channel: ChannelInstance | None = None,
    seed: int = 0,
) -> float:
    """Least-squares slope of min(cut1, cut2) against log2 P."""
    if len(P_grid) < 2:
        raise DomainError("need at least two powers to fit a slope")
    channel = channel or sample_channel(config, "real", seed)
    subset = list(subset)
    x = np.log2(np.asarray(P_grid, dtype=float))
    y = np.array([min(cutset_evaluate(config, dist, subset, P, channel)) for P in P_grid])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def rate_penalty(L: int, P: float | None = None) -> float:
    """Relay compression penalty in bits: h(Z_R + Zhat_R) - h(Zhat_R) = L log2 2 = L.

    Both noises are CN(0, I_L) and neither depends on the transmit power, so
    ``P`` is accepted only to make that independence explicit.
    """
    if L < 0:
        raise DomainError("L must be >= 0")
    if P is not None and P <= 0:
        raise DomainError("power must be positive")
    return float(L)


def gaussian_entropy_bits(cov: np.ndarray) -> float:
    """Differential entropy of CN(0, cov) in bits: log2 det(pi e cov)."""
    dim = cov.shape[0]
    if dim == 0:
        return 0.0
    sign, logdet = np.linalg.slogdet(np.pi * np.e * cov)
    return float(logdet.real / np.log(2.0))


def rate_penalty_monte_carlo(L: int, samples: int = 4096, seed: int = 0) -> float:
    """Entropy difference from sampled relay and compression noise.

    The 2L noise columns are drawn i.i.d. CN(0, 1) and then jointly whitened,
    so each sample covariance is exactly the identity and the two noises are
    exactly uncorrelated in-sample; the Gaussian entropy formula is applied to
    the sample covariances of Z_R + Zhat_R and Zhat_R.
    """
    if L < 0:
        raise DomainError("L must be >= 0")
    if L == 0:
        return 0.0
    rng = make_rng(seed, 99)
    w = (rng.standard_normal((samples, 2 * L)) + 1j * rng.standard_normal((samples, 2 * L))) / np.sqrt(2)
    q, _ = np.linalg.qr(w)
    q = q * np.sqrt(samples)
    z_relay, z_hat = q[:, :L], q[:, L:]
    y_hat = z_relay + z_hat
    cov_sum = y_hat.conj().T @ y_hat / samples
    cov_hat = z_hat.conj().T @ z_hat / samples
    return gaussian_entropy_bits(cov_sum) - gaussian_entropy_bits(cov_hat)
