"""Random bipartite measurement graphs and the deterministic parameter schedule.

The recovery pipeline uses three graph families over the n signal
components (left nodes):

  * seeding:          ceil(c*k) right nodes, edge probability 1/k
  * decay stage l:    ceil(c*f_{l-1}*k) right nodes, probability 1/(f_{l-1}*k)
  * cleanup:          ceil(c*(k/log k)*log(k/log k)) right nodes,
                      probability (log k)/k

where f_l is the expected fraction of non-zero components still
unresolved after stage l.  The schedule below computes the f sequence
from the asymptotic singleton/doubleton/multiton probabilities and the
giant-component fixed point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from ._kernels import sample_rows


class ConfigError(ValueError):
    """Raised when a parameter combination cannot support recovery."""


def singleton_prob() -> float:
    """Asymptotic probability that a seeding right node sees exactly one
    non-zero component: e^{-1}."""
    return math.exp(-1.0)


def singleton_prob_exact(k: int) -> float:
    """Finite-k singleton probability (1 - 1/k)^(k-1)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return (1.0 - 1.0 / k) ** (k - 1)


def doubleton_prob() -> float:
    """Asymptotic probability of seeing exactly two non-zeros: e^{-1}/2."""
    return 0.5 * math.exp(-1.0)


def doubleton_prob_exact(k: int) -> float:
    """Finite-k doubleton probability C(k,2) (1/k)^2 (1-1/k)^(k-2),
    which simplifies to (1/2)(1-1/k)^(k-1) for k >= 2."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return 0.0
    return 0.5 * ((k - 1.0) / k) * (1.0 - 1.0 / k) ** (k - 2)


def multiton_prob(f_prev: float) -> float:
    """Asymptotic probability that a decay-stage right node is a
    resolvable multiton (exactly one unresolved non-zero neighbor plus
    at least one resolved one): e^{-1} - e^{-1/f_prev}.

    f_prev = 1 is allowed as a testing boundary and gives 0.
    """
    if not 0.0 < f_prev <= 1.0:
        raise ValueError(f"f_prev must be in (0, 1], got {f_prev}")
    return math.exp(-1.0) - math.exp(-1.0 / f_prev)


def solve_beta(r: float) -> float:
    """Positive root of beta + exp(-beta * r) = 1 for r > 1.

    The root is the asymptotic fraction of nodes inside the largest
    component of a random graph with edge-to-node ratio r/2.  Found by
    bisection on (0, 1); the residual is below 1e-12.
    """
    if r <= 1.0:
        raise ValueError(f"no positive root for r <= 1, got r={r}")

    def g(b: float) -> float:
        return b + math.exp(-b * r) - 1.0

    # g(0) = 0 is the trivial root; g'(0) = 1 - r < 0 pushes g negative
    # just above zero while g(1) = exp(-r) > 0.
    lo, hi = 1e-15, 1.0
    if g(lo) >= 0.0:
        # extremely small roots only appear for r barely above 1
        lo = 1e-300
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16:
            break
    beta = 0.5 * (lo + hi)
    assert abs(g(beta)) <= 1e-12, (r, beta, g(beta))
    return beta


def default_stage_count(k: int) -> int:
    """Default number of geometric-decay stages: ceil(log2 log2 k)."""
    if k < 4:
        return 1
    return max(1, math.ceil(math.log2(math.log2(k))))


@dataclass(frozen=True)
class EnsembleConfig:
    """Parameters of one measurement ensemble.

    n: signal length, k: sparsity, c: density constant, L: number of
    geometric-decay stages, seed: 64-bit stream seed.
    """

    n: int
    k: int
    c: float
    L: int
    seed: int

    def __post_init__(self) -> None:
        if not 1 <= self.k <= self.n:
            raise ConfigError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.c <= 0:
            raise ConfigError(f"c must be positive, got {self.c}")
        if self.L < 0:
            raise ConfigError(f"L must be >= 0, got {self.L}")
        if giant_component_rate(self.c) <= 1.0:
            raise ConfigError(
                f"c={self.c} too small: the seeding pass cannot form a giant "
                "component (2*(1-exp(-c/e))*c/(2e) must exceed 1)"
            )


def giant_component_rate(c: float) -> float:
    """r = 2*(1 - e^{-c*P_S})*c*P_D with the asymptotic P_S, P_D."""
    ps = singleton_prob()
    pd = doubleton_prob()
    return 2.0 * (1.0 - math.exp(-c * ps)) * c * pd


def _cleanup_log_k(k: int) -> float:
    # natural log, clamped to 1 at toy scale so sizes stay positive
    return 1.0 if k <= math.e**2 else math.log(k)


@dataclass(frozen=True)
class StageSchedule:
    """Deterministic per-phase sizing derived from (k, c, L).

    Phase order everywhere in the package: index 0 is seeding, indices
    1..L the geometric-decay stages, index L+1 the cleanup phase.
    """

    f_I: float
    f_stages: tuple[float, ...]
    right_counts: tuple[int, ...]
    edge_probs: tuple[float, ...]

    @property
    def n_phases(self) -> int:
        return len(self.right_counts)

    @property
    def measurement_count(self) -> int:
        """Total number of intensity measurements m = 5 * sum right counts."""
        return 5 * sum(self.right_counts)


def build_schedule(cfg: EnsembleConfig) -> StageSchedule:
    """Compute the f recursion and per-phase sizes for a valid config."""
    c, k, L = cfg.c, cfg.k, cfg.L
    r = giant_component_rate(c)
    if r <= 1.0:
        raise ConfigError(f"giant-component condition fails for c={c} (r={r})")
    beta_c = solve_beta(r)
    f_i = 1.0 - beta_c * (1.0 - math.exp(-c * singleton_prob()))

    fs = [f_i]
    for _ in range(L):
        fs.append(math.exp(-c * multiton_prob(fs[-1])) * fs[-1])

    logk = _cleanup_log_k(k)
    right_counts = [math.ceil(c * k)]
    edge_probs = [1.0 / k]
    for l in range(L):
        right_counts.append(math.ceil(c * fs[l] * k))
        # an f*k below one component is degenerate; cap the density at 1
        edge_probs.append(min(1.0, 1.0 / (fs[l] * k)))
    right_counts.append(math.ceil(c * (k / logk) * math.log(k / logk)))
    edge_probs.append(min(1.0, logk / k))

    return StageSchedule(
        f_I=f_i,
        f_stages=tuple(fs[1:]),
        right_counts=tuple(right_counts),
        edge_probs=tuple(edge_probs),
    )


@dataclass(frozen=True)
class BipartiteGraph:
    """Right-node adjacency over left nodes 1..n_left, stored compressed.

    Row i covers indices[indptr[i]:indptr[i+1]], sorted ascending,
    1-based.  Immutable once built.
    """

    n_left: int
    indptr: np.ndarray
    indices: np.ndarray

    def __post_init__(self) -> None:
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)

    @property
    def n_right(self) -> int:
        return len(self.indptr) - 1

    @property
    def n_edges(self) -> int:
        return int(self.indptr[-1])

    def adjacency(self, i: int) -> np.ndarray:
        """Sorted left indices adjacent to right node i (read-only view)."""
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    @property
    def right_nodes(self):
        """All adjacency lists; builds n_right views, intended for tests."""
        return tuple(self.adjacency(i) for i in range(self.n_right))


def build_graph(n_left: int, n_right: int, edge_prob: float, rng: int) -> BipartiteGraph:
    """Sample a random bipartite graph: each (right, left) pair is an edge
    independently with probability edge_prob.

    `rng` is a 64-bit stream key (see _rng.stream_key); the same key
    always produces the identical graph.  Rows are generated by
    geometric gap skipping so the expected cost is proportional to the
    edge count, not n_left * n_right.
    """
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError(f"edge_prob must be in [0, 1], got {edge_prob}")
    if edge_prob > 0.0 and edge_prob < 1.0:
        inv_log_q = 1.0 / math.log1p(-edge_prob)
    else:
        inv_log_q = 0.0
    indptr, indices = sample_rows(n_left, n_right, edge_prob, inv_log_q, rng)
    return BipartiteGraph(n_left=n_left, indptr=indptr, indices=indices)
