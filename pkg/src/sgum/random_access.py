"""Socially-aware random access on a slotted contention channel.

Link ``i`` contends with probability ``q_i`` and succeeds when none of the
transmitters interfering at its receiver (``in_sets[i]``) contends. Utility is
``ln(z_i * b_i) - c_i * q_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .social import STANDARD, SocialGraph


class AccessError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RandomAccessScenario:
    """``out_sets[i]``: receivers that transmitter ``i`` disturbs. ``in_sets`` is derived."""

    out_sets: tuple[frozenset, ...]
    z: np.ndarray
    cost: np.ndarray
    ties: SocialGraph = None

    def __post_init__(self):
        n = len(self.out_sets)
        out = tuple(frozenset(int(j) for j in s) for s in self.out_sets)
        for i, s in enumerate(out):
            if i in s:
                raise AccessError(f"link {i} listed as interfering with itself")
            if any(not 0 <= j < n for j in s):
                raise AccessError(f"link {i} interferes with an unknown receiver")
        z = np.array(self.z, dtype=float)
        cost = np.array(self.cost, dtype=float)
        if z.shape != (n,) or cost.shape != (n,):
            raise AccessError("z and cost need one entry per link")
        if np.any(z <= 0) or np.any(cost <= 0):
            raise AccessError("z and cost must be positive")
        ties = SocialGraph.empty(n) if self.ties is None else self.ties
        if ties.n_users != n:
            raise AccessError("social graph size does not match the scenario")
        if ties.mode != STANDARD:
            raise AccessError("random access supports standard-mode ties only")
        z.setflags(write=False)
        cost.setflags(write=False)
        inn = tuple(frozenset(j for j in range(n) if i in out[j]) for i in range(n))
        object.__setattr__(self, "out_sets", out)
        object.__setattr__(self, "in_sets", inn)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "ties", ties)

    @classmethod
    def from_in_sets(cls, in_sets, z, cost, ties=None) -> "RandomAccessScenario":
        n = len(in_sets)
        out = [set() for _ in range(n)]
        for i, s in enumerate(in_sets):
            for j in s:
                out[int(j)].add(i)
        return cls(tuple(out), z, cost, ties)

    @property
    def n_users(self) -> int:
        return len(self.out_sets)

    def consistent(self) -> bool:
        return all((j in self.out_sets[i]) == (i in self.in_sets[j])
                   for i in range(self.n_users) for j in range(self.n_users))

    def with_ties(self, ties: SocialGraph) -> "RandomAccessScenario":
        return RandomAccessScenario(self.out_sets, self.z, self.cost, ties)


def geometric_scenario(n_users: int, rng, ties: SocialGraph | None = None, side: float = 500.0,
                       reach: float = 100.0, z: float = 1.0, cost: float = 1.0) -> RandomAccessScenario:
    """Transmitters and receivers uniform in a square; ``T_i`` disturbs ``R_j`` within ``reach``."""
    rng = np.random.default_rng(rng)
    tx = rng.uniform(0.0, side, size=(n_users, 2))
    rx = rng.uniform(0.0, side, size=(n_users, 2))
    d = np.hypot(*(tx[:, None, :] - rx[None, :, :]).transpose(2, 0, 1))
    out = tuple(frozenset(j for j in range(n_users) if j != i and d[i, j] <= reach)
                for i in range(n_users))
    return RandomAccessScenario(out, np.full(n_users, z), np.full(n_users, cost), ties)


def success_probability(sc: RandomAccessScenario, q, i: int) -> float:
    q = np.asarray(q, dtype=float)
    return float(q[i] * np.prod([1.0 - q[j] for j in sorted(sc.in_sets[i])]))


def access_utility(sc: RandomAccessScenario, q, i: int) -> float:
    b = success_probability(sc, q, i)
    if not b > 0:
        raise AccessError(f"link {i} never succeeds; utility is undefined")
    return math.log(sc.z[i] * b) - sc.cost[i] * float(np.asarray(q)[i])


def access_utilities(sc: RandomAccessScenario, q) -> np.ndarray:
    return np.array([access_utility(sc, q, i) for i in range(sc.n_users)])


def social_access_utility(sc: RandomAccessScenario, q, i: int) -> float:
    """Own utility plus tie-weighted utilities of the links ``i`` holds ties to."""
    total = access_utility(sc, q, i)
    for j in sorted(sc.ties.social_group(i)):
        total += sc.ties.weight(i, j) * access_utility(sc, q, j)
    return total


def smaller_root(weight: float, c: float) -> float:
    """Smaller root of ``c q**2 - (weight + 1 + c) q + 1``, capped at 1.

    Written as ``2 / (B + sqrt(disc))`` with ``disc = (weight + 1 - c)**2 + 4 c weight``,
    which avoids cancellation. For ``weight = 0`` this is ``min(1, 1/c)``.
    """
    if c <= 0 or weight < 0:
        raise AccessError("need c > 0 and a nonnegative weight")
    if weight == 0:
        return min(1.0, 1.0 / c)
    b = weight + 1.0 + c
    disc = (weight + 1.0 - c) ** 2 + 4.0 * c * weight
    return min(1.0, 2.0 / (b + math.sqrt(disc)))


def tie_load(sc: RandomAccessScenario, i: int) -> float:
    """Sum of ``w_ij`` over the receivers ``j`` that link ``i`` disturbs."""
    return math.fsum(sc.ties.weight(i, j) for j in sorted(sc.out_sets[i]))


def sne_access_probability(sc: RandomAccessScenario, i: int) -> float:
    """Equilibrium contention probability; depends only on link ``i``'s own data."""
    return smaller_root(tie_load(sc, i), float(sc.cost[i]))


def social_optimal_access(sc: RandomAccessScenario, i: int) -> float:
    return smaller_root(float(len(sc.out_sets[i])), float(sc.cost[i]))


def sne_profile(sc: RandomAccessScenario) -> np.ndarray:
    return np.array([sne_access_probability(sc, i) for i in range(sc.n_users)])


def social_optimal_profile(sc: RandomAccessScenario) -> np.ndarray:
    return np.array([social_optimal_access(sc, i) for i in range(sc.n_users)])


def root_residual(sc: RandomAccessScenario, i: int) -> float:
    q = sne_access_probability(sc, i)
    c = float(sc.cost[i])
    return c * q * q - (tie_load(sc, i) + 1.0 + c) * q + 1.0


def access_welfare(sc: RandomAccessScenario, q, strict: bool = True) -> float:
    """Sum of utilities. With ``strict=False`` a link that never succeeds gives ``-inf``."""
    q = np.asarray(q, dtype=float)
    total = 0.0
    for i in range(sc.n_users):
        b = success_probability(sc, q, i)
        if not b > 0:
            if strict:
                raise AccessError(f"link {i} never succeeds; welfare is undefined")
            return -math.inf
        total += math.log(sc.z[i] * b) - sc.cost[i] * q[i]
    return total
