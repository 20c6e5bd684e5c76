"""Physical model and objectives for socially-aware spectrum access.

Users pick one channel each from their vacant sets. User ``n`` suffers the
co-channel interference ``P_m * d_mn**-alpha`` from every interference
neighbour ``m`` sharing its channel, plus the channel noise ``noise[n, c]``.
Utilities are negative received interference, so larger is better.

Power quantities are stored in a single unit chosen at construction time
(watts unless a generator is told otherwise); every formula here is linear in
power so the unit only rescales utilities.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .social import SocialGraph

COMPLETE = "complete"


class ScenarioError(ValueError):
    pass


def dbm_to_watts(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


@dataclass(frozen=True, eq=False)
class SpectrumScenario:
    """Positions in meters, per-user powers, per-(user, channel) noise and vacant sets.

    ``interference_range`` is a distance threshold in meters or ``"complete"``
    (every other user is an interference neighbour).
    """

    positions: np.ndarray
    powers: np.ndarray
    noise: np.ndarray
    vacant: tuple[tuple[int, ...], ...]
    alpha: float = 4.0
    interference_range: float | str = COMPLETE

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        powers = np.array(self.powers, dtype=float)
        noise = np.array(self.noise, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ScenarioError("positions must have shape (N, 2)")
        n = pos.shape[0]
        if powers.shape != (n,):
            raise ScenarioError("powers must have one entry per user")
        if noise.ndim != 2 or noise.shape[0] != n:
            raise ScenarioError("noise must have shape (N, M)")
        if np.any(powers <= 0) or np.any(noise <= 0) or not self.alpha > 0:
            raise ScenarioError("powers, noise and alpha must be positive")
        m = noise.shape[1]
        vacant = tuple(tuple(sorted({int(c) for c in v})) for v in self.vacant)
        if len(vacant) != n:
            raise ScenarioError("need one vacant set per user")
        for k, v in enumerate(vacant):
            if not v:
                raise ScenarioError(f"user {k} has no vacant channel")
            if v[0] < 0 or v[-1] >= m:
                raise ScenarioError(f"user {k} has a vacant channel outside 0..{m - 1}")
        rng = self.interference_range
        if rng != COMPLETE and not (isinstance(rng, (int, float)) and rng >= 0):
            raise ScenarioError(f"interference_range must be a distance or {COMPLETE!r}")

        dist = np.hypot(*(pos[:, None, :] - pos[None, :, :]).transpose(2, 0, 1))
        off = ~np.eye(n, dtype=bool)
        if np.any(dist[off] <= 0):
            raise ScenarioError("distinct users must have distinct positions")
        neighbours = off.copy() if rng == COMPLETE else off & (dist <= rng)
        with np.errstate(divide="ignore"):
            path = np.where(off, dist, 1.0) ** (-float(self.alpha))
        # gain[m, n]: interference user m puts on user n when co-channel
        gain = np.where(neighbours, powers[:, None] * path, 0.0)

        for name, value in (("positions", pos), ("powers", powers), ("noise", noise),
                            ("distances", dist), ("neighbour_mask", neighbours), ("gain", gain)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "vacant", vacant)
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def n_users(self) -> int:
        return self.positions.shape[0]

    @property
    def n_channels(self) -> int:
        return self.noise.shape[1]

    @property
    def state_space_size(self) -> int:
        return int(np.prod([len(v) for v in self.vacant], dtype=object))

    def profiles(self):
        """Iterate over every valid profile in lexicographic order."""
        return itertools.product(*self.vacant)

    def profile_array(self) -> np.ndarray:
        """All valid profiles as a ``(|states|, N)`` int array, lexicographic order."""
        grids = np.meshgrid(*[np.asarray(v) for v in self.vacant], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "positions": self.positions.tolist(),
            "powers": self.powers.tolist(),
            "noise": self.noise.tolist(),
            "vacant": [list(v) for v in self.vacant],
            "alpha": self.alpha,
            "interference_range": self.interference_range,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpectrumScenario":
        return cls(np.asarray(d["positions"]), np.asarray(d["powers"]), np.asarray(d["noise"]),
                   tuple(tuple(v) for v in d["vacant"]), d.get("alpha", 4.0),
                   d.get("interference_range", COMPLETE))


def random_scenario(n_users: int, n_channels: int, rng, side: float = 500.0,
                    power_dbm: float = 20.0, alpha: float = 4.0,
                    noise_dbm: tuple[float, float] = (-100.0, -90.0),
                    vacancy_prob: float = 1.0, interference_range: float | str = COMPLETE,
                    power_unit: float = 1.0) -> SpectrumScenario:
    """Users uniform in a ``side x side`` square, noise uniform in dBm per (user, channel).

    Each channel is vacant for a user independently with ``vacancy_prob``; a user
    left with nothing gets one channel uniformly at random. Powers are divided by
    ``power_unit`` (watts per unit), so ``power_unit=1e-12`` expresses everything
    in picowatts.
    """
    rng = np.random.default_rng(rng)
    positions = rng.uniform(0.0, side, size=(n_users, 2))
    noise = dbm_to_watts(rng.uniform(noise_dbm[0], noise_dbm[1], size=(n_users, n_channels)))
    vacant = []
    for _ in range(n_users):
        mask = rng.random(n_channels) < vacancy_prob
        if not mask.any():
            mask[rng.integers(n_channels)] = True
        vacant.append(tuple(np.flatnonzero(mask).tolist()))
    powers = np.full(n_users, float(dbm_to_watts(power_dbm)))
    return SpectrumScenario(positions, powers / power_unit, noise / power_unit, tuple(vacant),
                            alpha, interference_range)


def validate_profile(s: SpectrumScenario, a: Sequence[int]) -> tuple[int, ...]:
    a = tuple(int(c) for c in a)
    if len(a) != s.n_users:
        raise ScenarioError(f"profile has {len(a)} entries for {s.n_users} users")
    for n, c in enumerate(a):
        if c not in s.vacant[n]:
            raise ScenarioError(f"channel {c} is not vacant for user {n}")
    return a


def interference_neighbors(s: SpectrumScenario, n: int) -> set[int]:
    return set(np.flatnonzero(s.neighbour_mask[n]).tolist())


def physical_social_neighbors(s: SpectrumScenario, g: SocialGraph, n: int) -> set[int]:
    """Interference neighbours of ``n`` that are also in its social group."""
    return interference_neighbors(s, n) & g.social_group(n)


def received_interference(s: SpectrumScenario, a: Sequence[int], n: int) -> float:
    a = np.asarray(a)
    return float(s.gain[:, n] @ (a == a[n]) + s.noise[n, a[n]])


def individual_utility(s: SpectrumScenario, a: Sequence[int], n: int) -> float:
    return -received_interference(s, a, n)


def utilities(s: SpectrumScenario, a) -> np.ndarray:
    """Individual utilities for one profile ``(N,)`` or a batch ``(K, N)``."""
    a = np.asarray(a)
    same = a[..., :, None] == a[..., None, :]
    # interference[k, n] = sum_m gain[m, n] * same[k, m, n]
    interference = np.einsum("mn,...mn->...n", s.gain, same)
    noise = np.take_along_axis(np.broadcast_to(s.noise, a.shape[:-1] + s.noise.shape),
                               a[..., :, None], axis=-1)[..., 0]
    return -(interference + noise)


def social_utilities(s: SpectrumScenario, g: SocialGraph, a) -> np.ndarray:
    """S_n = U_n + sum_m w_nm U_m for every user (batched like :func:`utilities`)."""
    u = utilities(s, a)
    return u + u @ g.matrix().T


def social_group_utility(s: SpectrumScenario, g: SocialGraph, a, n: int) -> float:
    u = utilities(s, a)
    return float(u[n] + g.matrix()[n] @ u)


def welfare(s: SpectrumScenario, a) -> np.ndarray | float:
    v = utilities(s, a).sum(axis=-1)
    return float(v) if np.ndim(v) == 0 else v


def potential_coefficients(s: SpectrumScenario, g: SocialGraph) -> np.ndarray:
    """Pair coefficients ``B`` with potential = -sum_{m,n} B[m, n] [a_m == a_n] - noise.

    ``B[m, n] = (1 + w_nm) * gain[m, n] / 2``; the tie counts only where ``m`` is an
    interference neighbour of ``n`` because ``gain`` vanishes elsewhere.
    """
    return 0.5 * (1.0 + g.matrix().T) * s.gain


def potential_decomposition(s: SpectrumScenario, g: SocialGraph, a):
    """Physical and social parts of the potential; batched like :func:`utilities`."""
    a = np.asarray(a)
    same = a[..., :, None] == a[..., None, :]
    noise = np.take_along_axis(np.broadcast_to(s.noise, a.shape[:-1] + s.noise.shape),
                               a[..., :, None], axis=-1)[..., 0].sum(axis=-1)
    physical = -0.5 * np.einsum("mn,...mn->...", s.gain, same) - noise
    social = -0.5 * np.einsum("mn,...mn->...", g.matrix().T * s.gain, same)
    return physical, social


def potential(s: SpectrumScenario, g: SocialGraph, a):
    physical, social = potential_decomposition(s, g, a)
    phi = physical + social
    return float(phi) if np.ndim(phi) == 0 else phi


def deviation_deltas(s: SpectrumScenario, g: SocialGraph, a, n: int, target):
    """Change of ``S_n`` and of the potential when user ``n`` moves to ``target``.

    Built only from the terms the move touches, so small changes keep full
    relative precision even when the totals are large. ``a`` may be one profile
    or a batch ``(K, N)``; ``target`` broadcasts against the batch.
    """
    a = np.asarray(a)
    target = np.broadcast_to(np.asarray(target), a.shape[:-1])
    old = a[..., n]
    # +1 for users joining n's new channel, -1 for users it leaves
    shift = (a == target[..., None]).astype(float) - (a == old[..., None])
    shift[..., n] = 0.0
    d_noise = s.noise[n, target] - s.noise[n, old]
    w = g.matrix()
    d_own = -(shift @ s.gain[:, n]) - d_noise
    d_others = -shift * s.gain[n]
    d_social = d_own + d_others @ w[n]
    b = potential_coefficients(s, g)
    d_phi = -(shift @ (b[:, n] + b[n])) - d_noise
    return d_social, d_phi


def potential_game_violations(s: SpectrumScenario, g: SocialGraph, rtol: float = 1e-12) -> list[str]:
    """Reasons the potential-game identity is not guaranteed; empty when it is.

    The identity needs equal powers, symmetric ties and a symmetric interference
    relation.
    """
    problems = []
    if g.n_users != s.n_users:
        problems.append("social graph and scenario have different user counts")
        return problems
    if not np.allclose(s.powers, s.powers[0], rtol=rtol, atol=0.0):
        problems.append("transmit powers differ")
    if not g.is_symmetric():
        problems.append("social ties are not symmetric")
    if not np.array_equal(s.neighbour_mask, s.neighbour_mask.T):
        problems.append("interference relation is not symmetric")
    return problems
