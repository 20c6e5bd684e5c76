"""Socially-aware power control with logarithmic SINR utilities.

User ``i`` is a link from transmitter ``T_i`` to receiver ``R_i``. ``h[i]`` is
the direct gain, ``g[i, j]`` the gain from ``T_i`` to ``R_j`` and ``noise[i]``
the noise at ``R_i``. Utility is ``ln(SINR_i) - cost_i * p_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .social import SocialGraph


class PowerError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PowerScenario:
    h: np.ndarray
    g: np.ndarray
    noise: np.ndarray
    cost: np.ndarray
    ties: SocialGraph = None
    p_max: float | None = None

    def __post_init__(self):
        h = np.array(self.h, dtype=float)
        g = np.array(self.g, dtype=float)
        noise = np.array(self.noise, dtype=float)
        cost = np.array(self.cost, dtype=float)
        n = h.shape[0]
        if h.shape != (n,) or g.shape != (n, n) or noise.shape != (n,) or cost.shape != (n,):
            raise PowerError("h, noise, cost need shape (N,) and g shape (N, N)")
        if np.any(h <= 0) or np.any(noise <= 0) or np.any(cost <= 0):
            raise PowerError("direct gains, noise and costs must be positive")
        np.fill_diagonal(g, 0.0)
        if np.any(g < 0):
            raise PowerError("cross gains must be nonnegative")
        ties = SocialGraph.empty(n) if self.ties is None else self.ties
        if ties.n_users != n:
            raise PowerError("social graph size does not match the scenario")
        if any(w < 0 for w in ties.ties.values()):
            raise PowerError("negative ties are not supported in power control")
        if self.p_max is not None and not self.p_max > 0:
            raise PowerError("p_max must be positive")
        for name, value in (("h", h), ("g", g), ("noise", noise), ("cost", cost)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "ties", ties)

    @property
    def n_users(self) -> int:
        return self.h.shape[0]

    def with_ties(self, ties: SocialGraph) -> "PowerScenario":
        return PowerScenario(self.h, self.g, self.noise, self.cost, ties, self.p_max)

    def to_dict(self) -> dict:
        return {"h": self.h.tolist(), "g": self.g.tolist(), "noise": self.noise.tolist(),
                "cost": self.cost.tolist(), "ties": self.ties.dumps(), "p_max": self.p_max}


def random_power_scenario(n_users: int, rng, ties: SocialGraph | None = None,
                          side: float = 500.0, alpha: float = 3.0, ref_distance: float = 100.0,
                          noise: float = 0.1, cost: float = 1.0) -> PowerScenario:
    """Transmitters and receivers uniform in a square; gains ``(d / ref_distance) ** -alpha``.

    Powers are measured in units of the nominal 1 W link power, so ``noise`` and
    ``cost`` are per that unit.
    """
    rng = np.random.default_rng(rng)
    tx = rng.uniform(0.0, side, size=(n_users, 2))
    rx = rng.uniform(0.0, side, size=(n_users, 2))
    d = np.hypot(*(tx[:, None, :] - rx[None, :, :]).transpose(2, 0, 1))
    d = np.maximum(d, 1e-3)
    gain = (d / ref_distance) ** (-alpha)
    return PowerScenario(np.diag(gain).copy(), gain, np.full(n_users, noise),
                         np.full(n_users, cost), ties)


def _interference(sc: PowerScenario, p: np.ndarray) -> np.ndarray:
    """``noise_k + sum_{j != k} g[j, k] p_j`` for every receiver ``k``."""
    return sc.noise + p @ sc.g


def sinr(sc: PowerScenario, p, i: int) -> float:
    p = np.asarray(p, dtype=float)
    return float(sc.h[i] * p[i] / _interference(sc, p)[i])


def power_utility(sc: PowerScenario, p, i: int) -> float:
    p = np.asarray(p, dtype=float)
    if not p[i] > 0:
        raise PowerError(f"utility undefined at p[{i}] = {p[i]}")
    return math.log(sinr(sc, p, i)) - sc.cost[i] * p[i]


def utilities(sc: PowerScenario, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0):
        raise PowerError("utility undefined at nonpositive power")
    return np.log(sc.h * p / _interference(sc, p)) - sc.cost * p


def social_utility(sc: PowerScenario, p, i: int) -> float:
    u = utilities(sc, p)
    return float(u[i] + sc.ties.matrix()[i] @ u)


def welfare(sc: PowerScenario, p) -> float:
    return math.fsum(utilities(sc, p))


def _positive_root(alpha: float, beta: float) -> float:
    """Positive root of ``p**2 + 2 alpha p - beta`` for ``beta > 0``, without cancellation."""
    r = math.sqrt(alpha * alpha + beta)
    return beta / (r + alpha) if alpha > 0 else r - alpha


def two_user_sne(sc: PowerScenario) -> np.ndarray:
    """Closed-form equilibrium of the two-user game.

    Each power solves ``1/p - w g/(n' + g p) - c = 0``, where ``g`` is the gain
    to the other receiver and ``n'`` its noise. A zero cross gain decouples the
    user, and so does a zero tie: the condition becomes ``1/p = c``.
    """
    if sc.n_users != 2:
        raise PowerError("closed form needs exactly two users")
    w = sc.ties.matrix()
    out = np.empty(2)
    for i, k in ((0, 1), (1, 0)):
        c, gik, nk = sc.cost[i], sc.g[i, k], sc.noise[k]
        if gik == 0 or w[i, k] == 0:
            out[i] = 1.0 / c
            continue
        alpha = (w[i, k] * gik + c * nk - gik) / (2 * c * gik)
        beta = nk / (c * gik)
        out[i] = _positive_root(alpha, beta)
    return out


def social_optimal_power(sc: PowerScenario, i: int) -> float:
    """Welfare-maximizing power of user ``i`` in the two-user game.

    Positive root of ``c g p**2 + c n p - n = 0``; equals ``1/c`` when ``g = 0``.
    """
    if sc.n_users != 2:
        raise PowerError("closed form needs exactly two users")
    k = 1 - i
    c, gik, nk = sc.cost[i], sc.g[i, k], sc.noise[k]
    return 2 * nk / (c * nk + math.sqrt(c * c * nk * nk + 4 * c * gik * nk))


def foc(sc: PowerScenario, p, i: int, x: float) -> float:
    """Derivative of user ``i``'s social utility in its own power, at ``p_i = x``."""
    p = np.array(p, dtype=float)
    p[i] = x
    d = _interference(sc, p)
    w = sc.ties.matrix()[i]
    mask = np.arange(sc.n_users) != i
    return 1.0 / x - float(np.sum((w * sc.g[i] / d)[mask])) - sc.cost[i]


def best_response(sc: PowerScenario, p, i: int, xtol: float = 1e-13) -> float:
    """Unique maximizer of user ``i``'s social utility given the others' powers.

    ``x * foc(x) = 1 - c x - sum_k w g x / (D_k + g x)`` is strictly decreasing,
    positive at 0 and nonpositive at ``1/c``, so the root lies in ``(0, 1/c]``.
    """
    p = np.asarray(p, dtype=float)
    c = sc.cost[i]
    hi = 1.0 / c
    w = sc.ties.matrix()[i]
    if not np.any(w * sc.g[i] > 0):
        root = hi
    else:
        rest = p.copy()
        rest[i] = 0.0
        base = _interference(sc, rest)
        coef = w * sc.g[i]
        coef[i] = 0.0

        def scaled(x):
            return 1.0 - c * x - float(np.sum(coef * x / (base + sc.g[i] * x)))

        root = hi if scaled(hi) >= 0 else brentq(scaled, 0.0, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)
    return min(root, sc.p_max) if sc.p_max is not None else root


@dataclass
class IterationResult:
    profile: np.ndarray
    converged: bool
    rounds: int
    trajectory: list = field(default_factory=list)


def solve_sne_iterative(sc: PowerScenario, tol: float = 1e-10, max_rounds: int = 1000) -> IterationResult:
    """Round-robin best responses from the all-zero profile.

    ``rounds`` counts sweeps that moved some coordinate by at least ``tol``;
    ``trajectory`` holds the profile after every sweep.
    """
    if not tol > 0:
        raise PowerError("tol must be positive")
    p = np.zeros(sc.n_users)
    trajectory = [p.copy()]
    for sweep in range(max_rounds):
        change = 0.0
        for i in range(sc.n_users):
            new = best_response(sc, p, i)
            change = max(change, abs(new - p[i]))
            p[i] = new
        trajectory.append(p.copy())
        if change < tol:
            return IterationResult(p, True, sweep, trajectory)
    return IterationResult(p, False, max_rounds, trajectory)


def cross_partial(sc: PowerScenario, p, i: int, j: int) -> float:
    """Exact mixed derivative of user ``i``'s social utility in ``(p_i, p_j)``."""
    p = np.asarray(p, dtype=float)
    d = _interference(sc, p)
    w = sc.ties.matrix()[i]
    k = np.array([k for k in range(sc.n_users) if k not in (i, j)], dtype=int)
    if k.size == 0:
        return 0.0
    return float(np.sum(w[k] * sc.g[i, k] * sc.g[j, k] / d[k] ** 2))


def cross_partial_fd(sc: PowerScenario, p, i: int, j: int, rel_step: float = 1e-3) -> float:
    """Central mixed finite difference of user ``i``'s social utility."""
    p = np.asarray(p, dtype=float)
    hi_, hj = rel_step * p[i], rel_step * p[j]

    def s(di, dj):
        q = p.copy()
        q[i] += di
        q[j] += dj
        return social_utility(sc, q, i)

    return (s(hi_, hj) - s(hi_, -hj) - s(-hi_, hj) + s(-hi_, -hj)) / (4 * hi_ * hj)


def max_deviation_gain(sc: PowerScenario, p, i: int, n_grid: int = 401) -> float:
    """Largest gain user ``i`` finds on a grid of unilateral deviations.

    The grid covers ``(0, 1/c_i]`` coarsely and a +-50% window around ``p_i``
    finely.
    """
    p = np.asarray(p, dtype=float)
    base = social_utility(sc, p, i)
    coarse = np.linspace(0.0, 1.0 / sc.cost[i], n_grid)[1:]
    fine = p[i] * (1.0 + np.linspace(-0.5, 0.5, n_grid))
    best = -math.inf
    for x in np.concatenate([coarse, fine]):
        q = p.copy()
        q[i] = x
        best = max(best, social_utility(sc, q, i) - base)
    return best


def social_optimum_numeric(sc: PowerScenario, tol: float = 1e-10, max_rounds: int = 1000) -> IterationResult:
    """Heuristic welfare maximizer: coordinate ascent on the sum of utilities.

    With every tie set to 1 each user's social utility is the welfare, so
    best-response sweeps are exact coordinate maximizations. The result is a
    stationary point, not a certified global optimum.
    """
    return solve_sne_iterative(sc.with_ties(SocialGraph.complete(sc.n_users)), tol, max_rounds)
