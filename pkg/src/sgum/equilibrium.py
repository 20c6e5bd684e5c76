"""Exhaustive equilibrium oracles and optimality gaps for spectrum access."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .glauber import ChainConfig, random_profile, simulate
from .markov import ENUMERATION_CAP, ExactChain, _check_cap, exact_chain
from .social import SocialGraph
from .spectrum import (SpectrumScenario, potential, social_utilities, utilities,
                       validate_profile, welfare)


def _tolerance(u: np.ndarray, atol: float | None, rtol: float) -> float:
    if atol is not None:
        return atol
    return rtol * float(np.max(np.abs(u)))


def is_sne(s: SpectrumScenario, g: SocialGraph, a, atol: float | None = None,
           rtol: float = 1e-6) -> bool:
    """True when no user can raise its social group utility by switching channel alone.

    A deviation counts as improving only if it beats the current value by more
    than the tolerance: ``atol`` when given, otherwise ``rtol`` times the
    largest individual utility magnitude at ``a``.
    """
    a = np.array(validate_profile(s, a))
    tol = _tolerance(utilities(s, a), atol, rtol)
    base = social_utilities(s, g, a)
    for n, channels in enumerate(s.vacant):
        trial = np.repeat(a[None, :], len(channels), axis=0)
        trial[:, n] = channels
        if np.any(social_utilities(s, g, trial)[:, n] > base[n] + tol):
            return False
    return True


@dataclass(frozen=True)
class Optima:
    argmax_phi: tuple[int, ...]
    phi_star: float
    argmax_welfare: tuple[int, ...]
    v_bar: float
    phi_min: float


def brute_force_optima(s: SpectrumScenario, g: SocialGraph, cap: int = ENUMERATION_CAP) -> Optima:
    """Maximize the potential and the welfare over every profile.

    Ties go to the lexicographically smallest profile, which is the first in
    enumeration order.
    """
    _check_cap(s, cap)
    states = s.profile_array()
    phi = np.atleast_1d(potential(s, g, states))
    v = np.atleast_1d(welfare(s, states))
    i, k = int(np.argmax(phi)), int(np.argmax(v))
    return Optima(tuple(states[i].tolist()), float(phi[i]), tuple(states[k].tolist()),
                  float(v[k]), float(phi.min()))


def expected_potential(chain: ExactChain) -> float:
    return float(chain.stationary @ chain.phi)


def expected_welfare(chain: ExactChain) -> float:
    return float(chain.stationary @ chain.welfare)


def structural_gap(s: SpectrumScenario, g: SocialGraph) -> float:
    """Interference that the welfare gap bound charges for incomplete or weak ties.

    Half the interference over physical neighbours weighted by ``1 - w_nm``;
    pairs without a tie carry their full weight.
    """
    w = g.matrix()
    # gain[m, n] is what m puts on n; the tie that matters is w[n, m]
    return 0.5 * float(np.sum(s.gain * (1.0 - w.T)))


@dataclass(frozen=True)
class GapReport:
    theta: float
    phi_star: float
    phi_theta: float
    phi_gap: float
    potential_gap_bound: float
    v_bar: float
    v_theta: float
    rho_theta: float
    welfare_gap_bound: float
    rho_sne: float

    @property
    def potential_bound_ok(self) -> bool:
        return 0.0 <= self.phi_gap <= self.potential_gap_bound

    @property
    def welfare_bound_ok(self) -> bool:
        return self.rho_theta <= self.welfare_gap_bound

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["potential_bound_ok"] = self.potential_bound_ok
        d["welfare_bound_ok"] = self.welfare_bound_ok
        return d


def gap_report(s: SpectrumScenario, g: SocialGraph, theta: float,
               cap: int = ENUMERATION_CAP) -> GapReport:
    """Potential loss and welfare loss of the stationary law at ``theta``, with their bounds.

    ``rho_sne`` is the welfare loss of the potential maximizer (the zero
    temperature limit).
    """
    if not theta > 0:
        raise ValueError("theta must be positive")
    opt = brute_force_optima(s, g, cap)
    chain = exact_chain(s, g, theta, cap=cap)
    entropy = math.fsum(math.log(len(v)) for v in s.vacant)
    # gaps as sums of nonnegative terms, so rounding cannot make them negative
    phi_gap = float(chain.stationary @ (opt.phi_star - chain.phi))
    rho = float(chain.stationary @ (opt.v_bar - chain.welfare))
    return GapReport(
        theta=float(theta),
        phi_star=opt.phi_star,
        phi_theta=opt.phi_star - phi_gap,
        phi_gap=phi_gap,
        potential_gap_bound=entropy / theta,
        v_bar=opt.v_bar,
        v_theta=opt.v_bar - rho,
        rho_theta=rho,
        welfare_gap_bound=entropy / theta + structural_gap(s, g),
        rho_sne=opt.v_bar - welfare(s, opt.argmax_phi),
    )


@dataclass(frozen=True)
class Benchmarks:
    ncg_sne: tuple[int, ...]
    sgum_sne: tuple[int, ...]
    num_opt: tuple[int, ...]
    approximate: bool = False


def _search_by_chain(s: SpectrumScenario, g: SocialGraph, seed, events: int) -> tuple[int, ...]:
    # low temperature relative to the typical interference scale
    scale = float(np.mean(np.concatenate([s.gain[s.gain > 0], s.noise.ravel()])))
    cfg = ChainConfig(theta=50.0 / scale, seed=seed, max_events=events)
    rng = np.random.default_rng(seed)
    trace = simulate(s, g, cfg, a0=random_profile(s, rng))
    if trace.n_events == 0 or trace.final_phi >= trace.phi.max():
        return trace.final
    best = int(np.argmax(trace.phi))
    return tuple(trace.profiles()[best].tolist())


def benchmark_profiles(s: SpectrumScenario, g: SocialGraph, cap: int = ENUMERATION_CAP,
                       events: int = 200_000, seed=0) -> Benchmarks:
    """Non-cooperative equilibrium, socially-aware equilibrium and welfare optimum.

    The two equilibria maximize the potential with no ties and with ``g``.
    Beyond ``cap`` each profile is the best one visited by a cold chain run and
    the result is flagged approximate.
    """
    empty = SocialGraph.empty(s.n_users)
    if s.state_space_size <= cap:
        social = brute_force_optima(s, g, cap)
        return Benchmarks(brute_force_optima(s, empty, cap).argmax_phi,
                          social.argmax_phi, social.argmax_welfare)
    warnings.warn(f"{s.state_space_size} profiles exceed the cap {cap}; using chain search",
                  RuntimeWarning, stacklevel=2)
    full = SocialGraph.complete(s.n_users)
    return Benchmarks(_search_by_chain(s, empty, seed, events),
                      _search_by_chain(s, g, seed, events),
                      _search_by_chain(s, full, seed, events), approximate=True)
