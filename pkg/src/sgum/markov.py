"""Exact analysis of the spectrum access chain on enumerable state spaces."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.special
import scipy.sparse as sp

from .social import SocialGraph
from .spectrum import SpectrumScenario, deviation_deltas, potential, welfare

ENUMERATION_CAP = 10**6
DENSE_CAP = 4096


class CapacityError(RuntimeError):
    """State space too large for the requested exact computation."""


def _check_cap(s: SpectrumScenario, cap: int) -> int:
    size = s.state_space_size
    if size > cap:
        raise CapacityError(f"state space has {size} profiles, cap is {cap}")
    return size


def gibbs(values: np.ndarray, theta: float) -> np.ndarray:
    """Normalized ``exp(theta * values)`` computed without overflow."""
    logits = theta * np.asarray(values, dtype=float)
    logits -= logits.max()
    w = np.exp(logits)
    return w / w.sum()


def stationary_distribution(s: SpectrumScenario, g: SocialGraph, theta: float,
                            cap: int = ENUMERATION_CAP) -> np.ndarray:
    """Gibbs law over all profiles (lexicographic order) at inverse temperature ``theta``."""
    _check_cap(s, cap)
    return gibbs(potential(s, g, s.profile_array()), theta)


@dataclass(eq=False)
class ExactChain:
    states: np.ndarray
    generator: sp.csr_matrix
    stationary: np.ndarray
    phi: np.ndarray
    welfare: np.ndarray
    theta: float
    tau: np.ndarray
    strides: np.ndarray
    vacant: tuple

    @property
    def n_states(self) -> int:
        return self.states.shape[0]

    def index(self, profile) -> int:
        pos = [self.vacant[n].index(int(c)) for n, c in enumerate(profile)]
        return int(np.dot(pos, self.strides))

    def dense_generator(self) -> np.ndarray:
        if self.n_states > DENSE_CAP:
            raise CapacityError(f"{self.n_states} states exceed the dense cap {DENSE_CAP}")
        return self.generator.toarray()


def exact_chain(s: SpectrumScenario, g: SocialGraph, theta: float, tau=1.0,
                cap: int = ENUMERATION_CAP) -> ExactChain:
    """Enumerate the profiles and build the transition-rate matrix.

    A move of user ``n`` to another vacant channel happens at rate
    ``tau_n / |M_n| * exp(theta * min(0, dS_n))``; every other off-diagonal rate
    is zero. Rows sum to zero.
    """
    n_states = _check_cap(s, cap)
    n = s.n_users
    tau = np.broadcast_to(np.asarray(tau, dtype=float), (n,)).copy()
    if np.any(tau <= 0):
        raise ValueError("update rates must be positive")
    states = s.profile_array()
    sizes = np.array([len(v) for v in s.vacant])
    strides = np.ones(n, dtype=np.int64)
    for k in range(n - 2, -1, -1):
        strides[k] = strides[k + 1] * sizes[k + 1]
    positions = np.stack([np.searchsorted(np.asarray(s.vacant[k]), states[:, k]) for k in range(n)], 1)
    idx = np.arange(n_states)

    rows, cols, vals = [], [], []
    for user in range(n):
        for target_pos in range(sizes[user]):
            move = positions[:, user] != target_pos
            src = idx[move]
            dst = src + (target_pos - positions[move, user]) * strides[user]
            gain, _ = deviation_deltas(s, g, states[src], user, s.vacant[user][target_pos])
            rate = tau[user] / sizes[user] * np.exp(theta * np.minimum(gain, 0.0))
            rows.append(src)
            cols.append(dst)
            vals.append(rate)
    rows = np.concatenate(rows) if rows else np.empty(0, np.int64)
    cols = np.concatenate(cols) if cols else np.empty(0, np.int64)
    vals = np.concatenate(vals) if vals else np.empty(0)
    off = sp.csr_matrix((vals, (rows, cols)), shape=(n_states, n_states))
    exit_rate = np.asarray(off.sum(axis=1)).ravel()
    q = (off - sp.diags(exit_rate)).tocsr()

    phi = potential(s, g, states)
    return ExactChain(states=states, generator=q, stationary=gibbs(phi, theta), phi=np.atleast_1d(phi),
                      welfare=np.atleast_1d(welfare(s, states)), theta=float(theta), tau=tau,
                      strides=strides, vacant=s.vacant)


def detailed_balance_residual(chain: ExactChain) -> float:
    """Largest ``|pi_a q_ab - pi_b q_ba| / max(pi_a q_ab, pi_b q_ba)`` over state pairs."""
    flow = sp.diags(chain.stationary) @ chain.generator
    flow = flow.tocsr()
    flow.setdiag(0.0)
    flow.eliminate_zeros()
    fwd = flow.tocoo()
    back = np.asarray(flow.T.tocsr()[fwd.row, fwd.col]).ravel()
    scale = np.maximum(np.abs(fwd.data), np.abs(back))
    nonzero = scale > 0
    if not nonzero.any():
        return 0.0
    return float(np.max(np.abs(fwd.data - back)[nonzero] / scale[nonzero]))


def stationarity_residual(chain: ExactChain) -> float:
    """Infinity norm of ``pi^T Q``."""
    return float(np.max(np.abs(chain.generator.T @ chain.stationary)))


def generator_norm(chain: ExactChain) -> float:
    """Infinity norm (max absolute row sum) of the generator."""
    return float(np.max(np.asarray(abs(chain.generator).sum(axis=1)).ravel()))


def tv_distance(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


@dataclass(frozen=True)
class MixingBounds:
    general_bound: float
    coupled_bound: float | None
    theta_th: float
    coupling_rate: float
    phi_range: float


def mixing_bounds(s: SpectrumScenario, g: SocialGraph, theta: float, tau=1.0,
                  epsilon: float = 0.01, phi_extremes: tuple[float, float] | None = None,
                  cap: int = ENUMERATION_CAP) -> MixingBounds:
    """Closed-form mixing-time upper bounds for the chain.

    ``general_bound`` holds for every ``theta``. ``coupled_bound`` is the
    tighter path-coupling bound, reported only below the threshold
    ``theta_th`` (equivalently while ``coupling_rate`` is positive).
    ``phi_extremes`` = (max, min) of the potential; enumerated when omitted.
    """
    if not 0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    if phi_extremes is None:
        _check_cap(s, cap)
        phi = np.atleast_1d(potential(s, g, s.profile_array()))
        phi_extremes = (float(phi.max()), float(phi.min()))
    spread = phi_extremes[0] - phi_extremes[1]
    n = s.n_users
    tau = np.broadcast_to(np.asarray(tau, dtype=float), (n,))
    sizes = [len(v) for v in s.vacant]
    m_max, m_min = max(sizes), min(sizes)
    t_max, t_min = float(tau.max()), float(tau.min())

    log_general = (math.log(n * m_max ** (2 * n + 3) * t_max / (m_min * t_min**2))
                   + 4 * theta * spread
                   + math.log(2 * math.log(1 / (2 * epsilon)) + n * math.log(m_max) + theta * spread))
    general = math.exp(log_general) if log_general < 709.0 else math.inf

    base = m_min**2 * t_min / (m_max * t_max)
    if n == 1:
        theta_th = math.inf
    else:
        ratio = n * base / (n - 1)
        # a flat potential never leaves the coupled regime; whether coupling
        # contracts at all is then decided by the rate alone
        theta_th = math.log(ratio) / spread if spread > 0 else math.inf
    rate = base * math.exp(-theta * spread) + (1 - n) / n
    coupled = None
    if rate > 0 and theta < theta_th:
        growth = math.exp(theta * spread)
        coupled = (math.log(n / epsilon) * m_min / (m_max * t_max)
                   * growth / (base + (1 - n) / n * growth))
    return MixingBounds(general, coupled, theta_th, rate, spread)


@dataclass(frozen=True)
class SpectralCheck:
    xi: float
    lambda2: float
    flow_bound: float
    cheeger_ok: bool
    transition: np.ndarray


def uniformization_rate(chain: ExactChain) -> float:
    sizes = [len(v) for v in chain.vacant]
    return max(sizes) * float(chain.tau.max()) / min(sizes) * len(sizes)


def spectral_check(chain: ExactChain) -> SpectralCheck:
    """Uniformize, find the second-largest eigenvalue and test the Cheeger-type inequality.

    ``flow_bound`` is the smallest stationary edge flow ``pi_a q_ab / xi`` over
    allowed transitions, which lower-bounds the conductance of ``P``.
    """
    q = chain.dense_generator()
    xi = uniformization_rate(chain)
    p = np.eye(chain.n_states) + q / xi
    pi = chain.stationary
    # reversible P is similar, via diag(sqrt(pi)), to the matrix with entries
    # sqrt(p_ab p_ba); that form never divides by an underflowed pi
    sym = np.sqrt(p * p.T)
    eig = np.sort(scipy.linalg.eigvalsh(sym))[::-1]
    lambda2 = float(eig[1]) if eig.size > 1 else 0.0
    off = q.copy()
    np.fill_diagonal(off, 0.0)
    flows = (pi[:, None] * off / xi)[off > 0]
    flow_bound = float(flows.min()) if flows.size else 0.0
    return SpectralCheck(xi, lambda2, flow_bound, bool(1 - lambda2 >= flow_bound**2 / 2), p)


def transient_law(chain: ExactChain, t: float, initial: int | None = None) -> np.ndarray:
    """Row-stochastic ``exp(Q t)``; a single row when ``initial`` is given."""
    m = scipy.linalg.expm(chain.dense_generator() * t)
    return m if initial is None else m[initial]


def worst_case_tv(chain: ExactChain, t: float) -> float:
    """Largest total variation to stationarity over point-mass starts at time ``t``."""
    m = transient_law(chain, t)
    return float(0.5 * np.abs(m - chain.stationary[None, :]).sum(axis=1).max())


def _log_stationary(chain: ExactChain) -> np.ndarray:
    x = chain.theta * chain.phi
    return x - scipy.special.logsumexp(x)


def _reversible_spectrum(chain: ExactChain, rtol: float = 1e-9):
    """Eigen-pairs of ``D^(1/2) Q D^(-1/2)`` with ``D = diag(pi)``, or None if that is not symmetric.

    Built from ``log pi`` so that states whose probability underflows still
    contribute their exact rates.
    """
    q = chain.dense_generator()
    half = 0.5 * _log_stationary(chain)
    sym = np.exp(half[:, None] - half[None, :]) * q
    scale = np.abs(sym).max()
    if scale > 0 and np.abs(sym - sym.T).max() > rtol * scale:
        return None
    lam, vec = np.linalg.eigh(0.5 * (sym + sym.T))
    # the top eigenvalue (zero) belongs to the stationary law; drop it
    return half, lam[:-1], vec[:, :-1]


def _spectral_worst_tv(spec, t: float) -> float:
    half, lam, vec = spec
    # P_t - Pi, written without subtracting two nearly equal matrices
    dev = (vec * np.exp(lam * t)) @ vec.T
    dev *= np.exp(half[None, :] - half[:, None])
    return float(0.5 * np.abs(dev).sum(axis=1).max())


def measured_mixing_time(chain: ExactChain, epsilon: float = 0.01, rtol: float = 1e-6) -> float:
    """Smallest ``t`` with worst-case TV at most ``epsilon``, located by bisection.

    The worst-case distance is nonincreasing in ``t``, so bracketing by doubling
    followed by bisection converges to the first crossing. Reversible chains use
    the eigen-decomposition of the symmetrized generator, which stays accurate
    when the spectral gap is far below machine precision relative to the rates;
    other chains use the matrix exponential.
    """
    spec = _reversible_spectrum(chain)
    if spec is None:
        def tv(t):
            return worst_case_tv(chain, t)
    else:
        def tv(t):
            return _spectral_worst_tv(spec, t)
    if tv(0.0) <= epsilon:
        return 0.0
    hi = 1.0 / max(float(chain.tau.max()), 1e-300)
    while tv(hi) > epsilon:
        hi *= 2.0
        if hi > 1e300:
            return math.inf
    lo = hi / 2.0 if hi > 1.0 / float(chain.tau.max()) else 0.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if tv(mid) > epsilon:
            lo = mid
        else:
            hi = mid
    return hi
