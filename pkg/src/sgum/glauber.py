"""Randomized distributed spectrum access as a continuous-time chain.

Every user carries an exponential timer with rate ``tau[n]``. When it fires the
user proposes a channel uniformly from its vacant set (the current one
included) and keeps it with probability ``exp(theta * min(0, dS))``, where
``dS`` is the change in its social group utility. The superposition of timers
is simulated event by event: inter-event gaps are exponential with the total
rate and the firing user is drawn proportionally to its rate.

The inner loop runs under numba. Random numbers are drawn by numpy in chunks
and handed to the kernel, so a run is reproducible from its seed alone.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .social import SocialGraph
from .spectrum import SpectrumScenario, potential_coefficients, validate_profile

_CHUNK = 1 << 16
# Load tables are rebuilt from scratch after this many accepted moves to stop
# incremental rounding from accumulating.
_REFRESH = 4096


class ChainError(ValueError):
    pass


def acceptance_probability(s_new: float, s_old: float, theta: float) -> float:
    """Probability of keeping a proposed channel.

    Equal to ``exp(theta*S_new) / max(exp(theta*S_new), exp(theta*S_old))``,
    evaluated as ``exp(theta * min(0, S_new - S_old))`` so it never overflows.
    """
    if theta < 0:
        raise ChainError("theta must be nonnegative")
    delta = s_new - s_old
    if delta >= 0 or theta == 0:
        return 1.0
    return math.exp(theta * delta)


@dataclass(frozen=True)
class ChainConfig:
    """Inverse temperature, per-user timer rates and the stopping horizon.

    ``tau`` may be a scalar (shared by all users). At least one of
    ``max_events`` and ``max_time`` must be given; the run stops at whichever
    is hit first.
    """

    theta: float
    tau: float | tuple[float, ...] = 1.0
    seed: int | None = None
    max_events: int | None = None
    max_time: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.theta) and self.theta >= 0):
            raise ChainError("theta must be finite and nonnegative")
        tau = np.atleast_1d(np.asarray(self.tau, dtype=float))
        if np.any(~np.isfinite(tau)) or np.any(tau <= 0):
            raise ChainError("update rates must be positive")
        if self.max_events is None and self.max_time is None:
            raise ChainError("a horizon (max_events or max_time) is required")
        if self.max_events is not None and self.max_events < 0:
            raise ChainError("max_events must be nonnegative")
        if self.max_time is not None and not self.max_time >= 0:
            raise ChainError("max_time must be nonnegative")

    def rates(self, n_users: int) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(self.tau, dtype=float))
        if tau.size == 1:
            return np.full(n_users, tau[0])
        if tau.size != n_users:
            raise ChainError(f"{tau.size} update rates for {n_users} users")
        return tau.copy()


@dataclass
class ChainTrace:
    """Outcome of one run.

    Per-event columns are empty when the run was made with ``record=False``.
    ``state_counts`` (when requested) counts the post-event profile of every
    event, indexed like :meth:`SpectrumScenario.profile_array`.
    """

    initial: tuple[int, ...]
    final: tuple[int, ...]
    n_events: int
    end_time: float
    final_phi: float
    final_welfare: float
    times: np.ndarray = field(default_factory=lambda: np.empty(0))
    users: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    old: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    new: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    accepted: np.ndarray = field(default_factory=lambda: np.empty(0, bool))
    phi: np.ndarray = field(default_factory=lambda: np.empty(0))
    welfare: np.ndarray = field(default_factory=lambda: np.empty(0))
    state_counts: np.ndarray | None = None

    def occupancy(self) -> np.ndarray:
        if self.state_counts is None:
            raise ChainError("run was made without count_states=True")
        total = self.state_counts.sum()
        return self.state_counts / total if total else self.state_counts.astype(float)

    def profiles(self) -> np.ndarray:
        """Post-event profile of every recorded event, shape ``(events, N)``."""
        out = np.empty((self.users.size, len(self.initial)), dtype=np.int64)
        a = np.array(self.initial, dtype=np.int64)
        for k in range(self.users.size):
            if self.accepted[k]:
                a[self.users[k]] = self.new[k]
            out[k] = a
        return out

    def to_csv(self, path_or_file) -> None:
        """Write columns ``time,user,old,new,accepted,phi,welfare``."""
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        f = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["time", "user", "old", "new", "accepted", "phi", "welfare"])
            for row in zip(self.times.tolist(), self.users.tolist(), self.old.tolist(),
                           self.new.tolist(), self.accepted.tolist(), self.phi.tolist(),
                           self.welfare.tolist()):
                t, u, o, n, acc, p, v = row
                w.writerow([repr(t), u, o, n, int(acc), repr(p), repr(v)])
        finally:
            if own:
                f.close()


@numba.njit(cache=True)
def _refresh(a, upd_s, upd_phi, upd_v, noise, load_s, load_phi, load_v):
    n_users = a.size
    load_s[:] = 0.0
    load_phi[:] = 0.0
    load_v[:] = 0.0
    for k in range(n_users):
        c = a[k]
        for n in range(n_users):
            load_s[n, c] += upd_s[k, n]
            load_phi[n, c] += upd_phi[k, n]
            load_v[n, c] += upd_v[k, n]
    phi = 0.0
    v = 0.0
    for n in range(n_users):
        phi -= 0.5 * load_phi[n, a[n]] + noise[n, a[n]]
        v -= 0.5 * load_v[n, a[n]] + noise[n, a[n]]
    return phi, v


@numba.njit(cache=True)
def _run_chunk(a, pos, vac_flat, vac_off, vac_len, stride, cum_rate, theta,
               upd_s, upd_phi, upd_v, noise, load_s, load_phi, load_v,
               gaps, draws, t, max_time, state, phi, v, since_refresh,
               out_t, out_user, out_old, out_new, out_acc, out_phi, out_v, record,
               counts, count):
    n_users = a.size
    done = 0
    stopped = False
    for e in range(gaps.size):
        t_next = t + gaps[e]
        if t_next > max_time:
            stopped = True
            break
        t = t_next
        # firing user: first index with cumulative share above the draw
        u = draws[e, 0]
        n = 0
        while n < n_users - 1 and cum_rate[n] <= u:
            n += 1
        k_new = int(draws[e, 1] * vac_len[n])
        if k_new >= vac_len[n]:
            k_new = vac_len[n] - 1
        c_old = a[n]
        c_new = vac_flat[vac_off[n] + k_new]
        acc = True
        if c_new != c_old:
            d_s = -(load_s[n, c_new] - load_s[n, c_old]) - (noise[n, c_new] - noise[n, c_old])
            if d_s < 0.0 and theta > 0.0:
                acc = draws[e, 2] < math.exp(theta * d_s)
            if acc:
                d_phi = -(load_phi[n, c_new] - load_phi[n, c_old]) - (noise[n, c_new] - noise[n, c_old])
                d_v = -(load_v[n, c_new] - load_v[n, c_old]) - (noise[n, c_new] - noise[n, c_old])
                for m in range(n_users):
                    load_s[m, c_old] -= upd_s[n, m]
                    load_s[m, c_new] += upd_s[n, m]
                    load_phi[m, c_old] -= upd_phi[n, m]
                    load_phi[m, c_new] += upd_phi[n, m]
                    load_v[m, c_old] -= upd_v[n, m]
                    load_v[m, c_new] += upd_v[n, m]
                a[n] = c_new
                state += (k_new - pos[n]) * stride[n]
                pos[n] = k_new
                phi += d_phi
                v += d_v
                since_refresh += 1
                if since_refresh >= _REFRESH:
                    phi, v = _refresh(a, upd_s, upd_phi, upd_v, noise, load_s, load_phi, load_v)
                    since_refresh = 0
        if record:
            out_t[e] = t
            out_user[e] = n
            out_old[e] = c_old
            out_new[e] = c_new
            out_acc[e] = acc
            out_phi[e] = phi
            out_v[e] = v
        if count:
            counts[state] += 1
        done += 1
    return done, t, state, phi, v, since_refresh, stopped


def update_vectors(s: SpectrumScenario, g: SocialGraph):
    """Per-mover increments of the three load tables.

    Row ``k`` is what user ``k`` adds to column ``a_k`` of each table: the
    social-utility table (own interference caused plus tie-weighted harm to
    neighbours), the potential table and the welfare table.
    """
    gain = s.gain
    w = g.matrix()
    b = potential_coefficients(s, g)
    upd_s = gain + (w * gain).T
    upd_phi = b + b.T
    upd_v = gain + gain.T
    return upd_s, upd_phi, upd_v


def random_profile(s: SpectrumScenario, rng) -> tuple[int, ...]:
    rng = np.random.default_rng(rng)
    return tuple(int(v[rng.integers(len(v))]) for v in s.vacant)


def simulate(s: SpectrumScenario, g: SocialGraph, cfg: ChainConfig, a0=None,
             record: bool = True, count_states: bool = False,
             max_states: int = 1 << 22) -> ChainTrace:
    """Run the chain from ``a0`` (a seeded uniform profile when omitted)."""
    if g.n_users != s.n_users:
        raise ChainError("social graph and scenario disagree on the number of users")
    rng = np.random.default_rng(cfg.seed)
    a0 = random_profile(s, rng) if a0 is None else validate_profile(s, a0)
    n_users = s.n_users
    rates = cfg.rates(n_users)
    total_rate = float(rates.sum())
    cum_rate = np.cumsum(rates) / total_rate

    vac_len = np.array([len(v) for v in s.vacant], dtype=np.int64)
    vac_off = np.concatenate([[0], np.cumsum(vac_len)[:-1]]).astype(np.int64)
    vac_flat = np.array([c for v in s.vacant for c in v], dtype=np.int64)
    pos = np.array([s.vacant[n].index(a0[n]) for n in range(n_users)], dtype=np.int64)
    stride = np.ones(n_users, dtype=np.int64)
    for n in range(n_users - 2, -1, -1):
        stride[n] = stride[n + 1] * vac_len[n + 1]
    if count_states:
        n_states = s.state_space_size
        if n_states > max_states:
            raise ChainError(f"{n_states} states exceed the counting cap {max_states}")
        counts = np.zeros(n_states, dtype=np.int64)
    else:
        counts = np.zeros(1, dtype=np.int64)
    state = int(pos @ stride)

    upd_s, upd_phi, upd_v = (np.ascontiguousarray(x) for x in update_vectors(s, g))
    noise = np.ascontiguousarray(s.noise)
    shape = (n_users, s.n_channels)
    load_s, load_phi, load_v = np.zeros(shape), np.zeros(shape), np.zeros(shape)
    a = np.array(a0, dtype=np.int64)
    phi, v = _refresh(a, upd_s, upd_phi, upd_v, noise, load_s, load_phi, load_v)

    max_events = cfg.max_events if cfg.max_events is not None else np.iinfo(np.int64).max
    max_time = cfg.max_time if cfg.max_time is not None else math.inf
    pieces = []
    t = 0.0
    n_done = 0
    since = 0
    while n_done < max_events:
        size = int(min(_CHUNK, max_events - n_done))
        gaps = rng.exponential(1.0 / total_rate, size)
        draws = rng.random((size, 3))
        if record:
            cols = (np.empty(size), np.empty(size, np.int64), np.empty(size, np.int64),
                    np.empty(size, np.int64), np.empty(size, np.bool_), np.empty(size),
                    np.empty(size))
        else:
            cols = (np.empty(0), np.empty(0, np.int64), np.empty(0, np.int64),
                    np.empty(0, np.int64), np.empty(0, np.bool_), np.empty(0), np.empty(0))
        done, t, state, phi, v, since, stopped = _run_chunk(
            a, pos, vac_flat, vac_off, vac_len, stride, cum_rate, float(cfg.theta),
            upd_s, upd_phi, upd_v, noise, load_s, load_phi, load_v,
            gaps, draws, t, max_time, state, phi, v, since, *cols, record,
            counts, count_states)
        n_done += done
        if record:
            pieces.append(tuple(c[:done] for c in cols))
        if stopped:
            break

    trace = ChainTrace(initial=a0, final=tuple(a.tolist()), n_events=n_done, end_time=t,
                       final_phi=float(phi), final_welfare=float(v),
                       state_counts=counts if count_states else None)
    if record and pieces:
        (trace.times, trace.users, trace.old, trace.new, trace.accepted, trace.phi,
         trace.welfare) = (np.concatenate(parts) for parts in zip(*pieces))
    return trace
