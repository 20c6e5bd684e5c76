"""Weighted social graphs.

Ties are stored as a sparse directed map ``(i, j) -> w_ij``. An absent pair
means ``w_ij = 0``. Two modes exist: ``standard`` admits weights in (0, 1],
``generalized`` admits any nonzero weight up to 1 (negative ties model
adversarial users).

Edge-list text format, one tie per line::

    # comment
    i j w

Indices are 0-based, weights use a decimal point regardless of locale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

STANDARD = "standard"
GENERALIZED = "generalized"

ZERO_SUM_TOL = 1e-12


class SocialGraphError(ValueError):
    """Invalid social graph contents."""


class EdgeListError(SocialGraphError):
    """Malformed edge-list text; ``lineno`` is 1-based."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _check_weight(w: float, mode: str) -> str | None:
    if not math.isfinite(w):
        return f"weight {w!r} is not finite"
    if w == 0.0:
        return "zero weight (absent ties must be omitted)"
    if w > 1.0:
        return f"weight {w!r} exceeds 1"
    if mode == STANDARD and w < 0.0:
        return f"negative weight {w!r} requires generalized mode"
    return None


@dataclass(frozen=True)
class SocialGraph:
    n_users: int
    ties: Mapping[tuple[int, int], float] = field(default_factory=dict)
    mode: str = STANDARD

    def __post_init__(self):
        if self.mode not in (STANDARD, GENERALIZED):
            raise SocialGraphError(f"unknown mode {self.mode!r}")
        if self.n_users < 0:
            raise SocialGraphError("n_users must be nonnegative")
        clean = {}
        for (i, j), w in self.ties.items():
            i, j, w = int(i), int(j), float(w)
            if i == j:
                raise SocialGraphError(f"self-tie on user {i}")
            if not (0 <= i < self.n_users and 0 <= j < self.n_users):
                raise SocialGraphError(f"tie ({i}, {j}) outside 0..{self.n_users - 1}")
            problem = _check_weight(w, self.mode)
            if problem:
                raise SocialGraphError(f"tie ({i}, {j}): {problem}")
            clean[(i, j)] = w
        object.__setattr__(self, "ties", dict(sorted(clean.items())))

    @classmethod
    def empty(cls, n_users: int) -> "SocialGraph":
        return cls(n_users, {})

    @classmethod
    def complete(cls, n_users: int, tie_weight: float = 1.0) -> "SocialGraph":
        ties = {(i, j): tie_weight for i in range(n_users) for j in range(n_users) if i != j}
        return cls(n_users, ties)

    @classmethod
    def from_matrix(cls, weights, mode: str = STANDARD) -> "SocialGraph":
        """Build from a dense square matrix; zero entries and the diagonal are dropped."""
        w = np.asarray(weights, dtype=float)
        n = w.shape[0]
        ties = {(i, j): float(w[i, j]) for i in range(n) for j in range(n) if i != j and w[i, j] != 0.0}
        return cls(n, ties, mode)

    def weight(self, i: int, j: int) -> float:
        return self.ties.get((i, j), 0.0)

    def matrix(self) -> np.ndarray:
        """Dense ``n x n`` weight matrix with a zero diagonal (read-only)."""
        return self._dense

    @cached_property
    def _dense(self) -> np.ndarray:
        w = np.zeros((self.n_users, self.n_users))
        for (i, j), v in self.ties.items():
            w[i, j] = v
        w.setflags(write=False)
        return w

    @property
    def n_ties(self) -> int:
        return len(self.ties)

    def is_symmetric(self) -> bool:
        return all(self.ties.get((j, i)) == w for (i, j), w in self.ties.items())

    def social_group(self, i: int) -> set[int]:
        """Users that ``i`` holds a nonzero tie towards."""
        if not 0 <= i < self.n_users:
            raise IndexError(f"user {i} out of range for {self.n_users} users")
        return {j for (a, j) in self.ties if a == i}

    def incoming_weight(self, i: int) -> float:
        return math.fsum(w for (_, j), w in self.ties.items() if j == i)

    def restrict(self, keep) -> "SocialGraph":
        """Copy keeping only ties for which ``keep(i, j)`` is true."""
        return SocialGraph(self.n_users, {k: w for k, w in self.ties.items() if keep(*k)}, self.mode)

    def dumps(self) -> str:
        """Canonical edge-list text: ties sorted by (i, j), 17 significant digits."""
        return "".join(f"{i} {j} {w:.17g}\n" for (i, j), w in self.ties.items())


def er_graph(n: int, p_link: float, tie_weight: float = 1.0, seed=None) -> SocialGraph:
    """Symmetric Erdos-Renyi graph: each unordered pair tied with probability ``p_link``.

    One uniform variate is drawn per unordered pair in row-major order, so graphs
    from the same seed are nested as ``p_link`` grows.
    """
    if not 0.0 <= p_link <= 1.0:
        raise SocialGraphError(f"p_link must lie in [0, 1], got {p_link}")
    if not 0.0 < tie_weight <= 1.0:
        raise SocialGraphError(f"tie_weight must lie in (0, 1], got {tie_weight}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    linked = rng.random(iu.size) < p_link
    ties = {}
    for i, j in zip(iu[linked].tolist(), ju[linked].tolist()):
        ties[(i, j)] = tie_weight
        ties[(j, i)] = tie_weight
    return SocialGraph(n, ties)


def _split_lines(text) -> Iterable[tuple[int, str]]:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    elif hasattr(text, "read"):
        text = text.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def load_edge_list(text, n_users: int | None = None, symmetrize: bool = False,
                   mode: str = STANDARD) -> SocialGraph:
    """Parse edge-list text (``str``, ``bytes`` or a file object).

    ``n_users`` defaults to one more than the largest index seen.
    """
    ties: dict[tuple[int, int], float] = {}
    explicit: set[tuple[int, int]] = set()
    max_index = -1
    for lineno, line in _split_lines(text):
        parts = line.split()
        if len(parts) != 3:
            raise EdgeListError(lineno, f"expected 'i j w', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            w = float(parts[2])
        except ValueError:
            raise EdgeListError(lineno, f"cannot parse {line!r}") from None
        if i < 0 or j < 0:
            raise EdgeListError(lineno, "negative user index")
        if i == j:
            raise EdgeListError(lineno, f"self-tie on user {i}")
        problem = _check_weight(w, mode)
        if problem:
            raise EdgeListError(lineno, problem)
        if (i, j) in explicit:
            raise EdgeListError(lineno, f"duplicate tie ({i}, {j})")
        explicit.add((i, j))
        ties[(i, j)] = w
        if symmetrize:
            mirrored = ties.get((j, i))
            if (j, i) in explicit and mirrored != w:
                raise EdgeListError(lineno, f"mirror of ({i}, {j}) conflicts with an earlier line")
            ties[(j, i)] = w
        max_index = max(max_index, i, j)
    if n_users is None:
        n_users = max_index + 1
    elif max_index >= n_users:
        raise SocialGraphError(f"index {max_index} exceeds n_users={n_users}")
    return SocialGraph(n_users, ties, mode)


def social_group(g: SocialGraph, i: int) -> set[int]:
    return g.social_group(i)


def is_zero_sum(g: SocialGraph, tol: float = ZERO_SUM_TOL) -> bool:
    """True iff every user's incoming tie weights sum to -1.

    Under that condition the social group utilities of all users sum to zero for
    any individual utilities.
    """
    if g.mode != GENERALIZED:
        raise SocialGraphError("zero-sum check applies to generalized-mode graphs only")
    return all(abs(g.incoming_weight(i) + 1.0) <= tol for i in range(g.n_users))


def induced_subgraph(g: SocialGraph, nodes) -> SocialGraph:
    """Ties among ``nodes``, relabelled 0..len(nodes)-1 in the given order."""
    index = {int(v): k for k, v in enumerate(nodes)}
    ties = {(index[i], index[j]): w for (i, j), w in g.ties.items() if i in index and j in index}
    return SocialGraph(len(index), ties, g.mode)


def social_detection_filter(g: SocialGraph, positions, detection_range: float) -> SocialGraph:
    """Keep only ties between users no farther apart than ``detection_range``."""
    pos = np.asarray(positions, dtype=float)
    if pos.shape[0] < g.n_users:
        raise SocialGraphError("positions do not cover every user")
    return g.restrict(lambda i, j: float(np.hypot(*(pos[i] - pos[j]))) <= detection_range)
