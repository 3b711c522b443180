"""Communication topology and mixing weights.

Builds the ring-of-cliques network of overlapping 4-user cliques, the
matching doubly stochastic weight scheme, and provides validation of
weight matrices plus windowed strong-connectivity checks for sequences
of (possibly time-varying) graphs.

Users are 1-indexed everywhere in this module's public surface; the
dense weight matrix is stored 0-indexed internally.
"""

import numpy as np

from .errors import ConfigurationError, InputError

__all__ = [
    "Topology",
    "WeightMatrix",
    "build_ring_of_cliques",
    "ring_clique_weights",
    "validate_weights",
    "check_strong_connectivity",
    "mix",
    "mix_all",
]


class Topology:
    """A directed communication graph given by per-user neighbor sets.

    ``neighbors[i - 1]`` is the frozenset of users that send their
    estimates to user ``i`` (1-indexed); every user hears itself, so
    ``i in neighbors[i - 1]`` is required.
    """

    __slots__ = ("m", "neighbors")

    def __init__(self, m, neighbors):
        m = int(m)
        if m < 1:
            raise ConfigurationError("need at least one user")
        sets = tuple(frozenset(int(j) for j in ns) for ns in neighbors)
        if len(sets) != m:
            raise ConfigurationError(
                f"expected {m} neighbor sets, got {len(sets)}"
            )
        for i, ns in enumerate(sets, start=1):
            if i not in ns:
                raise ConfigurationError(f"user {i} must be its own neighbor")
            bad = [j for j in ns if not 1 <= j <= m]
            if bad:
                raise ConfigurationError(
                    f"user {i} has out-of-range neighbors {sorted(bad)}"
                )
        self.m = m
        self.neighbors = sets

    def neighbor_list(self, i):
        """Sorted neighbors of user ``i`` (1-indexed, includes ``i``)."""
        return sorted(self.neighbors[i - 1])

    def adjacency(self):
        """Dense boolean matrix ``A[i-1, j-1] = (j in N_i)``."""
        a = np.zeros((self.m, self.m), dtype=bool)
        for i, ns in enumerate(self.neighbors):
            a[i, [j - 1 for j in ns]] = True
        return a

    def __eq__(self, other):
        return (
            isinstance(other, Topology)
            and self.m == other.m
            and self.neighbors == other.neighbors
        )

    def __hash__(self):
        return hash((self.m, self.neighbors))

    def __repr__(self):
        return f"Topology(m={self.m})"


class WeightMatrix:
    """Dense nonnegative mixing weights, entry ``[i-1, j-1] = w_ij``.

    Construction freezes the entries; validity against a topology is
    established separately by :func:`validate_weights`.
    """

    __slots__ = ("entries",)

    def __init__(self, entries):
        w = np.array(entries, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ConfigurationError(f"weight matrix must be square, got {w.shape}")
        w.setflags(write=False)
        self.entries = w

    @property
    def m(self):
        return self.entries.shape[0]

    def weight(self, i, j):
        """Entry ``w_ij`` with 1-indexed users."""
        return float(self.entries[i - 1, j - 1])

    def __repr__(self):
        return f"WeightMatrix(m={self.m})"


def _clique_members(t, m):
    # clique t (1-indexed) holds users 3t-2 .. 3t+1, wrapping past m to 1
    base = 3 * t - 2
    nxt = base + 3 if base + 3 <= m else 1
    return (base, base + 1, base + 2, nxt)


def build_ring_of_cliques(m):
    """Ring of ``m/3`` overlapping 4-user cliques.

    Clique ``t`` holds users ``{3t-2, 3t-1, 3t, 3t+1}`` (wrapping), so
    users with index ``1 mod 3`` are hubs belonging to two consecutive
    cliques. Requires ``m`` divisible by 3 and at least 6.
    """
    m = int(m)
    if m < 6 or m % 3 != 0:
        raise ConfigurationError(
            f"ring of cliques needs m divisible by 3 and m >= 6, got {m}"
        )
    neighbors = [set() for _ in range(m)]
    for t in range(1, m // 3 + 1):
        members = _clique_members(t, m)
        for i in members:
            neighbors[i - 1].update(members)
    return Topology(m, neighbors)


def ring_clique_weights(topology):
    """The dyadic mixing weights matching :func:`build_ring_of_cliques`.

    Per clique ``{h1, u, v, h2}`` with hubs ``h1, h2``: the two non-hub
    members give 3/8 to themselves and to each other and 1/8 to each hub;
    each hub collects 1/8 of self-weight and 1/8 per incident clique
    edge. Summing over cliques yields a symmetric doubly stochastic
    matrix whose entries are exact multiples of 1/8 (hub self-weight
    2/8, non-hub self-weight 3/8).
    """
    m = topology.m
    if topology != build_ring_of_cliques(m):
        raise ConfigurationError(
            "weights are defined only for the ring-of-cliques topology"
        )
    w = np.zeros((m, m))
    eighth = 1.0 / 8.0
    for t in range(1, m // 3 + 1):
        h1, u, v, h2 = _clique_members(t, m)
        w[u - 1, u - 1] += 3 * eighth
        w[v - 1, v - 1] += 3 * eighth
        w[u - 1, v - 1] += 3 * eighth
        w[v - 1, u - 1] += 3 * eighth
        w[h1 - 1, h1 - 1] += eighth
        w[h2 - 1, h2 - 1] += eighth
        for h in (h1, h2):
            for z in (u, v):
                w[h - 1, z - 1] += eighth
                w[z - 1, h - 1] += eighth
        w[h1 - 1, h2 - 1] += eighth
        w[h2 - 1, h1 - 1] += eighth
    return WeightMatrix(w)


def validate_weights(weights, topology, w_min=0.125, tol=1e-12):
    """Check a weight matrix against its topology.

    Verifies (i) zero weight outside each neighbor set, (ii) weight at
    least ``w_min`` inside it, and (iii) unit row and column sums within
    ``tol``. Returns a list of human-readable violation strings; an
    empty list means the matrix is a valid mixing matrix.
    """
    w = weights.entries
    m = topology.m
    if w.shape != (m, m):
        raise InputError(
            f"weight matrix shape {w.shape} does not match {m} users"
        )
    report = []
    adjacency = topology.adjacency()
    off = ~adjacency & (w != 0.0)
    for i, j in np.argwhere(off):
        report.append(
            f"w[{i + 1},{j + 1}]={w[i, j]:.6g} is nonzero outside N_{i + 1}"
        )
    small = adjacency & (w < w_min)
    for i, j in np.argwhere(small):
        report.append(
            f"w[{i + 1},{j + 1}]={w[i, j]:.6g} is below w_min={w_min:g}"
        )
    if np.any(w < 0):
        for i, j in np.argwhere(w < 0):
            report.append(f"w[{i + 1},{j + 1}]={w[i, j]:.6g} is negative")
    row = w.sum(axis=1)
    col = w.sum(axis=0)
    for i in np.nonzero(np.abs(row - 1.0) > tol)[0]:
        report.append(f"row {i + 1} sums to {row[i]:.17g}, expected 1")
    for j in np.nonzero(np.abs(col - 1.0) > tol)[0]:
        report.append(f"column {j + 1} sums to {col[j]:.17g}, expected 1")
    return report


def _strongly_connected(adj):
    # adjacency as list of sets of 0-indexed successors
    m = len(adj)

    def reaches_all(edges):
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in edges[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == m

    reverse = [set() for _ in range(m)]
    for u in range(m):
        for v in adj[u]:
            reverse[v].add(u)
    return reaches_all(adj) and reaches_all(reverse)


def check_strong_connectivity(graphs, window):
    """Windowed strong connectivity of a sequence of topologies.

    True exactly when, for every start ``k``, the graph formed by the
    edges present in all of graphs ``k .. k+window-1`` is strongly
    connected (every user reaches every other through directed links).
    """
    graphs = list(graphs)
    if not graphs:
        raise InputError("graph sequence must be nonempty")
    window = int(window)
    if window < 1 or window > len(graphs):
        raise InputError(
            f"window must lie in [1, {len(graphs)}], got {window}"
        )
    m = graphs[0].m
    if any(g.m != m for g in graphs):
        raise InputError("all graphs must have the same user count")
    for start in range(len(graphs) - window + 1):
        common = [
            set.intersection(
                *({j - 1 for j in g.neighbors[i]} for g in graphs[start : start + window])
            )
            for i in range(m)
        ]
        if not _strongly_connected(common):
            return False
    return True


def mix(weights, estimates, i):
    """Weighted average ``sum_j w_ij x_j`` received by user ``i`` (1-indexed)."""
    x = np.asarray(estimates, dtype=float)
    if x.ndim != 2 or x.shape[0] != weights.m:
        raise InputError(
            f"expected {weights.m} stacked estimate vectors, got shape {x.shape}"
        )
    if not 1 <= i <= weights.m:
        raise InputError(f"user index {i} out of range 1..{weights.m}")
    return weights.entries[i - 1] @ x


def mix_all(weights, estimates):
    """All users' weighted averages at once: rows of ``W @ X``."""
    x = np.asarray(estimates, dtype=float)
    if x.ndim != 2 or x.shape[0] != weights.m:
        raise InputError(
            f"expected {weights.m} stacked estimate vectors, got shape {x.shape}"
        )
    return weights.entries @ x
