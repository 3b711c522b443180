"""Reproducible random streams and per-user constraint sampling.

Every source of randomness in a run is a counter-based Philox generator
keyed by ``SeedSequence(master_seed, spawn_key=(purpose, sampling, user))``,
so draws are identical across platforms and runs, adding one kind of
draw never perturbs another, and distinct users' streams are
statistically independent. The purpose codes are:

====================  ====
purpose               code
====================  ====
instance generation     0
initial points          1
constraint selection    2
oracle                  3
====================  ====
"""

import numpy as np

from .errors import ConfigurationError, InputError

__all__ = ["PURPOSES", "RngStream", "ConstraintPartition", "sample_constraint"]

PURPOSES = {"instance": 0, "init": 1, "constraint": 2, "oracle": 3}


class RngStream:
    """One logical random stream, owned by a single (user, purpose) pair.

    Parameters
    ----------
    seed : int
        Master seed (64-bit unsigned).
    purpose : str
        One of the keys of :data:`PURPOSES`.
    sampling : int, optional
        Monte-Carlo sampling index the stream belongs to (0 for
        sampling-independent draws such as instance generation).
    user : int, optional
        1-indexed owning user (0 for network-level draws).
    """

    __slots__ = ("seed", "purpose", "sampling", "user", "_gen")

    def __init__(self, seed, purpose, sampling=0, user=0):
        if purpose not in PURPOSES:
            raise InputError(f"unknown stream purpose {purpose!r}")
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise InputError("seed must fit in an unsigned 64-bit integer")
        self.seed = seed
        self.purpose = purpose
        self.sampling = int(sampling)
        self.user = int(user)
        key = (PURPOSES[purpose], self.sampling, self.user)
        self._gen = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(seed, spawn_key=key))
        )

    @property
    def stream_id(self):
        return (self.purpose, self.sampling, self.user)

    def integers(self, high, size=None):
        """Uniform integers in ``[0, high)``."""
        return self._gen.integers(0, high, size=size)

    def uniform(self, low, high, size=None):
        """Uniform reals in ``[low, high)``."""
        return self._gen.uniform(low, high, size=size)

    def standard_normal(self, size=None):
        return self._gen.standard_normal(size=size)

    def __repr__(self):
        return (
            f"RngStream(seed={self.seed}, purpose={self.purpose!r}, "
            f"sampling={self.sampling}, user={self.user})"
        )


class ConstraintPartition:
    """Assignment of global constraint-component indices to users.

    ``index_sets[i - 1]`` holds user ``i``'s component indices; the sets
    are pairwise disjoint and together cover ``1..n``.
    """

    __slots__ = ("index_sets", "n")

    def __init__(self, index_sets):
        sets = tuple(tuple(int(j) for j in s) for s in index_sets)
        flat = [j for s in sets for j in s]
        n = len(flat)
        if n == 0:
            raise ConfigurationError("partition covers no components")
        if len(set(flat)) != n:
            raise ConfigurationError("partition sets must be disjoint")
        if set(flat) != set(range(1, n + 1)):
            raise ConfigurationError(
                f"partition must cover exactly 1..{n}"
            )
        self.index_sets = sets
        self.n = n

    @classmethod
    def contiguous(cls, counts):
        """Blocks of consecutive indices: user ``i`` gets ``counts[i-1]`` of them."""
        sets = []
        start = 1
        for c in counts:
            sets.append(tuple(range(start, start + int(c))))
            start += int(c)
        return cls(sets)

    @property
    def m(self):
        return len(self.index_sets)

    def size(self, i):
        """Number of components assigned to user ``i`` (1-indexed)."""
        return len(self.index_sets[i - 1])

    def __eq__(self, other):
        return (
            isinstance(other, ConstraintPartition)
            and self.index_sets == other.index_sets
        )

    def __hash__(self):
        return hash(self.index_sets)

    def __repr__(self):
        return f"ConstraintPartition(m={self.m}, n={self.n})"


def sample_constraint(partition, i, stream):
    """Draw one of user ``i``'s component indices, uniformly.

    Returns a global index from ``partition.index_sets[i - 1]``; each
    index has probability ``1/|I_i|``. Consecutive calls on the same
    stream are equivalent to one block draw of the same length, which
    the iteration engines exploit.
    """
    if not 1 <= i <= partition.m:
        raise InputError(f"user index {i} out of range 1..{partition.m}")
    own = partition.index_sets[i - 1]
    if len(own) == 0:
        raise ConfigurationError(f"user {i} has no constraint components")
    return own[int(stream.integers(len(own)))]
