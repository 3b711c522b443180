"""Experiment configuration: a flat INI document, losslessly round-trippable.

Sections mirror the configuration fields::

    [problem]    dimension, users
    [algorithm]  kind, alpha0, exponent
    [run]        iterations, samplings, seed, record_every,
                 reuse_instance, workers
    [ranges]     a, b, r, c, initial   (each "lo,hi"; c accepts "auto")
    [topology]   kind = ring_of_cliques | explicit
                 (explicit adds neighbors_<i> and weights_<i> lines)
    [output]     directory, final_distance_diagnostic

``dimension``, ``users``, ``kind``, ``alpha0``, ``iterations``,
``samplings``, and ``seed`` are required; everything else has the
defaults below. Floats are written with ``repr`` so reading a saved
file reproduces the exact values.
"""

import configparser
import dataclasses
import math

from .convex import StepSizeSchedule
from .engine import AlgorithmKind
from .errors import ConfigurationError
from .network import Topology, WeightMatrix, build_ring_of_cliques, ring_clique_weights

__all__ = ["ExperimentConfig", "load_config", "save_config"]

RING_W_MIN = 0.125  # smallest weight the ring-of-cliques scheme constructs


@dataclasses.dataclass
class ExperimentConfig:
    dimension: int
    users: int
    algorithm: AlgorithmKind
    alpha0: float
    iterations: int
    samplings: int
    seed: int
    exponent: float = 1.0
    record_every: int = 1
    reuse_instance: bool = True
    workers: int = 1
    a_range: tuple = (0.0, 1.0)
    b_range: tuple = (0.0, 1.0)
    r_range: tuple = (3.0, 4.0)
    c_range: tuple | None = None
    initial_box: tuple = (-2.0, 2.0)
    topology_kind: str = "ring_of_cliques"
    topology: Topology | None = None
    weights: WeightMatrix | None = None
    out_dir: str = "out"
    final_distance_diagnostic: bool = True

    def schedule(self):
        return StepSizeSchedule(self.alpha0, self.exponent)

    def center_range(self):
        """The configured center range, or the default ``±sqrt(3d/4)``."""
        if self.c_range is not None:
            return self.c_range
        bound = math.sqrt(0.75 * self.dimension)
        return (-bound, bound)

    def build_network(self):
        """The (topology, weights, w_min) triple this config describes."""
        if self.topology_kind == "ring_of_cliques":
            topology = build_ring_of_cliques(self.users)
            return topology, ring_clique_weights(topology), RING_W_MIN
        if self.topology_kind == "explicit":
            if self.topology is None or self.weights is None:
                raise ConfigurationError(
                    "explicit topology requires neighbors_<i> and weights_<i> entries"
                )
            positive = float(self.weights.entries[self.weights.entries > 0].min())
            return self.topology, self.weights, positive
        raise ConfigurationError(f"unknown topology kind {self.topology_kind!r}")

    def validate(self):
        """Raise ConfigurationError on any invalid field combination."""
        if self.dimension < 1:
            raise ConfigurationError(f"dimension must be >= 1, got {self.dimension}")
        if self.samplings < 1:
            raise ConfigurationError(f"samplings must be >= 1, got {self.samplings}")
        if self.iterations < 1:
            raise ConfigurationError(f"iterations must be >= 1, got {self.iterations}")
        if self.record_every < 1:
            raise ConfigurationError(
                f"record_every must be >= 1, got {self.record_every}"
            )
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must fit in an unsigned 64-bit integer")
        if self.topology_kind == "ring_of_cliques" and (
            self.users < 6 or self.users % 3 != 0
        ):
            raise ConfigurationError(
                f"ring-of-cliques topology needs users divisible by 3 and >= 6, "
                f"got {self.users}"
            )
        self.schedule()  # validates alpha0 and exponent
        for name, rng in (
            ("a", self.a_range),
            ("b", self.b_range),
            ("r", self.r_range),
            ("c", self.center_range()),
            ("initial", self.initial_box),
        ):
            lo, hi = rng
            if not lo <= hi:
                raise ConfigurationError(f"range {name} = ({lo}, {hi}) is empty")
        if self.a_range[0] < 0:
            raise ConfigurationError("objective weights must be nonnegative")
        if self.r_range[0] <= 0:
            raise ConfigurationError("radius range must be positive")
        if self.topology is not None and self.topology.m != self.users:
            raise ConfigurationError("explicit topology user count mismatch")
        return self


def _parse_range(text, name):
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 2:
        raise ConfigurationError(f"range {name} must be 'lo,hi', got {text!r}")
    try:
        return (float(parts[0]), float(parts[1]))
    except ValueError:
        raise ConfigurationError(f"range {name} has non-numeric bounds: {text!r}") from None


def _parse_bool(text, name):
    t = str(text).strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ConfigurationError(f"{name} must be true or false, got {text!r}")


def _get(parser, section, option, required=False, default=None):
    if parser.has_option(section, option):
        return parser.get(section, option)
    if required:
        raise ConfigurationError(f"missing required option [{section}] {option}")
    return default


def _read_explicit_network(parser, users):
    neighbors = []
    rows = []
    for i in range(1, users + 1):
        ns = _get(parser, "topology", f"neighbors_{i}", required=True)
        neighbors.append([int(tok) for tok in ns.split()])
        wline = _get(parser, "topology", f"weights_{i}", required=True)
        row = [0.0] * users
        for tok in wline.split():
            j_text, _, w_text = tok.partition(":")
            try:
                j = int(j_text)
                w = float(w_text)
            except ValueError:
                raise ConfigurationError(
                    f"weights_{i} entries must look like j:value, got {tok!r}"
                ) from None
            if not 1 <= j <= users:
                raise ConfigurationError(f"weights_{i} names out-of-range user {j}")
            row[j - 1] = w
        rows.append(row)
    return Topology(users, neighbors), WeightMatrix(rows)


def load_config(path):
    """Parse an experiment configuration file."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path, encoding="utf-8")
    if not read:
        raise ConfigurationError(f"cannot read config file {path}")
    try:
        dimension = int(_get(parser, "problem", "dimension", required=True))
        users = int(_get(parser, "problem", "users", required=True))
        kind = AlgorithmKind.from_string(_get(parser, "algorithm", "kind", required=True))
        alpha0 = float(_get(parser, "algorithm", "alpha0", required=True))
        exponent = float(_get(parser, "algorithm", "exponent", default="1.0"))
        iterations = int(_get(parser, "run", "iterations", required=True))
        samplings = int(_get(parser, "run", "samplings", required=True))
        seed = int(_get(parser, "run", "seed", required=True))
        record_every = int(_get(parser, "run", "record_every", default="1"))
        reuse_instance = _parse_bool(
            _get(parser, "run", "reuse_instance", default="true"), "reuse_instance"
        )
        workers = int(_get(parser, "run", "workers", default="1"))
    except ConfigurationError:
        raise
    except ValueError as exc:
        raise ConfigurationError(f"malformed numeric option: {exc}") from None

    a_range = _parse_range(_get(parser, "ranges", "a", default="0,1"), "a")
    b_range = _parse_range(_get(parser, "ranges", "b", default="0,1"), "b")
    r_range = _parse_range(_get(parser, "ranges", "r", default="3,4"), "r")
    c_text = _get(parser, "ranges", "c", default="auto")
    c_range = None if str(c_text).strip().lower() == "auto" else _parse_range(c_text, "c")
    initial_box = _parse_range(_get(parser, "ranges", "initial", default="-2,2"), "initial")

    topology_kind = str(
        _get(parser, "topology", "kind", default="ring_of_cliques")
    ).strip().lower()
    topology = weights = None
    if topology_kind == "explicit":
        topology, weights = _read_explicit_network(parser, users)

    out_dir = _get(parser, "output", "directory", default="out")
    diag = _parse_bool(
        _get(parser, "output", "final_distance_diagnostic", default="true"),
        "final_distance_diagnostic",
    )

    config = ExperimentConfig(
        dimension=dimension,
        users=users,
        algorithm=kind,
        alpha0=alpha0,
        iterations=iterations,
        samplings=samplings,
        seed=seed,
        exponent=exponent,
        record_every=record_every,
        reuse_instance=reuse_instance,
        workers=workers,
        a_range=a_range,
        b_range=b_range,
        r_range=r_range,
        c_range=c_range,
        initial_box=initial_box,
        topology_kind=topology_kind,
        topology=topology,
        weights=weights,
        out_dir=out_dir,
        final_distance_diagnostic=diag,
    )
    return config.validate()


def _fmt_range(rng):
    return f"{rng[0]!r},{rng[1]!r}"


def save_config(config, path):
    """Write a configuration file that :func:`load_config` reproduces exactly."""
    parser = configparser.ConfigParser()
    parser["problem"] = {
        "dimension": str(config.dimension),
        "users": str(config.users),
    }
    parser["algorithm"] = {
        "kind": config.algorithm.value,
        "alpha0": repr(config.alpha0),
        "exponent": repr(config.exponent),
    }
    parser["run"] = {
        "iterations": str(config.iterations),
        "samplings": str(config.samplings),
        "seed": str(config.seed),
        "record_every": str(config.record_every),
        "reuse_instance": "true" if config.reuse_instance else "false",
        "workers": str(config.workers),
    }
    parser["ranges"] = {
        "a": _fmt_range(config.a_range),
        "b": _fmt_range(config.b_range),
        "r": _fmt_range(config.r_range),
        "c": "auto" if config.c_range is None else _fmt_range(config.c_range),
        "initial": _fmt_range(config.initial_box),
    }
    topo = {"kind": config.topology_kind}
    if config.topology_kind == "explicit":
        for i in range(1, config.users + 1):
            topo[f"neighbors_{i}"] = " ".join(
                str(j) for j in config.topology.neighbor_list(i)
            )
            row = config.weights.entries[i - 1]
            topo[f"weights_{i}"] = " ".join(
                f"{j + 1}:{row[j]!r}" for j in range(config.users) if row[j] != 0.0
            )
    parser["topology"] = topo
    parser["output"] = {
        "directory": config.out_dir,
        "final_distance_diagnostic": "true" if config.final_distance_diagnostic else "false",
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        parser.write(fh)
