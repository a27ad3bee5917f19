"""Instance model for discretizable distance geometry in R^K.

An instance is an ordered weighted graph on vertices 1..n together with a
fixed embedding of the first K vertices.  Edges spanning at most K
positions in the order are the discretization edges (they drive the
two-way branching); longer edges are pruning edges and only filter
branches.  This module owns the axioms check, the edge partition, the text
file format, the subset-sum hardness reduction, and random YES-instance
generators used for the synthetic experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (DEFAULT_TOL, MAX_DIMENSION, ToleranceConfig,
                       cayley_menger_volume, simplex_volume)

Edge = tuple[int, int]


class InstanceError(ValueError):
    """Malformed instance data or file."""


@dataclass(eq=False)
class DgpInstance:
    """Ordered weighted graph with a pinned initial embedding.

    Vertices are 1..n.  `edges` maps (u, v) with u < v to the required
    distance; `initial` is a (K, K) array whose row j embeds vertex j+1.
    Instances are treated as immutable after construction.
    """

    n: int
    K: int
    edges: dict[Edge, float]
    initial: np.ndarray

    def __post_init__(self):
        if not 1 <= self.K <= MAX_DIMENSION:
            raise InstanceError(f"K={self.K} outside supported range "
                                f"1..{MAX_DIMENSION}")
        if self.n < self.K + 1:
            raise InstanceError(f"need n >= K+1, got n={self.n}, K={self.K}")
        normalized: dict[Edge, float] = {}
        for (u, v), d in self.edges.items():
            if u == v or not (1 <= u <= self.n and 1 <= v <= self.n):
                raise InstanceError(f"bad edge ({u}, {v}) for n={self.n}")
            key = (u, v) if u < v else (v, u)
            if key in normalized:
                raise InstanceError(f"duplicate edge {key}")
            d = float(d)
            if not math.isfinite(d) or d < 0:
                raise InstanceError(f"edge {key} has invalid distance {d}")
            normalized[key] = d
        self.edges = normalized
        initial = np.asarray(self.initial, dtype=float)
        if initial.shape != (self.K, self.K):
            raise InstanceError("initial embedding must be a (K, K) array")
        if not np.all(np.isfinite(initial)):
            raise InstanceError("initial embedding must be finite")
        self.initial = initial

    def distance(self, u: int, v: int) -> float:
        return self.edges[(u, v) if u < v else (v, u)]

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self.edges

    def pruning_edges_of(self, v: int) -> list[tuple[int, float]]:
        """Pruning edges with v as upper endpoint, as (u, distance) pairs."""
        return [(u, d) for (u, w), d in self.edges.items()
                if w == v and v - u > self.K]


@dataclass(frozen=True)
class EdgePartition:
    """Split of the edge set by order span: <= K vs > K."""

    discretization: frozenset[Edge]
    pruning: frozenset[Edge]


@dataclass(frozen=True)
class SubsetSumInstance:
    """Positive integer sequence a_1..a_N."""

    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) < 1:
            raise InstanceError("subset-sum instance needs at least one value")
        if any(int(a) != a or a < 1 for a in self.values):
            raise InstanceError("subset-sum values must be positive integers")
        object.__setattr__(self, "values", tuple(int(a) for a in self.values))

    def __len__(self) -> int:
        return len(self.values)


def _as_subset_sum(a) -> SubsetSumInstance:
    return a if isinstance(a, SubsetSumInstance) else SubsetSumInstance(tuple(a))


@dataclass
class ValidationReport:
    """Axiom-by-axiom result of validate()."""

    discretization_ok: bool
    missing_edges: list[Edge]
    nonpositive_edges: list[Edge]
    simplex_ok: bool
    thin_vertices: list[int]
    min_simplex_volume: float
    initial_ok: bool
    initial_residuals: list[tuple[int, int, float, float]]

    @property
    def passed(self) -> bool:
        return self.discretization_ok and self.simplex_ok and self.initial_ok

    def summary(self) -> str:
        parts = [f"discretization={'ok' if self.discretization_ok else 'FAIL'}",
                 f"simplex={'ok' if self.simplex_ok else 'FAIL'}",
                 f"initial={'ok' if self.initial_ok else 'FAIL'}",
                 f"min_simplex_volume={self.min_simplex_volume:.3e}"]
        if self.missing_edges:
            parts.append(f"missing={self.missing_edges}")
        if self.nonpositive_edges:
            parts.append(f"nonpositive={self.nonpositive_edges}")
        if self.thin_vertices:
            parts.append(f"thin_vertices={self.thin_vertices}")
        return " ".join(parts)


def partition_edges(inst: DgpInstance) -> EdgePartition:
    """Exact split into discretization (span <= K) and pruning edges."""
    disc = frozenset(e for e in inst.edges if e[1] - e[0] <= inst.K)
    prune = frozenset(e for e in inst.edges if e[1] - e[0] > inst.K)
    return EdgePartition(discretization=disc, pruning=prune)


def validate(inst: DgpInstance,
             tol: ToleranceConfig = DEFAULT_TOL) -> ValidationReport:
    """Check the discretization axioms and the pinned embedding.

    (a) every pair within span K is present with a positive distance,
    (b) the K predecessors of each vertex v > K span a nondegenerate
        simplex (Cayley-Menger volume above tol.degeneracy),
    (c) the initial embedding realizes the edges among the first K
        vertices within tol.geometry.
    Failures are reported, never raised.
    """
    missing: list[Edge] = []
    nonpositive: list[Edge] = []
    for v in range(2, inst.n + 1):
        for u in range(max(1, v - inst.K), v):
            if not inst.has_edge(u, v):
                missing.append((u, v))
            elif inst.distance(u, v) <= 0:
                nonpositive.append((u, v))

    thin: list[int] = []
    min_vol = math.inf
    for v in range(inst.K + 1, inst.n + 1):
        window = list(range(v - inst.K, v))
        if any(not inst.has_edge(a, b) for i, a in enumerate(window)
               for b in window[i + 1:]):
            continue  # already reported as missing
        dmat = np.zeros((inst.K, inst.K))
        for i, a in enumerate(window):
            for j, b in enumerate(window[i + 1:], start=i + 1):
                dmat[i, j] = dmat[j, i] = inst.distance(a, b)
        try:
            vol = cayley_menger_volume(dmat)
        except Exception:
            vol = 0.0
        min_vol = min(min_vol, vol)
        if vol <= tol.degeneracy:
            thin.append(v)

    residuals: list[tuple[int, int, float, float]] = []
    for u in range(1, inst.K + 1):
        for v in range(u + 1, inst.K + 1):
            if not inst.has_edge(u, v):
                continue
            measured = float(np.linalg.norm(inst.initial[v - 1]
                                            - inst.initial[u - 1]))
            if abs(measured - inst.distance(u, v)) > tol.geometry:
                residuals.append((u, v, inst.distance(u, v), measured))

    return ValidationReport(
        discretization_ok=not missing and not nonpositive,
        missing_edges=missing,
        nonpositive_edges=nonpositive,
        simplex_ok=not thin,
        thin_vertices=thin,
        min_simplex_volume=0.0 if math.isinf(min_vol) else min_vol,
        initial_ok=not residuals,
        initial_residuals=residuals,
    )


# ---------------------------------------------------------------------------
# Subset-sum reduction

def reduce_subset_sum(a, K: int) -> DgpInstance:
    """Encode a subset-sum instance as a K-dimensional YES/NO instance.

    The output has n = K*N + 1 vertices.  Consecutive distances repeat each
    a_l over K successive steps, every span-j distance (j <= K) is the
    orthogonal combination sqrt(sum of squared consecutive steps), and a
    single zero-weight pruning edge ties the first vertex to the last.  The
    instance has an embedding extending the pinned axis-aligned start iff
    some sign vector s gives sum(s_l * a_l) = 0.
    """
    ss = _as_subset_sum(a)
    if K < 2:
        raise InstanceError("the reduction needs K >= 2")
    if len(ss) < 2:
        raise InstanceError("the reduction needs at least two values")
    values = ss.values
    big_n = len(values)
    n = K * big_n + 1

    consecutive = np.empty(n - 1)
    for i in range(n - 1):  # step i joins vertices i+1 and i+2
        consecutive[i] = values[i // K]

    edges: dict[Edge, float] = {}
    for i in range(n - 1):
        edges[(i + 1, i + 2)] = float(consecutive[i])
    for j in range(2, K + 1):
        for i in range(0, n - j):
            span = math.sqrt(float(np.sum(consecutive[i:i + j] ** 2)))
            edges[(i + 1, i + j + 1)] = span
    edges[(1, n)] = 0.0

    initial = np.zeros((K, K))
    for j in range(1, K):
        initial[j] = initial[j - 1]
        initial[j, j - 1] += values[0]
    return DgpInstance(n=n, K=K, edges=edges, initial=initial)


# ---------------------------------------------------------------------------
# Random YES instances

PRUNING_KINDS = ("none", "density", "prop1", "prop2", "prop3")

PROP2_RUN = 2  # unpruned vertices between consecutive pruning edges


def parse_pruning_spec(text: str) -> tuple[str, float | int | None]:
    """Parse "none", "density:P", "prop1:V0", "prop2:V0" or "prop3:V0"."""
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    if kind not in PRUNING_KINDS:
        raise InstanceError(f"unknown pruning spec {text!r}")
    if kind == "none":
        if arg:
            raise InstanceError("'none' takes no parameter")
        return ("none", None)
    if not arg:
        raise InstanceError(f"pruning spec {kind!r} needs a parameter")
    if kind == "density":
        p = float(arg)
        if not 0.0 <= p <= 1.0:
            raise InstanceError("density must lie in [0, 1]")
        return (kind, p)
    return (kind, int(arg))


def _generic_walk(n: int, K: int, rng: np.random.Generator,
                  volume_floor: float = 1e-2) -> np.ndarray:
    """Random walk with unit-to-double steps and generic angles.

    Each new point is resampled until the trailing (K+1)-point simplex has
    volume above `volume_floor`, which keeps every predecessor window
    nondegenerate and the sphere systems well conditioned.
    """
    x = np.zeros((n, K))
    for i in range(1, n):
        while True:
            step = rng.normal(size=K)
            norm = np.linalg.norm(step)
            if norm < 1e-12:
                continue
            x[i] = x[i - 1] + rng.uniform(1.0, 2.0) * step / norm
            lo = max(0, i - K)
            if i - lo < 2 or simplex_volume(x[lo:i + 1]) > volume_floor:
                break
    return x


def _pruning_pairs(n: int, K: int, spec: tuple[str, float | int | None],
                   rng: np.random.Generator) -> list[Edge]:
    kind, arg = spec
    if kind == "none":
        return []
    if kind == "density":
        pairs = []
        for v in range(K + 2, n + 1):
            for u in range(1, v - K):
                if rng.random() < arg:
                    pairs.append((u, v))
        return pairs

    v0 = int(arg)
    if v0 <= K:
        raise InstanceError(f"{kind} needs v0 > K, got v0={v0}")
    if v0 >= n:
        raise InstanceError(f"{kind} needs v0 < n, got v0={v0}, n={n}")
    if kind == "prop1":
        # u = v-K-1 kills exactly the newest branching choice, holding the
        # tree width at 2^(v0-K) from level v0 on.
        return [(v - K - 1, v) for v in range(v0 + 1, n + 1)]
    if kind == "prop2":
        run = PROP2_RUN
        if v0 < K + run + 1:
            raise InstanceError(f"prop2 needs v0 >= K+{run + 1}, got {v0}")
        pairs = []
        v = v0 + 1
        while v <= n - 1:
            pairs.append((v - run - K - 1, v))
            v += run + 1
        # never prune the last vertex; if the tail run got one longer than
        # `run`, cut it with one extra edge at n-1
        if pairs and n - pairs[-1][1] == run + 1:
            pairs.append((n - 1 - run - K - 1, n - 1))
        return pairs
    # prop3: every vertex above v0 except exact powers of two
    return [(v - K - 1, v) for v in range(v0 + 1, n + 1)
            if v & (v - 1) != 0]


def generate_random_yes(n: int, K: int, pruning="none", seed: int = 0,
                        tol: ToleranceConfig = DEFAULT_TOL
                        ) -> tuple[DgpInstance, np.ndarray]:
    """Random YES instance with its ground-truth embedding.

    `pruning` is a spec string ("none", "density:0.3", "prop1:4", ...) or an
    already parsed (kind, parameter) pair.  All distances, including the
    pruning ones, are measured on the generated walk, so the walk solves
    the instance exactly.  Deterministic for a fixed seed.
    """
    if n < K + 1:
        raise InstanceError(f"need n >= K+1, got n={n}, K={K}")
    spec = parse_pruning_spec(pruning) if isinstance(pruning, str) \
        else (pruning[0], pruning[1])
    rng = np.random.default_rng(seed)
    coords = _generic_walk(n, K, rng)

    edges: dict[Edge, float] = {}
    for v in range(2, n + 1):
        for u in range(max(1, v - K), v):
            edges[(u, v)] = float(np.linalg.norm(coords[v - 1] - coords[u - 1]))
    for (u, v) in _pruning_pairs(n, K, spec, rng):
        edges[(u, v)] = float(np.linalg.norm(coords[v - 1] - coords[u - 1]))

    inst = DgpInstance(n=n, K=K, edges=edges, initial=coords[:K].copy())
    return inst, coords


# ---------------------------------------------------------------------------
# File format
#
#   DMDGP <n> <K>
#   INIT <v> <c1> ... <cK>     (one line per v = 1..K)
#   EDGE <u> <v> <d>           (u < v after normalization, one per pair)
#
# UTF-8, whitespace separated, '#' starts a comment.  Numbers are printed
# with 17 significant digits so that write/read round-trips exactly.

def format_instance(inst: DgpInstance) -> str:
    lines = [f"DMDGP {inst.n} {inst.K}"]
    for v in range(1, inst.K + 1):
        coords = " ".join(f"{c:.17g}" for c in inst.initial[v - 1])
        lines.append(f"INIT {v} {coords}")
    for (u, v) in sorted(inst.edges):
        lines.append(f"EDGE {u} {v} {inst.edges[(u, v)]:.17g}")
    return "\n".join(lines) + "\n"


def write_instance(inst: DgpInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_instance(inst))


def parse_instance(text: str) -> DgpInstance:
    n = k = None
    init: dict[int, list[float]] = {}
    edges: dict[Edge, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        tag = tokens[0].upper()
        try:
            if tag == "DMDGP":
                if n is not None:
                    raise InstanceError("duplicate DMDGP header")
                n, k = int(tokens[1]), int(tokens[2])
            elif tag == "INIT":
                if k is None:
                    raise InstanceError("INIT before DMDGP header")
                v = int(tokens[1])
                coords = [float(t) for t in tokens[2:]]
                if not 1 <= v <= k or len(coords) != k:
                    raise InstanceError(f"bad INIT for vertex {v}")
                if v in init:
                    raise InstanceError(f"duplicate INIT for vertex {v}")
                init[v] = coords
            elif tag == "EDGE":
                u, v, d = int(tokens[1]), int(tokens[2]), float(tokens[3])
                if u == v:
                    raise InstanceError(f"self loop on vertex {u}")
                key = (u, v) if u < v else (v, u)
                if key in edges:
                    raise InstanceError(f"duplicate edge {key}")
                if d < 0:
                    raise InstanceError(f"negative distance on edge {key}")
                edges[key] = d
            else:
                raise InstanceError(f"unknown record {tokens[0]!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, InstanceError):
                raise InstanceError(f"line {lineno}: {exc}") from None
            raise InstanceError(f"line {lineno}: malformed record "
                                f"{raw.strip()!r}") from None
    if n is None or k is None:
        raise InstanceError("missing DMDGP header line")
    if sorted(init) != list(range(1, k + 1)):
        raise InstanceError(f"need INIT lines for vertices 1..{k}")
    initial = np.array([init[v] for v in range(1, k + 1)])
    return DgpInstance(n=n, K=k, edges=edges, initial=initial)


def read_instance(path) -> DgpInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instance(fh.read())
