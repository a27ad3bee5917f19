"""Reflection symmetries of the embedding tree.

Every vertex v > K defines a partial reflection: mirror positions v..n
through the hyperplane of the K predecessors of v.  These commute, are
involutions, and generate a group isomorphic to C_2^(n-K) acting on the
pruning-free solution set.  A pruning edge {u, v} pins the distances of a
whole window of reflections: only generators w with w <= u+K or w > v keep
||x_v - x_u|| unchanged, so the subgroup generated by the surviving
vertices acts on the actual solution set, transitively for generic
distances.  Its order 2^l predicts the number of embeddings without any
search.

Chirality is the per-vertex record of which side of its predecessor
hyperplane a vertex lies on; it indexes branches of the search tree and
transforms under a partial reflection at v by flipping every sign from v
on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (DEFAULT_TOL, DegenerateCenters, ToleranceConfig,
                       hull_of, reflect_points)
from .instance import DgpInstance, partition_edges
from .solver import iter_discretization_blocks

PREFIX_LEVEL_LIMIT = 24  # refuse enumerations beyond 2^24 branches
ORBIT_LIMIT = 1 << 24


class DegenerateChirality(ValueError):
    """A vertex lies on its predecessor hyperplane within tolerance."""


@dataclass(frozen=True)
class PrefixDistanceSet:
    """Distinct values of ||x_v - x_u|| over all branch prefixes, after
    clustering numerically equal values."""

    u: int
    v: int
    values: np.ndarray
    multiplicities: np.ndarray

    @property
    def distinct_count(self) -> int:
        return len(self.values)


def suffix_flip_signs(n: int, v: int) -> np.ndarray:
    """Sign vector that is +1 before position v and -1 from v on (1-based)."""
    signs = np.ones(n, dtype=np.int8)
    signs[v - 1:] = -1
    return signs


def chirality(inst: DgpInstance, coords: np.ndarray,
              tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Per-vertex orientation signs of an embedding.

    Entry i (1-based vertex) is +1 for i <= K; for i > K it is the sign of
    the determinant of the frame (x_{i-K+1}-x_{i-K}, ..., x_i - x_{i-K}).
    Raises DegenerateChirality if any determinant is within
    tol.degeneracy of zero.
    """
    coords = np.asarray(coords, dtype=float)
    n, K = inst.n, inst.K
    if coords.shape != (n, K):
        raise ValueError(f"embedding shape {coords.shape} does not match "
                         f"instance (n={n}, K={K})")
    windows = np.lib.stride_tricks.sliding_window_view(coords, (K + 1, K))
    frames = windows[:, 0]                       # (n-K, K+1, K)
    diffs = frames[:, 1:] - frames[:, :1]
    dets = np.linalg.det(diffs)
    degenerate = np.abs(dets) <= tol.degeneracy
    if np.any(degenerate):
        bad = [int(i) for i in np.nonzero(degenerate)[0] + K + 1]
        raise DegenerateChirality(
            f"vertices {bad} lie on their predecessor hyperplane")
    signs = np.ones(n, dtype=np.int8)
    signs[K:] = np.where(dets > 0, 1, -1)
    return signs


def apply_partial_reflection(inst: DgpInstance, coords: np.ndarray, v: int,
                             tol: ToleranceConfig = DEFAULT_TOL
                             ) -> np.ndarray:
    """Mirror positions v..n through the hyperplane of x_{v-K}..x_{v-1}.

    Positions before v are untouched; the result keeps every
    discretization distance.  Applying the same reflection twice returns
    the original embedding.
    """
    coords = np.asarray(coords, dtype=float)
    n, K = inst.n, inst.K
    if not K + 1 <= v <= n:
        raise ValueError(f"reflection vertex must lie in [K+1, n], got {v}")
    hull = hull_of(coords[v - 1 - K:v - 1], tol)
    out = coords.copy()
    out[v - 1:] = reflect_points(hull, coords[v - 1:])
    return out


def apply_group_element(inst: DgpInstance, coords: np.ndarray, gens,
                        tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Apply the product of the partial reflections in `gens`.

    Generators are applied in increasing vertex order; since they commute,
    the element is order independent.  The empty set is the identity.
    """
    out = np.asarray(coords, dtype=float).copy()
    for v in sorted(set(gens)):
        out = apply_partial_reflection(inst, out, v, tol)
    return out


def pruning_group_generators(inst: DgpInstance,
                             paper_window: bool = False) -> list[int]:
    """Vertices whose partial reflection preserves every pruning distance.

    A pruning edge {u, v} rules out exactly the window [u+K+1, v]: the
    mirror of the reflection at u+K passes through x_u, so that reflection
    still preserves the distance.  `paper_window=True` selects the wider
    window [u+K, v] instead, for comparison; it drops u+K and undercounts.
    """
    K, n = inst.K, inst.n
    killed = np.zeros(n + 1, dtype=bool)
    for (u, v) in partition_edges(inst).pruning:
        lo = u + K if paper_window else u + K + 1
        killed[lo:v + 1] = True
    return [w for w in range(K + 1, n + 1) if not killed[w]]


def predicted_solution_count(inst: DgpInstance,
                             paper_window: bool = False) -> int:
    """Exponent l such that a generic YES instance has exactly 2^l
    embeddings extending its initial K vertices.

    Meaningless on NO instances, and the caller is responsible for
    genericity of the distances.
    """
    return len(pruning_group_generators(inst, paper_window))


def _chirality_key(signs: np.ndarray) -> tuple:
    return tuple(0 if s > 0 else 1 for s in signs)


def orbit(inst: DgpInstance, coords: np.ndarray, gens,
          tol: ToleranceConfig = DEFAULT_TOL,
          limit: int = ORBIT_LIMIT) -> list[np.ndarray]:
    """All images of `coords` under the group generated by `gens`.

    Enumerated in Gray-code order (one reflection per step), then returned
    sorted by chirality.  With probability 1 the 2^|gens| images are
    distinct.
    """
    gens = sorted(set(gens))
    if 2 ** len(gens) > limit:
        raise MemoryError(f"orbit of 2^{len(gens)} embeddings exceeds the "
                          f"limit {limit}")
    current = np.asarray(coords, dtype=float).copy()
    images = [current.copy()]
    for step in range(1, 2 ** len(gens)):
        # Gray code: toggle the generator indexed by the lowest set bit
        toggle = gens[(step & -step).bit_length() - 1]
        current = apply_partial_reflection(inst, current, toggle, tol)
        images.append(current.copy())
    keyed = [(_chirality_key(chirality(inst, img, tol)), img)
             for img in images]
    keyed.sort(key=lambda item: item[0])
    return [img for _, img in keyed]


def embedding_diameter(coords: np.ndarray) -> float:
    """Largest pairwise distance; the scale used for embedding comparisons."""
    coords = np.asarray(coords, dtype=float)
    diff = coords[:, None, :] - coords[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=2)).max())


def embeddings_close(a: np.ndarray, b: np.ndarray, rel: float = 1e-6,
                     scale: float | None = None) -> bool:
    """Equality of embeddings: max per-vertex deviation <= rel * scale."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if a.shape != b.shape:
        return False
    if scale is None:
        scale = max(embedding_diameter(a), 1.0)
    dev = np.linalg.norm(a - b, axis=1).max()
    return bool(dev <= rel * scale)


def prefix_distance_set(inst: DgpInstance, u: int, v: int,
                        tol: ToleranceConfig = DEFAULT_TOL
                        ) -> PrefixDistanceSet:
    """Cluster the distances ||x_v - x_u|| over all 2^(v-K) branch
    prefixes of the pruning-free subinstance.

    Generic instances produce exactly 2^(v-u-K) distinct values, each
    realized by 2^u prefixes.  Clustering is absolute with width
    tol.cluster_rel times the largest collected distance.
    """
    K = inst.K
    if not (v > K and 1 <= u < v - K and v <= inst.n):
        raise ValueError(f"need 1 <= u < v-K <= n-K, got u={u}, v={v}")
    if v - K > PREFIX_LEVEL_LIMIT:
        raise MemoryError(f"enumeration of 2^{v - K} prefixes refused "
                          f"(limit 2^{PREFIX_LEVEL_LIMIT})")
    collected = []
    for coords, _ in iter_discretization_blocks(inst, v, tol):
        collected.append(np.linalg.norm(coords[:, v - 1] - coords[:, u - 1],
                                        axis=1))
    dists = np.sort(np.concatenate(collected))
    width = tol.cluster_rel * max(float(dists[-1]), 1e-300)
    boundaries = np.nonzero(np.diff(dists) > width)[0] + 1
    groups = np.split(dists, boundaries)
    values = np.array([g.mean() for g in groups])
    mult = np.array([len(g) for g in groups], dtype=np.int64)
    return PrefixDistanceSet(u=u, v=v, values=values, multiplicities=mult)
