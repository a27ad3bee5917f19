"""Independent brute-force references for the solver and the hardness
reduction.

These deliberately avoid the solver's pruning logic: embeddings are built
for every chirality sign choice and only then checked against all edges,
and subset-sum solutions come from plain sign enumeration.  Sizes are
capped because everything here is exponential by design.
"""

from __future__ import annotations

import numpy as np

from .geometry import DEFAULT_TOL, ToleranceConfig
from .instance import DgpInstance, _as_subset_sum
from .solver import Solution, iter_discretization_blocks

SUBSET_SUM_LIMIT = 24
REDUCTION_LIMIT = 14
BRUTE_FORCE_LIMIT = 20


def subset_sum_solutions(a, fix_first: bool = False) -> list[tuple[int, ...]]:
    """All sign vectors s in {-1, +1}^N with sum(s_i * a_i) = 0.

    With fix_first only vectors starting with +1 are returned (half of the
    total, since the solution set is closed under global negation).
    """
    ss = _as_subset_sum(a)
    n = len(ss)
    if n > SUBSET_SUM_LIMIT:
        raise MemoryError(f"refusing 2^{n} sign enumeration "
                          f"(limit N={SUBSET_SUM_LIMIT})")
    values = np.asarray(ss.values, dtype=np.int64)
    out: list[tuple[int, ...]] = []
    chunk = 1 << min(n, 20)
    for start in range(0, 1 << n, chunk):
        codes = np.arange(start, start + chunk, dtype=np.int64)
        bits = (codes[:, None] >> np.arange(n)[None, :]) & 1
        signs = 1 - 2 * bits  # bit 0 -> +1, bit 1 -> -1; bit j is s_{j+1}
        hits = np.nonzero(signs @ values == 0)[0]
        for i in hits:
            s = tuple(int(x) for x in signs[i])
            if not fix_first or s[0] == 1:
                out.append(s)
    return out


def reduction_count_oracle(a, K: int) -> int:
    """Expected number of embeddings of the reduced instance.

    Each coordinate axis of the reduction carries one independent sign
    sequence that must be a zero-sum solution.  The pinned start fixes the
    leading sign on the first K-1 axes (m choices each, counting
    solutions with s_1 = +1) while the last axis keeps both global signs
    (2m choices), so a solvable instance has 2 * m^K embeddings.
    """
    ss = _as_subset_sum(a)
    if K < 2:
        raise ValueError("the reduction needs K >= 2")
    if len(ss) > REDUCTION_LIMIT:
        raise MemoryError(f"refusing N={len(ss)} (limit {REDUCTION_LIMIT})")
    m = len(subset_sum_solutions(ss, fix_first=True))
    return 2 * m ** K if m else 0


def brute_force_embeddings(inst: DgpInstance,
                           tol: ToleranceConfig = DEFAULT_TOL
                           ) -> list[Solution]:
    """Every embedding of `inst`, found without pruning during search.

    Builds all 2^(n-K) branch prefixes of the discretization-only
    subinstance and keeps those whose full edge set verifies.  Output is
    sorted by chirality and matches the solver's mode="all" output on any
    instance, which makes this the solver's independent oracle.
    """
    if inst.n - inst.K > BRUTE_FORCE_LIMIT:
        raise MemoryError(f"refusing 2^{inst.n - inst.K} embeddings "
                          f"(limit 2^{BRUTE_FORCE_LIMIT})")
    survivors: list[Solution] = []
    pairs = sorted(inst.edges)
    us = np.array([u for u, _ in pairs], dtype=np.intp)
    vs = np.array([v for _, v in pairs], dtype=np.intp)
    ds = np.array([inst.edges[e] for e in pairs])
    thr = tol.prune_abs + tol.prune_rel * ds
    for coords, chir in iter_discretization_blocks(inst, inst.n, tol):
        diffs = coords[:, vs - 1, :] - coords[:, us - 1, :]
        residual = np.abs(np.linalg.norm(diffs, axis=2) - ds)
        ok = np.all(residual <= thr, axis=1)
        for row in np.nonzero(ok)[0]:
            survivors.append(Solution(chir[row].copy(), coords[row].copy()))
    return survivors
