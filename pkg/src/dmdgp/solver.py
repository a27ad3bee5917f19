"""Branch-and-prune search over the discrete embedding tree.

Vertices K+1..n are placed one per level at one of the at most two
intersection points of the K spheres centered at their immediate
predecessors; candidates are then filtered against every pruning edge
reaching the level.  Mode "first" stops at the first full embedding,
"all" returns every embedding extending the pinned start, "count" returns
the cardinality without storing coordinates.

Two engines share the same geometry kernel and produce identical results:

* an iterative depth-first stack (mode "first" and the reference path),
* a blocked frontier sweep that advances whole groups of sibling subtrees
  through vectorized sphere intersections, visiting blocks depth-first so
  memory stays bounded and solutions still come out in chirality order.

Within a node, the candidate on the positive side of the predecessors'
hyperplane is explored first, so solutions are emitted in lexicographic
chirality order (+1 before -1) and the branch choice at each level equals
the chirality sign of the placed vertex.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .geometry import DEFAULT_TOL, ToleranceConfig, intersect_batch
from .instance import DgpInstance, ValidationReport, validate

SOLUTION_LIMIT = 1 << 24

_MODES = ("first", "all", "count")


class SolutionLimitExceeded(RuntimeError):
    """Refused to materialize more solutions than the configured limit."""


class InvalidInstanceError(ValueError):
    """The instance failed axiom validation before solving."""

    def __init__(self, report: ValidationReport):
        super().__init__(f"instance failed validation: {report.summary()}")
        self.report = report


@dataclass
class Solution:
    """One embedding: per-vertex chirality signs plus an (n, K) coordinate
    matrix."""

    chirality: np.ndarray
    coords: np.ndarray

    @property
    def chirality_string(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.chirality)

    def sort_key(self) -> tuple:
        return tuple(0 if s > 0 else 1 for s in self.chirality)


@dataclass
class SearchStats:
    """Exact per-level accounting of the explored tree.

    nodes_per_level[i] counts the surviving (valid) nodes at levels[i];
    pruned_per_level[i] counts the candidate points rejected there by
    pruning-edge checks.  In mode "first" the counts cover only the part
    of the tree visited before the stop.
    """

    levels: np.ndarray
    nodes_per_level: np.ndarray
    pruned_per_level: np.ndarray
    solutions_found: int
    wall_time: float


@dataclass
class SolveResult:
    solutions: list[Solution]
    count: int
    stats: SearchStats


@dataclass
class VerificationReport:
    """Edges whose realized distance misses the requirement, with the
    largest residual seen over all edges."""

    violations: list[tuple[int, int, float, float]]
    max_residual: float

    @property
    def ok(self) -> bool:
        return not self.violations


# ---------------------------------------------------------------------------
# shared per-level tables

def _level_tables(inst: DgpInstance, tol: ToleranceConfig, last_level: int,
                  with_pruning: bool = True):
    K = inst.K
    radii = {v: np.empty(K) for v in range(K + 1, last_level + 1)}
    for v in radii:
        for j, u in enumerate(range(v - K, v)):
            radii[v][j] = inst.distance(u, v)
    prune: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    if with_pruning:
        buckets: dict[int, list[tuple[int, float]]] = {}
        for (u, v), d in inst.edges.items():
            if v - u > K and v <= last_level:
                buckets.setdefault(v, []).append((u, d))
        for v, pairs in buckets.items():
            pairs.sort()
            us = np.array([u - 1 for u, _ in pairs], dtype=np.intp)
            ds = np.array([d for _, d in pairs])
            prune[v] = (us, ds, tol.prune_abs + tol.prune_rel * ds)
    return radii, prune


class _Counts:
    __slots__ = ("nodes", "pruned", "total")

    def __init__(self, n: int):
        self.nodes = np.zeros(n + 1, dtype=np.int64)
        self.pruned = np.zeros(n + 1, dtype=np.int64)
        self.total = 0

    def merge(self, other: "_Counts") -> None:
        self.nodes += other.nodes
        self.pruned += other.pruned
        self.total += other.total


# ---------------------------------------------------------------------------
# depth-first engine

def _dfs_children(coords, v, K, radii_v, prune_v, tol, counts):
    centers = coords[v - 1 - K:v - 1]
    points, kind = intersect_batch(centers[None], radii_v[None], tol)
    k = int(kind[0])
    if k == 0:
        return []
    kids = [(v, points[0, 0], 1)]
    if k == 2:
        kids.append((v, points[0, 1], -1))
    if prune_v is not None:
        us, ds, thr = prune_v
        kept = []
        for kid in kids:
            dist = np.linalg.norm(kid[1] - coords[us], axis=1)
            if np.all(np.abs(dist - ds) <= thr):
                kept.append(kid)
            else:
                counts.pruned[v] += 1
        kids = kept
    return kids


def _solve_dfs(inst, mode, tol, tables, counts, limit, collect):
    n, K = inst.n, inst.K
    radii, prune = tables
    coords = np.empty((n, K))
    coords[:K] = inst.initial
    chir = np.ones(n, dtype=np.int8)
    solutions: list[Solution] = []

    v0 = K + 1
    stack = _dfs_children(coords, v0, K, radii[v0], prune.get(v0), tol,
                          counts)[::-1]
    while stack:
        v, point, sign = stack.pop()
        coords[v - 1] = point
        chir[v - 1] = sign
        counts.nodes[v] += 1
        if v == n:
            counts.total += 1
            if collect:
                if counts.total > limit:
                    raise SolutionLimitExceeded(
                        f"more than {limit} solutions; raise the limit or "
                        f"use mode='count'")
                solutions.append(Solution(chir.copy(), coords.copy()))
            if mode == "first":
                break
        else:
            kids = _dfs_children(coords, v + 1, K, radii[v + 1],
                                 prune.get(v + 1), tol, counts)
            stack.extend(reversed(kids))
    return solutions


# ---------------------------------------------------------------------------
# blocked frontier sweep

def _advance_block(coords, chir, v, K, radii_v, prune_v, tol, counts):
    """Grow every row of an (m, v-1, K) prefix block by one level."""
    m = coords.shape[0]
    centers = coords[:, v - 1 - K:v - 1, :]
    points, kind = intersect_batch(centers, radii_v, tol)
    nchild = (kind >= 1).astype(np.intp) + (kind == 2).astype(np.intp)
    total = int(nchild.sum())
    if total == 0:
        return None
    parent = np.repeat(np.arange(m), nchild)
    first = np.repeat(np.cumsum(nchild) - nchild, nchild)
    slot = np.arange(total) - first  # 0: positive-side child, 1: mirror
    child = points[parent, slot]
    sign = np.where(slot == 0, 1, -1).astype(np.int8)

    if prune_v is not None:
        us, ds, thr = prune_v
        anchors = coords[parent[:, None], us[None, :]]
        dist = np.linalg.norm(child[:, None, :] - anchors, axis=2)
        ok = np.all(np.abs(dist - ds) <= thr, axis=1)
        kept = int(ok.sum())
    else:
        ok = slice(None)
        kept = total
    counts.nodes[v] += kept
    counts.pruned[v] += total - kept
    if kept == 0:
        return None
    keep_parent = parent[ok]
    new_coords = np.concatenate(
        [coords[keep_parent], child[ok][:, None, :]], axis=1)
    new_chir = np.concatenate([chir[keep_parent], sign[ok][:, None]], axis=1)
    return new_coords, new_chir


def _row_cap(n: int, K: int) -> int:
    # bound block memory to roughly 2^25 floats regardless of n and K
    return max(2, min(1 << 18, (1 << 25) // max(1, n * K)))


def _drain(stack, inst, last_level, tables, tol, counts, cap, emit):
    """Process pending blocks depth-first; emit(coords, chir) is called on
    every block that reaches last_level, in chirality order."""
    K = inst.K
    radii, prune = tables
    while stack:
        level, coords, chir = stack.pop()
        if level == last_level:
            emit(coords, chir)
            continue
        v = level + 1
        grown = _advance_block(coords, chir, v, K, radii[v], prune.get(v),
                               tol, counts)
        if grown is None:
            continue
        new_coords, new_chir = grown
        rows = new_coords.shape[0]
        if rows > cap:
            half = rows // 2
            stack.append((v, new_coords[half:], new_chir[half:]))
            stack.append((v, new_coords[:half], new_chir[:half]))
        else:
            stack.append((v, new_coords, new_chir))


def _root_block(inst):
    coords = inst.initial[None, :, :].copy()
    chir = np.ones((1, inst.K), dtype=np.int8)
    return inst.K, coords, chir


def _make_emitter(counts, collect, limit, solutions):
    def emit(coords, chir):
        counts.total += coords.shape[0]
        if collect:
            if counts.total > limit:
                raise SolutionLimitExceeded(
                    f"more than {limit} solutions; raise the limit or use "
                    f"mode='count'")
            for row in range(coords.shape[0]):
                solutions.append(Solution(chir[row].copy(),
                                          coords[row].copy()))
    return emit


def _solve_sweep(inst, tol, tables, counts, limit, collect, threads):
    n, K = inst.n, inst.K
    cap = _row_cap(n, K)
    solutions: list[Solution] = []
    emit = _make_emitter(counts, collect, limit, solutions)

    if threads <= 1:
        _drain([_root_block(inst)], inst, n, tables, tol, counts, cap, emit)
        return solutions

    # Advance a shared frontier until it is wide enough to split, then hand
    # each worker a contiguous chunk of rows.  Chunk order equals chirality
    # order, so stitching results back by chunk index keeps the output
    # independent of the completion schedule.
    radii, prune = tables
    level, coords, chir = _root_block(inst)
    while level < n and coords.shape[0] < threads:
        v = level + 1
        grown = _advance_block(coords, chir, v, K, radii[v], prune.get(v),
                               tol, counts)
        if grown is None:
            return solutions
        coords, chir = grown
        level = v
    if level == n:
        emit(coords, chir)
        return solutions

    bounds = np.linspace(0, coords.shape[0], threads + 1).astype(int)
    tasks = [(level, coords[a:b], chir[a:b])
             for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

    def run_chunk(seed):
        local = _Counts(n)
        local_solutions: list[Solution] = []

        def local_emit(c, s):
            local.total += c.shape[0]
            if collect:
                for r in range(c.shape[0]):
                    local_solutions.append(Solution(s[r].copy(),
                                                    c[r].copy()))

        _drain([seed], inst, n, tables, tol, local, cap, local_emit)
        return local, local_solutions

    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(run_chunk, tasks))
    for local, local_solutions in results:
        counts.merge(local)
        if collect and counts.total > limit:
            raise SolutionLimitExceeded(
                f"more than {limit} solutions; raise the limit or use "
                f"mode='count'")
        solutions.extend(local_solutions)
    return solutions


# ---------------------------------------------------------------------------
# public API

def solve(inst: DgpInstance, mode: str = "all",
          tol: ToleranceConfig = DEFAULT_TOL, check: bool = True,
          engine: str | None = None, threads: int = 1,
          solution_limit: int = SOLUTION_LIMIT) -> SolveResult:
    """Enumerate embeddings of `inst` extending its initial embedding.

    Parameters
    ----------
    inst : DgpInstance
    mode : "first" | "all" | "count"
    tol : ToleranceConfig
        prune_abs/prune_rel control the pruning-edge acceptance band.
    check : bool
        Validate the instance axioms first and raise InvalidInstanceError
        on failure.
    engine : None | "dfs" | "sweep"
        None picks the depth-first stack for "first" and the blocked sweep
        otherwise.  "dfs" forces the reference single-node engine.
    threads : int
        Subtree parallelism for "all"/"count"; output is canonically
        ordered regardless.  Single-threaded is the reference behavior.
    solution_limit : int
        Hard cap on materialized solutions in mode "all".

    Returns
    -------
    SolveResult with solutions (empty in mode "count"), the exact count,
    and per-level SearchStats.  An empty solution set is a NO answer, not
    an error.
    """
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}")
    if check:
        report = validate(inst, tol)
        if not report.passed:
            raise InvalidInstanceError(report)
    if engine is None:
        engine = "dfs" if mode == "first" else "sweep"
    if engine not in ("dfs", "sweep"):
        raise ValueError("engine must be None, 'dfs' or 'sweep'")

    n, K = inst.n, inst.K
    tables = _level_tables(inst, tol, n)
    counts = _Counts(n)
    collect = mode in ("first", "all")
    started = time.perf_counter()
    if engine == "dfs" or mode == "first":
        solutions = _solve_dfs(inst, mode, tol, tables, counts,
                               solution_limit, collect)
    else:
        solutions = _solve_sweep(inst, tol, tables, counts, solution_limit,
                                 collect, threads)
    elapsed = time.perf_counter() - started

    stats = SearchStats(
        levels=np.arange(K + 1, n + 1),
        nodes_per_level=counts.nodes[K + 1:n + 1].copy(),
        pruned_per_level=counts.pruned[K + 1:n + 1].copy(),
        solutions_found=counts.total,
        wall_time=elapsed,
    )
    return SolveResult(solutions=solutions, count=counts.total, stats=stats)


def verify_embedding(inst: DgpInstance, coords: np.ndarray,
                     tol: ToleranceConfig = DEFAULT_TOL) -> VerificationReport:
    """Check every edge of `inst` against an (n, K) coordinate matrix.

    An edge is violated when its residual exceeds
    tol.prune_abs + tol.prune_rel * d.  The embedding is feasible iff the
    violation list is empty.
    """
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (inst.n, inst.K):
        raise ValueError(f"embedding shape {coords.shape} does not match "
                         f"instance (n={inst.n}, K={inst.K})")
    pairs = sorted(inst.edges)
    us = np.array([u for u, _ in pairs], dtype=np.intp)
    vs = np.array([v for _, v in pairs], dtype=np.intp)
    ds = np.array([inst.edges[e] for e in pairs])
    measured = np.linalg.norm(coords[vs - 1] - coords[us - 1], axis=1)
    residual = np.abs(measured - ds)
    bad = residual > tol.prune_abs + tol.prune_rel * ds
    violations = [(int(us[i]), int(vs[i]), float(ds[i]), float(measured[i]))
                  for i in np.nonzero(bad)[0]]
    return VerificationReport(violations=violations,
                              max_residual=float(residual.max(initial=0.0)))


def iter_discretization_blocks(inst: DgpInstance, level: int,
                               tol: ToleranceConfig = DEFAULT_TOL,
                               cap: int | None = None):
    """Yield (coords, chirality) blocks covering all branch prefixes of the
    pruning-free subinstance, truncated at `level`, in chirality order.

    coords blocks have shape (m, level, K).  Used for prefix-distance
    enumeration and the brute-force oracle; pruning edges are ignored.
    """
    if not inst.K <= level <= inst.n:
        raise ValueError(f"level must lie in [K, n], got {level}")
    tables = _level_tables(inst, tol, level, with_pruning=False)
    counts = _Counts(inst.n)
    cap = cap or _row_cap(level, inst.K)

    stack = [_root_block(inst)]
    K = inst.K
    radii, _ = tables
    while stack:
        lvl, coords, chir = stack.pop()
        if lvl == level:
            yield coords, chir
            continue
        v = lvl + 1
        grown = _advance_block(coords, chir, v, K, radii[v], None, tol,
                               counts)
        if grown is None:
            continue
        new_coords, new_chir = grown
        if new_coords.shape[0] > cap:
            half = new_coords.shape[0] // 2
            stack.append((v, new_coords[half:], new_chir[half:]))
            stack.append((v, new_coords[:half], new_chir[:half]))
        else:
            stack.append((v, new_coords, new_chir))


# ---------------------------------------------------------------------------
# text formats

def format_solutions(solutions: list[Solution]) -> str:
    """Render solutions as SOL/X blocks.

    SOL <index> <chirality string of +/->
    X <vertex> <c1> ... <cK>
    """
    lines = []
    for i, sol in enumerate(solutions, start=1):
        lines.append(f"SOL {i} {sol.chirality_string}")
        for v in range(1, sol.coords.shape[0] + 1):
            coords = " ".join(f"{c:.17g}" for c in sol.coords[v - 1])
            lines.append(f"X {v} {coords}")
    return "\n".join(lines) + ("\n" if lines else "")


def write_solutions(path, solutions: list[Solution]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_solutions(solutions))


def parse_solutions(text: str) -> list[Solution]:
    solutions: list[Solution] = []
    chir: np.ndarray | None = None
    rows: list[tuple[int, list[float]]] = []

    def flush():
        nonlocal chir, rows
        if chir is None:
            return
        if not rows:
            raise ValueError("SOL block without X lines")
        rows.sort()
        coords = np.array([r[1] for r in rows])
        if len(rows) != len(chir):
            raise ValueError("chirality length does not match vertex count")
        solutions.append(Solution(chir.copy(), coords))
        chir, rows = None, []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "SOL":
            flush()
            signs = tokens[2]
            if set(signs) - {"+", "-"}:
                raise ValueError(f"line {lineno}: bad chirality string")
            chir = np.array([1 if c == "+" else -1 for c in signs],
                            dtype=np.int8)
        elif tokens[0] == "X":
            if chir is None:
                raise ValueError(f"line {lineno}: X before SOL")
            rows.append((int(tokens[1]), [float(t) for t in tokens[2:]]))
        else:
            raise ValueError(f"line {lineno}: unknown record {tokens[0]!r}")
    flush()
    return solutions


def read_solutions(path) -> list[Solution]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_solutions(fh.read())


def stats_csv(stats: SearchStats) -> str:
    lines = ["level,nodes,pruned"]
    for lvl, nodes, pruned in zip(stats.levels, stats.nodes_per_level,
                                  stats.pruned_per_level):
        lines.append(f"{lvl},{nodes},{pruned}")
    return "\n".join(lines) + "\n"
