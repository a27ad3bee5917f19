"""Predict search-tree widths from pruning edges alone, and classify
instances into the bounded-width cases that make the search polynomial.

A pruning edge {u, v'} pins the branch choices in the window
[u+K+1, v'] from level v' on: every node surviving level v' belongs to
the orbit of the true branch under the reflections whose vertex lies
outside all such windows.  The predicted node count at level v is
therefore 2^|T_v| with

    T_v = {w in (K, v] : no pruning edge {u, v'}, v' <= v,
                          has w in [u+K+1, v']}

which reproduces the full binary tree 2^(v-K) when no pruning edge
exists.  The prediction is exact on generic YES instances and is checked
against measured counts by crosscheck().
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import DEFAULT_TOL, ToleranceConfig
from .instance import DgpInstance, partition_edges
from .solver import solve

RUNTIME_LINEAR = "O(n)"
RUNTIME_QUADRATIC = "O(n^2)"
RUNTIME_EXPONENTIAL = "exponential-worst-case"


@dataclass
class WidthProfile:
    """Per-level node counts, predicted and optionally measured.

    Counts are Python ints because predicted widths reach 2^(n-K).
    """

    levels: list[int]
    predicted: list[int]
    measured: list[int] | None = None

    def csv(self) -> str:
        lines = ["level,predicted,measured"]
        measured = self.measured or [""] * len(self.levels)
        for lvl, pred, meas in zip(self.levels, self.predicted, measured):
            lines.append(f"{lvl},{pred},{meas}")
        return "\n".join(lines) + "\n"


@dataclass
class CaseClassification:
    """Which bounded-width hypothesis the pruning-edge set satisfies."""

    case: str                    # "Prop1" | "Prop2" | "Prop3" | "General"
    v0: int | None
    bound: int | None
    runtime_class: str

    def summary(self, K: int | None = None) -> str:
        if self.case == "General":
            return f"General runtime={self.runtime_class}"
        parts = [f"{self.case} v0={self.v0}"]
        if self.case in ("Prop1", "Prop2") and K is not None:
            parts.append(f"bound=2^{self.v0 - K}={self.bound}")
        else:
            parts.append(f"bound={self.bound}")
        parts.append(f"runtime={self.runtime_class}")
        return " ".join(parts)


@dataclass
class CrosscheckReport:
    """Predicted vs measured width per level from a full counting run."""

    profile: WidthProfile
    matches: list[bool]
    solution_count: int

    @property
    def all_match(self) -> bool:
        return all(self.matches)

    @property
    def no_instance(self) -> bool:
        """Measured tree collapsed: the instance has no embedding, so the
        YES-instance width prediction does not apply."""
        return self.solution_count == 0


def _kill_levels(inst: DgpInstance, paper_window: bool) -> np.ndarray:
    """kill[w] = earliest level at which the branch choice at w is pinned."""
    n, K = inst.n, inst.K
    kill = np.full(n + 1, np.iinfo(np.int64).max, dtype=np.int64)
    for (u, v) in partition_edges(inst).pruning:
        lo = u + K if paper_window else u + K + 1
        for w in range(lo, v + 1):
            kill[w] = min(kill[w], v)
    return kill


def predict_profile(inst: DgpInstance,
                    paper_window: bool = False) -> WidthProfile:
    """Predicted number of valid nodes at each level K+1..n."""
    n, K = inst.n, inst.K
    kill = _kill_levels(inst, paper_window)
    died_at = np.zeros(n + 1, dtype=np.int64)
    for w in range(K + 1, n + 1):
        if kill[w] <= n:
            died_at[kill[w]] += 1
    levels = list(range(K + 1, n + 1))
    predicted = []
    free = 0
    for v in levels:
        # each level contributes one new branch choice and pins every
        # choice whose earliest covering pruning edge ends here
        free += 1 - int(died_at[v])
        predicted.append(1 << free)
    return WidthProfile(levels=levels, predicted=predicted)


def _upper_endpoint_map(inst: DgpInstance) -> dict[int, list[int]]:
    """v -> spans of pruning edges having v as upper endpoint."""
    spans: dict[int, list[int]] = {}
    for (u, v) in partition_edges(inst).pruning:
        spans.setdefault(v, []).append(v - u)
    return spans


def _prop1_v0(inst: DgpInstance, spans: dict[int, list[int]]) -> int | None:
    n, K = inst.n, inst.K
    bad = [v for v in range(K + 2, n + 1) if len(spans.get(v, ())) != 1]
    v0 = max(bad, default=K + 1)
    v0 = max(v0, K + 1)
    return v0 if v0 <= n - 1 else None


def _prop2_v0(inst: DgpInstance, spans: dict[int, list[int]]) -> int | None:
    n, K = inst.n, inst.K
    for v0 in range(K + 1, n):
        ok = True
        run_start = None
        for v in list(range(v0 + 1, n + 1)) + [None]:
            in_run = v is not None and v not in spans
            if in_run and run_start is None:
                run_start = v
            if not in_run and run_start is not None:
                length = (n if v is None else v - 1) - run_start + 1
                bearer = max((w for w in spans if w < run_start),
                             default=None)
                # the kill window of the preceding edge must absorb the
                # run's doublings plus the bearer's own branch
                if bearer is None or max(spans[bearer]) < length + K + 1:
                    ok = False
                    break
                run_start = None
        if ok:
            return v0
    return None


def _prop3_v0(inst: DgpInstance, spans: dict[int, list[int]]) -> int | None:
    n, K = inst.n, inst.K
    for v0 in range(K + 1, n):
        constrained = [v for v in range(v0 + 1, n + 1) if v & (v - 1) != 0]
        if not constrained:
            continue
        if all(v in spans for v in constrained):
            return v0
    return None


def classify(inst: DgpInstance) -> CaseClassification:
    """Match the pruning-edge set against the bounded-width hypotheses.

    Scans v0 from K+1 upward and returns the first case that holds, in
    priority order Prop1 > Prop2 > Prop3; otherwise General.  Prop1: every
    vertex above v0 carries exactly one pruning edge.  Prop2: every
    maximal run of unpruned vertices above v0 is preceded by an edge whose
    span covers the run plus its own branch (span >= |run| + K + 1).
    Prop3: every vertex above v0 except exact powers of two carries a
    pruning edge.
    """
    K = inst.K
    spans = _upper_endpoint_map(inst)
    v0 = _prop1_v0(inst, spans)
    if v0 is not None:
        return CaseClassification("Prop1", v0, 1 << (v0 - K), RUNTIME_LINEAR)
    v0 = _prop2_v0(inst, spans)
    if v0 is not None:
        return CaseClassification("Prop2", v0, 1 << (v0 - K), RUNTIME_LINEAR)
    v0 = _prop3_v0(inst, spans)
    if v0 is not None:
        return CaseClassification("Prop3", v0, (1 << v0) * inst.n,
                                  RUNTIME_QUADRATIC)
    return CaseClassification("General", None, None, RUNTIME_EXPONENTIAL)


def crosscheck(inst: DgpInstance, tol: ToleranceConfig = DEFAULT_TOL,
               paper_window: bool = False, threads: int = 1
               ) -> CrosscheckReport:
    """Compare the predicted profile with exact counts from a full run.

    On generic YES instances every level matches exactly.  When the
    instance has no embedding the measured counts collapse to zero at some
    level and the report flags the divergence via `no_instance`.
    """
    profile = predict_profile(inst, paper_window)
    result = solve(inst, mode="count", tol=tol, threads=threads)
    profile.measured = [int(x) for x in result.stats.nodes_per_level]
    matches = [p == m for p, m in zip(profile.predicted, profile.measured)]
    return CrosscheckReport(profile=profile, matches=matches,
                            solution_count=result.count)
