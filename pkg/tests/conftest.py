"""Shared corpus builders for the test suite.

Everything is seeded, so test runs are reproducible bit for bit.
"""

import numpy as np
import pytest

from dmdgp import generate_random_yes, predicted_solution_count


def yes_corpus(count, K_values=(2, 3), densities=(0.15, 0.3, 0.5),
               n_max=20, seed0=0, max_exponent=10):
    """Deterministic random generic YES instances with mixed pruning.

    Instances whose predicted solution exponent exceeds max_exponent are
    skipped to keep enumeration cheap; the corpus still spans empty to
    dense pruning-edge sets.
    """
    out = []
    seed = seed0
    while len(out) < count:
        seed += 1
        K = K_values[seed % len(K_values)]
        n = K + 3 + seed % (n_max - K - 2)
        p = densities[seed % len(densities)]
        inst, truth = generate_random_yes(n, K, ("density", p),
                                          seed=seed0 * 100003 + seed)
        if predicted_solution_count(inst) > max_exponent:
            continue
        out.append((inst, truth))
    return out


@pytest.fixture(scope="session")
def small_corpus():
    return yes_corpus(24, seed0=11)
