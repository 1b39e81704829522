"""Jitted loops shared by the mutation tests and the acceptance suite."""

import numpy as np
from numba import njit

from permubench.mutation import apply_strength, draw_strength, is_noop


@njit(cache=True)
def bijectivity_failures(state, n, op, kind, lam, cdf, plus_one, calls):
    """Mutate one running word ``calls`` times; count outputs that are not bijections."""
    word = np.arange(n)
    inv = np.arange(n)
    mask = np.zeros(n, np.bool_)
    buf = np.empty(n, np.int64)
    seen = np.zeros(n, np.bool_)
    bad = 0
    for _ in range(calls):
        k = draw_strength(state, op, kind, lam, cdf, plus_one, n)
        if not is_noop(op, k):
            apply_strength(state, op, k, word, inv, mask, buf)
        seen[:] = False
        ok = True
        for i in range(n):
            v = word[i]
            if v < 0 or v >= n or seen[v] or inv[v] != i:
                ok = False
                break
            seen[v] = True
        if not ok:
            bad += 1
    return bad
