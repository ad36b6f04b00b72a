"""Exact-arithmetic invariant checks for the code sets and the tree."""

import itertools

import numpy as np

from .codes import (
    apply_pair_swaps,
    correlation_matrix,
    generate_overloaded_set,
    is_hadamard,
    min_correlation_bound,
    ovsf_matrix,
)
from .errors import OddExponent
from .tree import CodeTree, NodeAddress, blockwise_orthogonal, is_mother


def check_hadamard_identity(max_n=8):
    return all(is_hadamard(ovsf_matrix(n)) for n in range(max_n + 1))


def check_column_pair_swaps(max_n=4):
    for n in range(1, max_n + 1):
        h = ovsf_matrix(n).astype(np.int64)
        for a, b in itertools.combinations(range(2 ** n), 2):
            m = h.copy()
            m[:, [a, b]] = m[:, [b, a]]
            if not is_hadamard(m):
                return False
    return True


def check_swap_involution(max_n=4):
    for n in range(2, max_n + 1):
        h = ovsf_matrix(n)
        pairs = 2 ** (n - 1)
        for size in range(1, pairs):
            for mask in itertools.combinations(range(1, pairs + 1), size):
                for row in h:
                    if not np.array_equal(apply_pair_swaps(apply_pair_swaps(row, mask), mask), row):
                        return False
    return True


def check_extras_partition(sfs=(4, 8, 16, 32)):
    for sf in sfs:
        s = generate_overloaded_set(sf)
        if s.n_extras == 0:
            continue
        if np.any(correlation_matrix(s.extras, s.upper) != 0):
            return False
        if np.any(np.abs(correlation_matrix(s.extras, s.lower_base)).max(axis=1) == 0):
            return False
        if np.any(s.extras[:, 0] != 1):
            return False
    return True


def check_sf8_extras():
    s = generate_overloaded_set(8)
    c = correlation_matrix(s.extras, s.lower_base)
    mutual = correlation_matrix(s.extras)
    return (
        s.n_extras == 4
        and np.all(np.abs(c) == 4)
        and np.array_equal(mutual, 8 * np.eye(4, dtype=np.int64))
    )


def _all_sign_vectors(n_chips):
    idx = np.arange(2 ** n_chips)[:, None] >> np.arange(n_chips)
    return 1 - 2 * (idx & 1)


def check_correlation_bound():
    """The best max |corr| over all sequences equals sqrt(N) for N = 4, 16."""
    for n in (2, 4):
        h = ovsf_matrix(n).astype(np.int64)
        worst = np.abs(_all_sign_vectors(2 ** n) @ h.T).max(axis=1)
        if worst.min() != min_correlation_bound(2 ** n):
            return False
    try:
        min_correlation_bound(8)
    except OddExponent:
        return True
    return False


def check_tree_orthogonality(max_layer=5):
    """Numeric orthogonality equals the structural OVSF rule on variant-0 nodes,
    and every upper-half node is orthogonal to every extra."""
    for top in range(1, max_layer + 1):
        tree = CodeTree(top, "all" if top <= 5 else 0)
        nodes = [NodeAddress(l, i) for l in range(top + 1) for i in range(2 ** l)]
        codes = {n: tree.code_of(n) for n in nodes}
        for a, b in itertools.combinations(nodes, 2):
            numeric = blockwise_orthogonal(codes[a], codes[b])
            if numeric != (not is_mother(a, b)):
                return False
        extras = tree.extras.astype(np.int64)
        for n in nodes:
            if not tree.is_upper(n) or extras.shape[0] == 0:
                continue
            blocks = extras.reshape(extras.shape[0], -1, codes[n].size)
            if np.any(blocks @ codes[n].astype(np.int64) != 0):
                return False
    return True


CHECKS = [
    ("hadamard_identity", check_hadamard_identity),
    ("column_pair_swaps_preserve_hadamard", check_column_pair_swaps),
    ("pair_swap_involution", check_swap_involution),
    ("extras_partition_orthogonality", check_extras_partition),
    ("sf8_extras_oracle", check_sf8_extras),
    ("correlation_bound", check_correlation_bound),
    ("tree_orthogonality_bruteforce", check_tree_orthogonality),
]


def run_checks():
    """List of ``(name, passed)`` for every invariant."""
    return [(name, bool(fn())) for name, fn in CHECKS]
