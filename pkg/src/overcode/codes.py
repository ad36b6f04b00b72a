"""OVSF/Hadamard matrices and partly overloaded spreading sets.

Chip sequences are 1-D integer arrays of +1/-1. All correlation arithmetic is
done in int64, never in floating point.
"""

from dataclasses import dataclass

import numpy as np

from ._accel import njit
from .errors import (
    CapacityExceeded,
    InvalidMask,
    LengthMismatch,
    NotSquare,
    OddExponent,
    SizeTooLarge,
)

MAX_MATRIX_EXPONENT = 16
MAX_SET_EXPONENT = 8
# 2^(sf/2) swap masks per lower row; beyond sf=32 exhaustive enumeration is infeasible
MAX_ENUM_EXPONENT = 5


def _as_chips(seq):
    a = np.asarray(seq, dtype=np.int64)
    if a.ndim != 1:
        raise ValueError("chip sequence must be one-dimensional")
    return a


def is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


def log2_exact(n):
    if not is_power_of_two(int(n)):
        raise ValueError(f"{n} is not a power of two")
    return int(n).bit_length() - 1


def ovsf_matrix(n):
    """Return the ``2**n x 2**n`` OVSF matrix, rows in recursion order.

    ``H_1 = (1)``; ``H_2N`` stacks ``H_N (x) (1, 1)`` on top of
    ``H_N (x) (1, -1)``.
    """
    if n < 0:
        raise ValueError("exponent must be nonnegative")
    if n > MAX_MATRIX_EXPONENT:
        raise SizeTooLarge(f"2**{n} exceeds the matrix size budget (n <= {MAX_MATRIX_EXPONENT})")
    h = np.ones((1, 1), dtype=np.int8)
    plus = np.array([1, 1], dtype=np.int8)
    minus = np.array([1, -1], dtype=np.int8)
    for _ in range(n):
        h = np.vstack([np.kron(h, plus), np.kron(h, minus)])
    return h


def cross_correlation(x, y):
    """Synchronous cross-correlation ``sum_v x(v) * y(v)`` as an exact int."""
    x = _as_chips(x)
    y = _as_chips(y)
    if x.shape != y.shape:
        raise LengthMismatch(f"lengths differ: {x.size} vs {y.size}")
    return int(np.dot(x, y))


def correlation_matrix(rows_a, rows_b=None):
    a = np.asarray(rows_a, dtype=np.int64)
    b = a if rows_b is None else np.asarray(rows_b, dtype=np.int64)
    if a.shape[1] != b.shape[1]:
        raise LengthMismatch("row lengths differ")
    return a @ b.T


def is_hadamard(m):
    """Exact check of ``M M^T = M^T M = N I``."""
    m = np.asarray(m, dtype=np.int64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSquare(f"shape {m.shape} is not square")
    n = m.shape[0]
    if not np.all(np.abs(m) == 1):
        return False
    eye = n * np.eye(n, dtype=np.int64)
    return bool(np.array_equal(m @ m.T, eye) and np.array_equal(m.T @ m, eye))


def validate_mask(mask, n_pairs):
    """Normalise a swap mask to a sorted tuple of 1-based pair indices."""
    pairs = sorted({int(k) for k in mask})
    if not pairs:
        raise InvalidMask("swap mask is empty")
    if pairs[0] < 1 or pairs[-1] > n_pairs:
        raise LengthMismatch(f"pair index outside 1..{n_pairs}")
    if len(pairs) == n_pairs:
        raise InvalidMask("swap mask covers every pair")
    return tuple(pairs)


def apply_pair_swaps(seq, mask):
    """Exchange chips ``2k-1`` and ``2k`` (1-based) for every ``k`` in ``mask``."""
    seq = _as_chips(seq)
    if seq.size % 2:
        raise LengthMismatch("sequence length must be even")
    pairs = validate_mask(mask, seq.size // 2)
    out = seq.copy()
    for k in pairs:
        i = 2 * (k - 1)
        out[i], out[i + 1] = seq[i + 1], seq[i]
    return out


def canonical_sign(seq):
    seq = _as_chips(seq)
    return -seq if seq[0] < 0 else seq


def chip_key(rows):
    """Integer key per row: chip -1 is bit 1, first chip most significant.

    Ascending keys order sign-canonical rows lexicographically with +1 < -1.
    Only valid for rows of at most 63 chips.
    """
    rows = np.atleast_2d(np.asarray(rows))
    n = rows.shape[1]
    weights = np.left_shift(np.int64(1), np.arange(n - 1, -1, -1, dtype=np.int64))
    return ((rows < 0).astype(np.int64) * weights).sum(axis=1)


@dataclass(frozen=True, eq=False)
class OverloadedCodeSet:
    sf: int
    upper: np.ndarray
    lower_base: np.ndarray
    extras: np.ndarray

    @property
    def n_extras(self):
        return int(self.extras.shape[0])

    @property
    def base(self):
        return np.vstack([self.upper, self.lower_base])

    def rows(self):
        """All sequences: upper, then lower base, then extras."""
        return np.vstack([self.upper, self.lower_base, self.extras])

    def to_text(self):
        return format_code_set(self)

    def __eq__(self, other):
        if not isinstance(other, OverloadedCodeSet):
            return NotImplemented
        return (
            self.sf == other.sf
            and np.array_equal(self.upper, other.upper)
            and np.array_equal(self.lower_base, other.lower_base)
            and np.array_equal(self.extras, other.extras)
        )


def _check_set_sf(sf):
    n = log2_exact(sf)
    if n < 2:
        raise ValueError("spreading factor must be at least 4")
    if n > MAX_SET_EXPONENT:
        raise SizeTooLarge(f"sf={sf} exceeds the supported range (sf <= {2 ** MAX_SET_EXPONENT})")
    return n


def swap_candidates(lower_base):
    """Every ``apply_pair_swaps(l, S)`` for lower row ``l`` and valid mask ``S``.

    Returns an array of shape ``(rows * masks, sf)``; masks run over the
    integers ``1 .. 2**(sf/2) - 2`` with bit ``k`` selecting pair ``k + 1``.
    """
    lower = np.asarray(lower_base, dtype=np.int8)
    sf = lower.shape[1]
    m = sf // 2
    masks = np.arange(1, (1 << m) - 1, dtype=np.int64)
    sel = ((masks[:, None] >> np.arange(m)) & 1).astype(bool)  # (masks, m)
    pairs = lower.reshape(lower.shape[0], 1, m, 2)
    swapped = np.where(sel[None, :, :, None], pairs[..., ::-1], pairs)
    return swapped.reshape(-1, sf)


def extra_candidates(sf):
    """Distinct sign-canonical swap candidates not equal to +-any OVSF row.

    Sorted lexicographically (+1 < -1).
    """
    n = _check_set_sf(sf)
    if n > MAX_ENUM_EXPONENT:
        raise SizeTooLarge(
            f"exhaustive swap enumeration for sf={sf} needs 2**{sf // 2} masks per row"
        )
    h = ovsf_matrix(n)
    cand = swap_candidates(h[sf // 2:])
    cand = np.where(cand[:, :1] < 0, -cand, cand)
    keys, first = np.unique(chip_key(cand), return_index=True)
    base = np.where(h[:, :1] < 0, -h, h)
    keep = ~np.isin(keys, chip_key(base))
    return cand[first[keep]].astype(np.int8)


@njit(cache=True)
def _greedy_order(scores, cand, k):
    """Pick ``k`` rows, each minimising its running max |corr|.

    ``cand`` is sorted by tie-break key, so the first minimum wins ties.
    """
    n, sf = cand.shape
    score = scores.copy()
    taken = np.zeros(n, dtype=np.bool_)
    order = np.empty(k, dtype=np.int64)
    for step in range(k):
        best = -1
        for i in range(n):
            if not taken[i] and (best < 0 or score[i] < score[best]):
                best = i
        order[step] = best
        taken[best] = True
        for i in range(n):
            if not taken[i]:
                c = 0
                for v in range(sf):
                    c += cand[i, v] * cand[best, v]
                if c < 0:
                    c = -c
                if c > score[i]:
                    score[i] = c
    return order


def generate_overloaded_set(sf, n_extra="all"):
    """Build the partly overloaded set for spreading factor ``sf``.

    ``n_extra="all"`` keeps every distinct candidate, ordered by worst-case
    correlation against the lower base and then lexicographically. A smaller
    count is chosen greedily against lower base plus already-chosen extras.
    """
    n = _check_set_sf(sf)
    h = ovsf_matrix(n)
    upper, lower = h[: sf // 2], h[sf // 2:]
    if n_extra == "all" or n_extra != 0:
        cand = extra_candidates(sf)
    else:
        cand = np.empty((0, sf), dtype=np.int8)
    available = cand.shape[0]
    if n_extra == "all":
        k = available
    else:
        k = int(n_extra)
        if k < 0:
            raise ValueError("n_extra must be nonnegative or 'all'")
        if k > available:
            raise CapacityExceeded(f"sf={sf} has {available} distinct extras, {k} requested")
    c64 = cand.astype(np.int64)
    scores = np.abs(c64 @ lower.astype(np.int64).T).max(axis=1) if available else np.zeros(0, np.int64)
    if k == available:
        order = np.lexsort((chip_key(cand) if available else np.zeros(0, np.int64), scores))
    else:
        order = _greedy_order(scores, c64, k)
    extras = cand[order].astype(np.int8).reshape(-1, sf)
    return OverloadedCodeSet(sf=sf, upper=upper, lower_base=lower, extras=extras)


def max_cross_correlation(f, h):
    """Worst |correlation| of ``f`` against every row of ``h`` and its negation."""
    f = _as_chips(f)
    h = np.asarray(h, dtype=np.int64)
    if h.ndim != 2 or h.shape[1] != f.size:
        raise LengthMismatch(f"sequence length {f.size} does not match matrix {h.shape}")
    return int(np.abs(h @ f).max())


def min_correlation_bound(n_chips):
    """Lower bound ``2**(n/2) = sqrt(N)`` on the max correlation, for even ``n``."""
    n = log2_exact(n_chips)
    if n % 2:
        raise OddExponent(f"N=2**{n}: the bound holds only for even exponents")
    return 2 ** (n // 2)


_SECTIONS = ("UPPER", "LOWER_BASE", "EXTRA")


def _row_text(row):
    return "".join("+" if c > 0 else "-" for c in row)


def format_code_set(code_set):
    lines = []
    for name, rows in zip(_SECTIONS, (code_set.upper, code_set.lower_base, code_set.extras)):
        lines.append(name)
        lines.extend(_row_text(r) for r in rows)
    return "\n".join(lines) + "\n"


def parse_code_set(text):
    """Inverse of :func:`format_code_set`."""
    sections = {name: [] for name in _SECTIONS}
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line in sections:
            current = line
            continue
        if current is None or set(line) - {"+", "-"}:
            raise ValueError(f"malformed code set line: {raw!r}")
        sections[current].append([1 if ch == "+" else -1 for ch in line])
    widths = {len(r) for rows in sections.values() for r in rows}
    if len(widths) != 1:
        raise LengthMismatch("code set rows have inconsistent lengths")
    sf = widths.pop()

    def arr(rows):
        return np.array(rows, dtype=np.int8).reshape(-1, sf)

    return OverloadedCodeSet(
        sf=sf,
        upper=arr(sections["UPPER"]),
        lower_base=arr(sections["LOWER_BASE"]),
        extras=arr(sections["EXTRA"]),
    )
