import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from overcode.codes import (
    apply_pair_swaps,
    chip_key,
    correlation_matrix,
    cross_correlation,
    extra_candidates,
    format_code_set,
    generate_overloaded_set,
    is_hadamard,
    max_cross_correlation,
    min_correlation_bound,
    ovsf_matrix,
    parse_code_set,
    swap_candidates,
)
from overcode.errors import (
    CapacityExceeded,
    InvalidMask,
    LengthMismatch,
    NotSquare,
    OddExponent,
    SizeTooLarge,
)


def brute_force_extras(sf):
    """Independent enumeration: python lists, explicit swaps, tuple dedup."""
    h = ovsf_matrix(sf.bit_length() - 1).tolist()
    lower = h[sf // 2:]
    pairs = sf // 2
    seen = set()
    for row in h:
        seen.add(tuple(row))
        seen.add(tuple(-c for c in row))
    out = set()
    for row in lower:
        for size in range(1, pairs):
            for mask in itertools.combinations(range(pairs), size):
                s = list(row)
                for k in mask:
                    s[2 * k], s[2 * k + 1] = s[2 * k + 1], s[2 * k]
                if s[0] < 0:
                    s = [-c for c in s]
                if tuple(s) not in seen:
                    out.add(tuple(s))
    return out


def test_ovsf_small_cases():
    assert ovsf_matrix(0).tolist() == [[1]]
    assert ovsf_matrix(1).tolist() == [[1, 1], [1, -1]]
    assert ovsf_matrix(2).tolist() == [
        [1, 1, 1, 1],
        [1, 1, -1, -1],
        [1, -1, 1, -1],
        [1, -1, -1, 1],
    ]


def test_ovsf_rejects_large():
    with pytest.raises(SizeTooLarge):
        ovsf_matrix(17)


@pytest.mark.parametrize("n", range(9))
def test_ovsf_is_hadamard(n):
    assert is_hadamard(ovsf_matrix(n))


def test_cross_correlation_examples():
    h = ovsf_matrix(3)
    for r in h:
        assert cross_correlation(r, r) == 8
    assert cross_correlation(h[1], h[5]) == 0
    x = [-1, 1, 1, -1, 1, -1, 1, -1]
    y = [1, -1, 1, -1, 1, -1, 1, -1]
    assert cross_correlation(x, y) == 4
    with pytest.raises(LengthMismatch):
        cross_correlation([1, 1], [1, 1, 1, 1])


sequences = st.integers(1, 6).flatmap(
    lambda n: st.tuples(
        st.lists(st.sampled_from([1, -1]), min_size=2 ** n, max_size=2 ** n),
        st.lists(st.sampled_from([1, -1]), min_size=2 ** n, max_size=2 ** n),
    )
)


@given(sequences)
def test_cross_correlation_symmetry_and_negation(xy):
    x, y = xy
    c = cross_correlation(x, y)
    assert c == cross_correlation(y, x)
    assert cross_correlation([-v for v in x], y) == -c
    assert -len(x) <= c <= len(x)
    assert (c - len(x)) % 2 == 0


def test_is_hadamard_cases():
    h = ovsf_matrix(3).astype(int)
    assert is_hadamard(h)
    broken = h.copy()
    broken[2, 5] *= -1
    assert not is_hadamard(broken)
    swapped = h[:, [1, 0, 2, 3, 4, 5, 6, 7]]
    assert is_hadamard(swapped)
    with pytest.raises(NotSquare):
        is_hadamard(h[:4])


@settings(max_examples=50)
@given(st.integers(1, 6).flatmap(lambda n: st.tuples(
    st.just(n), st.integers(0, 2 ** n - 1), st.integers(0, 2 ** n - 1))))
def test_column_interchange_preserves_hadamard(args):
    n, a, b = args
    h = ovsf_matrix(n).astype(int)
    h[:, [a, b]] = h[:, [b, a]]
    assert is_hadamard(h)


def test_apply_pair_swaps_examples():
    seq = [1, -1, 1, -1, 1, -1, 1, -1]
    assert apply_pair_swaps(seq, {1}).tolist() == [-1, 1, 1, -1, 1, -1, 1, -1]
    h = ovsf_matrix(3)
    for row in h[:4]:
        for size in (1, 2, 3):
            for mask in itertools.combinations(range(1, 5), size):
                assert np.array_equal(apply_pair_swaps(row, mask), row)
    with pytest.raises(InvalidMask):
        apply_pair_swaps(seq, set())
    with pytest.raises(InvalidMask):
        apply_pair_swaps(seq, {1, 2, 3, 4})
    with pytest.raises(LengthMismatch):
        apply_pair_swaps(seq, {5})


@given(st.integers(2, 6).flatmap(lambda n: st.tuples(
    st.lists(st.sampled_from([1, -1]), min_size=2 ** n, max_size=2 ** n),
    st.sets(st.integers(1, 2 ** (n - 1)), min_size=1, max_size=2 ** (n - 1) - 1),
)))
def test_pair_swaps_involution(args):
    seq, mask = args
    assert apply_pair_swaps(apply_pair_swaps(seq, mask), mask).tolist() == seq


@pytest.mark.parametrize("sf", [4, 8, 16])
def test_vectorised_candidates_match_literal_swaps(sf):
    h = ovsf_matrix(sf.bit_length() - 1)
    lower = h[sf // 2:]
    fast = swap_candidates(lower)
    literal = []
    pairs = sf // 2
    for row in lower:
        for m in range(1, (1 << pairs) - 1):
            mask = [k + 1 for k in range(pairs) if m >> k & 1]
            literal.append(apply_pair_swaps(row, mask))
    assert np.array_equal(fast, np.array(literal))


@pytest.mark.parametrize("sf", [4, 8, 16])
def test_extras_match_brute_force(sf):
    got = {tuple(r) for r in extra_candidates(sf).tolist()}
    assert got == brute_force_extras(sf)


def test_sf4_has_no_extras():
    s = generate_overloaded_set(4)
    assert s.n_extras == 0
    with pytest.raises(CapacityExceeded):
        generate_overloaded_set(4, 1)


def test_sf8_oracle():
    s = generate_overloaded_set(8)
    assert s.n_extras == 4
    assert {tuple(r) for r in s.extras.tolist()} == brute_force_extras(8)
    assert np.all(np.abs(correlation_matrix(s.extras, s.lower_base)) == 4)
    assert np.all(correlation_matrix(s.extras, s.upper) == 0)
    assert np.array_equal(correlation_matrix(s.extras), 8 * np.eye(4, dtype=int))
    # catalog order: lexicographic with +1 < -1 (all scores tie at 4)
    assert s.extras[0].tolist() == [1, -1, 1, -1, 1, -1, -1, 1]
    with pytest.raises(CapacityExceeded):
        generate_overloaded_set(8, 6)


@pytest.mark.parametrize("sf", [4, 8, 16, 32])
def test_set_invariants(sf):
    s = generate_overloaded_set(sf)
    h = ovsf_matrix(sf.bit_length() - 1)
    assert np.array_equal(np.vstack([s.upper, s.lower_base]), h)
    if s.n_extras:
        assert np.all(correlation_matrix(s.extras, s.upper) == 0)
        assert np.all(np.abs(correlation_matrix(s.extras, s.lower_base)).max(axis=1) > 0)
        assert np.all(s.extras[:, 0] == 1)
        rows = s.rows()
        canon = np.where(rows[:, :1] < 0, -rows, rows)
        # no extra equals +-any other row
        assert np.unique(chip_key(canon)).size == rows.shape[0]


def test_extra_counts():
    assert [generate_overloaded_set(sf).n_extras for sf in (4, 8, 16)] == [0, 4, 120]


def test_greedy_selection_oracle():
    """Greedy picks reproduced by a direct python re-implementation."""
    sf, k = 16, 6
    s = generate_overloaded_set(sf, k)
    cands = sorted(brute_force_extras(sf), key=lambda r: [c < 0 for c in r])
    lower = ovsf_matrix(4)[8:].tolist()
    chosen = []
    for _ in range(k):
        def score(c):
            refs = lower + chosen
            return max(abs(sum(a * b for a, b in zip(c, r))) for r in refs)
        best = min((c for c in cands if list(c) not in chosen), key=score)
        chosen.append(list(best))
    assert s.extras.tolist() == chosen


def test_generation_is_deterministic():
    assert generate_overloaded_set(16) == generate_overloaded_set(16)
    assert generate_overloaded_set(16, 7) == generate_overloaded_set(16, 7)


def test_size_limits():
    with pytest.raises(SizeTooLarge):
        generate_overloaded_set(512)
    with pytest.raises(SizeTooLarge):
        generate_overloaded_set(64)
    assert generate_overloaded_set(64, 0).n_extras == 0


def test_max_cross_correlation():
    h = ovsf_matrix(3)
    assert max_cross_correlation(h[3], h) == 8
    e = generate_overloaded_set(8).extras[0]
    assert max_cross_correlation(e, h) == 4
    assert max_cross_correlation([1, 1, 1, -1], ovsf_matrix(2)) == 2
    with pytest.raises(LengthMismatch):
        max_cross_correlation([1, 1], h)


def test_min_correlation_bound():
    assert min_correlation_bound(16) == 4
    assert min_correlation_bound(4) == 2
    with pytest.raises(OddExponent):
        min_correlation_bound(8)


def test_text_format_roundtrip():
    s = generate_overloaded_set(8)
    text = format_code_set(s)
    lines = text.splitlines()
    assert lines[0] == "UPPER" and lines[5] == "LOWER_BASE" and lines[10] == "EXTRA"
    assert lines[1] == "++++++++"
    assert parse_code_set(text) == s
