import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from overcode import fec as fec_mod
from overcode.codes import cross_correlation, generate_overloaded_set, ovsf_matrix
from overcode.errors import EmptyCode, EmptyList, LengthMismatch, MalformedLength, OddBitCount
from overcode.phy import (
    ChannelConfig,
    Fec,
    Modulation,
    SnrReference,
    awgn,
    demodulate,
    despread,
    fec_decode,
    fec_encode,
    modulate,
    spread,
    superpose,
)
from overcode.rng import CounterStream

S = 1 / math.sqrt(2)


def reference_encoder(bits):
    """Polynomial convolution over GF(2), written independently of the trellis tables."""
    g0 = [int(c) for c in format(0o133, "07b")]
    g1 = [int(c) for c in format(0o171, "07b")]
    u = list(bits) + [0] * 6
    out = []
    for t in range(len(u)):
        window = [u[t - d] if t - d >= 0 else 0 for d in range(7)]
        out.append(sum(a * b for a, b in zip(g0, window)) % 2)
        out.append(sum(a * b for a, b in zip(g1, window)) % 2)
    return out


def test_modulate_examples():
    assert modulate([0, 1], "bpsk").tolist() == [1, -1]
    assert modulate([0, 0], "qpsk")[0] == pytest.approx((1 + 1j) * S)
    qpsk = modulate([0, 0, 0, 1, 1, 1, 1, 0], Modulation.QPSK)
    assert np.allclose(qpsk, np.array([1 + 1j, 1 - 1j, -1 - 1j, -1 + 1j]) * S)
    assert np.allclose(np.abs(qpsk), 1.0)
    with pytest.raises(OddBitCount):
        modulate([0, 1, 1], "qpsk")


def test_demodulate_examples():
    assert demodulate([0.9 + 0.8j], "qpsk").tolist() == [0, 0]
    assert demodulate([-0.2], "bpsk").tolist() == [1]
    for scheme, k in (("bpsk", 1), ("qpsk", 2)):
        for pattern in range(2 ** k):
            bits = [(pattern >> (k - 1 - i)) & 1 for i in range(k)]
            assert demodulate(modulate(bits, scheme), scheme).tolist() == bits


def test_soft_demodulation_sign_and_scale():
    llr = demodulate([(1 - 1j) * S], "qpsk", "soft", n0=0.5)
    assert llr[0] > 0 > llr[1]
    assert llr[0] == pytest.approx(4 * S * S / 0.5)
    assert demodulate([-1.0], "bpsk", "soft", n0=2.0)[0] == pytest.approx(-2.0)


def test_fec_lengths_and_zero_input():
    assert fec_encode(np.zeros(128, int)).tolist() == [0] * 268
    assert fec_encode(np.ones(128, int)).size == 268


def test_fec_matches_reference_encoder():
    rng = np.random.default_rng(2024)
    for n in (1, 7, 64, 128):
        bits = rng.integers(0, 2, n)
        assert fec_encode(bits).tolist() == reference_encoder(bits.tolist())


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=200))
def test_fec_noiseless_roundtrip(bits):
    coded = fec_encode(bits)
    llr = 1.0 - 2.0 * coded
    assert fec_decode(llr).tolist() == bits


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_fec_corrects_two_hard_errors(data):
    bits = data.draw(st.lists(st.integers(0, 1), min_size=20, max_size=128))
    coded = fec_encode(bits)
    flips = data.draw(st.lists(st.integers(0, coded.size - 1), min_size=2, max_size=2, unique=True))
    llr = 1.0 - 2.0 * coded
    llr[flips] *= -1
    assert fec_decode(llr).tolist() == bits


def test_fec_malformed_length():
    with pytest.raises(MalformedLength):
        fec_decode(np.ones(13))
    with pytest.raises(MalformedLength):
        fec_decode(np.ones(10))


def test_numpy_viterbi_matches_numba():
    rng = np.random.default_rng(5)
    bits = rng.integers(0, 2, (8, 128)).astype(np.int8)
    coded = fec_mod.encode_batch_np(bits)
    llr = (1.0 - 2.0 * coded) + rng.normal(0, 0.9, coded.shape)
    batch = fec_mod.viterbi_batch_np(llr)
    for row, l in zip(batch, llr):
        out = np.empty(128, dtype=np.int8)
        fec_mod.viterbi_into(l, out, fec_mod.BRANCH_SIGN, fec_mod.PRED)
        assert np.array_equal(out, row)
    for b, c in zip(bits, coded):
        assert np.array_equal(fec_mod.conv_encode(b), c)


def test_spread_examples():
    assert spread([1, -1], [1, 1, -1, -1]).real.tolist() == [1, 1, -1, -1, -1, -1, 1, 1]
    s = 0.3 - 0.7j
    assert np.allclose(spread([s], [1, -1, 1]), s * np.array([1, -1, 1]))
    assert np.allclose(spread([(1 + 1j) * S], [1, -1]), [(1 + 1j) * S, -(1 + 1j) * S])
    with pytest.raises(EmptyCode):
        spread([1], [])


def test_superpose_examples():
    s = spread([1j, -1], [1, -1, 1, 1])
    assert np.array_equal(superpose([s]), s)
    assert np.all(superpose([s, -s]) == 0)
    with pytest.raises(LengthMismatch):
        superpose([np.zeros(8), np.zeros(16)])
    with pytest.raises(EmptyList):
        superpose([])


def test_despread_examples():
    h = ovsf_matrix(3)
    rng = np.random.default_rng(1)
    a = rng.normal(size=10) + 1j * rng.normal(size=10)
    b = rng.normal(size=10) + 1j * rng.normal(size=10)
    assert np.allclose(despread(spread(a, h[5]), h[5]), a)
    assert np.allclose(despread(spread(a, h[5]) + spread(b, h[6]), h[5]), a)
    extra = generate_overloaded_set(8).extras[0]
    got = despread(spread([1 + 0j], h[4]) + spread([0.5j], extra), h[4])
    assert got[0] == pytest.approx(1 + (4 / 8) * 0.5j)
    with pytest.raises(LengthMismatch):
        despread(np.zeros(10), h[0])


@settings(max_examples=30)
@given(st.integers(1, 5), st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_interference_leakage_is_correlation_over_sf(n, nsym, seed):
    rng = np.random.default_rng(seed)
    sf = 2 ** n
    ci = rng.choice([-1, 1], sf)
    cj = rng.choice([-1, 1], sf)
    a = rng.normal(size=nsym) + 1j * rng.normal(size=nsym)
    b = rng.normal(size=nsym) + 1j * rng.normal(size=nsym)
    got = despread(spread(a, ci) + spread(b, cj), ci)
    assert np.allclose(got, a + cross_correlation(ci, cj) / sf * b)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_despread_is_linear(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=64) + 1j * rng.normal(size=64)
    y = rng.normal(size=64) + 1j * rng.normal(size=64)
    c = ovsf_matrix(3)[rng.integers(8)]
    assert np.allclose(despread(x + y, c), despread(x, c) + despread(y, c))


@settings(max_examples=40)
@given(st.sampled_from(["bpsk", "qpsk"]), st.integers(0, 5), st.data())
def test_noiseless_chain_identity(scheme, n, data):
    k = 1 if scheme == "bpsk" else 2
    nsym = data.draw(st.integers(1, 40))
    bits = data.draw(st.lists(st.integers(0, 1), min_size=k * nsym, max_size=k * nsym))
    h = ovsf_matrix(n)
    code = h[data.draw(st.integers(0, 2 ** n - 1))]
    out = demodulate(despread(spread(modulate(bits, scheme), code), code), scheme)
    assert out.tolist() == bits


def test_channel_noise_density():
    assert ChannelConfig(10.0).n0(8) == pytest.approx(0.1)
    assert ChannelConfig(10.0, SnrReference.SYMBOL).n0(8) == pytest.approx(0.8)
    assert ChannelConfig(math.inf).n0(8) == 0.0


def test_awgn_infinite_snr_is_identity():
    x = spread([1, -1j], [1, -1])
    assert np.array_equal(awgn(x, ChannelConfig(math.inf), 2, CounterStream(0)), x)


def test_awgn_sample_variance():
    x = np.zeros(1_000_000, dtype=complex)
    ch = ChannelConfig(10.0)
    noise = awgn(x, ch, 8, CounterStream(123)) - x
    n0 = ch.n0(8)
    assert abs(np.mean(np.abs(noise) ** 2) - n0) < 0.01 * n0
    assert abs(noise.real.var() - n0 / 2) < 0.01 * n0 / 2


def test_awgn_symbol_reference_sets_despread_snr():
    sf = 8
    ch = ChannelConfig(3.0, SnrReference.SYMBOL)
    noise = awgn(np.zeros(sf * 200_000, dtype=complex), ch, sf, CounterStream(9))
    d = despread(noise, ovsf_matrix(3)[2])
    # post-despread noise density equals Es / 10^(snr/10) with Es = 1
    assert np.mean(np.abs(d) ** 2) == pytest.approx(10 ** -0.3, rel=0.02)


def test_fec_none_passthrough():
    bits = [1, 0, 1]
    assert fec_encode(bits, Fec.NONE).tolist() == bits
    assert fec_decode([-1.0, 2.0, -0.1], Fec.NONE).tolist() == [1, 0, 1]
