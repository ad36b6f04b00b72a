"""Batch link-level kernels: one call simulates a contiguous range of iterations.

Two implementations with the same contract:

* ``simulate_range_nb`` -- numba, one iteration at a time, no temporaries
  beyond a few per-call buffers;
* ``simulate_range_np`` -- plain numpy, vectorised over blocks of iterations.

``simulate_range`` picks one according to ``overcode._accel``. Both draw every
random number from the counter streams in :mod:`overcode.rng`, so results
depend only on ``(seed, iteration, user id)``.

Signal samples are kept in units of ``unit`` (``1/sqrt(2)`` when any user is
QPSK, else 1) so that noiseless superpositions are exact small integers.
"""

import math

import numpy as np

from . import fec as _fec
from . import rng as _rng
from ._accel import HAS_NUMBA, njit

INV_SQRT2 = 1.0 / math.sqrt(2.0)
NP_BLOCK = 256


class LinkSetup:
    """Per-scenario constants shared by both kernel implementations."""

    def __init__(self, codes, user_ids, p_send, bits_per_symbol, use_fec, packet_bits, n0):
        n_users = len(codes)
        self.n_users = n_users
        self.code_len = np.array([len(c) for c in codes], dtype=np.int64)
        lmax = int(self.code_len.max()) if n_users else 1
        self.codes = np.zeros((n_users, lmax), dtype=np.float64)
        for u, c in enumerate(codes):
            self.codes[u, : len(c)] = c
        self.user_ids = np.asarray(user_ids, dtype=np.uint64)
        self.p_send = np.asarray(p_send, dtype=np.float64)
        self.bps = np.asarray(bits_per_symbol, dtype=np.int64)
        self.use_fec = np.asarray(use_fec, dtype=np.bool_)
        self.packet_bits = int(packet_bits)
        self.n_coded = np.where(
            self.use_fec, _fec.coded_length(self.packet_bits), self.packet_bits
        ).astype(np.int64)
        self.n_sym = self.n_coded // self.bps
        self.frame = int((self.n_sym * self.code_len).max()) if n_users else 0
        self.unit = INV_SQRT2 if np.any(self.bps == 2) else 1.0
        self.scale = np.where(self.bps == 2, INV_SQRT2, 1.0) / self.unit
        self.n0 = float(n0)
        self.sigma = math.sqrt(self.n0 / 2.0) / self.unit


@njit(cache=True, nogil=True)
def simulate_range_nb(seed, start, stop, codes, code_len, user_ids, p_send, bps, use_fec,
                      n_coded, n_sym, scale, packet_bits, frame, n0, sigma, unit,
                      outputs, branch_sign, pred, tx, err):
    n_users = codes.shape[0]
    nbits_words = (packet_bits + 63) // 64
    max_coded = 0
    for u in range(n_users):
        if n_coded[u] > max_coded:
            max_coded = n_coded[u]
    rx_re = np.empty(frame)
    rx_im = np.empty(frame)
    bits = np.empty((n_users, packet_bits), dtype=np.int8)
    coded = np.empty((n_users, max_coded), dtype=np.int8)
    llr = np.empty(max_coded)
    decoded = np.empty(packet_bits, dtype=np.int8)
    active = np.zeros(n_users, dtype=np.bool_)
    for it in range(start, stop):
        for t in range(frame):
            rx_re[t] = 0.0
            rx_im[t] = 0.0
        for u in range(n_users):
            key = _rng.stream_key(seed, it, user_ids[u], 1)
            active[u] = _rng.word_to_unit(_rng.stream_word(key, 0)) < p_send[u]
            if not active[u]:
                continue
            key = _rng.stream_key(seed, it, user_ids[u], 2)
            for w in range(nbits_words):
                word = _rng.stream_word(key, w)
                for b in range(64):
                    idx = w * 64 + b
                    if idx < packet_bits:
                        bits[u, idx] = np.int8((word >> np.uint64(b)) & np.uint64(1))
            if use_fec[u]:
                _fec.encode_into(bits[u], coded[u], outputs)
            else:
                for i in range(packet_bits):
                    coded[u, i] = bits[u, i]
            length = code_len[u]
            for j in range(n_sym[u]):
                if bps[u] == 2:
                    d_re = (1.0 - 2.0 * coded[u, 2 * j]) * scale[u]
                    d_im = (1.0 - 2.0 * coded[u, 2 * j + 1]) * scale[u]
                else:
                    d_re = (1.0 - 2.0 * coded[u, j]) * scale[u]
                    d_im = 0.0
                base = j * length
                for v in range(length):
                    rx_re[base + v] += d_re * codes[u, v]
                    rx_im[base + v] += d_im * codes[u, v]
        if n0 > 0.0:
            key = _rng.stream_key(seed, it, _rng.SHARED_USER, 3)
            for t in range(frame):
                g_re, g_im = _rng.normal_pair(key, t)
                rx_re[t] += sigma * g_re
                rx_im[t] += sigma * g_im
        for u in range(n_users):
            if not active[u]:
                continue
            length = code_len[u]
            amp = scale[u] * unit
            # LLR = 4 a y / (n0 / L) in physical units; any positive scale works noiseless
            llr_gain = 4.0 * amp * unit * length / n0 if n0 > 0.0 else 1.0
            for j in range(n_sym[u]):
                y_re = 0.0
                y_im = 0.0
                base = j * length
                for v in range(length):
                    y_re += rx_re[base + v] * codes[u, v]
                    y_im += rx_im[base + v] * codes[u, v]
                y_re /= length
                y_im /= length
                if bps[u] == 2:
                    llr[2 * j] = y_re * llr_gain
                    llr[2 * j + 1] = y_im * llr_gain
                else:
                    llr[j] = y_re * llr_gain
            if use_fec[u]:
                _fec.viterbi_into(llr[: n_coded[u]], decoded, branch_sign, pred)
            else:
                for i in range(packet_bits):
                    decoded[i] = 1 if llr[i] < 0.0 else 0
            e = 0
            for i in range(packet_bits):
                if decoded[i] != bits[u, i]:
                    e += 1
            tx[u] += packet_bits
            err[u] += e


def _user_bits_np(seed, its, uid, packet_bits):
    key = _rng.stream_key_np(seed, its, uid, _rng.BITS)
    words = _rng.stream_words_np(key, 0, _rng.n_words(packet_bits))
    return _rng.words_to_bits_np(words, packet_bits)


def simulate_block_np(setup, seed, its):
    """Vectorised chain over the iterations in ``its``; returns ``(tx, err)`` per user."""
    b = its.size
    n_users = setup.n_users
    tx = np.zeros(n_users, dtype=np.int64)
    err = np.zeros(n_users, dtype=np.int64)
    seed = np.uint64(seed)
    rx = np.zeros((b, setup.frame), dtype=np.complex128)
    active = np.zeros((n_users, b), dtype=bool)
    payload = []
    for u in range(n_users):
        uid = setup.user_ids[u]
        key = _rng.stream_key_np(seed, its, uid, _rng.SEND)
        active[u] = _rng.words_to_unit_np(_rng.stream_words_np(key, 0, 1)[:, 0]) < setup.p_send[u]
        bits = _user_bits_np(seed, its, uid, setup.packet_bits)
        payload.append(bits)
        coded = _fec.encode_batch_np(bits) if setup.use_fec[u] else bits
        d = 1.0 - 2.0 * coded.astype(np.float64)
        if setup.bps[u] == 2:
            sym = d[:, 0::2] + 1j * d[:, 1::2]
        else:
            sym = d.astype(np.complex128)
        sym = sym * setup.scale[u] * active[u][:, None]
        length = setup.code_len[u]
        chips = (sym[:, :, None] * setup.codes[u, :length]).reshape(b, -1)
        rx[:, : chips.shape[1]] += chips
    if setup.n0 > 0.0:
        key = _rng.stream_key_np(seed, its, _rng.SHARED_USER, _rng.NOISE)
        noise = _rng.normals_np(key, setup.frame)
        rx = (rx.real + setup.sigma * noise.real) + 1j * (rx.imag + setup.sigma * noise.imag)
    for u in range(n_users):
        rows = np.flatnonzero(active[u])
        if rows.size == 0:
            continue
        length = setup.code_len[u]
        n_chips = setup.n_sym[u] * length
        blocks = rx[rows, :n_chips].reshape(rows.size, setup.n_sym[u], length)
        code = setup.codes[u, :length]
        y_re = (blocks.real * code).sum(axis=2) / length
        y_im = (blocks.imag * code).sum(axis=2) / length
        if setup.bps[u] == 2:
            y = np.empty((rows.size, 2 * setup.n_sym[u]))
            y[:, 0::2] = y_re
            y[:, 1::2] = y_im
        else:
            y = y_re
        if setup.use_fec[u]:
            amp = setup.scale[u] * setup.unit
            gain = 4.0 * amp * setup.unit * length / setup.n0 if setup.n0 > 0.0 else 1.0
            decoded = _fec.viterbi_batch_np(y * gain)
        else:
            decoded = (y < 0.0).astype(np.int8)
        tx[u] += rows.size * setup.packet_bits
        err[u] += int(np.count_nonzero(decoded != payload[u][rows]))
    return tx, err


def simulate_range_np(setup, seed, start, stop):
    tx = np.zeros(setup.n_users, dtype=np.int64)
    err = np.zeros(setup.n_users, dtype=np.int64)
    for lo in range(start, stop, NP_BLOCK):
        its = np.arange(lo, min(stop, lo + NP_BLOCK), dtype=np.uint64)
        t, e = simulate_block_np(setup, seed, its)
        tx += t
        err += e
    return tx, err


def simulate_range(setup, seed, start, stop, use_numba=None):
    """Per-user ``(transmitted_bits, bit_errors)`` over iterations ``start..stop-1``."""
    if use_numba is None:
        use_numba = HAS_NUMBA
    if not use_numba or setup.n_users == 0:
        return simulate_range_np(setup, seed, start, stop)
    tx = np.zeros(setup.n_users, dtype=np.int64)
    err = np.zeros(setup.n_users, dtype=np.int64)
    simulate_range_nb(
        np.uint64(seed), start, stop, setup.codes, setup.code_len, setup.user_ids,
        setup.p_send, setup.bps, setup.use_fec, setup.n_coded, setup.n_sym, setup.scale,
        setup.packet_bits, setup.frame, setup.n0, setup.sigma, setup.unit,
        _fec.OUTPUTS, _fec.BRANCH_SIGN, _fec.PRED, tx, err,
    )
    return tx, err
