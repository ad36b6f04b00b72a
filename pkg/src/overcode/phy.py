"""Transmit/receive chain: modulation, FEC, spreading, AWGN, despreading.

Symbols have unit energy; chips are real +-1 multiplying complex symbols,
one sample per chip.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import fec as _fec
from .errors import EmptyCode, EmptyList, LengthMismatch, OddBitCount

INV_SQRT2 = 1.0 / math.sqrt(2.0)


class Modulation(str, enum.Enum):
    BPSK = "bpsk"
    QPSK = "qpsk"

    @property
    def bits_per_symbol(self):
        return 1 if self is Modulation.BPSK else 2

    @property
    def amplitude(self):
        """Per-dimension amplitude of a constellation point."""
        return 1.0 if self is Modulation.BPSK else INV_SQRT2

    @classmethod
    def parse(cls, value):
        return value if isinstance(value, cls) else cls(str(value).strip().lower())


class Fec(str, enum.Enum):
    NONE = "none"
    CONV_HALF = "conv_1_2"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        if value is None:
            return cls.NONE
        key = str(value).strip().lower()
        aliases = {"1": "none", "rate_1": "none", "1/2": "conv_1_2", "0.5": "conv_1_2",
                   "conv": "conv_1_2", "convolutional_half_rate": "conv_1_2"}
        return cls(aliases.get(key, key))

    def coded_length(self, payload_bits):
        if self is Fec.NONE:
            return payload_bits
        return _fec.coded_length(payload_bits)


class SnrReference(str, enum.Enum):
    CHIP = "chip"
    SYMBOL = "symbol"

    @classmethod
    def parse(cls, value):
        return value if isinstance(value, cls) else cls(str(value).strip().lower())


@dataclass(frozen=True)
class ChannelConfig:
    snr_db: float = 10.0
    reference: SnrReference = SnrReference.CHIP

    def n0(self, sf):
        """Noise density per chip; 0 when noise is disabled (``snr_db=inf``)."""
        if math.isinf(self.snr_db) and self.snr_db > 0:
            return 0.0
        scale = 10.0 ** (-self.snr_db / 10.0)
        if SnrReference.parse(self.reference) is SnrReference.SYMBOL:
            return sf * scale
        return scale


def modulate(bits, scheme):
    """BPSK: 0 -> +1, 1 -> -1. QPSK Gray map on (b0 b1): b0 sets I, b1 sets Q."""
    scheme = Modulation.parse(scheme)
    b = np.asarray(bits, dtype=np.int64).ravel()
    if scheme is Modulation.BPSK:
        return (1.0 - 2.0 * b).astype(np.complex128)
    if b.size % 2:
        raise OddBitCount(f"QPSK needs an even number of bits, got {b.size}")
    i = 1.0 - 2.0 * b[0::2]
    q = 1.0 - 2.0 * b[1::2]
    return (i + 1j * q) * INV_SQRT2


def demodulate(symbols, scheme, mode="hard", n0=1.0):
    """Hard bits, or LLRs (positive means bit 0) for noise density ``n0``."""
    scheme = Modulation.parse(scheme)
    s = np.asarray(symbols, dtype=np.complex128).ravel()
    if scheme is Modulation.BPSK:
        dims = s.real[:, None]
    else:
        dims = np.stack([s.real, s.imag], axis=1)
    dims = dims.ravel()
    if mode == "hard":
        return (dims < 0).astype(np.int8)
    if mode != "soft":
        raise ValueError(f"unknown demodulation mode {mode!r}")
    # LLR = 2 a y / sigma^2 with sigma^2 = n0 / 2 per dimension
    return 4.0 * scheme.amplitude * dims / n0


def fec_encode(bits, cfg=Fec.CONV_HALF):
    cfg = Fec.parse(cfg)
    if cfg is Fec.NONE:
        return np.asarray(bits, dtype=np.int8).ravel().copy()
    return _fec.conv_encode(bits)


def fec_decode(llrs, cfg=Fec.CONV_HALF):
    cfg = Fec.parse(cfg)
    if cfg is Fec.NONE:
        return (np.asarray(llrs, dtype=np.float64).ravel() < 0).astype(np.int8)
    return _fec.conv_decode(llrs)


def spread(symbols, code):
    """``symbols (x) code``: sample ``j*SF + v`` is ``symbols[j] * code[v]``."""
    code = np.asarray(code)
    if code.size == 0:
        raise EmptyCode("spreading code is empty")
    return np.kron(np.asarray(symbols, dtype=np.complex128).ravel(), code.astype(np.float64))


def superpose(signals):
    signals = [np.asarray(s, dtype=np.complex128) for s in signals]
    if not signals:
        raise EmptyList("nothing to superpose")
    if len({s.size for s in signals}) != 1:
        raise LengthMismatch(f"signal lengths differ: {sorted({s.size for s in signals})}")
    return np.sum(signals, axis=0)


def awgn(signal, channel, sf, rng):
    """Add circular complex Gaussian noise, ``n0 / 2`` variance per dimension.

    ``rng`` is a :class:`overcode.rng.CounterStream` (anything with a
    ``complex_normal(count)`` method).
    """
    signal = np.asarray(signal, dtype=np.complex128)
    n0 = channel.n0(sf)
    if n0 == 0.0:
        return signal.copy()
    return signal + math.sqrt(n0 / 2.0) * rng.complex_normal(signal.size)


def despread(signal, code):
    """Multiply by the repeated code and integrate-and-dump over each symbol."""
    signal = np.asarray(signal, dtype=np.complex128)
    code = np.asarray(code, dtype=np.float64)
    if code.size == 0:
        raise EmptyCode("spreading code is empty")
    if signal.size % code.size:
        raise LengthMismatch(f"signal length {signal.size} is not a multiple of {code.size}")
    return (signal.reshape(-1, code.size) * code).sum(axis=1) / code.size
