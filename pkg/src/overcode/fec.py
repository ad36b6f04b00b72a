"""Rate-1/2 convolutional code, constraint length 7, generators 133/171 (octal).

Encoding is tail-terminated with six zeros. Decoding is soft-decision
Viterbi over the 64-state trellis; LLRs are positive for bit 0.

Register convention: ``reg = (u_t << 6) | state`` where ``state`` holds the
previous six inputs, most recent in bit 5. The next state is ``reg >> 1``.
"""

import numpy as np

from ._accel import HAS_NUMBA, njit
from .errors import MalformedLength

CONSTRAINT_LENGTH = 7
MEMORY = CONSTRAINT_LENGTH - 1
N_STATES = 1 << MEMORY
GENERATORS = (0o133, 0o171)


def _parity(x):
    return bin(x).count("1") & 1


def _output_table():
    # out[state, input, k] for generator k
    out = np.zeros((N_STATES, 2, 2), dtype=np.int8)
    for s in range(N_STATES):
        for b in range(2):
            reg = (b << MEMORY) | s
            out[s, b, 0] = _parity(reg & GENERATORS[0])
            out[s, b, 1] = _parity(reg & GENERATORS[1])
    return out


OUTPUTS = _output_table()

# Every next state ns has predecessors (ns & 31) << 1 | x, x in {0, 1}; the input was ns >> 5.
_NS = np.arange(N_STATES)
PRED = np.stack([((_NS & 31) << 1), ((_NS & 31) << 1) | 1], axis=1)
_IN = _NS >> 5
# +1/-1 expected-bit signs for the branch from PRED[ns, x] into ns
BRANCH_SIGN = np.stack(
    [1 - 2 * OUTPUTS[PRED[:, x], _IN].astype(np.float64) for x in range(2)], axis=1
)  # (ns, x, k)


def coded_length(payload_bits):
    return 2 * (payload_bits + MEMORY)


def payload_length(n_coded):
    if n_coded % 2 or n_coded // 2 < MEMORY:
        raise MalformedLength(f"{n_coded} is not 2*(k+{MEMORY}) for any k >= 0")
    return n_coded // 2 - MEMORY


@njit(cache=True)
def encode_into(bits, out, outputs):
    state = 0
    n = bits.shape[0]
    for t in range(n + 6):
        b = np.int64(bits[t]) if t < n else np.int64(0)
        out[2 * t] = outputs[state, b, 0]
        out[2 * t + 1] = outputs[state, b, 1]
        state = ((b << 6) | state) >> 1


@njit(cache=True)
def viterbi_into(llr, out, branch_sign, pred):
    """Soft Viterbi with zero start/end state; writes payload bits to ``out``."""
    steps = llr.shape[0] // 2
    metric = np.full(64, -1e300)
    metric[0] = 0.0
    new = np.empty(64)
    choice = np.empty((steps, 64), dtype=np.int8)
    for t in range(steps):
        l0 = llr[2 * t]
        l1 = llr[2 * t + 1]
        for ns in range(64):
            c0 = metric[pred[ns, 0]] + branch_sign[ns, 0, 0] * l0 + branch_sign[ns, 0, 1] * l1
            c1 = metric[pred[ns, 1]] + branch_sign[ns, 1, 0] * l0 + branch_sign[ns, 1, 1] * l1
            if c1 > c0:
                new[ns] = c1
                choice[t, ns] = 1
            else:
                new[ns] = c0
                choice[t, ns] = 0
        for s in range(64):
            metric[s] = new[s]
    state = 0
    k = out.shape[0]
    for t in range(steps - 1, -1, -1):
        if t < k:
            out[t] = state >> 5
        state = pred[state, choice[t, state]]


def encode_batch_np(bits):
    """Encode rows of ``bits`` (shape ``(B, k)``) with plain numpy."""
    bits = np.asarray(bits, dtype=np.int8)
    b, k = bits.shape
    u = np.concatenate([np.zeros((b, MEMORY), np.int8), bits, np.zeros((b, MEMORY), np.int8)], axis=1)
    out = np.empty((b, 2 * (k + MEMORY)), dtype=np.int8)
    for g_idx, g in enumerate(GENERATORS):
        acc = np.zeros((b, k + MEMORY), dtype=np.int8)
        for d in range(CONSTRAINT_LENGTH):
            if (g >> (MEMORY - d)) & 1:
                acc ^= u[:, MEMORY - d: MEMORY - d + k + MEMORY]
        out[:, g_idx::2] = acc
    return out


def viterbi_batch_np(llr):
    """Decode rows of ``llr`` (shape ``(B, 2*(k+6))``) with plain numpy."""
    llr = np.asarray(llr, dtype=np.float64)
    b, n = llr.shape
    steps = n // 2
    k = steps - MEMORY
    metric = np.full((b, N_STATES), -1e300)
    metric[:, 0] = 0.0
    choice = np.empty((steps, b, N_STATES), dtype=np.int8)
    for t in range(steps):
        l0 = llr[:, 2 * t, None]
        l1 = llr[:, 2 * t + 1, None]
        c0 = metric[:, PRED[:, 0]] + BRANCH_SIGN[:, 0, 0] * l0 + BRANCH_SIGN[:, 0, 1] * l1
        c1 = metric[:, PRED[:, 1]] + BRANCH_SIGN[:, 1, 0] * l0 + BRANCH_SIGN[:, 1, 1] * l1
        pick = c1 > c0
        choice[t] = pick
        metric = np.where(pick, c1, c0)
    out = np.empty((b, k), dtype=np.int8)
    state = np.zeros(b, dtype=np.int64)
    rows = np.arange(b)
    for t in range(steps - 1, -1, -1):
        if t < k:
            out[:, t] = state >> 5
        state = PRED[state, choice[t, rows, state]]
    return out


def conv_encode(bits):
    bits = np.asarray(bits, dtype=np.int8).ravel()
    if HAS_NUMBA:
        out = np.empty(coded_length(bits.size), dtype=np.int8)
        encode_into(bits, out, OUTPUTS)
        return out
    return encode_batch_np(bits[None, :])[0]


def conv_decode(llr):
    llr = np.asarray(llr, dtype=np.float64).ravel()
    k = payload_length(llr.size)
    if HAS_NUMBA:
        out = np.empty(k, dtype=np.int8)
        viterbi_into(llr, out, BRANCH_SIGN, PRED)
        return out
    return viterbi_batch_np(llr[None, :])[0]
