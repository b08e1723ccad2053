"""Extended Hamming(8,4): distance 4, corrects any single bit error per
8-bit block and flags double errors as uncorrectable."""

from __future__ import annotations

import numpy as np

# systematic generator: data bits 0-3, parities 4-6, overall parity 7
def _encode_nibble(value: int) -> int:
    d = [(value >> i) & 1 for i in range(4)]
    p0 = d[0] ^ d[1] ^ d[2]
    p1 = d[1] ^ d[2] ^ d[3]
    p2 = d[0] ^ d[1] ^ d[3]
    code = value & 0xF
    code |= p0 << 4 | p1 << 5 | p2 << 6
    code |= (d[0] ^ d[1] ^ d[2] ^ d[3] ^ p0 ^ p1 ^ p2) << 7
    return code


CODEBOOK = np.array([_encode_nibble(v) for v in range(16)], dtype=np.int64)
_POPCOUNT = np.array([bin(x).count("1") for x in range(256)], dtype=np.int64)
# decode LUT: for every received byte, (nearest info nibble, uncorrectable)
_DIST = _POPCOUNT[np.arange(256)[:, None] ^ CODEBOOK[None, :]]
DECODE_NIBBLE = _DIST.argmin(axis=1).astype(np.int64)
UNCORRECTABLE = _DIST.min(axis=1) > 1


def hamming48_encode(bits) -> np.ndarray:
    """4 info bits -> 8 coded bits per block (MSB-first within blocks)."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.size % 4:
        raise ValueError(f"{bits.size} bits not divisible by block size 4")
    nibbles = (bits.reshape(-1, 4) << np.arange(3, -1, -1)).sum(axis=1)
    coded = CODEBOOK[nibbles]
    return ((coded[:, None] >> np.arange(7, -1, -1)) & 1).reshape(-1)


def hamming48_decode(bits):
    """Nearest-codeword decoding per block.

    Returns (info bits, per-block uncorrectable flags). Blocks at
    distance >= 2 keep the nearest codeword's data (hard pass-through)
    and are flagged.
    """
    bits = np.asarray(bits, dtype=np.int64)
    if bits.size % 8:
        raise ValueError(f"{bits.size} bits not divisible by block size 8")
    received = (bits.reshape(-1, 8) << np.arange(7, -1, -1)).sum(axis=1)
    nibbles = DECODE_NIBBLE[received]
    flags = UNCORRECTABLE[received]
    info = ((nibbles[:, None] >> np.arange(3, -1, -1)) & 1).reshape(-1)
    return info, flags


def encode_symbols(bits) -> np.ndarray:
    """400-style info bits -> one 8-bit chirp symbol per coded block."""
    coded = hamming48_encode(bits)
    return (coded.reshape(-1, 8) << np.arange(7, -1, -1)).sum(axis=1)


def decode_symbols(symbols):
    """Inverse of encode_symbols on hard symbol decisions."""
    symbols = np.asarray(symbols, dtype=np.int64)
    bits = ((symbols[:, None] >> np.arange(7, -1, -1)) & 1).reshape(-1)
    return hamming48_decode(bits)
