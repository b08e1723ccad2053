"""Channel coding: NB-LDPC over GF(2^sf), binary LDPC, and extended
Hamming(8,4), all exposed through a common packet-codec interface that
maps between info bits and chirp symbols."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..gfield import GaloisField
from .alist import read_alist, write_alist
from .binary import (
    BinaryLdpcCode,
    bits_to_symbols,
    build_binldpc,
    symbol_llrs_to_bit_llrs,
    symbols_to_bits,
)
from .hamming import hamming48_decode, hamming48_encode
from .nbldpc import NbLdpcCode, build_nbldpc
from . import hamming as _hamming

NB_LDPC = "nb_ldpc"
BIN_LDPC = "bin_ldpc"
HAMMING48 = "hamming48"
SCHEMES = (NB_LDPC, BIN_LDPC, HAMMING48)


@dataclass(frozen=True)
class CodecConfig:
    scheme: str = NB_LDPC
    n_info_bits: int = 400
    max_iters: int = 50
    seed: int = 2024
    exact_bit_marginals: bool = False  # bin_ldpc marginalization mode

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.n_info_bits <= 0 or self.max_iters <= 0:
            raise ValueError("n_info_bits and max_iters must be positive")


class NbLdpcCodec:
    """Rate-1/2 NB-LDPC over GF(2^sf); one field symbol per chirp symbol."""

    def __init__(self, cfg: CodecConfig, sf: int):
        if cfg.n_info_bits % sf:
            raise ValueError(
                f"n_info_bits {cfg.n_info_bits} not divisible by sf {sf}"
            )
        self.sf = sf
        self.cfg = cfg
        n_info_syms = cfg.n_info_bits // sf
        self.field = GaloisField(sf)
        self.code = build_nbldpc(n_info_syms, 2 * n_info_syms, self.field, cfg.seed)

    @property
    def n_payload_symbols(self) -> int:
        return self.code.n_vars

    def encode_bits(self, bits) -> np.ndarray:
        info = bits_to_symbols(bits, self.sf)
        return self.code.encode(info)

    def decode(self, symbol_llrs):
        """(info bits, converged) from per-symbol LLR vectors."""
        decision, converged, _ = self.code.decode_fft(
            symbol_llrs, max_iters=self.cfg.max_iters
        )
        info = self.code.extract_info(decision)
        return symbols_to_bits(info, self.sf), converged


class BinaryLdpcCodec:
    """Rate-1/2 binary LDPC; coded bits packed sf per chirp symbol."""

    def __init__(self, cfg: CodecConfig, sf: int):
        if (2 * cfg.n_info_bits) % sf:
            raise ValueError(
                f"coded length {2 * cfg.n_info_bits} not divisible by sf {sf}"
            )
        self.sf = sf
        self.cfg = cfg
        self.code = build_binldpc(cfg.n_info_bits, 2 * cfg.n_info_bits, cfg.seed)

    @property
    def n_payload_symbols(self) -> int:
        return self.code.n_vars // self.sf

    def encode_bits(self, bits) -> np.ndarray:
        return bits_to_symbols(self.code.encode(bits), self.sf)

    def decode(self, symbol_llrs):
        bit_llrs = symbol_llrs_to_bit_llrs(
            symbol_llrs, self.sf, exact=self.cfg.exact_bit_marginals
        )
        cw, converged, _ = self.code.decode(bit_llrs, max_iters=self.cfg.max_iters)
        return self.code.extract_info(cw).astype(np.int64), converged


class Hamming48Codec:
    """Extended Hamming(8,4); one coded block per 8-bit chirp symbol."""

    def __init__(self, cfg: CodecConfig, sf: int):
        if sf != 8:
            raise ValueError("hamming48 block mapping requires sf = 8")
        if cfg.n_info_bits % 4:
            raise ValueError("n_info_bits must be a multiple of 4")
        self.sf = sf
        self.cfg = cfg
        self._n_blocks = cfg.n_info_bits // 4

    @property
    def n_payload_symbols(self) -> int:
        return self._n_blocks

    def encode_bits(self, bits) -> np.ndarray:
        return _hamming.encode_symbols(bits)

    def decode(self, symbol_llrs):
        """Hard-decision per-symbol decode; converged = no flagged block."""
        hard = np.asarray(symbol_llrs).argmax(axis=1)
        info, flags = _hamming.decode_symbols(hard)
        return info, not flags.any()


def make_codec(cfg: CodecConfig, sf: int):
    if cfg.scheme == NB_LDPC:
        return NbLdpcCodec(cfg, sf)
    if cfg.scheme == BIN_LDPC:
        return BinaryLdpcCodec(cfg, sf)
    return Hamming48Codec(cfg, sf)
