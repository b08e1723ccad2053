"""Binary (3,6)-regular LDPC on a PEG skeleton with tanh-domain
sum-product decoding, plus the symbol-LLR to bit-LLR marginalization
used when binary codes ride on M-ary chirp symbols.
"""

from __future__ import annotations

import numpy as np

from ..errors import CodeConstructionError
from .peg import peg_regular

_ATANH_CLIP = 1.0 - 1e-15
STALL_WINDOW = 10


class BinaryLdpcCode:
    def __init__(self, n_checks: int, n_vars: int, seed: int,
                 dv: int = 3, dc: int = 6):
        self.n_checks = n_checks
        self.n_vars = n_vars
        self.seed = seed
        chk_of_var = peg_regular(n_checks, n_vars, dv, dc, seed)
        rows = [[] for _ in range(n_checks)]
        for v, checks in enumerate(chk_of_var):
            for c in checks:
                rows[c].append(v)
        self.rows = [sorted(r) for r in rows]
        self.h = np.zeros((n_checks, n_vars), dtype=np.int8)
        for c, vs in enumerate(self.rows):
            self.h[c, vs] = 1
        self._build_encoder()
        self.e_chk = np.concatenate(
            [np.full(len(vs), c) for c, vs in enumerate(self.rows)]
        )
        self.e_var = np.concatenate([np.array(vs) for vs in self.rows])
        self.chk_edges = np.stack(
            [np.flatnonzero(self.e_chk == c) for c in range(n_checks)]
        )
        self.var_edges = np.stack(
            [np.flatnonzero(self.e_var == v) for v in range(n_vars)]
        )

    def _build_encoder(self):
        a = self.h.copy()
        m, n = a.shape
        pivots = []
        r = 0
        for col in range(n):
            nz = np.flatnonzero(a[r:, col])
            if nz.size == 0:
                continue
            p = nz[0] + r
            if p != r:
                a[[r, p]] = a[[p, r]]
            for rr in range(m):
                if rr != r and a[rr, col]:
                    a[rr] ^= a[r]
            pivots.append(col)
            r += 1
            if r == m:
                break
        if r < m:
            raise CodeConstructionError(f"binary H rank deficient ({r} < {m})")
        self.pivot_cols = np.array(pivots, dtype=np.int64)
        piv = set(pivots)
        self.info_cols = np.array([c for c in range(n) if c not in piv],
                                  dtype=np.int64)
        self._rref = a

    @property
    def n_info(self) -> int:
        return len(self.info_cols)

    def encode(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.int8)
        if bits.shape != (self.n_info,):
            raise ValueError(f"info length {bits.size} != {self.n_info}")
        cw = np.zeros(self.n_vars, dtype=np.int8)
        cw[self.info_cols] = bits
        cw[self.pivot_cols] = (self._rref[:, self.info_cols] @ bits) % 2
        return cw

    def extract_info(self, codeword) -> np.ndarray:
        return np.asarray(codeword, dtype=np.int8)[self.info_cols]

    def parity_ok(self, codeword) -> bool:
        return not ((self.h @ np.asarray(codeword, dtype=np.int64)) % 2).any()

    def decode(self, bit_llrs, max_iters: int = 50):
        """Sum-product decoding; llr > 0 favors bit 0.

        Returns (codeword bits, converged, iterations).
        """
        llr = np.asarray(bit_llrs, dtype=np.float64)
        if llr.shape != (self.n_vars,):
            raise ValueError(f"llrs must be ({self.n_vars},), got {llr.shape}")
        hard = (llr < 0).astype(np.int8)
        if self.parity_ok(hard):
            return hard, True, 0
        v2c = llr[self.e_var]
        stall = 0
        prev = hard
        for it in range(1, max_iters + 1):
            t = np.tanh(0.5 * np.clip(v2c, -38.0, 38.0))
            tg = t[self.chk_edges]
            pre = np.ones_like(tg)
            suf = np.ones_like(tg)
            for i in range(1, tg.shape[1]):
                pre[:, i] = pre[:, i - 1] * tg[:, i - 1]
            for i in range(tg.shape[1] - 2, -1, -1):
                suf[:, i] = suf[:, i + 1] * tg[:, i + 1]
            prod = np.clip(pre * suf, -_ATANH_CLIP, _ATANH_CLIP)
            c2v = np.empty_like(v2c)
            c2v[self.chk_edges.reshape(-1)] = (2.0 * np.arctanh(prod)).reshape(-1)
            total = llr + c2v[self.var_edges].sum(axis=1)
            v2c = total[self.e_var] - c2v
            hard = (total < 0).astype(np.int8)
            if self.parity_ok(hard):
                return hard, True, it
            stall = stall + 1 if np.array_equal(hard, prev) else 0
            prev = hard
            if stall >= STALL_WINDOW:
                break
        return hard, False, it


def build_binldpc(n_checks: int, n_vars: int, seed: int,
                  max_retries: int = 16) -> BinaryLdpcCode:
    last: Exception | None = None
    for k in range(max_retries):
        try:
            return BinaryLdpcCode(n_checks, n_vars, seed + k)
        except CodeConstructionError as e:
            last = e
    raise CodeConstructionError(f"no full-rank binary H from seed {seed}: {last}")


# --- bit/symbol mapping (MSB-first, no Gray coding) ---

def bits_to_symbols(bits, bits_per_symbol: int) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    if bits.size % bits_per_symbol:
        raise ValueError(
            f"{bits.size} bits not divisible by {bits_per_symbol}"
        )
    shifts = bits_per_symbol - 1 - np.arange(bits_per_symbol)
    return (bits.reshape(-1, bits_per_symbol) << shifts).sum(axis=1)


def symbols_to_bits(symbols, bits_per_symbol: int) -> np.ndarray:
    symbols = np.asarray(symbols, dtype=np.int64)
    shifts = bits_per_symbol - 1 - np.arange(bits_per_symbol)
    return ((symbols[:, None] >> shifts) & 1).reshape(-1)


def _bit_masks(bits_per_symbol: int):
    q = 1 << bits_per_symbol
    values = np.arange(q)
    shifts = bits_per_symbol - 1 - np.arange(bits_per_symbol)
    bitvals = (values[:, None] >> shifts) & 1   # (q, bits)
    zero = [np.flatnonzero(bitvals[:, b] == 0) for b in range(bits_per_symbol)]
    one = [np.flatnonzero(bitvals[:, b] == 1) for b in range(bits_per_symbol)]
    return zero, one


def symbol_llrs_to_bit_llrs(symbol_llrs, bits_per_symbol: int,
                            exact: bool = False) -> np.ndarray:
    """Marginalize q-ary LLR vectors to per-bit LLRs (llr > 0 => bit 0).

    Default is the max approximation; exact=True uses log-sum-exp.
    """
    sl = np.asarray(symbol_llrs, dtype=np.float64)
    if sl.ndim != 2 or sl.shape[1] != (1 << bits_per_symbol):
        raise ValueError(f"expected (n, {1 << bits_per_symbol}) llrs, got {sl.shape}")
    zero, one = _bit_masks(bits_per_symbol)
    out = np.empty((sl.shape[0], bits_per_symbol))
    for b in range(bits_per_symbol):
        if exact:
            from scipy.special import logsumexp
            out[:, b] = logsumexp(sl[:, zero[b]], axis=1) - logsumexp(
                sl[:, one[b]], axis=1
            )
        else:
            out[:, b] = sl[:, zero[b]].max(axis=1) - sl[:, one[b]].max(axis=1)
    return out.reshape(-1)
