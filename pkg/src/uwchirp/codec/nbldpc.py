"""Non-binary LDPC over GF(2^m): seeded construction on a PEG skeleton,
systematic encoding by Gauss-Jordan elimination, and two belief-
propagation decoders.

decode_qspa is the reference: check-node updates are direct probability
convolutions over the field's additive (XOR) group. decode_fft computes
the same convolutions through the Walsh-Hadamard transform (transform,
multiply pointwise, inverse-transform). Both share an identical message
schedule, clipping (floor 1e-12) and normalization, so their per-
iteration messages agree to float rounding.
"""

from __future__ import annotations

import numpy as np

from ..errors import CodeConstructionError
from ..gfield import GaloisField
from .peg import peg_regular

PROB_FLOOR = 1e-12
STALL_WINDOW = 10  # stop after this many iterations without decision change


def _softmax(llrs: np.ndarray) -> np.ndarray:
    z = llrs - llrs.max(axis=1, keepdims=True)
    p = np.exp(z)
    return p / p.sum(axis=1, keepdims=True)


def _fwht(x: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis.

    Involutive up to a factor q: _fwht(_fwht(x)) == q * x.
    """
    q = x.shape[-1]
    lead = x.shape[:-1]
    y = x.reshape(-1, q).copy()
    h = 1
    while h < q:
        y = y.reshape(y.shape[0], -1, 2, h)
        a = y[:, :, 0, :] + y[:, :, 1, :]
        b = y[:, :, 0, :] - y[:, :, 1, :]
        y = np.stack((a, b), axis=2).reshape(y.shape[0], -1)
        h *= 2
    return y.reshape(*lead, q)


class NbLdpcCode:
    """One constructed code: sparse H over GF(q), encoder, decoders."""

    def __init__(self, n_checks: int, n_vars: int, field: GaloisField,
                 seed: int, dv: int = 3, dc: int = 6):
        self.field = field
        self.n_checks = n_checks
        self.n_vars = n_vars
        self.dv = dv
        self.dc = dc
        self.seed = seed
        chk_of_var = peg_regular(n_checks, n_vars, dv, dc, seed)
        rng = np.random.default_rng(seed + 0x9E3779B9)
        rows = [[] for _ in range(n_checks)]
        for v, checks in enumerate(chk_of_var):
            for c in checks:
                rows[c].append((v, int(rng.integers(1, field.q))))
        for r in rows:
            r.sort()
        self.rows = rows
        self._build_encoder()
        self._build_decoder_tables()

    # --- construction ---

    def dense_h(self) -> np.ndarray:
        h = np.zeros((self.n_checks, self.n_vars), dtype=np.int64)
        for c, entries in enumerate(self.rows):
            for v, coef in entries:
                h[c, v] = coef
        return h

    def _build_encoder(self):
        gf = self.field
        a = self.dense_h()
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
            a[r] = gf.mul_arr(a[r], gf.inv(int(a[r, col])))
            for rr in range(m):
                if rr != r and a[rr, col]:
                    a[rr] ^= gf.mul_arr(np.full(n, a[rr, col]), a[r])
            pivots.append(col)
            r += 1
            if r == m:
                break
        if r < m:
            raise CodeConstructionError(
                f"H is rank deficient ({r} < {m}) for seed {self.seed}"
            )
        self.pivot_cols = np.array(pivots, dtype=np.int64)
        piv = set(pivots)
        self.info_cols = np.array(
            [c for c in range(n) if c not in piv], dtype=np.int64
        )
        self._rref = a

    @property
    def n_info(self) -> int:
        return len(self.info_cols)

    def encode(self, info) -> np.ndarray:
        """Codeword with info symbols sitting at the non-pivot columns."""
        info = np.asarray(info, dtype=np.int64)
        if info.shape != (self.n_info,):
            raise ValueError(f"info length {info.size} != {self.n_info}")
        gf = self.field
        cw = np.zeros(self.n_vars, dtype=np.int64)
        cw[self.info_cols] = info
        contrib = gf.mul_arr(self._rref[:, self.info_cols], info[None, :])
        cw[self.pivot_cols] = np.bitwise_xor.reduce(contrib, axis=1)
        return cw

    def extract_info(self, codeword) -> np.ndarray:
        return np.asarray(codeword, dtype=np.int64)[self.info_cols]

    def parity_ok(self, codeword) -> bool:
        cw = np.asarray(codeword, dtype=np.int64)
        prod = self.field.mul_arr(self._coef_ce, cw[self._var_ce])
        return not np.bitwise_xor.reduce(prod, axis=1).any()

    # --- decoding ---

    def _build_decoder_tables(self):
        gf = self.field
        q = gf.q
        edges = [
            (c, v, coef)
            for c, entries in enumerate(self.rows)
            for v, coef in entries
        ]
        self.n_edges = len(edges)
        self.e_chk = np.array([e[0] for e in edges], dtype=np.int64)
        self.e_var = np.array([e[1] for e in edges], dtype=np.int64)
        self.e_coef = np.array([e[2] for e in edges], dtype=np.int64)
        self.chk_edges = np.stack(
            [np.flatnonzero(self.e_chk == c) for c in range(self.n_checks)]
        )
        self.var_edges = np.stack(
            [np.flatnonzero(self.e_var == v) for v in range(self.n_vars)]
        )
        j = np.arange(q, dtype=np.int64)
        self._perm_in = gf.mul_arr(gf.inv_arr(self.e_coef)[:, None], j[None, :])
        self._perm_out = gf.mul_arr(self.e_coef[:, None], j[None, :])
        # grouped views used by both decoders
        self._var_ce = self.e_var[self.chk_edges]
        self._coef_ce = self.e_coef[self.chk_edges]
        # XOR gather table for the reference convolution
        self._xor_table = j[:, None] ^ j[None, :]

    def _leave_one_out_prod(self, grouped: np.ndarray) -> np.ndarray:
        """Product over the group axis excluding each member, via
        prefix/suffix products. grouped: (groups, deg, q)."""
        g, deg, q = grouped.shape
        pre = np.ones_like(grouped)
        suf = np.ones_like(grouped)
        for i in range(1, deg):
            pre[:, i] = pre[:, i - 1] * grouped[:, i - 1]
        for i in range(deg - 2, -1, -1):
            suf[:, i] = suf[:, i + 1] * grouped[:, i + 1]
        return pre * suf

    def _leave_one_out_conv(self, grouped: np.ndarray) -> np.ndarray:
        """Leave-one-out XOR-group convolution (reference path)."""
        g, deg, q = grouped.shape
        xt = self._xor_table
        delta = np.zeros(q)
        delta[0] = 1.0
        pre = np.empty_like(grouped)
        suf = np.empty_like(grouped)
        pre[:, 0] = delta
        suf[:, deg - 1] = delta
        for i in range(1, deg):
            # conv(u, v)[s] = sum_a u[a] * v[a ^ s]
            pre[:, i] = np.einsum("ga,gas->gs", pre[:, i - 1],
                                  grouped[:, i - 1][:, xt])
        for i in range(deg - 2, -1, -1):
            suf[:, i] = np.einsum("ga,gas->gs", suf[:, i + 1],
                                  grouped[:, i + 1][:, xt])
        out = np.empty_like(grouped)
        for i in range(deg):
            out[:, i] = np.einsum("ga,gas->gs", pre[:, i], suf[:, i][:, xt])
        return out

    def _check_update(self, grouped: np.ndarray, use_fft: bool) -> np.ndarray:
        """Leave-one-out XOR-group convolutions of grouped check messages,
        either directly or through the Walsh-Hadamard transform."""
        if use_fft:
            t = _fwht(grouped)
            return _fwht(self._leave_one_out_prod(t)) / self.field.q
        return self._leave_one_out_conv(grouped)

    def _decode(self, llrs, max_iters: int, use_fft: bool):
        gf = self.field
        q = gf.q
        llrs = np.asarray(llrs, dtype=np.float64)
        if llrs.shape != (self.n_vars, q):
            raise ValueError(f"llrs must be ({self.n_vars}, {q}), got {llrs.shape}")
        pri = _softmax(llrs)
        decision = pri.argmax(axis=1)
        if self.parity_ok(decision):
            return decision, True, 0
        v2c = pri[self.e_var]
        stall = 0
        prev = decision
        for it in range(1, max_iters + 1):
            # check-node update in the h_e * x_e domain
            nu = np.take_along_axis(v2c, self._perm_in, axis=1)
            grouped = nu[self.chk_edges]
            sigma = self._check_update(grouped, use_fft)
            sigma = np.clip(sigma, PROB_FLOOR, None)
            sigma /= sigma.sum(axis=2, keepdims=True)
            c2v = np.empty_like(v2c)
            flat = self.chk_edges.reshape(-1)
            c2v[flat] = sigma.reshape(-1, q)
            c2v = np.take_along_axis(c2v, self._perm_out, axis=1)
            # variable-node update
            cg = c2v[self.var_edges]
            ext = self._leave_one_out_prod(cg)
            v2c_new = pri[:, None, :] * ext
            v2c_new = np.clip(v2c_new, PROB_FLOOR, None)
            v2c_new /= v2c_new.sum(axis=2, keepdims=True)
            v2c[self.var_edges.reshape(-1)] = v2c_new.reshape(-1, q)
            post = pri * cg.prod(axis=1)
            decision = post.argmax(axis=1)
            if self.parity_ok(decision):
                return decision, True, it
            stall = stall + 1 if np.array_equal(decision, prev) else 0
            prev = decision
            if stall >= STALL_WINDOW:
                break
        return decision, False, it

    def decode_qspa(self, llrs, max_iters: int = 50):
        """Reference q-ary sum-product decoder (direct convolutions)."""
        return self._decode(llrs, max_iters, use_fft=False)

    def decode_fft(self, llrs, max_iters: int = 50):
        """Walsh-Hadamard check-node variant of decode_qspa."""
        return self._decode(llrs, max_iters, use_fft=True)


def build_nbldpc(
    n_checks: int,
    n_vars: int,
    field: GaloisField,
    seed: int,
    dv: int = 3,
    dc: int = 6,
    max_retries: int = 16,
) -> NbLdpcCode:
    """Seeded construction, retrying adjacent seeds on rank deficiency."""
    last: Exception | None = None
    for k in range(max_retries):
        try:
            return NbLdpcCode(n_checks, n_vars, field, seed + k, dv=dv, dc=dc)
        except CodeConstructionError as e:
            last = e
    raise CodeConstructionError(
        f"no full-rank H in {max_retries} attempts from seed {seed}: {last}"
    )
