"""Text export/import of GF(q) parity-check matrices.

Alist-style layout extended with one coefficient per entry:

    line 1: n_vars n_checks q
    line 2: max_var_degree max_check_degree
    line 3: variable degrees (n_vars ints)
    line 4: check degrees (n_checks ints)
    then one line per check: pairs "col coeff" with 1-based columns.
"""

from __future__ import annotations

import numpy as np


def write_alist(code, path) -> None:
    rows = code.rows
    n_checks, n_vars, q = code.n_checks, code.n_vars, code.field.q
    var_deg = np.zeros(n_vars, dtype=int)
    for entries in rows:
        for v, _ in entries:
            var_deg[v] += 1
    chk_deg = [len(entries) for entries in rows]
    with open(path, "w") as fh:
        fh.write(f"{n_vars} {n_checks} {q}\n")
        fh.write(f"{var_deg.max()} {max(chk_deg)}\n")
        fh.write(" ".join(str(d) for d in var_deg) + "\n")
        fh.write(" ".join(str(d) for d in chk_deg) + "\n")
        for entries in rows:
            fh.write(
                " ".join(f"{v + 1} {coef}" for v, coef in entries) + "\n"
            )


def read_alist(path):
    """Returns (n_vars, n_checks, q, rows) with rows[c] = [(col, coeff)]."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    try:
        n_vars, n_checks, q = map(int, lines[0].split())
        rows = []
        for ln in lines[4 : 4 + n_checks]:
            nums = list(map(int, ln.split()))
            if len(nums) % 2:
                raise ValueError(f"odd entry count in check row: {ln!r}")
            entries = [
                (nums[i] - 1, nums[i + 1]) for i in range(0, len(nums), 2)
            ]
            for col, coef in entries:
                if not 0 <= col < n_vars:
                    raise ValueError(f"column {col + 1} outside [1, {n_vars}]")
                if not 1 <= coef < q:
                    raise ValueError(f"coefficient {coef} outside [1, {q})")
            rows.append(entries)
        if len(rows) != n_checks:
            raise ValueError(f"expected {n_checks} check rows, got {len(rows)}")
    except (IndexError, ValueError) as e:
        raise ValueError(f"{path}: malformed alist: {e}") from e
    return n_vars, n_checks, q, rows
