"""Progressive-edge-growth construction of regular bipartite graphs.

For each variable node, edges are placed one at a time onto the check
node that is farthest from (or unreachable from) the variable in the
current graph, minimum-degree and random tie-breaking. This maximizes
local girth for short blocks.
"""

from __future__ import annotations

import numpy as np

from ..errors import CodeConstructionError


def peg_regular(n_checks: int, n_vars: int, dv: int, dc: int, seed: int):
    """Check-node index lists per variable for a (dv, dc)-regular graph.

    Requires n_vars * dv == n_checks * dc. Deterministic for a fixed seed.
    """
    if n_vars * dv != n_checks * dc:
        raise ValueError(
            f"degree bookkeeping fails: {n_vars}*{dv} != {n_checks}*{dc}"
        )
    rng = np.random.default_rng(seed)
    chk_of_var = [[] for _ in range(n_vars)]
    var_of_chk = [[] for _ in range(n_checks)]
    deg = np.zeros(n_checks, dtype=np.int64)

    for v in range(n_vars):
        for _ in range(dv):
            reached = np.zeros(n_checks, dtype=bool)
            frontier = {v}
            seen = {v}
            while frontier:
                grown = set()
                for vv in frontier:
                    for c in chk_of_var[vv]:
                        if not reached[c]:
                            reached[c] = True
                            grown.add(c)
                nxt = set()
                for c in grown:
                    for vv in var_of_chk[c]:
                        if vv not in seen:
                            seen.add(vv)
                            nxt.add(vv)
                if not grown:
                    break
                frontier = nxt
            cand = np.flatnonzero(~reached & (deg < dc))
            if cand.size == 0:
                # graph saturated locally: fall back to the lightest checks
                # not already adjacent (parallel edges are never allowed)
                adjacent = np.zeros(n_checks, dtype=bool)
                adjacent[chk_of_var[v]] = True
                cand = np.flatnonzero(~adjacent & (deg < dc))
            if cand.size == 0:
                raise CodeConstructionError(
                    f"PEG deadlock at variable {v} (seed {seed})"
                )
            cand = cand[deg[cand] == deg[cand].min()]
            c = int(cand[rng.integers(len(cand))])
            chk_of_var[v].append(c)
            var_of_chk[c].append(v)
            deg[c] += 1
    return chk_of_var
