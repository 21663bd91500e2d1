"""Pure-Python maximum-clique kernel on integer bitsets.

Fallback twin of the compiled kernel in ``_cliquecore.pyx``: identical
branch-and-bound (greedy-coloring bound, lowest-bit tie-breaking), so both
backends return identical (size, witness) for the same input. Python's
big-int bitwise ops keep this usable up to a few hundred vertices; the
compiled kernel is preferred for the dense certification workloads.
"""

from __future__ import annotations


def solve(adj: list[int], n: int, cap: int, complement: bool) -> tuple[int, list[int]]:
    """Maximum clique of the bitset graph ``adj`` (or its complement).

    ``cap`` <= 0 means exact search; otherwise the search stops as soon as
    a clique of size ``cap`` is known and returns it.
    """
    if n == 0:
        return 0, []
    full = (1 << n) - 1

    def neighbors(v: int) -> int:
        row = adj[v]
        if complement:
            return full ^ row ^ (1 << v)
        return row

    best_size = 0
    best: list[int] = []
    stack_r: list[int] = []
    want = cap if cap > 0 else n + 1

    def expand(pset: int) -> bool:
        nonlocal best_size, best
        # greedy coloring of pset, peeled into independent classes
        order: list[int] = []
        colors: list[int] = []
        remaining = pset
        color = 0
        while remaining:
            color += 1
            cand = remaining
            while cand:
                v = (cand & -cand).bit_length() - 1
                order.append(v)
                colors.append(color)
                cand &= ~(neighbors(v) | (1 << v))
                remaining &= ~(1 << v)
        rsize = len(stack_r)
        for i in range(len(order) - 1, -1, -1):
            if rsize + colors[i] <= best_size:
                return False
            v = order[i]
            stack_r.append(v)
            if rsize + 1 > best_size:
                best_size = rsize + 1
                best = stack_r.copy()
                if best_size >= want:
                    stack_r.pop()
                    return True
            sub = pset & neighbors(v)
            if sub and expand(sub):
                stack_r.pop()
                return True
            stack_r.pop()
            pset &= ~(1 << v)
        return False

    expand(full)
    return best_size, sorted(best)
