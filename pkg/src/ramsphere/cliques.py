"""Exact clique search: backend selection and shared preprocessing.

The branch-and-bound kernel exists twice: compiled (``_cliquecore``, Cython)
and pure Python (``_cliquepy``). Both implement the same algorithm with the
same tie-breaking, so results are bit-identical; the compiled one is just
fast. Selection happens at import time, compiled preferred; set
``RAMSPHERE_PURE=1`` to force the fallback. ``benchmarks/bench_clique.py``
compares the two.

Preprocessing (degeneracy ordering) is shared Python code, so the kernels
always receive identical reordered inputs regardless of backend.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from . import _cliquepy
from .errors import DomainError

if os.environ.get("RAMSPHERE_PURE"):
    _core = None
else:
    try:
        from . import _cliquecore as _core
    except ImportError:
        _core = None

BACKEND = "cython" if _core is not None else "python"


def pack_rows(rows: Sequence[int], n: int) -> np.ndarray:
    """Pack Python-int bitset rows into an (n, ceil(n/64)) uint64 array."""
    nwords = max(1, (n + 63) // 64)
    out = np.zeros((n, nwords), dtype=np.uint64)
    for i, row in enumerate(rows):
        for w in range(nwords):
            out[i, w] = (row >> (64 * w)) & 0xFFFFFFFFFFFFFFFF
    return out


def unpack_words(words: np.ndarray) -> list[int]:
    """Inverse of ``pack_rows``."""
    return [int.from_bytes(words[i].tobytes(), "little") for i in range(words.shape[0])]


def degeneracy_order(rows: Sequence[int], n: int, complement: bool = False) -> list[int]:
    """Smallest-last vertex order (ties to the smallest index).

    With ``complement`` the order is taken in the complement relation,
    evaluated on the fly.
    """
    remaining = (1 << n) - 1
    full = remaining
    order = []
    alive = list(range(n))
    for _ in range(n):
        best_v, best_deg = -1, n + 1
        for v in alive:
            row = rows[v] if not complement else (full ^ rows[v] ^ (1 << v))
            deg = (row & remaining).bit_count()
            if deg < best_deg:
                best_v, best_deg = v, deg
        order.append(best_v)
        alive.remove(best_v)
        remaining &= ~(1 << best_v)
    order.reverse()  # highest-core vertices first
    return order


def max_clique_rows(
    rows: Sequence[int],
    n: int,
    cap: int | None = None,
    complement: bool = False,
) -> tuple[int, list[int]]:
    """Maximum clique (or independent set via ``complement``) of a bitset graph.

    Returns (size, witness) with the witness in original vertex labels.
    ``cap`` stops the search once a clique of that size is found, in which
    case size == cap and the result is a lower-bound certificate.
    """
    if n < 0:
        raise DomainError(f"vertex count must be nonnegative, got {n}")
    if n == 0:
        return 0, []
    if cap is not None and cap < 1:
        raise DomainError(f"cap must be >= 1, got {cap}")
    order = degeneracy_order(rows, n, complement)
    pos = {v: i for i, v in enumerate(order)}
    reordered = []
    for new_idx in range(n):
        row = rows[order[new_idx]]
        new_row = 0
        while row:
            bit = row & -row
            new_row |= 1 << pos[bit.bit_length() - 1]
            row ^= bit
        reordered.append(new_row)
    cap_arg = 0 if cap is None else cap
    if _core is not None:
        size, witness = _core.solve(pack_rows(reordered, n), n, cap_arg, complement)
    else:
        size, witness = _cliquepy.solve(reordered, n, cap_arg, complement)
    return size, sorted(order[v] for v in witness)


def brute_force_max_clique(rows: Sequence[int], n: int, complement: bool = False) -> int:
    """Exhaustive subset-enumeration oracle (independent of the kernels).

    Only for n <= ~20; used by tests to validate the branch-and-bound.
    """
    full = (1 << n) - 1
    best = 0
    for mask in range(1, 1 << n):
        size = mask.bit_count()
        if size <= best:
            continue
        m = mask
        ok = True
        while m:
            bit = m & -m
            v = bit.bit_length() - 1
            m ^= bit
            row = rows[v] if not complement else (full ^ rows[v] ^ (1 << v))
            if (mask & ~(1 << v)) & ~row:
                ok = False
                break
        if ok:
            best = size
    return best
