"""Edge colorings of complete graphs pulled back through random homomorphisms.

The construction: fix a base graph certified free of t-cliques. Each of the
first ell-2 colors gets an independent uniform map phi_i from the n
vertices to the base's vertices; an edge {u, v} takes the smallest color i
with phi_i(u) != phi_i(v) and {phi_i(u), phi_i(v)} an edge of the base,
and the leftover edges split uniformly between the last two colors.

Any monochromatic clique in color i <= ell-2 maps injectively to a clique
of the base (two endpoints with equal phi_i-image can never be i-adjacent),
so those color classes are K_t-free with probability 1 - the verifier
re-proves this per run by exact search. The last two classes are random
and only probabilistically clique-free; results for them are per-seed
observations, not guarantees.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import rng
from .cliques import max_clique_rows
from .errors import DomainError
from .graphs import MCEstimate, SphereGraph

__all__ = [
    "ColorVerification",
    "EdgeColoring",
    "HomomorphismFamily",
    "certify_kt_free",
    "construct_coloring",
    "estimate_crt",
    "export_coloring",
    "import_coloring",
    "plant_monochromatic_clique",
    "verify_coloring",
]


@dataclass(frozen=True)
class HomomorphismFamily:
    """The ell-2 random vertex maps, with the substream seed that made them."""

    maps: np.ndarray  # (ell-2, n) int64 into the base vertex set
    seed: int


@dataclass(frozen=True)
class EdgeColoring:
    """A complete-graph edge coloring with provenance for bit-exact replay.

    Colors are stored per pair in the upper-triangular (u < v) row-major
    order of ``np.triu_indices``; values lie in 1..ell.
    """

    n: int
    ell: int
    colors: np.ndarray  # (n*(n-1)//2,) uint8
    base_n: int
    base_seed: int
    seed: int
    homs: HomomorphismFamily | None = None

    def pair_index(self, u: int, v: int) -> int:
        if u > v:
            u, v = v, u
        if u == v or v >= self.n:
            raise DomainError(f"invalid pair ({u}, {v})")
        # row-major upper triangle: all pairs (u, *) before (u+1, *)
        return u * (2 * self.n - u - 3) // 2 + v - 1

    def color_of(self, u: int, v: int) -> int:
        return int(self.colors[self.pair_index(u, v)])

    def color_class_rows(self, color: int) -> list[int]:
        """Bitset adjacency of one color class."""
        rows = [0] * self.n
        us, vs = np.triu_indices(self.n, 1)
        sel = self.colors == color
        for u, v in zip(us[sel], vs[sel]):
            rows[u] |= 1 << int(v)
            rows[v] |= 1 << int(u)
        return rows

    def class_sizes(self) -> dict[int, int]:
        vals, counts = np.unique(self.colors, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, counts)}


def certify_kt_free(g: SphereGraph, t: int) -> tuple[bool, list[int] | None]:
    """True iff the graph has no t-clique; otherwise a witness t-clique."""
    if t < 2:
        raise DomainError(f"need t >= 2, got {t}")
    size, witness = max_clique_rows(g.adjacency_rows, g.n, cap=t)
    if size >= t:
        return False, witness
    return True, None


def construct_coloring(base: SphereGraph, n: int, ell: int, seed: int) -> EdgeColoring:
    """Color K_n by pulling back the base adjacency through ell-2 random maps.

    Map i draws from the HOM_MAPS substream with index i; the uniform
    fallback colors draw one batch from the EXTRA_COLORS substream, so the
    whole coloring is a pure function of (base, n, ell, seed).
    """
    if ell < 3:
        raise DomainError(f"need ell >= 3, got {ell}")
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    m = base.n
    maps = np.empty((ell - 2, n), dtype=np.int64)
    for i in range(ell - 2):
        maps[i] = rng.substream(seed, rng.HOM_MAPS, i).integers(0, m, size=n)
    # dense base adjacency for vectorized pair lookups
    dense = np.zeros((m, m), dtype=bool)
    for u, row in enumerate(base.adjacency_rows):
        while row:
            bit = row & -row
            dense[u, bit.bit_length() - 1] = True
            row ^= bit
    us, vs = np.triu_indices(n, 1)
    colors = np.zeros(us.shape[0], dtype=np.uint8)
    for i in range(ell - 2):
        au = maps[i][us]
        av = maps[i][vs]
        fired = (au != av) & dense[au, av]
        colors[(colors == 0) & fired] = i + 1
    leftover = colors == 0
    coin = rng.substream(seed, rng.EXTRA_COLORS, 0).integers(0, 2, size=us.shape[0])
    colors[leftover] = (ell - 1) + coin[leftover].astype(np.uint8)
    return EdgeColoring(
        n=n,
        ell=ell,
        colors=colors,
        base_n=base.n,
        base_seed=base.seed,
        seed=seed,
        homs=HomomorphismFamily(maps=maps, seed=seed),
    )


@dataclass(frozen=True)
class ColorVerification:
    color: int
    clique_found: bool
    witness: tuple | None


def verify_coloring(coloring: EdgeColoring, t: int) -> list[ColorVerification]:
    """Cap-bounded t-clique search in every color class."""
    if coloring.ell < 3:
        raise DomainError(f"need ell >= 3, got {coloring.ell}")
    if t < 2:
        raise DomainError(f"need t >= 2, got {t}")
    out = []
    for color in range(1, coloring.ell + 1):
        rows = coloring.color_class_rows(color)
        size, witness = max_clique_rows(rows, coloring.n, cap=t)
        found = size >= t
        out.append(
            ColorVerification(
                color=color,
                clique_found=found,
                witness=tuple(witness) if found else None,
            )
        )
    return out


def plant_monochromatic_clique(
    coloring: EdgeColoring, t: int, color: int, seed: int
) -> tuple[EdgeColoring, list[int]]:
    """Fault injection: overwrite the C(t,2) pairs of a random t-set to one color."""
    if not 1 <= color <= coloring.ell:
        raise DomainError(f"color {color} out of range 1..{coloring.ell}")
    if t > coloring.n:
        raise DomainError(f"cannot plant a K_{t} in {coloring.n} vertices")
    gen = rng.substream(seed, rng.EXTRA_COLORS, 1)
    chosen = sorted(int(v) for v in gen.choice(coloring.n, size=t, replace=False))
    colors = coloring.colors.copy()
    for i, u in enumerate(chosen):
        for v in chosen[i + 1 :]:
            colors[coloring.pair_index(u, v)] = color
    planted = EdgeColoring(
        n=coloring.n,
        ell=coloring.ell,
        colors=colors,
        base_n=coloring.base_n,
        base_seed=coloring.base_seed,
        seed=coloring.seed,
        homs=coloring.homs,
    )
    return planted, chosen


def estimate_crt(base: SphereGraph, r: int, samples: int, seed: int) -> MCEstimate:
    """Fraction of r-tuples (with repetition) of base vertices that are independent.

    Repetition never creates adjacency; distinct sampled vertices must be
    pairwise non-adjacent. Batched with one substream per batch.
    """
    if r < 2:
        raise DomainError(f"need r >= 2, got {r}")
    if samples < 1000:
        raise DomainError(f"need samples >= 1000, got {samples}")
    m = base.n
    dense = np.zeros((m, m), dtype=bool)
    for u, row in enumerate(base.adjacency_rows):
        while row:
            bit = row & -row
            dense[u, bit.bit_length() - 1] = True
            row ^= bit
    hits = 0
    done = 0
    batch_idx = 0
    while done < samples:
        b = min(rng.BATCH, samples - done)
        gen = rng.substream(seed, rng.CRT, (r << 24) | batch_idx)
        idx = gen.integers(0, m, size=(b, r))
        ok = np.ones(b, dtype=bool)
        for i in range(r):
            for j in range(i + 1, r):
                ok &= ~dense[idx[:, i], idx[:, j]]
        hits += int(ok.sum())
        done += b
        batch_idx += 1
    return MCEstimate.from_counts(hits, samples, seed)


# ---------------------------------------------------------------------------
# Export / import
# ---------------------------------------------------------------------------


def export_coloring(coloring: EdgeColoring, path: str) -> None:
    """Text format: a '# '-prefixed JSON provenance header, then 'u v c' lines."""
    header = {
        "n": coloring.n,
        "ell": coloring.ell,
        "base_n": coloring.base_n,
        "base_seed": coloring.base_seed,
        "seed": coloring.seed,
    }
    us, vs = np.triu_indices(coloring.n, 1)
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        for u, v, c in zip(us, vs, coloring.colors):
            fh.write(f"{u} {v} {c}\n")


def import_coloring(path: str) -> EdgeColoring:
    """Read an exported coloring; colors round-trip exactly (maps are not stored)."""
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("# "):
            raise DomainError(f"{path}: missing provenance header")
        header = json.loads(first[2:])
        n = header["n"]
        ell = header["ell"]
        colors = np.zeros(n * (n - 1) // 2, dtype=np.uint8)
        seen = 0
        dummy = EdgeColoring(
            n=n, ell=ell, colors=colors, base_n=header["base_n"],
            base_seed=header["base_seed"], seed=header["seed"],
        )
        for line in fh:
            if not line.strip():
                continue
            u_s, v_s, c_s = line.split()
            u, v, c = int(u_s), int(v_s), int(c_s)
            if not 1 <= c <= ell:
                raise DomainError(f"{path}: color {c} out of range 1..{ell}")
            colors[dummy.pair_index(u, v)] = c
            seen += 1
        if seen != colors.shape[0]:
            raise DomainError(f"{path}: expected {colors.shape[0]} pairs, got {seen}")
    return dummy
