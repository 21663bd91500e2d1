"""Random sphere graphs: sampling, exact clique search, Monte Carlo, serialization.

A graph realization stores the sampled unit vectors and the packed
adjacency bitsets; identical (n, params, seed) reproduce it bit for bit.
Tuple probabilities are estimated two independent ways:

* ``method="gram"`` (default): the tuple's Gram matrix is sampled directly
  through the Bartlett decomposition of a Wishart matrix - distributionally
  exact, and ~100x faster because only O(r^2) variates are drawn per tuple;
* ``method="points"``: literal fresh uniform points per tuple.

The two methods share no randomness and cross-validate each other in tests;
the triangle case has a further deterministic quadrature oracle.
"""

from __future__ import annotations

import io
import json
import math
import struct
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate

from . import rng
from .cliques import max_clique_rows, unpack_words
from .errors import DomainError, InstanceTooLarge, QuadratureError, ResourceLimit
from .model import ModelParams
from .numerics import coord_cdf, log_coord_density

__all__ = [
    "MCEstimate",
    "SphereGraph",
    "adjacency_words_from_points",
    "exact_triangle_probability",
    "export_edge_list",
    "graph_from_edges",
    "independence_number",
    "load_graph",
    "max_clique",
    "mc_tuple_probability",
    "sample_graph",
    "save_graph",
    "triangle_probability_threshold",
]

EXACT_SEARCH_CUTOFF = 2000
DEFAULT_MEMORY_BUDGET = 2**31  # bytes of point storage


@dataclass(frozen=True)
class MCEstimate:
    """A Monte Carlo estimate with its binomial 95% confidence half-width."""

    estimate: float
    samples: int
    half_width_95: float
    seed: int

    @classmethod
    def from_counts(cls, hits: int, samples: int, seed: int) -> "MCEstimate":
        est = hits / samples
        return cls(
            estimate=est,
            samples=samples,
            half_width_95=1.96 * math.sqrt(est * (1.0 - est) / samples),
            seed=seed,
        )


@dataclass(frozen=True)
class SphereGraph:
    """A realization of the sphere-graph model (points optional after I/O)."""

    params: ModelParams
    seed: int
    n: int
    adjacency_words: np.ndarray  # (n, ceil(n/64)) uint64
    points: np.ndarray | None  # (n, k+1) float64 unit rows

    @cached_property
    def adjacency_rows(self) -> list[int]:
        """Adjacency as Python-int bitsets (row v has bit u iff u ~ v)."""
        return unpack_words(self.adjacency_words)

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.adjacency_words[u, v >> 6] >> np.uint64(v & 63)) & np.uint64(1))

    def edge_count(self) -> int:
        return sum(r.bit_count() for r in self.adjacency_rows) // 2

    def edges(self):
        """Yield (u, v) with u < v."""
        for u, row in enumerate(self.adjacency_rows):
            row = row >> (u + 1) << (u + 1)
            while row:
                bit = row & -row
                yield (u, bit.bit_length() - 1)
                row ^= bit


def _pack_bool_adjacency(adj: np.ndarray) -> np.ndarray:
    """Pack a boolean (n, n) adjacency into (n, ceil(n/64)) uint64 words."""
    n = adj.shape[0]
    nwords = max(1, (n + 63) // 64)
    bytes_ = np.packbits(adj, axis=1, bitorder="little")
    padded = np.zeros((n, nwords * 8), dtype=np.uint8)
    padded[:, : bytes_.shape[1]] = bytes_
    return padded.view("<u8").copy()


def adjacency_words_from_points(points: np.ndarray, threshold: float) -> np.ndarray:
    """Threshold-rule adjacency, packed. Symmetrized from the upper triangle
    so BLAS rounding asymmetries cannot produce a one-directional edge."""
    gram = points @ points.T
    upper = np.triu(gram <= threshold, 1)
    adj = upper | upper.T
    return _pack_bool_adjacency(adj)


def sample_graph(
    n: int,
    params: ModelParams,
    seed: int,
    include_points: bool = True,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> SphereGraph:
    """Sample n iid uniform points on the k-sphere and apply the threshold rule.

    Points are normalized Gaussian vectors drawn from the POINTS substream
    of ``seed``; the result is a pure function of (n, params, seed).
    """
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    kp1 = params.k + 1
    if n * kp1 * 8 > memory_budget:
        raise ResourceLimit(
            f"point matrix needs {n * kp1 * 8} bytes, over the budget {memory_budget}"
        )
    gen = rng.substream(seed, rng.POINTS, 0)
    pts = rng.standard_normals(gen, n * kp1).reshape(n, kp1)
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    words = adjacency_words_from_points(pts, params.threshold)
    return SphereGraph(
        params=params,
        seed=seed,
        n=n,
        adjacency_words=words,
        points=pts if include_points else None,
    )


def graph_from_edges(n: int, edges, params: ModelParams | None = None) -> SphereGraph:
    """Ad-hoc graph from an edge list (for synthetic bases and tests)."""
    rows = [0] * n
    for u, v in edges:
        if u == v:
            raise DomainError(f"self-loop at {u}")
        rows[u] |= 1 << v
        rows[v] |= 1 << u
    nwords = max(1, (n + 63) // 64)
    words = np.zeros((n, nwords), dtype=np.uint64)
    for i, row in enumerate(rows):
        for w in range(nwords):
            words[i, w] = (row >> (64 * w)) & 0xFFFFFFFFFFFFFFFF
    if params is None:
        params = ModelParams(k=1, p=0.25, c=0.5)
    return SphereGraph(params=params, seed=0, n=n, adjacency_words=words, points=None)


# ---------------------------------------------------------------------------
# Exact clique / independence search
# ---------------------------------------------------------------------------


def _check_search_size(g: SphereGraph, cap: int | None, cutoff: int) -> None:
    if g.n > cutoff and cap is None:
        raise InstanceTooLarge(
            f"instance too large: n={g.n} exceeds the exact-search cutoff "
            f"{cutoff}; pass a finite cap"
        )


def max_clique(
    g: SphereGraph, cap: int | None = None, cutoff: int = EXACT_SEARCH_CUTOFF
) -> tuple[int, list[int]]:
    """Exact maximum clique, or a size->=cap certificate when ``cap`` is given."""
    _check_search_size(g, cap, cutoff)
    return max_clique_rows(g.adjacency_rows, g.n, cap=cap)


def independence_number(
    g: SphereGraph, cap: int | None = None, cutoff: int = EXACT_SEARCH_CUTOFF
) -> tuple[int, list[int]]:
    """Maximum independent set via clique search on the implicit complement."""
    _check_search_size(g, cap, cutoff)
    return max_clique_rows(g.adjacency_rows, g.n, cap=cap, complement=True)


# ---------------------------------------------------------------------------
# Monte Carlo tuple probabilities
# ---------------------------------------------------------------------------


def _tuple_substream(seed: int, r: int, mode: str, method: str, batch: int):
    sub = (r << 2) | ((mode == "independent") << 1) | (method == "points")
    return rng.substream(seed, rng.TUPLES, (sub << 24) | batch)


def _batch_hits_gram(gen, b: int, r: int, kp1: int, threshold: float, mode: str) -> int:
    # Bartlett: W = A A^T ~ Wishart(k+1, I_r); Gram of unit points is
    # W_ij / sqrt(W_ii W_jj). Diag chi^2 dofs decrease by row.
    dofs = (kp1 - np.arange(r)).astype(float)
    chi2 = 2.0 * gen.standard_gamma(dofs / 2.0, size=(b, r))
    normals = gen.standard_normal((b, r, r))
    A = np.tril(normals, -1)
    idx = np.arange(r)
    A[:, idx, idx] = np.sqrt(chi2)
    W = A @ np.swapaxes(A, 1, 2)
    d = np.sqrt(W[:, idx, idx])
    ok = np.ones(b, dtype=bool)
    for i in range(r):
        for j in range(i + 1, r):
            edge = W[:, i, j] <= threshold * d[:, i] * d[:, j]
            ok &= edge if mode == "clique" else ~edge
    return int(ok.sum())


def _batch_hits_points(gen, b: int, r: int, kp1: int, threshold: float, mode: str) -> int:
    z = rng.standard_normals(gen, b * r * kp1).reshape(b, r, kp1)
    norms = np.sqrt(np.einsum("bri,bri->br", z, z))
    ok = np.ones(b, dtype=bool)
    for i in range(r):
        for j in range(i + 1, r):
            dots = np.einsum("bi,bi->b", z[:, i], z[:, j])
            edge = dots <= threshold * norms[:, i] * norms[:, j]
            ok &= edge if mode == "clique" else ~edge
    return int(ok.sum())


def mc_tuple_probability(
    params: ModelParams,
    r: int,
    mode: str,
    samples: int,
    seed: int,
    method: str = "gram",
) -> MCEstimate:
    """Fraction of r-tuples of fresh uniform points forming a clique/independent set.

    Tuples are consumed in fixed batches with one substream per batch, so
    results are a pure function of (params, r, mode, samples, seed, method)
    under any parallel schedule over batches.
    """
    if r < 2:
        raise DomainError(f"need r >= 2, got {r}")
    if samples < 1000:
        raise DomainError(f"need samples >= 1000, got {samples}")
    if mode not in ("clique", "independent"):
        raise DomainError(f"mode must be 'clique' or 'independent', got {mode!r}")
    if method not in ("gram", "points"):
        raise DomainError(f"method must be 'gram' or 'points', got {method!r}")
    kp1 = params.k + 1
    if r > kp1:
        raise DomainError(f"gram sampling needs r <= k+1, got r={r}, k={params.k}")
    threshold = params.threshold
    hits = 0
    done = 0
    batch_idx = 0
    fn = _batch_hits_gram if method == "gram" else _batch_hits_points
    while done < samples:
        b = min(rng.BATCH, samples - done)
        gen = _tuple_substream(seed, r, mode, method, batch_idx)
        hits += fn(gen, b, r, kp1, threshold, mode)
        done += b
        batch_idx += 1
    return MCEstimate.from_counts(hits, samples, seed)


# ---------------------------------------------------------------------------
# Exact triangle probability (cap-intersection quadrature)
# ---------------------------------------------------------------------------


def triangle_probability_threshold(k: int, s: float, tol: float = 1e-6) -> float:
    """P(three uniform points on S^k are pairwise below inner product s).

    Fix the first point as a pole; integrate the second point's coordinate
    u against the coordinate density; for each u the third point must land
    in the intersection of two caps, whose measure reduces to an inner
    integral of the coordinate density times a cap CDF on S^{k-1}.
    Absolute accuracy ``tol`` (achieved error is typically ~1e-9).
    """
    if k < 2:
        raise DomainError(f"triangle quadrature needs k >= 2, got {k}")
    if s >= 1.0:
        return 1.0
    if s <= -1.0:
        return 0.0
    # truncate where the density is below exp(-60) of its peak
    if k > 2:
        u_lo = max(-1.0, -math.sqrt(min(1.0, -math.expm1(-2.0 * 60.0 / (k - 2)))))
    else:
        u_lo = -1.0
    if s <= u_lo:
        u_lo = -1.0  # tail-only integral; keep the exact domain

    def inner(u: float) -> float:
        su = math.sqrt(max(0.0, 1.0 - u * u))

        def f(v: float) -> float:
            sv = math.sqrt(max(0.0, 1.0 - v * v))
            denom = su * sv
            if denom <= 0.0:
                z = 1.0 if s - u * v >= 0.0 else -1.0
            else:
                z = (s - u * v) / denom
            z = max(-1.0, min(1.0, z))
            return math.exp(log_coord_density(k, v)) * coord_cdf(k - 1, z)

        val, _ = integrate.quad(f, u_lo, s, epsabs=tol * 1e-4, epsrel=1e-10, limit=200)
        return val

    outer = lambda u: math.exp(log_coord_density(k, u)) * inner(u)
    val, err = integrate.quad(outer, u_lo, s, epsabs=tol * 1e-3, epsrel=1e-9, limit=200)
    if err > tol:
        raise QuadratureError("triangle quadrature did not converge", err)
    return min(1.0, max(0.0, val))


def exact_triangle_probability(params: ModelParams, tol: float = 1e-6) -> float:
    """Triangle probability of the model at its solved threshold."""
    return triangle_probability_threshold(params.k, params.threshold, tol)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_MAGIC = b"RSPH"
_FORMAT_VERSION = 1


def save_graph(g: SphereGraph, path: str, include_points: bool = True) -> None:
    """Versioned binary container: JSON header, optional point matrix,
    lower-triangular adjacency bitstream."""
    header = {
        "format_version": _FORMAT_VERSION,
        "n": g.n,
        "k": g.params.k,
        "p": g.params.p,
        "c": g.params.c,
        "seed": g.seed,
        "has_points": bool(include_points and g.points is not None),
    }
    hdr = json.dumps(header, sort_keys=True).encode()
    rows = g.adjacency_rows
    bits = io.BytesIO()
    acc = 0
    nacc = 0
    for v in range(1, g.n):
        for u in range(v):
            acc |= ((rows[v] >> u) & 1) << nacc
            nacc += 1
            if nacc == 8:
                bits.write(bytes([acc]))
                acc = 0
                nacc = 0
    if nacc:
        bits.write(bytes([acc]))
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(hdr)))
        fh.write(hdr)
        if header["has_points"]:
            fh.write(np.ascontiguousarray(g.points, dtype="<f8").tobytes())
        fh.write(bits.getvalue())


def load_graph(path: str) -> SphereGraph:
    """Inverse of ``save_graph``; the adjacency round-trips bit-exactly."""
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise DomainError(f"{path}: not a sphere-graph container")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen))
        if header["format_version"] != _FORMAT_VERSION:
            raise DomainError(f"unsupported format version {header['format_version']}")
        n = header["n"]
        k = header["k"]
        points = None
        if header["has_points"]:
            buf = fh.read(n * (k + 1) * 8)
            points = np.frombuffer(buf, dtype="<f8").reshape(n, k + 1).copy()
        data = fh.read()
    rows = [0] * n
    bit_idx = 0
    for v in range(1, n):
        for u in range(v):
            if (data[bit_idx >> 3] >> (bit_idx & 7)) & 1:
                rows[v] |= 1 << u
                rows[u] |= 1 << v
            bit_idx += 1
    nwords = max(1, (n + 63) // 64)
    words = np.zeros((n, nwords), dtype=np.uint64)
    for i, row in enumerate(rows):
        for w in range(nwords):
            words[i, w] = (row >> (64 * w)) & 0xFFFFFFFFFFFFFFFF
    params = ModelParams(k=k, p=header["p"], c=header["c"])
    return SphereGraph(
        params=params, seed=header["seed"], n=n, adjacency_words=words, points=points
    )


def export_edge_list(g: SphereGraph, path: str) -> None:
    """Plain text edge list: one "u v" pair per line, 0-indexed, u < v."""
    with open(path, "w") as fh:
        for u in range(g.n):
            row = g.adjacency_rows[u] >> (u + 1) << (u + 1)
            while row:
                bit = row & -row
                v = bit.bit_length() - 1
                fh.write(f"{u} {v}\n")
                row ^= bit
