"""Restrictions, their string encoding, and placing a message at surviving positions.

A restriction over ``n`` positions is a survivor mask ``rho1`` (1 = survives,
left free) plus fill values ``rho2`` for everything else. Positions are
0-based; where fewer than ``k`` survivors exist, the missing message positions
are reported as the sentinel ``n`` (one past the end), which numpy refuses to
index rather than wrapping.

``None`` stands for the rejection symbol throughout the package.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bitlinalg as bl
from .errors import DimensionMismatch, NotFound, StreamExhausted
from .gf2m import field as gf_field
from .prg import CwGenerator


@dataclass(frozen=True, eq=False)
class Restriction:
    rho1: np.ndarray
    rho2: np.ndarray

    def __post_init__(self):
        if self.rho1.shape != self.rho2.shape:
            raise DimensionMismatch("mask and fill lengths differ")

    @property
    def n(self) -> int:
        return self.rho1.shape[0]

    @property
    def survivors(self) -> np.ndarray:
        return np.flatnonzero(self.rho1)

    def merge(self, z) -> np.ndarray:
        """Full assignment taking ``z`` (one bit per survivor, in order) at the survivors."""
        out = self.rho2.copy()
        out[self.survivors] = bl.bits(z)
        return out


@dataclass(frozen=True)
class RestrictionDistribution:
    n: int
    p_log_inv: int

    def __post_init__(self):
        if self.p_log_inv < 1:
            raise ValueError("log(1/p) must be a positive integer")

    @property
    def p(self) -> float:
        return 2.0 ** -self.p_log_inv

    @property
    def draw_len(self) -> int:
        return self.n * self.p_log_inv + self.n


class BitStream:
    """Sequential reader over a fixed bit string."""

    def __init__(self, data):
        self._data = bl.bits(data)
        self._pos = 0

    def take(self, count: int) -> np.ndarray:
        if self._pos + count > self._data.shape[0]:
            raise StreamExhausted(f"asked for {count} bits with {self.remaining} left")
        out = self._data[self._pos: self._pos + count]
        self._pos += count
        return out

    @property
    def remaining(self) -> int:
        return self._data.shape[0] - self._pos


def subset_from_string_batch(S: np.ndarray, n: int, p_log_inv: int) -> np.ndarray:
    S = np.atleast_2d(np.asarray(S, dtype=np.uint8))
    if S.shape[-1] != n * p_log_inv:
        raise DimensionMismatch(f"string of length {S.shape[-1]}, expected {n * p_log_inv}")
    return S.reshape(S.shape[0], n, p_log_inv).min(axis=2)


def subset_from_string(s, n: int, p_log_inv: int) -> np.ndarray:
    """Survivor mask: position ``i`` survives iff its block of ``p_log_inv`` bits is all ones."""
    return subset_from_string_batch(bl.bits(s)[None, :], n, p_log_inv)[0]


def ext_indices(rho1, k: int) -> tuple[int, ...]:
    """Positions of the last ``k`` survivors in increasing order, padded with ``n``."""
    rho1 = bl.bits(rho1)
    if k < 1:
        raise ValueError("k must be at least 1")
    ones = np.flatnonzero(rho1)
    if ones.shape[0] >= k:
        return tuple(int(i) for i in ones[-k:])
    return tuple(int(i) for i in ones) + (rho1.shape[0],) * (k - ones.shape[0])


def _slots(rho1: np.ndarray, k: int) -> np.ndarray:
    """For each position, which message bit it carries, or -1."""
    rho1 = rho1.astype(np.int64)
    order = np.cumsum(rho1, axis=-1) - 1
    offset = np.maximum(rho1.sum(axis=-1, keepdims=True) - k, 0)
    slot = order - offset
    return np.where((rho1 == 1) & (slot >= 0) & (slot < k), slot, -1)


def embed_batch(X: np.ndarray, rho1: np.ndarray, rho2: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.uint8))
    rho1 = np.atleast_2d(rho1)
    rho2 = np.atleast_2d(np.asarray(rho2, dtype=np.uint8))
    k = X.shape[-1]
    slot = _slots(rho1, k)
    carried = np.take_along_axis(X, np.maximum(slot, 0), axis=-1) if k else np.zeros_like(rho2)
    return np.where(slot >= 0, carried, rho2).astype(np.uint8)


def embed(x, rho: Restriction) -> np.ndarray:
    return embed_batch(bl.bits(x)[None, :], rho.rho1[None, :], rho.rho2[None, :])[0]


def extract_batch(C: np.ndarray, rho1: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Returns (ok mask, extracted bits); rows with fewer than ``k`` survivors are not ok."""
    C = np.atleast_2d(np.asarray(C, dtype=np.uint8))
    rho1 = np.atleast_2d(rho1)
    ok = rho1.sum(axis=-1) >= k
    slot = _slots(rho1, k)
    out = np.zeros((C.shape[0], k), dtype=np.uint8)
    rows, cols = np.nonzero(slot >= 0)
    out[rows, slot[rows, cols]] = C[rows, cols]
    out[~ok] = 0
    return ok, out


def extract(c, rho1, k: int) -> np.ndarray | None:
    ok, out = extract_batch(bl.bits(c)[None, :], bl.bits(rho1)[None, :], k)
    return out[0] if ok[0] else None


def sample_restriction(dist: RestrictionDistribution, stream: BitStream) -> Restriction:
    s = stream.take(dist.n * dist.p_log_inv)
    y = stream.take(dist.n)
    return Restriction(subset_from_string(s, dist.n, dist.p_log_inv), y.copy())


def _search_seed(g: CwGenerator, accept: Callable[[np.ndarray], bool], forced_points: list[int],
                 budget: int) -> np.ndarray:
    """Interpolate through ``forced_points`` when the degree allows, else scan seeds in order."""
    if g.bias_num >= 1 and len(forced_points) <= g.sigma + 1:
        gf = gf_field(g.field_log)
        # value bias_num - 1 is the largest value that still reads as a one
        free = [v for v in range(g.field_size) if v not in set(forced_points)]
        xs = list(forced_points) + free[: g.sigma + 1 - len(forced_points)]
        ys = [g.bias_num - 1] * len(forced_points) + [0] * (len(xs) - len(forced_points))
        seed = g.seed_from_coefficients(gf.interpolate(xs, ys))
        if accept(g.eval(seed)):
            return seed
    chunk = 4096
    limit = min(budget, 1 << g.seed_len)
    shifts = np.arange(g.seed_len - 1, -1, -1, dtype=np.int64)
    for start in range(0, limit, chunk):
        idx = np.arange(start, min(start + chunk, limit), dtype=np.int64)
        seeds = ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
        outs = g.eval_batch(seeds)
        for seed, out in zip(seeds, outs):
            if accept(out):
                return seed
    raise NotFound(f"no acceptable seed among the first {limit}")


def find_fallback_seed(g: CwGenerator, n: int, m: int, k: int, p_log_inv: int,
                       budget: int = 1 << 20) -> np.ndarray:
    """A seed whose restriction keeps at least ``k`` survivors at positions ``m..n-1``."""
    b = p_log_inv

    def accept(out: np.ndarray) -> bool:
        return int(subset_from_string(out, n, b)[m:].sum()) >= k

    forced = [pos * b + j for pos in range(n - k, n) for j in range(b)]
    return _search_seed(g, accept, forced, budget)


def find_dense_seed(g: CwGenerator, ones: int, budget: int = 1 << 20,
                    candidates: int = 0) -> np.ndarray:
    """A seed whose output has at least ``ones`` ones.

    With ``candidates`` > 0, the sparsest acceptable seed among that many
    draws from a fixed-seed generator wins; a seed with few ones keeps the
    fallback from flooding every position with survivors.
    """
    if candidates:
        seeds = np.random.default_rng(0).integers(0, 2, (candidates, g.seed_len), dtype=np.uint8)
        counts = g.eval_batch(seeds).sum(axis=1)
        counts = np.where(counts >= ones, counts, np.iinfo(np.int64).max)
        best = int(np.argmin(counts))
        if counts[best] < np.iinfo(np.int64).max:
            return seeds[best]
    forced = list(range(g.out_len - ones, g.out_len))
    return _search_seed(g, lambda out: int(out.sum()) >= ones, forced, budget)
