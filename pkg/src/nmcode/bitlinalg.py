"""GF(2) vectors and matrices.

Vectors are 1-D ``uint8`` numpy arrays holding 0/1 and matrices are 2-D
``uint8`` arrays. Positions are 0-based. Elimination packs each row into a
Python int, bit ``j`` of the int holding column ``j`` (LSB first), which keeps
row operations to a single XOR regardless of width.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import DimensionMismatch, NotFullRank


def bits(value: str | Sequence[int] | np.ndarray) -> np.ndarray:
    """Coerce a ``"0110"`` string or a 0/1 sequence into a bit vector."""
    if isinstance(value, str):
        text = "".join(value.split()).replace("_", "")
        if set(text) - {"0", "1"}:
            raise ValueError(f"not a bit string: {value!r}")
        value = [int(ch) for ch in text]
    arr = np.asarray(value, dtype=np.uint8)
    if arr.size and arr.max() > 1:
        raise ValueError("bit vectors hold only 0 and 1")
    return arr.reshape(-1) if arr.ndim != 2 else arr


def to_str(v: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in np.asarray(v).reshape(-1))


def pack_rows(M: np.ndarray) -> list[int]:
    """Rows of ``M`` as ints, column ``j`` at bit ``j``."""
    M = np.asarray(M, dtype=np.uint8)
    if M.ndim != 2:
        raise DimensionMismatch("expected a matrix")
    if M.shape[1] == 0:
        return [0] * M.shape[0]
    packed = np.packbits(M, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def unpack_int(value: int, width: int) -> np.ndarray:
    if width == 0:
        return np.zeros(0, dtype=np.uint8)
    raw = value.to_bytes((width + 7) // 8, "little")
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[:width].copy()


def matmul(M: np.ndarray, v: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=np.uint8)
    v = np.asarray(v, dtype=np.uint8)
    if M.ndim != 2 or v.ndim != 1 or v.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"matrix {M.shape} cannot multiply vector of length {v.shape}")
    return ((M.astype(np.int64) @ v.astype(np.int64)) & 1).astype(np.uint8)


def matmul_batch(V: np.ndarray, Mt: np.ndarray) -> np.ndarray:
    """Rows of ``V`` times ``Mt`` over GF(2); ``V`` is (B, a) and ``Mt`` is (a, b)."""
    V = np.asarray(V, dtype=np.uint8)
    Mt = np.asarray(Mt, dtype=np.uint8)
    if V.shape[-1] != Mt.shape[0]:
        raise DimensionMismatch(f"shapes {V.shape} and {Mt.shape} do not chain")
    if Mt.shape[0] == 0:
        return np.zeros(V.shape[:-1] + (Mt.shape[1],), dtype=np.uint8)
    # float32 matmul is exact for sums below 2**24 and far faster than int64
    if Mt.shape[0] < (1 << 24):
        prod = V.astype(np.float32) @ Mt.astype(np.float32)
        return (prod.astype(np.int64) & 1).astype(np.uint8)
    return ((V.astype(np.int64) @ Mt.astype(np.int64)) & 1).astype(np.uint8)


def _reduce(rows: list[int], ncols: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns).

    Pivot search scans rows in order and takes the first one with the bit set.
    """
    rows = list(rows)
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        bit = 1 << col
        pick = next((i for i in range(r, len(rows)) if rows[i] & bit), None)
        if pick is None:
            continue
        rows[r], rows[pick] = rows[pick], rows[r]
        prow = rows[r]
        for i in range(len(rows)):
            if i != r and rows[i] & bit:
                rows[i] ^= prow
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def rank(M: np.ndarray) -> int:
    M = np.asarray(M, dtype=np.uint8)
    _, pivots = _reduce(pack_rows(M), M.shape[1])
    return len(pivots)


@dataclass(frozen=True)
class SolutionSet:
    """Affine solution set ``particular + span(null_basis)``; ``particular`` is None when empty."""

    ncols: int
    particular: np.ndarray | None
    null_basis: np.ndarray

    @property
    def is_empty(self) -> bool:
        return self.particular is None

    @property
    def dim(self) -> int:
        return 0 if self.is_empty else self.null_basis.shape[0]

    @property
    def size(self) -> int:
        return 0 if self.is_empty else 1 << self.dim

    def combine(self, coeffs: np.ndarray) -> np.ndarray:
        """The solution reached by the null-space combination ``coeffs``."""
        if self.is_empty:
            raise ValueError("empty solution set")
        coeffs = np.asarray(coeffs, dtype=np.uint8)
        if self.dim == 0:
            return self.particular.copy()
        return self.particular ^ matmul_batch(coeffs[None, :], self.null_basis)[0]

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.combine(rng.integers(0, 2, size=self.dim, dtype=np.uint8))

    def __iter__(self) -> Iterator[np.ndarray]:
        if self.is_empty:
            return
        for idx in range(self.size):
            yield self.combine(unpack_int(idx, self.dim))

    def contains(self, v: np.ndarray) -> bool:
        if self.is_empty:
            return False
        diff = np.asarray(v, dtype=np.uint8) ^ self.particular
        if self.dim == 0:
            return not diff.any()
        return rank(np.vstack([self.null_basis, diff])) == self.dim



def _solve_packed(rows: list[int], ncols: int) -> SolutionSet:
    """Solve with rows holding the right-hand side at bit ``ncols``."""
    reduced, pivots = _reduce(rows, ncols)
    rhs_bit = 1 << ncols
    for row in reduced[len(pivots):]:
        if row == rhs_bit:
            return SolutionSet(ncols, None, np.zeros((0, ncols), dtype=np.uint8))
    particular = 0
    for row, col in zip(reduced, pivots):
        if row & rhs_bit:
            particular |= 1 << col
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        vec = 1 << free
        fbit = 1 << free
        for row, col in zip(reduced, pivots):
            if row & fbit:
                vec |= 1 << col
        basis.append(unpack_int(vec, ncols))
    null = np.array(basis, dtype=np.uint8).reshape(len(basis), ncols)
    return SolutionSet(ncols, unpack_int(particular, ncols), null)


def solve_affine(M: np.ndarray, b: np.ndarray) -> SolutionSet:
    M = np.asarray(M, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    if M.ndim != 2 or b.ndim != 1 or b.shape[0] != M.shape[0]:
        raise DimensionMismatch(f"system {M.shape} with right-hand side of length {b.shape}")
    ncols = M.shape[1]
    rows = [row | (int(bi) << ncols) for row, bi in zip(pack_rows(M), b)]
    return _solve_packed(rows, ncols)


def solve_packed_rows(rows: list[int], rhs: Sequence[int], ncols: int) -> SolutionSet:
    """Like :func:`solve_affine` for callers that already hold packed rows."""
    return _solve_packed([row | (int(bi) << ncols) for row, bi in zip(rows, rhs)], ncols)


def null_space(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=np.uint8)
    return solve_affine(M, np.zeros(M.shape[0], dtype=np.uint8)).null_basis


def left_inverse(A: np.ndarray) -> np.ndarray:
    """A matrix ``B`` with ``B @ A = I`` for a full-column-rank ``A``.

    Free variables are set to zero, so a systematic ``[I; P]`` yields ``[I | 0]``.
    """
    A = np.asarray(A, dtype=np.uint8)
    n, k = A.shape
    if rank(A) < k:
        raise NotFullRank(f"generator of shape {A.shape} has rank below {k}")
    At_rows = pack_rows(A.T)
    B = np.zeros((k, n), dtype=np.uint8)
    for j in range(k):
        rhs = [1 if i == j else 0 for i in range(k)]
        sol = solve_packed_rows(At_rows, rhs, n)
        B[j] = sol.particular
    return B
