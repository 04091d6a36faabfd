"""Arithmetic in GF(2^m) for m <= 16 through log/antilog tables."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

# Primitive polynomials, bit i = coefficient of x^i.
PRIMITIVE_POLY = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}


def clmul_mod(a: int, b: int, m: int) -> int:
    """Reference product by shift-and-add; used to cross-check the tables."""
    poly = PRIMITIVE_POLY[m]
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> m:
            a ^= poly
    return out


class GF2m:
    def __init__(self, m: int):
        if m not in PRIMITIVE_POLY:
            raise ValueError(f"field degree {m} not in the table (1..16)")
        self.m = m
        self.size = 1 << m
        order = self.size - 1
        exp = np.zeros(2 * order + 1, dtype=np.int64)
        log = np.full(self.size, -1, dtype=np.int64)
        # for m = 1 the field is {0, 1} and the generator is 1 itself
        a = 1
        for i in range(order):
            exp[i] = a
            log[a] = i
            a <<= 1
            if a >> m:
                a ^= PRIMITIVE_POLY[m]
            if m == 1:
                a = 1
        exp[order: 2 * order] = exp[:order]
        self.exp = exp
        self.log = log
        self.order = order

    def mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        zero = (a == 0) | (b == 0)
        out = self.exp[(self.log[np.where(zero, 1, a)] + self.log[np.where(zero, 1, b)]) % self.order]
        return np.where(zero, 0, out)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return int(self.exp[(self.order - self.log[a]) % self.order])

    def poly_eval(self, coeffs: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Evaluate polynomials (rows of ``coeffs``, constant term first) at ``points``.

        Returns an array of shape ``(batch, len(points))``.
        """
        coeffs = np.atleast_2d(np.asarray(coeffs, dtype=np.int64))
        points = np.asarray(points, dtype=np.int64)
        nz = points != 0
        log_pts = np.where(nz, self.log[np.where(nz, points, 1)], 0)
        acc = np.repeat(coeffs[:, -1:], points.shape[0], axis=1)
        for j in range(coeffs.shape[1] - 2, -1, -1):
            live = (acc != 0) & nz[None, :]
            prod = self.exp[(self.log[np.where(live, acc, 1)] + log_pts[None, :]) % self.order]
            acc = np.where(live, prod, 0) ^ coeffs[:, j: j + 1]
        return acc

    def interpolate(self, xs, ys) -> list[int]:
        """Coefficients (constant first) of the unique polynomial of degree < len(xs) through the points."""
        xs = [int(v) for v in xs]
        ys = [int(v) for v in ys]
        if len(set(xs)) != len(xs):
            raise ValueError("interpolation points must be distinct")
        result = [0] * len(xs)
        for i, (xi, yi) in enumerate(zip(xs, ys)):
            if yi == 0:
                continue
            basis = [1]
            denom = 1
            for j, xj in enumerate(xs):
                if j == i:
                    continue
                # basis *= (x - xj); subtraction is XOR
                nxt = [0] * (len(basis) + 1)
                for t, c in enumerate(basis):
                    nxt[t + 1] ^= c
                    nxt[t] ^= int(self.mul(c, xj))
                basis = nxt
                denom = int(self.mul(denom, xi ^ xj))
            scale = int(self.mul(yi, self.inv(denom)))
            for t, c in enumerate(basis):
                result[t] ^= int(self.mul(c, scale))
        return result


@lru_cache(maxsize=None)
def field(m: int) -> GF2m:
    return GF2m(m)
