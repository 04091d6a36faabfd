"""Bounded-independence generators from random low-degree polynomials.

A seed is ``sigma + 1`` field elements of ``m`` bits each, read as the
coefficients (constant term first, each chunk most significant bit first) of
a polynomial over GF(2^m). Output bit ``i`` is 1 when the polynomial evaluated
at the field element ``i`` is, as an integer, below ``bias_num``. Any
``sigma + 1`` outputs are then independent with ``Pr[1] = bias_num / 2^m``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import bitlinalg as bl
from .codes import RpeScheme
from .errors import DimensionMismatch, RegimeTooLarge, ThresholdViolation
from .gf2m import field as gf_field

EXHAUSTIVE_SEED_BITS = 24


@dataclass(frozen=True)
class CwGenerator:
    sigma: int
    field_log: int
    out_len: int
    bias_num: int

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.out_len > self.field_size:
            raise ValueError(f"{self.out_len} outputs need more than {self.field_size} field points")
        if not 0 <= self.bias_num <= self.field_size:
            raise ValueError("bias numerator outside [0, field size]")

    @classmethod
    def unbiased(cls, sigma: int, out_len: int) -> "CwGenerator":
        m = max(1, math.ceil(math.log2(max(out_len, 2))))
        return cls(sigma, m, out_len, 1 << (m - 1))

    @classmethod
    def biased(cls, sigma: int, out_len: int, p: float, precision_bits: int | None = None) -> "CwGenerator":
        """Generator with ``Pr[1]`` the closest multiple of ``2^-m`` to ``p``.

        ``m`` is the larger of ``ceil(log2 out_len)`` and ``precision_bits``
        (default: enough bits to represent ``p`` within a factor of 1/16).
        """
        if precision_bits is None:
            precision_bits = max(1, math.ceil(math.log2(1 / p)) + 4) if p > 0 else 1
        m = max(1, math.ceil(math.log2(max(out_len, 2))), precision_bits)
        q = min(1 << m, max(1, round(p * (1 << m))))
        return cls(sigma, m, out_len, q)

    @property
    def field_size(self) -> int:
        return 1 << self.field_log

    @property
    def seed_len(self) -> int:
        return (self.sigma + 1) * self.field_log

    @property
    def bias(self) -> Fraction:
        return Fraction(self.bias_num, self.field_size)

    def coefficients(self, seeds: np.ndarray) -> np.ndarray:
        seeds = np.atleast_2d(np.asarray(seeds, dtype=np.uint8))
        if seeds.shape[-1] != self.seed_len:
            raise DimensionMismatch(f"seed of length {seeds.shape[-1]}, expected {self.seed_len}")
        chunks = seeds.reshape(seeds.shape[0], self.sigma + 1, self.field_log).astype(np.int64)
        weights = 1 << np.arange(self.field_log - 1, -1, -1, dtype=np.int64)
        return chunks @ weights

    def seed_from_coefficients(self, coeffs) -> np.ndarray:
        return np.concatenate([bl.bits(format(int(c), f"0{self.field_log}b")) for c in coeffs])

    def values_from_coefficients(self, coeffs: np.ndarray) -> np.ndarray:
        points = np.arange(self.out_len, dtype=np.int64)
        return gf_field(self.field_log).poly_eval(coeffs, points)

    def eval_batch(self, seeds: np.ndarray) -> np.ndarray:
        vals = self.values_from_coefficients(self.coefficients(seeds))
        return (vals < self.bias_num).astype(np.uint8)

    def eval(self, seed) -> np.ndarray:
        return self.eval_batch(bl.bits(seed)[None, :])[0]

    def all_seeds(self) -> np.ndarray:
        """Every seed, enumerated in lexicographic order of the bit string."""
        if self.seed_len > EXHAUSTIVE_SEED_BITS:
            raise RegimeTooLarge(f"seed length {self.seed_len} exceeds {EXHAUSTIVE_SEED_BITS}")
        idx = np.arange(1 << self.seed_len, dtype=np.int64)
        shifts = np.arange(self.seed_len - 1, -1, -1, dtype=np.int64)
        return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def cw_eval(g: CwGenerator, seed) -> np.ndarray:
    return g.eval(seed)


@dataclass
class IndependenceReport:
    ok: bool
    order: int
    checked: int
    violations: list[tuple[int, ...]] = field(default_factory=list)


def _subset_is_product(outputs: np.ndarray, T, q: int, d: int) -> bool:
    total = outputs.shape[0]
    idx = np.zeros(total, dtype=np.int64)
    for j, pos in enumerate(T):
        idx |= outputs[:, pos].astype(np.int64) << j
    counts = np.bincount(idx, minlength=1 << len(T))
    size = len(T)
    for pattern, count in enumerate(counts):
        ones = bin(pattern).count("1")
        # count / total == (q/d)^ones * (1-q/d)^(size-ones), cleared of denominators
        if int(count) * d ** size != total * q ** ones * (d - q) ** (size - ones):
            return False
    return True


def _all_outputs(g: CwGenerator) -> np.ndarray:
    if g.seed_len > EXHAUSTIVE_SEED_BITS:
        raise RegimeTooLarge(f"seed length {g.seed_len} exceeds {EXHAUSTIVE_SEED_BITS}")
    coeffs = np.array(list(itertools.product(range(g.field_size), repeat=g.sigma + 1)), dtype=np.int64)
    coeffs = coeffs.reshape(-1, g.sigma + 1)
    vals = g.values_from_coefficients(coeffs)
    return (vals < g.bias_num).astype(np.uint8)


def verify_independence(g: CwGenerator, order: int, exact_order: bool = False) -> IndependenceReport:
    """Check every output subset of size ``<= order`` (only ``== order`` when ``exact_order``)."""
    outputs = _all_outputs(g)
    report = IndependenceReport(True, order, 0)
    sizes = [order] if exact_order else range(1, order + 1)
    for size in sizes:
        for T in itertools.combinations(range(g.out_len), size):
            report.checked += 1
            if not _subset_is_product(outputs, T, g.bias_num, g.field_size):
                report.ok = False
                report.violations.append(T)
    return report


def independence_witness(g: CwGenerator, size: int) -> tuple[int, ...] | None:
    """First output subset of the given size whose joint law is not the product law."""
    outputs = _all_outputs(g)
    for T in itertools.combinations(range(g.out_len), size):
        if not _subset_is_product(outputs, T, g.bias_num, g.field_size):
            return T
    return None


@dataclass(frozen=True)
class ConcatSource:
    """The stream ``G(seed) || E(seed; r) || U`` used to sample restrictions.

    Any ``sigma`` of its bits are jointly distributed as under a source with
    independent generator outputs and uniform remaining bits.
    """

    gen: CwGenerator
    rpe: RpeScheme
    u_len: int

    @property
    def sigma(self) -> int:
        return self.gen.sigma

    @property
    def length(self) -> int:
        return self.gen.out_len + self.rpe.n + self.u_len

    @property
    def randomness_len(self) -> int:
        return self.gen.seed_len + self.rpe.rand_len + self.u_len

    def draw_batch(self, seeds: np.ndarray, R: np.ndarray, U: np.ndarray) -> np.ndarray:
        seeds = np.atleast_2d(np.asarray(seeds, dtype=np.uint8))
        return np.concatenate([self.gen.eval_batch(seeds), self.rpe.encode_batch(seeds, R),
                               np.atleast_2d(np.asarray(U, dtype=np.uint8))], axis=1)

    def draw(self, seed, r, u) -> np.ndarray:
        return self.draw_batch(bl.bits(seed)[None, :], bl.bits(r)[None, :], bl.bits(u)[None, :])[0]

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.draw(rng.integers(0, 2, self.gen.seed_len, dtype=np.uint8),
                         rng.integers(0, 2, self.rpe.rand_len, dtype=np.uint8),
                         rng.integers(0, 2, self.u_len, dtype=np.uint8))


def concat_independent(gen: CwGenerator, rpe: RpeScheme, u_len: int) -> ConcatSource:
    if rpe.threshold < gen.sigma:
        raise ThresholdViolation(f"encoding threshold {rpe.threshold} is below sigma={gen.sigma}")
    if rpe.msg_len != gen.seed_len:
        raise DimensionMismatch(f"encoding takes {rpe.msg_len}-bit messages, seeds have {gen.seed_len} bits")
    return ConcatSource(gen, rpe, u_len)
