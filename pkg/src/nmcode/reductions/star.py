"""Hiding a message at pseudorandom surviving positions.

The encoder draws a short seed, expands it into a restriction, writes an
encoding of the seed into the first ``m`` positions and the message into the
last ``k`` survivors, and fills the rest at random. The decoder reads the
seed back from the first ``m`` positions and extracts the survivors.

Survivors are only counted at positions ``m..n-1`` so that the message never
overwrites the seed encoding.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .. import bitlinalg as bl
from ..circuits import AnyClass, Substitution
from ..codes import RpeScheme, scheme_for
from ..errors import DimensionMismatch, InfeasibleParams
from ..prg import CwGenerator, concat_independent
from ..restrictions import (
    _slots,
    embed_batch,
    extract_batch,
    find_fallback_seed,
    subset_from_string_batch,
)
from .leaky import ConstantFunction, LeakyAdversary


class StarRandomness(NamedTuple):
    zeta: np.ndarray
    r: np.ndarray
    u: np.ndarray


@dataclass(frozen=True, eq=False)
class StarParams:
    k: int
    n: int
    p_log_inv: int
    sigma: int
    rpe: RpeScheme
    gen: CwGenerator
    zeta_star: np.ndarray
    strict_decode: bool = False

    @classmethod
    def build(cls, k: int, n: int, p_log_inv: int, sigma: int, rpe: RpeScheme | None = None,
              enforce: bool = True, strict_decode: bool = False) -> "StarParams":
        """Assemble the parameters; ``enforce`` checks the security inequalities on ``k``."""
        if k < 1 or p_log_inv < 1:
            raise ValueError("k and log(1/p) must be positive")
        gen = CwGenerator.unbiased(sigma, n * p_log_inv)
        rpe = rpe if rpe is not None else scheme_for(gen.seed_len, sigma)
        concat_independent(gen, rpe, max(n - rpe.n, 0))
        m = rpe.n
        if k > n - m:
            raise InfeasibleParams("k <= n - m", f"k={k}, n={n}, m={m}")
        if enforce:
            p = 2.0 ** -p_log_inv
            if 4 * sigma / p_log_inv > k:
                raise InfeasibleParams("4*sigma/log(1/p) <= k", f"sigma={sigma}, log(1/p)={p_log_inv}, k={k}")
            if k > (n - m) * p / 2:
                raise InfeasibleParams("k <= (n-m)*p/2", f"k={k}, n={n}, m={m}, p={p}")
        zeta_star = find_fallback_seed(gen, n, m, k, p_log_inv)
        return cls(k, n, p_log_inv, sigma, rpe, gen, zeta_star, strict_decode)

    @property
    def m(self) -> int:
        return self.rpe.n

    @property
    def p(self) -> float:
        return 2.0 ** -self.p_log_inv

    @property
    def u_len(self) -> int:
        return self.n - self.m

    @property
    def randomness_len(self) -> int:
        return self.gen.seed_len + self.rpe.rand_len + self.u_len

    @cached_property
    def _star_rho1(self) -> np.ndarray:
        return self.survivors(self.zeta_star[None, :])[0]

    def survivors(self, seeds: np.ndarray) -> np.ndarray:
        return subset_from_string_batch(self.gen.eval_batch(seeds), self.n, self.p_log_inv)

    def region_count(self, rho1: np.ndarray) -> np.ndarray:
        return np.atleast_2d(rho1)[:, self.m:].sum(axis=1)

    def split_randomness(self, bits) -> StarRandomness:
        bits = bl.bits(bits)
        if bits.shape[0] != self.randomness_len:
            raise DimensionMismatch(f"{bits.shape[0]} randomness bits, expected {self.randomness_len}")
        a = self.gen.seed_len
        b = a + self.rpe.rand_len
        return StarRandomness(bits[:a], bits[a:b], bits[b:])

    def sample_randomness(self, rng: np.random.Generator) -> StarRandomness:
        return self.split_randomness(rng.integers(0, 2, self.randomness_len, dtype=np.uint8))

    def describe(self) -> dict:
        return {"k": self.k, "n": self.n, "p_log_inv": self.p_log_inv, "sigma": self.sigma,
                "m": self.m, "seed_len": self.gen.seed_len, "field_log": self.gen.field_log,
                "code": self.rpe.code.name, "randomness_len": self.randomness_len,
                "strict_decode": self.strict_decode}


def restriction_batch(pp: StarParams, Z: np.ndarray, R: np.ndarray, U: np.ndarray):
    """Returns (rho1, rho2, fallback) for a batch of randomness triples."""
    Z = np.atleast_2d(np.asarray(Z, dtype=np.uint8)).copy()
    rho1 = pp.survivors(Z)
    fallback = pp.region_count(rho1) < pp.k
    if fallback.any():
        Z[fallback] = pp.zeta_star
        rho1[fallback] = pp._star_rho1
    rho2 = np.concatenate([pp.rpe.encode_batch(Z, R), np.atleast_2d(U)], axis=1).astype(np.uint8)
    return rho1, rho2, fallback


def encode_batch(pp: StarParams, X: np.ndarray, Z: np.ndarray, R: np.ndarray, U: np.ndarray):
    """Returns (codewords, fallback flags); all inputs carry a leading batch axis."""
    X = np.atleast_2d(np.asarray(X, dtype=np.uint8))
    if X.shape[-1] != pp.k:
        raise DimensionMismatch(f"message of length {X.shape[-1]}, expected {pp.k}")
    rho1, rho2, fallback = restriction_batch(pp, Z, R, U)
    return embed_batch(X, rho1, rho2), fallback


def star_encode(pp: StarParams, x, rng: np.random.Generator | None = None,
                rand: StarRandomness | None = None) -> np.ndarray:
    if rand is None:
        rand = pp.sample_randomness(rng)
    C, _ = encode_batch(pp, bl.bits(x)[None, :], rand.zeta[None, :], rand.r[None, :], rand.u[None, :])
    return C[0]


def decode_batch(pp: StarParams, C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Returns (ok, messages); rows that decode to rejection have ``ok`` False."""
    C = np.atleast_2d(np.asarray(C, dtype=np.uint8))
    if C.shape[-1] != pp.n:
        raise DimensionMismatch(f"codeword of length {C.shape[-1]}, expected {pp.n}")
    seeds = pp.rpe.decode_batch(C[:, : pp.m])
    rho1 = pp.survivors(seeds)
    ok = pp.region_count(rho1) >= pp.k
    if pp.strict_decode:
        first = np.where(_slots(rho1, pp.k) == 0)
        first_pos = np.full(C.shape[0], pp.n)
        first_pos[first[0]] = first[1]
        ok &= first_pos >= pp.m
    _, X = extract_batch(C, rho1, pp.k)
    return ok, X


def star_decode(pp: StarParams, c) -> np.ndarray | None:
    ok, X = decode_batch(pp, bl.bits(c)[None, :])
    return X[0] if ok[0] else None


# ------------------------------------------------------------------ simulator

@dataclass(frozen=True, eq=False)
class _FirstBlock:
    """Leak the first ``m`` positions the wrapped final selector would choose.

    If the wrapped selector already rejects, the outcome is rejection no
    matter what leaks, so any ``m`` positions will do.
    """

    inner: object
    m: int

    def __call__(self, transcript):
        T = self.inner(transcript)
        return np.arange(self.m) if T is None else np.asarray(T)[: self.m]


@dataclass(frozen=True, eq=False)
class _Reindex:
    """Select the wrapped choice at the positions the decoder would extract from."""

    inner: object
    pp: StarParams
    memo: dict = field(default_factory=dict)

    def __call__(self, transcript):
        key = b"|".join(np.asarray(y, dtype=np.uint8).tobytes() for y in transcript)
        if key not in self.memo:
            self.memo[key] = self._choose(transcript)
        return self.memo[key]

    def _choose(self, transcript):
        T = self.inner(transcript[:-1])
        if T is None:
            return None
        seed = self.pp.rpe.decode(transcript[-1])
        rho1 = self.pp.survivors(seed[None, :])
        if self.pp.region_count(rho1)[0] < self.pp.k:
            return None
        slot = _slots(rho1, self.pp.k)[0]
        return np.asarray(T)[np.flatnonzero(slot >= 0)]


@dataclass
class StarSimulation:
    adversary: LeakyAdversary | ConstantFunction
    good: bool
    fallback: bool
    randomness: StarRandomness | None


def star_simulator(pp: StarParams, tau: LeakyAdversary, rng: np.random.Generator | None = None,
                   target=None, rand: StarRandomness | None = None, restriction=None) -> StarSimulation:
    """Turn an adversary on codewords into one on messages.

    The family is composed with the embedding of the sampled restriction; if
    any composed output leaves ``target`` the result is the constant zero
    function. A constant adversary maps to the constant decoding of its value.
    ``restriction`` may carry a precomputed ``(rho1, rho2, fallback)`` for ``rand``.
    """
    if isinstance(tau, ConstantFunction):
        value = None if tau.value is None else star_decode(pp, tau.value)
        return StarSimulation(ConstantFunction(value, pp.k), True, False, rand)
    if tau.n_inputs != pp.n or tau.out_len != pp.n:
        raise DimensionMismatch("adversary must read and write full codewords")
    target = AnyClass() if target is None else target
    if rand is None:
        rand = pp.sample_randomness(rng)
    if restriction is None:
        rho1, rho2, fallback = restriction_batch(pp, rand.zeta[None, :], rand.r[None, :], rand.u[None, :])
        restriction = (rho1[0], rho2[0], bool(fallback[0]))
    rho1, rho2, fallback = restriction
    family = tau.family.substitute(Substitution.embedding(rho1, rho2, pp.k))
    good = bool(np.all(target.contains(family)))
    if not good:
        return StarSimulation(ConstantFunction(np.zeros(pp.k, dtype=np.uint8), pp.k), False,
                              bool(fallback), rand)
    adv = LeakyAdversary(
        family,
        tuple(tau.leak_selectors) + (_FirstBlock(tau.final_selector, pp.m),),
        tuple(tau.leak_sizes) + (pp.m,),
        _Reindex(tau.final_selector, pp),
        pp.k,
    )
    return StarSimulation(adv, True, bool(fallback), rand)
