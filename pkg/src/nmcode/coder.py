"""Randomized coders and their composition."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import bitlinalg as bl
from .errors import DimensionMismatch, LengthMismatch


@dataclass(frozen=True, eq=False)
class Coder:
    """``encode(x, rng)`` gives a codeword; ``decode(c)`` gives a message or None."""

    name: str
    k: int
    n: int
    encode_fn: Callable[[np.ndarray, np.random.Generator], np.ndarray]
    decode_fn: Callable[[np.ndarray], np.ndarray | None]
    parts: tuple = ()
    meta: dict = field(default_factory=dict)

    @property
    def stages(self) -> tuple["Coder", ...]:
        """Leaf coders, outermost (longest codeword) first."""
        return self.parts if self.parts else (self,)

    def encode(self, x, rng: np.random.Generator) -> np.ndarray:
        x = bl.bits(x)
        if x.shape[0] != self.k:
            raise DimensionMismatch(f"{self.name}: message of length {x.shape[0]}, expected {self.k}")
        return self.encode_fn(x, rng)

    def decode(self, c) -> np.ndarray | None:
        if c is None:
            return None
        c = bl.bits(c)
        if c.shape[0] != self.n:
            raise DimensionMismatch(f"{self.name}: codeword of length {c.shape[0]}, expected {self.n}")
        return self.decode_fn(c)


def identity_coder(k: int) -> Coder:
    return Coder(f"identity({k})", k, k, lambda x, rng: x.copy(), lambda c: c.copy())


def compose(outer: Coder, inner: Coder) -> Coder:
    """Encode with ``inner`` first, then ``outer``; decode in the opposite order."""
    if outer.k != inner.n:
        raise LengthMismatch(f"outer coder takes {outer.k}-bit messages, inner codewords have {inner.n} bits")

    def encode(x, rng):
        return outer.encode(inner.encode(x, rng), rng)

    def decode(c):
        return inner.decode(outer.decode(c))

    return Coder(f"{outer.name} o {inner.name}", inner.k, outer.n, encode, decode,
                 outer.stages + inner.stages)


def compose_all(coders) -> Coder:
    """Compose a list given outermost first."""
    coders = list(coders)
    out = coders[-1]
    for c in reversed(coders[:-1]):
        out = compose(c, out)
    return out
