#!/usr/bin/env python
# Building blocks: a secret-sharing style encoding and a bounded-independence generator.
import itertools
from collections import Counter

import numpy as np

from nmcode.codes import RpeScheme, hamming74, secrecy_witness
from nmcode.prg import CwGenerator, independence_witness

rng = np.random.default_rng(0)

# Hamming(7,4) carrying one message bit and three random bits.
scheme = RpeScheme.from_code(hamming74(), 1)
print("scheme:", scheme.code.name, "n =", scheme.n, "random bits =", scheme.rand_len)

c = scheme.encode_random([1], rng)
print("encoding of 1:", c, "decodes to", scheme.decode(c))

# Any two positions look uniform whatever the message.
R = np.array(list(itertools.product((0, 1), repeat=3)), dtype=np.uint8)
for x in (0, 1):
    C = scheme.encode_batch(np.full((8, 1), x, dtype=np.uint8), R)
    print(f"x={x} positions (0, 5):", dict(Counter(map(tuple, C[:, [0, 5]].tolist()))))
print("three positions can leak:", secrecy_witness(scheme, 3))

# Fix positions 0 and 5 and resample the rest consistently with a new message.
fixed = scheme.reconstruct([0, 5], c, [0], rng)
print("reconstructed for 0:", fixed, "decodes to", scheme.decode(fixed))

# A biased generator: 16 output bits, each 1 with probability 3/16, pairwise independent.
g = CwGenerator.biased(1, 16, 3 / 16, precision_bits=4)
out = g.eval_batch(g.all_seeds())
print("seed bits:", g.seed_len, "mean output:", out.mean(), "expected:", 3 / 16)
print("first dependent triple:", independence_witness(g, 3))
