#!/usr/bin/env python
# One level of the restriction-based reduction: encode, tamper with a local function, decode, simulate.
import numpy as np

from nmcode.circuits import DTClass, random_local
from nmcode.harness.adversaries import flips
from nmcode.reductions import leaky
from nmcode.reductions.star import StarParams, star_decode, star_encode, star_simulator

rng = np.random.default_rng(3)
pp = StarParams.build(2, 19, 1, 0)
print("k =", pp.k, "n =", pp.n, "seed encoding length m =", pp.m, "randomness bits =", pp.randomness_len)

x = np.array([1, 0], dtype=np.uint8)
rand = pp.sample_randomness(rng)
c = star_encode(pp, x, rand=rand)
print("codeword:", "".join(map(str, c)))
print("decoded:", star_decode(pp, c))

# Tamper, then compare with the simulated tampering applied to the message directly.
for label, adv in (("flip last bit", flips(pp.n, [pp.n - 1])),
                   ("random 2-local", leaky.LeakyAdversary(random_local(pp.n, pp.n, 2, rng)))):
    sim = star_simulator(pp, adv, target=DTClass(2), rand=rand)
    print(label, "- simulator landed in the target class:", sim.good)
    for msg in ([0, 0], [0, 1], [1, 0], [1, 1]):
        msg = np.array(msg, dtype=np.uint8)
        real = star_decode(pp, leaky.eval_leaky(adv, star_encode(pp, msg, rand=rand)))
        print("  ", msg, "real:", real, "simulated:", leaky.eval_leaky(sim.adversary, msg))
