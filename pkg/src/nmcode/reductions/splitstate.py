"""Reducing leaky local tampering to split-state tampering.

A codeword is three regions laid end to end: ``Z`` (an encoding of a short
seed), ``X_L`` (an encoding of the left message hidden at pseudorandom
positions chosen by the seed) and ``S_R`` (an encoding of the right message).
Every encoding here is a reconstructable probabilistic encoding, so the
simulator can fix a few coordinates first and fill in consistent encodings
later.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .. import bitlinalg as bl
from ..codes import RpeScheme, direct_sum, repetition_code, scheme_for
from ..errors import DimensionMismatch, InfeasibleParams, TooManyConstraints
from ..prg import CwGenerator
from ..restrictions import _slots, embed_batch, extract_batch, find_dense_seed
from .leaky import ConstantFunction, LeakyAdversary, _check_indices

E_THIRD = math.exp(-1 / 3)


def repetition_scheme(k: int, block: int) -> RpeScheme:
    """``k`` independent repetition blocks; any ``block - 1`` positions look uniform."""
    code = repetition_code(block) if k == 1 else direct_sum(repetition_code(block), k)
    return RpeScheme.from_code(code)


class SsRandomness(NamedTuple):
    zeta: np.ndarray
    rho2: np.ndarray
    r_L: np.ndarray
    r_Z: np.ndarray
    r_R: np.ndarray


@dataclass(frozen=True, eq=False)
class SplitStateParams:
    k: int
    sigma: int
    m: int
    q: int
    ell: int
    tau: int
    rpe_L: RpeScheme
    rpe_Z: RpeScheme
    rpe_R: RpeScheme
    gen: CwGenerator
    zeta_star: np.ndarray
    checks: dict = field(default_factory=dict)

    @classmethod
    def build(cls, k: int, sigma: int, m: int, q: int, ell: int, tau: int,
              rpe_L: RpeScheme, rpe_R: RpeScheme, rpe_Z: RpeScheme | None = None,
              enforce: bool = True, precision_bits: int | None = None,
              z_threshold: int | None = None) -> "SplitStateParams":
        """Check the inequalities and pick a fallback seed.

        Without ``rpe_Z`` the seed encoding is the shortest one with threshold
        ``z_threshold`` (default ``ell*m*q``).
        """
        if rpe_L.msg_len != k or rpe_R.msg_len != k:
            raise DimensionMismatch("left and right encodings must take k-bit messages")
        n_L = rpe_L.n
        if n_L > tau:
            raise InfeasibleParams("n_L <= tau", f"n_L={n_L}, tau={tau}")
        gen = CwGenerator.biased(sigma, tau, 3 * n_L / (2 * tau), precision_bits)
        if rpe_Z is None:
            rpe_Z = scheme_for(gen.seed_len, ell * m * q if z_threshold is None else z_threshold)
        if rpe_Z.msg_len != gen.seed_len:
            raise DimensionMismatch(f"seed encoding takes {rpe_Z.msg_len} bits, seeds have {gen.seed_len}")
        from ..params import ss_checks

        checks = ss_checks(k=k, sigma=sigma, m=m, q=q, ell=ell, tau=tau, n_L=n_L, n_Z=rpe_Z.n,
                           n_R=rpe_R.n, theta_L=rpe_L.threshold, theta_Z=rpe_Z.threshold,
                           theta_R=rpe_R.threshold, seed_len=gen.seed_len)
        if enforce:
            for name, ok in checks["per_encoding"].items():
                if not ok:
                    raise InfeasibleParams(name, str(checks["values"]))
        zeta_star = find_dense_seed(gen, n_L, candidates=4096)
        return cls(k, sigma, m, q, ell, tau, rpe_L, rpe_Z, rpe_R, gen, zeta_star, checks)

    @classmethod
    def minimal(cls, k: int, sigma: int, m: int, q: int, ell: int, n_L: int | None = None,
                enforce: bool = True) -> "SplitStateParams":
        """Smallest sizes meeting the per-encoding inequalities with repetition encodings.

        ``n_L`` defaults to the least length for which the survivor-count
        tail bound applies at this ``sigma``.
        """
        leak = ell * m * q
        if n_L is None:
            n_L = max(leak + 1, math.ceil(sigma / (0.25 * 1.5 * E_THIRD)), 2)
        block_L = max(math.ceil(n_L / k), leak + 1)
        rpe_L = repetition_scheme(k, block_L)
        tau = 4 * rpe_L.n
        for _ in range(32):
            gen = CwGenerator.biased(sigma, tau, 3 * rpe_L.n / (2 * tau))
            rpe_Z = scheme_for(gen.seed_len, leak)
            theta_R = ell * (rpe_L.n + rpe_Z.n + m * q)
            rpe_R = repetition_scheme(k, math.ceil((theta_R + 1) / k) if k > 1 else theta_R + 1)
            while rpe_R.threshold < theta_R:
                rpe_R = repetition_scheme(k, rpe_R.n // k + 1)
            need = math.ceil(9 * ell * (rpe_R.n + rpe_Z.n + m * q) * rpe_L.n / (4 * rpe_L.threshold))
            if need == tau:
                break
            tau = need
        return cls.build(k, sigma, m, q, ell, tau, rpe_L, rpe_R, rpe_Z, enforce=enforce)

    @property
    def n_L(self) -> int:
        return self.rpe_L.n

    @property
    def n_Z(self) -> int:
        return self.rpe_Z.n

    @property
    def n_R(self) -> int:
        return self.rpe_R.n

    @property
    def n(self) -> int:
        return self.n_Z + self.tau + self.n_R

    @property
    def p(self) -> float:
        return 3 * self.n_L / (2 * self.tau)

    @property
    def seed_len(self) -> int:
        return self.gen.seed_len

    @property
    def regions(self) -> tuple[slice, slice, slice]:
        a, b = self.n_Z, self.n_Z + self.tau
        return slice(0, a), slice(a, b), slice(b, self.n)

    @cached_property
    def _star_rho1(self) -> np.ndarray:
        return self.gen.eval(self.zeta_star)

    @property
    def randomness_lens(self) -> tuple[int, ...]:
        return (self.seed_len, self.tau, self.rpe_L.rand_len, self.rpe_Z.rand_len, self.rpe_R.rand_len)

    @property
    def randomness_len(self) -> int:
        return sum(self.randomness_lens)

    def split_randomness(self, bits) -> SsRandomness:
        bits = bl.bits(bits)
        if bits.shape[0] != self.randomness_len:
            raise DimensionMismatch(f"{bits.shape[0]} randomness bits, expected {self.randomness_len}")
        cuts = np.cumsum(self.randomness_lens)[:-1]
        return SsRandomness(*np.split(bits, cuts))

    def sample_randomness(self, rng: np.random.Generator) -> SsRandomness:
        return self.split_randomness(rng.integers(0, 2, self.randomness_len, dtype=np.uint8))

    def describe(self) -> dict:
        return {"k": self.k, "sigma": self.sigma, "m": self.m, "q": self.q, "ell": self.ell,
                "n_Z": self.n_Z, "n_L": self.n_L, "tau": self.tau, "n_R": self.n_R, "n": self.n,
                "p": self.p, "bias": str(self.gen.bias), "field_log": self.gen.field_log,
                "seed_len": self.seed_len, "codes": [self.rpe_L.code.name, self.rpe_Z.code.name,
                                                     self.rpe_R.code.name],
                "thresholds": [self.rpe_L.threshold, self.rpe_Z.threshold, self.rpe_R.threshold]}


# ------------------------------------------------------------ encode / decode

def seed_restriction_batch(pp: SplitStateParams, seeds: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (seeds after fallback, survivor masks, fallback flags)."""
    seeds = np.atleast_2d(np.asarray(seeds, dtype=np.uint8)).copy()
    rho1 = pp.gen.eval_batch(seeds)
    fallback = rho1.sum(axis=1) < pp.n_L
    if fallback.any():
        seeds[fallback] = pp.zeta_star
        rho1[fallback] = pp._star_rho1
    return seeds, rho1, fallback


def encode_batch(pp: SplitStateParams, XL, XR, rand: SsRandomness) -> tuple[np.ndarray, np.ndarray]:
    """Batch encoder; every field of ``rand`` carries a leading batch axis.

    Returns (codewords laid out as Z | X_L | S_R, fallback flags).
    """
    XL = np.atleast_2d(np.asarray(XL, dtype=np.uint8))
    XR = np.atleast_2d(np.asarray(XR, dtype=np.uint8))
    if XL.shape[-1] != pp.k or XR.shape[-1] != pp.k:
        raise DimensionMismatch(f"messages must have {pp.k} bits per side")
    s_L = pp.rpe_L.encode_batch(XL, rand.r_L)
    S_R = pp.rpe_R.encode_batch(XR, rand.r_R)
    seeds, rho1, fallback = seed_restriction_batch(pp, rand.zeta)
    X_L = embed_batch(s_L, rho1, rand.rho2)
    Z = pp.rpe_Z.encode_batch(seeds, rand.r_Z)
    return np.concatenate([Z, X_L, S_R], axis=1).astype(np.uint8), fallback


def ss_encode(pp: SplitStateParams, xL, xR, rng: np.random.Generator | None = None,
              rand: SsRandomness | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if rand is None:
        rand = pp.sample_randomness(rng)
    batch = SsRandomness(*(np.asarray(a)[None, :] for a in rand))
    C, _ = encode_batch(pp, bl.bits(xL)[None, :], bl.bits(xR)[None, :], batch)
    return split_codeword(pp, C[0])


def split_codeword(pp: SplitStateParams, c) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    c = np.asarray(c, dtype=np.uint8)
    if c.shape[-1] != pp.n:
        raise DimensionMismatch(f"codeword of length {c.shape[-1]}, expected {pp.n}")
    z, x, r = pp.regions
    return c[..., z], c[..., x], c[..., r]


def decode_batch(pp: SplitStateParams, C) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (ok, left messages, right messages) for full codewords."""
    C = np.atleast_2d(np.asarray(C, dtype=np.uint8))
    Z, X, S = split_codeword(pp, C)
    rho = pp.gen.eval_batch(pp.rpe_Z.decode_batch(Z))
    ok = rho.sum(axis=1) >= pp.n_L
    _, s_L = extract_batch(X, rho, pp.n_L)
    return ok, pp.rpe_L.decode_batch(s_L), pp.rpe_R.decode_batch(S)


def ss_decode(pp: SplitStateParams, Z, X_L, S_R) -> tuple[np.ndarray, np.ndarray] | None:
    Z, X_L, S_R = bl.bits(Z), bl.bits(X_L), bl.bits(S_R)
    if (Z.shape[0], X_L.shape[0], S_R.shape[0]) != (pp.n_Z, pp.tau, pp.n_R):
        raise DimensionMismatch("region lengths do not match the parameters")
    ok, xl, xr = decode_batch(pp, np.concatenate([Z, X_L, S_R])[None, :])
    return (xl[0], xr[0]) if ok[0] else None


def decode_word(pp: SplitStateParams, c) -> np.ndarray | None:
    """Decoder on the concatenated codeword, returning ``xL || xR``."""
    if c is None:
        return None
    ok, xl, xr = decode_batch(pp, np.asarray(c, dtype=np.uint8)[None, :])
    return np.concatenate([xl[0], xr[0]]) if ok[0] else None


# ------------------------------------------------------------------ simulator

class _Supports:
    """Input supports of every family output, computed once per adversary."""

    def __init__(self, family, n: int):
        self.n = n
        if hasattr(family, "pruned"):
            self.deps = family.pruned().deps
            self.sets = None
        else:
            self.deps = None
            self.sets = [np.asarray(m.support, dtype=np.int64) for m in family.members]

    def mask(self, outputs) -> np.ndarray:
        out = np.zeros(self.n, dtype=bool)
        outputs = np.asarray(outputs, dtype=np.int64)
        if self.deps is not None:
            d = self.deps[outputs].ravel()
            out[d[d >= 0]] = True
        else:
            for j in outputs:
                out[self.sets[int(j)]] = True
        return out


@dataclass
class SsTrialRng:
    """Streams for one simulated trial.

    The per-side reconstruction streams are stored as seeds so that several
    hybrids can each replay them from the start.
    """

    main: np.random.Generator
    z: np.random.Generator
    left_seed: int
    right_seed: int

    @classmethod
    def from_generator(cls, rng: np.random.Generator) -> "SsTrialRng":
        z, left, right = (int(s) for s in rng.integers(0, 2 ** 63, size=3))
        return cls(rng, np.random.default_rng(z), left, right)

    def left(self) -> np.random.Generator:
        return np.random.default_rng(self.left_seed)

    def right(self) -> np.random.Generator:
        return np.random.default_rng(self.right_seed)


@dataclass
class SimState:
    """Everything sampled by the simulator before the per-side closures run."""

    outcome: str  # "split", "bottom" (tampered word rejected) or "bad"
    events: dict
    r: np.ndarray | None = None
    T: np.ndarray | None = None
    V_prime: np.ndarray | None = None
    zeta: np.ndarray | None = None
    rho1: np.ndarray | None = None
    B: np.ndarray | None = None
    Z: np.ndarray | None = None
    rho_tilde: np.ndarray | None = None
    T_L: np.ndarray | None = None
    V: np.ndarray | None = None
    mu: np.ndarray | None = None
    A: np.ndarray | None = None


def _leak(pp: SplitStateParams, adv: LeakyAdversary, r: np.ndarray, sup: _Supports):
    transcript: list[np.ndarray] = []
    U = np.zeros(pp.n, dtype=bool)
    for j, (sel, size) in enumerate(zip(adv.leak_selectors, adv.leak_sizes)):
        S = _check_indices(sel(tuple(transcript)), size, adv.family.n_outputs, False, f"leak round {j + 1}")
        U |= sup.mask(S)
        transcript.append(adv.family.eval_outputs(r, S))
    return tuple(transcript), U


def simulate_prefix(pp: SplitStateParams, adv: LeakyAdversary, streams: SsTrialRng,
                    sup: _Supports | None = None) -> SimState:
    """Simulator steps up to the point where the two closures are fixed."""
    n, nZ, tau = pp.n, pp.n_Z, pp.tau
    if adv.rounds > pp.q or any(size > pp.m for size in adv.leak_sizes):
        raise DimensionMismatch(f"adversary leaks more than {pp.q} rounds of {pp.m} bits")
    sup = sup if sup is not None else _Supports(adv.family, n)
    events = {"fallback": False, "overlap": False, "overflow": False}
    rng = streams.main
    r = rng.integers(0, 2, n, dtype=np.uint8)
    transcript, U = _leak(pp, adv, r, sup)
    zeta = rng.integers(0, 2, pp.seed_len, dtype=np.uint8)
    T = adv.final_selector(transcript)
    if T is None:
        return SimState("bottom", events, r=r)
    T = _check_indices(T, n, adv.family.n_outputs, True, "final selector")
    I_Z = np.zeros(n, dtype=bool)
    I_Z[:nZ] = True
    I_L = np.zeros(n, dtype=bool)
    I_L[nZ:nZ + tau] = True
    I_R = ~(I_Z | I_L)
    T_Z, T_X, T_R = T[:nZ], T[nZ:nZ + tau], T[nZ + tau:]
    V_Z = sup.mask(T_Z) & ~I_Z
    V_R = sup.mask(T_R) & I_L
    Vp = V_Z | V_R | U

    seeds, rho1, fb = seed_restriction_batch(pp, zeta[None, :])
    zeta, rho1 = seeds[0], rho1[0]
    events["fallback"] = bool(fb[0])
    state = SimState("bad", events, r=r, T=T, V_prime=Vp, zeta=zeta, rho1=rho1)
    # count every survivor inside V', a superset of B
    if int(rho1[Vp[nZ:nZ + tau]].sum()) > pp.rpe_L.threshold:
        events["overlap"] = True
        return state
    slot = _slots(rho1[None, :], pp.n_L)[0]
    state.B = np.flatnonzero((slot >= 0) & Vp[nZ:nZ + tau])

    C = np.flatnonzero(Vp[:nZ])
    try:
        Z = pp.rpe_Z.reconstruct(C, r[:nZ], zeta, streams.z)
    except TooManyConstraints:
        events["overflow"] = True
        return state
    state.Z = Z
    w = np.where(Vp, r, 0).astype(np.uint8)
    w[:nZ] = Z
    tilde_zeta = pp.rpe_Z.decode(adv.family.eval_outputs(w, T_Z))
    rho_t = pp.gen.eval(tilde_zeta)
    state.rho_tilde = rho_t
    if int(rho_t.sum()) < pp.n_L:
        V = Vp | I_Z
        state.outcome = "bottom"
    else:
        slot_t = _slots(rho_t[None, :], pp.n_L)[0]
        J = np.flatnonzero(slot_t >= 0)
        state.T_L = T_X[J]
        V_L = sup.mask(state.T_L) & (I_Z | I_R)
        V = Vp | V_L | I_Z
        state.outcome = "split"
    mu = np.where(V, r, 0).astype(np.uint8)
    mu[:nZ] = Z
    state.V, state.mu = V, mu
    state.A = np.flatnonzero(V[nZ + tau:])
    if state.A.shape[0] > pp.rpe_R.threshold:
        events["overflow"] = True
        state.outcome = "bad"
    return state


def _left_view(pp: SplitStateParams, slot: np.ndarray, B: np.ndarray, source: np.ndarray) -> np.ndarray:
    """Partial view of the left encoding: the values ``source`` fixes at embedding positions ``B``."""
    view = np.zeros(pp.n_L, dtype=np.uint8)
    view[slot[B]] = source[pp.n_Z + B]
    return view


@dataclass(frozen=True, eq=False)
class LeftTamper:
    """Left closure: reconstruct, embed, tamper and decode using only ``x_L``."""

    pp: SplitStateParams
    family: object
    state: SimState

    def __call__(self, xL, rng: np.random.Generator) -> np.ndarray:
        pp, st = self.pp, self.state
        nZ, tau = pp.n_Z, pp.tau
        slot = _slots(st.rho1[None, :], pp.n_L)[0]
        s_L = pp.rpe_L.reconstruct(slot[st.B], _left_view(pp, slot, st.B, st.mu), bl.bits(xL), rng)
        X_L = embed_batch(s_L[None, :], st.rho1[None, :], st.r[None, nZ:nZ + tau])[0]
        w = st.mu.copy()
        w[nZ:nZ + tau] = X_L
        return pp.rpe_L.decode(self.family.eval_outputs(w, st.T_L))


@dataclass(frozen=True, eq=False)
class RightTamper:
    """Right closure: reconstruct, tamper and decode using only ``x_R``."""

    pp: SplitStateParams
    family: object
    state: SimState

    def __call__(self, xR, rng: np.random.Generator) -> np.ndarray:
        pp, st = self.pp, self.state
        off = pp.n_Z + pp.tau
        S_R = pp.rpe_R.reconstruct(st.A, st.mu[off:], bl.bits(xR), rng)
        w = st.mu.copy()
        w[off:] = S_R
        return pp.rpe_R.decode(self.family.eval_outputs(w, st.T[off:]))


@dataclass
class SsSimulation:
    """Either a split pair of closures or a constant (``value`` None means rejection)."""

    kind: str  # "split" or "constant"
    f_L: LeftTamper | None
    f_R: RightTamper | None
    value: np.ndarray | None
    state: SimState | None

    @property
    def events(self) -> dict:
        return {} if self.state is None else self.state.events

    @property
    def bad(self) -> bool:
        return self.state is not None and self.state.outcome == "bad"

    def __call__(self, xL, xR, streams: SsTrialRng | None = None,
                 rng: np.random.Generator | None = None) -> np.ndarray | None:
        """Apply the pair; the result is ``x~_L || x~_R`` or None."""
        if self.kind == "constant":
            return None if self.value is None else self.value.copy()
        if streams is not None:
            left, right = streams.left(), streams.right()
        else:
            left = right = rng
        return np.concatenate([self.f_L(xL, left), self.f_R(xR, right)])


def ss_simulator(pp: SplitStateParams, adv, rng: np.random.Generator | None = None,
                 streams: SsTrialRng | None = None) -> SsSimulation:
    """Sample a split-state pair whose output law tracks decoding after tampering.

    Bad events end in the constant rejection function; their flags are kept
    on the returned state.
    """
    if isinstance(adv, ConstantFunction):
        value = None if adv.value is None else decode_word(pp, adv.value)
        return SsSimulation("constant", None, None, value, None)
    if adv.n_inputs != pp.n or adv.out_len != pp.n:
        raise DimensionMismatch("adversary must read and write full codewords")
    streams = streams if streams is not None else SsTrialRng.from_generator(rng)
    state = simulate_prefix(pp, adv, streams)
    if state.outcome != "split":
        return SsSimulation("constant", None, None, None, state)
    return SsSimulation("split", LeftTamper(pp, adv.family, state), RightTamper(pp, adv.family, state),
                        None, state)


# -------------------------------------------------------------------- hybrids

HYBRIDS = ("H0", "H1", "H2", "H3", "H4")


def _tamper(adv, c) -> np.ndarray | None:
    from .leaky import eval_leaky

    return eval_leaky(adv, c)


def _decode_with_tilde(pp: SplitStateParams, state: SimState, ct) -> np.ndarray | None:
    """Decoder whose seed recovery is replaced by the simulated tampered seed."""
    if ct is None or int(state.rho_tilde.sum()) < pp.n_L:
        return None
    _, X, S = split_codeword(pp, ct)
    _, s_L = extract_batch(X[None, :], state.rho_tilde[None, :], pp.n_L)
    return np.concatenate([pp.rpe_L.decode(s_L[0]), pp.rpe_R.decode(S)])


def _hybrid_encode(pp: SplitStateParams, state: SimState, xL, xR, left, right) -> np.ndarray:
    nZ, tau = pp.n_Z, pp.tau
    slot = _slots(state.rho1[None, :], pp.n_L)[0]
    s_L = pp.rpe_L.reconstruct(slot[state.B], _left_view(pp, slot, state.B, state.r), bl.bits(xL), left)
    X_L = embed_batch(s_L[None, :], state.rho1[None, :], state.r[None, nZ:nZ + tau])[0]
    off = nZ + tau
    # constraints on A beyond V' carry fresh r bits, matching a reconstruction from V' alone
    S_R = pp.rpe_R.reconstruct(state.A, state.r[off:], bl.bits(xR), right)
    return np.concatenate([state.Z, X_L, S_R]).astype(np.uint8)


def run_hybrids(pp: SplitStateParams, adv: LeakyAdversary, xL, xR, rng_real: np.random.Generator,
                rng_sim: np.random.Generator, which=HYBRIDS, sup: _Supports | None = None) -> dict:
    """One trial of every requested hybrid.

    H1..H4 share one set of simulator streams; each forks its own copies of
    the per-side reconstruction streams so they consume identical bits.
    """
    out: dict = {}
    if "H0" in which:
        C, _ = encode_batch(pp, bl.bits(xL)[None, :], bl.bits(xR)[None, :],
                            SsRandomness(*(a[None, :] for a in pp.sample_randomness(rng_real))))
        out["H0"] = decode_word(pp, _tamper(adv, C[0]))
    rest = [h for h in which if h != "H0"]
    if not rest:
        return out
    streams = SsTrialRng.from_generator(rng_sim)
    state = simulate_prefix(pp, adv, streams, sup)
    out["events"] = dict(state.events)
    out["outcome"] = state.outcome
    if state.outcome == "bad" or state.T is None:
        for h in rest:
            out[h] = None
        return out

    def fresh():
        return streams.left(), streams.right()

    if "H1" in rest or "H2" in rest:
        c = _hybrid_encode(pp, state, xL, xR, *fresh())
        ct = _tamper(adv, c)
        if "H1" in rest:
            out["H1"] = decode_word(pp, ct)
        if "H2" in rest:
            out["H2"] = _decode_with_tilde(pp, state, ct)
    if "H3" in rest:
        left, right = fresh()
        nZ, tau = pp.n_Z, pp.tau
        slot = _slots(state.rho1[None, :], pp.n_L)[0]
        s_L = pp.rpe_L.reconstruct(slot[state.B], _left_view(pp, slot, state.B, state.mu), bl.bits(xL), left)
        X_L = embed_batch(s_L[None, :], state.rho1[None, :], state.r[None, nZ:nZ + tau])[0]
        S_R = pp.rpe_R.reconstruct(state.A, state.mu[nZ + tau:], bl.bits(xR), right)
        c = np.concatenate([state.Z, X_L, S_R]).astype(np.uint8)
        out["H3"] = _decode_with_tilde(pp, state, _tamper(adv, c))
    if "H4" in rest:
        if state.outcome != "split":
            out["H4"] = None
        else:
            left, right = fresh()
            out["H4"] = np.concatenate([LeftTamper(pp, adv.family, state)(xL, left),
                                        RightTamper(pp, adv.family, state)(xR, right)])
    return out


def uncoupled_h2(pp: SplitStateParams, adv: LeakyAdversary, xL, xR, rng: np.random.Generator,
                 sup: _Supports | None = None) -> np.ndarray | None:
    """H2 with the right side reconstructed from the constraints in V' only."""
    streams = SsTrialRng.from_generator(rng)
    state = simulate_prefix(pp, adv, streams, sup)
    if state.outcome == "bad" or state.T is None:
        return None
    nZ, tau = pp.n_Z, pp.tau
    slot = _slots(state.rho1[None, :], pp.n_L)[0]
    s_L = pp.rpe_L.reconstruct(slot[state.B], _left_view(pp, slot, state.B, state.r), bl.bits(xL),
                               streams.left())
    X_L = embed_batch(s_L[None, :], state.rho1[None, :], state.r[None, nZ:nZ + tau])[0]
    A1 = np.flatnonzero(state.V_prime[nZ + tau:])
    S_R = pp.rpe_R.reconstruct(A1, state.r[nZ + tau:], bl.bits(xR), streams.right())
    c = np.concatenate([state.Z, X_L, S_R]).astype(np.uint8)
    return _decode_with_tilde(pp, state, _tamper(adv, c))
