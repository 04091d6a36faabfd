"""Binary linear codes and the reconstructable probabilistic encoding built on them.

For a code with generator ``A`` (n x k), parity check ``H`` ((n-k) x n) and a
left inverse ``B`` of ``A``, the encoding of ``x`` with randomness ``r`` is
``B^T x + H^T r`` and decoding is ``A^T c``. Any ``d-1`` coordinates of an
encoding are uniform, and an encoding can be resampled consistently with up to
``d-1`` fixed coordinates by solving for ``r``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import bitlinalg as bl
from .errors import (
    DimensionMismatch,
    FormatError,
    NotFullRank,
    RegimeTooLarge,
    TooManyConstraints,
)

BRUTE_FORCE_MAX_K = 20
_POPCOUNT8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.int32)


def min_distance(A: np.ndarray) -> int:
    """Minimum weight over nonzero codewords of the code generated by the columns of ``A``."""
    A = np.asarray(A, dtype=np.uint8)
    n, k = A.shape
    if k > BRUTE_FORCE_MAX_K:
        raise RegimeTooLarge(f"k={k} exceeds the brute-force limit {BRUTE_FORCE_MAX_K}")
    if k == 0:
        raise ValueError("a code with no codewords has no distance")
    gens = np.packbits(A.T, axis=1, bitorder="little")  # k rows of n bits
    words = np.zeros((1, gens.shape[1]), dtype=np.uint8)
    for g in gens:
        words = np.concatenate([words, words ^ g], axis=0)
    weights = _POPCOUNT8[words[1:]].sum(axis=1)
    return int(weights.min())


@dataclass(frozen=True, eq=False)
class LinearCode:
    """A binary linear code given by its generator ``A`` (columns span the code)."""

    A: np.ndarray
    H: np.ndarray
    d: int
    name: str = ""

    @property
    def k(self) -> int:
        return self.A.shape[1]

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @classmethod
    def from_generator(cls, A, name: str = "", d: int | None = None) -> "LinearCode":
        """Build from a generator; ``d`` is computed, or checked against brute force when small."""
        A = np.asarray(A, dtype=np.uint8)
        if bl.rank(A) < A.shape[1]:
            raise NotFullRank(f"generator for {name or 'code'} is not full column rank")
        H = bl.null_space(A.T)
        if A.shape[1] <= BRUTE_FORCE_MAX_K:
            actual = min_distance(A)
            if d is not None and d != actual:
                raise ValueError(f"declared distance {d} but the code {name!r} has distance {actual}")
            d = actual
        elif d is None:
            raise RegimeTooLarge("distance of a large code must come from its construction")
        return cls(A, H, int(d), name)

    def encode(self, msg) -> np.ndarray:
        return bl.matmul(self.A, bl.bits(msg))

    def generator_rows_hex(self) -> list[str]:
        width = (self.n + 3) // 4
        return [format(int(bl.to_str(row), 2), f"0{width}x") for row in self.A.T]


def identity_code(k: int) -> LinearCode:
    return LinearCode.from_generator(np.eye(k, dtype=np.uint8), f"identity({k})", d=1)


def repetition_code(n: int) -> LinearCode:
    return LinearCode.from_generator(np.ones((n, 1), dtype=np.uint8), f"repetition({n})")


def parity_code(k: int) -> LinearCode:
    A = np.vstack([np.eye(k, dtype=np.uint8), np.ones((1, k), dtype=np.uint8)])
    return LinearCode.from_generator(A, f"parity({k})", d=2)


_HAMMING_P = np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1], [1, 1, 1]], dtype=np.uint8)


def hamming74() -> LinearCode:
    A = np.vstack([np.eye(4, dtype=np.uint8), _HAMMING_P.T])
    return LinearCode.from_generator(A, "hamming(7,4)")


def extended_hamming84() -> LinearCode:
    A = np.vstack([np.eye(4, dtype=np.uint8), _HAMMING_P.T])
    A = np.vstack([A, A.sum(axis=0, keepdims=True) % 2])
    return LinearCode.from_generator(A.astype(np.uint8), "ext-hamming(8,4)")


def golay24() -> LinearCode:
    """Extended binary Golay code [24, 12, 8] from the cyclic generator polynomial."""
    g = 0b110001110101  # x^11+x^10+x^6+x^5+x^4+x^2+1
    rows = []
    for shift in range(12):
        word = bl.unpack_int(g << shift, 23)
        rows.append(np.append(word, word.sum() % 2))
    A = np.array(rows, dtype=np.uint8).T
    return LinearCode.from_generator(A, "golay(24,12)")


def shortened_hamming(k: int, extended: bool = False) -> LinearCode:
    """Systematic distance-3 code (4 when ``extended``) for any message length.

    Parity columns are the distinct r-bit vectors of weight at least two, so
    every column of the parity-check matrix is distinct and nonzero.
    """
    r = 2
    while (1 << r) - 1 - r < k:
        r += 1
    cols = [v for v in range(1, 1 << r) if bin(v).count("1") >= 2][:k]
    P = np.array([bl.unpack_int(v, r) for v in cols], dtype=np.uint8).T  # r x k
    A = np.vstack([np.eye(k, dtype=np.uint8), P])
    d = 3
    if extended:
        A = np.vstack([A, A.sum(axis=0, keepdims=True) % 2]).astype(np.uint8)
        d = 4
    if k == 1:
        d = A.shape[0]  # degenerate: a single codeword of full weight
    return LinearCode.from_generator(A, f"{'ext-' if extended else ''}short-hamming({k})", d=d)


def direct_sum(block: LinearCode, count: int) -> LinearCode:
    """``count`` independent copies of ``block``; the distance is the block distance."""
    A = np.kron(np.eye(count, dtype=np.uint8), block.A).astype(np.uint8)
    H = np.kron(np.eye(count, dtype=np.uint8), block.H).astype(np.uint8)
    return LinearCode(A, H, block.d, f"{count}x{block.name}")


def random_systematic(k: int, n: int, rng: np.random.Generator, min_distance_target: int = 1,
                      tries: int = 1000) -> LinearCode:
    """Random ``[I; P]`` code, redrawn until its brute-forced distance reaches the target."""
    for _ in range(tries):
        P = rng.integers(0, 2, size=(n - k, k), dtype=np.uint8)
        A = np.vstack([np.eye(k, dtype=np.uint8), P])
        if min_distance(A) >= min_distance_target:
            return LinearCode.from_generator(A, f"random({k},{n})")
    raise ValueError(f"no [{n},{k}] code with distance {min_distance_target} in {tries} draws")


@dataclass(frozen=True, eq=False)
class RpeScheme:
    """Encoding scheme over a linear code; messages shorter than ``code.k`` are zero-padded."""

    code: LinearCode
    B: np.ndarray
    msg_len: int

    @classmethod
    def from_code(cls, code: LinearCode, msg_len: int | None = None) -> "RpeScheme":
        msg_len = code.k if msg_len is None else msg_len
        if not 0 <= msg_len <= code.k:
            raise DimensionMismatch(f"message length {msg_len} exceeds code dimension {code.k}")
        return cls(code, bl.left_inverse(code.A), msg_len)

    @property
    def k(self) -> int:
        return self.msg_len

    @property
    def n(self) -> int:
        return self.code.n

    @property
    def pad(self) -> int:
        return self.code.k - self.msg_len

    @property
    def rand_len(self) -> int:
        return self.code.n - self.code.k

    @property
    def threshold(self) -> int:
        """Largest number of coordinates that are jointly uniform."""
        return self.code.d - 1

    @property
    def c_sec(self) -> float:
        return self.threshold / self.n

    c_err = 0.0

    @cached_property
    def _Bt(self) -> np.ndarray:
        return np.ascontiguousarray(self.B.T)

    @cached_property
    def _Ht(self) -> np.ndarray:
        return np.ascontiguousarray(self.code.H.T)

    @cached_property
    def _Ht_rows(self) -> list[int]:
        return bl.pack_rows(self._Ht)

    def _padded(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.uint8)
        if X.shape[-1] != self.msg_len:
            raise DimensionMismatch(f"message of length {X.shape[-1]}, scheme expects {self.msg_len}")
        if self.pad:
            pad = np.zeros(X.shape[:-1] + (self.pad,), dtype=np.uint8)
            X = np.concatenate([X, pad], axis=-1)
        return X

    def encode_batch(self, X: np.ndarray, R: np.ndarray) -> np.ndarray:
        X = self._padded(np.atleast_2d(X))
        R = np.atleast_2d(np.asarray(R, dtype=np.uint8))
        if R.shape[-1] != self.rand_len:
            raise DimensionMismatch(f"randomness of length {R.shape[-1]}, expected {self.rand_len}")
        return bl.matmul_batch(X, self.B) ^ bl.matmul_batch(R, self.code.H)

    def encode(self, x, r) -> np.ndarray:
        return self.encode_batch(bl.bits(x)[None, :], bl.bits(r)[None, :])[0]

    def encode_random(self, x, rng: np.random.Generator) -> np.ndarray:
        return self.encode(x, rng.integers(0, 2, size=self.rand_len, dtype=np.uint8))

    def decode_batch(self, C: np.ndarray) -> np.ndarray:
        C = np.atleast_2d(np.asarray(C, dtype=np.uint8))
        if C.shape[-1] != self.n:
            raise DimensionMismatch(f"codeword of length {C.shape[-1]}, expected {self.n}")
        return bl.matmul_batch(C, self.code.A)[..., : self.msg_len]

    def decode(self, c) -> np.ndarray:
        return self.decode_batch(bl.bits(c)[None, :])[0]

    def reconstruct(self, S: Iterable[int], chat, x, rng: np.random.Generator) -> np.ndarray:
        """Sample an encoding of ``x`` agreeing with ``chat`` on positions ``S``."""
        S = sorted(set(int(i) for i in S))
        if len(S) > self.threshold:
            raise TooManyConstraints(f"{len(S)} fixed positions exceed the secrecy threshold {self.threshold}")
        chat = bl.bits(chat)
        if chat.shape[0] != self.n:
            raise DimensionMismatch(f"partial view of length {chat.shape[0]}, expected {self.n}")
        base = bl.matmul_batch(self._padded(bl.bits(x))[None, :], self.B)[0]
        rows = [self._Ht_rows[i] for i in S]
        rhs = [int(chat[i] ^ base[i]) for i in S]
        sol = bl.solve_packed_rows(rows, rhs, self.rand_len)
        # secrecy makes the projection onto S surjective, so this cannot fail
        assert not sol.is_empty, "secrecy violated: reconstruction constraints are inconsistent"
        return base ^ bl.matmul_batch(sol.sample(rng)[None, :], self.code.H)[0]


rpe_encode = RpeScheme.encode
rpe_decode = RpeScheme.decode
rpe_reconstruct = RpeScheme.reconstruct


def scheme_for(msg_len: int, threshold: int) -> RpeScheme:
    """A built-in scheme for ``msg_len``-bit messages whose secrecy threshold is at least ``threshold``."""
    if threshold <= 0:
        code = identity_code(max(msg_len, 1))
    elif threshold == 1:
        code = parity_code(max(msg_len, 1))
    elif threshold == 2:
        code = shortened_hamming(max(msg_len, 1))
    elif threshold == 3:
        code = shortened_hamming(max(msg_len, 1), extended=True)
    elif threshold <= 7:
        code = direct_sum(golay24(), max(1, -(-msg_len // 12)))
    else:
        code = direct_sum(repetition_code(threshold + 1), max(msg_len, 1))
    return RpeScheme.from_code(code, msg_len)


@dataclass
class SecrecyReport:
    ok: bool
    max_size: int
    checked: int
    violations: list[tuple[str, tuple[int, ...]]] = field(default_factory=list)


def _all_encodings(scheme: RpeScheme, x: np.ndarray) -> np.ndarray:
    R = np.array(list(itertools.product((0, 1), repeat=scheme.rand_len)), dtype=np.uint8)
    R = R.reshape(-1, scheme.rand_len)
    X = np.repeat(x[None, :], R.shape[0], axis=0)
    return scheme.encode_batch(X, R)


def _projection_uniform(C: np.ndarray, S: Sequence[int]) -> bool:
    idx = np.zeros(C.shape[0], dtype=np.int64)
    for j, pos in enumerate(S):
        idx |= C[:, pos].astype(np.int64) << j
    counts = np.bincount(idx, minlength=1 << len(S))
    return bool((counts == C.shape[0] >> len(S)).all())


def _check_regime(scheme: RpeScheme) -> None:
    if scheme.msg_len > 12 or scheme.rand_len > 16:
        raise RegimeTooLarge(f"exhaustive secrecy check needs k <= 12 and n-k <= 16, got "
                             f"k={scheme.msg_len}, n-k={scheme.rand_len}")


def verify_secrecy(scheme: RpeScheme, max_size: int | None = None) -> SecrecyReport:
    """Count every projection of size ``1..max_size`` (default ``d-1``) over all randomness."""
    _check_regime(scheme)
    max_size = scheme.threshold if max_size is None else max_size
    report = SecrecyReport(True, max_size, 0)
    for xs in itertools.product((0, 1), repeat=scheme.msg_len):
        x = np.array(xs, dtype=np.uint8)
        C = _all_encodings(scheme, x)
        for size in range(1, max_size + 1):
            for S in itertools.combinations(range(scheme.n), size):
                report.checked += 1
                if not _projection_uniform(C, S):
                    report.ok = False
                    report.violations.append((bl.to_str(x), S))
    return report


def secrecy_witness(scheme: RpeScheme, size: int) -> tuple[str, tuple[int, ...]] | None:
    """First (message, positions) whose projection of the given size is not uniform."""
    _check_regime(scheme)
    for xs in itertools.product((0, 1), repeat=scheme.msg_len):
        x = np.array(xs, dtype=np.uint8)
        C = _all_encodings(scheme, x)
        for S in itertools.combinations(range(scheme.n), size):
            if not _projection_uniform(C, S):
                return bl.to_str(x), S
    return None


def _row_from_hex(text: str, n: int, where: str) -> np.ndarray:
    try:
        value = int(text, 16)
    except ValueError as exc:
        raise FormatError(f"{where}: {text!r} is not hex") from exc
    if value >> n:
        raise FormatError(f"{where}: row {text!r} is wider than n={n}")
    return bl.bits(format(value, f"0{n}b"))


def load_code_registry(path: str | Path) -> dict[str, LinearCode]:
    """Load ``{"codes": [{name, k, n, d, generator_rows}]}`` (a bare list also works).

    Each hex row is read as an ``n``-bit binary number whose most significant
    bit is codeword position 0.
    """
    data = json.loads(Path(path).read_text())
    entries = data["codes"] if isinstance(data, dict) else data
    out: dict[str, LinearCode] = {}
    for i, entry in enumerate(entries):
        where = f"{path}: codes[{i}]"
        try:
            name, k, n, d = entry["name"], int(entry["k"]), int(entry["n"]), int(entry["d"])
            rows = entry["generator_rows"]
        except KeyError as exc:
            raise FormatError(f"{where}: missing field {exc}") from exc
        if len(rows) != k:
            raise FormatError(f"{where}: {len(rows)} generator rows for k={k}")
        G = np.array([_row_from_hex(r, n, f"{where}.generator_rows[{j}]") for j, r in enumerate(rows)])
        try:
            out[name] = LinearCode.from_generator(G.T, name, d=d)
        except (ValueError, NotFullRank) as exc:
            raise FormatError(f"{where}: {exc}") from exc
    return out


def save_code_registry(codes: Iterable[LinearCode], path: str | Path) -> None:
    entries = [{"name": c.name, "k": c.k, "n": c.n, "d": c.d, "generator_rows": c.generator_rows_hex()}
               for c in codes]
    Path(path).write_text(json.dumps({"codes": entries}, indent=2))
