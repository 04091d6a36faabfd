"""Tampering adversaries that see a few adaptive rounds of leakage first.

An adversary commits to a family of N functions of the codeword, then for
each round asks for a set of output positions whose values it learns, and
finally chooses which outputs (in increasing order) form the tampered word.
Selectors receive the tuple of leaked vectors so far.

Simulators may produce a final selector that returns ``None``: the tampered
word is then the rejection symbol, mirroring an out-of-range padded index.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import FormatError, SelectorViolation

Transcript = tuple
Selector = Callable[[Transcript], "np.ndarray | None"]


@dataclass(frozen=True, eq=False)
class FixedSelector:
    indices: np.ndarray

    def __call__(self, transcript: Transcript) -> np.ndarray:
        return self.indices


@dataclass(frozen=True, eq=False)
class TableSelector:
    """Looks up the longest key that prefixes the transcript bit string."""

    table: dict
    default: np.ndarray | None = None

    def __call__(self, transcript: Transcript) -> np.ndarray:
        key = "".join("".join(str(int(b)) for b in y) for y in transcript)
        for cut in range(len(key), -1, -1):
            if key[:cut] in self.table:
                return self.table[key[:cut]]
        if self.default is None:
            raise SelectorViolation(f"no table entry matches transcript {key!r}")
        return self.default


@dataclass(frozen=True, eq=False)
class BitBranchSelector:
    """Picks ``if_one`` when leaked bit ``position`` of round ``round`` is 1."""

    round: int
    position: int
    if_zero: np.ndarray
    if_one: np.ndarray

    def __call__(self, transcript: Transcript) -> np.ndarray:
        return self.if_one if transcript[self.round][self.position] else self.if_zero


@dataclass(frozen=True, eq=False)
class LeakyAdversary:
    family: object
    leak_selectors: tuple = ()
    leak_sizes: tuple = ()
    final_selector: Selector | None = None
    out_len: int | None = None

    def __post_init__(self):
        if len(self.leak_selectors) != len(self.leak_sizes):
            raise ValueError("one leak size per leakage round")
        if self.final_selector is None:
            object.__setattr__(self, "final_selector",
                               FixedSelector(np.arange(self.family.n_outputs)))
        if self.out_len is None:
            object.__setattr__(self, "out_len", self.family.n_outputs)

    @property
    def rounds(self) -> int:
        return len(self.leak_selectors)

    @property
    def n_inputs(self) -> int:
        return self.family.n_inputs


@dataclass(frozen=True)
class ConstantFunction:
    """Ignores its input; ``value`` of None means constant rejection."""

    value: np.ndarray | None
    n_inputs: int

    def __call__(self, x) -> np.ndarray | None:
        return None if self.value is None else self.value.copy()


def _check_indices(idx, size: int, n_outputs: int, increasing: bool, what: str) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64).reshape(-1)
    if idx.shape[0] != size:
        raise SelectorViolation(f"{what} selected {idx.shape[0]} positions, expected {size}")
    if idx.size and (idx.min() < 0 or idx.max() >= n_outputs):
        raise SelectorViolation(f"{what} selected a position outside 0..{n_outputs - 1}")
    if increasing and idx.size > 1 and not (np.diff(idx) > 0).all():
        raise SelectorViolation(f"{what} positions must be strictly increasing")
    return idx


def play(adv: LeakyAdversary, outputs: np.ndarray) -> tuple[np.ndarray | None, Transcript]:
    """Run the game against precomputed family outputs; returns (tampered word, transcript)."""
    transcript: list[np.ndarray] = []
    N = outputs.shape[0]
    for j, (sel, size) in enumerate(zip(adv.leak_selectors, adv.leak_sizes)):
        S = _check_indices(sel(tuple(transcript)), size, N, False, f"leak round {j + 1}")
        transcript.append(outputs[S])
    T = adv.final_selector(tuple(transcript))
    if T is None:
        return None, tuple(transcript)
    T = _check_indices(T, adv.out_len, N, True, "final selector")
    return outputs[T], tuple(transcript)


def eval_leaky(adv: LeakyAdversary | ConstantFunction, x) -> np.ndarray | None:
    if isinstance(adv, ConstantFunction):
        return adv(x)
    x = np.asarray(x, dtype=np.uint8)
    return play(adv, adv.family.eval(x))[0]


def eval_leaky_batch(adv: LeakyAdversary | ConstantFunction, X: np.ndarray) -> list:
    X = np.atleast_2d(np.asarray(X, dtype=np.uint8))
    if isinstance(adv, ConstantFunction):
        return [adv(x) for x in X]
    outs = adv.family.eval_batch(X)
    return [play(adv, row)[0] for row in outs]


def tamper_batch(adv: LeakyAdversary | ConstantFunction, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Tampered words as a matrix plus a mask of rows that were not rejected.

    Non-adaptive adversaries skip the per-row game.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.uint8))
    if isinstance(adv, ConstantFunction):
        n = X.shape[0]
        if adv.value is None:
            return np.zeros(n, dtype=bool), np.zeros((n, adv.n_inputs), dtype=np.uint8)
        return np.ones(n, dtype=bool), np.tile(adv.value, (n, 1))
    outs = adv.family.eval_batch(X)
    if not adv.leak_selectors and isinstance(adv.final_selector, FixedSelector):
        T = _check_indices(adv.final_selector.indices, adv.out_len, outs.shape[1], True, "final selector")
        return np.ones(X.shape[0], dtype=bool), outs[:, T]
    ok = np.ones(X.shape[0], dtype=bool)
    res = np.zeros((X.shape[0], adv.out_len), dtype=np.uint8)
    for i, row in enumerate(outs):
        w = play(adv, row)[0]
        if w is None:
            ok[i] = False
        else:
            res[i] = w
    return ok, res


def _index_list(value, where: str) -> np.ndarray:
    if not isinstance(value, list) or not all(isinstance(v, int) for v in value):
        raise FormatError(f"{where}: expected a list of integers")
    return np.asarray(value, dtype=np.int64)


def selector_from_json(obj, where: str) -> Selector:
    """``[i, ...]`` (fixed) or ``{"table": {prefix: [i, ...]}, "default": [...]}``.

    Indices in files are 0-based output positions.
    """
    if isinstance(obj, list):
        return FixedSelector(_index_list(obj, where))
    if isinstance(obj, dict) and "table" in obj:
        table = {}
        for key, val in obj["table"].items():
            if set(key) - {"0", "1"}:
                raise FormatError(f"{where}.table: key {key!r} is not a bit string")
            table[key] = _index_list(val, f"{where}.table[{key!r}]")
        default = obj.get("default")
        return TableSelector(table, None if default is None else _index_list(default, f"{where}.default"))
    raise FormatError(f"{where}: selector must be a list or a table object")


def validate_table_selector(sel: TableSelector, size: int, n_outputs: int, increasing: bool,
                            where: str) -> None:
    entries = list(sel.table.items()) + ([("default", sel.default)] if sel.default is not None else [])
    for key, idx in entries:
        try:
            _check_indices(idx, size, n_outputs, increasing, f"{where}[{key}]")
        except SelectorViolation as exc:
            raise FormatError(str(exc)) from exc
