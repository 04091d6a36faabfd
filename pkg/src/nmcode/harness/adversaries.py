"""Built-in tampering adversaries and the adversary file format."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..circuits import FunctionFamily, LocalFunction, load_circuits, random_local
from ..errors import FormatError
from ..reductions.leaky import (
    BitBranchSelector,
    FixedSelector,
    LeakyAdversary,
    TableSelector,
    selector_from_json,
    validate_table_selector,
)


def identity(n: int) -> LeakyAdversary:
    return LeakyAdversary(LocalFunction.identity(n))


def constant(n: int, value) -> LeakyAdversary:
    return LeakyAdversary(LocalFunction.constant(n, np.broadcast_to(np.asarray(value, dtype=np.uint8), (n,))))


def flips(n: int, positions) -> LeakyAdversary:
    """Flip the listed positions, copy the rest."""
    mask = np.zeros(n, dtype=bool)
    mask[np.asarray(list(positions), dtype=np.int64)] = True
    tables = np.where(mask[:, None], np.array([1, 0], dtype=np.uint8), np.array([0, 1], dtype=np.uint8))
    return LeakyAdversary(LocalFunction(n, np.arange(n)[:, None], tables))


def random_two_local(n: int, rng: np.random.Generator) -> LeakyAdversary:
    return LeakyAdversary(random_local(n, n, 2, rng))


def adaptive(n: int, watch: int = 0) -> LeakyAdversary:
    """Leak one bit; keep the word if it is 0, flip every bit if it is 1."""
    copy_table, flip_table = np.array([0, 1], dtype=np.uint8), np.array([1, 0], dtype=np.uint8)
    tables = np.concatenate([np.tile(copy_table, (n, 1)), np.tile(flip_table, (n, 1))])
    deps = np.concatenate([np.arange(n), np.arange(n)])[:, None]
    family = LocalFunction(n, deps, tables)
    final = BitBranchSelector(0, 0, np.arange(n), np.arange(n, 2 * n))
    return LeakyAdversary(family, (FixedSelector(np.array([watch])),), (1,), final, n)


def suite(n: int, seed: int = 0, count: int = 20) -> list[tuple[str, LeakyAdversary]]:
    """Twenty fixed adversaries: identity, constants, bit flips, random 2-local, one adaptive."""
    rng = np.random.default_rng(seed)
    out = [("identity", identity(n)),
           ("constant-0", constant(n, 0)),
           ("constant-1", constant(n, 1)),
           ("constant-random", constant(n, rng.integers(0, 2, n, dtype=np.uint8))),
           ("flip-first", flips(n, [0])),
           ("flip-last", flips(n, [n - 1])),
           ("flip-all", flips(n, range(n))),
           ("flip-first-half", flips(n, range(n // 2))),
           ("flip-random-8", flips(n, rng.choice(n, size=min(8, n), replace=False))),
           ("flip-random-quarter", flips(n, rng.choice(n, size=max(1, n // 4), replace=False)))]
    for i in range(count - len(out) - 1):
        out.append((f"random-2-local-{i}", random_two_local(n, rng)))
    out.append(("adaptive-leak", adaptive(n, watch=n - 1)))
    return out[:count]


# ----------------------------------------------------------------- file form

def _family_from_json(obj, n: int, base: Path, where: str):
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: family must be an object")
    if "local_file" in obj:
        path = base / obj["local_file"]
        fam = LocalFunction.from_json(json.loads(path.read_text()), str(path))
    elif "local" in obj:
        fam = LocalFunction.from_json(obj["local"], f"{where}.local")
    elif "circuit_file" in obj:
        fam = FunctionFamily(load_circuits(base / obj["circuit_file"]))
    elif "builtin" in obj:
        kind = obj["builtin"]
        if kind == "identity":
            fam = LocalFunction.identity(n)
        elif kind == "random-local":
            fam = random_local(n, int(obj.get("outputs", n)), int(obj.get("ell", 2)),
                               np.random.default_rng(int(obj.get("seed", 0))))
        elif kind == "constant":
            fam = LocalFunction.constant(n, np.full(n, int(obj.get("value", 0)), dtype=np.uint8))
        else:
            raise FormatError(f"{where}.builtin: unknown family {kind!r}")
    else:
        raise FormatError(f"{where}: expected one of local_file, local, circuit_file, builtin")
    if fam.n_inputs != n:
        raise FormatError(f"{where}: family reads {fam.n_inputs} bits, codewords have {n}")
    return fam


def adversary_from_json(obj: dict, n: int, base: str | Path = ".", where: str = "adversary") -> LeakyAdversary:
    """``{"family": ..., "leaks": [selector, ...], "m": size, "final": selector}``.

    Selectors are 0-based output lists or prefix tables; tables are checked
    for size and, for the final selector, strictly increasing indices.
    """
    base = Path(base)
    if not isinstance(obj, dict) or "family" not in obj:
        raise FormatError(f"{where}: missing field 'family'")
    fam = _family_from_json(obj["family"], n, base, f"{where}.family")
    leaks = obj.get("leaks", [])
    rounds = obj.get("rounds", len(leaks))
    if rounds != len(leaks):
        raise FormatError(f"{where}: rounds={rounds} but {len(leaks)} leak selectors given")
    sizes = obj.get("m")
    selectors, leak_sizes = [], []
    for j, raw in enumerate(leaks):
        sel = selector_from_json(raw, f"{where}.leaks[{j}]")
        size = sizes if sizes is not None else len(raw) if isinstance(raw, list) else None
        if size is None:
            raise FormatError(f"{where}: give 'm' when leak selectors are tables")
        if isinstance(sel, TableSelector):
            validate_table_selector(sel, size, fam.n_outputs, False, f"{where}.leaks[{j}]")
        elif len(sel.indices) != size:
            raise FormatError(f"{where}.leaks[{j}]: {len(sel.indices)} positions, expected {size}")
        selectors.append(sel)
        leak_sizes.append(size)
    final = None
    if "final" in obj:
        final = selector_from_json(obj["final"], f"{where}.final")
        if isinstance(final, TableSelector):
            validate_table_selector(final, n, fam.n_outputs, True, f"{where}.final")
        elif len(final.indices) != n or not (np.diff(final.indices) > 0).all():
            raise FormatError(f"{where}.final: need {n} strictly increasing positions")
    elif fam.n_outputs != n:
        raise FormatError(f"{where}: family has {fam.n_outputs} outputs; give a final selector")
    return LeakyAdversary(fam, tuple(selectors), tuple(leak_sizes), final, n)
