"""Boolean circuits, decision trees and local functions.

Circuits are immutable expression DAGs of AND/OR gates over literals; NOTs
appear only on inputs. Substituting constants simplifies the DAG
(AND of nothing is 1, OR of nothing is 0). Local functions store many outputs
at once as padded dependency arrays plus truth tables so that evaluation and
restriction are vectorized.

File formats number inputs from 1 so that a sign can mark negation; in memory
inputs are 0-based.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, FormatError, RegimeTooLarge

DT_VAR_LIMIT = 22


# ----------------------------------------------------------------- circuits

@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Lit:
    var: int
    neg: bool = False


@dataclass(frozen=True)
class Gate:
    op: str  # "AND" or "OR"
    children: tuple

    def __post_init__(self):
        if self.op not in ("AND", "OR"):
            raise ValueError(f"unknown gate {self.op!r}")


Node = Union[Const, Lit, Gate]

TRUE, FALSE = Const(1), Const(0)


def AND(*children: Node) -> Node:
    return _make_gate("AND", children)


def OR(*children: Node) -> Node:
    return _make_gate("OR", children)


def _make_gate(op: str, children: Iterable[Node]) -> Node:
    absorbing, neutral = (0, 1) if op == "AND" else (1, 0)
    kept: list[Node] = []
    seen = set()
    for ch in children:
        if isinstance(ch, Const):
            if ch.value == absorbing:
                return Const(absorbing)
            continue
        parts = ch.children if isinstance(ch, Gate) and ch.op == op else (ch,)
        for part in parts:
            if part not in seen:
                seen.add(part)
                kept.append(part)
    if not kept:
        return Const(neutral)
    if len(kept) == 1:
        return kept[0]
    return Gate(op, tuple(kept))


@dataclass(frozen=True)
class Substitution:
    """Maps each old input to a new variable (``var_of >= 0``) or to the constant ``const``."""

    n_new: int
    var_of: np.ndarray
    const: np.ndarray

    @property
    def n_old(self) -> int:
        return self.var_of.shape[0]

    @classmethod
    def from_restriction(cls, rho1, rho2) -> "Substitution":
        rho1 = np.asarray(rho1)
        n = rho1.shape[0]
        return cls(n, np.where(rho1 == 1, np.arange(n), -1), np.asarray(rho2, dtype=np.uint8))

    @classmethod
    def embedding(cls, rho1, rho2, k: int) -> "Substitution":
        """Old input ``i`` becomes message bit ``j`` when ``i`` carries it, else its fill value."""
        from .restrictions import _slots

        slot = _slots(np.asarray(rho1)[None, :], k)[0]
        return cls(k, slot.astype(np.int64), np.asarray(rho2, dtype=np.uint8))


def _substitute_node(node: Node, sub: Substitution, memo: dict) -> Node:
    key = id(node)
    if key in memo:
        return memo[key][1]
    if isinstance(node, Const):
        out: Node = node
    elif isinstance(node, Lit):
        tgt = int(sub.var_of[node.var])
        out = Const(int(sub.const[node.var]) ^ int(node.neg)) if tgt < 0 else Lit(tgt, node.neg)
    else:
        out = _make_gate(node.op, [_substitute_node(ch, sub, memo) for ch in node.children])
    memo[key] = (node, out)  # keep node alive so ids stay unique
    return out


@dataclass(frozen=True, eq=False)
class Circuit:
    n_inputs: int
    root: Node

    def _nodes(self) -> list[Node]:
        order: list[Node] = []
        seen = set()
        stack = [(self.root, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            if isinstance(node, Gate):
                stack.extend((ch, False) for ch in node.children)
        return order

    @cached_property
    def depth(self) -> int:
        h: dict[int, int] = {}
        for node in self._nodes():
            h[id(node)] = 1 + max(h[id(c)] for c in node.children) if isinstance(node, Gate) else 0
        return h[id(self.root)]

    @cached_property
    def size(self) -> int:
        return sum(isinstance(nd, Gate) for nd in self._nodes())

    @cached_property
    def width_bottom(self) -> int:
        widths = [len(nd.children) for nd in self._nodes()
                  if isinstance(nd, Gate) and not any(isinstance(c, Gate) for c in nd.children)]
        return max(widths, default=0)

    @cached_property
    def support(self) -> tuple[int, ...]:
        """Syntactic support: inputs appearing as literals."""
        return tuple(sorted({nd.var for nd in self._nodes() if isinstance(nd, Lit)}))

    def eval_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.uint8))
        if X.shape[-1] != self.n_inputs:
            raise DimensionMismatch(f"input of length {X.shape[-1]}, circuit has {self.n_inputs}")
        vals: dict[int, np.ndarray] = {}
        for node in self._nodes():
            if isinstance(node, Const):
                v = np.full(X.shape[0], node.value, dtype=np.uint8)
            elif isinstance(node, Lit):
                v = X[:, node.var] ^ np.uint8(node.neg)
            else:
                kids = [vals[id(c)] for c in node.children]
                v = np.logical_and.reduce(kids) if node.op == "AND" else np.logical_or.reduce(kids)
                v = v.astype(np.uint8)
            vals[id(node)] = v
        return vals[id(self.root)]

    def eval(self, x) -> int:
        return int(self.eval_batch(np.asarray(x, dtype=np.uint8)[None, :])[0])

    def substitute(self, sub: Substitution) -> "Circuit":
        if sub.n_old != self.n_inputs:
            raise DimensionMismatch("substitution length differs from circuit input count")
        return Circuit(sub.n_new, _substitute_node(self.root, sub, {}))

    def restrict(self, rho) -> "Circuit":
        return self.substitute(Substitution.from_restriction(rho.rho1, rho.rho2))

    def truth_table(self, variables: Sequence[int] | None = None) -> tuple[int, tuple[int, ...]]:
        variables = tuple(self.support if variables is None else variables)
        values = _eval_on_cube(self, variables)
        return _pack_table(values), variables


def restrict(f, rho):
    """Fix non-survivors of ``rho`` to their fill values; survivors keep their index."""
    return f.substitute(Substitution.from_restriction(rho.rho1, rho.rho2))


def _cube(v: int) -> np.ndarray:
    idx = np.arange(1 << v, dtype=np.int64)
    return ((idx[:, None] >> np.arange(v)[None, :]) & 1).astype(np.uint8)


def _eval_on_cube(f, variables: Sequence[int]) -> np.ndarray:
    v = len(variables)
    if v > DT_VAR_LIMIT:
        raise RegimeTooLarge(f"{v} relevant variables exceed the truth-table limit {DT_VAR_LIMIT}")
    # renumber the listed variables to 0..v-1 and pin the rest to 0
    var_of = np.full(f.n_inputs, -1, dtype=np.int64)
    var_of[list(variables)] = np.arange(v)
    compact = f.substitute(Substitution(v, var_of, np.zeros(f.n_inputs, dtype=np.uint8)))
    return compact.eval_batch(_cube(v)).reshape(-1)


def _pack_table(values: np.ndarray) -> int:
    values = np.asarray(values, dtype=np.uint8)
    return int.from_bytes(np.packbits(values, bitorder="little").tobytes(), "little")


def circuit_from_layers(n: int, layers: Sequence[dict], where: str = "circuit") -> list[Circuit]:
    """Parse ``[{op, gates: [[refs]]}]``; returns one circuit per top-layer gate.

    Bottom-layer refs are signed 1-based inputs; higher layers reference
    1-based gates of the layer below.
    """
    if not layers:
        raise FormatError(f"{where}: no layers")
    prev: list[Node] = []
    last_op = None
    for li, layer in enumerate(layers):
        op = layer.get("op")
        if op not in ("AND", "OR"):
            raise FormatError(f"{where}: layers[{li}].op must be AND or OR, got {op!r}")
        if op == last_op:
            raise FormatError(f"{where}: layers[{li}] repeats {op}; layers must alternate")
        current: list[Node] = []
        for gi, refs in enumerate(layer.get("gates", [])):
            kids: list[Node] = []
            for ri, ref in enumerate(refs):
                loc = f"{where}: layers[{li}].gates[{gi}][{ri}]"
                if not isinstance(ref, int) or ref == 0:
                    raise FormatError(f"{loc}: reference must be a nonzero integer")
                if li == 0:
                    if abs(ref) > n:
                        raise FormatError(f"{loc}: input {ref} outside 1..{n}")
                    kids.append(Lit(abs(ref) - 1, ref < 0))
                else:
                    if ref < 0 or ref > len(prev):
                        raise FormatError(f"{loc}: gate reference {ref} outside 1..{len(prev)}")
                    kids.append(prev[ref - 1])
            # keep the literal structure as written; only nested same-op gates merge
            current.append(Gate(op, tuple(kids)) if kids else Const(1 if op == "AND" else 0))
        prev = current
        last_op = op
    return [Circuit(n, node) for node in prev]


def circuit_to_layers(circuits: Sequence[Circuit]) -> dict:
    """Alternating layered form; lower nodes are lifted through fan-in-1 gates as needed."""
    if not circuits:
        raise ValueError("nothing to serialize")
    n = circuits[0].n_inputs
    roots = [c.root for c in circuits]
    height: dict[int, int] = {}
    ops: dict[int, str] = {}
    nodes: dict[int, Node] = {}
    for c in circuits:
        for nd in c._nodes():
            nodes[id(nd)] = nd
            if isinstance(nd, Const):
                raise ValueError("constants cannot be placed in a layered circuit")
            if isinstance(nd, Gate):
                height[id(nd)] = 1 + max(height.get(id(ch), 0) for ch in nd.children)
                ops[id(nd)] = nd.op
            else:
                height[id(nd)] = 0
    layer_of: dict[int, int] = {}

    def op_at(layer: int, bottom: str) -> str:
        return bottom if layer % 2 == 1 else ("OR" if bottom == "AND" else "AND")

    def place(bottom: str) -> int:
        layer_of.clear()
        for key in sorted(height, key=lambda k: height[k]):
            nd = nodes[key]
            if not isinstance(nd, Gate):
                layer_of[key] = 0
                continue
            lo = 1 + max(layer_of[id(ch)] for ch in nd.children)
            while op_at(lo, bottom) != nd.op:
                lo += 1
            layer_of[key] = lo
        return max(layer_of[id(r)] for r in roots)

    # pick the bottom op giving the shallower layering
    bottom = min(("AND", "OR"), key=place)
    depth = place(bottom)
    top = max(depth, 1)
    # all outputs must come from the top layer
    layers: list[list[tuple]] = [[] for _ in range(top + 1)]
    index: dict[tuple[int, int], int] = {}

    def at_layer(key: int, layer: int) -> int:
        """1-based position of node ``key`` lifted to ``layer``."""
        if (key, layer) in index:
            return index[(key, layer)]
        nd = nodes[key]
        if layer == 0:
            raise AssertionError("literals are referenced directly")
        if layer_of[key] == layer:
            if isinstance(nd, Gate):
                refs = tuple(_ref(ch, layer) for ch in nd.children)
            else:
                refs = (_ref(nd, layer),)
        else:
            refs = (at_layer(key, layer - 1),) if layer - 1 >= 1 else (_ref(nd, layer),)
        layers[layer].append(refs)
        index[(key, layer)] = len(layers[layer])
        return index[(key, layer)]

    def _ref(child: Node, layer: int) -> int:
        if layer == 1:
            if not isinstance(child, Lit):
                raise AssertionError("bottom layer must read literals")
            return -(child.var + 1) if child.neg else child.var + 1
        return at_layer(id(child), layer - 1)

    for r in roots:
        at_layer(id(r), top)
    return {"n": n, "layers": [{"op": op_at(li, bottom), "gates": [list(g) for g in layers[li]]}
                               for li in range(1, top + 1)]}


def load_circuits(path: str | Path) -> list[Circuit]:
    data = json.loads(Path(path).read_text())
    try:
        return circuit_from_layers(int(data["n"]), data["layers"], str(path))
    except KeyError as exc:
        raise FormatError(f"{path}: missing field {exc}") from exc


def dnf(n: int, terms: Iterable[Iterable[int]]) -> Circuit:
    """OR of ANDs; each term lists signed 1-based literals."""
    gates = [Gate("AND", tuple(Lit(abs(l) - 1, l < 0) for l in t)) if t else TRUE for t in terms]
    return Circuit(n, _make_gate("OR", gates))


def cnf(n: int, clauses: Iterable[Iterable[int]]) -> Circuit:
    gates = [Gate("OR", tuple(Lit(abs(l) - 1, l < 0) for l in c)) if c else FALSE for c in clauses]
    return Circuit(n, _make_gate("AND", gates))


def random_dnf(n: int, width: int, terms: int, rng: np.random.Generator) -> Circuit:
    out = []
    for _ in range(terms):
        vars_ = rng.choice(n, size=width, replace=False)
        signs = rng.integers(0, 2, size=width)
        out.append([int(v + 1) * (-1 if s else 1) for v, s in zip(vars_, signs)])
    return dnf(n, out)


def random_circuit(n: int, depth: int, fan_in: int, rng: np.random.Generator, top_op: str = "OR") -> Circuit:
    def build(level: int, op: str) -> Node:
        if level == 1:
            vars_ = rng.choice(n, size=min(fan_in, n), replace=False)
            return Gate(op, tuple(Lit(int(v), bool(rng.integers(0, 2))) for v in vars_))
        child_op = "AND" if op == "OR" else "OR"
        return Gate(op, tuple(build(level - 1, child_op) for _ in range(fan_in)))

    return Circuit(n, build(depth, top_op))


# ----------------------------------------------------------- decision trees

@dataclass(frozen=True)
class Leaf:
    value: int


@dataclass(frozen=True)
class Branch:
    var: int
    lo: "DTNode"
    hi: "DTNode"


DTNode = Union[Leaf, Branch]


@dataclass(frozen=True, eq=False)
class DecisionTree:
    n_inputs: int
    root: DTNode

    @cached_property
    def depth(self) -> int:
        def walk(nd: DTNode) -> int:
            return 0 if isinstance(nd, Leaf) else 1 + max(walk(nd.lo), walk(nd.hi))
        return walk(self.root)

    @cached_property
    def support(self) -> tuple[int, ...]:
        found = set()

        def walk(nd: DTNode):
            if isinstance(nd, Branch):
                found.add(nd.var)
                walk(nd.lo)
                walk(nd.hi)
        walk(self.root)
        return tuple(sorted(found))

    def eval_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.uint8))
        if X.shape[-1] != self.n_inputs:
            raise DimensionMismatch(f"input of length {X.shape[-1]}, tree has {self.n_inputs}")
        out = np.zeros(X.shape[0], dtype=np.uint8)

        def walk(nd: DTNode, rows: np.ndarray):
            if rows.size == 0:
                return
            if isinstance(nd, Leaf):
                out[rows] = nd.value
                return
            bit = X[rows, nd.var]
            walk(nd.lo, rows[bit == 0])
            walk(nd.hi, rows[bit == 1])
        walk(self.root, np.arange(X.shape[0]))
        return out

    def eval(self, x) -> int:
        return int(self.eval_batch(np.asarray(x, dtype=np.uint8)[None, :])[0])

    def substitute(self, sub: Substitution) -> "DecisionTree":
        def walk(nd: DTNode) -> DTNode:
            if isinstance(nd, Leaf):
                return nd
            tgt = int(sub.var_of[nd.var])
            if tgt < 0:
                return walk(nd.hi if sub.const[nd.var] else nd.lo)
            lo, hi = walk(nd.lo), walk(nd.hi)
            return lo if lo == hi else Branch(tgt, lo, hi)
        return DecisionTree(sub.n_new, walk(self.root))

    def truth_table(self, variables: Sequence[int] | None = None) -> tuple[int, tuple[int, ...]]:
        variables = tuple(self.support if variables is None else variables)
        return _pack_table(_eval_on_cube(self, variables)), variables


def dt_to_dnf(t: DecisionTree) -> Circuit:
    """One term per path to a 1-leaf; width is at most the depth."""
    terms = []

    def walk(nd: DTNode, path: list[int]):
        if isinstance(nd, Leaf):
            if nd.value:
                terms.append(list(path))
            return
        walk(nd.lo, path + [-(nd.var + 1)])
        walk(nd.hi, path + [nd.var + 1])
    walk(t.root, [])
    return dnf(t.n_inputs, terms)


def dt_to_local(t: DecisionTree) -> "LocalFunction":
    table, variables = t.truth_table()
    v = len(variables)
    values = np.array([(table >> i) & 1 for i in range(1 << v)], dtype=np.uint8)
    return LocalFunction.from_outputs(t.n_inputs, [(variables, values)])


def dt_from_json(obj, n: int, where: str = "tree") -> DecisionTree:
    def build(o, loc: str) -> DTNode:
        if o in (0, 1):
            return Leaf(int(o))
        if not isinstance(o, dict) or not {"var", "lo", "hi"} <= set(o):
            raise FormatError(f"{loc}: expected 0, 1 or {{var, lo, hi}}")
        var = o["var"]
        if not isinstance(var, int) or not 1 <= var <= n:
            raise FormatError(f"{loc}.var: {var!r} outside 1..{n}")
        return Branch(var - 1, build(o["lo"], loc + ".lo"), build(o["hi"], loc + ".hi"))
    return DecisionTree(n, build(obj, where))


def random_dt(n: int, depth: int, rng: np.random.Generator) -> DecisionTree:
    def build(level: int, used: frozenset) -> DTNode:
        if level == 0 or len(used) == n:
            return Leaf(int(rng.integers(0, 2)))
        choices = [v for v in range(n) if v not in used]
        var = int(rng.choice(choices))
        return Branch(var, build(level - 1, used | {var}), build(level - 1, used | {var}))
    return DecisionTree(n, build(depth, frozenset()))


# ------------------------------------------------------- exact tree depth

class _Cube:
    """Cofactor masks for truth tables over ``v`` variables packed in an int."""

    def __init__(self, v: int):
        self.v = v
        self.full = (1 << (1 << v)) - 1
        self.masks = []
        for i in range(v):
            step = 1 << i
            m = ((1 << step) - 1) << step
            length = 2 * step
            while length < (1 << v):
                m |= m << length
                length *= 2
            self.masks.append(m)

    def cofactors(self, f: int, i: int) -> tuple[int, int]:
        step = 1 << i
        lo = f & ~self.masks[i] & self.full
        hi = f & self.masks[i]
        return lo | (lo << step), hi | (hi >> step)


def _depth_at_most(f: int, t: int, cube: _Cube, memo: dict) -> bool:
    if f == 0 or f == cube.full:
        return True
    if t == 0:
        return False
    key = (f, t)
    if key in memo:
        return memo[key]
    result = False
    for i in range(cube.v):
        f0, f1 = cube.cofactors(f, i)
        if f0 == f1:
            continue
        if _depth_at_most(f0, t - 1, cube, memo) and _depth_at_most(f1, t - 1, cube, memo):
            result = True
            break
    memo[key] = result
    return result


def table_dt_depth(table: int, v: int, limit: int | None = None) -> int:
    """Exact optimal tree depth of a packed truth table; stops at ``limit + 1`` if given."""
    if v > DT_VAR_LIMIT:
        raise RegimeTooLarge(f"{v} relevant variables exceed the truth-table limit {DT_VAR_LIMIT}")
    cube = _Cube(v)
    memo: dict = {}
    top = v if limit is None else min(v, limit)
    for t in range(top + 1):
        if _depth_at_most(table, t, cube, memo):
            return t
    return top + 1


def dt_depth(f, limit: int | None = None) -> int:
    """Exact decision-tree depth of a single-output function.

    With ``limit`` the search stops early and any depth above it is reported
    as ``limit + 1``.
    """
    if isinstance(f, LocalFunction):
        if f.n_outputs != 1:
            raise ValueError("dt_depth takes a single-output function")
        return int(f.dt_depths(limit)[0])
    table, variables = f.truth_table()
    return table_dt_depth(table, len(variables), limit)


def optimal_dt(f) -> DecisionTree:
    """A decision tree of minimum depth computing ``f`` (circuit, tree or 1-output local function)."""
    if isinstance(f, LocalFunction):
        deps = [int(d) for d in f.deps[0] if d >= 0]
        vals = f.tables[0]
        variables = tuple(deps)
        # reorder the table to the compact variable list
        slots = [j for j, d in enumerate(f.deps[0]) if d >= 0]
        idx = np.zeros(1 << len(slots), dtype=np.int64)
        for pos, s in enumerate(slots):
            idx |= ((np.arange(1 << len(slots)) >> pos) & 1) << s
        table = _pack_table(vals[idx])
    else:
        table, variables = f.truth_table()
    v = len(variables)
    cube = _Cube(v)
    memo: dict = {}

    def build(g: int, budget: int) -> DTNode:
        if g == 0:
            return Leaf(0)
        if g == cube.full:
            return Leaf(1)
        for i in range(v):
            g0, g1 = cube.cofactors(g, i)
            if g0 == g1:
                continue
            if _depth_at_most(g0, budget - 1, cube, memo) and _depth_at_most(g1, budget - 1, cube, memo):
                return Branch(variables[i], build(g0, budget - 1), build(g1, budget - 1))
        raise AssertionError("depth budget inconsistent")

    depth = table_dt_depth(table, v)
    return DecisionTree(f.n_inputs, build(table, depth))


# ---------------------------------------------------------- local functions

class LocalFunction:
    """Many outputs, each reading a few inputs through a truth table.

    ``deps[j, s]`` is the input feeding slot ``s`` of output ``j`` (or -1 when
    the slot is unused) and ``tables[j, idx]`` is the output for slot values
    ``idx = sum(bit_s << s)``. Unused slots never affect the table.
    """

    def __init__(self, n_inputs: int, deps: np.ndarray, tables: np.ndarray):
        deps = np.asarray(deps, dtype=np.int64)
        tables = np.asarray(tables, dtype=np.uint8)
        if deps.ndim != 2 or tables.shape != (deps.shape[0], 1 << deps.shape[1]):
            raise DimensionMismatch(f"deps {deps.shape} and tables {tables.shape} disagree")
        if deps.size and (deps.max() >= n_inputs or deps.min() < -1):
            raise DimensionMismatch("dependency outside the input range")
        self.n_inputs = n_inputs
        self.deps = deps
        self.tables = tables

    @classmethod
    def from_outputs(cls, n_inputs: int, outputs: Sequence[tuple[Sequence[int], Sequence[int]]],
                     arity: int | None = None) -> "LocalFunction":
        width = max([len(d) for d, _ in outputs] + [arity or 0])
        deps = np.full((len(outputs), width), -1, dtype=np.int64)
        tables = np.zeros((len(outputs), 1 << width), dtype=np.uint8)
        idx = np.arange(1 << width)
        for j, (dep, table) in enumerate(outputs):
            table = np.asarray(table, dtype=np.uint8).reshape(-1)
            if table.shape[0] != 1 << len(dep):
                raise DimensionMismatch(f"output {j}: table of size {table.shape[0]} for {len(dep)} inputs")
            deps[j, : len(dep)] = dep
            tables[j] = table[idx & ((1 << len(dep)) - 1)]
        return cls(n_inputs, deps, tables)

    @classmethod
    def identity(cls, n: int) -> "LocalFunction":
        return cls(n, np.arange(n)[:, None], np.tile(np.array([0, 1], dtype=np.uint8), (n, 1)))

    @classmethod
    def constant(cls, n_inputs: int, values) -> "LocalFunction":
        values = np.asarray(values, dtype=np.uint8)
        return cls(n_inputs, np.zeros((values.shape[0], 0), dtype=np.int64), values[:, None])

    @property
    def n_outputs(self) -> int:
        return self.deps.shape[0]

    @property
    def arity(self) -> int:
        return self.deps.shape[1]

    def _index(self, X: np.ndarray) -> np.ndarray:
        if self.arity == 0:
            return np.zeros((X.shape[0], self.n_outputs), dtype=np.int64)
        gathered = X[:, np.maximum(self.deps, 0)].astype(np.int64)  # (B, N, a)
        gathered &= (self.deps >= 0)[None, :, :]
        return (gathered << np.arange(self.arity)[None, None, :]).sum(axis=2)

    def eval_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.uint8))
        if X.shape[-1] != self.n_inputs:
            raise DimensionMismatch(f"input of length {X.shape[-1]}, function has {self.n_inputs}")
        idx = self._index(X)
        return self.tables[np.arange(self.n_outputs)[None, :], idx]

    def eval(self, x) -> np.ndarray:
        return self.eval_batch(np.asarray(x, dtype=np.uint8)[None, :])[0]

    def eval_outputs(self, x, outputs: np.ndarray) -> np.ndarray:
        """Evaluate only the listed outputs on a single input."""
        x = np.asarray(x, dtype=np.uint8)
        outputs = np.asarray(outputs, dtype=np.int64)
        deps = self.deps[outputs]
        if self.arity == 0:
            return self.tables[outputs, 0]
        vals = x[np.maximum(deps, 0)].astype(np.int64) & (deps >= 0)
        idx = (vals << np.arange(self.arity)[None, :]).sum(axis=1)
        return self.tables[outputs, idx]

    def select(self, outputs) -> "LocalFunction":
        outputs = np.asarray(outputs, dtype=np.int64)
        return LocalFunction(self.n_inputs, self.deps[outputs], self.tables[outputs])

    def substitute(self, sub: Substitution) -> "LocalFunction":
        if sub.n_old != self.n_inputs:
            raise DimensionMismatch("substitution length differs from function input count")
        if self.arity == 0:
            return LocalFunction(sub.n_new, self.deps.copy(), self.tables.copy())
        used = self.deps >= 0
        safe = np.maximum(self.deps, 0)
        new_var = np.where(used, sub.var_of[safe], -1)
        fixed = used & (new_var < 0)
        fixed_val = np.where(fixed, sub.const[safe], 0).astype(np.int64)
        weights = 1 << np.arange(self.arity)
        fix_mask = (fixed * weights).sum(axis=1)
        fix_bits = (fixed_val * weights).sum(axis=1)
        idx = np.arange(1 << self.arity)[None, :]
        forced = (idx & ~fix_mask[:, None]) | fix_bits[:, None]
        tables = np.take_along_axis(self.tables, forced, axis=1)
        return LocalFunction(sub.n_new, np.where(fixed, -1, new_var), tables).pruned()

    def restrict(self, rho) -> "LocalFunction":
        return self.substitute(Substitution.from_restriction(rho.rho1, rho.rho2))

    def pruned(self) -> "LocalFunction":
        """Drop slots the truth table ignores, so ``deps`` is the semantic support."""
        deps = self.deps.copy()
        idx = np.arange(1 << self.arity)
        for s in range(self.arity):
            flipped = self.tables[:, idx ^ (1 << s)]
            ignores = (flipped == self.tables).all(axis=1)
            deps[ignores, s] = -1
        return LocalFunction(self.n_inputs, deps, self.tables)

    def relevant_counts(self) -> np.ndarray:
        return (self.pruned().deps >= 0).sum(axis=1)

    def influence(self, outputs=None) -> set[int]:
        """Inputs some listed output depends on (semantic support)."""
        deps = self.pruned().deps
        if outputs is not None:
            deps = deps[np.asarray(list(outputs), dtype=np.int64)]
        return set(int(d) for d in np.unique(deps) if d >= 0)

    def dt_depths(self, limit: int | None = None) -> np.ndarray:
        pruned = self.pruned()
        counts = (pruned.deps >= 0).sum(axis=1)
        out = counts.copy()
        cache: dict[bytes, int] = {}
        for j in np.flatnonzero(counts >= 2):
            key = pruned.tables[j].tobytes() + (pruned.deps[j] >= 0).tobytes()
            if key not in cache:
                table = _pack_table(pruned.tables[j])
                cache[key] = table_dt_depth(table, self.arity, limit)
            out[j] = cache[key]
        return out

    def to_json(self) -> dict:
        outs = []
        for j in range(self.n_outputs):
            slots = [s for s in range(self.arity) if self.deps[j, s] >= 0]
            idx = np.zeros(1 << len(slots), dtype=np.int64)
            for pos, s in enumerate(slots):
                idx |= ((np.arange(1 << len(slots)) >> pos) & 1) << s
            outs.append({"deps": [int(self.deps[j, s]) + 1 for s in slots],
                         "table": "".join(str(int(b)) for b in self.tables[j, idx])})
        return {"n": self.n_inputs, "outputs": outs}

    @classmethod
    def from_json(cls, data: dict, where: str = "local") -> "LocalFunction":
        try:
            n = int(data["n"])
            outputs = []
            for j, o in enumerate(data["outputs"]):
                deps = [int(d) - 1 for d in o["deps"]]
                if any(not 0 <= d < n for d in deps):
                    raise FormatError(f"{where}: outputs[{j}].deps outside 1..{n}")
                table = [int(ch) for ch in o["table"]]
                if len(table) != 1 << len(deps):
                    raise FormatError(f"{where}: outputs[{j}].table needs {1 << len(deps)} entries")
                outputs.append((deps, table))
        except KeyError as exc:
            raise FormatError(f"{where}: missing field {exc}") from exc
        return cls.from_outputs(n, outputs)


def random_local(n_inputs: int, n_outputs: int, ell: int, rng: np.random.Generator) -> LocalFunction:
    deps = np.stack([rng.choice(n_inputs, size=ell, replace=False) for _ in range(n_outputs)])
    tables = rng.integers(0, 2, size=(n_outputs, 1 << ell), dtype=np.uint8)
    return LocalFunction(n_inputs, deps, tables)


# ------------------------------------------------------------------ families

class FunctionFamily:
    """N single-output functions (circuits or trees) over a common input length."""

    def __init__(self, members: Sequence[Circuit | DecisionTree]):
        if not members:
            raise ValueError("empty family")
        n = members[0].n_inputs
        if any(m.n_inputs != n for m in members):
            raise DimensionMismatch("family members disagree on input length")
        self.members = list(members)
        self.n_inputs = n

    @property
    def n_outputs(self) -> int:
        return len(self.members)

    def eval_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.uint8))
        return np.stack([m.eval_batch(X) for m in self.members], axis=1)

    def eval(self, x) -> np.ndarray:
        return self.eval_batch(np.asarray(x, dtype=np.uint8)[None, :])[0]

    def eval_outputs(self, x, outputs) -> np.ndarray:
        x = np.asarray(x, dtype=np.uint8)[None, :]
        return np.array([self.members[int(j)].eval_batch(x)[0] for j in outputs], dtype=np.uint8)

    def select(self, outputs) -> "FunctionFamily":
        return FunctionFamily([self.members[int(j)] for j in outputs])

    def substitute(self, sub: Substitution) -> "FunctionFamily":
        return FunctionFamily([m.substitute(sub) for m in self.members])

    def restrict(self, rho) -> "FunctionFamily":
        return self.substitute(Substitution.from_restriction(rho.rho1, rho.rho2))

    def influence(self, outputs=None) -> set[int]:
        """Syntactic support of the listed outputs (a superset of the semantic one)."""
        chosen = self.members if outputs is None else [self.members[int(j)] for j in outputs]
        return set().union(*[set(m.support) for m in chosen])

    def dt_depths(self, limit: int | None = None) -> np.ndarray:
        out = []
        for m in self.members:
            v = len(m.support)
            if limit is not None and v <= limit:
                out.append(v if v < 2 else dt_depth(m, limit))
            else:
                out.append(dt_depth(m, limit))
        return np.array(out, dtype=np.int64)


def influence_set(F, S=None) -> set[int]:
    return F.influence(S)


# ------------------------------------------------------------ class checks

@dataclass(frozen=True)
class DTClass:
    """Decision trees of depth at most ``t``."""

    t: int

    def contains(self, F) -> np.ndarray:
        return F.dt_depths(self.t) <= self.t


@dataclass(frozen=True)
class LocalClass:
    ell: int

    def contains(self, F) -> np.ndarray:
        if isinstance(F, LocalFunction):
            return F.relevant_counts() <= self.ell
        return np.array([len(m.support) <= self.ell for m in F.members])


@dataclass(frozen=True)
class WidthClass:
    """Depth-2 circuits with bottom fan-in at most ``width`` (checked syntactically).

    Functions of at most ``width`` relevant inputs, or of tree depth at most
    ``width``, also qualify since both convert to such circuits.
    """

    width: int

    def contains(self, F) -> np.ndarray:
        if isinstance(F, LocalFunction):
            return F.dt_depths(self.width) <= self.width
        out = []
        for m in F.members:
            if isinstance(m, Circuit) and m.depth <= 2 and m.width_bottom <= self.width:
                out.append(True)
            elif len(m.support) <= self.width:
                out.append(True)
            else:
                out.append(isinstance(m, DecisionTree) and m.depth <= self.width)
        return np.array(out, dtype=bool)


@dataclass(frozen=True)
class AnyClass:
    def contains(self, F) -> np.ndarray:
        return np.ones(F.n_outputs, dtype=bool)
