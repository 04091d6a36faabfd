"""Stacking star reductions to strip one circuit layer per level."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..circuits import DTClass, WidthClass
from ..coder import Coder, compose_all
from ..errors import InfeasibleParams, LengthMismatch
from ..params import BoundReport, chain_feasibility
from .star import StarParams, star_decode, star_encode


def star_coder(pp: StarParams) -> Coder:
    return Coder(f"star({pp.k}->{pp.n})", pp.k, pp.n,
                 lambda x, rng: star_encode(pp, x, rng),
                 lambda c: star_decode(pp, c),
                 meta={"kind": "star", "params": pp.describe(), "obj": pp})


@dataclass
class Chain:
    levels: list[StarParams]
    targets: list
    coder: Coder
    report: BoundReport

    @property
    def d(self) -> int:
        return len(self.levels)


def level_targets(d: int, t: int) -> list:
    """Class each level's simulator must land in: width-``t`` depth-2 circuits, then depth-``t`` trees last."""
    return [WidthClass(t)] * (d - 1) + [DTClass(t)]


def depth_reduce_chain(d: int, levels: list[StarParams], t: int = 2, enforce: bool = True) -> Chain:
    """Compose ``levels`` (outermost first) into one coder.

    ``enforce`` checks the end-to-end budget ``2m <= k <= n(p/4)^d`` with
    the largest seed encoding as ``m`` and the outermost ``p``.
    """
    if d < 1 or len(levels) != d:
        raise ValueError(f"need exactly d={d} levels, got {len(levels)}")
    for outer, inner in zip(levels, levels[1:]):
        if outer.k != inner.n:
            raise LengthMismatch(f"level with k={outer.k} cannot carry codewords of length {inner.n}")
    m = max(pp.m for pp in levels)
    report = chain_feasibility(d, levels[-1].k, levels[0].n, levels[0].p, m)
    if enforce:
        report.raise_if_infeasible()
    return Chain(levels, level_targets(d, t), compose_all([star_coder(pp) for pp in levels]), report)


def plan_levels(k: int, d: int, p_log_inv: int, sigma: int, enforce: bool = False) -> list[StarParams]:
    """Per-level parameters, innermost built first, each with ``n`` about ``4k/p``.

    ``n`` is raised where the seed encoding would otherwise leave less than
    ``2k/p`` positions for survivors.
    """
    p = 2.0 ** -p_log_inv
    levels: list[StarParams] = []
    inner_n = k
    for _ in range(d):
        n = math.ceil(4 * inner_n / p)
        while True:
            try:
                pp = StarParams.build(inner_n, n, p_log_inv, sigma, enforce=enforce)
            except InfeasibleParams as exc:
                if exc.inequality not in ("k <= (n-m)*p/2", "k <= n - m"):
                    raise
                n += 1
                continue
            if n - pp.m >= math.ceil(2 * inner_n / p):
                break
            n = pp.m + math.ceil(2 * inner_n / p)
        levels.append(pp)
        inner_n = pp.n
    return levels[::-1]
