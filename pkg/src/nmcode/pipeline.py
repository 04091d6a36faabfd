"""End-to-end assembly: star levels, then the split-state reduction, then a split-state code.

The split-state code is a plugin. The bundled toy plugin only encodes each
half with its own secret-sharing encoding; it makes the pipeline runnable
and carries the tag ``toy-unproven`` so no report mistakes it for a real
non-malleable code.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import bitlinalg as bl
from .codes import scheme_for
from .coder import Coder, compose, compose_all, identity_coder
from .errors import DimensionMismatch, FormatError, InfeasibleParams
from .params import star_feasibility
from .reductions.chain import Chain, depth_reduce_chain, plan_levels, star_coder
from .reductions.splitstate import SplitStateParams, decode_word, repetition_scheme, ss_encode

__all__ = ["Coder", "compose", "compose_all", "identity_coder", "SsNmcPlugin", "toy_ss_nmc",
           "ss_coder", "PipelineParams", "Pipeline", "build_pipeline", "build_acd_nmc"]

TAGS = ("proven-external", "toy-unproven")


@dataclass(frozen=True, eq=False)
class SsNmcPlugin:
    """A coder whose codeword is two halves, each decoded on its own."""

    coder: Coder
    half_k: int
    half_n: int
    tag: str

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"tag must be one of {TAGS}")
        if self.coder.k != 2 * self.half_k or self.coder.n != 2 * self.half_n:
            raise DimensionMismatch("plugin coder does not split into equal halves")

    def halves(self, c) -> tuple[np.ndarray, np.ndarray]:
        c = bl.bits(c)
        return c[: self.half_n], c[self.half_n:]


def toy_ss_nmc(k: int, threshold: int = 1) -> SsNmcPlugin:
    if k < 1:
        raise ValueError("k must be at least 1")
    rpe = scheme_for(k, threshold)

    def encode(x, rng):
        return np.concatenate([rpe.encode_random(x[:k], rng), rpe.encode_random(x[k:], rng)])

    def decode(c):
        return np.concatenate([rpe.decode(c[: rpe.n]), rpe.decode(c[rpe.n:])])

    coder = Coder(f"toy-ss({2 * k}->{2 * rpe.n})", 2 * k, 2 * rpe.n, encode, decode,
                  meta={"kind": "plugin", "tag": "toy-unproven", "code": rpe.code.name})
    return SsNmcPlugin(coder, k, rpe.n, "toy-unproven")


def ss_coder(pp: SplitStateParams) -> Coder:
    def encode(x, rng):
        return np.concatenate(ss_encode(pp, x[: pp.k], x[pp.k:], rng))

    return Coder(f"split-state({2 * pp.k}->{pp.n})", 2 * pp.k, pp.n, encode, lambda c: decode_word(pp, c),
                 meta={"kind": "ss", "params": pp.describe(), "obj": pp})


@dataclass
class PipelineParams:
    """Everything needed to rebuild a pipeline bit for bit."""

    d: int = 2
    p_log_inv: int = 1
    sigma: int = 1
    t: int = 2
    plugin_k: int = 2
    plugin_threshold: int = 1
    ss_sigma: int = 1
    ss_tau: int | None = None
    ss_block_L: int = 2
    ss_block_R: int = 2
    ss_z_threshold: int = 1
    ss_ell: int | None = None
    base_rounds: int = 1
    enforce: bool = False
    master_seed: int = 0

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "PipelineParams":
        names = {f.name for f in fields(cls)}
        unknown = set(obj) - names
        if unknown:
            raise FormatError(f"pipeline parameters: unknown fields {sorted(unknown)}")
        return cls(**obj)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2))

    @classmethod
    def load(cls, path: str | Path) -> "PipelineParams":
        try:
            return cls.from_json(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc


@dataclass
class Pipeline:
    params: PipelineParams
    chain: Chain
    ss: SplitStateParams
    plugin: SsNmcPlugin
    coder: Coder
    report: dict = field(default_factory=dict)

    @property
    def violations(self) -> list[str]:
        return self.report["violations"]

    def describe(self) -> dict:
        return {
            "params": self.params.to_json(),
            "plugin_tag": self.plugin.tag,
            "k": self.coder.k,
            "n": self.coder.n,
            "levels": [pp.describe() for pp in self.chain.levels],
            "ss": self.ss.describe(),
            "stages": [c.name for c in self.coder.stages],
            "violations": self.violations,
        }


def _build_ss(params: PipelineParams, k: int, m: int, q: int) -> SplitStateParams:
    ell = params.ss_ell if params.ss_ell is not None else 2 ** params.t
    rpe_L = repetition_scheme(k, params.ss_block_L)
    tau = params.ss_tau if params.ss_tau is not None else 4 * rpe_L.n
    return SplitStateParams.build(k, params.ss_sigma, m, q, ell, tau, rpe_L,
                                  repetition_scheme(k, params.ss_block_R), enforce=params.enforce,
                                  z_threshold=params.ss_z_threshold)


def build_pipeline(params: PipelineParams, plugin: SsNmcPlugin | None = None) -> Pipeline:
    """Star levels (outermost first), the split-state stage, then the plugin.

    The split-state stage must absorb one leakage round per star level on
    top of the adversary's own rounds, each as long as the largest seed
    encoding; its ``m`` is therefore settled by a short fixed-point loop.
    """
    plugin = plugin if plugin is not None else toy_ss_nmc(params.plugin_k, params.plugin_threshold)
    q = params.d + params.base_rounds
    m = 1
    for _ in range(8):
        ss = _build_ss(params, plugin.half_n, m, q)
        levels = plan_levels(ss.n, params.d, params.p_log_inv, params.sigma, enforce=params.enforce)
        need = max(pp.m for pp in levels)
        if need <= m:
            break
        m = need
    chain = depth_reduce_chain(params.d, levels, params.t, enforce=params.enforce)
    coder = compose_all([chain.coder, ss_coder(ss), plugin.coder])
    star_reports = [star_feasibility(pp.k, pp.n, pp.p_log_inv, pp.sigma, pp.m) for pp in levels]
    violations = [f"star level {i + 1}: {v}" for i, r in enumerate(star_reports) for v in r.violations]
    violations += [f"chain: {v}" for v in chain.report.violations]
    violations += [f"ss: {name}" for name, ok in ss.checks["per_encoding"].items() if not ok]
    if params.enforce and violations:
        raise InfeasibleParams(violations[0])
    report = {"star": [r.to_json() for r in star_reports], "chain": chain.report.to_json(),
              "ss": {key: val for key, val in ss.checks.items()}, "violations": violations,
              "n_regions": {"n_Z": ss.n_Z, "tau": ss.tau, "n_R": ss.n_R, "ss_n": ss.n,
                            "level_n": [pp.n for pp in levels]}}
    return Pipeline(params, chain, ss, plugin, coder, report)


def build_acd_nmc(params: PipelineParams, ss: SsNmcPlugin | None = None) -> Coder:
    return build_pipeline(params, ss).coder
