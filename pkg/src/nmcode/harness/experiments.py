"""Experiment runners behind the command line.

Every runner takes an :class:`ExperimentConfig` and returns a JSON-ready
report holding the config, the measured tables, and named verdicts. Trial
``i`` of a run draws from ``trial_rng(master_seed, i, stream)``, so a run
replays bit for bit and trials can be split across workers in any order.
"""
from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import partial
from pathlib import Path

import numpy as np

from .. import bitlinalg as bl
from ..circuits import AnyClass, DTClass, LocalClass, WidthClass, dt_depth, load_circuits, random_dnf, dnf
from ..coder import compose_all
from ..errors import FormatError, RegimeTooLarge
from ..params import ss_error_bound, star_fallback_bound, switching_bound, tx_sigma
from ..pipeline import Pipeline, PipelineParams, build_pipeline
from ..prg import EXHAUSTIVE_SEED_BITS, CwGenerator
from ..reductions import splitstate as ss
from ..reductions.leaky import LeakyAdversary, eval_leaky, tamper_batch
from ..reductions.star import StarParams, decode_batch, encode_batch, restriction_batch, star_simulator
from ..restrictions import Restriction, subset_from_string_batch
from . import adversaries
from .stats import (
    BOTTOM,
    DistributionTable,
    distance_margin,
    hoeffding_halfwidth,
    message_space,
    outcome_key,
    stat_distance,
    trial_rng,
)

TARGETS = ("switching", "star-reduction", "ss-reduction", "pipeline")
MODES = ("exhaustive", "montecarlo")
EXHAUSTIVE_BITS = EXHAUSTIVE_SEED_BITS


@dataclass
class ExperimentConfig:
    target: str
    params: dict = field(default_factory=dict)
    master_seed: int = 0
    mode: str = "montecarlo"
    trials: int = 100_000
    adversary: object = "suite"
    messages: list | None = None
    output: str | None = None
    workers: int = 1
    base_dir: str = "."

    def __post_init__(self):
        if self.target not in TARGETS:
            raise FormatError(f"config.target: expected one of {TARGETS}, got {self.target!r}")
        if self.mode not in MODES:
            raise FormatError(f"config.mode: expected one of {MODES}, got {self.mode!r}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise FormatError("config.trials: must be a positive integer")
        if not isinstance(self.params, dict):
            raise FormatError("config.params: must be an object")

    @classmethod
    def from_json(cls, obj: dict, base_dir: str | Path = ".") -> "ExperimentConfig":
        if not isinstance(obj, dict) or "target" not in obj:
            raise FormatError("config: missing field 'target'")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise FormatError(f"config: unknown fields {sorted(unknown)}")
        obj = dict(obj)
        obj.setdefault("base_dir", str(base_dir))
        return cls(**obj)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            obj = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc
        return cls.from_json(obj, path.parent)

    def to_json(self) -> dict:
        return asdict(self)


def _report(cfg: ExperimentConfig, results: dict, verdicts: dict, rows: list[dict]) -> dict:
    return {"config": cfg.to_json(), "results": results, "verdicts": verdicts,
            "ok": all(verdicts.values()), "rows": rows}


def _messages(cfg: ExperimentConfig, k: int) -> list[np.ndarray]:
    if cfg.messages is None:
        return [bl.bits(format(i, f"0{k}b")) for i in range(1 << k)]
    out = []
    for j, m in enumerate(cfg.messages):
        x = bl.bits(m)
        if x.shape[0] != k:
            raise FormatError(f"config.messages[{j}]: {x.shape[0]} bits, expected {k}")
        out.append(x)
    return out


def _adversaries(cfg: ExperimentConfig, n: int) -> list[tuple[str, LeakyAdversary]]:
    spec = cfg.adversary
    if spec == "suite":
        return adversaries.suite(n, cfg.master_seed)
    if isinstance(spec, str) and spec in ("identity", "adaptive"):
        return [(spec, getattr(adversaries, spec)(n))]
    if isinstance(spec, str):
        path = Path(cfg.base_dir) / spec
        return [(path.name, adversaries.adversary_from_json(json.loads(path.read_text()), n, path.parent))]
    if isinstance(spec, dict):
        return [("adversary", adversaries.adversary_from_json(spec, n, cfg.base_dir))]
    if isinstance(spec, list):
        return [(f"adversary-{i}", adversaries.adversary_from_json(s, n, cfg.base_dir, f"adversary[{i}]"))
                for i, s in enumerate(spec)]
    raise FormatError("config.adversary: expected 'suite', a file name, an object or a list")


def _map(fn, chunks, workers: int):
    if workers <= 1:
        return [fn(c) for c in chunks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))


def _chunks(total: int, size: int) -> list[range]:
    return [range(a, min(a + size, total)) for a in range(0, total, size)]


def _bit_rows(count: int, width: int, start: int = 0) -> np.ndarray:
    idx = np.arange(start, start + count, dtype=np.int64)
    return ((idx[:, None] >> np.arange(width - 1, -1, -1)[None, :]) & 1).astype(np.uint8)


# ----------------------------------------------------------------- switching

def _switching_circuits(spec, base: Path, seed: int):
    if not isinstance(spec, dict):
        raise FormatError("params.circuits: must be an object")
    if "file" in spec:
        return load_circuits(base / spec["file"])
    if "dnfs" in spec:
        n = int(spec["n"])
        return [dnf(n, terms) for terms in spec["dnfs"]]
    if "random" in spec:
        r = spec["random"]
        rng = np.random.default_rng(int(r.get("seed", seed)))
        return [random_dnf(int(r["n"]), int(r["width"]), int(r["terms"]), rng) for _ in range(int(r["count"]))]
    raise FormatError("params.circuits: expected 'file', 'dnfs' or 'random'")


def switching_failures(circuits, S: np.ndarray, p_log_inv: int, t: int) -> np.ndarray:
    """Per row of restriction strings: does some circuit keep tree depth at least ``t``?"""
    n = circuits[0].n_inputs
    rho1 = subset_from_string_batch(S[:, : n * p_log_inv], n, p_log_inv)
    rho2 = S[:, n * p_log_inv:]
    supports = np.zeros((len(circuits), n), dtype=np.int32)
    for j, c in enumerate(circuits):
        supports[j, list(c.support)] = 1
    alive = rho1.astype(np.int32) @ supports.T
    fail = np.zeros(S.shape[0], dtype=bool)
    # fewer than t live variables cannot need a depth-t tree
    for i, j in zip(*np.nonzero(alive >= t)):
        if fail[i]:
            continue
        if dt_depth(circuits[j].restrict(Restriction(rho1[i], rho2[i])), limit=t) >= t:
            fail[i] = True
    return fail


def run_switching_experiment(cfg: ExperimentConfig) -> dict:
    p = cfg.params
    try:
        w, t, b = int(p["w"]), int(p["t"]), int(p["p_log_inv"])
    except KeyError as exc:
        raise FormatError(f"params: missing field {exc}") from exc
    delta = float(p.get("delta", 0.0))
    circuits = _switching_circuits(p.get("circuits", {}), Path(cfg.base_dir), cfg.master_seed)
    n, M = circuits[0].n_inputs, len(circuits)
    prob = 2.0 ** -b
    bound = switching_bound(w, t, prob, delta, M)
    modeled = tx_sigma(t, w, max(c.size for c in circuits), delta, prob) if delta > 0 else None
    sigma = int(p.get("sigma", modeled if modeled is not None else 0))
    sources = p.get("source", "sigma-wise")
    sources = ["sigma-wise", "uniform"] if sources == "both" else [sources]
    length = n * b + n
    results, verdicts, rows = {}, {}, []
    for src in sources:
        if src == "sigma-wise":
            gen = CwGenerator.unbiased(sigma, length)
            if cfg.mode == "exhaustive":
                if gen.seed_len > EXHAUSTIVE_BITS:
                    raise RegimeTooLarge(f"seed of {gen.seed_len} bits exceeds the exhaustive budget")
                draws = [(gen.eval_batch(gen.all_seeds()))]
            else:
                rng = trial_rng(cfg.master_seed, 0, 0)
                draws = (gen.eval_batch(rng.integers(0, 2, (len(ch), gen.seed_len), dtype=np.uint8))
                         for ch in _chunks(cfg.trials, 8192))
        elif src == "uniform":
            if cfg.mode == "exhaustive":
                raise RegimeTooLarge(f"uniform restrictions use {length} bits, beyond the exhaustive budget")
            rng = trial_rng(cfg.master_seed, 0, 1)
            draws = (rng.integers(0, 2, (len(ch), length), dtype=np.uint8) for ch in _chunks(cfg.trials, 8192))
        else:
            raise FormatError(f"params.source: unknown source {src!r}")
        fails = total = 0
        for S in draws:
            fails += int(switching_failures(circuits, S, b, t).sum())
            total += S.shape[0]
        freq = Fraction(fails, total)
        half = 0.0 if cfg.mode == "exhaustive" else hoeffding_halfwidth(total)
        upper = float(freq) + half
        ok = upper <= bound or bound > 1
        results[src] = {"failures": fails, "trials": total, "frequency": float(freq), "ci_halfwidth": half,
                        "upper": upper, "exact": cfg.mode == "exhaustive"}
        verdicts[f"{src}: upper CI <= bound or bound vacuous"] = ok
        rows.append({"table": "switching", "source": src, "failures": fails, "trials": total,
                     "frequency": float(freq), "upper": upper, "bound": bound})
    results.update({"bound": bound, "vacuous": bound > 1, "M": M, "n": n, "sigma": sigma,
                    "sigma_modeled": modeled, "p": prob})
    return _report(cfg, results, verdicts, rows)


# ------------------------------------------------------------ star reduction

def _class_from_json(obj):
    if obj in (None, "any"):
        return AnyClass()
    if isinstance(obj, dict) and len(obj) == 1:
        (kind, val), = obj.items()
        cls = {"dt": DTClass, "local": LocalClass, "width": WidthClass}.get(kind)
        if cls is not None:
            return cls(int(val))
    raise FormatError("params.target_class: expected 'any' or {dt|local|width: int}")


def star_params_from_json(p: dict) -> StarParams:
    try:
        return StarParams.build(int(p["k"]), int(p["n"]), int(p["p_log_inv"]), int(p["sigma"]),
                                enforce=bool(p.get("enforce", True)), strict_decode=bool(p.get("strict_decode", False)))
    except KeyError as exc:
        raise FormatError(f"params: missing field {exc}") from exc


def star_cell(pp: StarParams, adv, target, rand_bits: np.ndarray, messages, exact: bool = False) -> dict:
    """Real and simulated outcome tables over the given randomness rows.

    Each row is used once for the real experiment and once to sample the
    simulator, so real and simulated outcomes are coupled row by row.
    """
    R = [pp.split_randomness(row) for row in rand_bits]
    Z = np.stack([r.zeta for r in R])
    Rr = np.stack([r.r for r in R])
    U = np.stack([r.u for r in R])
    X = np.stack(messages)
    keys = [outcome_key(x) for x in messages]
    real_keys = []
    for x in messages:
        C, _ = encode_batch(pp, np.tile(x, (len(R), 1)), Z, Rr, U)
        alive, CT = tamper_batch(adv, C)
        ok, D = decode_batch(pp, CT)
        real_keys.append(_keys(alive & ok, D))
    sim_keys = [[None] * len(R) for _ in messages]
    good = np.zeros(len(R), dtype=bool)
    fallback = np.zeros(len(R), dtype=bool)
    rho1, rho2, fb = restriction_batch(pp, Z, Rr, U)
    for i, r in enumerate(R):
        sim = star_simulator(pp, adv, target=target, rand=r, restriction=(rho1[i], rho2[i], fb[i]))
        good[i], fallback[i] = sim.good, sim.fallback
        alive, out = tamper_batch(sim.adversary, X)
        for j, key in enumerate(_keys(alive, out)):
            sim_keys[j][i] = key
    cells = {}
    for j, key in enumerate(keys):
        real = np.array(real_keys[j], dtype=object)
        simk = np.array(sim_keys[j], dtype=object)
        differ = real != simk
        space = message_space(pp.k)
        cells[key] = {"real": DistributionTable(Counter(real.tolist()), exact, space),
                      "sim": DistributionTable(Counter(simk.tolist()), exact, space),
                      "mismatch_good": int((differ & good).sum()), "mismatch_bad": int((differ & ~good).sum())}
    return {"cells": cells, "bad": int((~good).sum()), "fallback": int(fallback.sum()), "total": len(R)}


def _keys(ok: np.ndarray, words: np.ndarray) -> list[str]:
    return [outcome_key(w) if a else BOTTOM for a, w in zip(ok, words)]


def _star_chunk(pp, adv, target, master, messages, chunk):
    rows = np.stack([trial_rng(master, i, 0).integers(0, 2, pp.randomness_len, dtype=np.uint8) for i in chunk])
    return star_cell(pp, adv, target, rows, messages)


def _merge_cells(parts: list[dict]) -> dict:
    first = parts[0]
    cells = {}
    for key in first["cells"]:
        real = first["cells"][key]["real"]
        sim = first["cells"][key]["sim"]
        mg = mb = 0
        for part in parts:
            c = part["cells"][key]
            if part is not first:
                real = real.merge(c["real"])
                sim = sim.merge(c["sim"])
            mg += c["mismatch_good"]
            mb += c["mismatch_bad"]
        cells[key] = {"real": real, "sim": sim, "mismatch_good": mg, "mismatch_bad": mb}
    return {"cells": cells, "bad": sum(p["bad"] for p in parts), "fallback": sum(p["fallback"] for p in parts),
            "total": sum(p["total"] for p in parts)}


def run_star_experiment(cfg: ExperimentConfig) -> dict:
    pp = star_params_from_json(cfg.params)
    target = _class_from_json(cfg.params.get("target_class"))
    messages = _messages(cfg, pp.k)
    results, verdicts, rows = {"star": pp.describe(), "adversaries": {}}, {}, []
    exact = cfg.mode == "exhaustive"
    if exact and pp.randomness_len > EXHAUSTIVE_BITS:
        raise RegimeTooLarge(f"{pp.randomness_len} randomness bits exceed the exhaustive budget of {EXHAUSTIVE_BITS}")
    for name, adv in _adversaries(cfg, pp.n):
        if exact:
            total = 1 << pp.randomness_len
            parts = _map(lambda ch: star_cell(pp, adv, target, _bit_rows(len(ch), pp.randomness_len, ch.start),
                                              messages, True), _chunks(total, 1 << 14), 1)
        else:
            parts = _map(partial(_star_chunk, pp, adv, target, cfg.master_seed, messages),
                         _chunks(cfg.trials, 4096), cfg.workers)
        merged = _merge_cells(parts)
        bad = Fraction(merged["bad"], merged["total"])
        margin = 0.0 if exact else hoeffding_halfwidth(merged["total"]) + distance_margin(
            len(message_space(pp.k)), merged["total"], merged["total"])
        per = {}
        for key, c in merged["cells"].items():
            dist = stat_distance(c["real"], c["sim"])
            per[key] = {"distance": str(dist) if exact else float(dist), "distance_float": float(dist),
                        "bottom_rate_real": float(c["real"].prob(BOTTOM)),
                        "mismatch_good": c["mismatch_good"], "mismatch_bad": c["mismatch_bad"],
                        "real": c["real"].to_json(), "sim": c["sim"].to_json()}
            rows.append({"table": "star", "adversary": name, "message": key, "distance": float(dist),
                         "bad": float(bad), "mismatch_good": c["mismatch_good"]})
            verdicts[f"{name} x={key}: simulator exact on good randomness"] = c["mismatch_good"] == 0
            verdicts[f"{name} x={key}: distance <= bad-event probability"] = float(dist) <= float(bad) + margin
        results["adversaries"][name] = {
            "messages": per, "max_distance": max(v["distance_float"] for v in per.values()),
            "bad_probability": str(bad) if exact else float(bad), "fallback_rate": merged["fallback"] / merged["total"],
            "fallback_bound": star_fallback_bound(pp.sigma, pp.p_log_inv), "margin": margin,
            "randomness": merged["total"]}
    return _report(cfg, results, verdicts, rows)


# ------------------------------------------------------------- split-state

def ss_params_from_json(p: dict) -> ss.SplitStateParams:
    try:
        k, sigma, m, q, ell = (int(p[key]) for key in ("k", "sigma", "m", "q", "ell"))
    except KeyError as exc:
        raise FormatError(f"params: missing field {exc}") from exc
    enforce = bool(p.get("enforce", True))
    if "tau" not in p:
        return ss.SplitStateParams.minimal(k, sigma, m, q, ell, p.get("n_L"), enforce=enforce)
    return ss.SplitStateParams.build(
        k, sigma, m, q, ell, int(p["tau"]), ss.repetition_scheme(k, int(p.get("block_L", 2))),
        ss.repetition_scheme(k, int(p.get("block_R", 2))), enforce=enforce,
        z_threshold=p.get("z_threshold"), precision_bits=p.get("precision_bits"))


def _pairs(cfg: ExperimentConfig, k: int) -> list[tuple[np.ndarray, np.ndarray]]:
    return [(x[:k], x[k:]) for x in _messages(cfg, 2 * k)]


def _ss_chunk(pp, adv, xL, xR, master, chunk):
    sup = ss._Supports(adv.family, pp.n)
    real, sim = Counter(), Counter()
    events = Counter()
    for i in chunk:
        real[outcome_key(ss.decode_word(pp, eval_leaky(adv, np.concatenate(
            ss.ss_encode(pp, xL, xR, trial_rng(master, i, 0))))))] += 1
        streams = ss.SsTrialRng.from_generator(trial_rng(master, i, 1))
        state = ss.simulate_prefix(pp, adv, streams, sup)
        events.update(state.events)
        events["bad"] += state.outcome == "bad"
        if state.outcome == "split":
            out = np.concatenate([ss.LeftTamper(pp, adv.family, state)(xL, streams.left()),
                                  ss.RightTamper(pp, adv.family, state)(xR, streams.right())])
        else:
            out = None
        sim[outcome_key(out)] += 1
    return real, sim, events


def run_ss_experiment(cfg: ExperimentConfig) -> dict:
    if cfg.mode == "exhaustive":
        raise RegimeTooLarge("the split-state simulator samples a full codeword of randomness; use montecarlo")
    pp = ss_params_from_json(cfg.params)
    results, verdicts, rows = {"ss": pp.describe(), "checks": pp.checks, "adversaries": {}}, {}, []
    space = message_space(2 * pp.k)
    margin = distance_margin(len(space), cfg.trials, cfg.trials)
    for name, adv in _adversaries(cfg, pp.n):
        per = {}
        for xL, xR in _pairs(cfg, pp.k):
            parts = _map(partial(_ss_chunk, pp, adv, xL, xR, cfg.master_seed), _chunks(cfg.trials, 1000),
                         cfg.workers)
            real = DistributionTable(_total(p[0] for p in parts), space=space)
            sim = DistributionTable(_total(p[1] for p in parts), space=space)
            events = _total(p[2] for p in parts)
            dist = float(stat_distance(real, sim))
            bad = events["bad"] / cfg.trials
            key = outcome_key(np.concatenate([xL, xR]))
            per[key] = {"distance": dist, "bad_rate": bad, "events": dict(events),
                        "real": real.to_json(), "sim": sim.to_json()}
            verdicts[f"{name} x={key}: distance <= bad rate + MC error"] = (
                dist <= bad + hoeffding_halfwidth(cfg.trials) + margin)
            rows.append({"table": "ss", "adversary": name, "message": key, "distance": dist, "bad": bad})
        results["adversaries"][name] = {"messages": per, "max_distance": max(v["distance"] for v in per.values()),
                                        "error_bound": ss_error_bound(pp.sigma), "margin": margin}
    return _report(cfg, results, verdicts, rows)


# ------------------------------------------------------------------ pipeline

def _apply(g, c, rng):
    if isinstance(g, ss.SsSimulation):
        k = len(c) // 2
        return g(c[:k], c[k:], rng=rng)
    return eval_leaky(g, c)


def pipeline_trial(pl: Pipeline, suffixes, adv, x, rng: np.random.Generator) -> tuple[list[str], dict]:
    """Outcomes along the hybrid chain: real, then one more stage simulated at a time."""
    stages = pl.coder.stages
    outs = [outcome_key(pl.coder.decode(eval_leaky(adv, pl.coder.encode(x, rng))))]
    events: dict = {}
    g = adv
    for i, stage in enumerate(stages[:-1]):
        kind = stage.meta.get("kind")
        if kind == "star":
            sim = star_simulator(stage.meta["obj"], g, rng, target=pl.chain.targets[i])
            events[f"stage{i + 1}:bad"] = not sim.good
            events[f"stage{i + 1}:fallback"] = sim.fallback
            g = sim.adversary
        elif kind == "ss":
            sim = ss.ss_simulator(stage.meta["obj"], g, rng)
            events[f"stage{i + 1}:bad"] = sim.bad
            for key, hit in sim.events.items():
                events[f"stage{i + 1}:{key}"] = hit
            g = sim
        else:
            raise FormatError(f"stage {stage.name} has no simulator")
        inner = suffixes[i + 1]
        outs.append(outcome_key(inner.decode(_apply(g, inner.encode(x, rng), rng))))
    return outs, events


def _pipeline_chunk(pl, adv, x, master, adv_index, stream, chunk):
    suffixes = [compose_all(pl.coder.stages[i:]) for i in range(len(pl.coder.stages))]
    tables = [Counter() for _ in pl.coder.stages]
    differ = Counter()
    events = Counter()
    for i in chunk:
        outs, ev = pipeline_trial(pl, suffixes, adv, x, trial_rng(master, i, adv_index, stream))
        for t, o in zip(tables, outs):
            t[o] += 1
        for j in range(len(outs) - 1):
            differ[j] += outs[j] != outs[j + 1]
        events.update(ev)
    return tables, events, differ


def _total(counters) -> Counter:
    out = Counter()
    for c in counters:
        out.update(c)
    return out


def run_pipeline_experiment(cfg: ExperimentConfig) -> dict:
    """Hybrid chain D0 (real) .. DS (every star and split-state stage simulated).

    Stage distances come from one batch and the end-to-end distance from an
    independent one, so the composition check compares separate estimates.
    Each stage distance is also bounded by the rate at which consecutive
    hybrids disagree within a trial, a coupling bound with a one-sided
    Hoeffding error.
    """
    if cfg.mode == "exhaustive":
        raise RegimeTooLarge("pipeline randomness is far beyond the exhaustive budget; use montecarlo")
    params = PipelineParams.from_json(cfg.params) if cfg.params else PipelineParams()
    pl = build_pipeline(params)
    space = message_space(pl.coder.k)
    S = len(pl.coder.stages) - 1
    margin = distance_margin(len(space), cfg.trials, cfg.trials)
    half = hoeffding_halfwidth(cfg.trials)
    results = {"pipeline": pl.describe(), "plugin_tag": pl.plugin.tag, "adversaries": {}}
    verdicts, rows = {}, []
    for a_idx, (name, adv) in enumerate(_adversaries(cfg, pl.coder.n)):
        per = {}
        for x in _messages(cfg, pl.coder.k):
            run_batch = partial(_pipeline_chunk, pl, adv, x, cfg.master_seed, a_idx)
            parts = _map(partial(run_batch, 0), _chunks(cfg.trials, 250), cfg.workers)
            check = _map(partial(run_batch, 1), _chunks(cfg.trials, 250), cfg.workers)
            tables = [DistributionTable(_total(p[0][j] for p in parts), space=space) for j in range(S + 1)]
            fresh = [DistributionTable(_total(p[0][j] for p in check), space=space) for j in (0, S)]
            events = _total(p[1] for p in parts)
            differ = _total(p[2] for p in parts)
            stage = [float(stat_distance(tables[j], tables[j + 1])) for j in range(S)]
            coupled = [differ[j] / cfg.trials for j in range(S)]
            end = float(stat_distance(*fresh))
            slack = (S + 1) * margin
            coupled_slack = margin + S * half
            key = outcome_key(x)
            per[key] = {"stage_distances": stage, "sum": sum(stage), "end_to_end": end, "mc_error": slack,
                        "coupled_mismatch": coupled, "coupled_sum": sum(coupled), "coupled_mc_error": coupled_slack,
                        "events": {k: v / cfg.trials for k, v in sorted(events.items())},
                        "bottom_rate_real": float(tables[0].prob(BOTTOM)),
                        "tables": [t.to_json() for t in tables]}
            verdicts[f"{name} x={key}: end-to-end <= sum of stages + MC error"] = end <= sum(stage) + slack
            verdicts[f"{name} x={key}: end-to-end <= sum of coupled mismatch rates + MC error"] = (
                end <= sum(coupled) + coupled_slack)
            rows.append({"table": "pipeline", "adversary": name, "message": key, "end_to_end": end,
                         **{f"stage{j + 1}": d for j, d in enumerate(stage)}, "sum": sum(stage),
                         "coupled_sum": sum(coupled), "mc_error": slack})
        results["adversaries"][name] = per
    return _report(cfg, results, verdicts, rows)


def run_nm_experiment(cfg: ExperimentConfig) -> dict:
    if cfg.target == "star-reduction":
        return run_star_experiment(cfg)
    if cfg.target == "ss-reduction":
        return run_ss_experiment(cfg)
    if cfg.target == "pipeline":
        return run_pipeline_experiment(cfg)
    raise FormatError(f"nm-experiment does not run target {cfg.target!r}")


# ------------------------------------------------------------ hybrid replay

def _same(a, b) -> bool:
    return outcome_key(a) == outcome_key(b)


def _hybrid_chunk(pp, adv, xL, xR, master, chunk):
    sup = ss._Supports(adv.family, pp.n)
    mism = Counter()
    h0, h1 = Counter(), Counter()
    events = Counter()
    for i in chunk:
        o = ss.run_hybrids(pp, adv, xL, xR, trial_rng(master, i, 0), trial_rng(master, i, 1), sup=sup)
        mism["H1-H2"] += not _same(o["H1"], o["H2"])
        mism["H2-H3"] += not _same(o["H2"], o["H3"])
        mism["H3-H4"] += not _same(o["H3"], o["H4"])
        h0[outcome_key(o["H0"])] += 1
        h1[outcome_key(o["H1"])] += 1
        events.update(o.get("events", {}))
        events["bad"] += o.get("outcome") == "bad"
        events["rejected"] += o.get("outcome") == "bottom"
    return mism, h0, h1, events


def _uncoupled_chunk(pp, adv, xL, xR, master, chunk):
    sup = ss._Supports(adv.family, pp.n)
    h2, h3 = Counter(), Counter()
    for i in chunk:
        h2[outcome_key(ss.uncoupled_h2(pp, adv, xL, xR, trial_rng(master, i, 2), sup))] += 1
        h3[outcome_key(ss.run_hybrids(pp, adv, xL, xR, None, trial_rng(master, i, 3), ("H3",), sup)["H3"])] += 1
    return h2, h3


def default_replay_adversary(pp: ss.SplitStateParams, seed: int = 0) -> LeakyAdversary:
    """Random ``ell``-local family with leakage rounds and a leakage-dependent final choice."""
    from ..circuits import random_local
    from ..reductions.leaky import BitBranchSelector, FixedSelector

    rng = np.random.default_rng(seed)
    extra = 16
    fam = random_local(pp.n, pp.n + extra, pp.ell, rng)
    leaks = tuple(FixedSelector(rng.choice(pp.n + extra, size=pp.m, replace=False)) for _ in range(pp.q))
    final = BitBranchSelector(0, 0, np.arange(pp.n), np.arange(extra, pp.n + extra))
    return LeakyAdversary(fam, leaks, (pp.m,) * pp.q, final, pp.n)


def run_hybrid_replay(cfg: ExperimentConfig) -> dict:
    pp = ss_params_from_json(cfg.params)
    if cfg.adversary in ("suite", None, "default"):
        advs = [("random-local-adaptive", default_replay_adversary(pp, cfg.master_seed))]
    else:
        advs = _adversaries(cfg, pp.n)
    uncoupled_trials = int(cfg.params.get("uncoupled_trials", min(cfg.trials, 2000)))
    bound = ss_error_bound(pp.sigma)
    space = message_space(2 * pp.k)
    results = {"ss": pp.describe(), "checks": pp.checks, "error_bound": bound, "adversaries": {}}
    verdicts, rows = {}, []
    for name, adv in advs:
        per = {}
        for xL, xR in _pairs(cfg, pp.k)[:1] if cfg.messages is None else _pairs(cfg, pp.k):
            parts = _map(partial(_hybrid_chunk, pp, adv, xL, xR, cfg.master_seed), _chunks(cfg.trials, 500),
                         cfg.workers)
            mism = _total(p[0] for p in parts)
            h0 = DistributionTable(_total(p[1] for p in parts), space=space)
            h1 = DistributionTable(_total(p[2] for p in parts), space=space)
            events = _total(p[3] for p in parts)
            d01 = float(stat_distance(h0, h1))
            margin = distance_margin(len(space), cfg.trials, cfg.trials)
            un = _map(partial(_uncoupled_chunk, pp, adv, xL, xR, cfg.master_seed),
                      _chunks(uncoupled_trials, 500), cfg.workers)
            h2 = DistributionTable(_total(p[0] for p in un), space=space)
            h3 = DistributionTable(_total(p[1] for p in un), space=space)
            d23 = float(stat_distance(h2, h3))
            m23 = distance_margin(len(space), uncoupled_trials, uncoupled_trials)
            key = outcome_key(np.concatenate([xL, xR]))
            per[key] = {"mismatches": {p: mism[p] for p in ("H1-H2", "H2-H3", "H3-H4")}, "trials": cfg.trials, "h0_h1_distance": d01, "margin": margin,
                        "events": {k: v / cfg.trials for k, v in events.items()},
                        "uncoupled_h2_h3_distance": d23, "uncoupled_margin": m23,
                        "h0": h0.to_json(), "h1": h1.to_json()}
            for pair in ("H1-H2", "H2-H3", "H3-H4"):
                verdicts[f"{name} x={key}: {pair} mismatches = 0"] = mism[pair] == 0
            verdicts[f"{name} x={key}: |H0-H1| <= exp(-sigma/2+1) + MC error"] = d01 <= bound + margin
            verdicts[f"{name} x={key}: uncoupled |H2-H3| within MC error"] = d23 <= m23
            rows.append({"table": "hybrid", "adversary": name, "message": key, **{k: mism[k] for k in
                         ("H1-H2", "H2-H3", "H3-H4")}, "h0_h1": d01, "bound": bound, "h2_h3_uncoupled": d23})
        results["adversaries"][name] = per
    return _report(cfg, results, verdicts, rows)


def run(cfg: ExperimentConfig) -> dict:
    if cfg.target == "switching":
        return run_switching_experiment(cfg)
    return run_nm_experiment(cfg)


def write_report(report: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, default=str))


def rows_to_csv(rows: list[dict]) -> str:
    import csv
    import io

    keys: list[str] = []
    for r in rows:
        keys += [k for k in r if k not in keys]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=keys)
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
