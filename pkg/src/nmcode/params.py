"""Closed-form error bounds and parameter feasibility checks.

Every evaluator is a pure function of its arguments. Unspecified constants
default to 1 and can be overridden by keyword. Bounds above 1 are returned as
computed and flagged vacuous, never clamped.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from .errors import FormatError, InfeasibleParams, NonIntegralLog

E_THIRD = math.exp(-1 / 3)


def _check_prob(p: float) -> None:
    if not 0 < p < 1:
        raise ValueError(f"p={p} must lie strictly between 0 and 1")


def exact_log2(value: float, what: str) -> int:
    lg = math.log2(value)
    if value < 1 or lg != int(lg):
        raise NonIntegralLog(f"{what}={value} is not a power of two")
    return int(lg)


def vacuous(bound: float) -> bool:
    return bound > 1


def switching_bound(w: int, t: int, p: float, delta: float, M: int = 1) -> float:
    """Probability that some of ``M`` width-``w`` DNFs keeps tree depth at least ``t``."""
    _check_prob(p)
    return M * (2 ** (w + t + 1) * (5 * p * w) ** t + delta)


def ac0_error(n: int, S: int, ell: int, p: float, delta: float, sigma: float) -> float:
    """Error of one depth-reduction level: collapse failures over ``n*S`` gates plus the seed fallback."""
    _check_prob(p)
    lg = exact_log2(ell, "ell")
    collapse = 2 ** (2 * lg + 1) * (5 * p * lg) ** lg + delta
    return n * S * collapse + math.exp(-sigma / (2 * math.log2(1 / p)))


def ac0_total_error(d: int, n: int, S: int, ell: int, p: float, delta: float, sigma: float) -> float:
    return d * ac0_error(n, S, ell, p, delta, sigma)


def star_fallback_bound(sigma: float, p_log_inv: int) -> float:
    return math.exp(-sigma / (2 * p_log_inv))


def chernoff_bound(sigma: float) -> float:
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    return math.exp(-math.floor(sigma / 2))


def chernoff_precond(sigma: float, eps: float, mu: float) -> bool:
    return sigma <= eps * eps * mu * E_THIRD


def tx_sigma(t: int, w: int, S: int, delta: float, p: float, const: float = 1.0) -> int:
    """Independence needed by the pseudorandom switching lemma, modeled as ``const*(log(M/eps))^2``."""
    _check_prob(p)
    if min(t, w, S) < 1 or delta <= 0:
        raise ValueError("t, w, S and delta must be positive")
    M = S * 2 ** (w * (math.log2(1 / p) + 1))
    eps = delta * 2 ** (-(t + 1) * (2 * w + math.log2(S)))
    return math.ceil(const * math.log2(M / eps) ** 2)


def ss_error_bound(sigma: float) -> float:
    return math.exp(-sigma / 2 + 1)


# ------------------------------------------------------------------ reports

@dataclass
class BoundReport:
    kind: str
    inputs: dict
    values: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())

    @property
    def violations(self) -> list[str]:
        return [name for name, ok in self.verdicts.items() if not ok]

    def to_json(self) -> dict:
        out = asdict(self)
        out["ok"] = self.ok
        out["violations"] = self.violations
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "BoundReport":
        try:
            return cls(obj["kind"], obj["inputs"], obj.get("values", {}), obj.get("verdicts", {}),
                       obj.get("flags", {}))
        except KeyError as exc:
            raise FormatError(f"bound report: missing field {exc}") from exc

    def raise_if_infeasible(self) -> None:
        if not self.ok:
            raise InfeasibleParams(self.violations[0], json.dumps(self.values))


def ss_checks(*, k: int, sigma: int, m: int, q: int, ell: int, tau: int, n_L: int, n_Z: int, n_R: int,
              theta_L: int, theta_Z: int, theta_R: int, seed_len: int | None = None,
              c_rate: float = 1.0, c_lemma: float = 1.0) -> dict:
    """Inequalities for the split-state reduction, grouped by where they come from.

    ``per_encoding`` holds the threshold conditions for each encoding that the
    simulator relies on; ``common_ratio`` restates them with one secrecy
    ratio; ``chernoff`` says whether the tail bounds behind the bad events
    apply at this ``sigma``.
    """
    mq = m * q
    c_sec = min(theta_L / n_L, theta_Z / n_Z, theta_R / n_R)
    n = n_Z + tau + n_R
    tau_need = 9 * ell * (n_R + n_Z + mq) * n_L / (4 * theta_L) if theta_L else math.inf
    proof = {
        "ell*m*q <= theta_Z": ell * mq <= theta_Z,
        "ell*m*q <= theta_L": ell * mq <= theta_L,
        "ell*(n_L+n_Z+m*q) <= theta_R": ell * (n_L + n_Z + mq) <= theta_R,
        "tau >= 9*ell*(n_R+n_Z+m*q)*n_L/(4*theta_L)": tau >= tau_need,
        "3*n_L <= 2*tau": 3 * n_L <= 2 * tau,
    }
    figure = {
        "ell > 1/c_sec": c_sec > 0 and ell > 1 / c_sec,
        "n_Z >= m*q*ell/c_sec": c_sec > 0 and n_Z >= mq * ell / c_sec,
        "n_L >= k*c_rate": n_L >= k * c_rate,
        "n_R >= (ell/c_sec)*(n_L+n_Z+m*q)": c_sec > 0 and n_R >= ell / c_sec * (n_L + n_Z + mq),
        "tau >= (9*ell/(4*c_sec))*(n_R+n_Z+m*q)": c_sec > 0 and tau >= 9 * ell / (4 * c_sec) * (n_R + n_Z + mq),
        "m*q*ell^3 <= c*n": mq * ell ** 3 <= c_lemma * n,
    }
    if seed_len is not None:
        figure["n_Z >= s*c_rate"] = n_Z >= seed_len * c_rate
    chernoff = {
        "survivor count tail applies": chernoff_precond(sigma, 0.5, 1.5 * n_L),
        "overlap tail applies": chernoff_precond(sigma, 0.5, 2 * theta_L / 3),
    }
    values = {"n": n, "p": 3 * n_L / (2 * tau), "c_sec": c_sec, "rate": k / n, "rate_total": 2 * k / n,
              "tau_needed": tau_need, "error_bound": ss_error_bound(sigma)}
    return {"per_encoding": proof, "common_ratio": figure, "chernoff": chernoff, "values": values}


def ss_feasibility(inputs: dict) -> BoundReport:
    """Verdicts for split-state parameters.

    Missing thresholds default to ``n_X - 1`` (the repetition-code value);
    ``seed_len`` is optional.
    """
    need = ["k", "sigma", "m", "q", "ell", "tau", "n_L", "n_Z", "n_R"]
    missing = [key for key in need if key not in inputs]
    if missing:
        raise FormatError(f"ss parameters: missing {', '.join(missing)}")
    args = {key: inputs[key] for key in need}
    for side in ("L", "Z", "R"):
        args[f"theta_{side}"] = inputs.get(f"theta_{side}", inputs[f"n_{side}"] - 1)
    extra = {key: inputs[key] for key in ("seed_len", "c_rate", "c_lemma") if key in inputs}
    checks = ss_checks(**args, **extra)
    verdicts = {f"per-encoding: {k}": v for k, v in checks["per_encoding"].items()}
    flags = {**{f"common-ratio: {k}": v for k, v in checks["common_ratio"].items()},
             **{f"chernoff: {k}": v for k, v in checks["chernoff"].items()},
             "error_bound_vacuous": vacuous(checks["values"]["error_bound"])}
    return BoundReport("ss", dict(inputs), checks["values"], verdicts, flags)


def star_feasibility(k: int, n: int, p_log_inv: int, sigma: int, m: int) -> BoundReport:
    p = 2.0 ** -p_log_inv
    verdicts = {
        "4*sigma/log(1/p) <= k": 4 * sigma / p_log_inv <= k,
        "k <= (n-m)*p/2": k <= (n - m) * p / 2,
        "k <= n - m": k <= n - m,
    }
    bound = star_fallback_bound(sigma, p_log_inv)
    return BoundReport("star", {"k": k, "n": n, "p_log_inv": p_log_inv, "sigma": sigma, "m": m},
                       {"p": p, "fallback_bound": bound, "rate": k / n}, verdicts,
                       {"fallback_bound_vacuous": vacuous(bound)})


def chain_feasibility(d: int, k: int, n: int, p: float, m: int) -> BoundReport:
    verdicts = {"2m <= k": 2 * m <= k, "k <= n*(p/4)^d": k <= n * (p / 4) ** d}
    return BoundReport("chain", {"d": d, "k": k, "n": n, "p": p, "m": m},
                       {"n_target": k * (4 / p) ** d}, verdicts)


def switching_report(w: int, t: int, p: float, delta: float, M: int = 1) -> BoundReport:
    value = switching_bound(w, t, p, delta, M)
    return BoundReport("switching", {"w": w, "t": t, "p": p, "delta": delta, "M": M},
                       {"bound": value}, {}, {"vacuous": vacuous(value)})


def evaluate(spec: dict) -> BoundReport:
    """Evaluate a parameter file: a ``kind`` plus that formula's inputs."""
    kind = spec.get("kind")
    args = {key: val for key, val in spec.items() if key != "kind"}
    try:
        if kind == "switching":
            return switching_report(**args)
        if kind == "ac0":
            d = args.pop("d", 1)
            one = ac0_error(**args)
            total = d * one
            return BoundReport("ac0", dict(spec), {"per_level": one, "total": total}, {},
                               {"vacuous": vacuous(total)})
        if kind == "chernoff":
            value = chernoff_bound(args["sigma"])
            verdicts = {}
            if "eps" in args and "mu" in args:
                verdicts["sigma <= eps^2*mu*e^(-1/3)"] = chernoff_precond(args["sigma"], args["eps"], args["mu"])
            return BoundReport("chernoff", dict(spec), {"bound": value}, verdicts, {"vacuous": vacuous(value)})
        if kind == "tx_sigma":
            return BoundReport("tx_sigma", dict(spec), {"sigma": tx_sigma(**args)})
        if kind == "ss":
            return ss_feasibility(args)
        if kind == "star":
            return star_feasibility(**args)
        if kind == "chain":
            return chain_feasibility(**args)
    except TypeError as exc:
        raise FormatError(f"{kind} parameters: {exc}") from exc
    raise FormatError(f"unknown parameter kind {kind!r}")
