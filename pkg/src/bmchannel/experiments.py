"""Experiment suites behind the command-line tool.

Every suite takes an :class:`ExperimentConfig` and returns a
:class:`ResultTable`: a fixed column schema, one dict per row, and boolean
assertion columns.  Suites are deterministic functions of the config, and
the worker count never changes a value.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from . import capacity as cap
from .channels import POLICY_CATALOG, EmVariant, FeedbackPolicy, Message, is_exactly_solvable
from .errors import InvalidArgument, UnsupportedScenario
from .estimation import bpsk_mmse, mmse_from_samples
from .information import (
    bpsk_mi,
    converse_bound,
    directed_info_grid,
    i_mmse_check,
    mac_ou_mi_table,
    mi_duncan,
    mi_grid_density,
)
from .stochastic import RngStream, make_grid

ALL_VARIANTS = tuple(v.value for v in EmVariant)


@dataclass
class ExperimentConfig:
    """Parameters shared by all suites; unset fields keep these defaults."""

    scenario: str = "binary"
    policy: str = "message"
    alphabet: int = 2
    T: float = 1.0
    grid_sizes: list = field(default_factory=lambda: [4, 8, 16, 32, 64, 128, 256])
    variants: list = field(default_factory=lambda: list(ALL_VARIANTS))
    variant: str = "sampled_exact"
    method: str = "both"
    c: float = 1.0
    kappa: float = 0.5
    bound: float = 1.0
    freq: float = 1.0
    a: float = 10.0
    a2: float | None = None
    a_list: list = field(default_factory=lambda: [5.0, 50.0, 500.0])
    P: float = 1.0
    P1: float = 1.0
    P2: float = 1.0
    snr_list: list = field(default_factory=lambda: [0.5, 1.0, 2.0, 4.0, 8.0])
    h: float = 1e-3
    n: int = 256
    deltas: list = field(default_factory=lambda: [1e-2, 1e-3, 1e-4])
    steps: int = 10000
    trials: int = 20000
    seed: int = 42
    workers: int | None = None
    out: str | None = None

    def validate(self):
        if self.trials < 100:
            raise InvalidArgument("trials must be at least 100")
        if list(self.grid_sizes) != sorted(set(self.grid_sizes)) or min(self.grid_sizes) < 1:
            raise InvalidArgument("grid sizes must be positive and strictly increasing")
        if not self.T > 0:
            raise InvalidArgument("T must be positive")
        if self.alphabet < 1:
            raise InvalidArgument("alphabet size must be >= 1")
        for v in self.variants:
            EmVariant.parse(v)
        return self

    def build_policy(self) -> FeedbackPolicy:
        """Instantiate the catalog policy named by ``policy``."""
        name = self.policy
        if name not in POLICY_CATALOG:
            raise InvalidArgument(f"unknown policy {name!r}; choose from {sorted(POLICY_CATALOG)}")
        if name == "zero":
            return POLICY_CATALOG[name]()
        if name in ("constant", "message"):
            return POLICY_CATALOG[name](self.c)
        if name == "ramp":
            return POLICY_CATALOG[name](self.c, self.T)
        if name == "linear":
            return POLICY_CATALOG[name](self.kappa, self.c)
        if name in ("clamped", "modulated"):
            return POLICY_CATALOG[name](self.c, self.kappa, self.bound)
        return POLICY_CATALOG[name](self.c, self.kappa, self.bound, self.freq)

    def message(self) -> Message:
        return Message(self.alphabet)

    def rng(self, stream: int = 0) -> RngStream:
        return RngStream(self.seed, stream)


FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


def coerce(key: str, text):
    """Convert a config-file or flag string to the field's type."""
    if key not in FIELD_TYPES:
        raise InvalidArgument(f"unknown config key {key!r}")
    if not isinstance(text, str):
        return text
    kind = str(FIELD_TYPES[key])
    text = text.strip()
    if text.lower() == "none" and "None" in kind:
        return None
    try:
        if kind == "list":
            parts = [p for p in text.replace(" ", ",").split(",") if p]
            if key == "grid_sizes":
                return [int(p) for p in parts]
            if key == "variants":
                return parts
            return [float(p) for p in parts]
        if kind.startswith("int"):
            return int(text)
        if kind.startswith("float"):
            return float(text)
    except ValueError:
        raise InvalidArgument(f"bad value for {key}: {text!r}") from None
    return text


def read_config_file(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidArgument(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            out[key] = coerce(key, value)
    return out


def make_config(file_values=None, overrides=None) -> ExperimentConfig:
    """Defaults, then the config file, then explicit flags (flags win)."""
    values = {}
    values.update(file_values or {})
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    for k in list(values):
        values[k] = coerce(k, values[k])
    return ExperimentConfig(**values).validate()


@dataclass
class ResultTable:
    """Rows with a fixed schema; ``checks`` names the boolean assertion columns."""

    experiment: str
    columns: list
    rows: list
    checks: list = field(default_factory=list)
    nats: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        for row in self.rows:
            for c in self.checks:
                if row.get(c) is False:
                    return False
        return True

    def failures(self):
        return [(i, c) for i, row in enumerate(self.rows) for c in self.checks if row.get(c) is False]


def _paired_ok(prev, cur, k):
    return cur.value >= prev.value - k * math.hypot(prev.stderr, cur.stderr)


def _stable(prev, cur, k=3.0):
    return abs(cur.value - prev.value) <= k * math.hypot(prev.stderr, cur.stderr)


def effective_power(policy: FeedbackPolicy):
    """Almost-sure power bound ``peak^2`` of a policy, or ``None`` when the drift is unbounded."""
    return None if policy.peak is None else policy.peak**2


def _converse_ok(est, policy, T):
    P = effective_power(policy)
    if P is None:
        return None
    return est.value <= converse_bound(P, T) + 2.0 * est.stderr


def _oracle_mi(cfg, policy):
    if cfg.policy == "message" and cfg.alphabet == 2:
        return bpsk_mi(cfg.c**2 * cfg.T)
    if cfg.policy == "ramp" and cfg.alphabet == 2:
        return bpsk_mi(cfg.c**2 * cfg.T / 3.0)
    if cfg.alphabet == 1 or cfg.policy in ("zero", "constant"):
        return 0.0
    return None


def _dyadic_levels(sizes):
    levels = []
    for n in sizes:
        lv = int(round(math.log2(n)))
        if 2**lv != n:
            raise InvalidArgument(f"nested sampling needs power-of-two grid sizes, got {n}")
        levels.append(lv)
    return levels


def converge_sampling(cfg: ExperimentConfig) -> ResultTable:
    """Sampled-channel MI on nested dyadic grids driven by one Brownian path per trial."""
    policy = cfg.build_policy()
    if not is_exactly_solvable(policy):
        raise UnsupportedScenario(
            f"policy {cfg.policy!r} has no closed-form sampled law; the sampling suite needs the "
            "exactly solvable class (zero, constant, message, ramp, linear); use 'converge approx' instead")
    msg = cfg.message()
    oracle = _oracle_mi(cfg, policy)
    rows, prev = [], None
    for n, lv in zip(cfg.grid_sizes, _dyadic_levels(cfg.grid_sizes)):
        grid = make_grid(cfg.T, kind="dyadic", level=lv)
        est = mi_grid_density(msg, policy, grid, "sampled_exact", cfg.trials, cfg.rng(0), cfg.workers)
        rows.append({
            "n": n, "delta": grid.max_step, "mi": est.value, "stderr": est.stderr, "trials": cfg.trials,
            "seed": cfg.seed, "oracle": oracle,
            "nondecreasing": True if prev is None else _paired_ok(prev, est, 2.0),
            "stabilized": None,
            "converse_ok": _converse_ok(est, policy, cfg.T),
        })
        last_prev, prev = prev, est
    if last_prev is not None:
        rows[-1]["stabilized"] = _stable(last_prev, prev)
    if oracle is not None:
        rows[-1]["oracle_ok"] = abs(prev.value - oracle) <= 3.0 * prev.stderr
    for r in rows:
        r.setdefault("oracle_ok", None)
    cols = ["n", "delta", "mi", "stderr", "trials", "seed", "oracle", "nondecreasing", "stabilized",
            "converse_ok", "oracle_ok"]
    return ResultTable("converge_sampling", cols, rows,
                       ["nondecreasing", "stabilized", "converse_ok", "oracle_ok"], ["mi", "stderr", "oracle"])


def converge_approx(cfg: ExperimentConfig) -> ResultTable:
    """MI of every Euler-Maruyama variant across refinements, plus the no-feedback collapse check."""
    policy = cfg.build_policy()
    msg = cfg.message()
    levels = _dyadic_levels(cfg.grid_sizes)
    collapse = (is_exactly_solvable(policy) and not policy.uses_feedback and policy.kind == "linear")
    rows = []
    sampled = {}
    if is_exactly_solvable(policy):
        for n, lv in zip(cfg.grid_sizes, levels):
            grid = make_grid(cfg.T, kind="dyadic", level=lv)
            sampled[n] = mi_grid_density(msg, policy, grid, "sampled_exact", cfg.trials, cfg.rng(0), cfg.workers)
    for variant in ["sampled_exact"] * bool(sampled) + list(cfg.variants):
        prev = None
        for n, lv in zip(cfg.grid_sizes, levels):
            grid = make_grid(cfg.T, kind="dyadic", level=lv)
            if variant == "sampled_exact":
                est = sampled[n]
            else:
                est = mi_grid_density(msg, policy, grid, EmVariant.parse(variant), cfg.trials, cfg.rng(0),
                                      cfg.workers)
            row = {
                "variant": EmVariant.parse(variant).value if variant != "sampled_exact" else variant,
                "n": n, "delta": grid.max_step, "mi": est.value, "stderr": est.stderr, "trials": cfg.trials,
                "seed": cfg.seed, "stabilized": None,
                "converse_ok": _converse_ok(est, policy, cfg.T),
                "collapse_ok": None,
            }
            if collapse and variant != "sampled_exact":
                row["collapse_ok"] = bool(np.array_equal(est.samples, sampled[n].samples))
            rows.append(row)
            if prev is not None and n == cfg.grid_sizes[-1]:
                row["stabilized"] = _stable(prev, est)
            prev = est
    cols = ["variant", "n", "delta", "mi", "stderr", "trials", "seed", "stabilized", "converse_ok", "collapse_ok"]
    return ResultTable("converge_approx", cols, rows, ["stabilized", "converse_ok", "collapse_ok"], ["mi", "stderr"])


def converge_mmse(cfg: ExperimentConfig) -> ResultTable:
    """Causal and smoothed MMSE integrals across refinements, with the Duncan cross-check."""
    policy = cfg.build_policy()
    msg = cfg.message()
    levels = _dyadic_levels(cfg.grid_sizes)
    variant = "sampled_exact" if is_exactly_solvable(policy) else EmVariant.parse(cfg.variants[0])
    oracle_s = None
    if cfg.policy == "message" and cfg.alphabet == 2:
        oracle_s = cfg.T * cfg.c**2 * bpsk_mmse(cfg.c**2 * cfg.T)
    elif cfg.alphabet == 1:
        oracle_s = 0.0
    oracle_mi = _oracle_mi(cfg, policy)
    rows, prev = [], None
    for n, lv in zip(cfg.grid_sizes, levels):
        grid = make_grid(cfg.T, kind="dyadic", level=lv)
        curve = mmse_from_samples(msg, policy, grid, trials=cfg.trials, rng=cfg.rng(1), variant=variant,
                                  workers=cfg.workers)
        duncan = mi_duncan(curve.causal_integral)
        diff = curve.samples["causal_integral"] - curve.samples["smoothed_integral"]
        diff_se = float(np.std(diff, ddof=1) / math.sqrt(diff.size))
        row = {
            "n": n, "delta": grid.max_step,
            "causal_mmse": curve.causal_integral, "causal_stderr": curve.causal_integral_se,
            "smoothed_mmse": curve.smoothed_integral, "smoothed_stderr": curve.smoothed_integral_se,
            "duncan_mi": duncan, "duncan_stderr": 0.5 * curve.causal_integral_se,
            "trials": cfg.trials, "seed": cfg.seed, "oracle_smoothed": oracle_s,
            "smoothed_nonincreasing": True if prev is None else (
                curve.smoothed_integral <= prev.smoothed_integral
                + 2.0 * math.hypot(curve.smoothed_integral_se, prev.smoothed_integral_se)),
            "causal_ge_smoothed": bool(np.mean(diff) >= -2.0 * diff_se),
            "oracle_ok": None, "duncan_ok": None,
        }
        rows.append(row)
        prev = curve
    if oracle_s is not None:
        rows[-1]["oracle_ok"] = abs(prev.smoothed_integral - oracle_s) <= 3.0 * prev.smoothed_integral_se + 1e-15
    if oracle_mi is not None:
        rows[-1]["duncan_ok"] = abs(rows[-1]["duncan_mi"] - oracle_mi) <= 3.0 * rows[-1]["duncan_stderr"] + 1e-15
    cols = ["n", "delta", "causal_mmse", "causal_stderr", "smoothed_mmse", "smoothed_stderr", "duncan_mi",
            "duncan_stderr", "trials", "seed", "oracle_smoothed", "smoothed_nonincreasing", "causal_ge_smoothed",
            "oracle_ok", "duncan_ok"]
    return ResultTable("converge_mmse", cols, rows,
                       ["smoothed_nonincreasing", "causal_ge_smoothed", "oracle_ok", "duncan_ok"],
                       ["duncan_mi", "duncan_stderr"])


def mi_estimate(cfg: ExperimentConfig) -> ResultTable:
    """One grid-density and/or directed-information estimate at ``n`` steps."""
    policy = cfg.build_policy()
    msg = cfg.message()
    grid = make_grid(cfg.T, cfg.n)
    variant = cfg.variant if cfg.variant == "sampled_exact" else EmVariant.parse(cfg.variant)
    methods = {"both": ["grid_density", "directed"], "grid_density": ["grid_density"],
               "directed": ["directed"]}.get(cfg.method)
    if methods is None:
        raise InvalidArgument(f"unknown method {cfg.method!r}")
    ests = {}
    for m in methods:
        if m == "grid_density":
            ests[m] = mi_grid_density(msg, policy, grid, variant, cfg.trials, cfg.rng(0), cfg.workers)
        else:
            ests[m] = directed_info_grid(msg, policy, grid, cfg.trials, cfg.rng(0), variant, cfg.workers)
    rows = []
    for m, est in ests.items():
        row = {"method": m, "variant": getattr(variant, "value", variant), "n": grid.n, "mi": est.value,
               "stderr": est.stderr, "trials": cfg.trials, "seed": cfg.seed,
               "converse_ok": _converse_ok(est, policy, cfg.T), "identity_ok": None}
        rows.append(row)
    if len(ests) == 2:
        rows[-1]["identity_ok"] = ests["grid_density"].within(ests["directed"])
    cols = ["method", "variant", "n", "mi", "stderr", "trials", "seed", "converse_ok", "identity_ok"]
    return ResultTable("mi_estimate", cols, rows, ["converse_ok", "identity_ok"], ["mi", "stderr"])


def mac_demo(cfg: ExperimentConfig) -> ResultTable:
    """Information rates of the two-user OU MAC over a sweep of mean-reversion rates."""
    if cfg.a2 is not None and cfg.a2 != cfg.a:
        raise UnsupportedScenario("users with different mean-reversion rates are outside the closed-form class")
    rows, prev = [], None
    for a in cfg.a_list:
        t = mac_ou_mi_table(a, cfg.P1, cfg.P2, cfg.T)
        row = t.as_row()
        row["gap_decreasing"] = True if prev is None else t.gap1 < prev.gap1
        rows.append(row)
        prev = t
    cols = ["a", "P1", "P2", "T", "joint", "conditional1", "conditional2", "marginal1", "marginal2", "gap1",
            "gap2", "gap_decreasing"]
    return ResultTable("mac_demo", cols, rows, ["gap_decreasing"],
                       ["joint", "conditional1", "conditional2", "marginal1", "marginal2", "gap1", "gap2"])


def bc_demo(cfg: ExperimentConfig) -> ResultTable:
    """I-MMSE table over an SNR sweep for an OU or binary input."""
    if cfg.scenario == "binary":
        scenario = ("binary", cfg.c)
    else:
        scenario = ("ou", cfg.a, cfg.P)
    table = i_mmse_check(scenario, cfg.snr_list, cfg.T, cfg.h)
    rows = []
    for i, r in enumerate(table.rows):
        row = dict(r)
        row["scenario"] = scenario[0]
        row["decreasing"] = True if i == 0 else r["I_T_over_snr"] < table.rows[i - 1]["I_T_over_snr"]
        row["slope_ok"] = (None if table.slope_ok is None
                           else abs(r["dI_dsnr"] - r["half_smoothed"]) <= table.tolerance)
        rows.append(row)
    cols = ["scenario", "snr", "I_T", "I_T_over_snr", "dI_dsnr", "half_smoothed", "decreasing", "slope_ok"]
    return ResultTable("bc_demo", cols, rows, ["decreasing", "slope_ok"],
                       ["I_T", "I_T_over_snr", "dI_dsnr", "half_smoothed"])


def sk_series(cfg: ExperimentConfig) -> ResultTable:
    """Per-time feedback rate over a sweep of round lengths."""
    rep = cap.sk_bc_report(cfg.P)
    rows, prev = [], None
    for d in sorted(cfg.deltas, reverse=True):
        rate = cap.sk_rate_series(cfg.P, d, cfg.steps, rep.rho_star)
        rows.append({"P": cfg.P, "delta": d, "steps": cfg.steps, "rate": rate, "limit": rep.per_user_rate,
                     "gap": rep.per_user_rate - rate,
                     "below_limit": rate < rep.per_user_rate,
                     "approaching": True if prev is None else rate > prev})
        prev = rate
    cols = ["P", "delta", "steps", "rate", "limit", "gap", "below_limit", "approaching"]
    return ResultTable("sk_series", cols, rows, ["below_limit", "approaching"], ["rate", "limit", "gap"])


def capacity_query(kind: str, power=None, powers=None, snr=None, bandwidth=None, n1=None, n2=None,
                   feedback=False) -> ResultTable:
    """Closed-form capacity answers; no randomness."""
    if kind == "point":
        if power is None:
            raise InvalidArgument("capacity point needs --power")
        rows = [{"quantity": "infinite_bandwidth", "value": cap.infinite_bandwidth_capacity(power)}]
        if bandwidth is not None:
            rows.append({"quantity": "bandlimited", "value": cap.bandlimited_capacity(power, bandwidth)})
        return ResultTable("capacity_point", ["quantity", "value"], rows, [], ["value"])
    if kind in ("mac", "bc", "bc-degraded"):
        if kind == "mac":
            if not powers:
                raise InvalidArgument("capacity mac needs --powers")
            region = cap.mac_region(powers)
        elif kind == "bc":
            if power is None or not snr:
                raise InvalidArgument("capacity bc needs --power and --snr")
            region = cap.bc_region(power, snr)
        else:
            if power is None or n1 is None or n2 is None:
                raise InvalidArgument("capacity bc-degraded needs --power, --n1 and --n2")
            region = cap.degraded_bc_feedback_region(power, n1, n2, feedback=feedback)
        rows = []
        for text, (coef, bound) in zip(region.describe(), region.constraints):
            rows.append({"kind": "constraint", "expression": text, "bound": bound})
        for corner in region.corners():
            rows.append({"kind": "corner", "expression": "(" + " ".join(f"{v:.17g}" for v in corner) + ")",
                         "bound": None})
        return ResultTable(f"capacity_{kind}", ["kind", "expression", "bound"], rows, [], ["bound"])
    if kind == "sk-gain":
        if power is None:
            raise InvalidArgument("capacity sk-gain needs --power")
        rep = cap.sk_bc_report(power)
        row = {"P": rep.P, "rho_star": rep.rho_star, "per_user_rate": rep.per_user_rate, "sum_rate": rep.sum_rate,
               "no_feedback_sum": rep.no_feedback_sum, "gain": rep.gain, "residual": rep.residual,
               "feedback_gain_ok": rep.sum_rate > rep.no_feedback_sum}
        cols = list(row)
        return ResultTable("capacity_sk_gain", cols, [row], ["feedback_gain_ok"],
                           ["per_user_rate", "sum_rate", "no_feedback_sum"])
    raise InvalidArgument(f"unknown capacity query {kind!r}")


SUITES = {
    "sampling": converge_sampling,
    "approx": converge_approx,
    "mmse": converge_mmse,
}
