"""Experiment runner: config parsing, scenario dispatch, and report output.

A config is a TOML document (or the equivalent dict)::

    scenario = "unicity"          # ber | info_gain | unicity | attack_sweep | dsr | additive_baseline
    seed = 0
    trials = 100000               # primary Monte-Carlo count of the scenario

    [channel]
    M = 4096
    N = 40000
    eta = 0.1                     # or eta_factors = [...]; or sigma = ...; or alpha = ...
    dsr = false
    dsr_sigma_zero = false

    [key]
    L = 4400                      # hex = "..." and taps = [...] are optional

    [message]
    source = "random"             # random | zeros | file (path = "...")

Scenario-specific tables (``[info_gain]``, ``[attack]``, ``[dsr]``,
``[additive]``) are documented in the README.  Reports carry a metric table
with columns ``parameter, estimate, analytic, stderr``; the CSV form is
exactly that table and contains nothing run-dependent besides the numbers.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
import os
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, attack, infotheory, kernels, rng as rngmod
from .channel import ChannelParams, RegimeWarning, compose_eta
from .errors import AlphaEtaError, ConfigError
from .keystream import PRIMITIVE_TAPS, SecretKey, default_taps, new_generator, validate_taps
from .protocol import additive_stream, bytes_to_bits

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCHEMA_VERSION = 1
SCENARIOS = ("ber", "info_gain", "unicity", "attack_sweep", "dsr", "additive_baseline")
OUTPUT_DIR_ENV = "ALPHAETA_OUTPUT_DIR"
DEFAULT_SEED = 0


@dataclass
class ExperimentConfig:
    scenario: str
    channel: ChannelParams
    L: int
    taps: tuple[int, ...] | None = None
    key: SecretKey | None = None
    message: dict = field(default_factory=lambda: {"source": "random"})
    trials: int = 1000
    seed: int = DEFAULT_SEED
    output_path: str | None = None
    output_format: str = "json"
    sections: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


# -- parsing -------------------------------------------------------------------------

def _need(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"{where}.{key} is required")
    return d[key]


def parse_channel(d: dict, where: str = "channel") -> ChannelParams:
    if not isinstance(d, dict):
        raise ConfigError(f"[{where}] must be a table")
    M = _need(d, "M", where)
    kw = dict(dsr_enabled=bool(d.get("dsr", False)),
              dsr_sigma_zero=bool(d.get("dsr_sigma_zero", False)))
    try:
        if "sigma" in d:
            return ChannelParams.from_sigma(M, float(d["sigma"]), **kw)
        if "alpha" in d:
            return ChannelParams.from_alpha(M, float(d["alpha"]), **kw)
        if "eta_factors" in d:
            if "eta" in d:
                raise ConfigError(f"{where}: give eta or eta_factors, not both")
            eta = compose_eta(d["eta_factors"])
        else:
            eta = float(d.get("eta", 1.0))
        return ChannelParams(M=M, N=float(_need(d, "N", where)), eta=eta, **kw)
    except ConfigError:
        raise
    except (AlphaEtaError, TypeError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from None


def parse_config(d: dict) -> ExperimentConfig:
    """Validate a config mapping and build an :class:`ExperimentConfig`."""
    if not isinstance(d, dict):
        raise ConfigError("config must be a table")
    scenario = _need(d, "scenario", "config")
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; expected one of {', '.join(SCENARIOS)}")
    if scenario == "additive_baseline" and "channel" not in d:
        channel = ChannelParams(M=4, N=1.0)
    else:
        channel = parse_channel(_need(d, "channel", "config"))

    kd = d.get("key", {})
    key = None
    L = kd.get("L")
    try:
        if "hex" in kd:
            key = SecretKey.from_hex(kd["hex"], L)
            L = key.L
        if L is None:
            L = 16
        L = int(L)
        if L < 1:
            raise ConfigError("key.L must be >= 1")
        taps = tuple(kd["taps"]) if "taps" in kd else None
        if taps is not None:
            validate_taps(taps, L)
        if key is not None:
            new_generator(key, taps)
    except ConfigError:
        raise
    except AlphaEtaError as e:
        raise ConfigError(f"key: {e}") from None

    msg = dict(d.get("message", {"source": "random"}))
    if msg.setdefault("source", "random") not in ("random", "zeros", "file"):
        raise ConfigError(f"message.source must be random, zeros or file, got {msg['source']!r}")
    if msg["source"] == "file" and "path" not in msg:
        raise ConfigError("message.path is required for source = 'file'")

    trials = int(d.get("trials", 1000))
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    out = d.get("output", {})
    fmt = out.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ConfigError(f"output.format must be json or csv, got {fmt!r}")

    sections = {k: v for k, v in d.items() if k in ("info_gain", "attack", "dsr", "additive")}
    if scenario == "attack_sweep":
        g = sections.get("attack", {}).get("g", [6, 8, 10, 12])
        if any(int(x) < 2 or int(x) > 16 for x in np.atleast_1d(g)):
            raise ConfigError("attack.g values must be in 2..16 for exhaustive ranking")
    if scenario == "additive_baseline":
        La = int(sections.get("additive", {}).get("L", 12))
        if not 2 <= La <= 16:
            raise ConfigError("additive.L must be in 2..16")

    return ExperimentConfig(
        scenario=scenario, channel=channel, L=L, taps=taps, key=key, message=msg,
        trials=trials, seed=int(d.get("seed", DEFAULT_SEED)),
        output_path=out.get("path"), output_format=fmt, sections=sections, raw=d,
    )


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            d = tomllib.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    return parse_config(d)


# -- reports -------------------------------------------------------------------------

@dataclass
class Metric:
    parameter: str
    estimate: float
    analytic: float | None = None
    stderr: float | None = None


@dataclass
class ExperimentReport:
    scenario: str
    config: dict
    metrics: list[Metric]
    details: dict
    warnings: list[str]
    provenance: dict
    trajectories: list[tuple] = field(default_factory=list)

    def metric(self, name: str) -> Metric:
        for m in self.metrics:
            if m.parameter == name:
                return m
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "scenario": self.scenario,
            "config": self.config,
            "metrics": [m.__dict__ for m in self.metrics],
            "details": self.details,
            "warnings": self.warnings,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["parameter", "estimate", "analytic", "stderr"])
        for m in self.metrics:
            w.writerow([m.parameter, _fmt(m.estimate), _fmt(m.analytic), _fmt(m.stderr)])
        return buf.getvalue()

    def trajectories_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["g", "trial", "n", "entropy_bits"])
        for row in self.trajectories:
            w.writerow([row[0], row[1], row[2], _fmt(row[3])])
        return buf.getvalue()


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return "inf" if math.isinf(x) else repr(x)


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (float, np.floating)):
        o = float(o)
        return o if math.isfinite(o) else None
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, SecretKey):
        return o.to_hex()
    return o


# -- scenarios -----------------------------------------------------------------------

def _key_for(cfg: ExperimentConfig):
    """Key and taps for keystream-driven scenarios.

    Without explicit taps, lengths lacking a default primitive polynomial
    fall back to a 16-bit register.
    """
    if cfg.key is not None:
        return cfg.key, cfg.taps
    L = cfg.L if cfg.taps is not None or cfg.L in PRIMITIVE_TAPS else 16
    return SecretKey.random(L, rngmod.stream(cfg.seed, "key")), cfg.taps if L == cfg.L else None


def _message_bits(cfg: ExperimentConfig, n: int) -> np.ndarray:
    src = cfg.message["source"]
    if src == "zeros":
        return np.zeros(n, dtype=np.int64)
    if src == "file":
        bits = bytes_to_bits(Path(cfg.message["path"]).read_bytes()).astype(np.int64)
        if bits.size < n:
            bits = np.resize(bits, n)
        return bits[:n]
    return rngmod.stream(cfg.seed, "message").integers(0, 2, size=n)


def _run_unicity(cfg: ExperimentConfig, out: dict):
    p = cfg.channel
    info = infotheory.key_rate_and_unicity(p, cfg.L)
    m = out["metrics"]
    m += [
        Metric("eta", p.eta),
        Metric("sigma", p.sigma),
        Metric("alpha", p.alpha),
        Metric("h0_bits", info.h0),
        Metric("h1_bits", info.h1),
        Metric("gain_per_symbol_bits", info.gain_per_symbol, info.gain_approx),
        Metric("key_gain_per_symbol_U", info.U, info.gain_approx - 1),
        Metric("unicity_n0_symbols", info.n0, cfg.L / (info.gain_approx - 1)
               if info.gain_approx > 1 else math.inf),
        Metric("attack_bound_divisor", info.U),
    ]
    out["details"]["info"] = info.to_dict()
    out["details"]["notes"] = ["U and n0 do not depend on M: sigma scales with M"]
    mc = int(cfg.sections.get("info_gain", {}).get("mc_trials", cfg.trials))
    if mc > 0:
        t0 = time.perf_counter()
        est, se = infotheory.mc_info_gain(p, mc, rngmod.stream(cfg.seed, "eve-noise"))
        m.append(Metric("gain_per_symbol_mc", est, info.gain_per_symbol, se))
        out["details"]["mc_seconds"] = time.perf_counter() - t0


def _run_info_gain(cfg: ExperimentConfig, out: dict):
    sec = cfg.sections.get("info_gain", {})
    chans = [cfg.channel]
    for s in sec.get("sigmas", []):
        chans.append(ChannelParams.from_sigma(cfg.channel.M, float(s)))
    for i, p in enumerate(chans):
        label = f"sigma={p.sigma:.6g}"
        est, se = infotheory.mc_info_gain(p, cfg.trials, rngmod.stream(cfg.seed, "eve-noise", i))
        closed = infotheory.info_gain_closed_form(p)
        out["metrics"].append(Metric(f"gain_mc[{label}]", est, closed, se))
        out["metrics"].append(Metric(f"gain_rel_error[{label}]", abs(est - closed) / closed))
        if not p.in_regime:
            out["warnings"].append(f"{label}: outside M >> sigma >> 1")


def _run_ber(cfg: ExperimentConfig, out: dict):
    p = cfg.channel
    key, taps = _key_for(cfg)
    res = infotheory.ber_curves(p, key, taps, _message_bits(cfg, cfg.trials),
                                rngmod.stream(cfg.seed, "bob-noise"),
                                rngmod.stream(cfg.seed, "eve-noise"))
    out["metrics"] += [
        Metric("bob_ber", res.bob_ber, res.bob_analytic, res.bob_stderr),
        Metric("eve_ber", res.eve_ber, res.eve_analytic, res.eve_stderr),
        Metric("sigma", p.sigma),
    ]
    out["details"]["ber"] = res.to_dict()


def _run_attack_sweep(cfg: ExperimentConfig, out: dict):
    sec = cfg.sections.get("attack", {})
    gs = [int(g) for g in np.atleast_1d(sec.get("g", [6, 8, 10, 12]))]
    known = bool(sec.get("plaintext_known", True))
    reports = []
    for g in gs:
        ac = attack.AttackConfig(
            cfg.channel, g, plaintext_known=known,
            repetition=int(sec.get("repetition", 1)), trials=cfg.trials,
            success_threshold=float(sec.get("success_threshold", 0.99)),
            budget=sec.get("budget"))
        rep = attack.measure_s0(ac, seed=cfg.seed, workers=int(sec.get("workers", 1)))
        reports.append(rep)
        rec = np.array(rep.recovered_s0, dtype=np.float64)
        bound = rep.bound_s0_known_plaintext if known else rep.bound_s0
        se_med = 1.2533 * rec.std(ddof=1) / math.sqrt(rec.size) if rec.size > 1 else None
        sr = rep.success_rate
        out["metrics"] += [
            Metric(f"median_s0[g={g}]", rep.median_s0, bound, se_med),
            Metric(f"min_s0[g={g}]", rec.min() if rec.size else None, bound),
            Metric(f"fraction_below_bound[g={g}]", float((rec < bound).mean()) if rec.size else None, 0.0),
            Metric(f"success_rate[g={g}]", sr, None, math.sqrt(sr * (1 - sr) / cfg.trials)),
            Metric(f"budget[g={g}]", rep.budget),
        ]
        for t, n, h in rep.trajectory_rows():
            out["trajectories"].append((g, t, n, h))
    meds = [r.median_s0 for r in reports]
    if len(gs) >= 2 and all(v is not None for v in meds):
        fit = attack.linear_fit(gs, meds)
        out["metrics"] += [Metric("median_s0_slope", fit.slope,
                                  1 / (reports[0].U + (1 if known else 0))),
                           Metric("median_s0_r_squared", fit.r_squared)]
        out["details"]["fit"] = fit.__dict__
    out["details"]["reports"] = [r.to_dict() for r in reports]


def _run_dsr(cfg: ExperimentConfig, out: dict):
    sec = cfg.sections.get("dsr", {})
    p = cfg.channel
    if not p.dsr_enabled:
        p = ChannelParams(p.M, p.N, p.eta, True, p.dsr_sigma_zero)
    m = out["metrics"]
    key, taps = _key_for(cfg)
    res = infotheory.ber_curves(p, key, taps, _message_bits(cfg, cfg.trials),
                                rngmod.stream(cfg.seed, "bob-noise"),
                                rngmod.stream(cfg.seed, "eve-noise"))
    m.append(Metric("bob_ber_dsr", res.bob_ber, res.bob_analytic, res.bob_stderr))
    m.append(Metric("eve_ber_dsr", res.eve_ber, res.eve_analytic, res.eve_stderr))
    m.append(Metric("noise_sigma", p.noise_sigma))
    out["details"]["ber"] = res.to_dict()

    toy_M = int(sec.get("toy_M", 16))
    toy_sigma = sec.get("toy_sigma")
    toy_kw = dict(dsr_enabled=True, dsr_sigma_zero=toy_sigma is None)
    toy = ChannelParams.from_sigma(toy_M, float(toy_sigma or 1.0), **toy_kw)
    L = int(sec.get("L", 8))
    n = int(sec.get("n_symbols", 2))
    res_mi = int(sec.get("resolution", 4))
    mi = infotheory.exact_key_mutual_info(L, None, toy, n, res_mi)
    m.append(Metric("I_key_observations_bits", mi.alpha_eta, 0.0 if toy.dsr_sigma_zero else None))
    m.append(Metric("I_symbol_observation_bits", infotheory.exact_symbol_mutual_info(toy, res_mi),
                    1.0 if toy.dsr_sigma_zero else None))
    plain = ChannelParams.from_sigma(toy_M, float(toy_sigma or 1.0))
    m.append(Metric("I_key_observations_no_dsr_bits",
                    infotheory.exact_key_mutual_info(L, None, plain, n, res_mi).alpha_eta))

    rep_r = int(sec.get("repetition", 0))
    if rep_r:
        att_sigma = float(sec.get("attack_sigma", toy_sigma or 1.5))
        ap = ChannelParams.from_sigma(toy_M, att_sigma, dsr_enabled=True)
        ac = attack.AttackConfig(ap, int(sec.get("g", 8)), plaintext_known=False,
                                 repetition=rep_r, trials=int(sec.get("attack_trials", 50)),
                                 budget=int(sec.get("budget", 60)))
        rep = attack.measure_s0(ac, seed=cfg.seed)
        ends = np.arange(0, ac.budget + 1, rep_r)
        for nn in ends:
            m.append(Metric(f"key_entropy_bits[n={nn}]", rep.mean_entropy[nn]))
        m.append(Metric("repetition_attack_success_rate", rep.success_rate))
        out["details"]["repetition_attack"] = rep.to_dict()


def _run_additive(cfg: ExperimentConfig, out: dict):
    sec = cfg.sections.get("additive", {})
    L = int(sec.get("L", 12))
    n_bits = int(sec.get("n_bits", L))
    offset = int(sec.get("offset", 0))
    taps = default_taps(L)
    mi = infotheory.additive_key_mutual_info(L, taps, n_bits)
    key = SecretKey.random(L, rngmod.stream(cfg.seed, "key", L))
    total = offset + max(n_bits, L) + 64
    msg = rngmod.stream(cfg.seed, "message", L).integers(0, 2, size=total).astype(np.uint8)
    ct = additive_stream(key, taps, msg)
    got = attack.known_plaintext_attack_additive(ct[offset:offset + L], msg[offset:offset + L],
                                                 taps, L, offset=offset)
    regenerated = additive_stream(got, taps, msg)
    out["metrics"] += [
        Metric("I_key_ciphertext_bits", mi, 0.0),
        Metric("known_plaintext_bits_used", L, L),
        Metric("key_recovered", int(got == key), 1),
        Metric("ciphertext_regenerated", int(np.array_equal(regenerated, ct)), 1),
    ]
    out["details"]["additive"] = {"L": L, "n_bits": n_bits, "offset": offset,
                                  "true_key": key.to_hex(), "recovered_key": got.to_hex()}


_RUNNERS = {
    "unicity": _run_unicity,
    "info_gain": _run_info_gain,
    "ber": _run_ber,
    "attack_sweep": _run_attack_sweep,
    "dsr": _run_dsr,
    "additive_baseline": _run_additive,
}


def run(cfg: ExperimentConfig, write: bool = True) -> ExperimentReport:
    """Execute the configured scenario; optionally write the report to ``output_path``."""
    out = {"metrics": [], "details": {}, "warnings": [], "trajectories": []}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RegimeWarning)
        if cfg.scenario in ("unicity", "info_gain", "ber"):
            cfg.channel.check_regime()
        _RUNNERS[cfg.scenario](cfg, out)
    out["warnings"] += [str(w.message) for w in caught if issubclass(w.category, RegimeWarning)]
    echo = _jsonable(dict(cfg.raw))
    echo["channel_resolved"] = _jsonable(cfg.channel.to_dict())
    report = ExperimentReport(
        scenario=cfg.scenario, config=echo, metrics=out["metrics"], details=out["details"],
        warnings=out["warnings"], trajectories=out["trajectories"],
        provenance={
            "tool": "alphaeta", "version": __version__, "seed": cfg.seed,
            "rng": rngmod.RNG_NAME, "rng_version": rngmod.RNG_VERSION,
            "kernel_backend": kernels.BACKEND,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        },
    )
    if write:
        path = resolve_output_path(cfg)
        if path is not None:
            write_report(report, path, cfg.output_format)
    return report


def resolve_output_path(cfg: ExperimentConfig) -> Path | None:
    if cfg.output_path:
        return Path(cfg.output_path)
    env = os.environ.get(OUTPUT_DIR_ENV)
    if env:
        return Path(env) / f"{cfg.scenario}-seed{cfg.seed}.{cfg.output_format}"
    return None


def write_report(report: ExperimentReport, path: Path, fmt: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.to_csv() if fmt == "csv" else report.to_json())
    if report.trajectories:
        path.with_name(path.stem + "_trajectories.csv").write_text(report.trajectories_csv())
