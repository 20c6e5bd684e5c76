"""Seeded experiment runs: config parsing, replications, CSV and manifest output.

Configs are JSON objects. Every replication ``r`` draws its randomness from
``SeedSequence(seed, spawn_key=(r, stream))`` with a fixed stream number per
purpose (scenario, social graph, chain), so a replication does not depend on
how many others run and a run is reproduced exactly from its manifest.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import power as pw
from . import random_access as ra
from .equilibrium import benchmark_profiles, brute_force_optima, expected_potential, gap_report
from .glauber import ChainConfig, simulate
from .markov import (ENUMERATION_CAP, CapacityError, exact_chain, mixing_bounds,
                     spectral_check, DENSE_CAP)
from .social import (SocialGraph, er_graph, induced_subgraph, load_edge_list,
                     social_detection_filter)
from .spectrum import COMPLETE, SpectrumScenario, random_scenario, welfare

SCHEMA_VERSION = 1
KINDS = ("spectrum-chain", "spectrum-sweep-PL", "spectrum-theta-tradeoff", "power-sweep",
         "random-access-sweep", "stationary-analysis")
SCENARIO_STREAM, SOCIAL_STREAM, CHAIN_STREAM = 0, 1, 2
BUILTIN_PREFIX = "builtin:"
CONVERGENCE_WINDOW = 100


class ConfigError(ValueError):
    pass


def stream_seed(master: int, replication: int, stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master, spawn_key=(replication, stream))


def builtin_path(name: str) -> Path:
    return Path(str(resources.files("sgum") / "data" / f"{name}.txt"))


def _resolve(path: str, base: Path | None) -> str:
    if path.startswith(BUILTIN_PREFIX):
        p = builtin_path(path[len(BUILTIN_PREFIX):])
        if not p.exists():
            raise ConfigError(f"no bundled data set named {path!r}")
        return path
    p = Path(path)
    if not p.is_absolute() and base is not None:
        p = base / p
    if not p.exists():
        raise ConfigError(f"referenced file {path!r} does not exist")
    return str(p.resolve())


@dataclass
class ExperimentConfig:
    kind: str
    seed: int = 0
    replications: int = 1
    scenario: dict = field(default_factory=dict)
    social: dict = field(default_factory=lambda: {"type": "empty"})
    theta: list = field(default_factory=lambda: [1.0])
    sweep: dict = field(default_factory=dict)
    chain: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if isinstance(self.replications, bool) or not isinstance(self.replications, int) \
                or self.replications < 1:
            raise ConfigError("replications must be an integer >= 1")
        if isinstance(self.theta, (int, float)):
            self.theta = [self.theta]
        for t in self.theta:
            if not isinstance(t, (int, float)) or not math.isfinite(t) or t < 0:
                raise ConfigError(f"theta values must be finite and >= 0, got {t!r}")
        kind = self.social.get("type")
        if kind not in ("er", "edge-list", "complete", "empty"):
            raise ConfigError(f"unknown social graph type {kind!r}")
        if kind == "er" and not 0 <= self.social.get("p_link", 0.5) <= 1:
            raise ConfigError("p_link must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "seed": self.seed, "replications": self.replications,
                "scenario": self.scenario, "social": self.social, "theta": self.theta,
                "sweep": self.sweep, "chain": self.chain}

    @classmethod
    def from_dict(cls, d: dict, base: Path | None = None) -> "ExperimentConfig":
        if "config" in d and "schema_version" in d:
            d = d["config"]  # a run manifest
        known = {"kind", "seed", "replications", "scenario", "social", "theta", "sweep", "chain"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        if "kind" not in d:
            raise ConfigError("config needs a 'kind'")
        d = json.loads(json.dumps(d))
        social = d.get("social", {"type": "empty"})
        if social.get("type") == "edge-list":
            if "path" not in social:
                raise ConfigError("edge-list social graph needs a 'path'")
            social["path"] = _resolve(social["path"], base)
        d["social"] = social
        return cls(**d)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {str(path)!r} does not exist") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return ExperimentConfig.from_dict(data, path.parent)


# -- scenario and graph construction -----------------------------------------

def spectrum_scenario(params: dict, seed) -> SpectrumScenario:
    if "positions" in params:
        return SpectrumScenario.from_dict(params)
    rng = params.get("interference_range", COMPLETE)
    return random_scenario(
        int(params.get("n_users", 4)), int(params.get("n_channels", 2)), np.random.default_rng(seed),
        side=float(params.get("side", 500.0)), power_dbm=float(params.get("power_dbm", 20.0)),
        alpha=float(params.get("alpha", 4.0)),
        noise_dbm=tuple(params.get("noise_dbm", (-100.0, -90.0))),
        vacancy_prob=float(params.get("vacancy_prob", 1.0)),
        interference_range=rng if rng == COMPLETE else float(rng),
        power_unit=float(params.get("power_unit", 1.0)))


def social_graph(spec: dict, n_users: int, seed) -> SocialGraph:
    kind = spec.get("type", "empty")
    if kind == "empty":
        return SocialGraph.empty(n_users)
    if kind == "complete":
        return SocialGraph.complete(n_users, float(spec.get("tie_weight", 1.0)))
    if kind == "er":
        return er_graph(n_users, float(spec.get("p_link", 0.5)), float(spec.get("tie_weight", 1.0)),
                        seed=seed)
    path = spec["path"]
    if path.startswith(BUILTIN_PREFIX):
        path = builtin_path(path[len(BUILTIN_PREFIX):])
    full = load_edge_list(Path(path).read_text(), symmetrize=bool(spec.get("symmetrize", False)))
    if full.n_users < n_users:
        raise ConfigError(f"edge list has {full.n_users} users, {n_users} requested")
    rng = np.random.default_rng(seed)
    nodes = np.sort(rng.choice(full.n_users, size=n_users, replace=False))
    return induced_subgraph(full, nodes.tolist())


def _apply_detection(g: SocialGraph, s: SpectrumScenario, spec: dict) -> SocialGraph:
    r = spec.get("detection_range")
    return g if r is None else social_detection_filter(g, s.positions, float(r))


# -- output helpers -----------------------------------------------------------

def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(x) for x in row])
    return buf.getvalue()


def _mean_std(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        # e.g. a starved link gives -inf welfare; the spread is then undefined
        return float(v.mean()), math.nan
    return float(v.mean()), float(v.std(ddof=1)) if v.size > 1 else 0.0


@dataclass
class RunResult:
    tables: dict[str, str]
    warnings: list[str] = field(default_factory=list)
    notes: dict = field(default_factory=dict)


# -- spectrum experiments ------------------------------------------------------

def _sweep_values(cfg: ExperimentConfig, default_var: str, default_vals):
    var = cfg.sweep.get("variable", default_var)
    vals = cfg.sweep.get("values", default_vals)
    if not vals:
        raise ConfigError("sweep needs at least one value")
    return var, list(vals)


def _run_spectrum_sweep(cfg: ExperimentConfig) -> RunResult:
    """Mean interference of the three benchmarks against a swept parameter."""
    var, values = _sweep_values(cfg, "p_link", [0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
    if var not in ("p_link", "detection_range", "n_users"):
        raise ConfigError(f"spectrum sweep variable {var!r} is not supported")
    cap = int(cfg.scenario.get("cap", ENUMERATION_CAP))
    events = int(cfg.chain.get("max_events", 200_000))
    rows, notes = [], []
    for x in values:
        scen = dict(cfg.scenario)
        soc = dict(cfg.social)
        if var == "p_link":
            soc["type"], soc["p_link"] = "er", float(x)
        elif var == "detection_range":
            soc["detection_range"] = float(x)
        else:
            scen["n_users"] = int(x)
        per = {"ncg": [], "sgum": [], "num": []}
        approximate = False
        for r in range(cfg.replications):
            s = spectrum_scenario(scen, stream_seed(cfg.seed, r, SCENARIO_STREAM))
            g = social_graph(soc, s.n_users, stream_seed(cfg.seed, r, SOCIAL_STREAM))
            g = _apply_detection(g, s, soc)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                b = benchmark_profiles(s, g, cap=cap, events=events,
                                       seed=stream_seed(cfg.seed, r, CHAIN_STREAM))
            approximate |= b.approximate
            per["ncg"].append(-welfare(s, b.ncg_sne))
            per["sgum"].append(-welfare(s, b.sgum_sne))
            per["num"].append(-welfare(s, b.num_opt))
        if approximate:
            notes.append(f"{var}={x}: state space above cap {cap}, chain search used")
        stats = {k: _mean_std(v) for k, v in per.items()}
        ref = stats["num"][0]
        rows.append([x] + [v for k in ("ncg", "sgum", "num") for v in stats[k]]
                    + [stats[k][0] / ref for k in ("ncg", "sgum", "num")] + [approximate])
    header = [var, "ncg_mean", "ncg_std", "sgum_mean", "sgum_std", "num_mean", "num_std",
              "ncg_normalized", "sgum_normalized", "num_normalized", "approximate"]
    return RunResult({"sweep.csv": csv_text(header, rows)}, notes,
                     {"normalization": "mean total interference divided by the NUM mean"})


def events_to_convergence(phi: np.ndarray, phi_star: float, allowed_loss: float,
                          window: int = CONVERGENCE_WINDOW) -> int:
    """Events until the potential enters the allowed-loss region and stays for ``window`` events.

    The region is ``phi >= phi_star - allowed_loss * |phi_star|`` (a relative
    slack of 1e-12 at zero loss). ``phi[k]`` is the value after event ``k + 1``.
    Returns the length of ``phi`` (the horizon) when this never happens.
    """
    slack = max(allowed_loss, 1e-12)
    ok = np.asarray(phi) >= phi_star - slack * abs(phi_star)
    if ok.size < window:
        return int(ok.size)
    # number of good events in each length-``window`` stretch
    counts = np.convolve(ok.astype(np.int64), np.ones(window, dtype=np.int64), mode="valid")
    full = np.flatnonzero(counts == window)
    return int(full[0]) + 1 if full.size else int(ok.size)


def first_hit(phi: np.ndarray, phi_star: float) -> int:
    """Events until the potential first reaches its maximum (horizon when never)."""
    hits = np.flatnonzero(np.asarray(phi) >= phi_star - 1e-12 * abs(phi_star))
    return int(hits[0]) + 1 if hits.size else int(np.asarray(phi).size)


def _run_theta_tradeoff(cfg: ExperimentConfig) -> RunResult:
    events = int(cfg.chain.get("max_events", 100_000))
    tau = cfg.chain.get("tau", 1.0)
    loss = float(cfg.chain.get("allowed_loss", 0.0))
    rows = []
    for theta in cfg.theta:
        hit, conv, phis, mass = [], [], [], []
        for r in range(cfg.replications):
            s = spectrum_scenario(cfg.scenario, stream_seed(cfg.seed, r, SCENARIO_STREAM))
            g = social_graph(cfg.social, s.n_users, stream_seed(cfg.seed, r, SOCIAL_STREAM))
            g = _apply_detection(g, s, cfg.social)
            opt = brute_force_optima(s, g)
            chain = exact_chain(s, g, theta, tau)
            phis.append(expected_potential(chain))
            mass.append(float(chain.stationary[chain.index(opt.argmax_phi)]))
            trace = simulate(s, g, ChainConfig(theta, tau, stream_seed(cfg.seed, r, CHAIN_STREAM),
                                               max_events=events))
            hit.append(first_hit(trace.phi, opt.phi_star))
            conv.append(events_to_convergence(trace.phi, opt.phi_star, loss))
        rows.append([theta, *_mean_std(phis), *_mean_std(mass), *_mean_std(hit), *_mean_std(conv)])
    header = ["theta", "phi_theta_mean", "phi_theta_std", "mass_argmax_mean", "mass_argmax_std",
              "first_hit_mean", "first_hit_std", "convergence_mean", "convergence_std"]
    return RunResult({"tradeoff.csv": csv_text(header, rows)},
                     notes={"allowed_loss": loss, "convergence_window": CONVERGENCE_WINDOW,
                            "horizon_events": events})


def _run_chain(cfg: ExperimentConfig) -> RunResult:
    events = cfg.chain.get("max_events", 10_000)
    max_time = cfg.chain.get("max_time")
    tau = cfg.chain.get("tau", 1.0)
    tables, rows = {}, []
    for theta_i, theta in enumerate(cfg.theta):
        for r in range(cfg.replications):
            s = spectrum_scenario(cfg.scenario, stream_seed(cfg.seed, r, SCENARIO_STREAM))
            g = social_graph(cfg.social, s.n_users, stream_seed(cfg.seed, r, SOCIAL_STREAM))
            g = _apply_detection(g, s, cfg.social)
            trace = simulate(s, g, ChainConfig(theta, tau, stream_seed(cfg.seed, r, CHAIN_STREAM),
                                               max_events=events, max_time=max_time))
            buf = io.StringIO()
            trace.to_csv(buf)
            tables[f"trace_theta{theta_i}_rep{r}.csv"] = buf.getvalue()
            rows.append([theta, r, trace.n_events, trace.end_time, trace.final_phi,
                         trace.final_welfare, "".join(map(str, trace.final))])
    header = ["theta", "replication", "events", "end_time", "final_phi", "final_welfare",
              "final_profile"]
    tables["summary.csv"] = csv_text(header, rows)
    return RunResult(tables)


def _run_stationary(cfg: ExperimentConfig) -> RunResult:
    epsilon = float(cfg.chain.get("epsilon", 0.01))
    tau = cfg.chain.get("tau", 1.0)
    tables, rows = {}, []
    for theta_i, theta in enumerate(cfg.theta):
        for r in range(cfg.replications):
            s = spectrum_scenario(cfg.scenario, stream_seed(cfg.seed, r, SCENARIO_STREAM))
            g = social_graph(cfg.social, s.n_users, stream_seed(cfg.seed, r, SOCIAL_STREAM))
            g = _apply_detection(g, s, cfg.social)
            chain = exact_chain(s, g, theta, tau)
            law = [["".join(map(str, a)), p] for a, p in zip(chain.states.tolist(), chain.stationary)]
            tables[f"stationary_theta{theta_i}_rep{r}.csv"] = csv_text(["profile", "probability"], law)
            bounds = mixing_bounds(s, g, theta, tau, epsilon)
            row = [theta, r, expected_potential(chain), bounds.general_bound,
                   "" if bounds.coupled_bound is None else bounds.coupled_bound, bounds.theta_th]
            if chain.n_states <= DENSE_CAP:
                sc = spectral_check(chain)
                row += [sc.xi, sc.lambda2, sc.cheeger_ok]
            else:
                row += ["", "", ""]
            if theta > 0:
                rep = gap_report(s, g, theta)
                row += [rep.phi_star, rep.potential_gap_bound, rep.rho_theta, rep.welfare_gap_bound]
            else:
                row += ["", "", "", ""]
            rows.append(row)
    header = ["theta", "replication", "phi_theta", "general_bound", "coupled_bound", "theta_th",
              "xi", "lambda2", "cheeger_ok", "phi_star", "potential_gap_bound", "rho_theta",
              "welfare_gap_bound"]
    tables["summary.csv"] = csv_text(header, rows)
    return RunResult(tables)


# -- power and random access ---------------------------------------------------

def _power_scenario(params: dict, ties: SocialGraph | None, seed) -> pw.PowerScenario:
    if "h" in params:
        return pw.PowerScenario(params["h"], params["g"], params["noise"], params["cost"], ties,
                                params.get("p_max"))
    return pw.random_power_scenario(
        int(params.get("n_users", 2)), np.random.default_rng(seed), ties,
        side=float(params.get("side", 500.0)), alpha=float(params.get("alpha", 3.0)),
        ref_distance=float(params.get("ref_distance", 100.0)),
        noise=float(params.get("noise", 0.1)), cost=float(params.get("cost", 1.0)))


def _uniform_ties(n: int, w: float) -> SocialGraph:
    return SocialGraph.empty(n) if w == 0 else SocialGraph.complete(n, w)


def _run_power(cfg: ExperimentConfig) -> RunResult:
    var, values = _sweep_values(cfg, "w", [round(0.1 * k, 1) for k in range(11)])
    if var == "w":
        rows = []
        for r in range(cfg.replications):
            base = _power_scenario(cfg.scenario, None, stream_seed(cfg.seed, r, SCENARIO_STREAM))
            if base.n_users != 2:
                raise ConfigError("the tie-weight power sweep uses two-user scenarios")
            so = [pw.social_optimal_power(base, i) for i in range(2)]
            for w in values:
                sc = base.with_ties(_uniform_ties(2, float(w)))
                p = pw.two_user_sne(sc)
                rows.append([w, r, p[0], p[1], pw.welfare(sc, p), so[0], so[1]])
        header = ["w", "replication", "p1", "p2", "welfare", "p1_so", "p2_so"]
        return RunResult({"power_w.csv": csv_text(header, rows)})
    if var not in ("p_link", "n_users"):
        raise ConfigError(f"power sweep variable {var!r} is not supported")
    rows = []
    for x in values:
        per = {"ncg": [], "sgum": [], "num": []}
        for r in range(cfg.replications):
            params, soc = dict(cfg.scenario), dict(cfg.social)
            if var == "n_users":
                params["n_users"] = int(x)
            else:
                soc["type"], soc["p_link"] = "er", float(x)
            n = int(params.get("n_users", 2))
            g = social_graph(soc, n, stream_seed(cfg.seed, r, SOCIAL_STREAM))
            sc = _power_scenario(params, g, stream_seed(cfg.seed, r, SCENARIO_STREAM))
            ncg = pw.solve_sne_iterative(sc.with_ties(SocialGraph.empty(n))).profile
            sgum = pw.solve_sne_iterative(sc).profile
            num = pw.social_optimum_numeric(sc).profile
            per["ncg"].append(pw.welfare(sc, ncg))
            per["sgum"].append(pw.welfare(sc, sgum))
            per["num"].append(pw.welfare(sc, num))
        stats = {k: _mean_std(v) for k, v in per.items()}
        rows.append([x] + [v for k in ("ncg", "sgum", "num") for v in stats[k]])
    header = [var, "ncg_welfare_mean", "ncg_welfare_std", "sgum_welfare_mean", "sgum_welfare_std",
              "num_welfare_mean", "num_welfare_std"]
    return RunResult({"power_sweep.csv": csv_text(header, rows)},
                     notes={"num": "coordinate-ascent heuristic, not a certified optimum"})


def _access_scenario(params: dict, ties: SocialGraph | None, seed) -> ra.RandomAccessScenario:
    if "out_sets" in params:
        return ra.RandomAccessScenario(tuple(params["out_sets"]), params["z"], params["cost"], ties)
    return ra.geometric_scenario(int(params.get("n_users", 10)), np.random.default_rng(seed), ties,
                                 side=float(params.get("side", 500.0)),
                                 reach=float(params.get("reach", 100.0)),
                                 z=float(params.get("z", 1.0)), cost=float(params.get("cost", 1.0)))


def _run_random_access(cfg: ExperimentConfig) -> RunResult:
    var, values = _sweep_values(cfg, "w", [round(0.1 * k, 1) for k in range(11)])
    if var == "w":
        rows = []
        for r in range(cfg.replications):
            base = _access_scenario(cfg.scenario, None, stream_seed(cfg.seed, r, SCENARIO_STREAM))
            for w in values:
                sc = base.with_ties(_uniform_ties(base.n_users, float(w)))
                q = ra.sne_profile(sc)
                rows.append([w, r, float(q.mean()), ra.access_welfare(sc, q, strict=False),
                             ra.access_welfare(sc, ra.social_optimal_profile(sc), strict=False)])
        header = ["w", "replication", "q_mean", "welfare_sne", "welfare_so"]
        return RunResult({"access_w.csv": csv_text(header, rows)})
    if var not in ("p_link", "n_users"):
        raise ConfigError(f"random-access sweep variable {var!r} is not supported")
    rows = []
    for x in values:
        per = {"ncg": [], "sgum": [], "num": []}
        for r in range(cfg.replications):
            params, soc = dict(cfg.scenario), dict(cfg.social)
            if var == "n_users":
                params["n_users"] = int(x)
            else:
                soc["type"], soc["p_link"] = "er", float(x)
            n = int(params.get("n_users", 10))
            g = social_graph(soc, n, stream_seed(cfg.seed, r, SOCIAL_STREAM))
            sc = _access_scenario(params, g, stream_seed(cfg.seed, r, SCENARIO_STREAM))
            plain = sc.with_ties(SocialGraph.empty(n))
            per["ncg"].append(ra.access_welfare(sc, ra.sne_profile(plain), strict=False))
            per["sgum"].append(ra.access_welfare(sc, ra.sne_profile(sc), strict=False))
            per["num"].append(ra.access_welfare(sc, ra.social_optimal_profile(sc), strict=False))
        stats = {k: _mean_std(v) for k, v in per.items()}
        rows.append([x] + [v for k in ("ncg", "sgum", "num") for v in stats[k]])
    header = [var, "ncg_welfare_mean", "ncg_welfare_std", "sgum_welfare_mean", "sgum_welfare_std",
              "num_welfare_mean", "num_welfare_std"]
    return RunResult({"access_sweep.csv": csv_text(header, rows)})


_RUNNERS = {
    "spectrum-chain": _run_chain,
    "spectrum-sweep-PL": _run_spectrum_sweep,
    "spectrum-theta-tradeoff": _run_theta_tradeoff,
    "stationary-analysis": _run_stationary,
    "power-sweep": _run_power,
    "random-access-sweep": _run_random_access,
}


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> RunResult:
    """Run ``cfg``; with ``out_dir`` also write every table plus ``manifest.json``."""
    try:
        result = _RUNNERS[cfg.kind](cfg)
    except CapacityError as e:
        raise ConfigError(f"exact analysis infeasible: {e}") from None
    if out_dir is not None:
        write_outputs(cfg, result, out_dir)
    return result


def manifest(cfg: ExperimentConfig, result: RunResult) -> dict:
    from . import __version__
    return {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "config": cfg.to_dict(),
        "seed_scheme": "numpy SeedSequence(seed, spawn_key=(replication, stream)); "
                       f"streams scenario={SCENARIO_STREAM} social={SOCIAL_STREAM} chain={CHAIN_STREAM}",
        "outputs": {name: hashlib.sha256(text.encode()).hexdigest()
                    for name, text in sorted(result.tables.items())},
        "warnings": result.warnings,
        "notes": result.notes,
    }


def write_outputs(cfg: ExperimentConfig, result: RunResult, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in result.tables.items():
        (out / name).write_text(text)
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest(cfg, result), indent=2, sort_keys=True) + "\n")
    return path


def verify_manifest(path) -> dict[str, bool]:
    """Rerun the config recorded in a manifest and compare output digests."""
    data = json.loads(Path(path).read_text())
    cfg = ExperimentConfig.from_dict(data["config"], Path(path).parent)
    result = run_experiment(cfg)
    fresh = manifest(cfg, result)["outputs"]
    return {name: fresh.get(name) == digest for name, digest in data["outputs"].items()}

