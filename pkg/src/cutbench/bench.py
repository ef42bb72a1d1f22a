"""Seeded experiment drivers, aggregation and CSV output.

Two experiments are provided: ``ghz`` compares the three wire-cutting
methods on the rotated GHZ benchmark by Hellinger distance, and ``qaoa``
compares cut and uncut QAOA runs by the rank of the answer they return.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .circuit import ghz_benchmark_circuit, ghz_default_cut
from .metrics import allocate_shots, hellinger
from .noise import get_noise
from .qaoa import (
    DEFAULT_DEVICE_LIMIT,
    RANK_LABELS,
    SpsaConfig,
    default_graph,
    rank_answer,
    run_qaoa,
)
from .simulator import exact_distribution
from .wirecut import clip_and_normalize, fragment, run_pauli_cut, run_randomized_cut

__all__ = [
    "CSV_HEADER",
    "ExperimentConfig",
    "ExperimentResult",
    "RunRecord",
    "allocate_shots",
    "hellinger",
    "load_config",
    "rank_answer",
    "run_experiment",
    "run_ghz_experiment",
    "run_qaoa_experiment",
]

log = logging.getLogger(__name__)

CSV_HEADER = ("experiment", "method", "graph", "budget", "noise", "rep", "seed", "metric_name", "metric_value")
GHZ_METHODS = ("pauli", "clifford", "rotation")
QAOA_METHODS = ("uncut", "clifford_cut", "pauli_cut")
RANKS = RANK_LABELS + ("wrong",)
DEFAULT_BUDGETS = {"ghz": (1000, 10000, 100000), "qaoa": (2000, 3000, 4000)}
# repetitions (uncut, cut) for ideal and noisy QAOA runs
DEFAULT_QAOA_REPS = {False: (120, 60), True: (20, 10)}
DEFAULT_GHZ_REPS = 60


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines an experiment's output.

    ``reps`` applies to every method; for ``qaoa`` it may be left ``None`` to
    use 120 uncut / 60 cut repetitions (20 / 10 with noise), and
    ``cut_reps`` overrides the count for cut methods only.
    """

    experiment: str
    methods: tuple[str, ...] = ()
    budgets: tuple[int, ...] = ()
    reps: int | None = None
    cut_reps: int | None = None
    noise: str | None = None
    device_limit: int | None = DEFAULT_DEVICE_LIMIT
    seed: int = 0
    out: str | None = None
    graphs: tuple[str, ...] = ("A",)
    spsa: Mapping[str, float] = field(default_factory=dict)
    num_qubits: int = 5
    layers: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in DEFAULT_BUDGETS:
            raise ValueError(f"unknown experiment {self.experiment!r}; expected ghz or qaoa")
        known = GHZ_METHODS if self.experiment == "ghz" else QAOA_METHODS
        methods = tuple(self.methods) or known[:3 if self.experiment == "ghz" else 2]
        for m in methods:
            if m not in known:
                raise ValueError(f"unknown {self.experiment} method {m!r}; expected one of {known}")
        budgets = tuple(int(b) for b in self.budgets) or DEFAULT_BUDGETS[self.experiment]
        if any(b <= 0 for b in budgets):
            raise ValueError("budgets must be positive")
        for name in ("reps", "cut_reps"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        get_noise(self.noise)  # validates the preset name
        object.__setattr__(self, "methods", methods)
        object.__setattr__(self, "budgets", budgets)
        object.__setattr__(self, "graphs", tuple(self.graphs))
        if self.experiment == "qaoa":
            for g in self.graphs:
                default_graph(g)
        SpsaConfig(**dict(self.spsa))

    @property
    def noise_label(self) -> str:
        model = get_noise(self.noise)
        return model.preset_name if model is not None else "none"

    def reps_for(self, method: str) -> int:
        cut = method not in ("uncut",)
        if self.experiment == "ghz":
            return self.reps or DEFAULT_GHZ_REPS
        if cut and self.cut_reps is not None:
            return self.cut_reps
        if self.reps is not None:
            return self.reps
        return DEFAULT_QAOA_REPS[get_noise(self.noise) is not None][int(cut)]


@dataclass
class RunRecord:
    """One repetition: which method ran on what, with which seed, and what it measured."""

    experiment: str
    method: str
    graph: str
    budget: int
    noise: str
    rep: int
    seed: int
    metrics: dict[str, float | str]
    wall_time: float = 0.0
    distribution: dict[str, float] = field(default_factory=dict)
    diagnostics: dict[str, float] = field(default_factory=dict)

    def sort_key(self) -> tuple:
        return (self.graph, self.method, self.budget, self.rep)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[RunRecord]
    summary: list[tuple]  # (method, graph, budget, metric_name, value)

    def rows(self) -> list[tuple]:
        cfg = self.config
        out = []
        for r in self.records:
            for name, value in r.metrics.items():
                out.append((cfg.experiment, r.method, r.graph, r.budget, r.noise, r.rep, r.seed, name, value))
        for method, graph, budget, name, value in self.summary:
            out.append((cfg.experiment, method, graph, budget, cfg.noise_label, -1, cfg.seed, name, value))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(_format_row(row) for row in self.rows())
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())

    def cell(self, method: str, budget: int, graph: str | None = None) -> list[RunRecord]:
        return [
            r for r in self.records
            if r.method == method and r.budget == budget and (graph is None or r.graph == graph)
        ]

    def summary_value(self, method: str, budget: int, name: str, graph: str | None = None):
        for m, g, b, n, v in self.summary:
            if m == method and b == budget and n == name and (graph is None or g == graph):
                return v
        raise KeyError((method, graph, budget, name))


def _format_row(row: tuple) -> tuple:
    return tuple(repr(v) if isinstance(v, float) else v for v in row)


def derive_seed(master: int, *keys: int) -> int:
    """Deterministic 32-bit seed for a (master, keys) tuple."""
    return int(np.random.SeedSequence([int(master), *map(int, keys)]).generate_state(1)[0])


# -- GHZ ---------------------------------------------------------------------


def _ghz_task(task: tuple) -> RunRecord:
    method, budget, rep, circuit_seed, seed, n, noise_name = task
    start = time.perf_counter()
    circuit = ghz_benchmark_circuit(n, seed=circuit_seed)
    fragments = fragment(ghz_default_cut(circuit))
    noise = get_noise(noise_name)
    if method == "pauli":
        quasi = run_pauli_cut(fragments, budget, seed, noise)
    else:
        quasi = run_randomized_cut(fragments, budget, seed, method, noise)
    dist = clip_and_normalize(quasi)
    h = hellinger(dist, exact_distribution(circuit))
    diag = {"quasi_sum": float(sum(quasi.values())), "circuit_seed": circuit_seed}
    log.debug("ghz %s budget=%d rep=%d hellinger=%.6f quasi_sum=%.6f", method, budget, rep, h, diag["quasi_sum"])
    return RunRecord(
        experiment="ghz",
        method=method,
        graph=f"ghz{n}",
        budget=budget,
        noise=noise.preset_name if noise is not None else "none",
        rep=rep,
        seed=seed,
        metrics={"hellinger": h},
        wall_time=time.perf_counter() - start,
        distribution=dist,
        diagnostics=diag,
    )


def run_ghz_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Hellinger distance of each method's clipped reconstruction to the exact distribution.

    Repetition ``r`` uses the same benchmark circuit for every method and
    budget; the execution seed also depends on method and budget.
    """
    if config.experiment != "ghz":
        raise ValueError("run_ghz_experiment needs experiment='ghz'")
    tasks = []
    for mi, method in enumerate(GHZ_METHODS):
        if method not in config.methods:
            continue
        for budget in config.budgets:
            for rep in range(config.reps_for(method)):
                circuit_seed = derive_seed(config.seed, 0, rep)
                seed = derive_seed(config.seed, 1, mi, budget, rep)
                tasks.append((method, budget, rep, circuit_seed, seed, config.num_qubits, config.noise))
    records = _execute(_ghz_task, tasks, config.workers)
    summary = []
    for method in config.methods:
        for budget in config.budgets:
            hs = np.array([r.metrics["hellinger"] for r in records if r.method == method and r.budget == budget])
            sem = float(hs.std(ddof=1) / math.sqrt(hs.size)) if hs.size > 1 else 0.0
            summary.append((method, f"ghz{config.num_qubits}", budget, "hellinger_mean", float(hs.mean())))
            summary.append((method, f"ghz{config.num_qubits}", budget, "hellinger_sem", sem))
    return _finish(config, records, summary)


# -- QAOA --------------------------------------------------------------------


def _qaoa_task(task: tuple) -> RunRecord:
    graph_name, method, budget, rep, seed, noise_name, device_limit, spsa, layers = task
    start = time.perf_counter()
    noise = get_noise(noise_name)
    run = run_qaoa(
        default_graph(graph_name),
        method,
        budget,
        noise,
        SpsaConfig(**spsa),
        p=layers,
        seed=seed,
        device_limit=device_limit,
    )
    log.debug("qaoa %s %s budget=%d rep=%d rank=%s", graph_name, method, budget, rep, run.rank)
    return RunRecord(
        experiment="qaoa",
        method=method,
        graph=graph_name,
        budget=budget,
        noise=noise.preset_name if noise is not None else "none",
        rep=rep,
        seed=seed,
        metrics={"rank": run.rank, "expected_cost": run.expected_cost},
        wall_time=time.perf_counter() - start,
        distribution=run.distribution,
        diagnostics={"evaluations": run.spsa.evaluations},
    )


def run_qaoa_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Answer-rank fractions of cut and uncut QAOA per (graph, method, budget) cell."""
    if config.experiment != "qaoa":
        raise ValueError("run_qaoa_experiment needs experiment='qaoa'")
    tasks = []
    for graph_name in config.graphs:
        gi = "ABC".index(graph_name)
        for mi, method in enumerate(QAOA_METHODS):
            if method not in config.methods:
                continue
            for budget in config.budgets:
                for rep in range(config.reps_for(method)):
                    seed = derive_seed(config.seed, 2, gi, mi, budget, rep)
                    tasks.append((graph_name, method, budget, rep, seed, config.noise,
                                  config.device_limit, dict(config.spsa), config.layers))
    records = _execute(_qaoa_task, tasks, config.workers)
    summary = []
    for graph_name in config.graphs:
        for method in config.methods:
            for budget in config.budgets:
                cell = [r for r in records if (r.graph, r.method, r.budget) == (graph_name, method, budget)]
                for label in RANKS:
                    frac = sum(r.metrics["rank"] == label for r in cell) / len(cell)
                    summary.append((method, graph_name, budget, f"frac_{label}", frac))
                costs = [r.metrics["expected_cost"] for r in cell]
                summary.append((method, graph_name, budget, "expected_cost_mean", float(np.mean(costs))))
    return _finish(config, records, summary)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    if config.experiment == "ghz":
        return run_ghz_experiment(config)
    return run_qaoa_experiment(config)


# -- plumbing ----------------------------------------------------------------


def _execute(fn, tasks: Sequence[tuple], workers: int) -> list[RunRecord]:
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        records = [fn(t) for t in tasks]
    return sorted(records, key=RunRecord.sort_key)


def _finish(config: ExperimentConfig, records, summary) -> ExperimentResult:
    result = ExperimentResult(config, records, summary)
    if config.out:
        result.write_csv(config.out)
    return result


_CONFIG_KEYS = {
    "experiment": str,
    "methods": lambda s: tuple(x.strip() for x in s.split(",") if x.strip()),
    "budgets": lambda s: tuple(int(x) for x in s.split(",") if x.strip()),
    "reps": int,
    "cut_reps": int,
    "noise": lambda s: None if s.lower() == "none" else s,
    "device_limit": lambda s: None if s.lower() == "none" else int(s),
    "seed": int,
    "out": str,
    "graphs": lambda s: tuple(x.strip() for x in s.split(",") if x.strip()),
    "num_qubits": int,
    "layers": int,
    "workers": int,
}
_SPSA_KEYS = {"a": float, "c": float, "A": float, "alpha": float, "gamma_exp": float, "max_iter": int}


def load_config(path) -> dict:
    """Read ``key = value`` lines (``#`` comments) into keyword arguments for :class:`ExperimentConfig`.

    Keys mirror the CLI flags with dashes as underscores; ``graph`` is an
    alias for ``graphs`` and ``spsa_<name>`` sets an SPSA constant.
    """
    out: dict = {}
    spsa: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "graph":
            key = "graphs"
        try:
            if key.startswith("spsa_") and key[5:] in _SPSA_KEYS:
                spsa[key[5:]] = _SPSA_KEYS[key[5:]](value)
            elif key in _CONFIG_KEYS:
                out[key] = _CONFIG_KEYS[key](value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    if spsa:
        out["spsa"] = spsa
    return out


def with_overrides(config: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(config, **{k: v for k, v in changes.items() if v is not None})
