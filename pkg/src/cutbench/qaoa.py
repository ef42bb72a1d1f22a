"""MaxCut instances, QAOA circuits with hub-wire cuts, and SPSA optimization."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .circuit import Circuit, CutMarker, Gate, measure_all
from .noise import NoiseModel
from .simulator import as_rng, sample_indices
from .distributions import bitstring, key_length, to_array
from .wirecut import clip_and_normalize, fragment, randomized_cut_samples, run_pauli_cut
from .wirecut.fragments import FragmentationError

MAX_BRUTE_FORCE_VERTICES = 24
RANK_LABELS = ("best", "second", "third")
METHODS = ("uncut", "pauli_cut", "clifford_cut")
DEFAULT_DEVICE_LIMIT = 5

LAYER_SIZES = {
    "A": (3, 1, 3),
    "B": (3, 1, 2, 1, 3),
    "C": (3, 1, 2, 1, 2, 1, 2),
}


class QaoaError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    ``layers`` is set for layered graphs; it drives the cascading edge order
    and the choice of cut wires.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    layers: tuple[tuple[int, ...], ...] | None = None
    name: str = ""

    def __post_init__(self):
        norm = []
        for u, v in self.edges:
            if u == v:
                raise QaoaError(f"self-loop on vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise QaoaError(f"edge ({u}, {v}) outside 0..{self.n - 1}")
            norm.append((min(u, v), max(u, v)))
        if len(set(norm)) != len(norm):
            raise QaoaError("duplicate edge")
        object.__setattr__(self, "edges", tuple(sorted(norm)))
        if self.layers is not None:
            flat = sorted(v for layer in self.layers for v in layer)
            if flat != list(range(self.n)):
                raise QaoaError("layers must partition the vertex set")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def layer_of(self) -> dict[int, int]:
        if self.layers is None:
            return {}
        return {v: i for i, layer in enumerate(self.layers) for v in layer}

    def hubs(self) -> list[int]:
        """Vertices forming an interior layer of size one."""
        if self.layers is None:
            return []
        return [layer[0] for layer in self.layers[1:-1] if len(layer) == 1]

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        adj = {v: set() for v in range(self.n)}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        seen, stack = {0}, [0]
        while stack:
            for w in adj[stack.pop()] - seen:
                seen.add(w)
                stack.append(w)
        return len(seen) == self.n


def layered_graph(layer_sizes: Sequence[int], name: str = "") -> Graph:
    """Complete bipartite connections between consecutive layers."""
    layers, start = [], 0
    for size in layer_sizes:
        layers.append(tuple(range(start, start + size)))
        start += size
    edges = [(u, v) for a, b in zip(layers, layers[1:]) for u in a for v in b]
    return Graph(start, tuple(edges), tuple(layers), name)


def default_graph(name: str) -> Graph:
    """Layered stand-in instances A (7 vertices), B (10) and C (12)."""
    try:
        sizes = LAYER_SIZES[name]
    except KeyError:
        raise QaoaError(f"unknown graph {name!r}; expected one of {sorted(LAYER_SIZES)}") from None
    return layered_graph(sizes, name)


def read_graph(path) -> Graph:
    """Edge-list text: first line ``n``, then one ``u v`` pair per line; ``#`` comments."""
    lines = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise QaoaError(f"{path}: empty graph file")
    try:
        n = int(lines[0])
        edges = [tuple(int(x) for x in line.split()) for line in lines[1:]]
    except ValueError as exc:
        raise QaoaError(f"{path}: {exc}") from None
    if any(len(e) != 2 for e in edges):
        raise QaoaError(f"{path}: every edge line needs exactly two vertices")
    return Graph(n, tuple(edges), name=Path(path).stem)


def write_graph(graph: Graph, path) -> None:
    body = "".join(f"{u} {v}\n" for u, v in graph.edges)
    Path(path).write_text(f"{graph.n}\n{body}")


# -- cut values --------------------------------------------------------------


def cut_value(graph: Graph, assignment: str) -> int:
    if len(assignment) != graph.n:
        raise QaoaError(f"assignment has length {len(assignment)}, graph has {graph.n} vertices")
    return sum(assignment[u] != assignment[v] for u, v in graph.edges)


@lru_cache(maxsize=16)
def _cut_table(graph: Graph) -> np.ndarray:
    idx = np.arange(2**graph.n, dtype=np.int64)
    values = np.zeros(idx.size, dtype=np.int32)
    for u, v in graph.edges:
        values += ((idx >> (graph.n - 1 - u)) ^ (idx >> (graph.n - 1 - v))) & 1
    values.setflags(write=False)
    return values


def cut_values(graph: Graph) -> np.ndarray:
    """Cut value of every assignment, indexed with vertex 0 as the most significant bit."""
    if graph.n > MAX_BRUTE_FORCE_VERTICES:
        raise QaoaError(f"{graph.n} vertices exceeds the {MAX_BRUTE_FORCE_VERTICES}-vertex limit")
    return _cut_table(graph)


def brute_force_maxcut(graph: Graph) -> tuple[int, set[str]]:
    """Exhaustive optimum and every maximizing assignment."""
    table = cut_values(graph)
    best = int(table.max()) if table.size else 0
    return best, {bitstring(int(i), graph.n) for i in np.flatnonzero(table == best)}


def expected_cost(dist: Mapping[str, float], graph: Graph) -> float:
    """``sum_b P(b) * cut_value(b)``; signed entries are allowed."""
    if dist and key_length(dist) != graph.n:
        raise QaoaError("bitstring length does not match the graph")
    return float(sum(p * cut_value(graph, b) for b, p in dist.items()))


def rank_answer(dist: Mapping[str, float], graph: Graph) -> str:
    """Classify the most probable bitstring as best, second, third or wrong.

    Ties in probability go to the lexicographically smallest bitstring.  The
    rank is the position of its cut value among the graph's distinct
    achievable cut values, largest first.
    """
    if not dist:
        raise QaoaError("empty distribution")
    top = max(dist.values())
    answer = min(b for b, p in dist.items() if p == top)
    levels = sorted(set(cut_values(graph).tolist()), reverse=True)
    pos = levels.index(cut_value(graph, answer))
    return RANK_LABELS[pos] if pos < len(RANK_LABELS) else "wrong"


# -- circuits ----------------------------------------------------------------


@dataclass(frozen=True)
class QaoaParams:
    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if len(self.gammas) != len(self.betas):
            raise QaoaError("gammas and betas must have equal length")
        if not self.gammas:
            raise QaoaError("need at least one QAOA layer")
        if not all(math.isfinite(x) for x in self.gammas + self.betas):
            raise QaoaError("QAOA angles must be finite")

    @property
    def p(self) -> int:
        return len(self.gammas)

    def to_vector(self) -> np.ndarray:
        return np.array(self.gammas + self.betas)

    @classmethod
    def from_vector(cls, theta) -> "QaoaParams":
        theta = np.asarray(theta, dtype=float).ravel()
        if theta.size % 2:
            raise QaoaError("parameter vector needs an even length")
        p = theta.size // 2
        return cls(tuple(theta[:p]), tuple(theta[p:]))


def cascade_order(graph: Graph) -> list[tuple[int, int]]:
    """Edges grouped layer pair by layer pair, so a hub's wire is only touched by one block at a time."""
    if graph.layers is None:
        return list(graph.edges)
    layer = graph.layer_of()
    return sorted(graph.edges, key=lambda e: (min(layer[e[0]], layer[e[1]]), e))


def _assemble(graph: Graph, params: QaoaParams, cut_hubs: Sequence[int] = ()) -> Circuit:
    layer = graph.layer_of()
    order = cascade_order(graph)
    pending = set(cut_hubs)
    ops: list = [Gate("h", (q,)) for q in range(graph.n)]
    cut_id = 0
    for gamma, beta in zip(params.gammas, params.betas):
        for u, v in order:
            for h in (u, v):
                other = v if h == u else u
                if h in pending and layer[other] > layer[h]:
                    ops.append(CutMarker(cut_id, h))
                    cut_id += 1
                    pending.discard(h)
            ops += [Gate("cx", (u, v)), Gate("rz", (v,), (2 * gamma,)), Gate("cx", (u, v))]
        ops += [Gate("rx", (q,), (2 * beta,)) for q in range(graph.n)]
    ops += measure_all(graph.n)
    return Circuit(graph.n, graph.n, tuple(ops))


def build_qaoa_circuit(
    graph: Graph, params: QaoaParams, device_limit: int | None = None
) -> Circuit:
    """H layer, then per QAOA layer ``CX RZ(2 gamma) CX`` per edge and ``RX(2 beta)`` mixers.

    With ``device_limit`` set and more vertices than the device holds, cut
    markers go on the fewest hub wires (between their incoming and outgoing
    edge groups) that bring every fragment within the limit.

    Raises:
        QaoaError: no hub selection meets the limit.
    """
    if device_limit is None or graph.n <= device_limit:
        return _assemble(graph, params)
    if params.p > 1:
        raise QaoaError("device limit infeasible: hub cuts only separate a single QAOA layer")
    hubs = graph.hubs()
    for r in range(1, len(hubs) + 1):
        for chosen in itertools.combinations(hubs, r):
            circ = _assemble(graph, params, chosen)
            try:
                fragment(circ, device_limit)
            except FragmentationError:
                continue
            return circ
    raise QaoaError(f"device limit {device_limit} infeasible for graph {graph.name or graph.n}")


# -- SPSA --------------------------------------------------------------------


@dataclass(frozen=True)
class SpsaConfig:
    a: float = 0.2
    c: float = 0.15
    A: float = 10.0
    alpha: float = 0.602
    gamma_exp: float = 0.101
    max_iter: int = 60
    seed: int | None = None

    def __post_init__(self):
        if self.a <= 0 or self.c <= 0:
            raise QaoaError("SPSA gains a and c must be positive")
        if not (0 < self.alpha < 1 and 0 < self.gamma_exp < 1):
            raise QaoaError("SPSA exponents must lie in (0, 1)")
        if self.max_iter < 0:
            raise QaoaError("max_iter must be non-negative")

    def a_k(self, k: int) -> float:
        return self.a / (self.A + k + 1) ** self.alpha

    def c_k(self, k: int) -> float:
        return self.c / (k + 1) ** self.gamma_exp


@dataclass
class SpsaResult:
    best_params: np.ndarray
    best_value: float
    trajectory: list[np.ndarray]  # iterates theta_0 .. theta_K
    values: list[float] = field(default_factory=list)  # every objective evaluation, in order
    evaluations: int = 0


def spsa_minimize(
    objective: Callable[[np.ndarray], float], theta0, config: SpsaConfig = SpsaConfig()
) -> SpsaResult:
    """Two-sided SPSA; returns the best evaluated point and the iterate path.

    When ``max_iter`` is 0 the objective is never called and ``theta0`` is
    returned with value ``nan``.
    """
    theta = np.array(theta0, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise QaoaError("initial parameters must be finite")
    rng = np.random.default_rng(config.seed)
    best, best_value = theta.copy(), math.nan
    trajectory, values = [theta.copy()], []
    for k in range(config.max_iter):
        ck = config.c_k(k)
        delta = rng.choice((-1.0, 1.0), size=theta.shape)
        plus, minus = theta + ck * delta, theta - ck * delta
        for point in (plus, minus):
            val = float(objective(point))
            if not math.isfinite(val):
                raise QaoaError(f"objective returned {val} at iteration {k}, point {point.tolist()}")
            values.append(val)
            if not val >= best_value:  # also true while best_value is nan
                best, best_value = point.copy(), val
        grad = (values[-2] - values[-1]) / (2 * ck) * delta
        theta = theta - config.a_k(k) * grad
        trajectory.append(theta.copy())
    return SpsaResult(best, best_value, trajectory, values, len(values))


# -- end-to-end runs ---------------------------------------------------------


@dataclass
class QaoaRun:
    graph: str
    method: str
    shots: int
    seed: int | None
    params: QaoaParams
    answer: str
    rank: str
    expected_cost: float
    distribution: dict[str, float]
    spsa: SpsaResult


class _Estimator:
    """Shot-limited estimate of the cut-value expectation under one method."""

    def __init__(self, graph, method, shots, noise, device_limit, rng):
        if method not in METHODS:
            raise QaoaError(f"unknown method {method!r}; expected one of {METHODS}")
        self.graph, self.method, self.shots = graph, method, shots
        self.noise, self.rng = noise, rng
        self.limit = device_limit if method != "uncut" else None
        self.table = cut_values(graph).astype(float)

    def quasi(self, params: QaoaParams) -> np.ndarray:
        circ = build_qaoa_circuit(self.graph, params, self.limit)
        if self.method == "uncut":
            idx, m = sample_indices(circ, self.shots, self.rng, self.noise)
            return np.bincount(idx, minlength=2**m) / self.shots
        fs = fragment(circ, self.limit)
        if self.method == "pauli_cut":
            return to_array(run_pauli_cut(fs, self.shots, self.rng, self.noise), self.graph.n)
        return randomized_cut_samples(fs, self.shots, self.rng, "clifford", self.noise).estimate

    def negative_cost(self, theta) -> float:
        return -float(self.quasi(QaoaParams.from_vector(theta)) @ self.table)


def run_qaoa(
    graph: Graph,
    method: str = "uncut",
    shots: int = 4000,
    noise: NoiseModel | None = None,
    spsa: SpsaConfig | None = None,
    p: int = 1,
    seed: int | None = None,
    device_limit: int | None = DEFAULT_DEVICE_LIMIT,
    theta0=None,
) -> QaoaRun:
    """Optimize QAOA angles with SPSA on shot-limited estimates, then rank the answer.

    Every objective evaluation spends ``shots``.  The answer comes from one
    further execution at the best parameters; cut methods clip and
    renormalize it first.  ``theta0`` defaults to uniform draws on [0, pi).
    """
    ss = np.random.SeedSequence(seed)
    init_ss, spsa_ss, exec_ss = ss.spawn(3)
    if theta0 is None:
        theta0 = np.random.default_rng(init_ss).uniform(0.0, math.pi, size=2 * p)
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.size != 2 * p:
        raise QaoaError(f"theta0 needs {2 * p} entries for p={p}")
    spsa = spsa or SpsaConfig()
    if spsa.seed is None:
        spsa = SpsaConfig(spsa.a, spsa.c, spsa.A, spsa.alpha, spsa.gamma_exp, spsa.max_iter,
                          int(spsa_ss.generate_state(1)[0]))
    est = _Estimator(graph, method, shots, noise, device_limit, as_rng(exec_ss))
    result = spsa_minimize(est.negative_cost, theta0, spsa)
    params = QaoaParams.from_vector(result.best_params)
    quasi = est.quasi(params)
    cost = float(quasi @ est.table)
    raw = {bitstring(int(i), graph.n): float(quasi[i]) for i in np.flatnonzero(quasi)}
    dist = raw if method == "uncut" else clip_and_normalize(raw)
    return QaoaRun(
        graph=graph.name,
        method=method,
        shots=shots,
        seed=seed,
        params=params,
        answer=min(b for b, v in dist.items() if v == max(dist.values())),
        rank=rank_answer(dist, graph),
        expected_cost=cost,
        distribution=dist,
        spsa=result,
    )
