"""Multiscale community detection by optimizing random-walk stability.

For a connected undirected graph with adjacency A, degrees d and total
weight 2m, the stationary distribution is pi = d / 2m and the walk matrix
is M = D^-1 A. The stability of a partition H at Markov time t is

    r(t, H) = sum_c [P_t]_cc - sum_c pi_c^2

where P_t aggregates pi_i * [M_t]_ij over community blocks. Two propagators
are supported: the linearized walk M_t = (1 - t) I + t M (sparse, scales to
large graphs) and the exponential walk M_t = expm(-t (I - M)) (dense).

Partitions are found per t by a Louvain-style greedy optimizer; scales that
are reproducible across runs and stable across neighboring t form plateaus,
from which representative partitions are selected.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from joblib import Parallel, delayed
from scipy.linalg import expm
from sklearn.base import BaseEstimator

from ._kernels import louvain_sweep, within_weight
from .graph import SimilarityGraph, mst_knn
from .partitions import Partition, variation_of_information

VARIANTS = ("linearized", "exponential")
EXPONENTIAL_NODE_LIMIT = 5000
MOVE_TOLERANCE = 1e-12
T_MIN = 1e-2
T_MAX = 1e2
N_TIME_POINTS = 200
N_RUNS = 50
VI_THRESHOLD_FACTOR = 0.1


@dataclass
class RandomWalkContext:
    """Precomputed walk quantities shared by every stability evaluation."""

    graph: SimilarityGraph
    stationary: np.ndarray
    norm_adjacency: sp.csr_matrix
    transition: sp.csr_matrix

    @property
    def n_nodes(self) -> int:
        return self.graph.n_nodes


def build_context(graph: SimilarityGraph) -> RandomWalkContext:
    """Derive stationary distribution and walk matrices from a graph.

    The graph must be connected with positive total weight; the stationary
    distribution then exists and every degree is positive.
    """
    if not graph.is_connected():
        from .graph import GraphConnectivityError

        raise GraphConnectivityError("stability requires a connected graph")
    if graph.n_edges == 0:
        raise ValueError("graph has no edges; random walk is undefined")
    adjacency = graph.adjacency()
    degrees = graph.degrees()
    two_m = degrees.sum()
    pi = degrees / two_m
    norm_adjacency = (adjacency / two_m).tocsr()
    transition = sp.diags(1.0 / degrees) @ adjacency
    return RandomWalkContext(graph, pi, norm_adjacency, transition.tocsr())


def _check_partition(ctx: RandomWalkContext, partition: Partition) -> None:
    if partition.n_items != ctx.n_nodes:
        raise ValueError(
            f"partition covers {partition.n_items} items, graph has {ctx.n_nodes}"
        )


def _cluster_pi_square(ctx: RandomWalkContext, labels: np.ndarray) -> float:
    pi_c = np.bincount(labels, weights=ctx.stationary)
    return float(pi_c @ pi_c)


def _stability_linearized(ctx: RandomWalkContext, labels: np.ndarray, t: float) -> float:
    g = ctx.graph
    same = within_weight(g.edge_i, g.edge_j, g.weights, labels)
    within = 2.0 * same / g.total_weight
    return (1.0 - t) + t * within - _cluster_pi_square(ctx, labels)


def _exponential_coupling(ctx: RandomWalkContext, t: float) -> np.ndarray:
    """Dense symmetric matrix pi_i * [expm(-t (I - M))]_ij."""
    n = ctx.n_nodes
    if n > EXPONENTIAL_NODE_LIMIT:
        raise ValueError(
            f"exponential variant is dense and capped at {EXPONENTIAL_NODE_LIMIT} "
            f"nodes; got {n}"
        )
    generator = ctx.transition.toarray()
    generator[np.diag_indices(n)] -= 1.0
    flow = ctx.stationary[:, None] * expm(t * generator)
    # exact detailed balance makes this symmetric; remove roundoff skew
    return 0.5 * (flow + flow.T)


def _block_trace(flow: np.ndarray, labels: np.ndarray) -> float:
    n_clusters = int(labels.max()) + 1
    # sum rows by cluster, then pick for each column its own cluster's row
    rowsum = np.zeros((n_clusters, flow.shape[0]))
    np.add.at(rowsum, labels, flow)
    return float(rowsum[labels, np.arange(flow.shape[0])].sum())


def _stability_exponential(ctx, labels: np.ndarray, flow: np.ndarray) -> float:
    return _block_trace(flow, labels) - _cluster_pi_square(ctx, labels)


def stability(
    ctx: RandomWalkContext,
    partition: Partition,
    t: float,
    variant: str = "linearized",
) -> float:
    """Stability r(t, H) of a partition under the chosen walk propagator."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if t < 0:
        raise ValueError("Markov time t must be non-negative")
    _check_partition(ctx, partition)
    labels = partition.canonical().labels
    if variant == "linearized":
        return _stability_linearized(ctx, labels, t)
    return _stability_exponential(ctx, labels, _exponential_coupling(ctx, t))


def _relabel_and_aggregate(comm, coupling, pi, dense: bool):
    uniq, new = np.unique(comm, return_inverse=True)
    c = uniq.shape[0]
    n = comm.shape[0]
    if dense:
        onehot = np.zeros((n, c))
        onehot[np.arange(n), new] = 1.0
        agg = onehot.T @ coupling @ onehot
    else:
        onehot = sp.csr_matrix(
            (np.ones(n), (np.arange(n), new)), shape=(n, c)
        )
        agg = (onehot.T @ coupling @ onehot).tocsr()
        agg.sort_indices()
    return new, agg, np.bincount(new, weights=pi, minlength=c)


def _sweep_dense(flow, pi, comm, comm_pi, comm_size, free_ids, order, tol):
    """One dense Louvain pass; mirrors the sparse kernel's move rules."""
    n_moves = 0
    n_slots = comm_pi.shape[0]
    for u in order:
        a = comm[u]
        pi_u = pi[u]
        w = np.bincount(comm, weights=flow[u], minlength=n_slots)
        w[a] -= flow[u, u]
        base = w[a] - pi_u * (comm_pi[a] - pi_u)
        gains = 2.0 * (w - pi_u * comm_pi - base)
        gains[a] = -np.inf
        gains[comm_size == 0] = -np.inf
        best_c = int(np.argmax(gains))
        best_delta = gains[best_c]
        if comm_size[a] > 1 and free_ids and -2.0 * base > max(best_delta, tol):
            best_c = free_ids.pop()
            best_delta = -2.0 * base
        if best_delta <= tol:
            continue
        comm[u] = best_c
        comm_pi[a] -= pi_u
        comm_pi[best_c] += pi_u
        comm_size[a] -= 1
        comm_size[best_c] += 1
        if comm_size[a] == 0:
            free_ids.append(a)
        n_moves += 1
    return n_moves


def _louvain(coupling, pi, t, rng, tol, dense, on_pass=None):
    """Greedy move passes plus aggregation until no move improves quality.

    ``coupling`` is the symmetric matrix whose within-community sum (plus the
    stationary term) defines quality: A/2m for the linearized walk (with the
    explicit t factor), or the exponential flow with t baked in. Returns the
    node-to-community array over the original nodes.
    """
    n0 = pi.shape[0]
    node_to_comm = np.arange(n0)
    cur = coupling
    cur_pi = pi.astype(np.float64).copy()
    while True:
        n = cur_pi.shape[0]
        comm = np.arange(n)
        comm_pi = cur_pi.copy()
        comm_size = np.ones(n, dtype=np.int64)
        level_moves = 0
        if dense:
            free_list: list[int] = []
            while True:
                order = rng.permutation(n)
                moves = _sweep_dense(
                    cur, cur_pi, comm, comm_pi, comm_size, free_list, order, tol
                )
                level_moves += moves
                if on_pass is not None:
                    on_pass(comm[node_to_comm])
                if moves == 0:
                    break
        else:
            free_ids = np.zeros(n, dtype=np.int64)
            free_top = 0
            w_buf = np.zeros(n)
            seen = np.full(n, -1, dtype=np.int64)
            touched = np.zeros(n, dtype=np.int64)
            stamp = 0
            while True:
                order = rng.permutation(n)
                moves, free_top, stamp = louvain_sweep(
                    cur.indptr,
                    cur.indices,
                    cur.data,
                    t,
                    cur_pi,
                    comm,
                    comm_pi,
                    comm_size,
                    free_ids,
                    free_top,
                    order,
                    w_buf,
                    seen,
                    touched,
                    stamp,
                    tol,
                )
                level_moves += moves
                if on_pass is not None:
                    on_pass(comm[node_to_comm])
                if moves == 0:
                    break
        if level_moves == 0:
            break
        new, cur, cur_pi = _relabel_and_aggregate(comm, cur, cur_pi, dense)
        node_to_comm = new[node_to_comm]
        if cur_pi.shape[0] == n:
            break
    return node_to_comm


def _make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def louvain_optimize(
    ctx: RandomWalkContext,
    t: float,
    variant: str = "linearized",
    seed=0,
    tol: float = MOVE_TOLERANCE,
    check_invariants: bool = False,
) -> tuple[Partition, float]:
    """One stochastic greedy optimization of stability at Markov time t.

    Returns the found partition and its stability. The result never scores
    below the all-singletons start, and with ``check_invariants`` every pass
    is asserted to be non-decreasing in stability.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if t < 0:
        raise ValueError("Markov time t must be non-negative")
    rng = _make_rng(seed)
    if variant == "exponential":
        flow = _exponential_coupling(ctx, t)
        labels = _louvain_with_checks(ctx, flow, t, rng, tol, True, check_invariants)
        part = Partition.from_labels(labels)
        value = _stability_exponential(ctx, part.labels, flow)
    else:
        labels = _louvain_with_checks(ctx, None, t, rng, tol, False, check_invariants)
        part = Partition.from_labels(labels)
        value = _stability_linearized(ctx, part.labels, t)
    start = stability(ctx, Partition(np.arange(ctx.n_nodes)), t, variant) if check_invariants else None
    if start is not None and value < start - 1e-9:
        raise AssertionError("optimizer returned worse than the singleton start")
    return part, value


def _louvain_with_checks(ctx, flow, t, rng, tol, dense, check):
    if dense:
        coupling, pi = flow, ctx.stationary
    else:
        coupling, pi = ctx.norm_adjacency, ctx.stationary
    on_pass = None
    if check:
        state = {"last": -np.inf}

        def on_pass(global_labels, _state=state):
            part = Partition.from_labels(global_labels)
            if dense:
                value = _stability_exponential(ctx, part.labels, flow)
            else:
                value = _stability_linearized(ctx, part.labels, t)
            if value < _state["last"] - 1e-9:
                raise AssertionError(
                    f"stability decreased across a pass: {_state['last']} -> {value}"
                )
            _state["last"] = value

    return _louvain(coupling, pi, t, rng, tol, dense, on_pass)


@dataclass
class MSScanResult:
    """Per-t best partitions and reproducibility diagnostics of a scan."""

    t_grid: np.ndarray
    partitions: list[Partition]
    stability: np.ndarray
    n_clusters: np.ndarray
    ensemble_vi: np.ndarray
    cross_vi: np.ndarray

    @property
    def n_times(self) -> int:
        return int(self.t_grid.shape[0])

    @property
    def n_nodes(self) -> int:
        return self.partitions[0].n_items if self.partitions else 0


def default_t_grid(
    t_min: float = T_MIN, t_max: float = T_MAX, n_points: int = N_TIME_POINTS
) -> np.ndarray:
    if t_min <= 0 or t_max <= t_min:
        raise ValueError("need 0 < t_min < t_max")
    return np.logspace(np.log10(t_min), np.log10(t_max), n_points)


def _mean_pairwise_vi(partitions: list[Partition]) -> float:
    """Mean VI over all unordered run pairs, grouping identical partitions."""
    n = len(partitions)
    if n < 2:
        return 0.0
    groups: dict[bytes, list] = {}
    for p in partitions:
        canon = p.canonical()
        groups.setdefault(canon.labels.tobytes(), [0, canon])
        groups[canon.labels.tobytes()][0] += 1
    reps = list(groups.values())
    total = 0.0
    for a in range(len(reps)):
        for b in range(a + 1, len(reps)):
            vi = variation_of_information(reps[a][1], reps[b][1])
            total += reps[a][0] * reps[b][0] * vi
    return total / (n * (n - 1) / 2.0)


def _scan_single_t(ctx, t, t_idx, n_runs, seed, variant, tol):
    flow = _exponential_coupling(ctx, t) if variant == "exponential" else None
    partitions = []
    values = np.empty(n_runs)
    for run in range(n_runs):
        rng = _make_rng(np.random.SeedSequence(entropy=(seed, t_idx, run)))
        labels = _louvain_with_checks(
            ctx, flow, t, rng, tol, variant == "exponential", False
        )
        part = Partition.from_labels(labels)
        if variant == "exponential":
            values[run] = _stability_exponential(ctx, part.labels, flow)
        else:
            values[run] = _stability_linearized(ctx, part.labels, t)
        partitions.append(part)
    best = int(np.argmax(values))
    return (
        partitions[best],
        float(values[best]),
        _mean_pairwise_vi(partitions),
    )


def scan(
    ctx: RandomWalkContext,
    t_grid=None,
    n_runs: int = N_RUNS,
    seed: int = 0,
    variant: str = "linearized",
    n_jobs: int = 1,
    tol: float = MOVE_TOLERANCE,
) -> MSScanResult:
    """Optimize stability at every Markov time in the grid.

    Per t the optimizer runs ``n_runs`` times with independent seeds; the
    best-scoring partition wins (ties go to the lowest run index) and the
    mean pairwise VI across runs measures reproducibility. Results are
    independent of ``n_jobs``: every run's seed depends only on
    (seed, t index, run index).
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if t_grid is None:
        t_grid = default_t_grid()
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValueError("t_grid must be a non-empty 1d array")
    if np.any(t_grid < 0):
        raise ValueError("Markov times must be non-negative")
    if t_grid.size > 1 and np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    if n_runs < 2:
        raise ValueError("n_runs must be >= 2")

    rows = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_scan_single_t)(ctx, float(t), i, n_runs, seed, variant, tol)
        for i, t in enumerate(t_grid)
    )
    partitions = [r[0] for r in rows]
    values = np.array([r[1] for r in rows])
    ensemble_vi = np.array([r[2] for r in rows])
    n_clusters = np.array([p.n_clusters for p in partitions], dtype=np.int64)

    n_t = t_grid.shape[0]
    cross = np.zeros((n_t, n_t))
    keys = [p.canonical().labels.tobytes() for p in partitions]
    for a in range(n_t):
        for b in range(a + 1, n_t):
            if keys[a] == keys[b]:
                continue
            cross[a, b] = cross[b, a] = variation_of_information(
                partitions[a], partitions[b]
            )
    return MSScanResult(t_grid, partitions, values, n_clusters, ensemble_vi, cross)


@dataclass
class SelectedScale:
    """One chosen Markov scale with its representative partition."""

    label: str
    t: float
    t_index: int
    n_clusters: int
    ensemble_vi: float
    plateau: tuple[int, int]
    partition: Partition


@dataclass
class ScaleSelection:
    scales: list[SelectedScale]
    vi_threshold: float
    used_fallback: bool = False

    def by_label(self, label: str) -> SelectedScale:
        for s in self.scales:
            if s.label == label:
                return s
        raise KeyError(f"no selected scale labeled {label!r}")


def _plateau_blocks(result: MSScanResult, threshold: float):
    """Maximal contiguous runs with constant cluster count and low cross-VI."""
    blocks = []
    i = 0
    n_t = result.n_times
    while i < n_t:
        j = i
        while (
            j + 1 < n_t
            and result.n_clusters[j + 1] == result.n_clusters[i]
            and all(result.cross_vi[j + 1, k] < threshold for k in range(i, j + 1))
        ):
            j += 1
        blocks.append((i, j))
        i = j + 1
    return blocks


def _scale_labels(n: int) -> list[str]:
    if n == 1:
        return ["coarse"]
    if n == 2:
        return ["coarse", "fine"]
    if n == 3:
        return ["coarse", "medium", "fine"]
    return ["coarse"] + ["other"] * (n - 2) + ["fine"]


def select_robust_scales(
    result: MSScanResult,
    n_scales: int = 3,
    vi_threshold: float | None = None,
) -> ScaleSelection:
    """Pick partitions from the longest reproducible plateaus of a scan.

    A plateau is a maximal contiguous block of t values with a constant
    cluster count and pairwise cross-VI below the threshold (default
    0.1 * ln N). Each plateau is represented by its minimum-ensemble-VI
    point; plateaus are ranked by their length in log t, then by that VI.
    When every block is a single point, ranking falls back to local minima
    of the ensemble VI curve. Returned scales are ordered by descending t
    and labeled coarse / medium / fine.
    """
    if n_scales < 1:
        raise ValueError("n_scales must be >= 1")
    if vi_threshold is None:
        vi_threshold = VI_THRESHOLD_FACTOR * np.log(result.n_nodes)
    blocks = _plateau_blocks(result, vi_threshold)
    log_t = np.log(np.maximum(result.t_grid, np.finfo(float).tiny))

    candidates = []
    for i, j in blocks:
        rel = int(np.argmin(result.ensemble_vi[i : j + 1]))
        k = i + rel
        length = log_t[j] - log_t[i]
        candidates.append((-length, result.ensemble_vi[k], k, (i, j)))

    used_fallback = False
    if not any(j > i for i, j in blocks):
        used_fallback = True
        warnings.warn(
            "no plateau longer than one grid point; falling back to "
            "ensemble-VI local minima",
            stacklevel=2,
        )
        evi = result.ensemble_vi
        candidates = []
        for k in range(result.n_times):
            left_ok = k == 0 or evi[k] <= evi[k - 1]
            right_ok = k == result.n_times - 1 or evi[k] <= evi[k + 1]
            if left_ok and right_ok:
                candidates.append((evi[k], 0.0, k, (k, k)))

    candidates.sort(key=lambda c: (c[0], c[1], c[2]))
    chosen = candidates[:n_scales]
    if len(chosen) < n_scales:
        warnings.warn(
            f"only {len(chosen)} robust scales available, {n_scales} requested",
            stacklevel=2,
        )
    chosen.sort(key=lambda c: -result.t_grid[c[2]])
    labels = _scale_labels(len(chosen))
    scales = [
        SelectedScale(
            label=labels[pos],
            t=float(result.t_grid[k]),
            t_index=int(k),
            n_clusters=int(result.n_clusters[k]),
            ensemble_vi=float(result.ensemble_vi[k]),
            plateau=(int(block[0]), int(block[1])),
            partition=result.partitions[k],
        )
        for pos, (_, _, k, block) in enumerate(chosen)
    ]
    return ScaleSelection(scales, float(vi_threshold), used_fallback)


def save_scan(result: MSScanResult, path) -> None:
    """Write the per-t scan summary as CSV."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "n_clusters", "stability", "ensemble_vi"])
        for i in range(result.n_times):
            writer.writerow(
                [
                    f"{result.t_grid[i]:.17g}",
                    int(result.n_clusters[i]),
                    f"{result.stability[i]:.17g}",
                    f"{result.ensemble_vi[i]:.17g}",
                ]
            )


def save_cross_vi(result: MSScanResult, path) -> None:
    """Write the t-by-t cross-VI matrix as headerless CSV."""
    np.savetxt(path, result.cross_vi, delimiter=",", fmt="%.17g")


def save_scan_partitions(result: MSScanResult, path) -> None:
    """Write best partitions as CSV: one node per row, one column per t."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node"] + [f"t{i}" for i in range(result.n_times)])
        mat = np.stack([p.labels for p in result.partitions], axis=1)
        for node in range(mat.shape[0]):
            writer.writerow([node] + mat[node].tolist())


def load_scan(scan_path, cross_vi_path, partitions_path) -> MSScanResult:
    """Rebuild a scan result from the three CSV artifacts."""
    with open(scan_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["t", "n_clusters", "stability", "ensemble_vi"]:
            raise ValueError(f"{scan_path}: unexpected scan header {header}")
        rows = [row for row in reader if row]
    t_grid = np.array([float(r[0]) for r in rows])
    n_clusters = np.array([int(r[1]) for r in rows], dtype=np.int64)
    values = np.array([float(r[2]) for r in rows])
    ensemble_vi = np.array([float(r[3]) for r in rows])
    cross = np.loadtxt(cross_vi_path, delimiter=",", ndmin=2)
    with open(partitions_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        label_rows = [[int(x) for x in row[1:]] for row in reader if row]
    mat = np.array(label_rows, dtype=np.int64)
    partitions = [Partition.from_labels(mat[:, i]) for i in range(mat.shape[1])]
    return MSScanResult(t_grid, partitions, values, n_clusters, ensemble_vi, cross)


class MarkovStabilityClustering(BaseEstimator):
    """Multiscale graph clustering estimator over document embeddings.

    ``fit`` accepts an embedding (EmbeddingMatrix or array, sparsified via
    mst_knn) or an already-built SimilarityGraph. After fitting,
    ``selection_`` holds the chosen scales and ``labels_`` maps each scale
    label to its cluster assignment array.
    """

    def __init__(
        self,
        k: int = 13,
        weight_floor: float = 1e-6,
        t_min: float = T_MIN,
        t_max: float = T_MAX,
        n_times: int = N_TIME_POINTS,
        n_runs: int = N_RUNS,
        variant: str = "linearized",
        n_scales: int = 3,
        vi_threshold_factor: float = VI_THRESHOLD_FACTOR,
        random_state: int = 0,
        n_jobs: int = 1,
    ):
        self.k = k
        self.weight_floor = weight_floor
        self.t_min = t_min
        self.t_max = t_max
        self.n_times = n_times
        self.n_runs = n_runs
        self.variant = variant
        self.n_scales = n_scales
        self.vi_threshold_factor = vi_threshold_factor
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        if isinstance(X, SimilarityGraph):
            self.graph_ = X
        else:
            self.graph_ = mst_knn(X, k=self.k, weight_floor=self.weight_floor)
        self.context_ = build_context(self.graph_)
        self.t_grid_ = default_t_grid(self.t_min, self.t_max, self.n_times)
        self.scan_ = scan(
            self.context_,
            self.t_grid_,
            n_runs=self.n_runs,
            seed=self.random_state,
            variant=self.variant,
            n_jobs=self.n_jobs,
        )
        threshold = self.vi_threshold_factor * np.log(self.graph_.n_nodes)
        self.selection_ = select_robust_scales(
            self.scan_, n_scales=self.n_scales, vi_threshold=threshold
        )
        self.labels_ = {
            s.label: s.partition.labels.copy() for s in self.selection_.scales
        }
        return self

    def fit_predict(self, X, y=None, scale: str | None = None) -> np.ndarray:
        self.fit(X)
        if scale is None:
            scale = self.selection_.scales[0].label
        return self.labels_[scale]
