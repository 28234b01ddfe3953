"""Possibilistic fuzzy local-information c-means clustering.

The engine estimates, by alternating optimization, a soft partition of N
feature vectors into C clusters: a sum-to-one membership matrix, a
possibilistic typicality matrix (not sum-constrained, so a point far from
every center can be atypical of all clusters), cluster centers, and a
per-cluster typicality scale.  An optional spatial penalty couples each
point's membership to the memberships of its spatial neighbors, which
favors smooth label maps when the points are image sites.

Two switches recover the classic reductions with the same code path:
``radius=0`` disables the spatial penalty (possibilistic-fuzzy c-means),
``b=0`` pins every typicality at 1 (fuzzy local-information c-means), and
both together give plain fuzzy c-means.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

SCALE_FLOOR = 1e-12


class DegenerateClusterError(RuntimeError):
    """A cluster's center-update weights sum to zero."""

    def __init__(self, clusters):
        self.clusters = tuple(int(c) for c in clusters)
        super().__init__(f"degenerate cluster(s) {self.clusters}: "
                         "all center-update weights are zero")


@dataclass
class FeatureMatrix:
    """Clustering input: N feature vectors plus their spatial positions.

    ``points`` is (N, d) and ``coords`` is (N, 2) holding (row, col) pixel
    positions.  Coordinates only matter when the neighborhood radius is
    positive; they must be finite either way.
    """

    points: np.ndarray
    coords: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.coords = np.asarray(self.coords, dtype=float)
        if self.points.ndim != 2 or self.points.shape[0] < 1:
            raise ValueError("points must be a nonempty (N, d) array")
        if self.coords.shape != (self.points.shape[0], 2):
            raise ValueError("coords must be (N, 2) to match points")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("non-finite feature values")
        if not np.all(np.isfinite(self.coords)):
            raise ValueError("non-finite coordinates")

    @property
    def n_points(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]


@dataclass
class NeighborhoodGraph:
    """Spatial neighbor weights, symmetric, with no self-edges.

    ``weights`` is an (N, N) matrix with w[n, k] = 1/(dist(n, k) + 1) for
    every neighbor pair and 0 elsewhere; dense for the all-pairs case,
    CSR for finite radii, and None when there are no edges at all.
    """

    weights: object
    n_points: int

    @property
    def is_empty(self):
        return self.weights is None

    def neighbors(self, n):
        """Neighbor list of point n as [(index, weight), ...]."""
        if self.weights is None:
            return []
        if sparse.issparse(self.weights):
            row = self.weights[[n], :].tocoo()
            return sorted(zip(row.coords[1].tolist(), row.data.tolist()))
        ks = np.flatnonzero(self.weights[n])
        return list(zip(ks.tolist(), self.weights[n, ks].tolist()))


@dataclass
class ClusterConfig:
    """Knobs of the clustering engine.

    a and b balance the membership and typicality terms of the objective,
    m > 1 and q > 1 are their fuzzifiers, radius is the spatial
    neighborhood radius in pixels (0 disables the spatial penalty, inf
    puts every point in every neighborhood).  ``freeze_scales`` keeps the
    typicality scales at their initial values instead of re-estimating
    them each iteration.
    """

    n_clusters: int = 3
    a: float = 14.0
    b: float = 0.3
    m: float = 1.8
    q: float = 2.2
    epsilon: float = 1e-6
    max_iters: int = 500
    radius: float = math.inf
    seed: int = 0
    freeze_scales: bool = False

    def __post_init__(self):
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be >= 1")
        if self.m <= 1 or self.q <= 1:
            raise ValueError("fuzzifiers m and q must be > 1")
        if self.a < 0 or self.b < 0 or self.a + self.b == 0:
            raise ValueError("weights a, b must be >= 0 with a + b > 0")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.radius < 0:
            raise ValueError("radius must be >= 0 (inf allowed)")


@dataclass
class PartitionState:
    """Soft partition: memberships U (C, N), typicalities T (C, N),
    centers (C, d), and per-cluster typicality scales (C,)."""

    memberships: np.ndarray
    typicalities: np.ndarray
    centers: np.ndarray
    scales: np.ndarray

    @property
    def n_clusters(self):
        return self.memberships.shape[0]

    @property
    def n_points(self):
        return self.memberships.shape[1]


@dataclass
class RunDiagnostics:
    iterations: int
    objective_trace: np.ndarray
    max_delta_trace: np.ndarray
    converged: bool
    reseeds: list = field(default_factory=list)


def _sq_distances(centers, points):
    """(C, N) squared euclidean distances between centers and points."""
    return cdist(np.atleast_2d(centers), np.atleast_2d(points),
                 "sqeuclidean")


def build_neighborhoods(coords, radius):
    """Build the spatial neighbor graph for the given radius.

    Point k is a neighbor of n iff k != n and their euclidean coordinate
    distance is <= radius; each edge carries weight 1/(dist + 1).  A
    radius of 0 yields an empty graph (the spatial penalty vanishes
    identically, even for coincident coordinates), and an infinite radius
    yields the complete graph.
    """
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    if coords.shape[0] < 1:
        raise ValueError("coords must be nonempty")
    if not np.all(np.isfinite(coords)):
        raise ValueError("non-finite coordinates")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    n = coords.shape[0]
    if n == 1 or radius == 0:
        return NeighborhoodGraph(weights=None, n_points=n)
    if math.isinf(radius):
        w = 1.0 / (cdist(coords, coords) + 1.0)
        np.fill_diagonal(w, 0.0)
        return NeighborhoodGraph(weights=w, n_points=n)
    pairs = cKDTree(coords).query_pairs(radius, output_type="ndarray")
    if pairs.shape[0] == 0:
        return NeighborhoodGraph(weights=None, n_points=n)
    d = np.linalg.norm(coords[pairs[:, 0]] - coords[pairs[:, 1]], axis=1)
    w = 1.0 / (d + 1.0)
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    weights = sparse.csr_array(
        (np.concatenate([w, w]), (rows, cols)), shape=(n, n))
    return NeighborhoodGraph(weights=weights, n_points=n)


def initial_partition(data, config, center_indices=None):
    """Initial state: uniform memberships 1/C, all typicalities 1,
    centers drawn from the data without replacement using config.seed.

    ``center_indices`` overrides the seeded draw with explicit data-point
    indices (used for shared-initialization comparisons).
    """
    n, c = data.n_points, config.n_clusters
    if n < c:
        raise ValueError(f"need at least {c} points, got {n}")
    if center_indices is None:
        rng = np.random.default_rng(config.seed)
        center_indices = rng.choice(n, size=c, replace=False)
    else:
        center_indices = np.asarray(center_indices)
        if len(np.unique(center_indices)) != c:
            raise ValueError("center_indices must be C distinct indices")
    centers = data.points[center_indices].copy()
    memberships = np.full((c, n), 1.0 / c)
    typicalities = np.ones((c, n))
    scales = np.maximum(_sq_distances(centers, data.points).mean(axis=1),
                        SCALE_FLOOR)
    return PartitionState(memberships, typicalities, centers, scales)


def spatial_penalty(memberships, centers, data, graph, m):
    """Per-(cluster, point) penalty accumulated from spatial neighbors.

    Entry (c, n) sums, over the neighbors k of n, the neighbor weight
    times (1 - u_ck)^m times the squared distance of x_k to center c.  It
    is large for clusters the neighborhood does not support, so the
    membership update trades it off against the point's own distance.
    """
    c = memberships.shape[0]
    if graph.is_empty:
        return np.zeros((c, data.n_points))
    contrib = np.clip(1.0 - memberships, 0.0, None) ** m
    contrib = contrib * _sq_distances(centers, data.points)
    return contrib @ graph.weights   # weights are symmetric


def update_centers(memberships, typicalities, data, config):
    """Centers as the (a*u^m + b*t^q)-weighted mean of the data.

    Raises DegenerateClusterError when some cluster's weights sum to
    zero; ``run`` resolves that by re-seeding (see _reseed_centers).
    """
    w = (config.a * memberships ** config.m
         + config.b * typicalities ** config.q)
    denom = w.sum(axis=1)
    dead = np.flatnonzero(denom == 0.0)
    if dead.size:
        raise DegenerateClusterError(dead)
    return (w @ data.points) / denom[:, None]


def update_memberships(data, centers, penalty, m):
    """Membership update: u_cn normalizes (d^2_cn + penalty_cn)^(-1/(m-1))
    over clusters, so each column sums to one.

    Columns where some cluster has exactly zero distance-plus-penalty
    split their membership equally among those clusters.
    """
    d2 = _sq_distances(centers, data.points)
    if penalty is not None:
        d2 = d2 + penalty
    ref = d2.min(axis=0)
    singular = ref == 0.0
    # dividing by the per-column minimum leaves the ratios (hence the
    # result) unchanged but avoids overflow for tiny distances
    scaled = d2 / np.where(singular, 1.0, ref)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = scaled ** (-1.0 / (m - 1.0))
        u = inv / inv.sum(axis=0)
    if singular.any():
        z = (d2[:, singular] == 0.0).astype(float)
        u[:, singular] = z / z.sum(axis=0)
    return u


def update_scales(memberships, centers, data, m):
    """Per-cluster mean squared distance over hard-assigned points.

    Each point goes to its argmax-membership cluster (ties to the lowest
    index).  A cluster with no points, or a near-zero mean, falls back to
    the membership-weighted mean squared distance, floored at a small
    positive constant so the typicality update stays defined.
    """
    c, n = memberships.shape
    d2 = _sq_distances(centers, data.points)
    assign = memberships.argmax(axis=0)
    counts = np.bincount(assign, minlength=c).astype(float)
    sums = np.bincount(assign, weights=d2[assign, np.arange(n)], minlength=c)
    with np.errstate(invalid="ignore"):
        hard = sums / counts
    um = memberships ** m
    wsum = um.sum(axis=1)
    weighted = np.where(wsum > 0.0, (um * d2).sum(axis=1)
                        / np.where(wsum > 0.0, wsum, 1.0), SCALE_FLOOR)
    bad = (counts == 0) | ~(hard >= SCALE_FLOOR)
    return np.maximum(np.where(bad, weighted, hard), SCALE_FLOOR)


def update_typicalities(data, centers, scales, b, q):
    """Typicality update: t_cn = 1/(1 + (b d^2_cn / scale_c)^(1/(q-1))).

    Equal to 1 exactly when b*d^2 is zero, strictly decreasing in the
    distance for b > 0, and floored at the smallest positive normal float
    so values stay in (0, 1].
    """
    d2 = _sq_distances(centers, data.points)
    with np.errstate(over="ignore"):
        z = (b * d2 / scales[:, None]) ** (1.0 / (q - 1.0))
        t = 1.0 / (1.0 + z)
    return np.maximum(t, np.finfo(float).tiny)


def objective(state, data, graph, config):
    """Value of the clustering objective for the given state.

    Sums a*u^m*(d^2 + penalty) + b*t^q*d^2 over clusters and points, plus
    the per-cluster scale times the summed (1 - t)^q typicality slack.
    """
    d2 = _sq_distances(state.centers, data.points)
    pen = spatial_penalty(state.memberships, state.centers, data, graph,
                          config.m)
    u_term = config.a * state.memberships ** config.m * (d2 + pen)
    t_term = config.b * state.typicalities ** config.q * d2
    slack = (state.scales[:, None]
             * (1.0 - state.typicalities) ** config.q).sum()
    return float(u_term.sum() + t_term.sum() + slack)


def _reseed_centers(memberships, typicalities, data, config, centers_out):
    """Center update that replaces degenerate clusters with the data
    points having the lowest maximum membership.  Returns the list of
    re-seeded cluster indices."""
    w = (config.a * memberships ** config.m
         + config.b * typicalities ** config.q)
    denom = w.sum(axis=1)
    dead = np.flatnonzero(denom == 0.0)
    alive = denom > 0.0
    centers_out[alive] = (w[alive] @ data.points) / denom[alive, None]
    if dead.size:
        order = np.argsort(memberships.max(axis=0), kind="stable")
        for rank, c in enumerate(dead):
            centers_out[c] = data.points[order[rank]]
    return [int(c) for c in dead]


def run(data, config, center_indices=None, on_iteration=None):
    """Cluster ``data`` by alternating optimization.

    Parameters
    ----------
    data : FeatureMatrix
    config : ClusterConfig
    center_indices : optional explicit initial-center indices
    on_iteration : optional callable invoked with (iteration,
        PartitionState) after every completed iteration

    Returns
    -------
    (PartitionState, RunDiagnostics)

    Each iteration updates centers, then the spatial penalty from the
    pre-update memberships, then memberships, scales, and typicalities;
    it stops when the max-abs membership change drops below
    config.epsilon or after config.max_iters iterations.  The first
    iteration keeps the seeded initial centers: with uniform initial
    memberships a center update would collapse every center onto the
    data mean and the iteration could never leave that symmetric point.
    """
    state = initial_partition(data, config, center_indices)
    graph = build_neighborhoods(data.coords, config.radius)
    u, t = state.memberships, state.typicalities
    centers, scales = state.centers, state.scales
    obj_trace, delta_trace, reseeds = [], [], []
    converged = False
    iterations = 0
    for it in range(1, config.max_iters + 1):
        iterations = it
        if it > 1:
            dead = _reseed_centers(u, t, data, config, centers)
            reseeds.extend((it, c) for c in dead)
        pen = spatial_penalty(u, centers, data, graph, config.m)
        u_new = update_memberships(data, centers, pen, config.m)
        delta = float(np.abs(u_new - u).max())
        u = u_new
        if not config.freeze_scales:
            scales = update_scales(u, centers, data, config.m)
        t = update_typicalities(data, centers, scales, config.b, config.q)
        state = PartitionState(u, t, centers, scales)
        obj_trace.append(objective(state, data, graph, config))
        delta_trace.append(delta)
        if on_iteration is not None:
            on_iteration(it, state)
        if delta < config.epsilon:
            converged = True
            break
    diag = RunDiagnostics(iterations=iterations,
                          objective_trace=np.asarray(obj_trace),
                          max_delta_trace=np.asarray(delta_trace),
                          converged=converged,
                          reseeds=reseeds)
    return state, diag
