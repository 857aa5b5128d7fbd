"""Downstream analytics over node signatures.

Classical multidimensional scaling for low-dimensional views, the minimal
enclosing hypersphere whose radius scores a design's connection complexity,
and seeded k-means clustering for connection standardization studies. All
operations are deterministic for a fixed input order and seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_K = 10
DEFAULT_RESTARTS = 10
DEFAULT_KMEANS_MAX_ITER = 300
DEFAULT_BALL_TOL = 1e-7

# Above this ratio of |most negative eigenvalue| / largest eigenvalue the
# distance matrix is flagged as not Euclidean-embeddable.
_NEGATIVE_EIGENVALUE_NOTE = 1e-6


@dataclass(frozen=True)
class Embedding:
    """Low-dimensional coordinates that best preserve pairwise distances."""

    coordinates: np.ndarray
    eigenvalues: np.ndarray
    stress: float
    negative_eigenvalue_ratio: float

    @property
    def k(self) -> int:
        return self.coordinates.shape[1]


@dataclass(frozen=True)
class BoundingSphere:
    center: np.ndarray
    radius: float
    support: tuple[int, ...]


@dataclass(frozen=True)
class ClusterAssignment:
    """K-means result with clusters relabelled by increasing sphere radius."""

    k: int
    labels: np.ndarray
    node_ids: tuple[int, ...]
    centroids: np.ndarray
    spheres: tuple[BoundingSphere, ...]
    inertia: float
    objective_history: tuple[float, ...]

    def members(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)


def _as_points(vectors) -> tuple[np.ndarray, tuple[int, ...]]:
    """Accept FeatureVector lists or plain arrays; return (points, node ids)."""
    seq = list(vectors)
    if not seq:
        return np.empty((0, 0)), ()
    if hasattr(seq[0], "components"):
        points = np.array([v.components for v in seq], dtype=float)
        ids = tuple(
            v.node if getattr(v, "node", None) is not None else i for i, v in enumerate(seq)
        )
    else:
        points = np.atleast_2d(np.asarray(seq, dtype=float))
        ids = tuple(range(points.shape[0]))
    return points, ids


def classical_mds(distances, k: int) -> Embedding:
    """Embed a distance matrix into k dimensions via double centering.

    B = -1/2 J D^2 J is eigendecomposed; coordinates are the top-k
    eigenvectors scaled by the square root of their (clamped to zero)
    eigenvalues. Each axis is flipped so its largest-magnitude entry is
    positive, making the output deterministic. The stress diagnostic is the
    relative Frobenius error between the reconstructed and input distances.
    """
    d = distances.values if hasattr(distances, "values") else np.asarray(distances, dtype=float)
    n = d.shape[0]
    if d.shape != (n, n):
        raise ValueError(f"distance matrix must be square, got {d.shape}")
    if not 1 <= k < n:
        raise ValueError(f"target dimension must satisfy 1 <= k < n={n}, got {k}")

    j = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * j @ (d * d) @ j
    eigenvalues, eigenvectors = np.linalg.eigh(b)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]

    max_eig = float(eigenvalues[0]) if n else 0.0
    most_negative = float(-eigenvalues[-1]) if n else 0.0
    neg_ratio = most_negative / max_eig if max_eig > 0 and most_negative > 0 else 0.0

    top = np.clip(eigenvalues[:k], 0.0, None)
    coordinates = eigenvectors[:, :k] * np.sqrt(top)[None, :]
    for axis in range(k):
        column = coordinates[:, axis]
        pivot = int(np.argmax(np.abs(column)))
        if column[pivot] < 0:
            coordinates[:, axis] = -column

    deltas = coordinates[:, None, :] - coordinates[None, :, :]
    reconstructed = np.sqrt((deltas * deltas).sum(axis=-1))
    d_norm = float(np.linalg.norm(d))
    stress = float(np.linalg.norm(reconstructed - d) / d_norm) if d_norm > 0 else 0.0

    return Embedding(
        coordinates=coordinates,
        eigenvalues=top,
        stress=stress,
        negative_eigenvalue_ratio=neg_ratio,
    )


def min_enclosing_ball(points, tol: float = DEFAULT_BALL_TOL, max_iter: int = 200_000) -> BoundingSphere:
    """Smallest sphere covering all points, to (1 + tol) of the optimum.

    Iterative refinement of a convex weighting over the points: each step
    moves weight toward the current farthest point and away from the
    shallowest supporting point, with exact line search; the certified
    upper/lower radius gap drives termination. Deterministic given input
    order. The reported radius is the exact covering radius of the final
    center, so every point lies inside it.
    """
    pts, _ = _as_points(points)
    n = pts.shape[0]
    if n == 0:
        raise ValueError("at least one point is required")
    if n == 1:
        return BoundingSphere(center=pts[0].copy(), radius=0.0, support=(0,))

    norms2 = (pts * pts).sum(axis=1)
    scale = math.sqrt(float(norms2.max())) if norms2.max() > 0 else 1.0

    # Start from the two mutually farthest points found by a double scan.
    a = int(np.argmax(((pts - pts[0]) ** 2).sum(axis=1)))
    b = int(np.argmax(((pts - pts[a]) ** 2).sum(axis=1)))
    weights = np.zeros(n)
    if a == b:  # all points coincide
        return BoundingSphere(center=pts[0].copy(), radius=0.0, support=(0,))
    weights[a] = weights[b] = 0.5

    center = weights @ pts
    for _ in range(max_iter):
        dist2 = ((pts - center) ** 2).sum(axis=1)
        lower2 = float(weights @ norms2 - center @ center)
        upper = math.sqrt(float(dist2.max()))
        lower = math.sqrt(max(lower2, 0.0))
        if upper - lower <= tol * upper + 1e-15 * scale:
            break

        far = int(np.argmax(dist2))
        support = np.flatnonzero(weights > 0)
        near = int(support[np.argmin(dist2[support])])

        gain = None
        if near != far:
            span = pts[far] - pts[near]
            span2 = float(span @ span)
            if span2 > 0:
                step = (dist2[far] - dist2[near]) / (2.0 * span2)
                step = min(max(step, 0.0), float(weights[near]))
                if step > 0:
                    gain = (near, far, step)
        if gain is None:
            # fall back to pulling weight toward the farthest point
            step = (float(dist2[far]) - lower2) / (2.0 * float(dist2[far]))
            step = min(max(step, 0.0), 1.0)
            if step == 0.0:
                break
            weights *= 1.0 - step
            weights[far] += step
        else:
            near_i, far_i, step = gain
            weights[near_i] -= step
            weights[far_i] += step
        center = weights @ pts

    dist2 = ((pts - center) ** 2).sum(axis=1)
    radius = math.sqrt(float(dist2.max()))
    support = tuple(int(i) for i in np.flatnonzero(weights > 1e-12))
    return BoundingSphere(center=center, radius=radius, support=support)


def complexity_score(vectors, tol: float = DEFAULT_BALL_TOL) -> float:
    """Radius of the minimal enclosing sphere of the signatures.

    Comparative only: larger means more varied connection demands, and the
    value scales linearly with the applied loads.
    """
    return min_enclosing_ball(vectors, tol=tol).radius


def kmeans(
    vectors,
    k: int = DEFAULT_K,
    seed: int = 0,
    max_iter: int = DEFAULT_KMEANS_MAX_ITER,
    restarts: int = DEFAULT_RESTARTS,
) -> ClusterAssignment:
    """Seeded k-means over node signatures, best of several restarts.

    Each restart draws k-means++ centers from its own deterministic stream,
    then runs Lloyd iterations to an assignment fixpoint (or max_iter). The
    run with the smallest within-cluster sum of squares wins; ties keep the
    earliest run. Clusters are finally relabelled in order of increasing
    bounding-sphere radius (ties by smallest member node id), so label 0 is
    always the most uniform group.
    """
    points, node_ids = _as_points(vectors)
    n = points.shape[0]
    n_distinct = np.unique(points, axis=0).shape[0]
    if not 1 <= k <= n_distinct:
        raise ValueError(f"k must satisfy 1 <= k <= {n_distinct} distinct vectors, got {k}")
    if restarts < 1:
        raise ValueError(f"restarts must be at least 1, got {restarts}")

    best: tuple[float, np.ndarray, np.ndarray, tuple[float, ...]] | None = None
    for run in range(restarts):
        rng = np.random.default_rng((seed, run))
        labels, centroids, history = _lloyd(points, k, rng, max_iter)
        inertia = history[-1]
        if best is None or inertia < best[0] - 1e-12:
            best = (inertia, labels, centroids, history)
    inertia, labels, centroids, history = best

    spheres = []
    for label in range(k):
        members = points[labels == label]
        spheres.append(min_enclosing_ball(members))

    order = sorted(
        range(k),
        key=lambda label: (
            spheres[label].radius,
            min(node_ids[i] for i in np.flatnonzero(labels == label)),
        ),
    )
    remap = np.empty(k, dtype=int)
    for new_label, old_label in enumerate(order):
        remap[old_label] = new_label
    return ClusterAssignment(
        k=k,
        labels=remap[labels],
        node_ids=node_ids,
        centroids=centroids[order],
        spheres=tuple(spheres[label] for label in order),
        inertia=float(inertia),
        objective_history=history,
    )


def _lloyd(points: np.ndarray, k: int, rng, max_iter: int):
    centroids = _kmeans_plus_plus(points, k, rng)
    labels = np.full(points.shape[0], -1)
    history: list[float] = []
    for _ in range(max_iter):
        dist2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=-1)
        new_labels = np.argmin(dist2, axis=1)
        history.append(float(dist2[np.arange(points.shape[0]), new_labels].sum()))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for label in range(k):
            members = points[labels == label]
            if len(members):
                centroids[label] = members.mean(axis=0)
            else:
                # repopulate an emptied cluster with the worst-fit point
                residual = ((points - centroids[labels]) ** 2).sum(axis=1)
                stray = int(np.argmax(residual))
                centroids[label] = points[stray]
                labels[stray] = label
    return labels, centroids, tuple(history)


def _kmeans_plus_plus(points: np.ndarray, k: int, rng) -> np.ndarray:
    n = points.shape[0]
    first = int(rng.integers(n))
    centroids = [points[first]]
    dist2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = float(dist2.sum())
        if total <= 0:
            raise ValueError("fewer distinct vectors than requested clusters")
        target = rng.random() * total
        chosen = int(np.searchsorted(np.cumsum(dist2), target))
        chosen = min(chosen, n - 1)
        centroids.append(points[chosen])
        dist2 = np.minimum(dist2, ((points - points[chosen]) ** 2).sum(axis=1))
    return np.array(centroids)
