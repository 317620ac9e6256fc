"""Building finite models of closures of coordinate embeddings.

A model of the closure of x -> (f_0(x), f_1(x), ...) inside the product of
the ranges is assembled from two point clouds: a dense image grid on a
bounded parameter window, and tail samples at large |x| whose clusters
approximate the remainder, the part of the closure the line itself never
reaches.
"""
from __future__ import annotations

import base64
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .functions import FunctionDescriptor, FunctionFamily, Interval, descriptor_from_json
from .product_space import ProductPoint, Space, coordinate_weights, distances_to_cloud

__all__ = [
    "MODEL_MAGIC",
    "BuildParams",
    "EmbeddingMap",
    "RemainderCluster",
    "CompactificationModel",
    "Membership",
    "embed",
    "build_compactification",
    "closure_membership",
    "remainder_separation",
    "greedy_cluster",
    "save_model",
    "load_model",
    "write_remainder_csv",
]

MODEL_MAGIC = b"CPTF1\n"


@dataclass(frozen=True)
class BuildParams:
    """Sampling and clustering parameters for a model build.

    The image grid covers [-r_image, r_image] with step ``grid_step``; the
    two tail grids cover +-[r_tail_lo, r_tail_hi] with a step ten times
    coarser.  ``cluster_radius`` is the capture radius of the greedy
    remainder clustering.
    """

    r_image: float = 50.0
    r_tail_lo: float = 50.0
    r_tail_hi: float = 2000.0
    grid_step: float = 1e-3
    cluster_radius: float = 0.05

    def __post_init__(self) -> None:
        if not (self.r_tail_hi > self.r_tail_lo >= self.r_image > 0):
            raise ValueError("need r_tail_hi > r_tail_lo >= r_image > 0")
        if self.grid_step <= 0:
            raise ValueError("grid_step must be positive")
        if self.cluster_radius <= 0:
            raise ValueError("cluster_radius must be positive")

    @property
    def tail_step(self) -> float:
        return 10.0 * self.grid_step

    def to_json(self) -> dict:
        return {
            "r_image": self.r_image,
            "r_tail_lo": self.r_tail_lo,
            "r_tail_hi": self.r_tail_hi,
            "grid_step": self.grid_step,
            "cluster_radius": self.cluster_radius,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BuildParams":
        return cls(**{k: float(v) for k, v in obj.items()})


@dataclass(frozen=True)
class EmbeddingMap:
    """The coordinate embedding x -> (f_0(x), ..., f_{N-1}(x))."""

    family: FunctionFamily

    @property
    def space(self) -> Space:
        return self.family.space()

    def embed(self, x: float) -> ProductPoint:
        coords = tuple(f.evaluate(float(x)) for f in self.family)
        return ProductPoint(coords, self.space)

    def embed_array(self, xs: np.ndarray, workers: int = 1) -> np.ndarray:
        """Evaluate every coordinate on a parameter grid, one column each.

        Worker slices are concatenated back in grid order, so the result
        does not depend on the worker count.
        """
        xs = np.asarray(xs, dtype=np.float64)
        if workers <= 1 or xs.size < 4 * workers:
            return np.column_stack([f.evaluate(xs) for f in self.family])
        chunks = np.array_split(xs, workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(
                pool.map(
                    lambda c: np.column_stack([f.evaluate(c) for f in self.family]),
                    chunks,
                )
            )
        return np.vstack(parts)


def embed(family: FunctionFamily, x: float) -> ProductPoint:
    """Image of the parameter x under the family's coordinate embedding."""
    return EmbeddingMap(family).embed(x)


@dataclass(frozen=True, eq=False)
class RemainderCluster:
    """One clustered patch of the approximated remainder.

    ``witnesses`` holds the tail parameters whose embeddings fed the
    cluster; they all sit within the capture radius of the original seed,
    hence within twice that radius of the refined (mean) center.  ``side``
    records which infinities the witnesses came from.
    """

    cluster_id: int
    center: np.ndarray
    side: str  # "+inf", "-inf" or "both"
    witnesses: np.ndarray

    @property
    def witness_count(self) -> int:
        return int(self.witnesses.shape[0])

    def center_point(self, space: Space) -> ProductPoint:
        iv_lo = np.asarray([iv.lo for iv in space])
        iv_hi = np.asarray([iv.hi for iv in space])
        coords = np.clip(self.center, iv_lo, iv_hi)
        return ProductPoint(tuple(float(c) for c in coords), space)


@dataclass(frozen=True, eq=False)
class CompactificationModel:
    """Finite approximation of the closure of a coordinate embedding."""

    embedding: EmbeddingMap
    params: BuildParams
    image_params: np.ndarray  # (M,) parameters of the image grid
    image_points: np.ndarray  # (M, N) their embeddings, row per parameter
    remainder: tuple[RemainderCluster, ...]

    @property
    def family(self) -> FunctionFamily:
        return self.embedding.family

    @property
    def space(self) -> Space:
        return self.embedding.space

    @property
    def dim(self) -> int:
        return len(self.embedding.family)

    def embed(self, x: float) -> ProductPoint:
        return self.embedding.embed(x)

    def remainder_centers(self) -> np.ndarray:
        if not self.remainder:
            return np.empty((0, self.dim))
        return np.vstack([c.center for c in self.remainder])


def _image_grid(params: BuildParams) -> np.ndarray:
    if params.grid_step > 2.0 * params.r_image:
        raise ValueError(
            "image grid is empty: grid_step exceeds the parameter window"
        )
    steps = round(2.0 * params.r_image / params.grid_step)
    return np.linspace(-params.r_image, params.r_image, steps + 1)


def _tail_grids(params: BuildParams) -> tuple[np.ndarray, np.ndarray]:
    steps = round((params.r_tail_hi - params.r_tail_lo) / params.tail_step)
    if steps < 1:
        raise ValueError("tail grid is empty: tail step exceeds the tail window")
    plus = np.linspace(params.r_tail_lo, params.r_tail_hi, steps + 1)
    minus = -plus[::-1]
    return minus, plus


def greedy_cluster(points: np.ndarray, radius: float) -> np.ndarray:
    """Greedy one-pass agglomeration in presentation order.

    The first point seeds a cluster.  Each later point joins the nearest
    existing seed within ``radius`` (ties to the earliest seed) or founds a
    new cluster.  Returns the cluster label of every point, labels ordered
    by founding time.

    Points are processed in blocks: distances of a whole block to the
    current seeds are computed at once, and the block is cut at the first
    point that founds a new seed, which reproduces the sequential result
    exactly.
    """
    points = np.asarray(points, dtype=np.float64)
    n, dim = points.shape
    weights = coordinate_weights(dim)
    labels = np.empty(n, dtype=np.int64)
    seeds: list[np.ndarray] = []
    seed_mat = np.empty((0, dim))

    block = 4096
    i = 0
    while i < n:
        if not seeds:
            seeds.append(points[i])
            seed_mat = points[i : i + 1]
            labels[i] = 0
            i += 1
            continue
        chunk = points[i : i + block]
        dists = np.zeros((chunk.shape[0], seed_mat.shape[0]))
        for d in range(dim):
            dists += (
                np.minimum(1.0, np.abs(chunk[:, d : d + 1] - seed_mat[None, :, d]))
                * weights[d]
            )
        nearest = np.argmin(dists, axis=1)
        within = dists[np.arange(chunk.shape[0]), nearest] <= radius
        if within.all():
            labels[i : i + chunk.shape[0]] = nearest
            i += chunk.shape[0]
            continue
        cut = int(np.argmin(within))  # first founder in the block
        labels[i : i + cut] = nearest[:cut]
        labels[i + cut] = len(seeds)
        seeds.append(points[i + cut])
        seed_mat = np.vstack([seed_mat, points[i + cut : i + cut + 1]])
        i += cut + 1
    return labels


def _cluster_side(witnesses: np.ndarray) -> str:
    if witnesses.min() > 0:
        return "+inf"
    if witnesses.max() < 0:
        return "-inf"
    return "both"


def build_compactification(
    family: FunctionFamily,
    params: BuildParams | None = None,
    workers: int = 1,
) -> CompactificationModel:
    """Sample the embedding and cluster its tails into a closure model.

    Tail samples are presented to the clustering in increasing parameter
    order (the negative tail first), so identical inputs produce identical
    models bit for bit.
    """
    if params is None:
        params = BuildParams()
    if not isinstance(family, FunctionFamily):
        family = FunctionFamily(tuple(family))
    emb = EmbeddingMap(family)

    image_params = _image_grid(params)
    image_points = emb.embed_array(image_params, workers=workers)

    minus, plus = _tail_grids(params)
    tail_params = np.concatenate([minus, plus])
    tail_points = emb.embed_array(tail_params, workers=workers)

    labels = greedy_cluster(tail_points, params.cluster_radius)
    clusters = []
    for cid in range(int(labels.max()) + 1):
        members = labels == cid
        clusters.append(
            RemainderCluster(
                cluster_id=cid,
                center=tail_points[members].mean(axis=0),
                side=_cluster_side(tail_params[members]),
                witnesses=tail_params[members],
            )
        )
    return CompactificationModel(
        embedding=emb,
        params=params,
        image_params=image_params,
        image_points=image_points,
        remainder=tuple(clusters),
    )


@dataclass(frozen=True)
class Membership:
    """Where a probe point landed relative to a model."""

    kind: str  # "image", "remainder" or "outside"
    distance: float
    parameter: float | None = None
    cluster_id: int | None = None


def closure_membership(
    model: CompactificationModel, p: ProductPoint, eps: float
) -> Membership:
    """Classify a point against the sampled closure at resolution eps.

    Remainder clusters take precedence over the image cloud: where a
    saturating coordinate (tanh beyond roughly |x| = 19 in float64) makes
    the sampled image indistinguishable from its limit set, a point near a
    cluster center is reported as remainder even though some image sample
    is equally close.
    """
    if p.space != model.space:
        raise ValueError("probe point lives in a different product space")
    if eps <= 0:
        raise ValueError("eps must be positive")
    arr = p.as_array()

    nearest_center = np.inf
    centers = model.remainder_centers()
    if centers.shape[0]:
        cd = distances_to_cloud(arr, centers)
        best_c = int(np.argmin(cd))
        nearest_center = float(cd[best_c])
        if nearest_center < eps:
            return Membership("remainder", nearest_center, cluster_id=best_c)

    dists = distances_to_cloud(arr, model.image_points)
    best = int(np.argmin(dists))
    if dists[best] < eps:
        return Membership(
            "image", float(dists[best]), parameter=float(model.image_params[best])
        )
    return Membership("outside", float(min(dists[best], nearest_center)))


def remainder_separation(model: CompactificationModel) -> float:
    """Smallest distance from any remainder center to the image cloud.

    Diagnostic only.  For families with a saturating coordinate this can
    be 0 at wide parameter windows (tanh is exactly 1.0 in float64 beyond
    |x| of about 19), so it is not enforced as a build invariant; at
    narrow windows it measures how clearly the remainder stands off the
    sampled arc.
    """
    centers = model.remainder_centers()
    if not centers.shape[0]:
        return float("inf")
    best = np.inf
    for row in centers:
        best = min(best, float(distances_to_cloud(row, model.image_points).min()))
    return best


def _encode_array(arr: np.ndarray) -> dict:
    data = np.ascontiguousarray(arr, dtype="<f8")
    return {
        "shape": list(data.shape),
        "data": base64.b64encode(data.tobytes()).decode("ascii"),
    }


def _decode_array(obj: dict) -> np.ndarray:
    raw = base64.b64decode(obj["data"])
    return np.frombuffer(raw, dtype="<f8").reshape(obj["shape"]).copy()


def save_model(model: CompactificationModel, path) -> None:
    """Write a model file: magic line, then a JSON body with base64 arrays."""
    body = {
        "family": model.family.to_json(),
        "params": model.params.to_json(),
        "image_params": _encode_array(model.image_params),
        "image_points": _encode_array(model.image_points),
        "remainder": [
            {
                "cluster_id": c.cluster_id,
                "side": c.side,
                "center": [float(v) for v in c.center],
                "witnesses": _encode_array(c.witnesses),
            }
            for c in model.remainder
        ],
    }
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(json.dumps(body, sort_keys=True).encode("utf-8"))


def load_model(path) -> CompactificationModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    if not blob.startswith(MODEL_MAGIC):
        raise ValueError(f"{path}: not a model file (bad magic)")
    body = json.loads(blob[len(MODEL_MAGIC):].decode("utf-8"))
    family = FunctionFamily.from_json(body["family"])
    clusters = tuple(
        RemainderCluster(
            cluster_id=int(c["cluster_id"]),
            center=np.asarray(c["center"], dtype=np.float64),
            side=c["side"],
            witnesses=_decode_array(c["witnesses"]),
        )
        for c in body["remainder"]
    )
    return CompactificationModel(
        embedding=EmbeddingMap(family),
        params=BuildParams.from_json(body["params"]),
        image_params=_decode_array(body["image_params"]),
        image_points=_decode_array(body["image_points"]),
        remainder=clusters,
    )


def write_remainder_csv(model: CompactificationModel, path) -> None:
    """CSV view of the remainder: id, side, center coordinates, witness count."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        cols = ",".join(f"c{n}" for n in range(model.dim))
        fh.write(f"cluster_id,side,{cols},witness_count\n")
        for c in model.remainder:
            center = ",".join(f"{v:.17g}" for v in c.center)
            fh.write(f"{c.cluster_id},{c.side},{center},{c.witness_count}\n")
