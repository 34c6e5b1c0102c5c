"""Weighted aggregation of cross-scale exemplar patches into an SR image.

Each query patch's k matched neighbors name larger exemplar patches in the
input image. Those exemplars are optionally re-normalized to the query's
per-channel statistics (adaptive patch normalization), combined with
Gaussian edge weights or a plain average, and the fused patches are folded
back into the output raster by overlap averaging.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    ConfigError,
    CoverageError,
    InvalidDimensionError,
    NonFiniteInputError,
    PatchBoundsError,
)
from .graph import CrossScaleGraph, Patch, build_graph
from .image import BoundaryPolicy, Image, bicubic_resample


@dataclass(frozen=True)
class AggregationConfig:
    """All pipeline hyperparameters.

    Defaults reproduce the reference setting: 3x3 query patches, 5
    neighbors, a 30x30 search window, and Gaussian edge weights with
    bandwidth 10.
    """

    s: int = 2
    k: int = 5
    l: int = 3
    d: int = 30
    stride: int = 1
    h: float = 10.0
    weighting: str = "gaussian"
    adapn: bool = True
    adapn_eps: float = 1e-5
    boundary: BoundaryPolicy = BoundaryPolicy.REFLECT
    embed_y: bool = False

    def validate(self) -> "AggregationConfig":
        if self.s < 1:
            raise ConfigError(f"s must be >= 1, got {self.s}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.l < 2:
            raise ConfigError(f"l must be >= 2, got {self.l}")
        if self.d < self.l:
            raise ConfigError(f"d must be >= l, got d={self.d} l={self.l}")
        if self.stride < 1:
            raise ConfigError(f"stride must be >= 1, got {self.stride}")
        if self.stride > self.l:
            # larger strides would leave reconstruction gaps
            raise ConfigError(
                f"stride must be <= l, got stride={self.stride} l={self.l}"
            )
        if not (self.h > 0.0) or not math.isfinite(self.h):
            raise ConfigError(f"bandwidth h must be positive, got {self.h}")
        if self.weighting not in ("average", "gaussian"):
            raise ConfigError(f"unknown weighting mode {self.weighting!r}")
        if not (self.adapn_eps > 0.0):
            raise ConfigError(f"adapn_eps must be positive, got {self.adapn_eps}")
        if not isinstance(self.boundary, BoundaryPolicy):
            raise ConfigError(f"boundary must be a BoundaryPolicy, got "
                              f"{self.boundary!r}")
        return self

    def with_(self, **kwargs) -> "AggregationConfig":
        return replace(self, **kwargs)


@dataclass
class WeightedPatchSet:
    """Per query: k exemplar patches and k weights summing to one."""

    query_coords: np.ndarray   # (nq, 2) top-left in the input image
    patches: np.ndarray        # (nq, k, ls, ls, C)
    weights: np.ndarray        # (nq, k), nonnegative, rows sum to 1

    @property
    def num_queries(self) -> int:
        return self.weights.shape[0]


def gaussian_edge_weight(edge_label: np.ndarray, h: float) -> float:
    """Unnormalized Gaussian kernel weight exp(-||label||^2 / h)."""
    if not (h > 0.0):
        raise ConfigError(f"bandwidth h must be positive, got {h}")
    label = np.asarray(edge_label, dtype=np.float64)
    if not np.all(np.isfinite(label)):
        raise NonFiniteInputError("edge label contains NaN or infinity")
    return float(np.exp(-np.dot(label.ravel(), label.ravel()) / h))


def _normalized_weights(sq_norms: np.ndarray, mode: str, h: float) -> np.ndarray:
    """Rows of per-query weights from squared label norms, summing to 1.

    The Gaussian mode subtracts the per-row minimum before exponentiating;
    the common factor cancels in the normalization, so tiny bandwidths
    cannot underflow every weight to zero.
    """
    if mode == "average":
        k = sq_norms.shape[1]
        return np.full_like(sq_norms, 1.0 / k, dtype=np.float64)
    shifted = sq_norms - sq_norms.min(axis=1, keepdims=True)
    w = np.exp(-shifted / h)
    return w / w.sum(axis=1, keepdims=True)


def _patch_moments(patches: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel mean and population std over the spatial axes.

    ``patches`` has shape (..., side, side, C); moments come back with the
    spatial axes reduced.
    """
    mu = patches.mean(axis=(-3, -2))
    sigma = patches.std(axis=(-3, -2))
    return mu, sigma


def adapn(neighbor: Patch, query: Patch, eps: float = 1e-5) -> Patch:
    """Re-normalize a neighbor patch to the query's per-channel moments.

    Each channel of the neighbor is shifted and scaled so its mean and
    population standard deviation match the query's; a degenerate
    (constant) neighbor channel collapses to the query's mean.
    """
    n = np.asarray(neighbor.values, dtype=np.float64)
    q = np.asarray(query.values, dtype=np.float64)
    if not (np.all(np.isfinite(n)) and np.all(np.isfinite(q))):
        raise NonFiniteInputError("adapn inputs contain NaN or infinity")
    if n.shape[-1] != q.shape[-1]:
        raise PatchBoundsError(
            f"channel mismatch: neighbor {n.shape[-1]} vs query {q.shape[-1]}"
        )
    mu_n, sig_n = _patch_moments(n)
    mu_q, sig_q = _patch_moments(q)
    out = sig_q * (n - mu_n) / np.maximum(sig_n, eps) + mu_q
    return Patch(out, neighbor.row, neighbor.col)


def _adapn_batch(neighbors: np.ndarray, queries: np.ndarray,
                 eps: float) -> np.ndarray:
    """adapn applied to (nq, k, ls, ls, C) neighbors against (nq, l, l, C)
    queries."""
    mu_n, sig_n = _patch_moments(neighbors)            # (nq, k, C)
    mu_q, sig_q = _patch_moments(queries)              # (nq, C)
    mu_n = mu_n[:, :, None, None, :]
    sig_n = np.maximum(sig_n, eps)[:, :, None, None, :]
    mu_q = mu_q[:, None, None, None, :]
    sig_q = sig_q[:, None, None, None, :]
    return sig_q * (neighbors - mu_n) / sig_n + mu_q


def compute_weights(graph: CrossScaleGraph, img: Image,
                    cfg: AggregationConfig) -> WeightedPatchSet:
    """Exemplar patches and normalized per-query weights for a built graph.

    Exemplars are the ls x ls patches of ``img`` at the scale-mapped
    neighbor positions, adaptively re-normalized against their query patch
    when ``cfg.adapn`` is on.
    """
    cfg.validate()
    ls = graph.l * graph.s
    sq_norms = graph.distances ** 2
    weights = _normalized_weights(sq_norms, cfg.weighting, cfg.h)
    patches = _gather_patches(img.data, graph.neighbor_coords * graph.s, ls)
    if cfg.adapn:
        queries = _gather_patches(
            img.data, graph.query_coords[:, None, :], graph.l
        )[:, 0]
        patches = _adapn_batch(patches, queries, cfg.adapn_eps)
    return WeightedPatchSet(
        query_coords=graph.query_coords.copy(),
        patches=patches,
        weights=weights,
    )


def _gather_patches(data: np.ndarray, coords: np.ndarray, side: int) -> np.ndarray:
    """Patches of ``data`` at (.., 2) top-left coordinates -> (.., side, side, C)."""
    h, w, _ = data.shape
    rows = coords[..., 0]
    cols = coords[..., 1]
    if rows.min() < 0 or cols.min() < 0 or (rows + side).max() > h \
            or (cols + side).max() > w:
        raise PatchBoundsError("patch coordinates exceed image bounds")
    dr = np.arange(side)
    r_idx = rows[..., None, None] + dr[:, None]
    c_idx = cols[..., None, None] + dr[None, :]
    return data[r_idx, c_idx]


def patch2img(patches, out_width: int, out_height: int, channels: int) -> Image:
    """Reconstruct an image from placed patches by overlap averaging.

    ``patches`` is an iterable of (Patch, PatchCoord) placements; each output
    pixel becomes the mean of every patch value covering it. A pixel covered
    by no patch raises ``CoverageError`` naming the first such coordinate in
    raster order.
    """
    if out_width < 1 or out_height < 1:
        raise InvalidDimensionError(
            f"output extent {out_height}x{out_width} is empty"
        )
    acc = np.zeros((out_height, out_width, channels))
    cnt = np.zeros((out_height, out_width), dtype=np.int64)
    for patch, coord in patches:
        vals = np.asarray(patch.values, dtype=np.float64)
        if vals.ndim == 2:
            vals = vals[:, :, np.newaxis]
        ph, pw, pc = vals.shape
        r, c = coord.row, coord.col
        if pc != channels:
            raise PatchBoundsError(
                f"patch has {pc} channels, output has {channels}"
            )
        if r < 0 or c < 0 or r + ph > out_height or c + pw > out_width:
            raise PatchBoundsError(
                f"patch at ({r},{c}) size {ph}x{pw} exceeds output "
                f"{out_height}x{out_width}"
            )
        acc[r:r + ph, c:c + pw] += vals
        cnt[r:r + ph, c:c + pw] += 1
    uncovered = np.argwhere(cnt == 0)
    if uncovered.size:
        r, c = uncovered[0]
        raise CoverageError(f"output pixel ({r},{c}) is covered by no patch")
    out = acc / cnt[:, :, None]
    return Image(np.clip(out, 0.0, 1.0))


# Queries per accumulation chunk. Fixed (never derived from the worker
# count) so the floating-point merge order, and therefore the output bits,
# are identical for any number of threads.
_CHUNK_QUERIES = 4096


def _fuse_and_accumulate(pset: WeightedPatchSet, lo: int, hi: int, s: int,
                         out_shape) -> tuple[int, np.ndarray, np.ndarray]:
    """Weighted-sum patches for queries [lo, hi) and scatter them into a
    full-width row slab starting at the chunk's first output row."""
    fused = np.einsum(
        "qk,qkijc->qijc", pset.weights[lo:hi], pset.patches[lo:hi]
    )
    ls = fused.shape[1]
    coords = pset.query_coords[lo:hi] * s
    r0 = int(coords[:, 0].min())
    n_rows = int(coords[:, 0].max()) + ls - r0
    slab = np.zeros((n_rows, out_shape[1], out_shape[2]))
    cnt = np.zeros((n_rows, out_shape[1]), dtype=np.int64)
    dr = np.arange(ls)
    r_idx = coords[:, 0, None, None] - r0 + dr[:, None]
    c_idx = coords[:, 1, None, None] + dr[None, :]
    flat = (r_idx * out_shape[1] + c_idx).ravel()
    np.add.at(slab.reshape(-1, out_shape[2]), flat,
              fused.reshape(-1, out_shape[2]))
    np.add.at(cnt.reshape(-1), flat, 1)
    return r0, slab, cnt


def super_resolve(img: Image, cfg: AggregationConfig, workers: int = 1) -> Image:
    """Super-resolve ``img`` by cfg.s using cross-scale patch aggregation.

    Downsamples the input by 1/s, builds the cross-scale graph, fuses the k
    exemplar patches per query, and folds the fused patches (placed at s
    times their query coordinate) into the s-times-larger output by overlap
    averaging. The result is clamped to [0, 1] once, at the end.

    Work may be split across ``workers`` threads; chunk boundaries and the
    merge order are fixed, so the output is bit-identical for any worker
    count.
    """
    cfg.validate()
    s = cfg.s
    if img.height % s or img.width % s:
        raise InvalidDimensionError(
            f"input {img.height}x{img.width} is not divisible by s={s}"
        )
    img_down = bicubic_resample(img, 1.0 / s, cfg.boundary)
    graph = build_graph(img, img_down, cfg)
    pset = compute_weights(graph, img, cfg)
    out_shape = (img.height * s, img.width * s, img.channels)
    return assemble_patches(pset, s, out_shape, workers)


def assemble_patches(pset: WeightedPatchSet, placement_scale: int,
                     out_shape: tuple[int, int, int],
                     workers: int = 1) -> Image:
    """Fuse each query's weighted patches and overlap-average them into an
    image, placing each fused patch at ``placement_scale`` times its query
    coordinate. Deterministic for any worker count."""
    nq = pset.num_queries
    chunks = [(lo, min(lo + _CHUNK_QUERIES, nq))
              for lo in range(0, nq, _CHUNK_QUERIES)]

    workers = max(1, int(workers))
    if workers == 1 or len(chunks) == 1:
        results = [_fuse_and_accumulate(pset, lo, hi, placement_scale, out_shape)
                   for lo, hi in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda b: _fuse_and_accumulate(
                    pset, b[0], b[1], placement_scale, out_shape),
                chunks,
            ))

    acc = np.zeros(out_shape)
    cnt = np.zeros(out_shape[:2], dtype=np.int64)
    for r0, slab, slab_cnt in results:  # fixed chunk order: deterministic
        acc[r0:r0 + slab.shape[0]] += slab
        cnt[r0:r0 + slab_cnt.shape[0]] += slab_cnt
    uncovered = np.argwhere(cnt == 0)
    if uncovered.size:
        r, c = uncovered[0]
        raise CoverageError(f"output pixel ({r},{c}) is covered by no patch")
    return Image(np.clip(acc / cnt[:, :, None], 0.0, 1.0))
