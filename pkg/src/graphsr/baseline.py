"""Reference methods the cross-scale pipeline is compared against.

``bicubic_baseline`` is plain bicubic upsampling. ``same_scale_knn`` is the
classic non-local KNN aggregation operating within a single scale: each
patch is replaced by a normalized Gaussian-weighted combination of its k
nearest patches from a local window (the patch itself included), then the
image is rebuilt by overlap averaging. It never sees any cross-scale
information, which is exactly what makes it a useful baseline.
"""

from __future__ import annotations

from .aggregate import (
    AggregationConfig,
    WeightedPatchSet,
    _gather_patches,
    _normalized_weights,
    assemble_patches,
)
from .graph import build_graph
from .image import Image, bicubic_resample


def bicubic_baseline(img: Image, s: int) -> Image:
    """Upsample by an integer factor s with the bicubic kernel."""
    return bicubic_resample(img, float(s))


def same_scale_knn(img: Image, cfg: AggregationConfig, workers: int = 1) -> Image:
    """Non-local KNN aggregation within the input's own scale.

    For every query patch on the stride grid, the k nearest same-sized
    patches inside the d x d window (self-match included) are combined with
    weights exp(-||difference||^2 / h), normalized per query; fused patches
    are placed at their query positions and overlap-averaged. Output has the
    input's size. With k=1 the self-match gets weight 1 and the operator is
    the identity.
    """
    cfg.validate()
    flat_cfg = cfg.with_(s=1, adapn=False)
    graph = build_graph(img, img, flat_cfg)
    weights = _normalized_weights(graph.distances ** 2, "gaussian", cfg.h)
    patches = _gather_patches(img.data, graph.neighbor_coords, cfg.l)
    pset = WeightedPatchSet(
        query_coords=graph.query_coords.copy(),
        patches=patches,
        weights=weights,
    )
    out_shape = (img.height, img.width, img.channels)
    return assemble_patches(pset, 1, out_shape, workers)
