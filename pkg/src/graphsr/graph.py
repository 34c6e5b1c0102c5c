"""Cross-scale k-nearest-neighbor patch graph construction.

Queries are patches of the input image on a stride grid; candidates are
same-sized patches of its downsampled counterpart, searched inside a
window centered at the query's position mapped to the downsampled scale.
Each matched candidate is mapped back to the input scale (coordinates
multiplied by the scale factor), where it names a larger patch that acts
as a high-resolution exemplar for the query.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import (
    InsufficientCandidatesError,
    PatchBoundsError,
    ScaleMismatchError,
)
from .image import Image, luminance

if TYPE_CHECKING:
    from .aggregate import AggregationConfig


class ScaleTag(Enum):
    LR = "lr"
    LR_DOWN = "lr_down"


@dataclass(frozen=True)
class PatchCoord:
    """Top-left corner of a patch, tagged with the image it indexes."""

    row: int
    col: int
    scale_tag: ScaleTag = ScaleTag.LR


@dataclass(frozen=True)
class Patch:
    """A side x side x C view of image data plus its top-left coordinate."""

    values: np.ndarray
    row: int
    col: int

    @property
    def side(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class GraphEdge:
    """One query-to-neighbor correlation.

    ``edge_label`` is the elementwise difference between the query patch and
    the matched downsampled-scale patch (flattened, length l*l*C);
    ``distance`` is its Euclidean norm. ``neighbor_hr`` is ``neighbor_down``
    scaled by s and names the ls x ls exemplar patch in the input image.
    """

    neighbor_down: PatchCoord
    neighbor_hr: PatchCoord
    distance: float
    edge_label: np.ndarray


@dataclass
class CrossScaleGraph:
    """k nearest cross-scale neighbors for every query patch.

    Stored as flat arrays for speed; ``edges_for`` materializes the
    per-query ``GraphEdge`` records. Per query, neighbors are sorted by
    ascending distance with ties broken by raster order of the candidate
    position.
    """

    s: int
    l: int
    k: int
    query_coords: np.ndarray      # (nq, 2) int64, top-left in the input image
    neighbor_coords: np.ndarray   # (nq, k, 2) int64, top-left in the downsample
    distances: np.ndarray         # (nq, k) float64, Euclidean
    edge_labels: np.ndarray       # (nq, k, l*l*C) float64
    queries: list[PatchCoord] = field(init=False, repr=False)

    def __post_init__(self):
        self.queries = [
            PatchCoord(int(r), int(c), ScaleTag.LR) for r, c in self.query_coords
        ]

    @property
    def num_queries(self) -> int:
        return self.query_coords.shape[0]

    def edges_for(self, q_index: int) -> list[GraphEdge]:
        edges = []
        for r in range(self.k):
            nr, nc = (int(v) for v in self.neighbor_coords[q_index, r])
            edges.append(
                GraphEdge(
                    neighbor_down=PatchCoord(nr, nc, ScaleTag.LR_DOWN),
                    neighbor_hr=PatchCoord(nr * self.s, nc * self.s, ScaleTag.LR),
                    distance=float(self.distances[q_index, r]),
                    edge_label=self.edge_labels[q_index, r],
                )
            )
        return edges


def extract_patch(img: Image, coord: PatchCoord, side: int) -> Patch:
    """The side x side patch of ``img`` whose top-left corner is ``coord``.

    The returned values are a view; callers must not write to them.
    """
    r, c = coord.row, coord.col
    if r < 0 or c < 0 or r + side > img.height or c + side > img.width:
        raise PatchBoundsError(
            f"patch at ({r},{c}) side {side} exceeds {img.height}x{img.width}"
        )
    return Patch(img.data[r:r + side, c:c + side], r, c)


def stride_grid(extent: int, side: int, stride: int) -> list[int]:
    """Top-left positions covering [0, extent-side], last position included
    even when the stride does not land on it (keeps reconstruction coverage
    gap-free)."""
    last = extent - side
    grid = list(range(0, last + 1, stride))
    if grid[-1] != last:
        grid.append(last)
    return grid


def _window_bounds(center: int, d: int, n_positions: int) -> tuple[int, int]:
    """Clipped [lo, hi) range of candidate top-left positions for a window of
    d pixels centered at ``center``."""
    lo = max(0, center - d // 2)
    hi = min(n_positions, center - d // 2 + d)
    return lo, hi


def knn_search(query: Patch, haystack: Image, window_center: PatchCoord,
               d: int, k: int, l: int) -> list[tuple[PatchCoord, float]]:
    """The k nearest l x l patches to ``query`` in a d x d window.

    Candidates are all patches whose top-left lies inside the window after
    clipping to image bounds. Results are sorted by ascending Euclidean
    distance with exact ties broken by raster order; the search is
    exhaustive and deterministic.
    """
    if k < 1:
        raise InsufficientCandidatesError(f"k must be >= 1, got {k}")
    coords, d2 = _window_distances(
        haystack.data, np.asarray(query.values, dtype=np.float64),
        window_center.row, window_center.col, d, l,
    )
    if coords.shape[0] < k:
        raise InsufficientCandidatesError(
            f"window holds {coords.shape[0]} candidates, need k={k}"
        )
    order = np.argsort(d2, kind="stable")[:k]
    dist = np.sqrt(d2[order])
    return [
        (PatchCoord(int(coords[i, 0]), int(coords[i, 1]), ScaleTag.LR_DOWN),
         float(dv))
        for i, dv in zip(order, dist)
    ]


def _patch_view(data: np.ndarray, l: int) -> np.ndarray:
    """(rows, cols, l, l, C) view of all l x l patch windows."""
    return sliding_window_view(data, (l, l), axis=(0, 1)).transpose(0, 1, 3, 4, 2)


def _window_distances(data: np.ndarray, query: np.ndarray,
                      center_row: int, center_col: int, d: int, l: int):
    """Raster-ordered candidate coordinates and squared distances.

    Distances are computed as direct sums of squared differences so that
    exact duplicates yield exactly 0.0 and tie order is reproducible.
    """
    windows = _patch_view(data, l)
    r0, r1 = _window_bounds(center_row, d, windows.shape[0])
    c0, c1 = _window_bounds(center_col, d, windows.shape[1])
    if r0 >= r1 or c0 >= c1:
        return np.empty((0, 2), dtype=np.int64), np.empty(0)
    cand = windows[r0:r1, c0:c1]
    diff = query - cand
    d2 = np.einsum("rcijk,rcijk->rc", diff, diff).ravel()
    rows = np.arange(r0, r1)
    cols = np.arange(c0, c1)
    coords = np.stack(
        [np.repeat(rows, cols.size), np.tile(cols, rows.size)], axis=1
    )
    return coords, d2


def build_graph(img: Image, img_down: Image, cfg: "AggregationConfig") -> CrossScaleGraph:
    """Construct the cross-scale KNN graph between ``img`` and ``img_down``.

    ``img_down`` must be exactly 1/s the size of ``img``. For every query
    patch on the stride grid, the k nearest candidates in the window
    centered at (query // s) are recorded together with edge labels
    (query patch minus candidate patch) over the matching embedding.
    """
    s, l, k, d = cfg.s, cfg.l, cfg.k, cfg.d
    if img_down.height * s != img.height or img_down.width * s != img.width:
        raise ScaleMismatchError(
            f"downsampled dims {img_down.height}x{img_down.width} are not "
            f"1/{s} of {img.height}x{img.width}"
        )
    if img_down.channels != img.channels:
        raise ScaleMismatchError("channel count differs between scales")
    if img.height < l or img.width < l:
        raise ScaleMismatchError(f"image smaller than patch side {l}")
    if img_down.height < l or img_down.width < l:
        raise InsufficientCandidatesError(
            f"downsampled image {img_down.height}x{img_down.width} smaller "
            f"than patch side {l}"
        )

    emb = luminance(img).data if cfg.embed_y else img.data
    emb_down = luminance(img_down).data if cfg.embed_y else img_down.data

    rows = stride_grid(img.height, l, cfg.stride)
    cols = stride_grid(img.width, l, cfg.stride)
    windows = _patch_view(emb_down, l)
    n_rows, n_cols = windows.shape[0], windows.shape[1]

    nq = len(rows) * len(cols)
    dim = l * l * emb.shape[2]
    query_coords = np.empty((nq, 2), dtype=np.int64)
    neighbor_coords = np.empty((nq, k, 2), dtype=np.int64)
    distances = np.empty((nq, k))
    labels = np.empty((nq, k, dim))

    qi = 0
    for qr in rows:
        for qc in cols:
            query = emb[qr:qr + l, qc:qc + l]
            r0, r1 = _window_bounds(qr // s, d, n_rows)
            c0, c1 = _window_bounds(qc // s, d, n_cols)
            if (r1 - r0) * (c1 - c0) < k:
                raise InsufficientCandidatesError(
                    f"query ({qr},{qc}): window holds "
                    f"{(r1 - r0) * (c1 - c0)} candidates, need k={k}"
                )
            cand = windows[r0:r1, c0:c1]
            diff = query - cand
            d2 = np.einsum("rcijk,rcijk->rc", diff, diff).ravel()
            order = np.argsort(d2, kind="stable")[:k]
            w_cols = c1 - c0
            nr = r0 + order // w_cols
            nc = c0 + order % w_cols
            query_coords[qi] = (qr, qc)
            neighbor_coords[qi, :, 0] = nr
            neighbor_coords[qi, :, 1] = nc
            distances[qi] = np.sqrt(d2[order])
            labels[qi] = diff.reshape(-1, dim)[order]
            qi += 1

    return CrossScaleGraph(
        s=s, l=l, k=k,
        query_coords=query_coords,
        neighbor_coords=neighbor_coords,
        distances=distances,
        edge_labels=labels,
    )


def format_graph(graph: CrossScaleGraph) -> str:
    """Line-oriented dump: one query per line,
    ``q_row q_col | n_row n_col dist | ...`` with k neighbor triples."""
    lines = []
    for qi in range(graph.num_queries):
        qr, qc = graph.query_coords[qi]
        parts = [f"{qr} {qc}"]
        for r in range(graph.k):
            nr, nc = graph.neighbor_coords[qi, r]
            parts.append(f"{nr} {nc} {graph.distances[qi, r]:.10g}")
        lines.append(" | ".join(parts))
    return "\n".join(lines) + "\n"


def dump_graph(graph: CrossScaleGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_graph(graph))
