"""Cross-scale patch-recurrence super-resolution.

Small patches of a natural image recur across its scales: a patch of the
input often reappears, almost verbatim, in a downsampled copy of the same
image. Matching each patch against that downsampled copy and mapping the
matches back to full resolution yields image-specific HR exemplars; this
package builds that cross-scale k-NN patch graph, aggregates the exemplars
with Gaussian edge weights and adaptive patch normalization, and evaluates
the result with Y-channel PSNR/SSIM.
"""

__version__ = "0.1.0"

from .aggregate import (
    AggregationConfig,
    WeightedPatchSet,
    adapn,
    assemble_patches,
    compute_weights,
    gaussian_edge_weight,
    patch2img,
    super_resolve,
)
from .baseline import bicubic_baseline, same_scale_knn
from .errors import (
    ChannelMismatchError,
    ConfigError,
    CorruptFileError,
    CoverageError,
    GraphSRError,
    ImageIOError,
    InsufficientCandidatesError,
    InvalidDimensionError,
    NonFiniteInputError,
    PatchBoundsError,
    ScaleMismatchError,
    UnsupportedFormatError,
)
from .estimator import CrossScaleSuperResolver, plan_stages
from .graph import (
    CrossScaleGraph,
    GraphEdge,
    Patch,
    PatchCoord,
    ScaleTag,
    build_graph,
    dump_graph,
    extract_patch,
    format_graph,
    knn_search,
)
from .image import (
    BoundaryPolicy,
    Image,
    as_image,
    bicubic_resample,
    load_image,
    luminance,
    new_image,
    rgb_to_y,
    save_image,
)
from .metrics import QualityReport, evaluate, psnr_y, ssim_y
from .synthetic import generate_pair

__all__ = [
    "AggregationConfig",
    "BoundaryPolicy",
    "ChannelMismatchError",
    "ConfigError",
    "CorruptFileError",
    "CoverageError",
    "CrossScaleGraph",
    "CrossScaleSuperResolver",
    "GraphEdge",
    "GraphSRError",
    "Image",
    "ImageIOError",
    "InsufficientCandidatesError",
    "InvalidDimensionError",
    "NonFiniteInputError",
    "Patch",
    "PatchBoundsError",
    "PatchCoord",
    "QualityReport",
    "ScaleMismatchError",
    "ScaleTag",
    "UnsupportedFormatError",
    "WeightedPatchSet",
    "adapn",
    "as_image",
    "assemble_patches",
    "bicubic_baseline",
    "bicubic_resample",
    "build_graph",
    "compute_weights",
    "dump_graph",
    "evaluate",
    "extract_patch",
    "format_graph",
    "gaussian_edge_weight",
    "generate_pair",
    "knn_search",
    "load_image",
    "luminance",
    "new_image",
    "patch2img",
    "plan_stages",
    "psnr_y",
    "rgb_to_y",
    "same_scale_knn",
    "save_image",
    "ssim_y",
    "super_resolve",
]
