"""Soft texture segmentation: possibilistic fuzzy local-information
c-means over superpixel texture features."""

from .clustering import (ClusterConfig, DegenerateClusterError,
                         FeatureMatrix, NeighborhoodGraph, PartitionState,
                         RunDiagnostics, build_neighborhoods,
                         initial_partition, objective, run,
                         spatial_penalty, update_centers,
                         update_memberships, update_scales,
                         update_typicalities)
from .features import (PixelFeatureMap, assemble_features, hog_features,
                       lbp_features, normalize_features,
                       sobel_edge_histogram)
from .maps import align_clusters, hard_assignments, product_values, render_map
from .pipeline import (PipelineConfig, cluster_csv, compare,
                       reduced_cluster_config, resolve_algorithm, segment,
                       synthesize)
from .superpixels import (SuperpixelMap, aggregate, enforce_connectivity,
                          project_to_pixels, slic)

__version__ = "0.1.0"

__all__ = [
    "ClusterConfig", "DegenerateClusterError", "FeatureMatrix",
    "NeighborhoodGraph", "PartitionState", "RunDiagnostics",
    "build_neighborhoods", "initial_partition", "objective", "run",
    "spatial_penalty", "update_centers", "update_memberships",
    "update_scales", "update_typicalities",
    "PixelFeatureMap", "assemble_features", "hog_features", "lbp_features",
    "normalize_features", "sobel_edge_histogram",
    "align_clusters", "hard_assignments", "product_values", "render_map",
    "PipelineConfig", "cluster_csv", "compare", "reduced_cluster_config",
    "resolve_algorithm", "segment", "synthesize",
    "SuperpixelMap", "aggregate", "enforce_connectivity",
    "project_to_pixels", "slic",
    "__version__",
]
