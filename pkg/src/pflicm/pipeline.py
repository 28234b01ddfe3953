"""End-to-end orchestration: image -> features -> superpixels -> soft
segmentation -> map/table artifacts.

A single PipelineConfig carries every knob of every stage (clustering,
feature extraction, oversegmentation, synthesis) so each run can echo
its fully resolved configuration next to its outputs; re-running from
that echo reproduces the outputs bit-identically.
"""

from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import imageio, maps, synth
from .clustering import ClusterConfig, run
from .features import (PixelFeatureMap, assemble_features, hog_features,
                       lbp_features, normalize_features,
                       sobel_edge_histogram)
from .superpixels import aggregate, slic

ALGORITHMS = ("pflicm", "flicm", "pfcm", "fcm")
COMPARE_ALGOS = ("pflicm", "flicm", "pfcm")
ECHO_NAME = "config_echo.txt"


class UsageError(Exception):
    """Bad flags or an inconsistent configuration."""


class NonConvergenceError(RuntimeError):
    """Clustering hit the iteration cap in strict mode."""


@dataclass
class PipelineConfig:
    input: str = ""
    out_dir: str = ""
    algo: str = "pflicm"
    n_clusters: int = 3
    a: float = 14.0
    b: float = 0.3
    m: float = 1.8
    q: float = 2.2
    epsilon: float = 1e-6
    max_iters: int = 500
    radius: float = float("inf")
    seed: int = 0
    k_target: int = 0
    compactness: float = 10.0
    slic_iters: int = 10
    features: tuple = ("sobel", "hog", "lbp")
    sobel_window: int = 17
    sobel_threshold: float = 0.5
    hog_cell: int = 2
    hog_cells_per_block: int = 2
    hog_block_overlap: int = 1
    hog_bins: int = 9
    hog_window: int = 5
    lbp_cell: int = 3
    map_format: str = "png"
    normalize: bool = False
    export_features: bool = False
    strict: bool = False
    kind: str = "composite"
    rows: int = 256
    cols: int = 256
    bands: tuple = ("ripple", "flat")
    orientation: str = "vertical"
    outlier: bool = False

    def cluster_config(self):
        return ClusterConfig(n_clusters=self.n_clusters, a=self.a, b=self.b,
                             m=self.m, q=self.q, epsilon=self.epsilon,
                             max_iters=self.max_iters, radius=self.radius,
                             seed=self.seed)


def _parse_field(name, ftype, raw):
    raw = raw.strip()
    if ftype is bool:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise UsageError(f"config key {name}: expected true/false, "
                         f"got {raw!r}")
    if ftype is int:
        return int(raw)
    if ftype is float:
        return float(raw)
    if ftype is tuple:
        return tuple(s.strip() for s in raw.split(",") if s.strip())
    return raw


def config_to_mapping(cfg):
    out = {}
    for f in fields(PipelineConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            value = ",".join(value)
        out[f.name] = value
    return out


def config_from_mapping(mapping, base=None):
    """Apply string key=value overrides onto a PipelineConfig."""
    cfg = base if base is not None else PipelineConfig()
    types = {f.name: type(getattr(cfg, f.name)) for f in
             fields(PipelineConfig)}
    updates = {}
    for key, raw in mapping.items():
        if key not in types:
            raise UsageError(f"unknown config key {key!r}")
        try:
            updates[key] = _parse_field(key, types[key], raw)
        except ValueError as exc:
            raise UsageError(f"config key {key}: {exc}") from exc
    return replace(cfg, **updates)


def resolve_algorithm(cfg, explicit=()):
    """Apply the algorithm selector's parameter reduction.

    flicm forces b=0, pfcm forces radius=0, fcm forces both.  A user
    value that contradicts the selected algorithm is an error rather
    than a silent override.
    """
    if cfg.algo not in ALGORITHMS:
        raise UsageError(f"unknown algorithm {cfg.algo!r}; "
                         f"choose from {', '.join(ALGORITHMS)}")
    forced = {}
    if cfg.algo in ("flicm", "fcm"):
        forced["b"] = 0.0
    if cfg.algo in ("pfcm", "fcm"):
        forced["radius"] = 0.0
    for key, value in forced.items():
        if key in explicit and getattr(cfg, key) != value:
            raise UsageError(
                f"algorithm {cfg.algo} requires {key}={value:g} but "
                f"{key}={getattr(cfg, key):g} was given")
    return replace(cfg, **forced)


def write_config_echo(cfg, out_dir):
    imageio.write_key_values(Path(out_dir) / ECHO_NAME,
                             config_to_mapping(cfg))


def extract_feature_map(img, cfg):
    """Run the enabled per-pixel descriptors and concatenate them."""
    if not cfg.features:
        raise UsageError("at least one feature kind must be enabled")
    parts = []
    for name in cfg.features:
        if name == "sobel":
            parts.append(sobel_edge_histogram(img, cfg.sobel_window,
                                              cfg.sobel_threshold))
        elif name == "hog":
            parts.append(hog_features(img, cfg.hog_cell,
                                      cfg.hog_cells_per_block,
                                      cfg.hog_block_overlap, cfg.hog_bins,
                                      cfg.hog_window))
        elif name == "lbp":
            parts.append(lbp_features(img, cfg.lbp_cell))
        else:
            raise UsageError(f"unknown feature kind {name!r}")
    if len(parts) == 3:
        return assemble_features(*parts)
    values = np.concatenate(parts, axis=2)
    return PixelFeatureMap(values=values,
                           block_dims=tuple(p.shape[2] for p in parts))


def preprocess(img, cfg):
    """Features, superpixels, and the normalized clustering matrix."""
    if cfg.k_target < 1:
        raise UsageError("k_target must be a positive superpixel count")
    fmap = extract_feature_map(img, cfg)
    sp = slic(img, cfg.k_target, cfg.compactness, cfg.slic_iters)
    matrix = normalize_features(aggregate(fmap, sp))
    return fmap, sp, matrix


def _run_clustering(matrix, cfg, cluster_cfg=None):
    ccfg = cluster_cfg if cluster_cfg is not None else cfg.cluster_config()
    state, diag = run(matrix, ccfg)
    if cfg.strict and not diag.converged:
        raise NonConvergenceError(
            f"no convergence within {ccfg.max_iters} iterations")
    return state, diag


def _diagnostics_mapping(diag):
    return {
        "iterations": diag.iterations,
        "converged": diag.converged,
        "final_objective": float(diag.objective_trace[-1]),
        "final_max_delta": float(diag.max_delta_trace[-1]),
        "reseeds": len(diag.reseeds),
    }


def _write_maps(out_dir, stem, algo, state, sp, cfg, kinds):
    paths = []
    for kind in kinds:
        for c, pix in enumerate(maps.cluster_pixel_maps(state, sp, kind)):
            path = Path(out_dir) / \
                f"{stem}_{algo}_c{c}_{kind}.{cfg.map_format}"
            maps.render_map(pix, path)
            paths.append(path)
    return paths


def _write_superpixel_exports(out_dir, sp):
    imageio.write_label_pgm(Path(out_dir) / "superpixels.pgm", sp.labels)
    table = Path(out_dir) / "superpixels.csv"
    with open(table, "w", newline="") as fh:
        fh.write("superpixel,row,col,size\n")
        for s in range(sp.n_superpixels):
            fh.write(f"{s},{format(sp.centroids[s, 0], '.17g')},"
                     f"{format(sp.centroids[s, 1], '.17g')},"
                     f"{int(sp.sizes[s])}\n")


@dataclass
class SegmentResult:
    state: object
    diagnostics: object
    superpixels: object
    matrix: object
    map_paths: list


def segment(cfg):
    """Full pipeline on one image; writes maps, partition, diagnostics,
    superpixel exports, and the config echo into cfg.out_dir."""
    if not cfg.input:
        raise UsageError("segment needs an input image")
    if not cfg.out_dir:
        raise UsageError("segment needs an output directory")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    img = imageio.read_gray_image(cfg.input)
    _, sp, matrix = preprocess(img, cfg)
    state, diag = _run_clustering(matrix, cfg)
    write_config_echo(cfg, out)
    _write_superpixel_exports(out, sp)
    if cfg.export_features:
        imageio.write_feature_csv(out / "features.csv", matrix)
    stem = Path(cfg.input).stem
    paths = _write_maps(out, stem, cfg.algo, state, sp, cfg, maps.MAP_KINDS)
    imageio.write_partition_csv(out / "partition.csv", state)
    imageio.write_key_values(out / "diagnostics.txt",
                             _diagnostics_mapping(diag))
    return SegmentResult(state=state, diagnostics=diag, superpixels=sp,
                         matrix=matrix, map_paths=paths)


@dataclass
class CompareResult:
    states: dict
    diagnostics: dict
    superpixels: object
    matrix: object
    permutations: dict


def compare(cfg):
    """Segment with pflicm, flicm, and pfcm off one shared preprocessing
    pass; clusters of the baselines are permuted to line up with the
    pflicm clusters before anything is written.

    Each algorithm gets its own subdirectory holding its most relevant
    maps (product maps for the possibilistic algorithms, membership maps
    otherwise), partition, diagnostics, and the shared label export.
    """
    if not cfg.input:
        raise UsageError("compare needs an input image")
    if not cfg.out_dir:
        raise UsageError("compare needs an output directory")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    img = imageio.read_gray_image(cfg.input)
    _, sp, matrix = preprocess(img, cfg)
    stem = Path(cfg.input).stem
    base = cfg.cluster_config()
    states, diags, perms = {}, {}, {}
    for algo in COMPARE_ALGOS:
        ccfg = reduced_cluster_config(base, algo)
        state, diag = _run_clustering(matrix, cfg, ccfg)
        if algo == "pflicm":
            perm = np.arange(cfg.n_clusters)
        else:
            perm = maps.align_clusters(states["pflicm"].centers,
                                       state.centers)
            state = replace(state,
                            memberships=state.memberships[perm],
                            typicalities=state.typicalities[perm],
                            centers=state.centers[perm],
                            scales=state.scales[perm])
        states[algo], diags[algo], perms[algo] = state, diag, perm
        algo_dir = out / algo
        algo_dir.mkdir(exist_ok=True)
        kind = "product" if algo in ("pflicm", "pfcm") else "membership"
        _write_maps(algo_dir, stem, algo, state, sp, cfg, (kind,))
        imageio.write_partition_csv(algo_dir / "partition.csv", state)
        imageio.write_key_values(algo_dir / "diagnostics.txt",
                                 _diagnostics_mapping(diag))
        _write_superpixel_exports(algo_dir, sp)
    write_config_echo(cfg, out)
    return CompareResult(states=states, diagnostics=diags, superpixels=sp,
                         matrix=matrix, permutations=perms)


def reduced_cluster_config(base, algo):
    """ClusterConfig for a named algorithm, from shared settings."""
    if algo == "pflicm":
        return base
    if algo == "flicm":
        return replace(base, b=0.0)
    if algo == "pfcm":
        return replace(base, radius=0.0)
    if algo == "fcm":
        return replace(base, b=0.0, radius=0.0)
    raise UsageError(f"unknown algorithm {algo!r}")


def cluster_csv(cfg):
    """Cluster a feature-matrix CSV directly (no image pipeline)."""
    if not cfg.input:
        raise UsageError("cluster needs an input CSV")
    if not cfg.out_dir:
        raise UsageError("cluster needs an output directory")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    matrix = imageio.read_feature_csv(cfg.input)
    if cfg.normalize:
        matrix = normalize_features(matrix)
    state, diag = _run_clustering(matrix, cfg)
    write_config_echo(cfg, out)
    imageio.write_partition_csv(out / "partition.csv", state)
    imageio.write_key_values(out / "diagnostics.txt",
                             _diagnostics_mapping(diag))
    return state, diag


def synthesize(cfg):
    """Generate a synthetic scene and write image, ground-truth labels,
    and outlier mask."""
    if not cfg.out_dir:
        raise UsageError("synth needs an output directory")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = {}
    if cfg.kind == "composite":
        params = {"kinds": cfg.bands, "orientation": cfg.orientation,
                  "outlier": cfg.outlier}
    scene = synth.generate(cfg.kind, cfg.rows, cfg.cols, cfg.seed, **params)
    write_config_echo(cfg, out)
    image_path = out / f"synthetic.{cfg.map_format}"
    imageio.write_gray_u8(image_path, maps.quantize(scene.image))
    imageio.write_label_pgm(out / "ground_truth.pgm", scene.labels)
    imageio.write_gray_u8(out / "outlier_mask.pgm",
                          scene.outlier_mask.astype(np.uint8) * 255)
    return scene, image_path
