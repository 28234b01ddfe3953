"""Command-line interface.

Subcommands: ``segment`` (full image pipeline), ``cluster`` (feature-CSV
clustering), ``compare`` (pflicm/flicm/pfcm off shared preprocessing),
and ``synth`` (synthetic texture scenes).  Options may come from a
`key = value` config file via --config; explicit flags win over the
file, and both win over built-in defaults.

Exit codes: 0 success, 1 usage or configuration error, 2 input/output
error, 3 numerical failure (non-convergence under --strict).
"""

import argparse
import sys

from .clustering import DegenerateClusterError
from .imageio import FileFormatError, read_key_values
from .pipeline import (NonConvergenceError, PipelineConfig, UsageError,
                       cluster_csv, compare, config_from_mapping,
                       resolve_algorithm, segment, synthesize)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(p):
    p.add_argument("--out-dir", help="directory for all output artifacts")
    p.add_argument("--seed", type=int, help="PRNG seed")
    p.add_argument("--config", help="key = value config file; flags win")
    p.add_argument("--map-format", choices=("png", "pgm"),
                   help="image format for rendered maps")


def _add_clustering(p):
    p.add_argument("--algo", choices=("pflicm", "flicm", "pfcm", "fcm"),
                   help="clustering algorithm (selector forces b/radius)")
    p.add_argument("--clusters", type=int, dest="n_clusters",
                   help="number of clusters C")
    p.add_argument("--a", type=float, help="membership term weight")
    p.add_argument("--b", type=float, help="typicality term weight")
    p.add_argument("--m", type=float, help="membership fuzzifier (> 1)")
    p.add_argument("--q", type=float, help="typicality fuzzifier (> 1)")
    p.add_argument("--epsilon", type=float,
                   help="stop when the max membership change drops below")
    p.add_argument("--max-iters", type=int, dest="max_iters")
    p.add_argument("--radius", type=float,
                   help="neighborhood radius in pixels; accepts inf")
    p.add_argument("--strict", action="store_true", default=None,
                   help="exit 3 if the iteration cap is reached")


def _add_image(p):
    p.add_argument("--input", help="input grayscale image (PGM or PNG)")
    p.add_argument("--k-target", type=int, dest="k_target",
                   help="requested superpixel count")
    p.add_argument("--compactness", type=float,
                   help="superpixel spatial regularity weight")
    p.add_argument("--features",
                   help="comma list from sobel,hog,lbp (default all)")
    p.add_argument("--sobel-window", type=int, dest="sobel_window")
    p.add_argument("--sobel-threshold", type=float, dest="sobel_threshold")
    p.add_argument("--lbp-cell", type=int, dest="lbp_cell")
    p.add_argument("--export-features", action="store_true", default=None,
                   dest="export_features",
                   help="also write the clustering feature matrix as CSV")


def build_parser():
    parser = _Parser(prog="pflicm",
                     description="soft texture segmentation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="segment one grayscale image")
    _add_common(seg)
    _add_clustering(seg)
    _add_image(seg)

    clu = sub.add_parser("cluster", help="cluster a feature-matrix CSV")
    _add_common(clu)
    _add_clustering(clu)
    clu.add_argument("--input", help="feature matrix CSV (row,col,f1..fd)")
    clu.add_argument("--normalize", action="store_true", default=None,
                     help="z-score the features before clustering")

    cmp_ = sub.add_parser("compare",
                          help="run pflicm, flicm, and pfcm side by side")
    _add_common(cmp_)
    _add_clustering(cmp_)
    _add_image(cmp_)

    syn = sub.add_parser("synth", help="generate a synthetic scene")
    _add_common(syn)
    syn.add_argument("--kind",
                     choices=("ripple", "flat", "rock-noise", "composite"))
    syn.add_argument("--rows", type=int)
    syn.add_argument("--cols", type=int)
    syn.add_argument("--bands",
                     help="composite band textures, e.g. ripple,flat")
    syn.add_argument("--orientation", choices=("vertical", "diagonal"))
    syn.add_argument("--outlier", action="store_true", default=None,
                     help="inject a bright outlier blob")
    return parser


_TUPLE_KEYS = ("features", "bands")


def build_config(args):
    """Resolve defaults, config file, and flags into a PipelineConfig.

    Returns the resolved config and the set of explicitly-set keys
    (needed to reject flag values that contradict the algorithm).
    """
    overrides = {}
    if getattr(args, "config", None):
        overrides.update(read_key_values(args.config))
    field_names = {f for f in PipelineConfig.__dataclass_fields__}
    for key, value in vars(args).items():
        if key in field_names and value is not None:
            overrides[key] = value if isinstance(value, str) else value
    # config_from_mapping expects strings; normalize flag values
    as_strings = {}
    for key, value in overrides.items():
        if isinstance(value, bool):
            as_strings[key] = "true" if value else "false"
        elif isinstance(value, (tuple, list)):
            as_strings[key] = ",".join(value)
        else:
            as_strings[key] = str(value)
    cfg = config_from_mapping(as_strings)
    return resolve_algorithm(cfg, explicit=set(as_strings)), set(as_strings)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg, _ = build_config(args)
        if args.command == "segment":
            result = segment(cfg)
            d = result.diagnostics
            print(f"segmented {cfg.input}: {result.superpixels.n_superpixels}"
                  f" superpixels, {d.iterations} iterations, "
                  f"converged={d.converged}")
        elif args.command == "cluster":
            state, diag = cluster_csv(cfg)
            print(f"clustered {state.n_points} points into "
                  f"{state.n_clusters} clusters in {diag.iterations} "
                  f"iterations, converged={diag.converged}")
        elif args.command == "compare":
            result = compare(cfg)
            iters = {a: d.iterations for a, d in result.diagnostics.items()}
            print(f"compared pflicm/flicm/pfcm on {cfg.input}: "
                  f"iterations {iters}")
        elif args.command == "synth":
            scene, image_path = synthesize(cfg)
            print(f"wrote {image_path} ({cfg.rows}x{cfg.cols}, "
                  f"kind={cfg.kind})")
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileFormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except (NonConvergenceError, DegenerateClusterError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
