"""Image and table file formats.

Grayscale images come in as 8-bit PGM (binary P5 or ASCII P2) or PNG and
are scaled to [0, 1].  Label images go out as 16-bit binary PGM.  Feature
matrices and partitions travel as CSV; configs and diagnostics as
key=value text.  All float output uses %.17g so values round-trip
exactly and byte-identical inputs yield byte-identical files.
"""

import csv
import io as _io
from pathlib import Path

import numpy as np
from PIL import Image

from .clustering import FeatureMatrix


class FileFormatError(ValueError):
    """Malformed input file content."""


def _fmt(x):
    return format(float(x), ".17g")


# ---------------------------------------------------------------- images

def _pgm_tokens(data):
    """Yield whitespace-separated header tokens, skipping # comments."""
    pos = 0
    while pos < len(data):
        ch = data[pos:pos + 1]
        if ch.isspace():
            pos += 1
        elif ch == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
        else:
            end = pos
            while end < len(data) and not data[end:end + 1].isspace():
                end += 1
            yield data[pos:end], end
            pos = end


def read_pgm(path):
    """Read a P2/P5 PGM into a float array scaled to [0, 1]."""
    data = Path(path).read_bytes()
    toks = _pgm_tokens(data)
    try:
        magic, _ = next(toks)
        if magic not in (b"P2", b"P5"):
            raise FileFormatError(f"{path}: not a PGM (magic {magic!r})")
        (w, _), (h, _), (maxval, end) = (next(toks) for _ in range(3))
        w, h, maxval = int(w), int(h), int(maxval)
    except (StopIteration, ValueError) as exc:
        raise FileFormatError(f"{path}: truncated or invalid PGM header") \
            from exc
    if maxval <= 0 or maxval > 65535:
        raise FileFormatError(f"{path}: unsupported maxval {maxval}")
    if magic == b"P5":
        raster = data[end + 1:]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        expected = w * h * dtype.itemsize
        if len(raster) < expected:
            raise FileFormatError(f"{path}: raster shorter than {expected} "
                                  "bytes")
        pix = np.frombuffer(raster[:expected], dtype=dtype)
    else:
        try:
            pix = np.array([int(t) for t, _ in toks], dtype=np.int64)
        except ValueError as exc:
            raise FileFormatError(f"{path}: non-integer ASCII sample") \
                from exc
        if pix.size != w * h:
            raise FileFormatError(f"{path}: expected {w * h} samples, "
                                  f"got {pix.size}")
    if pix.max(initial=0) > maxval:
        raise FileFormatError(f"{path}: sample exceeds maxval")
    return pix.reshape(h, w).astype(float) / float(maxval)


def write_pgm(path, values, maxval=255):
    """Write integer gray values as binary (P5) PGM."""
    values = np.asarray(values)
    header = f"P5\n{values.shape[1]} {values.shape[0]}\n{maxval}\n"
    dtype = np.dtype(">u2") if maxval > 255 else np.uint8
    Path(path).write_bytes(header.encode("ascii")
                           + values.astype(dtype).tobytes())


def read_gray_image(path):
    """Read a grayscale image file (PGM or PNG) scaled to [0, 1]."""
    path = Path(path)
    if path.suffix.lower() in (".pgm", ".pnm"):
        return read_pgm(path)
    with Image.open(path) as im:
        if im.mode != "L":
            im = im.convert("L")
        return np.asarray(im, dtype=float) / 255.0


def write_gray_u8(path, values):
    """Write 8-bit gray values as PGM or PNG, chosen by extension."""
    path = Path(path)
    values = np.asarray(values, dtype=np.uint8)
    if path.suffix.lower() in (".pgm", ".pnm"):
        write_pgm(path, values, maxval=255)
    else:
        Image.fromarray(values, mode="L").save(path)


def write_label_pgm(path, labels):
    """Write an integer label image as 16-bit PGM."""
    labels = np.asarray(labels)
    if labels.min() < 0 or labels.max() > 65535:
        raise ValueError("labels out of 16-bit range")
    write_pgm(path, labels, maxval=65535)


# ---------------------------------------------------------------- tables

def write_feature_csv(path, matrix):
    """Feature matrix as CSV: row, col, f1..fd; one line per point."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col"]
                        + [f"f{i + 1}" for i in range(matrix.dim)])
        for coord, point in zip(matrix.coords, matrix.points):
            writer.writerow([_fmt(coord[0]), _fmt(coord[1])]
                            + [_fmt(v) for v in point])


def read_feature_csv(path):
    """Parse a feature-matrix CSV, naming the offending row on errors."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FileFormatError(f"{path}: empty file") from None
        dim = len(header) - 2
        if dim < 1 or header[:2] != ["row", "col"] or \
                header[2:] != [f"f{i + 1}" for i in range(dim)]:
            raise FileFormatError(
                f"{path}: header must be row,col,f1..fd; got {header}")
        coords, points = [], []
        for i, cells in enumerate(reader, start=2):
            if len(cells) != dim + 2:
                raise FileFormatError(
                    f"{path}: row {i}: expected {dim + 2} fields, "
                    f"got {len(cells)}")
            try:
                nums = [float(c) for c in cells]
            except ValueError:
                raise FileFormatError(
                    f"{path}: row {i}: non-numeric field") from None
            coords.append(nums[:2])
            points.append(nums[2:])
    if not points:
        raise FileFormatError(f"{path}: no data rows")
    return FeatureMatrix(points=np.array(points), coords=np.array(coords))


def write_partition_csv(path, state):
    """Partition as CSV: cluster, point, membership, typicality."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cluster", "point", "membership", "typicality"])
        for c in range(state.n_clusters):
            for n in range(state.n_points):
                writer.writerow([c, n, _fmt(state.memberships[c, n]),
                                 _fmt(state.typicalities[c, n])])


def read_partition_csv(path):
    """Read a partition CSV back into (memberships, typicalities)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["cluster", "point", "membership", "typicality"]:
            raise FileFormatError(f"{path}: unexpected header {header}")
        rows = [(int(c), int(n), float(u), float(t))
                for c, n, u, t in reader]
    n_clusters = max(r[0] for r in rows) + 1
    n_points = max(r[1] for r in rows) + 1
    u = np.zeros((n_clusters, n_points))
    t = np.zeros((n_clusters, n_points))
    for c, n, uv, tv in rows:
        u[c, n] = uv
        t[c, n] = tv
    return u, t


# ------------------------------------------------------------ key=value

def write_key_values(path, mapping):
    """Write a mapping as `key = value` lines."""
    buf = _io.StringIO()
    for key, value in mapping.items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = _fmt(value)
        buf.write(f"{key} = {value}\n")
    Path(path).write_text(buf.getvalue())


def read_key_values(path):
    """Parse `key = value` lines; blank lines and # comments ignored."""
    result = {}
    for i, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise FileFormatError(f"{path}: line {i}: expected key = value")
        key, _, value = stripped.partition("=")
        result[key.strip()] = value.strip()
    return result
