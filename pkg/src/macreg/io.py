"""Text file I/O: correspondence files, 4x4 ground-truth transforms, ASCII
PLY clouds, and flat key=value config files.

All numeric output uses 17 significant digits so that load(save(x)) == x
bit-exactly for float64 data.
"""

from __future__ import annotations

import numpy as np

from .correspondences import Correspondences
from .errors import FileFormatError
from .geometry import RigidTransform, nearest_rotation

_FLOAT_FMT = "{:.17g}"


def _fmt_row(values) -> str:
    return " ".join(_FLOAT_FMT.format(v) for v in values)


def _parse_floats(tokens, path, line_no) -> list[float]:
    out = []
    for tok in tokens:
        try:
            v = float(tok)
        except ValueError:
            raise FileFormatError(f"not a number: {tok!r}", path, line_no) from None
        if not np.isfinite(v):
            raise FileFormatError(f"non-finite value: {tok!r}", path, line_no)
        out.append(v)
    return out


def _data_lines(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.readlines()
    except FileNotFoundError:
        raise FileFormatError("file not found", path) from None
    for line_no, line in enumerate(raw, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield line_no, stripped


def load_correspondences(path) -> Correspondences:
    """Whitespace-delimited correspondence file: 6 columns per line
    (sx sy sz tx ty tz) or 12 with source/target normals appended. Normals
    must be unit length within 1e-3 and are renormalized on load."""
    src, tgt, sn, tn = [], [], [], []
    n_cols = None
    for line_no, line in _data_lines(path):
        tokens = line.split()
        if len(tokens) not in (6, 12):
            raise FileFormatError(
                f"expected 6 or 12 columns, got {len(tokens)}", path, line_no
            )
        if n_cols is None:
            n_cols = len(tokens)
        elif len(tokens) != n_cols:
            raise FileFormatError(
                f"inconsistent column count: expected {n_cols}, got {len(tokens)}",
                path,
                line_no,
            )
        vals = _parse_floats(tokens, path, line_no)
        src.append(vals[0:3])
        tgt.append(vals[3:6])
        if n_cols == 12:
            for name, vec in (("source", vals[6:9]), ("target", vals[9:12])):
                norm = float(np.linalg.norm(vec))
                if abs(norm - 1.0) > 1e-3:
                    raise FileFormatError(
                        f"{name} normal is not unit length (|n| = {norm:.6g})",
                        path,
                        line_no,
                    )
            sn.append(np.asarray(vals[6:9]) / np.linalg.norm(vals[6:9]))
            tn.append(np.asarray(vals[9:12]) / np.linalg.norm(vals[9:12]))
    if not src:
        raise FileFormatError("no correspondences in file", path)
    if n_cols == 12:
        return Correspondences(src, tgt, np.array(sn), np.array(tn))
    return Correspondences(src, tgt)


def save_correspondences(path, corrs: Correspondences) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(len(corrs)):
            row = list(corrs.source[i]) + list(corrs.target[i])
            if corrs.has_normals:
                row += list(corrs.source_normals[i]) + list(corrs.target_normals[i])
            fh.write(_fmt_row(row) + "\n")


def load_transform(path) -> RigidTransform:
    """4x4 row-major rigid transform. The rotation block must be within 1e-3
    of SO(3) and is projected onto the nearest rotation; the bottom row must
    be (0, 0, 0, 1)."""
    values, line_nos = [], []
    for line_no, line in _data_lines(path):
        vals = _parse_floats(line.split(), path, line_no)
        values.extend(vals)
        line_nos.append(line_no)
    if len(values) != 16:
        raise FileFormatError(
            f"expected 16 matrix entries, got {len(values)}", path
        )
    m = np.array(values, dtype=float).reshape(4, 4)
    if not np.allclose(m[3], [0.0, 0.0, 0.0, 1.0], atol=1e-6):
        raise FileFormatError("bottom row must be (0, 0, 0, 1)", path)
    r = m[:3, :3]
    if np.abs(r.T @ r - np.eye(3)).max() > 1e-3 or np.linalg.det(r) < 0:
        raise FileFormatError("rotation block is not within 1e-3 of SO(3)", path)
    return RigidTransform(nearest_rotation(r), m[:3, 3])


def save_transform(path, transform: RigidTransform) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in transform.as_matrix():
            fh.write(_fmt_row(row) + "\n")


def load_ply(path):
    """ASCII PLY with x, y, z and optional nx, ny, nz vertex properties.
    Returns (points, normals-or-None)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except FileNotFoundError:
        raise FileFormatError("file not found", path) from None
    if not lines or lines[0].strip() != "ply":
        raise FileFormatError("missing 'ply' magic", path, 1)
    n_vertices = None
    props = []
    header_end = None
    in_vertex = False
    for i, line in enumerate(lines[1:], start=2):
        tokens = line.split()
        if not tokens:
            continue
        if tokens[0] == "format":
            if tokens[1:] != ["ascii", "1.0"]:
                raise FileFormatError("only 'format ascii 1.0' is supported", path, i)
        elif tokens[0] == "element":
            in_vertex = tokens[1] == "vertex"
            if in_vertex:
                n_vertices = int(tokens[2])
        elif tokens[0] == "property" and in_vertex:
            props.append(tokens[-1])
        elif tokens[0] == "end_header":
            header_end = i
            break
    if header_end is None or n_vertices is None:
        raise FileFormatError("malformed PLY header", path)
    if props[:3] != ["x", "y", "z"]:
        raise FileFormatError("vertex element must start with x, y, z", path)
    has_normals = props[3:6] == ["nx", "ny", "nz"]
    width = 6 if has_normals else 3

    rows = []
    for offset, line in enumerate(lines[header_end:], start=header_end + 1):
        if not line.strip():
            continue
        tokens = line.split()
        if len(tokens) != len(props):
            raise FileFormatError(
                f"expected {len(props)} values, got {len(tokens)}", path, offset
            )
        rows.append(_parse_floats(tokens, path, offset)[:width])
    if len(rows) != n_vertices:
        raise FileFormatError(
            f"header promises {n_vertices} vertices, file has {len(rows)}", path
        )
    data = np.array(rows, dtype=float)
    points = data[:, :3]
    normals = data[:, 3:6] if has_normals else None
    return points, normals


def save_ply(path, points, normals=None) -> None:
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {len(points)}\n")
        fh.write("property double x\nproperty double y\nproperty double z\n")
        if normals is not None:
            fh.write("property double nx\nproperty double ny\nproperty double nz\n")
        fh.write("end_header\n")
        for i, p in enumerate(points):
            row = list(p)
            if normals is not None:
                row += list(normals[i])
            fh.write(_fmt_row(row) + "\n")


def load_config_file(path) -> dict[str, str]:
    """Flat key=value file; keys mirror CLI flag names without the dashes."""
    out = {}
    for line_no, line in _data_lines(path):
        if "=" not in line:
            raise FileFormatError("expected key=value", path, line_no)
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def load_manifest(path) -> list[tuple[str, str, str]]:
    """Manifest of benchmark pairs: 'corr_path gt_path' per line. Returns
    (corr, gt, meta) tuples with meta = corr path."""
    pairs = []
    for line_no, line in _data_lines(path):
        tokens = line.split()
        if len(tokens) != 2:
            raise FileFormatError(
                f"expected 'corr_path gt_path', got {len(tokens)} fields", path, line_no
            )
        pairs.append((tokens[0], tokens[1], tokens[0]))
    return pairs
