"""File formats: edge lists, matrix dumps, signal tables, JSON fields and specs.

Numbers are written with 17 significant digits so files re-ingest exactly.
Complex scalars are written as ``re+imj`` in CSV and ``[re, im]`` in JSON.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .exceptions import ValidationError
from .graph import build_graph, laplacian, adjacency, ShiftOperator, spectral_basis
from .spectral import SpectralMatrixField


def fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (complex, np.complexfloating)):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def parse_number(s):
    s = s.strip()
    if s.endswith("j"):
        return complex(s)
    return float(s)


def _rows(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        rows = [r for r in reader if r and any(c.strip() for c in r)]
    return header, rows


def read_edge_csv(path, n=None):
    """Read ``src,dst,weight`` rows; returns ``(edges, n)``.

    ``n`` defaults to one more than the largest node index.
    """
    header, rows = _rows(path)
    if header[:3] != ["src", "dst", "weight"]:
        raise ValidationError(f"{path}: expected header src,dst,weight")
    try:
        edges = [(int(r[0]), int(r[1]), float(r[2])) for r in rows]
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"{path}: malformed edge row ({exc})") from exc
    if n is None:
        n = 1 + max((max(s, t) for s, t, _ in edges), default=0)
    return edges, n


def write_edge_csv(path, graph):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["src", "dst", "weight"])
        for s, t, wt in graph.edges:
            w.writerow([s, t, fmt(wt)])


def load_graph(path, directed=False, n=None):
    edges, n = read_edge_csv(path, n)
    return build_graph(edges, n, directed)


def basis_from_graph(graph, gso="laplacian", matrix=None):
    if gso == "laplacian":
        s = laplacian(graph)
    elif gso == "adjacency":
        s = adjacency(graph)
    elif gso == "custom":
        if matrix is None:
            raise ValidationError("custom shift operator needs a matrix")
        s = ShiftOperator(matrix, "custom-normal")
    else:
        raise ValidationError(f"unknown shift operator {gso!r}")
    return spectral_basis(s)


def write_matrix_csv(path, m):
    m = np.asarray(m)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in m:
            w.writerow([fmt(v) for v in row])


def read_matrix_csv(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    try:
        vals = [[parse_number(c) for c in r] for r in rows]
    except ValueError as exc:
        raise ValidationError(f"{path}: malformed matrix entry ({exc})") from exc
    if len({len(r) for r in vals}) != 1:
        raise ValidationError(f"{path}: ragged matrix")
    return np.array(vals)


def write_signal_csv(path, x, labels=None):
    """Write ``(n, d[, M])`` as rows ``node,realization,<labels...>``."""
    x = np.asarray(x)
    if x.ndim == 2:
        x = x[:, :, None]
    n, d, m = x.shape
    labels = list(labels) if labels is not None else [f"d{j + 1}" for j in range(d)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", "realization", *labels])
        for i in range(n):
            for k in range(m):
                w.writerow([i, k, *(fmt(v) for v in x[i, :, k])])


def read_signal_csv(path):
    """Read a signal table; returns ``(array (n, d, M), labels)``."""
    header, rows = _rows(path)
    if header[:2] != ["node", "realization"] or len(header) < 3:
        raise ValidationError(f"{path}: expected header node,realization,<dims...>")
    labels = header[2:]
    try:
        parsed = [(int(r[0]), int(r[1]), [parse_number(c) for c in r[2:]]) for r in rows]
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"{path}: malformed signal row ({exc})") from exc
    if not parsed:
        raise ValidationError(f"{path}: no data rows")
    n = 1 + max(p[0] for p in parsed)
    m = 1 + max(p[1] for p in parsed)
    if len(parsed) != n * m:
        raise ValidationError(f"{path}: expected {n * m} rows for {n} nodes x {m} realizations")
    is_complex = any(isinstance(v, complex) for p in parsed for v in p[2])
    out = np.full((n, len(labels), m), np.nan, dtype=complex if is_complex else float)
    for i, k, vals in parsed:
        if len(vals) != len(labels):
            raise ValidationError(f"{path}: row for node {i} has {len(vals)} values")
        if i < 0 or k < 0:
            raise ValidationError(f"{path}: negative index")
        out[i, :, k] = vals
    if np.any(np.isnan(out)):
        raise ValidationError(f"{path}: missing or duplicate (node, realization) rows")
    return out, labels


def to_pairs(a):
    """Nested ``[re, im]`` lists of an array."""
    a = np.asarray(a)
    return np.stack([a.real, np.imag(a)], axis=-1).tolist()


def from_pairs(obj, ndim):
    """Inverse of :func:`to_pairs` for an array of ``ndim`` dimensions.

    Plain real numbers (no trailing pair axis) are accepted too.
    """
    a = np.asarray(obj, dtype=float)
    if a.ndim == ndim + 1 and a.shape[-1] == 2:
        if not np.any(a[..., 1]):
            return a[..., 0].copy()
        return a[..., 0] + 1j * a[..., 1]
    if a.ndim == ndim:
        return a
    raise ValidationError(f"expected a {ndim}-dimensional array, got shape {a.shape}")


def field_to_dict(field):
    return {
        "n": int(field.n),
        "p": int(field.p),
        "q": int(field.q),
        "frequencies": to_pairs(field.frequencies),
        "P_X": to_pairs(field.P_X),
        "P_Y": to_pairs(field.P_Y),
        "P_XY": to_pairs(field.P_XY),
    }


def field_from_dict(d):
    return SpectralMatrixField(
        from_pairs(d["frequencies"], 1),
        from_pairs(d["P_X"], 3),
        from_pairs(d["P_Y"], 3),
        from_pairs(d["P_XY"], 3),
    )


def dump_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_image_csv(path):
    """Read ``label,p0,...`` rows; returns ``(labels (N,), pixels (N, D))``."""
    header, rows = _rows(path)
    if not header or header[0] != "label" or len(header) < 2:
        raise ValidationError(f"{path}: expected header label,p0,...")
    try:
        labels = np.array([int(float(r[0])) for r in rows])
        pixels = np.array([[float(c) for c in r[1:]] for r in rows])
    except ValueError as exc:
        raise ValidationError(f"{path}: malformed image row ({exc})") from exc
    if pixels.ndim != 2 or pixels.shape[1] != len(header) - 1:
        raise ValidationError(f"{path}: ragged image table")
    return labels, pixels


def write_image_csv(path, labels, pixels):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", *(f"p{j}" for j in range(pixels.shape[1]))])
        for lab, row in zip(labels, pixels):
            w.writerow([int(lab), *(fmt(v) for v in row)])


def synthesis_spec_from_dict(d, base_dir="."):
    """Build a :class:`~gccha.synth.SynthesisSpec` from its JSON form.

    Keys: ``graph`` (``{"n", "edges", "directed"}``) or ``graph_csv``;
    ``gso``; ``p``; ``joint_field`` (``(n, d, d)``, real numbers or
    ``[re, im]`` pairs) or ``random_field`` (``{"q", "seed", "complex"}``);
    ``realizations``; ``seed``; optional ``means`` ``(n, d)``.
    """
    from .synth import SynthesisSpec, random_joint_field

    try:
        if "graph_csv" in d:
            graph = load_graph(Path(base_dir) / d["graph_csv"], d.get("directed", False))
        else:
            g = d["graph"]
            graph = build_graph([tuple(e) for e in g["edges"]], g["n"], g.get("directed", False))
        basis = basis_from_graph(graph, d.get("gso", "laplacian"))
        p = int(d["p"])
        if "joint_field" in d:
            jf = from_pairs(d["joint_field"], 3)
        else:
            rf = d["random_field"]
            jf = random_joint_field(basis.n, p, int(rf["q"]), int(rf.get("seed", 0)),
                                    bool(rf.get("complex", False)))
        means = from_pairs(d["means"], 2) if d.get("means") is not None else None
        spec = SynthesisSpec(basis, jf, p, int(d["realizations"]), int(d.get("seed", 0)), means)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed synthesis spec: {exc}") from exc
    return graph, spec


def load_synthesis_spec(path):
    path = Path(path)
    try:
        d = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"{path}: cannot read synthesis spec ({exc})") from exc
    return synthesis_spec_from_dict(d, path.parent)
