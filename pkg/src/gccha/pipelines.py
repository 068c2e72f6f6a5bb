"""End-to-end pipelines: file-based analysis and split-image classification."""

import csv
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import io
from ._validation import check_rank
from .core import run_gccha
from .estimators import estimator_config
from .exceptions import DimensionMismatch, KTooLarge, ValidationError, ZeroVectorImage
from .graph import FilterBank, apply_filter_bank, build_graph, laplacian, spectral_basis
from .interpretation import SALIENCE_THRESHOLD, adequacy, long_table, loadings, salient_loadings
from .spectral import spectral_matrix_field

logger = logging.getLogger(__name__)

BRIDGE_WEIGHT = 1e-6
FEATURE_SCALINGS = ("unit-norm", "unit-gpsd")


def max_workers():
    try:
        return max(1, int(os.environ.get("GCCHA_THREADS", "1")))
    except ValueError:
        return 1


# --------------------------------------------------------------------------
# analysis


@dataclass
class AnalysisConfig:
    graph_path: str
    x_path: str
    y_path: str
    output_dir: str
    gso: str = "laplacian"
    gso_matrix_path: str = None
    estimator: str = "auto"
    windows: int = 50
    seed: int = 0
    ridge: float = 1e-8
    center: bool = True
    rank: int = None
    loading_threshold: float = SALIENCE_THRESHOLD
    directed: bool = False


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([io.fmt(v) for v in row])


def analyze(cfg):
    """Run the full analysis on files and write the result bundle.

    Writes ``coherence_curves.csv``, ``loadings.csv``,
    ``canonical_signals.csv``, ``field.json``, ``solution.json`` and
    ``summary.json`` into ``cfg.output_dir``; returns the summary dict.
    """
    for p in (cfg.graph_path, cfg.x_path, cfg.y_path):
        if not Path(p).is_file():
            raise ValidationError(f"input file not found: {p}")
    x, x_labels = io.read_signal_csv(cfg.x_path)
    y, y_labels = io.read_signal_csv(cfg.y_path)
    edges, n_edges = io.read_edge_csv(cfg.graph_path)
    graph = build_graph(edges, max(n_edges, x.shape[0]), cfg.directed)
    matrix = io.read_matrix_csv(cfg.gso_matrix_path) if cfg.gso_matrix_path else None
    basis = io.basis_from_graph(graph, cfg.gso, matrix)
    if x.shape[0] != basis.n or y.shape[0] != basis.n:
        raise DimensionMismatch(f"signals have {x.shape[0]}/{y.shape[0]} nodes, graph has {basis.n}")
    if x.shape[2] != y.shape[2]:
        raise DimensionMismatch("X and Y have different realization counts")
    r = check_rank(cfg.rank, x.shape[1], y.shape[1])

    est = estimator_config(cfg.estimator, x.shape[2], cfg.windows, cfg.seed, cfg.ridge, cfg.center)
    fld = spectral_matrix_field(x, y, basis, est)
    sol = run_gccha(x, y, basis, fld, r, cfg.ridge)
    rep = loadings(sol, fld)
    adq_z, adq_w, cum_z, cum_w = adequacy(rep)

    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    lam = basis.eigenvalues
    gamma = sol.coherence_curves
    _write_csv(
        out / "coherence_curves.csv",
        ["frequency_index", "lambda", *(f"gamma_{i + 1}" for i in range(r))],
        [(ell, lam[ell], *gamma[:, ell]) for ell in range(basis.n)],
    )
    _write_csv(
        out / "loadings.csv",
        ["component", "channel", "frequency_index", "lambda", "quantity", "value"],
        long_table(rep),
    )
    z, w = sol.Z, sol.W
    _write_csv(
        out / "canonical_signals.csv",
        ["node", "realization", *(f"Z{i + 1}" for i in range(r)), *(f"W{i + 1}" for i in range(r))],
        [(i, k, *z[i, :, k], *w[i, :, k]) for i in range(basis.n) for k in range(z.shape[2])],
    )
    io.dump_json(out / "field.json", io.field_to_dict(fld))
    io.dump_json(out / "solution.json", {
        "frequencies": io.to_pairs(lam),
        "coherence_curves": gamma.tolist(),
        "H": io.to_pairs(sol.H_bank.responses),
        "F": io.to_pairs(sol.F_bank.responses),
    })

    summary = {
        "n": int(basis.n),
        "p": int(x.shape[1]),
        "q": int(y.shape[1]),
        "rank": int(r),
        "realizations": int(x.shape[2]),
        "x_labels": x_labels,
        "y_labels": y_labels,
        "gso": cfg.gso,
        "estimator": asdict(est),
        "coherence_curves": gamma.tolist(),
        "coherence_nonincreasing": bool(np.all(np.diff(gamma, axis=0) <= 1e-12)),
        "adequacy_Z": adq_z.tolist(),
        "adequacy_W": adq_w.tolist(),
        "cumulative_Z": cum_z.tolist(),
        "cumulative_W": cum_w.tolist(),
        "mean_cumulative_Z": cum_z.mean(axis=1).tolist(),
        "mean_cumulative_W": cum_w.mean(axis=1).tolist(),
        "loading_threshold": cfg.loading_threshold,
        "salient_loadings": salient_loadings(rep, cfg.loading_threshold),
    }
    io.dump_json(out / "summary.json", summary)
    return summary


# --------------------------------------------------------------------------
# classification


def build_similarity_graph(images, labels, bridge=True, bridge_weight=BRIDGE_WEIGHT):
    """Same-label cosine-similarity graph over images (one node per image).

    Weights are cosine similarities clamped to ``[0, 1]``; zero-weight pairs
    get no edge. With ``bridge`` the connected components (ordered by their
    lowest node) are chained through their lowest-index nodes by edges of
    weight ``bridge_weight`` so the graph is connected.
    """
    images = np.asarray(images, dtype=float)
    labels = np.asarray(labels)
    if images.ndim != 2 or len(labels) != images.shape[0]:
        raise DimensionMismatch("images must be (N, D) with one label per image")
    norms = np.linalg.norm(images, axis=1)
    if np.any(norms == 0):
        raise ZeroVectorImage(f"images {np.flatnonzero(norms == 0).tolist()} are all zero")
    values, counts = np.unique(labels, return_counts=True)
    if np.any(counts < 2):
        raise ValidationError(f"labels {values[counts < 2].tolist()} have fewer than 2 images")

    unit = images / norms[:, None]
    sim = np.clip(unit @ unit.T, 0.0, 1.0)
    same = labels[:, None] == labels[None, :]
    iu, ju = np.nonzero(np.triu(same & (sim > 0), k=1))
    edges = [(int(i), int(j), float(sim[i, j])) for i, j in zip(iu, ju)]

    n = images.shape[0]
    if bridge and n > 1:
        adj = coo_matrix((np.ones(len(edges)), (iu, ju)), shape=(n, n))
        n_comp, comp = connected_components(adj, directed=False)
        heads = sorted(int(np.flatnonzero(comp == c)[0]) for c in range(n_comp))
        edges += [(a, b, bridge_weight) for a, b in zip(heads, heads[1:])]
    return build_graph(edges, n, directed=False)


def knn_classify(features, labels, k=10):
    """Leave-one-out k-nearest-neighbour predictions (Euclidean, majority vote).

    Neighbours at equal distance are taken in index order. Vote ties go to
    the smaller label, then to the label with the nearer mean distance.
    """
    x = np.asarray(features)
    labels = np.asarray(labels)
    n = x.shape[0]
    if not 1 <= k < n:
        raise KTooLarge(f"k={k} must satisfy 1 <= k < N={n}")
    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt(np.sum(np.abs(diff) ** 2, axis=2))
    preds = np.empty(n, dtype=labels.dtype)
    idx = np.arange(n)
    for i in range(n):
        d = dist[i].copy()
        d[i] = np.inf
        nn = np.lexsort((idx, d))[:k]
        nlab, nd = labels[nn], d[nn]
        best = None
        for lab in np.unique(nlab):
            m = nlab == lab
            key = (-int(m.sum()), lab, float(nd[m].mean()))
            if best is None or key < best:
                best = key
        preds[i] = best[1]
    return preds


@dataclass
class ClassificationConfig:
    images_per_class: int = 40
    split_rows: tuple = (4,)
    row_width: int = 16
    ranks: tuple = (20,)
    knn_k: int = 10
    repetitions: int = 50
    seed: int = 0
    estimator: str = "random-window"
    windows: int = 50
    ridge: float = 1e-8
    bridge: bool = True
    feature_scaling: str = "unit-norm"

    def validate(self, n_pixels):
        if self.feature_scaling not in FEATURE_SCALINGS:
            raise ValidationError(f"feature_scaling must be one of {FEATURE_SCALINGS}")
        for k in self.split_rows:
            top = k * self.row_width
            if not 0 < top < n_pixels:
                raise ValidationError(f"split at {k} rows leaves an empty view")
            for r in self.ranks:
                if not 1 <= r <= min(top, n_pixels - top):
                    raise ValidationError(f"rank {r} too large for split {k}")


def canonical_features(sol, x, y, basis, r, scaling="unit-norm"):
    """``(N, 2r)`` node features ``Z_1..Z_r | W_1..W_r``.

    ``"unit-gpsd"`` uses the canonical signals as solved. ``"unit-norm"``
    first rescales every filter row to unit Euclidean norm at each
    frequency (plain eigenvector normalization); coherences are unchanged
    but frequencies then contribute in proportion to the signal energy.
    """
    if scaling == "unit-gpsd":
        z, w = sol.Z[:, :r], sol.W[:, :r]
    else:
        z = apply_filter_bank(_unit_rows(sol.H_bank, r), x, basis)
        w = apply_filter_bank(_unit_rows(sol.F_bank, r), y, basis)
    n = basis.n
    feats = np.concatenate([z.reshape(n, r, -1)[:, :, 0], w.reshape(n, r, -1)[:, :, 0]], axis=1)
    if np.iscomplexobj(feats):
        feats = np.concatenate([feats.real, feats.imag], axis=1)
    return feats


def _unit_rows(bank, r):
    resp = bank.responses[:, :r]
    norms = np.linalg.norm(resp, axis=2, keepdims=True)
    return FilterBank(np.divide(resp, norms, out=np.zeros_like(resp), where=norms > 0))


def _rep_seed(seed, rep, stream):
    return int(np.random.SeedSequence(int(seed), spawn_key=(int(rep), stream)).generate_state(1, np.uint64)[0])


def sample_per_class(labels, per_class, rng):
    """Sorted indices of up to ``per_class`` images drawn uniformly from each label."""
    picks = []
    for lab in np.unique(labels):
        pool = np.flatnonzero(labels == lab)
        take = min(per_class, len(pool))
        picks.append(np.sort(rng.choice(pool, size=take, replace=False)))
    return np.concatenate(picks)


def classification_repetition(labels, pixels, cfg, rep):
    """Accuracies ``{(r, K): acc}`` of one repetition."""
    rng = np.random.default_rng(_rep_seed(cfg.seed, rep, 0))
    idx = sample_per_class(labels, cfg.images_per_class, rng)
    lab, pix = labels[idx], pixels[idx]
    graph = build_similarity_graph(pix, lab, bridge=cfg.bridge)
    basis = spectral_basis(laplacian(graph))
    # the image table is a single realization: there is no mean to remove
    est = estimator_config(cfg.estimator, 1, cfg.windows, _rep_seed(cfg.seed, rep, 1),
                           cfg.ridge, False)
    out = {}
    r_max = max(cfg.ranks)
    for k_rows in cfg.split_rows:
        top = k_rows * cfg.row_width
        x, y = pix[:, :top], pix[:, top:]
        fld = spectral_matrix_field(x, y, basis, est)
        sol = run_gccha(x, y, basis, fld, r_max, cfg.ridge)
        for r in cfg.ranks:
            feats = canonical_features(sol, x, y, basis, r, cfg.feature_scaling)
            if len(lab) <= cfg.knn_k:
                raise KTooLarge(f"only {len(lab)} images for k={cfg.knn_k}")
            pred = knn_classify(feats, lab, cfg.knn_k)
            out[(r, k_rows)] = float(np.mean(pred == lab))
    return out


def classify(labels, pixels, cfg):
    """Repeat the split-view classification experiment.

    Returns ``(table, per_rep)`` where ``table`` rows are
    ``(r, K, K/16, mean, std, repetitions)`` and ``per_rep`` lists the
    accuracy dicts of every repetition.
    """
    labels = np.asarray(labels)
    pixels = np.asarray(pixels, dtype=float)
    if pixels.ndim != 2 or len(labels) != pixels.shape[0]:
        raise ValidationError("malformed image table")
    cfg.validate(pixels.shape[1])
    reps = range(cfg.repetitions)
    workers = max_workers()
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            per_rep = list(ex.map(lambda i: classification_repetition(labels, pixels, cfg, i), reps))
    else:
        per_rep = [classification_repetition(labels, pixels, cfg, i) for i in reps]
    n_rows = pixels.shape[1] // cfg.row_width
    table = []
    for r in cfg.ranks:
        for k in cfg.split_rows:
            accs = np.array([d[(r, k)] for d in per_rep])
            std = float(accs.std(ddof=1)) if len(accs) > 1 else 0.0
            table.append((r, k, k / n_rows, float(accs.mean()), std, len(accs)))
    return table, per_rep


def write_accuracy_table(path, table):
    _write_csv(path, ["r", "K", "K_fraction", "mean_accuracy", "std_accuracy", "repetitions"], table)


def synthetic_images(n_classes=2, per_class=40, side=16, noise=0.1, seed=0):
    """Digit-like blob images: one smooth random prototype per class plus noise.

    Returns ``(labels (N,), pixels (N, side*side))`` with nonnegative pixels.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:side, 0:side]
    labels, rows = [], []
    for c in range(n_classes):
        proto = np.zeros((side, side))
        for _ in range(3):
            cy, cx = rng.uniform(2, side - 3, size=2)
            proto += np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * rng.uniform(1.5, 3.0) ** 2))
        proto /= proto.max()
        for _ in range(per_class):
            img = proto + noise * rng.standard_normal((side, side))
            rows.append(np.clip(img, 0, None).ravel() + 1e-3)
            labels.append(c)
    return np.array(labels), np.array(rows)
