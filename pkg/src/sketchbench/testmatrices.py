"""Synthetic test-matrix generators and feature-data ingestion."""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import SeedSpec, stream
from .errors import InvalidParam, NonNumeric, ParseError
from .kernels import thin_qr
from .matio import load_matrix


@dataclass(frozen=True)
class MatrixRecipe:
    kind: str  # fast_decay | controlled_gap | fast_decay_psd | rbf_laplacian | load
    params: dict = field(default_factory=dict)
    seed: int = 0

    def build(self):
        p = dict(self.params)
        if self.kind == "fast_decay":
            return fast_decay(int(p["n"]), int(p["r"]), float(p.get("d", 2.0)), self.seed)
        if self.kind == "controlled_gap":
            return controlled_gap(
                int(p.get("m", 3000)),
                int(p.get("n", 256)),
                int(p.get("r", 15)),
                float(p.get("density", 0.25)),
                self.seed,
            )
        if self.kind == "fast_decay_psd":
            return fast_decay_psd(int(p["n"]), int(p["r"]), float(p.get("d", 2.0)), self.seed)
        if self.kind == "rbf_laplacian":
            features = load_csv_features(p["features_path"], header=bool(p.get("header", 0)))
            return rbf_laplacian(features)
        if self.kind == "load":
            return load_matrix(p["path"])
        raise InvalidParam(f"unknown matrix recipe {self.kind!r}")


def _random_orthogonal(n, rng):
    """QR of a Gaussian matrix with the R diagonal forced nonnegative,
    giving a unique, reproducible orthogonal factor."""
    return thin_qr(rng.standard_normal((n, n))).Q


def fast_decay_sigma(n, r, d):
    if not (1 <= r < n):
        raise InvalidParam(f"need 1 <= r < n, got r={r}, n={n}")
    if d <= 0:
        raise InvalidParam("decay degree d must be positive")
    tail = np.arange(2, n - r + 2, dtype=np.float64) ** (-d)
    return np.concatenate([np.ones(r), tail])


def fast_decay(n, r, d, seed):
    """n x n matrix with r leading unit singular values followed by the
    polynomial tail 2^-d, 3^-d, ..."""
    sigma = fast_decay_sigma(n, r, d)
    U = _random_orthogonal(n, stream(SeedSpec(seed, 0, 0)))
    V = _random_orthogonal(n, stream(SeedSpec(seed, 0, 1)))
    return (U * sigma) @ V.T


def _sparse_uniform(rows, cols, density, rng):
    mask = rng.random((rows, cols)) < density
    return np.where(mask, rng.random((rows, cols)), 0.0)


def controlled_gap(m, n, r, density, seed):
    """Sum of sparse rank-one terms with weights 10/j up to r and 1/j after,
    producing a visible gap at index r."""
    if not (m >= n > r >= 1):
        raise InvalidParam(f"need m >= n > r >= 1, got m={m}, n={n}, r={r}")
    if not (0.0 < density <= 1.0):
        raise InvalidParam("density must be in (0, 1]")
    rng = stream(SeedSpec(seed, 0, 2))
    t = min(m, n)
    X = _sparse_uniform(m, t, density, rng)
    Y = _sparse_uniform(n, t, density, rng)
    j = np.arange(1, t + 1, dtype=np.float64)
    w = np.where(j <= r, 10.0 / j, 1.0 / j)
    return (X * w) @ Y.T


def fast_decay_psd(n, r, d, seed):
    """Symmetric PSD matrix with eigenvalues equal to the squared
    fast-decay recipe values."""
    sigma = fast_decay_sigma(n, r, d)
    U = _random_orthogonal(n, stream(SeedSpec(seed, 0, 3)))
    A = (U * sigma**2) @ U.T
    return 0.5 * (A + A.T)


def rbf_laplacian(features):
    """Normalized Gaussian-kernel affinity D^{-1/2} W D^{-1/2} with
    W_ij = exp(-||x_i - x_j||^2) and D the row sums of W."""
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or not np.all(np.isfinite(X)):
        raise InvalidParam("features must be a finite 2-d array")
    sq = np.sum(X * X, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    W = np.exp(-d2)
    dinv = 1.0 / np.sqrt(W.sum(axis=1))
    A = W * np.outer(dinv, dinv)
    return 0.5 * (A + A.T)


def load_csv_features(path, header=False):
    """Rectangular numeric CSV -> row-per-record matrix."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, record in enumerate(reader, start=1):
            if header and lineno == 1:
                continue
            if not record:
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise ParseError(
                    f"ragged row: expected {width} fields, got {len(record)}", line=lineno
                )
            parsed = []
            for col, cell in enumerate(record, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise NonNumeric(lineno, col, cell) from None
            rows.append(parsed)
    if not rows:
        raise ParseError("empty file", line=1)
    return np.asarray(rows, dtype=np.float64)
