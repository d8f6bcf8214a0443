"""Dataset generators and file loaders for the benchmark problems.

File formats are plain text and diff-friendly:

* points       - one point per line, whitespace-separated coordinates
* dissimilarity- n lines of n entries, zero diagonal, symmetric
* bitstring    - a single line of '0'/'1' characters
* binary       - one '0'/'1' sample per line, all the same length
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError, DatasetFormatError
from .problems.hmm import ObsSeq
from .problems.kmeans import PointSet
from .problems.kmedoids import DissimilarityMatrix
from .problems.rbm import BinaryDataset, gen_training_data


# --------------------------------------------------------------------------
# Generators
# --------------------------------------------------------------------------


def gaussian_cluster_points(
    n_points: int,
    n_centers: int,
    dim: int = 2,
    box: float = 100.0,
    sigma: float = 2.0,
    rng: np.random.Generator | None = None,
) -> PointSet:
    """Points spread evenly over uniformly placed Gaussian cluster centers."""
    if rng is None:
        rng = np.random.default_rng()
    if n_points < n_centers:
        raise ConfigurationError("need n_points >= n_centers")
    centers = rng.uniform(0.0, box, size=(n_centers, dim))
    owner = np.arange(n_points) % n_centers
    points = centers[owner] + rng.normal(0.0, sigma, size=(n_points, dim))
    return PointSet(points)


def gaussian_cluster_dissimilarity(
    n_points: int,
    n_centers: int,
    dim: int = 2,
    box: float = 100.0,
    sigma: float = 2.0,
    rng: np.random.Generator | None = None,
) -> DissimilarityMatrix:
    """Pairwise squared Euclidean distances of a Gaussian-cluster point set."""
    pts = gaussian_cluster_points(n_points, n_centers, dim, box, sigma, rng).points
    diff = pts[:, None, :] - pts[None, :, :]
    return DissimilarityMatrix((diff**2).sum(axis=2))


def random_bitstring(length: int, rng: np.random.Generator) -> ObsSeq:
    """Uniform random bit sequence over the two-symbol alphabet."""
    return ObsSeq(rng.integers(2, size=length), n_symbols=2)


# --------------------------------------------------------------------------
# Writers
# --------------------------------------------------------------------------


def write_points(path, data: PointSet) -> None:
    np.savetxt(path, data.points, fmt="%.12g")


def write_dissimilarity(path, d: DissimilarityMatrix) -> None:
    np.savetxt(path, d.d, fmt="%.12g")


def write_bitstring(path, seq: ObsSeq) -> None:
    with open(path, "w") as fh:
        fh.write("".join(str(int(s)) for s in seq.symbols) + "\n")


def write_binary_dataset(path, data: BinaryDataset) -> None:
    with open(path, "w") as fh:
        for row in data.samples:
            fh.write("".join(str(int(v)) for v in row) + "\n")


# --------------------------------------------------------------------------
# Loaders
# --------------------------------------------------------------------------


def _read_numeric_rows(path) -> list[list[float]]:
    rows = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                values = [float(tok) for tok in stripped.split()]
            except ValueError as exc:
                raise DatasetFormatError(path, line_no, f"not numeric: {exc}") from exc
            rows.append((line_no, values))
    if not rows:
        raise DatasetFormatError(path, 0, "file is empty")
    width = len(rows[0][1])
    for line_no, values in rows:
        if len(values) != width:
            raise DatasetFormatError(
                path, line_no, f"expected {width} columns, got {len(values)}"
            )
    return [values for _, values in rows]


def load_points(path) -> PointSet:
    """Whitespace-separated coordinates, one point per line."""
    return PointSet(np.array(_read_numeric_rows(path)))


def load_dissimilarity(path) -> DissimilarityMatrix:
    """Square matrix file; validates the zero diagonal, symmetrises."""
    rows = _read_numeric_rows(path)
    mat = np.array(rows)
    if mat.shape[0] != mat.shape[1]:
        raise DatasetFormatError(
            path, len(rows), f"matrix must be square, got {mat.shape[0]}x{mat.shape[1]}"
        )
    return DissimilarityMatrix(mat)


def _read_bit_line(path, line_no, line) -> list[int]:
    stripped = line.strip()
    if set(stripped) - {"0", "1"}:
        raise DatasetFormatError(path, line_no, "line must contain only 0/1")
    return [int(ch) for ch in stripped]


def load_bitstring(path) -> ObsSeq:
    """A single line of bits."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if len(lines) != 1:
        raise DatasetFormatError(path, len(lines), "expected exactly one bit line")
    return ObsSeq(_read_bit_line(path, 1, lines[0]), n_symbols=2)


def load_binary_dataset(path) -> BinaryDataset:
    """One fixed-width bit sample per line."""
    samples = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            bits = _read_bit_line(path, line_no, line)
            if samples and len(bits) != len(samples[0]):
                raise DatasetFormatError(path, line_no, "inconsistent sample width")
            samples.append(bits)
    if not samples:
        raise DatasetFormatError(path, 0, "file is empty")
    return BinaryDataset(np.array(samples, dtype=np.float64))


# --------------------------------------------------------------------------
# Generator-spec dispatch (used by the CLI)
# --------------------------------------------------------------------------


def generate_from_spec(spec: dict, rng: np.random.Generator):
    """Build an in-memory dataset from a generator spec dictionary."""
    kind = spec.get("type")
    opts = {k: v for k, v in spec.items() if k not in ("type", "seed")}
    try:
        if kind == "gaussian-clusters":
            return gaussian_cluster_points(rng=rng, **opts)
        if kind == "gaussian-dissimilarity":
            return gaussian_cluster_dissimilarity(rng=rng, **opts)
        if kind == "bitstring":
            return random_bitstring(rng=rng, **opts)
        if kind == "rbm-patterns":
            return gen_training_data(rng=rng, **opts)
    except TypeError as exc:
        raise ConfigurationError(f"bad generator options for {kind!r}: {exc}") from exc
    raise ConfigurationError(f"unknown generator type {kind!r}")


def write_dataset(path, dataset) -> None:
    """Write any generated dataset in its natural file format."""
    if isinstance(dataset, PointSet):
        write_points(path, dataset)
    elif isinstance(dataset, DissimilarityMatrix):
        write_dissimilarity(path, dataset)
    elif isinstance(dataset, ObsSeq):
        write_bitstring(path, dataset)
    elif isinstance(dataset, BinaryDataset):
        write_binary_dataset(path, dataset)
    else:
        raise ConfigurationError(f"cannot serialise {type(dataset).__name__}")
