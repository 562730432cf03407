"""Queries over trained embeddings: cosine neighbors and 2D projection.

:class:`KeyedVectors` freezes a token->vector table for fast similarity
lookups. PCA runs a cyclic Jacobi eigensolver on the (at most a few hundred
square) covariance matrix; component signs are pinned so outputs are
diff-stable.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .embeddings import EmbeddingModel, fasttext_vector

logger = logging.getLogger(__name__)

_JACOBI_TOL = 1e-12
_JACOBI_MAX_SWEEPS = 60


@dataclass(frozen=True)
class KeyedVectors:
    """Frozen token->vector table with precomputed L2 norms."""

    tokens: tuple[str, ...]
    vectors: np.ndarray
    norms: np.ndarray
    index: dict[str, int]

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def vector(self, token: str) -> np.ndarray:
        idx = self.index.get(token)
        if idx is None:
            raise KeyError(f"token {token!r} not in vocabulary")
        return self.vectors[idx]

    @classmethod
    def from_arrays(cls, tokens: Sequence[str], vectors: np.ndarray) -> "KeyedVectors":
        """Build a table, dropping zero vectors (they have no direction)."""
        vectors = np.asarray(vectors, dtype=np.float64)
        norms = np.linalg.norm(vectors, axis=1)
        keep = norms > 0
        if not keep.all():
            dropped = [t for t, k in zip(tokens, keep) if not k]
            logger.warning("dropping %d zero vector(s): %s", len(dropped), dropped[:5])
        tokens = tuple(t for t, k in zip(tokens, keep) if k)
        vectors = vectors[keep]
        norms = norms[keep]
        return cls(
            tokens=tokens,
            vectors=vectors,
            norms=norms,
            index={t: i for i, t in enumerate(tokens)},
        )

    @classmethod
    def from_model(cls, model: EmbeddingModel) -> "KeyedVectors":
        """Word-vector table for a trained model.

        Subword models compose each word from its character n-gram rows
        plus the word row, matching how unseen words are built; other
        variants use the input matrix directly.
        """
        if model.config.is_fasttext:
            vectors = np.stack([fasttext_vector(model, t) for t in model.vocab.tokens])
            return cls.from_arrays(model.vocab.tokens, vectors)
        return cls.from_arrays(model.vocab.tokens, model.input_vectors)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity, clamped to [-1, 1] against rounding."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine is undefined for zero vectors")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def most_similar_by_vector(
    kv: KeyedVectors, query: np.ndarray, k: int, exclude: str | None = None
) -> list[tuple[str, float]]:
    """Top-k tokens by cosine to ``query``; ties broken by vocabulary order."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    query = np.asarray(query, dtype=np.float64)
    qn = np.linalg.norm(query)
    if qn == 0.0:
        raise ValueError("cosine is undefined for zero vectors")
    scores = np.clip((kv.vectors @ query) / (kv.norms * qn), -1.0, 1.0)
    if exclude is not None and exclude in kv.index:
        scores[kv.index[exclude]] = -np.inf
    order = np.argsort(-scores, kind="stable")
    top = [i for i in order if np.isfinite(scores[i])][:k]
    return [(kv.tokens[i], float(scores[i])) for i in top]


def most_similar(
    kv: KeyedVectors, token: str, k: int, model: EmbeddingModel | None = None
) -> list[tuple[str, float]]:
    """Top-k cosine neighbors of ``token``, excluding the token itself.

    Unknown tokens raise ``KeyError`` unless ``model`` is a fasttext
    variant, in which case the query vector is built from subwords.
    """
    if token in kv.index:
        query = kv.vectors[kv.index[token]]
    elif model is not None and model.config.is_fasttext:
        query = fasttext_vector(model, token)
    else:
        raise KeyError(f"token {token!r} not in vocabulary")
    return most_similar_by_vector(kv, query, k, exclude=token)


def _jacobi_eigh(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors as columns), in descending
    eigenvalue order. Deterministic for a fixed input.
    """
    a = np.array(matrix, dtype=np.float64)
    n = a.shape[0]
    vecs = np.eye(n)
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = np.sqrt(max(0.0, (a**2).sum() - (np.diag(a) ** 2).sum()))
        if off <= _JACOBI_TOL * max(1.0, np.abs(np.diag(a)).max()):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= _JACOBI_TOL * 1e-4:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                rot_p = c * vecs[:, p] - s * vecs[:, q]
                rot_q = s * vecs[:, p] + c * vecs[:, q]
                vecs[:, p], vecs[:, q] = rot_p, rot_q
    eigvals = np.diag(a).copy()
    order = np.argsort(-eigvals, kind="stable")
    return eigvals[order], vecs[:, order]


@dataclass(frozen=True)
class PcaResult:
    """Projection plus the fitted basis (components as rows)."""

    coords: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray
    mean: np.ndarray


def pca_fit(data: np.ndarray, target_dim: int) -> PcaResult:
    """Mean-center and project onto the top eigenvectors of the covariance.

    Components are orthonormal, ordered by descending eigenvalue, and each
    has its largest-magnitude loading made positive. Raises when the data
    rank cannot support ``target_dim`` components.
    """
    data = np.asarray(data, dtype=np.float64)
    n, dim = data.shape
    if not 1 <= target_dim < dim:
        raise ValueError(f"target_dim must be in [1, {dim - 1}], got {target_dim}")
    if n < 2:
        raise ValueError("need at least 2 rows for PCA")
    mean = data.mean(axis=0)
    centered = data - mean
    cov = centered.T @ centered / (n - 1)
    eigvals, eigvecs = _jacobi_eigh(cov)
    tol = max(n, dim) * np.finfo(np.float64).eps * max(eigvals[0], 0.0)
    rank = int((eigvals > tol).sum())
    if rank < target_dim:
        raise ValueError(
            f"effective rank {rank} is smaller than target_dim {target_dim}"
        )
    components = eigvecs[:, :target_dim].T.copy()
    for i in range(target_dim):
        pivot = np.argmax(np.abs(components[i]))
        if components[i, pivot] < 0:
            components[i] = -components[i]
    coords = centered @ components.T
    return PcaResult(
        coords=coords,
        components=components,
        eigenvalues=eigvals[:target_dim].copy(),
        mean=mean,
    )


def pca_project(kv: KeyedVectors, target_dim: int) -> np.ndarray:
    """Project every vocabulary vector to ``target_dim`` dimensions."""
    return pca_fit(kv.vectors, target_dim).coords


def neighborhood_report(
    kv: KeyedVectors, centers: Sequence[str], k: int
) -> str:
    """TSV table of each center and its k neighbors with 2D coordinates.

    Columns: center, token, cos, x, y (floats at 6 decimals). Coordinates
    come from a PCA of the full vocabulary, so the table is suitable for
    plotting the clusters directly.
    """
    missing = [c for c in centers if c not in kv.index]
    if missing:
        raise KeyError(f"tokens not in vocabulary: {missing}")
    coords = pca_project(kv, 2)
    lines = ["center\ttoken\tcos\tx\ty"]
    for center in centers:
        rows = [(center, 1.0)] + most_similar(kv, center, k)
        for token, score in rows:
            x, y = coords[kv.index[token]]
            lines.append(f"{center}\t{token}\t{score:.6f}\t{x:.6f}\t{y:.6f}")
    return "\n".join(lines) + "\n"
