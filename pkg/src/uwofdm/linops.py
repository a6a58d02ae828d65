"""Fixed linear-algebra skeleton of a configuration.

For a validated config this module builds the unitary DFT matrix, the
subcarrier mapping matrix ``b``, the row split of the inverse-DFT'd mapping
into an upper block ``a`` and a lower block ``q`` (the rows that must be
annihilated to create the time-domain guard), an orthonormal basis ``y`` of
the null space of ``q``, and the product ``z = a @ y``.

All matrices are dense; block sizes here are tens of rows, not thousands.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig, modulated_indices
from .errors import DimensionError, RankError


@dataclass(frozen=True)
class StructuralMatrices:
    """Immutable bundle of the configuration-determined matrices."""

    f_n: np.ndarray  # n_total x n_total unitary DFT
    b: np.ndarray    # n_total x n_mod subcarrier selection
    a: np.ndarray    # (n_total - n_uw) x n_mod upper rows of F^H B
    q: np.ndarray    # n_uw x n_mod lower rows of F^H B
    y: np.ndarray    # n_mod x (n_mod - n_uw) orthonormal null-space basis of q
    z: np.ndarray    # (n_total - n_uw) x (n_mod - n_uw), a @ y


def dft_matrix(n: int) -> np.ndarray:
    """Unitary DFT matrix: entry (k, l) = exp(-2j*pi*k*l/n) / sqrt(n).

    With this normalization the inverse transform is the conjugate
    transpose and time/frequency energies match.
    """
    if n < 1:
        raise DimensionError(f"DFT size must be >= 1, got {n}")
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def mapping_matrix(cfg: SystemConfig) -> np.ndarray:
    """Identity matrix with the zero-subcarrier columns removed (n_total x n_mod)."""
    kept = modulated_indices(cfg)
    b = np.zeros((cfg.n_total, kept.size))
    b[kept, np.arange(kept.size)] = 1.0
    return b


def split_aq(f_n: np.ndarray, b: np.ndarray, n_uw: int) -> tuple[np.ndarray, np.ndarray]:
    """Split F^H B into its first n-n_uw rows and its last n_uw rows."""
    n = f_n.shape[0]
    if n_uw >= n:
        raise DimensionError(f"n_uw={n_uw} must be smaller than the DFT size {n}")
    fhb = f_n.conj().T @ b
    return fhb[: n - n_uw, :], fhb[n - n_uw :, :]


def null_space_basis(q: np.ndarray, rel_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the null space of ``q`` from its SVD.

    The basis is assembled from the right singular vectors whose singular
    values fall below ``rel_tol`` times the largest one. Raises RankError
    when the numerical rank of ``q`` is not equal to its row count, which
    signals a degenerate subcarrier layout rather than a numerical issue.
    """
    n_rows, n_cols = q.shape
    if n_rows >= n_cols:
        raise DimensionError(f"null space requires fewer rows than columns, got {q.shape}")
    _, s, vh = np.linalg.svd(q, full_matrices=True)
    rank = int(np.sum(s > rel_tol * s[0])) if s.size else 0
    if rank != n_rows:
        raise RankError(f"expected rank {n_rows}, numerical rank is {rank}")
    return vh[rank:, :].conj().T


def build_structural(cfg: SystemConfig) -> StructuralMatrices:
    """Construct all fixed matrices for a validated configuration."""
    if not cfg.is_validated:
        raise DimensionError("config must be validated before building matrices")
    f_n = dft_matrix(cfg.n_total)
    b = mapping_matrix(cfg)
    a, q = split_aq(f_n, b, cfg.n_uw)
    y = null_space_basis(q)
    z = a @ y
    return StructuralMatrices(f_n=f_n, b=b, a=a, q=q, y=y, z=z)
