"""Generator-matrix construction.

The generator ``g`` maps data symbols onto the modulated subcarriers while
keeping the time-domain guard samples at zero. Any factor ``c`` with
orthonormal columns yields a valid generator ``g = y @ c``; this module
chooses ``c`` so that ``z @ c`` approximates a shifted-identity target,
which places each data symbol on its own time sample and thereby lowers
the peak-to-average power ratio. The fit is the orthogonally-constrained
least-squares (Procrustes) problem solved in closed form from the SVD of
``target^H z``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .errors import DimensionError, SingularError
from .linops import StructuralMatrices

KIND_PRP = "prp"
KIND_BASELINE_IDENTITY = "baseline-identity"
KIND_BASELINE_HAAR = "baseline-haar"

GENERATOR_KINDS = (KIND_PRP, KIND_BASELINE_IDENTITY, KIND_BASELINE_HAAR)


@dataclass(frozen=True)
class GeneratorMatrix:
    """A generator ``g = y @ c`` with its free factor and design metadata.

    ``residual`` is the squared Frobenius misfit of the target equation at
    construction time; NaN for the baseline kinds, which optimize nothing.
    """

    g: np.ndarray
    c: np.ndarray
    kind: str
    residual: float


@dataclass(frozen=True)
class ProcrustesSolution:
    """Closed-form minimizer of ``||z c - d||_F^2`` over ``c^H c = I``."""

    c_opt: np.ndarray
    singular_values: np.ndarray
    trace_value: float
    residual: float


def build_target_d(n_rows: int, n_cols: int) -> np.ndarray:
    """0/1 target with column ``i`` equal to the unit vector at row ``i``.

    Column 0 is [1, 0, ..., 0]^T and each later column shifts the single 1
    down by one row, so every data symbol lands on a distinct time sample.
    Requires n_rows >= n_cols, otherwise the shifts would wrap.
    """
    if n_rows < n_cols:
        raise DimensionError(
            f"target needs n_rows >= n_cols, got {n_rows} < {n_cols}"
        )
    return np.eye(n_rows, n_cols)


def solve_unconstrained(z: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Plain least-squares solution (z^H z)^{-1} z^H d, diagnostic only.

    The result minimizes the Frobenius misfit but in general violates the
    orthonormal-columns constraint that the generator needs.
    """
    gram = z.conj().T @ z
    cond = np.linalg.cond(gram)
    if cond > 1e12:
        raise SingularError(f"z^H z condition number {cond:.3e} exceeds 1e12")
    return np.linalg.solve(gram, z.conj().T @ d)


def _phase_normalize(u: np.ndarray, vh: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Fix the per-pair phase ambiguity of the SVD: rotate each left singular
    # vector so its largest-magnitude entry is real positive, and rotate the
    # paired right vector identically. Keeps u @ s @ vh unchanged.
    u = u.copy()
    vh = vh.copy()
    n_pairs = min(u.shape[1], vh.shape[0])
    for i in range(n_pairs):
        col = u[:, i]
        pivot = col[np.argmax(np.abs(col))]
        if abs(pivot) > 0:
            phase = pivot / abs(pivot)
            u[:, i] = col / phase
            vh[i, :] = vh[i, :] * phase
    return u, vh


def solve_procrustes(z: np.ndarray, d: np.ndarray) -> ProcrustesSolution:
    """Minimize ||z c - d||_F^2 subject to c^H c = I.

    Let the SVD of ``d^H z`` be ``u s vh``. The square case returns
    ``c = v u^H`` exactly; when ``c`` must be tall (more basis vectors than
    data symbols) the same recipe is applied with ``v`` truncated to its
    first n_cols(d) columns, which keeps ``c^H c = I`` exact and trades away
    only optimality of the misfit.
    """
    n_free = z.shape[1]
    n_data = d.shape[1]
    if z.shape[0] != d.shape[0]:
        raise DimensionError(f"row mismatch: z {z.shape} vs d {d.shape}")
    if n_data > n_free:
        raise DimensionError(
            f"need at least as many free basis vectors ({n_free}) as data columns ({n_data})"
        )
    m = d.conj().T @ z
    u, s, vh = np.linalg.svd(m, full_matrices=True)
    u, vh = _phase_normalize(u, vh)
    if s.size and s[-1] < 1e-12:
        warnings.warn(
            "near-zero singular value in target fit; minimizer is unique "
            "only up to rotation in the degenerate subspace",
            stacklevel=2,
        )
    v_r = vh.conj().T[:, :n_data]
    c_opt = v_r @ u.conj().T
    trace_value = float(np.real(np.trace(m @ c_opt)))
    residual = float(np.linalg.norm(z @ c_opt - d, "fro") ** 2)
    return ProcrustesSolution(
        c_opt=c_opt, singular_values=s, trace_value=trace_value, residual=residual
    )


def design_prp_generator(sm: StructuralMatrices, cfg: SystemConfig) -> GeneratorMatrix:
    """PAPR-reducing generator: fit ``z c`` to the shifted-identity target.

    Depends only on the system dimensions and zero-subcarrier layout, never
    on transmitted data, so one design is reused for a whole run.
    """
    d = build_target_d(cfg.n_total - cfg.n_uw, cfg.n_data)
    sol = solve_procrustes(sm.z, d)
    g = sm.y @ sol.c_opt
    return GeneratorMatrix(g=g, c=sol.c_opt, kind=KIND_PRP, residual=sol.residual)


def design_baseline_generator(
    sm: StructuralMatrices,
    cfg: SystemConfig,
    kind: str = KIND_BASELINE_IDENTITY,
    rng: np.random.Generator | None = None,
) -> GeneratorMatrix:
    """Non-PAPR-optimized generator for comparison runs.

    ``baseline-identity`` truncates the identity; ``baseline-haar`` truncates
    a Haar-random unitary drawn from ``rng``. Either way ``c^H c = I`` so the
    guard zeros and the receiver-side orthonormality both hold.
    """
    n_free = sm.y.shape[1]
    if kind == KIND_BASELINE_IDENTITY:
        c = np.eye(n_free, cfg.n_data).astype(complex)
    elif kind == KIND_BASELINE_HAAR:
        if rng is None:
            raise ValueError("baseline-haar requires an rng")
        c = haar_unitary(n_free, rng)[:, : cfg.n_data]
    else:
        raise ValueError(f"unknown baseline kind {kind!r}")
    return GeneratorMatrix(g=sm.y @ c, c=c, kind=kind, residual=float("nan"))


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary matrix via QR with phase-fixed diagonal."""
    a = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(a)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))
