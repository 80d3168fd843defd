"""Spectral encoding and decoding of matrices on a pair of graph bases.

A matrix X on the product of a row graph and a column graph is represented
by the small coefficient matrix C = Phi^T X Psi in the truncated Laplacian
eigenbases Phi, Psi.  The trainable model additionally carries two basis
transforms P and Q and decodes to Phi P C Q^T Psi^T.
"""

from dataclasses import dataclass

import numpy as np

from .graph import SpectralBasis, _readonly

__all__ = [
    "FunctionalModel",
    "encode",
    "decode",
    "synthesize_bandlimited",
    "basis_consistency_residual",
]


@dataclass(frozen=True)
class FunctionalModel:
    """Trainable triple (C, P, Q) over a fixed pair of spectral bases."""

    C: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    row_basis: SpectralBasis
    col_basis: SpectralBasis

    def __post_init__(self):
        for name in ("C", "P", "Q"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        k = self.row_basis.k
        if self.col_basis.k != k:
            raise ValueError("row and column bases must share the same size k")
        for name in ("C", "P", "Q"):
            if getattr(self, name).shape != (k, k):
                raise ValueError(f"{name} must be {k}x{k}")

    @property
    def k(self) -> int:
        return self.row_basis.k

    @property
    def shape(self) -> tuple[int, int]:
        return (self.row_basis.n, self.col_basis.n)

    def effective_map(self) -> np.ndarray:
        """The coefficient matrix actually applied between the bases, P C Q^T."""
        return self.P @ self.C @ self.Q.T

    def with_params(self, C=None, P=None, Q=None) -> "FunctionalModel":
        return FunctionalModel(
            C=self.C if C is None else C,
            P=self.P if P is None else P,
            Q=self.Q if Q is None else Q,
            row_basis=self.row_basis,
            col_basis=self.col_basis,
        )


def encode(X: np.ndarray, phi: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Project a dense matrix onto the product basis: Phi^T X Psi."""
    X = np.asarray(X, dtype=float)
    if X.shape != (phi.shape[0], psi.shape[0]):
        raise ValueError(
            f"matrix shape {X.shape} does not match bases ({phi.shape[0]}, {psi.shape[0]})"
        )
    return phi.T @ X @ psi


def decode(model: FunctionalModel) -> np.ndarray:
    """Reconstruct the dense matrix Phi P C Q^T Psi^T."""
    return model.row_basis.vectors @ model.effective_map() @ model.col_basis.vectors.T


def synthesize_bandlimited(
    row_basis: SpectralBasis,
    col_basis: SpectralBasis,
    rank: int,
    seed: int = 0,
    target_scale: float = 1.0,
) -> np.ndarray:
    """Draw a random rank-``rank`` matrix supported on the product basis.

    The coefficient matrix is A B^T with A, B of shape (k, rank) and i.i.d.
    standard normal entries; the result is rescaled so the root-mean-square
    of its entries equals ``target_scale``.  Output is basis-consistent at
    rank ``rank`` by construction.
    """
    k = row_basis.k
    if col_basis.k != k:
        raise ValueError("row and column bases must share the same size k")
    if not 0 <= rank <= k:
        raise ValueError(f"rank={rank} must be in [0, {k}]")
    if rank == 0:
        return np.zeros((row_basis.n, col_basis.n))
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((k, rank))
    B = rng.standard_normal((k, rank))
    M = row_basis.vectors @ (A @ B.T) @ col_basis.vectors.T
    rms = np.sqrt(np.mean(M * M))
    if rms > 0:
        M *= target_scale / rms
    return M


def basis_consistency_residual(M: np.ndarray, phi: np.ndarray, psi: np.ndarray, r: int) -> float:
    """How far the top-r singular subspaces of M fall outside span(Phi)/span(Psi).

    Returns ||U_r - Phi Phi^T U_r||_F + ||V_r - Psi Psi^T V_r||_F, which is
    zero exactly when M is basis-consistent at rank r.  The Frobenius norm of
    the vector residual equals that of the subspace-projector residual, so
    the value does not depend on the rotation SVD picks inside a repeated
    singular value (the subspace itself is ambiguous only when the spectrum
    is degenerate across the rank-r boundary).
    """
    M = np.asarray(M, dtype=float)
    if not 0 <= r <= min(M.shape[0], M.shape[1]):
        raise ValueError(f"r={r} out of range for matrix of shape {M.shape}")
    if r == 0:
        return 0.0
    U, _, Vt = np.linalg.svd(M, full_matrices=False)
    Ur = U[:, :r]
    Vr = Vt[:r].T
    ru = np.linalg.norm(Ur - phi @ (phi.T @ Ur))
    rv = np.linalg.norm(Vr - psi @ (psi.T @ Vr))
    return float(ru + rv)
