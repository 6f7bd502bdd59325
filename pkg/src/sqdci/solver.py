"""Eigensolvers for projected Hamiltonians.

``davidson_lowest`` is a block Davidson with diagonal preconditioning
and thick restart; ``dense_eigensolve`` is the direct oracle/fallback.
``solve_subspace`` picks between them by dimension and is the single
entry point used by the SQD and HCI drivers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.linalg

from . import rng
from .errors import CapacityError, ConfigError
from .hamiltonian import (ActiveSpaceHamiltonian, Determinant,
                          build_dense_matrix, build_sparse_matrix,
                          sector_basis)

DENSE_THRESHOLD = 512
FCI_DIMENSION_CAP = 10_000_000


@dataclass
class DavidsonOptions:
    n_roots: int = 1
    residual_tol: float = 1e-8
    max_iterations: int = 300
    max_subspace: int = 0  # 0 -> max(20, 4 * n_roots)
    seed: int = 0

    def __post_init__(self):
        if self.n_roots < 1:
            raise ConfigError("n_roots must be >= 1")
        if self.residual_tol <= 0:
            raise ConfigError("residual_tol must be positive")
        if self.max_subspace == 0:
            self.max_subspace = max(20, 4 * self.n_roots)
        if self.max_subspace < 2 * self.n_roots:
            raise ConfigError("max_subspace must be >= 2 * n_roots")


@dataclass
class SpectrumResult:
    energies: list[float]
    vectors: list[np.ndarray]
    iterations_used: int
    converged: bool


@dataclass
class SubspaceResult:
    """Ground state of a projected Hamiltonian over an explicit basis."""

    energy: float
    vector: np.ndarray
    basis: list[Determinant]
    dimension: int
    diagnostics: dict = field(default_factory=dict)


def _check_finite(arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ArithmeticError("solver produced non-finite values")


def dense_eigensolve(matrix: np.ndarray) -> SpectrumResult:
    """Full spectrum of a symmetric real matrix (direct method)."""
    matrix = np.asarray(matrix, dtype=float)
    dim = matrix.shape[0]
    if matrix.shape != (dim, dim):
        raise ConfigError("matrix must be square")
    if dim > 4096:
        raise CapacityError("dense eigensolver capped at dimension 4096")
    if np.max(np.abs(matrix - matrix.T)) > 1e-10:
        raise ConfigError("matrix is not symmetric")
    evals, evecs = scipy.linalg.eigh(matrix)
    _check_finite([evals, evecs])
    return SpectrumResult(energies=[float(e) for e in evals],
                          vectors=[evecs[:, i].copy() for i in range(dim)],
                          iterations_used=1, converged=True)


def davidson_lowest(matvec, diagonal, opts: DavidsonOptions) -> SpectrumResult:
    """Lowest eigenpairs of a symmetric operator given its matvec.

    Deterministic for a fixed seed: initial guesses are unit vectors on
    the lowest diagonal entries (ties by index), and random vectors are
    used only to replace numerically degenerate corrections.
    """
    diagonal = np.asarray(diagonal, dtype=float)
    dim = len(diagonal)
    k = opts.n_roots
    if dim < k:
        raise ConfigError("operator dimension smaller than n_roots")

    gen = rng.stream(opts.seed, "davidson")

    order = np.argsort(diagonal, kind="stable")
    basis = np.zeros((dim, min(k, dim)))
    for i in range(basis.shape[1]):
        basis[order[i], i] = 1.0

    sigma = np.empty((dim, 0))
    theta = diagonal[order[:k]].astype(float)
    ritz = basis[:, :k].copy()
    converged = False
    iterations = 0

    def orthonormalize(block, against):
        cols = []
        for col in block.T:
            v = col.copy()
            for _ in range(2):  # two Gram-Schmidt passes for stability
                if against.shape[1]:
                    v -= against @ (against.T @ v)
                for u in cols:
                    v -= u * (u @ v)
            norm = np.linalg.norm(v)
            if norm > 1e-10:
                cols.append(v / norm)
        if not cols:
            return np.empty((dim, 0))
        return np.column_stack(cols)

    for iterations in range(1, opts.max_iterations + 1):
        while sigma.shape[1] < basis.shape[1]:
            j = sigma.shape[1]
            sigma = np.column_stack([sigma, matvec(basis[:, j])])
        rayleigh = basis.T @ sigma
        rayleigh = 0.5 * (rayleigh + rayleigh.T)
        evals, evecs = scipy.linalg.eigh(rayleigh)
        theta = evals[:k]
        ritz = basis @ evecs[:, :k]
        ritz_sigma = sigma @ evecs[:, :k]
        residuals = ritz_sigma - ritz * theta
        norms = np.linalg.norm(residuals, axis=0)
        _check_finite([theta, ritz, norms])
        if np.all(norms < opts.residual_tol):
            converged = True
            break

        corrections = []
        for i in range(k):
            if norms[i] < opts.residual_tol:
                continue
            denom = diagonal - theta[i]
            denom = np.where(np.abs(denom) < 1e-8,
                             np.copysign(1e-8, denom + 1e-300), denom)
            corrections.append(residuals[:, i] / denom)
        block = np.column_stack(corrections) if corrections else np.empty((dim, 0))
        block = orthonormalize(block, basis)
        if block.shape[1] == 0:
            # Correction space collapsed: expand with a seeded random vector.
            block = orthonormalize(gen.standard_normal((dim, 1)), basis)
            if block.shape[1] == 0:
                break
        if basis.shape[1] + block.shape[1] > min(opts.max_subspace, dim):
            # Thick restart: keep the current Ritz vectors.
            basis = orthonormalize(ritz, np.empty((dim, 0)))
            sigma = np.empty((dim, 0))
            block = orthonormalize(block, basis)
            if block.shape[1] == 0:
                block = orthonormalize(gen.standard_normal((dim, 1)), basis)
        if basis.shape[1] >= dim:
            break
        basis = np.column_stack([basis, block])

    # Post-hoc residual verification, independent of internal bookkeeping.
    vectors = []
    energies = []
    verified = True
    for i in range(k):
        v = ritz[:, i]
        v = v / np.linalg.norm(v)
        hv = matvec(v)
        e = float(v @ hv)
        if np.linalg.norm(hv - e * v) >= opts.residual_tol:
            verified = False
        energies.append(e)
        vectors.append(v)
    order = np.argsort(energies, kind="stable")
    energies = [energies[i] for i in order]
    vectors = [vectors[i] for i in order]
    _check_finite(vectors)
    return SpectrumResult(energies=energies, vectors=vectors,
                          iterations_used=iterations,
                          converged=bool(converged and verified))


def solve_subspace(ham: ActiveSpaceHamiltonian, basis: list[Determinant],
                   opts: DavidsonOptions | None = None) -> SubspaceResult:
    """Ground state of H projected onto ``basis``."""
    if not basis:
        raise ConfigError("empty determinant basis")
    opts = opts or DavidsonOptions()
    dim = len(basis)
    if dim < DENSE_THRESHOLD:
        mat = build_dense_matrix(ham, basis)
        spec = dense_eigensolve(mat)
        return SubspaceResult(energy=spec.energies[0], vector=spec.vectors[0],
                              basis=list(basis), dimension=dim,
                              diagnostics={"method": "dense"})
    mat = build_sparse_matrix(ham, basis)
    diag = mat.diagonal()
    spec = davidson_lowest(lambda v: mat @ v, diag, opts)
    return SubspaceResult(energy=spec.energies[0], vector=spec.vectors[0],
                          basis=list(basis), dimension=dim,
                          diagnostics={"method": "davidson",
                                       "iterations": spec.iterations_used,
                                       "converged": spec.converged})


def fci_ground_state(ham: ActiveSpaceHamiltonian,
                     opts: DavidsonOptions | None = None) -> SubspaceResult:
    """Exact ground state over the complete (n_alpha, n_beta) sector."""
    dim = comb(ham.n_orb, ham.n_alpha) * comb(ham.n_orb, ham.n_beta)
    if dim > FCI_DIMENSION_CAP:
        raise CapacityError(f"FCI basis too large: {dim}")
    basis = sector_basis(ham.n_orb, ham.n_alpha, ham.n_beta)
    result = solve_subspace(ham, basis, opts)
    result.diagnostics["fci"] = True
    return result
