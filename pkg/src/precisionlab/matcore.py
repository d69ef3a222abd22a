"""Dense symmetric-matrix primitives.

Everything downstream (conditioned covariances, ellipse sections, Wishart
densities, detection games) is built on the handful of operations here:
PSD square roots, Cholesky log-determinants, eigenvalue pseudo-inverses,
orthogonal projectors, and principal-angle intersection dimensions.

All functions are pure: they take plain float64 ``numpy`` arrays (square,
symmetric within ``SYM_TOL``) and return fresh arrays.  Matrices stay dense;
the dimensions in play are at most a few hundred.  Safe to call from any
number of threads.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import (
    BasisNotOrthonormalError,
    NotPdError,
    NotPsdError,
    NotUnitVectorError,
)

# Eigenvalues in [-PSD_REL_TOL * max|eig|, 0) are rounding noise and get
# clamped to zero; anything below that band means genuinely indefinite input.
PSD_REL_TOL = 1e-10
# Relative eigenvalue cutoff for numerical rank and pseudo-inversion.
RANK_REL_TOL = 1e-8
# A cross-basis singular value above 1 - ANGLE_TOL counts as a zero principal
# angle, i.e. one shared direction.
ANGLE_TOL = 1e-8
SYM_TOL = 1e-12


def check_symmetric(a, tol: float = SYM_TOL) -> np.ndarray:
    """Validate that ``a`` is square and symmetric; return a float64 copy.

    Asymmetry beyond ``tol`` (relative to the largest entry) is rejected
    rather than averaged away.
    """
    m = np.array(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] < 1:
        raise ValueError("matrix dimension must be at least 1")
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
    if float(np.max(np.abs(m - m.T))) > tol * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    return 0.5 * (m + m.T)


class PsdCertificate(NamedTuple):
    matrix: np.ndarray
    min_eigenvalue: float
    tolerance: float

    @property
    def is_psd(self) -> bool:
        return self.min_eigenvalue >= -self.tolerance


def psd_certificate(a, rel_tol: float = PSD_REL_TOL) -> PsdCertificate:
    """Certify positive semi-definiteness up to a relative eigenvalue band."""
    m = check_symmetric(a)
    eigs = np.linalg.eigvalsh(m)
    tol = rel_tol * float(np.max(np.abs(eigs))) if m.size else 0.0
    return PsdCertificate(m, float(eigs[0]), tol)


def psd_eigh(a, rel_tol: float = PSD_REL_TOL):
    """Eigendecomposition of a PSD matrix with the clamp-or-reject rule applied.

    Returns (eigenvalues, eigenvectors) with the noise band clamped to zero.
    """
    m = check_symmetric(a)
    w, v = np.linalg.eigh(m)
    tol = rel_tol * float(np.max(np.abs(w)))
    if w[0] < -tol:
        raise NotPsdError(
            f"matrix is not positive semi-definite: min eigenvalue {w[0]:.3e} "
            f"below tolerance {-tol:.3e}"
        )
    return np.clip(w, 0.0, None), v


def sym_sqrt(a, rel_tol: float = PSD_REL_TOL) -> np.ndarray:
    """Symmetric PSD square root S with S @ S == a (within tolerance)."""
    w, v = psd_eigh(a, rel_tol)
    s = (v * np.sqrt(w)) @ v.T
    return 0.5 * (s + s.T)


class CholeskyLogdet(NamedTuple):
    factor: np.ndarray
    logdet: float


def cholesky_logdet(a) -> CholeskyLogdet:
    """Lower Cholesky factor and log-determinant of a positive definite matrix."""
    m = check_symmetric(a)
    try:
        factor = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPdError("matrix is not positive definite (nonpositive pivot)") from exc
    logdet = 2.0 * float(np.sum(np.log(np.diagonal(factor))))
    return CholeskyLogdet(factor, logdet)


def pseudo_inverse(a, rank_tol: float = RANK_REL_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a PSD matrix via eigendecomposition.

    Eigenvalues below ``rank_tol`` times the largest eigenvalue are treated
    as exact zeros.
    """
    w, v = psd_eigh(a, PSD_REL_TOL)
    w_max = float(np.max(w))
    inv = np.zeros_like(w)
    if w_max > 0.0:
        keep = w > rank_tol * w_max
        inv[keep] = 1.0 / w[keep]
    p = (v * inv) @ v.T
    return 0.5 * (p + p.T)


def numerical_rank(a, rank_tol: float = RANK_REL_TOL) -> int:
    """Count of eigenvalues above ``rank_tol`` times the largest magnitude."""
    m = check_symmetric(a)
    w = np.abs(np.linalg.eigvalsh(m))
    w_max = float(np.max(w))
    if w_max == 0.0:
        return 0
    return int(np.count_nonzero(w > rank_tol * w_max))


def projector_complement(theta, tol: float = 1e-12) -> np.ndarray:
    """Orthogonal projector onto the hyperplane orthogonal to unit ``theta``."""
    v = np.asarray(theta, dtype=float).reshape(-1)
    nrm = float(np.linalg.norm(v))
    if abs(nrm - 1.0) > tol:
        raise NotUnitVectorError(f"|theta| = {nrm!r} deviates from 1 beyond {tol}")
    p = np.eye(v.size) - np.outer(v, v)
    return 0.5 * (p + p.T)


def _check_orthonormal(basis, tol: float) -> np.ndarray:
    b = np.atleast_2d(np.asarray(basis, dtype=float))
    if b.shape[0] == 0:
        return b
    g = b @ b.T
    if float(np.max(np.abs(g - np.eye(b.shape[0])))) > tol:
        raise BasisNotOrthonormalError("basis vectors are not orthonormal within tolerance")
    return b


def subspace_intersection_dim(
    basis_u,
    basis_v,
    ortho_tol: float = 1e-8,
    angle_tol: float = ANGLE_TOL,
) -> int:
    """Dimension of the intersection of two subspaces given orthonormal bases.

    Bases are given as rows.  The count of cross-Gram singular values within
    ``angle_tol`` of 1 equals the number of zero principal angles, which is
    the intersection dimension.
    """
    u = _check_orthonormal(basis_u, ortho_tol)
    v = _check_orthonormal(basis_v, ortho_tol)
    if u.shape[0] == 0 or v.shape[0] == 0:
        return 0
    if u.shape[1] != v.shape[1]:
        raise ValueError("bases live in different ambient dimensions")
    sv = np.linalg.svd(u @ v.T, compute_uv=False)
    return int(np.count_nonzero(sv > 1.0 - angle_tol))
