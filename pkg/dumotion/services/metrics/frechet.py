"""Fréchet distance between Gaussian feature statistics."""

import numpy as np
from scipy import linalg

from dumotion.core.exceptions import InvalidCovarianceError, ShapeMismatchError
from dumotion.core.models.metrics import GaussianStats

PSD_TOLERANCE = 1e-9


def _check_psd(covariance: np.ndarray, name: str) -> np.ndarray:
    """Symmetric part of ``covariance`` after tolerance checks."""
    scale = max(1.0, float(np.abs(covariance).max(initial=0.0)))
    asymmetry = float(np.abs(covariance - covariance.T).max(initial=0.0))
    if asymmetry > PSD_TOLERANCE * scale:
        raise InvalidCovarianceError(
            f"{name} is not symmetric", {"asymmetry": asymmetry}
        )
    sym = 0.5 * (covariance + covariance.T)
    smallest = float(linalg.eigvalsh(sym)[0]) if sym.size else 0.0
    if smallest < -PSD_TOLERANCE * scale:
        raise InvalidCovarianceError(
            f"{name} has a negative eigenvalue", {"eigenvalue": smallest}
        )
    return sym


def sqrtm_psd(matrix: np.ndarray) -> np.ndarray:
    """Principal square root of a symmetric PSD matrix by eigendecomposition."""
    eigvals, eigvecs = linalg.eigh(matrix)
    root = np.sqrt(np.clip(eigvals, 0.0, None))
    return (eigvecs * root) @ eigvecs.T


def trace_sqrt_product(sigma_a: np.ndarray, sigma_b: np.ndarray) -> float:
    """Tr((A B)^(1/2)) through the symmetric form A^(1/2) B A^(1/2)."""
    root_a = sqrtm_psd(sigma_a)
    inner = root_a @ sigma_b @ root_a
    eigvals = linalg.eigvalsh(0.5 * (inner + inner.T))
    return float(np.sqrt(np.clip(eigvals, 0.0, None)).sum())


def frechet_distance(a: GaussianStats, b: GaussianStats) -> float:
    """||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2))."""
    if a.dim != b.dim:
        raise ShapeMismatchError(
            "Gaussian statistics differ in dimension",
            expected=(a.dim,),
            actual=(b.dim,),
        )
    sigma_a = _check_psd(a.covariance, "first covariance")
    sigma_b = _check_psd(b.covariance, "second covariance")
    diff = a.mean - b.mean
    value = (
        float(diff @ diff)
        + float(np.trace(sigma_a) + np.trace(sigma_b))
        - 2.0 * trace_sqrt_product(sigma_a, sigma_b)
    )
    return max(value, 0.0)
