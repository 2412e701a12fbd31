"""Spatial correlation matrices and Hermitian PSD helpers.

Two parameterizations are provided: the complex Toeplitz family
``Omega_d(a)`` with entries ``a**(j - i)`` above the diagonal, and the
geometric form built from steering vectors of a set of arrival paths.
Both are returned as :class:`CorrelationMatrix` with unit diagonal and an
eagerly cached Hermitian square root.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import math

import numpy as np

from .errors import ConfigError

#: eigenvalues in ``[-PSD_TOL, 0)`` are treated as exact zeros
PSD_TOL = 1e-10


def _frozen(arr):
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.flags.writeable = False
    return arr


def hermitian_sqrt(m) -> np.ndarray:
    """Return the unique Hermitian PSD square root of `m`.

    Parameters
    ----------
    m : CorrelationMatrix or array_like
        Hermitian positive semidefinite matrix.

    Returns
    -------
    numpy.ndarray
        Complex matrix ``X`` with ``X @ X == m`` up to rounding.

    Raises
    ------
    ConfigError
        If `m` has an eigenvalue below ``-PSD_TOL``.
    """
    if isinstance(m, CorrelationMatrix):
        m = m.entries
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigError(f"expected a square matrix, got shape {m.shape}")
    herm = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(herm)
    if w.size and w.min() < -PSD_TOL:
        raise ConfigError(f"matrix is not PSD (min eigenvalue {w.min():.3e})")
    w = np.where(w < 0.0, 0.0, w)
    root = (v * np.sqrt(w)) @ v.conj().T
    return 0.5 * (root + root.conj().T)


@dataclass(frozen=True)
class CorrelationMatrix:
    """Hermitian PSD correlation matrix with its square root cached."""

    entries: np.ndarray
    sqrt: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        entries = _frozen(self.entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ConfigError(f"correlation matrix must be square, got {entries.shape}")
        object.__setattr__(self, "entries", entries)
        root = self.sqrt if self.sqrt is not None else hermitian_sqrt(entries)
        object.__setattr__(self, "sqrt", _frozen(root))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def _check_coefficient(a) -> complex:
    a = complex(a)
    if abs(a) > 1.0:
        raise ConfigError(f"correlation coefficient modulus must be <= 1, got |a|={abs(a)}")
    return a


def toeplitz_entries(dim: int, a) -> np.ndarray:
    """Dense entries of ``Omega_dim(a)`` without building the square root."""
    if int(dim) != dim or dim < 1:
        raise ConfigError(f"dim must be a positive integer, got {dim}")
    a = _check_coefficient(a)
    lag = np.arange(dim)[None, :] - np.arange(dim)[:, None]
    upper = np.power(np.complex128(a), np.abs(lag))
    return np.where(lag >= 0, upper, np.conj(upper))


def toeplitz_corr(dim: int, a) -> CorrelationMatrix:
    """Complex Toeplitz correlation ``Omega_dim(a)``.

    Entry ``(i, j)`` is ``a**(j-i)`` for ``j >= i`` and ``conj(a)**(i-j)``
    otherwise, so the diagonal is one.
    """
    return CorrelationMatrix(toeplitz_entries(dim, a))


def toeplitz_det(dim: int, a) -> float:
    """Closed-form determinant ``(1 - |a|^2)**(dim - 1)`` of ``Omega_dim(a)``."""
    if int(dim) != dim or dim < 1:
        raise ConfigError(f"dim must be a positive integer, got {dim}")
    a = _check_coefficient(a)
    return (1.0 - abs(a) ** 2) ** (dim - 1)


def toeplitz_log2det(dim: int, a) -> float:
    """``log2`` of :func:`toeplitz_det`; does not underflow for large `dim`."""
    if int(dim) != dim or dim < 1:
        raise ConfigError(f"dim must be a positive integer, got {dim}")
    a = _check_coefficient(a)
    if dim == 1:
        return 0.0
    if abs(a) == 1.0:
        return -math.inf
    return (dim - 1) * math.log2(1.0 - abs(a) ** 2)


@dataclass(frozen=True)
class GeometricSpec:
    """Plane-wave arrival paths impinging on a uniform linear array."""

    attenuations: Sequence[float]
    doas: Sequence[float]
    spacing_over_wavelength: float
    num_elements: int

    def __post_init__(self):
        att = np.asarray(self.attenuations, dtype=float)
        doa = np.asarray(self.doas, dtype=float)
        if att.ndim != 1 or att.size == 0:
            raise ConfigError("at least one path is required")
        if att.shape != doa.shape:
            raise ConfigError("attenuations and doas must have the same length")
        if np.any(att < 0):
            raise ConfigError("attenuations must be nonnegative")
        if att.sum() <= 0:
            raise ConfigError("attenuations must sum to a positive value")
        if self.spacing_over_wavelength <= 0:
            raise ConfigError("antenna spacing must be positive")
        if int(self.num_elements) != self.num_elements or self.num_elements < 1:
            raise ConfigError("num_elements must be a positive integer")
        object.__setattr__(self, "attenuations", tuple(att.tolist()))
        object.__setattr__(self, "doas", tuple(doa.tolist()))

    @property
    def num_paths(self) -> int:
        return len(self.attenuations)

    @property
    def phase_step(self) -> float:
        """Inter-element phase ``2*pi*d/lambda``."""
        return 2.0 * np.pi * self.spacing_over_wavelength


def steering_vector(num_elements: int, phase_step: float, doa: float) -> np.ndarray:
    n = np.arange(num_elements)
    return np.exp(-1j * phase_step * n * np.cos(doa))


def geometric_corr(spec: GeometricSpec) -> CorrelationMatrix:
    """Sum of path-weighted steering-vector outer products, scaled to unit diagonal."""
    att = np.asarray(spec.attenuations)
    n = np.arange(spec.num_elements)
    # columns are steering vectors a(beta_p)
    steer = np.exp(-1j * spec.phase_step * np.outer(n, np.cos(spec.doas)))
    r = (steer * att) @ steer.conj().T
    r /= att.sum()
    return CorrelationMatrix(0.5 * (r + r.conj().T))


def is_psd(m, tol: float = PSD_TOL) -> bool:
    m = np.asarray(m)
    return bool(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() >= -tol)
