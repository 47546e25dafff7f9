"""Dense complex-matrix kernel used by every tomography routine.

All matrices are plain ``numpy.ndarray`` objects with ``complex128`` entries
in row-major (C) order.  Composite systems use the flat-index convention
``|i>_1 (x) |j>_2  <->  i * d2 + j``, which matches both ``numpy.kron`` and
row-major ``reshape``; every tensor operation below assumes it.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

# Relative tolerance below which an input is accepted as Hermitian / PSD, and
# the larger threshold beyond which we refuse to silently repair it.
HERMITICITY_RTOL = 1e-9
HERMITICITY_FAIL_RTOL = 1e-6
PSD_RTOL = 1e-9
PSD_FAIL_RTOL = 1e-6


class DimensionError(ValueError):
    """Matrix or vector dimensions do not match the operation."""


class NotHermitianError(ValueError):
    """Input deviates from Hermiticity beyond the repairable tolerance."""


class NotPSDError(ValueError):
    """Input has an eigenvalue too negative to be treated as numerical noise."""


class HermitianEig(NamedTuple):
    """Spectral decomposition with eigenvalues sorted non-increasing.

    ``eigenvectors[:, j]`` pairs with ``eigenvalues[j]``; the eigenvector
    matrix is unitary and ``U diag(w) U^dag`` reconstructs the input.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_generator(rng) -> np.random.Generator:
    """Accept a ``numpy.random.Generator`` or anything with ``.generator()``."""
    if isinstance(rng, np.random.Generator):
        return rng
    if hasattr(rng, "generator"):
        return rng.generator()
    raise TypeError(f"expected a Generator or SeededRng, got {type(rng)!r}")


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def frobenius(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def _require_square(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return m


def hermitian_part(m: np.ndarray, check: bool = True) -> np.ndarray:
    """Return (m + m^dag)/2, refusing inputs that are badly non-Hermitian.

    Asymmetry up to ``HERMITICITY_FAIL_RTOL * ||m||`` is treated as numerical
    noise and symmetrized away; anything larger raises.
    """
    m = _require_square(m)
    sym = (m + dagger(m)) / 2.0
    if check:
        scale = max(frobenius(m), 1.0)
        if frobenius(m - sym) > HERMITICITY_FAIL_RTOL * scale:
            raise NotHermitianError("matrix is not Hermitian within tolerance")
    return sym


def hermitian_eig(m: np.ndarray) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues non-increasing.

    The input is symmetrized first; degenerate eigenspaces come back with an
    arbitrary orthonormal basis (callers must not rely on a particular one).
    """
    sym = hermitian_part(m)
    w, v = np.linalg.eigh(sym)
    return HermitianEig(w[::-1].copy(), v[:, ::-1].copy())


def eig_reconstruct(w: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Assemble ``v diag(w) v^dag`` (broadcast form, symmetrized)."""
    out = (v * w) @ dagger(v)
    return (out + dagger(out)) / 2.0


def _psd_eigenvalues(m: np.ndarray, op: str) -> HermitianEig:
    w, v = hermitian_eig(m)
    scale = max(float(w[0]) if w.size else 0.0, frobenius(m), 1e-300)
    if w[-1] < -PSD_FAIL_RTOL * scale:
        raise NotPSDError(
            f"{op}: eigenvalue {w[-1]:.3e} below -{PSD_FAIL_RTOL:.0e} * ||m||"
        )
    return HermitianEig(np.maximum(w, 0.0), v)


def matrix_sqrt(m: np.ndarray) -> np.ndarray:
    """Principal square root of a PSD matrix (small negatives clamped to 0)."""
    w, v = _psd_eigenvalues(m, "matrix_sqrt")
    return eig_reconstruct(np.sqrt(w), v)


def inv_sqrt(m: np.ndarray, clamp: float | None = None) -> np.ndarray:
    """Inverse square root with eigenvalues floored at ``clamp``.

    Eigenvalues below the floor are raised to it before inversion, so the
    result is always finite; the default floor is ``1e-12 * d``.
    """
    m = _require_square(m)
    if clamp is None:
        clamp = 1e-12 * m.shape[0]
    w, v = hermitian_eig(m)
    w = np.maximum(w, clamp)
    return eig_reconstruct(1.0 / np.sqrt(w), v)


def partial_trace_1(m: np.ndarray, d1: int, d2: int) -> np.ndarray:
    """Trace out system 1 of ``m`` on H_1 (x) H_2, returning a d2 x d2 matrix."""
    m = _require_square(m)
    if m.shape[0] != d1 * d2:
        raise DimensionError(f"matrix of size {m.shape[0]} is not {d1}*{d2}")
    return np.einsum("ijik->jk", m.reshape(d1, d2, d1, d2))


def partial_trace_2(m: np.ndarray, d1: int, d2: int) -> np.ndarray:
    """Trace out system 2 of ``m`` on H_1 (x) H_2, returning a d1 x d1 matrix."""
    m = _require_square(m)
    if m.shape[0] != d1 * d2:
        raise DimensionError(f"matrix of size {m.shape[0]} is not {d1}*{d2}")
    return np.einsum("ijkj->ik", m.reshape(d1, d2, d1, d2))


def vec(m: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization: vec([[a,b],[c,d]]) = (a, c, b, d)."""
    return np.asarray(m, dtype=complex).flatten(order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`vec` onto a d x d matrix."""
    v = np.asarray(v, dtype=complex).ravel()
    if v.size != d * d:
        raise DimensionError(f"vector of length {v.size} is not {d}^2")
    return v.reshape(d, d, order="F")


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, index convention matching the partial traces."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def haar_unitary(d: int, rng) -> np.ndarray:
    """Haar-random d x d unitary via QR of a complex Ginibre matrix.

    The phases of R's diagonal are absorbed into Q, which makes the
    distribution exactly Haar.  Deterministic for a fixed generator state.
    """
    if d < 1:
        raise DimensionError("dimension must be >= 1")
    gen = as_generator(rng)
    z = (gen.standard_normal((d, d)) + 1j * gen.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r).copy()
    diag[diag == 0] = 1.0
    return q * (diag / np.abs(diag))


def project_psd(m: np.ndarray) -> np.ndarray:
    """Frobenius-nearest PSD matrix: clamp negative eigenvalues to zero."""
    w, v = hermitian_eig(m)
    return eig_reconstruct(np.maximum(w, 0.0), v)
