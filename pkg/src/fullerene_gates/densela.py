"""Small dense complex linear algebra used by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128`` (at most 16x16),
states are 1-D complex arrays. Nothing here is clever; the point is that
every propagator in the package goes through :func:`herm_expm`, which
diagonalises the generator once and exponentiates the eigenvalues, so the
result is unitary to machine precision.
"""

import numpy as np

from .errors import DimensionMismatch, NonHermitianInput

HERMITIAN_RTOL = 1e-12
NORMALIZED_ATOL = 1e-10


def as_matrix(m):
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {a.shape}")
    return a


def as_state(v):
    a = np.asarray(v, dtype=complex)
    if a.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D state vector, got shape {a.shape}")
    return a


def kron(a, b):
    """Kronecker product, ``(a⊗b)[i*rb + k, j*cb + l] = a[i, j] * b[k, l]``."""
    return np.kron(as_matrix(a), as_matrix(b))


def dagger(m):
    return as_matrix(m).conj().T


def matmul(a, b):
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def frob_norm(m):
    return float(np.linalg.norm(as_matrix(m), "fro"))


def apply(m, v):
    m, v = as_matrix(m), as_state(v)
    if m.shape[1] != v.shape[0]:
        raise DimensionMismatch(f"cannot apply {m.shape} to state of dim {v.shape[0]}")
    return m @ v


def commutator(a, b):
    return matmul(a, b) - matmul(b, a)


def hermiticity_defect(m):
    m = as_matrix(m)
    return frob_norm(m - m.conj().T)


def is_hermitian(m, rtol=HERMITIAN_RTOL):
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    return hermiticity_defect(m) <= rtol * max(1.0, frob_norm(m))


def check_hermitian(m, rtol=HERMITIAN_RTOL):
    m = as_matrix(m)
    if not is_hermitian(m, rtol):
        raise NonHermitianInput(
            f"matrix of shape {m.shape} is not Hermitian "
            f"(‖M−M†‖_F = {hermiticity_defect(m):.3e})"
        )
    return m


def herm_expm(h, t):
    """Return ``exp(-i h t)`` for a Hermitian generator ``h``.

    Parameters
    ----------
    h : array_like, shape (n, n)
        Hermitian generator.
    t : float
        Evolution time (same units as ``1/h``).

    Raises
    ------
    NonHermitianInput
        If ``h`` fails the Hermiticity check.
    """
    h = check_hermitian(h)
    # symmetrise so eigh sees exactly Hermitian input
    evals, evecs = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


def herm_expm_batch(hs, dts):
    """Vectorised :func:`herm_expm` over a stack ``hs`` of shape (k, n, n).

    No Hermiticity check is made; callers build ``hs`` Hermitian by
    construction.
    """
    hs = np.asarray(hs, dtype=complex)
    hs = 0.5 * (hs + np.conj(np.swapaxes(hs, -1, -2)))
    evals, evecs = np.linalg.eigh(hs)
    phases = np.exp(-1j * evals * np.asarray(dts, dtype=float).reshape(-1, 1))
    return (evecs * phases[:, None, :]) @ np.conj(np.swapaxes(evecs, -1, -2))


def unitarity_defect(u):
    u = as_matrix(u)
    return frob_norm(u.conj().T @ u - np.eye(u.shape[1]))


def is_normalized(v, atol=NORMALIZED_ATOL):
    v = as_state(v)
    return abs(float(np.vdot(v, v).real) - 1.0) <= atol


def basis_state(dim, index):
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v
