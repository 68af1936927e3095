"""Dense complex linear algebra for small Hilbert/Liouville spaces.

Everything here operates on plain ``numpy.ndarray`` objects (complex128,
row-major). The simulator never needs more than an 8-dimensional Hilbert
space (64-dimensional Liouville space), so dense storage is used
throughout.

All angular quantities elsewhere in the package are in rad/s; this module
is unit-agnostic.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

__all__ = [
    "SingularMatrixError",
    "kron",
    "expm",
    "eig2x2",
    "eigvecs2x2",
    "solve_linear",
    "hermiticity_defect",
    "norm_defect",
]

SOLVE_RTOL = 1e-10


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a linear solve hits a (numerically) singular matrix."""


def _as_complex_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {a.shape}")
    return a


def kron(a, b) -> np.ndarray:
    """Kronecker product with entry [(i*rb+k), (j*cb+l)] = a[i,j]*b[k,l]."""
    a = _as_complex_matrix(a)
    b = _as_complex_matrix(b)
    if a.size == 0 or b.size == 0:
        raise ValueError("kron operands must be non-empty")
    return np.kron(a, b)


def expm(a) -> np.ndarray:
    """Matrix exponential (Pade approximant with scaling and squaring)."""
    a = _as_complex_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"expm needs a square matrix, got {a.shape}")
    return sla.expm(a)


def _sqrt_keep_axis(z: complex) -> complex:
    # For a real discriminant, keep the root exactly real or exactly
    # imaginary instead of letting a signed zero pick the branch.
    if z.imag == 0.0:
        if z.real >= 0.0:
            return complex(np.sqrt(z.real), 0.0)
        return complex(0.0, np.sqrt(-z.real))
    return complex(np.sqrt(z))


def eig2x2(h) -> tuple[complex, complex]:
    """Eigenvalues of a 2x2 matrix, larger imaginary part first.

    Roots of ``lambda^2 - tr(H) lambda + det(H) = 0`` via the
    cancellation-free quadratic formula: the dominant root is
    ``q/2 = (tr + sign*sqrt(disc))/2`` and the other is recovered from
    the product ``det = lambda_1 lambda_2``. Ties in the imaginary part
    are broken by the larger real part, keeping eigenvalue traces
    continuous across a parameter sweep through the degeneracy.
    """
    h = _as_complex_matrix(h)
    if h.shape != (2, 2):
        raise ValueError(f"eig2x2 needs a 2x2 matrix, got {h.shape}")
    tr = h[0, 0] + h[1, 1]
    det = h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0]
    disc = tr * tr - 4.0 * det
    sq = _sqrt_keep_axis(disc)
    q = tr + sq if abs(tr + sq) >= abs(tr - sq) else tr - sq
    if q == 0:
        lam = (complex(0.0), complex(0.0))
    else:
        l1 = q / 2.0
        l2 = 2.0 * det / q
        lam = (l1, l2)
    key = lambda z: (z.imag, z.real)
    return (lam[0], lam[1]) if key(lam[0]) >= key(lam[1]) else (lam[1], lam[0])


def eigvecs2x2(h, eigvals: tuple[complex, complex] | None = None) -> np.ndarray:
    """Normalized right eigenvectors of a 2x2 matrix, as columns.

    At an exceptional point the two columns coalesce into the same
    vector; no attempt is made to return a generalized eigenvector.
    """
    h = _as_complex_matrix(h)
    if eigvals is None:
        eigvals = eig2x2(h)
    cols = []
    for lam in eigvals:
        # rows of (H - lam I) are both orthogonal to the eigenvector;
        # pick the candidate with the larger norm for stability.
        c1 = np.array([h[0, 1], lam - h[0, 0]])
        c2 = np.array([lam - h[1, 1], h[1, 0]])
        v = c1 if np.linalg.norm(c1) >= np.linalg.norm(c2) else c2
        n = np.linalg.norm(v)
        if n == 0.0:  # H is proportional to the identity
            v = np.array([1.0, 0.0], dtype=complex)
            n = 1.0
        cols.append(v / n)
    return np.column_stack(cols)


def solve_linear(a, b) -> np.ndarray:
    """Solve ``A x = b`` by LU with partial pivoting.

    Raises ``SingularMatrixError`` when the factorization fails or the
    residual exceeds ``1e-10 * ||b||`` (ill conditioning is treated as
    singularity; the residual bound is part of the contract).
    """
    a = _as_complex_matrix(a)
    b = np.asarray(b, dtype=complex)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"solve_linear needs a square matrix, got {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    try:
        x = sla.solve(a, b)
    except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
        raise SingularMatrixError(str(exc)) from exc
    nb = np.linalg.norm(b)
    res = np.linalg.norm(a @ x - b)
    if res > SOLVE_RTOL * nb and nb > 0.0:
        raise SingularMatrixError(
            f"solve residual {res:.3e} exceeds {SOLVE_RTOL:.0e} * ||b|| = {SOLVE_RTOL * nb:.3e}"
        )
    return x


def hermiticity_defect(a) -> float:
    """max |A - A^dagger|, zero for Hermitian input."""
    a = _as_complex_matrix(a)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def norm_defect(v) -> float:
    """| ||v|| - 1 | for a state vector."""
    return float(abs(np.linalg.norm(np.asarray(v, dtype=complex)) - 1.0))
