"""Small dense complex linear algebra used by the quantum constructions.

Matrices and vectors are plain ``numpy`` arrays of dtype ``complex128``.
Explicit Hermitian eigenproblems up to ``JACOBI_MAX_DIM`` are solved with
cyclic Jacobi rotations; only the leading eigenpair of large implicit
operators is ever needed, and that goes through Lanczos.
"""
from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .errors import NoConvergence, NotHermitian

HERMITIAN_TOL = 1e-10
RESIDUAL_TOL = 1e-8
ORTHO_TOL = 1e-10
JACOBI_MAX_DIM = 64
JACOBI_MAX_SWEEPS = 100

SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def kron(a, b) -> np.ndarray:
    """Kronecker product; the left factor is the most significant index."""
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(*factors) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, as_matrix(f))
    return out


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def hermiticity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - dagger(m)))) if m.size else 0.0


def is_unitary(u, tol: float = ORTHO_TOL) -> bool:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))) <= tol)


def _jacobi(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = a.shape[0]
    a = a.copy()
    v = np.eye(n, dtype=complex)
    scale = max(float(np.max(np.abs(a))), 1e-300)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.abs(a - np.diag(np.diag(a)))
        if float(np.max(off, initial=0.0)) <= 1e-15 * scale:
            return np.real(np.diag(a)), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= 1e-300:
                    continue
                phase = apq / r
                theta = (a[q, q].real - a[p, p].real) / (2.0 * r)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # J acts on columns p, q: col_p' = c col_p - s conj(phase) col_q,
                # col_q' = s phase col_p + c col_q.
                jpq = s * phase
                jqp = -s * np.conj(phase)
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp + jqp * cq
                a[:, q] = jpq * cp + c * cq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp + np.conj(jqp) * rq
                a[q, :] = np.conj(jpq) * rp + c * rq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp + jqp * vq
                v[:, q] = jpq * vp + c * vq
    raise NoConvergence(f"Jacobi iteration did not converge in {JACOBI_MAX_SWEEPS} sweeps")


def hermitian_eig(m, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in ascending order and orthonormal eigenvectors (as columns).

    Raises NotHermitian when ``max |m - m^dagger|`` exceeds ``tol``.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise NotHermitian(f"matrix is not square: {m.shape}")
    defect = hermiticity_defect(m)
    if defect > tol:
        raise NotHermitian(f"max |m - m^dagger| = {defect:.3e} exceeds {tol:.1e}")
    h = 0.5 * (m + dagger(m))
    if h.shape[0] <= JACOBI_MAX_DIM:
        w, v = _jacobi(h)
    else:
        w, v = np.linalg.eigh(h)
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def largest_eig(op_apply: Callable[[np.ndarray], np.ndarray], dim: int,
                tol: float = RESIDUAL_TOL, seed: int = 0) -> tuple[float, np.ndarray]:
    """Leading eigenpair of a Hermitian operator known only through its action."""
    if dim < 1:
        raise ValueError("dim must be positive")
    if dim <= 8:
        dense = np.column_stack([op_apply(e) for e in np.eye(dim, dtype=complex)])
        w, v = hermitian_eig(dense, tol=1e-8)
        value, vec = float(w[-1]), v[:, -1]
    else:
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        probe = op_apply(v0)
        if abs(np.imag(np.vdot(v0, probe))) > 1e-10 * max(1.0, float(np.linalg.norm(v0) * np.linalg.norm(probe))):
            raise NotHermitian("operator action is not Hermitian on a random probe")
        op = LinearOperator((dim, dim), matvec=lambda x: op_apply(np.asarray(x, dtype=complex).ravel()),
                            dtype=complex)
        try:
            w, v = eigsh(op, k=1, which="LA", v0=v0, tol=1e-13, maxiter=20 * dim + 1000)
        except ArpackNoConvergence as exc:
            raise NoConvergence(str(exc)) from exc
        value, vec = float(w[0]), v[:, 0]
    vec = vec / np.linalg.norm(vec)
    residual = float(np.linalg.norm(op_apply(vec) - value * vec))
    if residual > tol * max(abs(value), 1.0):
        raise NoConvergence(f"eigen-residual {residual:.3e} too large")
    return value, vec
