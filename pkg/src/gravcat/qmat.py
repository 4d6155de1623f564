"""Fixed-size complex linear algebra for two-qubit operators.

Matrices are plain ``numpy`` arrays of shape ``(..., 2, 2)`` or
``(..., 4, 4)``; most routines accept a leading batch dimension so that
parameter grids can be processed in one call.  The two-qubit basis is
ordered ``|ee>, |eg>, |ge>, |gg>`` with ``|e> = (1, 0)`` and
``|g> = (0, 1)``, the first tensor factor being the left qubit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .constants import (
    ALGEBRAIC_TOL,
    CONSTRUCTION_TOL,
    DEGENERATE_NORM,
    IMAG_TOL,
    JACOBI_MAX_SWEEPS,
    JACOBI_OFF_TOL,
)
from .errors import ConfigError, DegenerateDraw, NonConvergence, Overflow

KET_E = np.array([1.0, 0.0], dtype=complex)
KET_G = np.array([0.0, 1.0], dtype=complex)
BASIS_LABELS = ("ee", "eg", "ge", "gg")

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY4 = np.eye(4, dtype=complex)

_PAIRS = tuple((p, q) for p in range(4) for q in range(p + 1, 4))
_OFFDIAG = ~np.eye(4, dtype=bool)


def _as_square(m, dims=(2, 4)) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2] or a.shape[-1] not in dims:
        raise ConfigError(f"expected a square matrix of size {dims}, got shape {a.shape}", "matrix")
    if not np.all(np.isfinite(a)):
        raise ConfigError("matrix has non-finite entries", "matrix")
    return a


def dagger(m) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def kron2(a, b) -> np.ndarray:
    """Kronecker product of two 2x2 matrices; ``a`` acts on the left qubit."""
    a = _as_square(a, (2,))
    b = _as_square(b, (2,))
    out = np.einsum("...ij,...kl->...ikjl", a, b)
    return out.reshape(out.shape[:-4] + (4, 4))


def is_hermitian(m, tol: float = CONSTRUCTION_TOL) -> bool:
    a = np.asarray(m)
    return bool(np.all(np.abs(a - dagger(a)) <= tol))


def as_hermitian(m, tol: float = CONSTRUCTION_TOL) -> np.ndarray:
    """Validate a 4x4 Hermitian operator and return its symmetrized copy."""
    a = _as_square(m, (4,))
    if not is_hermitian(a, tol):
        raise ConfigError("operator is not Hermitian", "matrix")
    return 0.5 * (a + dagger(a))


def is_unitary(u, tol: float = ALGEBRAIC_TOL) -> bool:
    u = np.asarray(u)
    eye = np.eye(u.shape[-1])
    return bool(np.all(np.abs(dagger(u) @ u - eye) <= tol))


def commutator_norm(a, b) -> np.ndarray:
    """Frobenius norm of ``[a, b]`` (batched)."""
    c = a @ b - b @ a
    return np.sqrt(np.sum(np.abs(c) ** 2, axis=(-2, -1)))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues and the matching orthonormal eigenvectors.

    ``eigenvectors[..., :, k]`` is paired with ``eigenvalues[..., k]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues[..., None, :]) @ dagger(v)

    def projector(self, k: int) -> np.ndarray:
        v = self.eigenvectors[..., :, k]
        return v[..., :, None] * np.conj(v[..., None, :])


def _off_norm(a: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.abs(a[..., _OFFDIAG]) ** 2, axis=-1))


def _jacobi_rotate(a, v, p, q, active):
    """One complex Jacobi rotation annihilating ``a[:, p, q]`` where active.

    The rotation is ``V = D R`` with ``D`` a phase on index ``q`` that makes
    the pivot real and ``R`` the classic real symmetric Jacobi rotation.
    Inactive matrices see an exact identity transform.
    """
    app = a[:, p, p].real
    aqq = a[:, q, q].real
    apq = a[:, p, q]
    r = np.abs(apq)
    rot = active & (r > 0.0)
    safe_r = np.where(rot, r, 1.0)
    phase = np.where(rot, apq / safe_r, 1.0)
    theta = (aqq - app) / (2.0 * safe_r)
    t = np.copysign(1.0, theta) / (np.abs(theta) + np.hypot(theta, 1.0))
    t = np.where(rot, t, 0.0)
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    cph = np.conj(phase)

    # A <- A V  (columns p, q)
    col_p = a[:, :, p].copy()
    col_q = a[:, :, q]
    a[:, :, p] = c[:, None] * col_p - (s * cph)[:, None] * col_q
    a[:, :, q] = s[:, None] * col_p + (c * cph)[:, None] * col_q
    # A <- V^dagger A  (rows p, q)
    row_p = a[:, p, :].copy()
    row_q = a[:, q, :]
    a[:, p, :] = c[:, None] * row_p - (s * phase)[:, None] * row_q
    a[:, q, :] = s[:, None] * row_p + (c * phase)[:, None] * row_q
    a[:, p, q] = np.where(rot, 0.0, a[:, p, q])
    a[:, q, p] = np.where(rot, 0.0, a[:, q, p])
    a[:, p, p] = a[:, p, p].real
    a[:, q, q] = a[:, q, q].real

    vp = v[:, :, p].copy()
    vq = v[:, :, q]
    v[:, :, p] = c[:, None] * vp - (s * cph)[:, None] * vq
    v[:, :, q] = s[:, None] * vp + (c * cph)[:, None] * vq


def hermitian_eig(h) -> SpectralDecomposition:
    """Eigendecomposition of Hermitian 4x4 matrices by cyclic Jacobi sweeps.

    Accepts a single matrix or a stack ``(..., 4, 4)``.  Each matrix is
    iterated until its off-diagonal Frobenius norm drops below
    ``JACOBI_OFF_TOL * max(1, ||h||_F)``; converged matrices are frozen, so
    the result for one matrix does not depend on the rest of the batch.
    Eigenvalues are returned ascending, ties kept in diagonal order.
    """
    h = as_hermitian(h)
    batch_shape = h.shape[:-2]
    a = h.reshape(-1, 4, 4).copy()
    n = a.shape[0]
    v = np.broadcast_to(IDENTITY4, (n, 4, 4)).copy()
    tol = JACOBI_OFF_TOL * np.maximum(1.0, np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1))))

    for _ in range(JACOBI_MAX_SWEEPS):
        active = _off_norm(a) >= tol
        if not active.any():
            break
        for p, q in _PAIRS:
            _jacobi_rotate(a, v, p, q, active)
    else:
        if np.any(_off_norm(a) >= tol):
            raise NonConvergence(f"Jacobi iteration did not converge in {JACOBI_MAX_SWEEPS} sweeps")

    evals = np.diagonal(a, axis1=-2, axis2=-1).real
    order = np.argsort(evals, axis=-1, kind="stable")
    evals = np.take_along_axis(evals, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    return SpectralDecomposition(evals.reshape(batch_shape + (4,)), v.reshape(batch_shape + (4, 4)))


def spectral_function(spec: SpectralDecomposition, f: Callable) -> np.ndarray:
    """Return ``sum_k f(e_k) |v_k><v_k|`` for a real function ``f``."""
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            fv = np.asarray(f(spec.eigenvalues), dtype=float)
        except TypeError:
            fv = np.vectorize(f, otypes=[float])(spec.eigenvalues)
        fv = np.broadcast_to(fv, spec.eigenvalues.shape)
    if not np.all(np.isfinite(fv)):
        raise Overflow("spectral function is not finite on the spectrum")
    v = spec.eigenvectors
    return (v * fv[..., None, :]) @ dagger(v)


def expectation(h, rho):
    """``tr(h rho)``; the imaginary part must vanish (both are Hermitian)."""
    tr = np.einsum("...ij,...ji->...", np.asarray(h), np.asarray(rho))
    if np.any(np.abs(tr.imag) >= IMAG_TOL):
        raise ConfigError("tr(h rho) has a non-negligible imaginary part", "rho")
    re = tr.real
    return float(re) if re.ndim == 0 else re


def _orthonormalize(z: np.ndarray):
    """Gram-Schmidt on the columns of ``(n, 4, 4)`` stacks, two passes.

    The implied triangular factor has a real positive diagonal (the column
    norms), so no extra phase correction is needed for Haar measure.
    """
    q = z.copy()
    min_norm = np.full(q.shape[0], np.inf)
    for k in range(4):
        col = q[:, :, k]
        for _ in range(2):
            for j in range(k):
                qj = q[:, :, j]
                proj = np.sum(np.conj(qj) * col, axis=-1)
                col = col - proj[:, None] * qj
        nrm = np.sqrt(np.sum(np.abs(col) ** 2, axis=-1))
        min_norm = np.minimum(min_norm, nrm)
        q[:, :, k] = col / np.where(nrm > 0, nrm, 1.0)[:, None]
    return q, min_norm


def _ginibre(seed: int, stream: int, attempt: int) -> np.ndarray:
    bitgen = np.random.Philox(key=np.array([seed % 2**64, stream % 2**64], dtype=np.uint64), counter=[0, 0, 0, attempt])
    rng = np.random.Generator(bitgen)
    re = rng.standard_normal((4, 4))
    im = rng.standard_normal((4, 4))
    return (re + 1j * im) / np.sqrt(2.0)


def random_unitaries(seed: int, count: int, start: int = 0, max_attempts: int = 16) -> np.ndarray:
    """Stack of ``count`` Haar-random unitaries for streams ``start..start+count-1``.

    Stream ``k`` of ``seed`` always yields the same matrix, independently of
    how the streams are grouped into calls.
    """
    z = np.stack([_ginibre(seed, start + k, 0) for k in range(count)]) if count else np.empty((0, 4, 4), complex)
    q, nrm = _orthonormalize(z)
    for i in np.flatnonzero(nrm < DEGENERATE_NORM):
        for attempt in range(1, max_attempts):
            qi, ni = _orthonormalize(_ginibre(seed, start + i, attempt)[None])
            if ni[0] >= DEGENERATE_NORM:
                q[i] = qi[0]
                break
        else:
            raise DegenerateDraw(f"stream {start + i} of seed {seed} kept producing degenerate draws")
    return q


def random_unitary(seed: int, stream: int = 0) -> np.ndarray:
    """Deterministic Haar-random 4x4 unitary from a counter-based generator."""
    return random_unitaries(seed, 1, stream)[0]
