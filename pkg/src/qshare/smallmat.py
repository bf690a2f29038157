"""Dense kernels for the small Hermitian matrices that appear as reduced states.

Matrices are plain complex ``numpy`` arrays.  Every routine accepts either a
single ``(d, d)`` matrix or a stack ``(..., d, d)``; stacks are processed in
one vectorised pass, which is how the batch verification suites stay fast.
"""
from itertools import combinations

import numpy as np

from .constants import JACOBI_MAX_SWEEPS, TOL
from .errors import NoConvergence, NotHermitian, NotPSD, WrongDimension

SIGMA_Y = np.array([[0, -1j], [1j, 0]])
SIGMA_YY = np.kron(SIGMA_Y, SIGMA_Y)


def _as_square(h):
    h = np.asarray(h, dtype=complex)
    if h.ndim < 2 or h.shape[-1] != h.shape[-2]:
        raise WrongDimension(f"expected square matrix (stack), got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("matrix has non-finite entries")
    return h


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def is_hermitian(h, tol=TOL.hermitian):
    h = np.asarray(h)
    return bool(np.max(np.abs(h - dagger(h)), initial=0.0) <= tol)


def is_unitary(u, tol=TOL.unitary):
    u = np.asarray(u, dtype=complex)
    eye = np.eye(u.shape[-1])
    return bool(np.max(np.abs(dagger(u) @ u - eye), initial=0.0) <= tol)


def is_psd(h, tol=TOL.clamp):
    if not is_hermitian(h):
        return False
    return bool(np.min(hermitian_eigen(h)[0]) >= -tol)


def _eigen_2x2(h, want_vectors):
    a = h[..., 0, 0].real
    d = h[..., 1, 1].real
    b = h[..., 0, 1]
    mid = 0.5 * (a + d)
    rad = np.hypot(0.5 * (a - d), np.abs(b))
    evals = np.stack([mid - rad, mid + rad], axis=-1)
    if not want_vectors:
        return evals, None

    hi = mid + rad
    # two algebraically equivalent candidates; keep the better conditioned one
    cand1 = np.stack([hi - d, np.conj(b)], axis=-1)
    cand2 = np.stack([b, hi - a], axis=-1)
    n1 = np.linalg.norm(cand1, axis=-1)
    n2 = np.linalg.norm(cand2, axis=-1)
    v_hi = np.where((n1 >= n2)[..., None], cand1, cand2)
    norm = np.maximum(n1, n2)
    degenerate = norm <= 1e-300
    v_hi = np.where(degenerate[..., None], np.array([0.0, 1.0], dtype=complex),
                    v_hi / np.where(degenerate, 1.0, norm)[..., None])
    v_lo = np.stack([-np.conj(v_hi[..., 1]), np.conj(v_hi[..., 0])], axis=-1)
    vecs = np.stack([v_lo, v_hi], axis=-1)
    return evals, vecs


def _eigen_jacobi(h, want_vectors):
    a = np.array(h, dtype=complex, copy=True)
    d = a.shape[-1]
    v = np.broadcast_to(np.eye(d, dtype=complex), a.shape).copy()
    scale = np.linalg.norm(a, axis=(-2, -1))
    thresh = (1e-15 * scale) ** 2
    # rotating on entries this small only invites overflow in the phase
    negligible = 1e-18 * scale
    offdiag = ~np.eye(d, dtype=bool)
    pivots = list(combinations(range(d), 2))

    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.sum(np.abs(a[..., offdiag]) ** 2, axis=-1)
        if np.all(off <= thresh):
            break
        for p, q in pivots:
            apq = a[..., p, q]
            mag = np.abs(apq)
            active = mag > negligible
            if not np.any(active):
                continue
            mag = np.where(active, mag, 0.0)
            phase = np.conj(np.where(active, apq, 1.0)) / np.where(active, mag, 1.0)
            theta = 0.5 * np.arctan2(2 * mag, (a[..., q, q] - a[..., p, p]).real)
            c, s = np.cos(theta), np.sin(theta)
            # U restricted to (p, q) is diag(1, phase) @ [[c, s], [-s, c]]
            upp, upq, uqp, uqq = c, s, -s * phase, c * phase

            col_p = a[..., :, p].copy()
            col_q = a[..., :, q]
            a[..., :, p] = col_p * upp[..., None] + col_q * uqp[..., None]
            a[..., :, q] = col_p * upq[..., None] + col_q * uqq[..., None]
            row_p = a[..., p, :].copy()
            row_q = a[..., q, :]
            a[..., p, :] = row_p * np.conj(upp)[..., None] + row_q * np.conj(uqp)[..., None]
            a[..., q, :] = row_p * np.conj(upq)[..., None] + row_q * np.conj(uqq)[..., None]
            a[..., p, q] = 0.0
            a[..., q, p] = 0.0
            if want_vectors:
                vp = v[..., :, p].copy()
                vq = v[..., :, q]
                v[..., :, p] = vp * upp[..., None] + vq * uqp[..., None]
                v[..., :, q] = vp * upq[..., None] + vq * uqq[..., None]
    else:
        off = np.sum(np.abs(a[..., offdiag]) ** 2, axis=-1)
        if not np.all(off <= thresh):
            raise NoConvergence(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")

    evals = np.real(np.diagonal(a, axis1=-2, axis2=-1))
    order = np.argsort(evals, axis=-1, kind="stable")
    evals = np.take_along_axis(evals, order, axis=-1)
    if not want_vectors:
        return evals, None
    vecs = np.take_along_axis(v, order[..., None, :], axis=-1)
    return evals, vecs


def hermitian_eigen(h, want_vectors=False):
    """Eigen-decomposition of a Hermitian matrix or stack of them.

    The 2x2 case uses the closed trace/determinant form; larger matrices go
    through cyclic complex Jacobi rotations.

    Parameters
    ----------
    h : array_like, shape (..., d, d)
        Hermitian input.  Asymmetry beyond ``TOL.hermitian`` is rejected;
        smaller asymmetry is removed by symmetrising.
    want_vectors : bool
        Also return orthonormal eigenvectors as columns.

    Returns
    -------
    evals : ndarray, shape (..., d)
        Ascending eigenvalues.
    vecs : ndarray, shape (..., d, d) or None
    """
    h = _as_square(h)
    asym = np.max(np.abs(h - dagger(h)), initial=0.0)
    if asym > TOL.hermitian:
        raise NotHermitian(f"matrix asymmetry {asym:.3g} exceeds {TOL.hermitian:g}")
    h = 0.5 * (h + dagger(h))
    d = h.shape[-1]
    if d == 1:
        evals = h[..., 0].real
        return evals, (np.ones_like(h) if want_vectors else None)
    if d == 2:
        return _eigen_2x2(h, want_vectors)
    return _eigen_jacobi(h, want_vectors)


def psd_sqrt(h):
    """Principal square root of a positive semidefinite Hermitian matrix."""
    evals, vecs = hermitian_eigen(h, want_vectors=True)
    worst = np.min(evals, initial=0.0)
    if worst < -TOL.psd_error:
        raise NotPSD(f"eigenvalue {worst:.3g} below {-TOL.psd_error:g}")
    roots = np.sqrt(np.clip(evals, 0.0, None))
    return (vecs * roots[..., None, :]) @ dagger(vecs)


def spin_flip_conjugate(rho):
    """Two-qubit spin flip (sigma_y x sigma_y) conj(rho) (sigma_y x sigma_y)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (4, 4):
        raise WrongDimension(f"spin flip needs 4x4 input, got {rho.shape[-2:]}")
    return SIGMA_YY @ np.conj(rho) @ SIGMA_YY
