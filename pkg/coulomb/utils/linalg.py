"""
Small dense linear algebra kernels used by the Monte Carlo engine.

Both functions accept a single matrix or a stack of matrices of shape
``(..., n, n)``.
"""
import logging

import numpy as np

from ..errors import ConvergenceError, NumericalError


logger = logging.getLogger(__name__)

JACOBI_TOL = 1e-12
MAX_SWEEPS = 100


def _off_norm(a):
    # summed over the masked entries; the difference of the full and diagonal
    # norms cannot resolve anything below sqrt(eps) * ||a||
    off = np.where(np.eye(a.shape[-1], dtype=bool), 0.0, a)
    return np.sqrt(np.sum(off * off, axis=(-2, -1)))


def _jacobi_symmetric(a, tol=JACOBI_TOL, max_sweeps=MAX_SWEEPS):
    """
    Cyclic Jacobi on a stack of real symmetric matrices; returns the
    unsorted diagonals.
    """
    a = np.array(a, dtype=float)
    n = a.shape[-1]
    scale = np.sqrt(np.sum(a * a, axis=(-2, -1)))
    limit = tol * np.where(scale > 0, scale, 1.0)

    for sweep in range(max_sweeps):
        off = _off_norm(a)
        if np.all(off <= limit):
            logger.debug('jacobi converged after %d sweeps', sweep)
            return np.einsum('...ii->...i', a).copy()
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[..., p, q]
                theta = np.where(
                    apq == 0, 0.0,
                    0.5 * np.arctan2(2.0 * apq, a[..., q, q] - a[..., p, p]))
                c = np.cos(theta)[..., None]
                s = np.sin(theta)[..., None]

                col_p = a[..., :, p].copy()
                col_q = a[..., :, q].copy()
                a[..., :, p] = c * col_p - s * col_q
                a[..., :, q] = s * col_p + c * col_q

                row_p = a[..., p, :].copy()
                row_q = a[..., q, :].copy()
                a[..., p, :] = c * row_p - s * row_q
                a[..., q, :] = s * row_p + c * row_q

    off = _off_norm(a)
    if np.all(off <= limit):
        return np.einsum('...ii->...i', a).copy()
    raise ConvergenceError(
        'Jacobi iteration did not converge in %d sweeps' % max_sweeps,
        stage='jacobi',
        residuals={'off_diagonal': float(np.max(off / limit * tol))},
    )


def hermitian_eigenvalues(a, tol=JACOBI_TOL, max_sweeps=MAX_SWEEPS):
    """
    All eigenvalues of a Hermitian matrix (or stack), ascending.

    The input is symmetrized as ``(a + a^H) / 2`` and embedded in the real
    symmetric matrix ``[[X, -Y], [Y, X]]``, whose spectrum is that of ``a``
    with every eigenvalue doubled.

    :raises ConvergenceError: if the off-diagonal norm is still above
        ``tol * ||a||`` after ``max_sweeps`` sweeps.
    """
    a = np.asarray(a)
    a = 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))
    x, y = a.real, a.imag
    top = np.concatenate([x, -y], axis=-1)
    bottom = np.concatenate([y, x], axis=-1)
    embedded = np.concatenate([top, bottom], axis=-2)
    values = np.sort(_jacobi_symmetric(embedded, tol, max_sweeps), axis=-1)
    return values[..., ::2]


def cholesky_logdet(a):
    """
    ``log det a`` of a Hermitian positive definite matrix (or stack) as twice
    the summed log-diagonal of its Cholesky factor.

    :raises NumericalError: on non-finite input or a Cholesky breakdown.
    """
    a = np.asarray(a)
    if not np.all(np.isfinite(a)):
        raise NumericalError('non-finite entries in log-determinant input')
    try:
        factor = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as e:
        raise NumericalError('Cholesky factorization failed: %s' % e)
    diag = np.einsum('...ii->...i', factor).real
    return 2.0 * np.sum(np.log(diag), axis=-1)
