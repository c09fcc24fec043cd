"""
Bracketing helpers around :func:`scipy.optimize.brentq`.

Every scalar equation in the package is solved the same way: a bracket is
grown geometrically away from a point where the sign of the residual is known,
then brentq closes it and the residual at the returned root is checked.
"""
import logging

import numpy as np
from scipy.optimize import brentq

from ..errors import ConvergenceError


logger = logging.getLogger(__name__)

XTOL = 1e-12
RTOL = 4 * np.finfo(float).eps
RESIDUAL_TOL = 1e-9
MAX_ITER = 200


def grow_bracket(f, anchor, width, factor=2.0, limit=MAX_ITER, stage=None):
    """
    Walk away from ``anchor`` in steps of geometrically growing ``width``
    until ``f`` changes sign.

    :param f: Scalar function.
    :param float anchor: Starting point; ``f(anchor)`` fixes the reference sign.
    :param float width: First step. Negative widths walk downwards.
    :param float factor: Growth factor of the step.
    :returns: ``(lo, hi)`` with ``lo < hi`` enclosing a sign change.
    :raises ConvergenceError: if no sign change is found within ``limit`` steps.
    """
    near = anchor
    f_near = f(anchor)
    for _ in range(limit):
        far = anchor + width
        f_far = f(far)
        if np.isnan(f_far):
            break
        if (f_near > 0) != (f_far > 0):
            logger.debug('%s bracket [%g, %g]', stage or 'root', near, far)
            return (near, far) if near < far else (far, near)
        near, f_near = far, f_far
        width *= factor
    raise ConvergenceError(
        'no sign change found walking from %g' % anchor,
        stage=stage,
        residuals={'last': float(f_near)},
    )


def find_root(f, lo, hi, stage=None, xtol=XTOL, residual_tol=RESIDUAL_TOL,
              maxiter=MAX_ITER):
    """
    Solve ``f(x) = 0`` on ``[lo, hi]`` and verify the residual.

    ``xtol`` is absolute; callers working on tiny scales should pass a scaled
    value.

    :raises ConvergenceError: if brentq does not converge or the residual at
        the root exceeds ``residual_tol``.
    """
    try:
        root, info = brentq(f, lo, hi, xtol=xtol, rtol=RTOL, maxiter=maxiter,
                            full_output=True, disp=False)
    except ValueError as e:
        raise ConvergenceError(str(e), stage=stage, residuals={
            'lo': float(f(lo)), 'hi': float(f(hi)),
        })
    residual = f(root)
    if not info.converged or not abs(residual) <= residual_tol:
        raise ConvergenceError(
            '%s equation not solved after %d iterations' % (
                stage or 'root', info.iterations),
            stage=stage,
            residuals={stage or 'root': float(residual)},
        )
    return root
