class CoulombError(Exception):
    pass


class DomainError(CoulombError, ValueError):
    """
    An argument lies outside the domain of the operation.
    """
    pass


class ConvergenceError(CoulombError, ArithmeticError):
    """
    A root finder or an eigenvalue iteration did not meet its tolerance.

    :param str stage: Which solve failed (``'support'``, ``'normalization'``,
        ``'rate'``, ``'jacobi'`` ...).
    :param dict residuals: Equation name to last residual.
    """

    def __init__(self, message, stage=None, residuals=None):
        super(ConvergenceError, self).__init__(message)
        self.stage = stage
        self.residuals = dict(residuals or {})

    def __str__(self):
        msg = super(ConvergenceError, self).__str__()
        if self.residuals:
            parts = ', '.join(
                '%s=%.3e' % (k, v) for k, v in sorted(self.residuals.items())
            )
            msg = '%s [%s]' % (msg, parts)
        return msg


class NumericalError(CoulombError, ArithmeticError):
    pass


class InsufficientSamplesError(CoulombError):

    def __init__(self, message, accepted=0, trials=0):
        super(InsufficientSamplesError, self).__init__(message)
        self.accepted = accepted
        self.trials = trials


class SweepSyntaxError(CoulombError):
    """
    A malformed sweep value or configuration statement.
    """

    def __init__(self, message, line=None, col=None):
        if line is not None:
            message = 'line %d: %s' % (line + 1, message)
        super(SweepSyntaxError, self).__init__(message)
        self.line = line
        self.col = col
