__version__ = '0.1.0'

from .errors import (  # noqa: E402
    CoulombError, ConvergenceError, DomainError, InsufficientSamplesError,
    NumericalError, SweepSyntaxError,
)
from .spectrum import (  # noqa: E402
    ChannelEnsemble, ConstrainedSpectrum, normalize_ensemble, solve_constrained,
)
