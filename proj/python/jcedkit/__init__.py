"""Joint chance-constrained economic dispatch with inverter frequency support.

Thin Python layer over the C++ core in ``jcedkit._core``.
"""

from ._core import *  # noqa: F401,F403
from ._core import Error, ParseError, ValidationError, NumericalError, BackendError, InfeasibleError  # noqa: F401

__version__ = "0.3.0"
