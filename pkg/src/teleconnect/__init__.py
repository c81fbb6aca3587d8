"""Time-series toolkit for Central England Temperature teleconnection analysis."""

__version__ = "0.1.0"

from teleconnect.errors import (
    AlignmentError,
    DomainError,
    NumericError,
    ParseError,
    SearchError,
    StructuralError,
    TeleconnectError,
)
from teleconnect.series import Period, TimeSeries

__all__ = [
    "AlignmentError",
    "DomainError",
    "NumericError",
    "ParseError",
    "Period",
    "SearchError",
    "StructuralError",
    "TeleconnectError",
    "TimeSeries",
    "__version__",
]
