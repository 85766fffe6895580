"""
Imports all common modules and extra imports
"""

# Logging
import logging

logger = logging.getLogger("PDFW")

# Exceptions
from .exceptions import (
    PDFWError,
    ContractViolation,
    UnsupportedInstance,
    InfeasibleRegion,
    ConditioningError,
    GenerationError,
    PropertyFailure,
    PlanError,
)

# Other utils
from .utils import timer, mean_and_se
