"""
Error Types

Exceptions raised across the toolkit. Feasibility findings of the
validator are reported as data and never raised.
"""


class EvspError(Exception):
    """Base class for all toolkit errors"""


# ===========================================
# Instance / file errors
# ===========================================

class InstanceFormatError(EvspError):
    """The instance or solution file cannot be parsed"""


class InstanceValidationError(EvspError):
    """An instance violates a domain invariant"""

    def __init__(self, invariant: str, detail: str):
        self.invariant = invariant
        self.detail = detail
        super().__init__(f"{invariant}: {detail}")


class UnknownCustomerError(EvspError, KeyError):
    """A customer id does not resolve against the instance"""


# ===========================================
# Backend errors
# ===========================================

class BackendError(EvspError):
    """Base class for MILP backend failures"""


class BackendCapabilityError(BackendError):
    """The selected backend lacks a capability an algorithm needs"""


class ModelFinalizedError(BackendError):
    """The model no longer accepts new variables or constraints"""


class UnknownVariableError(BackendError):
    """A variable handle does not belong to this model"""


class InvalidBoundsError(BackendError):
    """Bounds are inverted or a fixing value lies outside the original bounds"""


class SolverError(BackendError):
    """The solver stopped with an unexpected status"""


# ===========================================
# Model / algorithm errors
# ===========================================

class IntegralityViolationError(EvspError):
    """A variable declared integral by structure came back fractional"""


class TraceInconsistencyError(EvspError):
    """Vehicles cannot be traced through the fulfillments of a solution"""


class IrreparableWarmStartError(EvspError):
    """A warm start cannot be made consistent with the current fixings"""


class SizeCapExceededError(EvspError):
    """An input exceeds the size caps of an exhaustive routine"""


class InvalidScenarioError(EvspError, ValueError):
    """Unknown benchmark scenario id"""


class GraphValidationError(EvspError, ValueError):
    """A graph is not simple and undirected"""
