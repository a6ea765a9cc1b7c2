"""Exception hierarchy.

Every domain error carries a stable ``code`` string; the CLI serializes it
into the error record it writes before exiting with status 1.
"""


class HolofactError(Exception):
    code = "HolofactError"


class CenterMismatch(HolofactError, ValueError):
    code = "CenterMismatch"


class ConstantTermMismatch(HolofactError, ValueError):
    code = "ConstantTermMismatch"


class LogOfZeroConstantTerm(HolofactError, ValueError):
    code = "LogOfZeroConstantTerm"


class InsufficientOrder(HolofactError, ValueError):
    code = "InsufficientOrder"


class UnsupportedVariant(HolofactError, ValueError):
    code = "UnsupportedVariant"


class QuadratureNonConvergence(HolofactError, ArithmeticError):
    code = "QuadratureNonConvergence"


class RayDivergence(HolofactError, ArithmeticError):
    code = "RayDivergence"


class SeedAtExceptionalValue(HolofactError, ValueError):
    code = "SeedAtExceptionalValue"


class NonElhSpec(HolofactError, ValueError):
    code = "NonElhSpec"


class BoxHitsExceptionalValue(HolofactError, ValueError):
    code = "BoxHitsExceptionalValue"


class PreconditionFailed(HolofactError, ValueError):
    code = "PreconditionFailed"


class NotRegularDirection(HolofactError, ValueError):
    code = "NotRegularDirection"


class OverlapMismatch(HolofactError, ArithmeticError):
    code = "OverlapMismatch"


class GIncomplete(HolofactError, ValueError):
    code = "GIncomplete"


class NotOmittedOnProbe(HolofactError, ValueError):
    code = "NotOmittedOnProbe"


class BranchObstruction(HolofactError, ArithmeticError):
    code = "BranchObstruction"


class ZeroValueOnProbe(HolofactError, ValueError):
    code = "ZeroValueOnProbe"


class HPrimeZeroOnBox(HolofactError, ValueError):
    code = "HPrimeZeroOnBox"


class IncompleteInput(HolofactError, ValueError):
    code = "IncompleteInput"


class SubadditivityViolation(HolofactError, ValueError):
    code = "SubadditivityViolation"


class GNotZeroAtOrigin(HolofactError, ValueError):
    code = "GNotZeroAtOrigin"


class DegenerateModulus(HolofactError, ValueError):
    code = "DegenerateModulus"


class UnderflowAtStage(HolofactError, ArithmeticError):
    code = "UnderflowAtStage"


class OutsideValidatedDisk(HolofactError, ValueError):
    code = "OutsideValidatedDisk"


class DefiningInequalityViolated(HolofactError, ArithmeticError):
    code = "DefiningInequalityViolated"


class SchemaError(HolofactError, ValueError):
    code = "SchemaError"

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class StrictFieldError(SchemaError):
    code = "StrictFieldError"

    def __init__(self, path):
        super().__init__(path, "unknown field")
