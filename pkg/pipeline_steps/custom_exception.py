class LaxMonodromyException(Exception):
    """
    Base class of every failure raised by the library. ``exit_code`` is the
    process exit status the command line maps the failure to.
    """

    exit_code: int = 3

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class RetryablePipelineStepException(LaxMonodromyException):
    """
    Exception raised when a pipeline step fails and can be retried.
    """

    def __init__(self, message: str, retry_count: int = 3):
        self.retry_count = retry_count
        super().__init__(message)


# verdict failures, exit code 2


class NonGeneric(LaxMonodromyException):
    exit_code = 2


class ResidueMismatch(LaxMonodromyException):
    exit_code = 2


class UnexpectedPermutation(LaxMonodromyException):
    exit_code = 2


# numerical failures, exit code 3


class ToleranceFailure(LaxMonodromyException):
    pass


class NoReturn(LaxMonodromyException):
    pass


class UnwrapFailure(LaxMonodromyException):
    pass


class RefinementExhausted(RetryablePipelineStepException):
    """
    Root tracking could not resolve a step by bisection. Usually a double
    root sits on the path; retrying with more samples helps only when the
    coarse grid was the problem.
    """

    def __init__(self, message: str, retry_count: int = 2):
        super().__init__(message, retry_count=retry_count)


class DegenerateLeadingCoefficient(LaxMonodromyException):
    pass


class NotClosed(LaxMonodromyException):
    pass


class ConstraintViolation(LaxMonodromyException):
    pass


class AtInfinity(LaxMonodromyException):
    pass


class FiberEmpty(LaxMonodromyException):
    pass


class BranchFailure(LaxMonodromyException):
    pass


class DegenerateFiber(LaxMonodromyException):
    pass


class UsageError(LaxMonodromyException):
    exit_code = 64
