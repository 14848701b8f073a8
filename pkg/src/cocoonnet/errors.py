"""Exception hierarchy.

``InputError`` subclasses signal bad user data (the CLI maps them to exit
code 2); ``ComputationError`` subclasses signal numerical failure (exit 1).
"""


class CocoonError(Exception):
    """Base class for all package errors."""


class InputError(CocoonError, ValueError):
    pass


class ComputationError(CocoonError, RuntimeError):
    pass


class EmptyLayer(InputError):
    pass


class ZeroFeatureRow(InputError):
    pass


class BadK(InputError):
    pass


class BadRank(InputError):
    pass


class BadNodeId(InputError):
    pass


class ParseError(InputError):
    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class DuplicateNodeId(InputError):
    pass


class LengthMismatch(InputError):
    pass


class ShapeMismatch(InputError):
    pass


class NegativeFeature(InputError):
    pass


class NotSymmetric(InputError):
    pass


class InvalidConfig(InputError):
    pass


class DegenerateInput(InputError):
    pass


class NoConvergence(ComputationError):
    pass


class NonFiniteLoss(ComputationError):
    def __init__(self, epoch, lr):
        super().__init__(
            f"loss became non-finite at epoch {epoch}; try a learning rate below {lr:g}"
        )
        self.epoch = epoch
