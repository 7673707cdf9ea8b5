"""Exception hierarchy shared by all modules."""


class MorseJTError(Exception):
    """Base class for every error raised by the package."""


class NonPositiveInput(MorseJTError, ValueError):
    pass


class NoBoundStates(MorseJTError, ValueError):
    pass


class IndexOutOfBasis(MorseJTError, IndexError):
    pass


class NonPositiveArgument(MorseJTError, ValueError):
    pass


class BasisTooSmall(MorseJTError, ValueError):
    pass


class EmptyInput(MorseJTError, ValueError):
    pass


class MissingTruncation(MorseJTError, ValueError):
    pass


class NphiTooSmall(MorseJTError, ValueError):
    pass


class NotAnEigenstate(MorseJTError, ValueError):
    pass


class DegenerateBlockUnresolved(MorseJTError, RuntimeError):
    """H_JT vanishes on a degenerate block, so first-order PT cannot lift it."""


class NotHermitian(MorseJTError, ValueError):
    pass


class ConfigInvalid(MorseJTError, ValueError):
    pass


class CheckFailed(MorseJTError, RuntimeError):
    pass
