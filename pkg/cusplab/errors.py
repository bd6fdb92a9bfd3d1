"""Exceptions raised by the cusplab library"""


class CuspLabError(Exception):
    """Base class for every error raised by cusplab"""


class ParameterError(CuspLabError, ValueError):
    """A constructor or operation received arguments outside its domain"""


class LatticeError(CuspLabError):
    """Lattice construction or lattice calculus failed (e.g. "interior required")"""


class AlignmentError(CuspLabError):
    def __init__(self, msg='alignment required'):
        super().__init__(msg)


class GfnFormatError(CuspLabError):
    """A grid-function or mask file could not be parsed"""
    def __init__(self, path, line, msg):
        self.path = path
        self.line = line
        self.msg = msg
        super().__init__('{}:{}: {}'.format(path, line, msg))


class CertificationError(CuspLabError):
    """A generated function failed one of its certified conditions"""
    def __init__(self, condition, msg):
        self.condition = condition
        super().__init__('{}: {}'.format(condition, msg))


class ConvergenceError(CuspLabError):
    """The relaxation solver did not reach its residual tolerance"""
    def __init__(self, msg, history):
        self.history = list(history)
        super().__init__(msg)


class SeparationError(CuspLabError):
    def __init__(self, msg='singular separation'):
        super().__init__(msg)


class ExperimentError(CuspLabError):
    """An experiment could not run on its corpus"""
