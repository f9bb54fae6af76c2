"""Exception types shared across the package."""


class QwalkError(Exception):
    """Base class for all qwalk errors."""


class DomainError(QwalkError, ValueError):
    """A numeric argument lies outside its admissible range."""


class ValidationError(QwalkError, ValueError):
    """An input object violates one of its structural invariants."""


class WindowError(QwalkError, ValueError):
    """A lattice window is malformed or does not cover what it must."""


class SingularCoinError(QwalkError, ValueError):
    """Operation undefined for t = 0 (decoupled two-by-two blocks)."""


class ConditioningError(QwalkError, ValueError):
    """Spectral parameter too close to the unit circle for a resolvent solve."""


class NearEigenvalueError(QwalkError, ArithmeticError):
    """A Wronskian-type denominator vanished; z is numerically an eigenvalue."""


class DegenerateWitnessError(QwalkError, ValueError):
    """Noncompactness witness requires two distinct phases."""


class HypothesisError(QwalkError, ValueError):
    """A phase distribution violates the hypothesis an operation relies on."""


class FitError(QwalkError, ValueError):
    """Decay fit impossible (nonpositive or degenerate data)."""


class ConfigError(QwalkError, ValueError):
    """Experiment configuration is invalid."""

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))
