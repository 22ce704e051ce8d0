class HgmError(Exception):
    """Base class for numerical failures raised by this package."""


class PoleError(HgmError, ValueError):
    """A generalized Pochhammer symbol in a denominator vanishes."""


class SingularPointError(HgmError, ValueError):
    """Evaluation point lies on y_i = 0 or y_i = y_j, where P_i blows up."""


class IntegrationError(HgmError, ArithmeticError):
    """Non-finite value met while integrating."""


class BracketError(HgmError):
    """Quantile search could not enclose the target probability."""
