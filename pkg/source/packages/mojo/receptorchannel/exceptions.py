"""
.. module:: exceptions
    :platform: Darwin, Linux, Unix, Windows
    :synopsis: Module that contains the exception types raised by the receptor channel
               package.  User errors derive from :class:`ValueError` and numerical
               consistency failures derive from :class:`ArithmeticError` so callers
               can catch them with the builtin types as well.

.. moduleauthor:: Myron Walker <myron.walker@gmail.com>
"""

__author__ = "Myron Walker"
__copyright__ = "Copyright 2023, Myron W Walker"
__credits__ = []


from typing import Optional


class ReceptorChannelError(Exception):
    """
        Base class for all errors raised by the receptor channel package.
    """


class ChannelValidationError(ReceptorChannelError, ValueError):
    """
        Raised when kinetics, rate vectors, policies or simulation settings violate
        their invariants.
    """


class StepSizeError(ChannelValidationError):
    """
        Raised when a time step is too large for the rates of a channel, which would
        produce a negative diagonal in a discrete transition matrix.
    """

    def __init__(self, tau: float, row: int, exit_rate: float):
        self.tau = tau
        self.row = row
        self.exit_rate = exit_rate
        msg = (
            f"Time step tau={tau!r} violates tau * max_k(a_k + b_k) < 1 at state {row}: "
            f"tau * {exit_rate!r} = {tau * exit_rate!r}; use tau < {1.0 / exit_rate!r}."
        )
        super().__init__(msg)
        return


class IrreducibilityError(ChannelValidationError):
    """
        Raised when the policy-averaged birth-death chain has an absent edge so that
        no unique stationary distribution exists.
    """


class EntropyDomainError(ReceptorChannelError, ValueError):
    """
        Raised when an entropy primitive is evaluated outside of its domain.
    """


class ConsistencyError(ReceptorChannelError, ArithmeticError):
    """
        Raised when an internal numerical identity fails.  This signals an
        implementation defect and not a user error.
    """


class OptimizerConfigurationError(ReceptorChannelError, ValueError):
    """
        Raised when the optimizer settings cannot be honored for a channel.
    """


class SpecificationError(ReceptorChannelError, ValueError):
    """
        Raised when a channel specification document or command line setting is
        malformed.

        :param message: Description of the problem.
        :param field: The settings path of the offending field, if known.
        :param line: The line number in the source document, if known.
    """

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line

        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field {field}")

        if len(location) > 0:
            message = f"{message} ({', '.join(location)})"

        super().__init__(message)
        return
